//! Axis-wise FFTs over `ndarray` arrays.

use ndarray::{ArrayD, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place unnormalized DFT along every axis (`inverse` flips the sign).
pub fn fft_nd(data: &mut ArrayD<Complex64>, inverse: bool) {
    let mut planner = FftPlanner::new();
    for ax in 0..data.ndim() {
        let len = data.shape()[ax];
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut buf = vec![Complex64::default(); len];
        for mut lane in data.lanes_mut(Axis(ax)) {
            for (b, x) in buf.iter_mut().zip(lane.iter()) {
                *b = *x;
            }
            fft.process(&mut buf);
            for (x, b) in lane.iter_mut().zip(buf.iter()) {
                *x = *b;
            }
        }
    }
}

/// Linear (non-circular) convolution of `data` with a symmetric kernel
/// `kernel[0..=half]` (`kernel[j]` weights offset ±j), computed by FFT.
pub fn convolve_symmetric_fft(data: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = data.len();
    let half = kernel.len() - 1;
    let len = n + 2 * half;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let mut x = vec![Complex64::default(); len];
    for (i, v) in data.iter().enumerate() {
        x[i] = Complex64::new(*v, 0.0);
    }
    let mut k = vec![Complex64::default(); len];
    k[0] = Complex64::new(kernel[0], 0.0);
    for j in 1..=half {
        k[j] = Complex64::new(kernel[j], 0.0);
        k[len - j] = Complex64::new(kernel[j], 0.0);
    }
    fwd.process(&mut x);
    fwd.process(&mut k);
    x.iter_mut().zip(&k).for_each(|(a, b)| *a *= b);
    inv.process(&mut x);
    let scale = 1.0 / len as f64;
    x[..n].iter().map(|c| c.re * scale).collect()
}

/// Circular convolution of `data` (period n) with a symmetric kernel;
/// kernel offsets wider than the period are folded.
pub fn convolve_symmetric_periodic(data: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = data.len();
    let mut folded = vec![0.0; n];
    folded[0] += kernel[0];
    for (j, w) in kernel.iter().enumerate().skip(1) {
        folded[j % n] += w;
        folded[(n - j % n) % n] += w;
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut x: Vec<Complex64> = data.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut k: Vec<Complex64> = folded.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fwd.process(&mut x);
    fwd.process(&mut k);
    x.iter_mut().zip(&k).for_each(|(a, b)| *a *= b);
    inv.process(&mut x);
    let scale = 1.0 / n as f64;
    x.iter().map(|c| c.re * scale).collect()
}

/// Direct-summation linear convolution; reference path for the FFT routes.
pub fn convolve_symmetric_direct(data: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = data.len() as isize;
    let half = kernel.len() as isize - 1;
    (0..n)
        .map(|i| {
            let lo = (i - half).max(0);
            let hi = (i + half).min(n - 1);
            (lo..=hi)
                .map(|j| kernel[(i - j).unsigned_abs()] * data[j as usize])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_and_direct_convolution_agree() {
        let data: Vec<f64> = (0..37).map(|i| ((i * 7 % 11) as f64).sin()).collect();
        let kernel = vec![0.4, 0.2, 0.08, 0.02];
        let a = convolve_symmetric_fft(&data, &kernel);
        let b = convolve_symmetric_direct(&data, &kernel);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn fft_nd_round_trip() {
        let mut a = ArrayD::from_shape_fn(vec![4, 6], |ix| Complex64::new(ix[0] as f64, ix[1] as f64 * 0.5));
        let orig = a.clone();
        fft_nd(&mut a, false);
        fft_nd(&mut a, true);
        for (x, y) in a.iter().zip(orig.iter()) {
            assert!((x / 24.0 - y).norm() < 1e-13);
        }
    }
}
