//! One function per subcommand. Each reads what it needs from the config and
//! returns scalars, tables and invariant checks.

use anyhow::{bail, Result};
use effham_core::focksim::{
    coherent_ground, continuum_overlap, discrete_bare_mass, dressed_density, dressed_quadratic_form, eigen_residual,
    fiber_ground_energy_exact, fiber_hamiltonian, overlap, overlap_exponent, truncation_sweep, DiscreteModes,
    FockBasis, ModePreset, MomentumWavefunction, OverlapKernel, PhaseSpaceGrid, MAX_DIAGONALIZED_CHANNELS,
};
use effham_core::linalg::LanczosOptions;
use effham_core::potentials::{
    check_condition_v2_seeded, effective_potential, effective_potential_with, rollnik_norm_estimate_seeded,
    DEFAULT_SEED,
};
use effham_core::spectra::low_spectrum;
use effham_core::{
    build_hamiltonian, level_shifts, spectral_inequality_report, CouplingResult, Error, GridSpec, HamiltonianOptions,
    MassConvention, PhysicalParams, PotentialKind, PotentialSource, PotentialSpec, SpectralResult, Verdict,
};

use crate::config::Loaded;
use crate::report::{Cell, Outcome, Table};

fn convention_name(c: MassConvention) -> &'static str {
    match c {
        MassConvention::ObservedInInteraction => "observed",
        MassConvention::BareInInteraction => "bare",
    }
}

fn hamiltonian_options(ctx: &Loaded) -> HamiltonianOptions {
    let o = &ctx.config.options;
    HamiltonianOptions {
        order: o.order,
        ell: o.ell,
        solver: LanczosOptions {
            tol: o.solver_tol,
            ..LanczosOptions::default()
        },
    }
}

fn record_coupling(out: &mut Outcome, c: &CouplingResult) {
    out.scalar("i2", c.i2);
    out.scalar("i3", c.i3);
    out.scalar("m", c.m);
    out.scalar("m0", c.m0);
    out.scalar("convention", convention_name(c.convention));
}

pub fn coupling(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (params, convention) = ctx.physical()?;
    let field = ctx.field(&params)?;
    let c = effham_core::effective_coupling(&params, &field, convention)?;
    let mut out = Outcome::default();
    out.scalar("a", c.a);
    out.scalar("kernel_width", c.a.sqrt());
    out.scalar("mass_in_a", c.mass_in_a);
    record_coupling(&mut out, &c);
    let m0 = c.m0.unwrap_or(c.m);
    let mut t = Table::new("coupling", &["quantity", "value"]);
    for (k, v) in [("a", c.a), ("i2", c.i2), ("i3", c.i3), ("m", c.m), ("m0", m0)] {
        t.push(vec![k.into(), v.into()]);
    }
    out.tables.push(t);
    out.check(
        "a_non_negative",
        c.a >= 0.0 && c.a.is_finite(),
        format!("a = {:e}", c.a),
    );
    out.check(
        "bare_mass_not_above_observed",
        m0 > 0.0 && m0 <= c.m,
        format!("m0 = {m0}, m = {}", c.m),
    );
    Ok(out)
}

pub fn smooth(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (params, _) = ctx.physical()?;
    let v = ctx.potential(params.d)?;
    let grid = ctx.grid(params.d, &v)?;
    let (a, coupling) = ctx.smoothing()?;
    let sv = effective_potential_with(&v, a, Some(&grid), ctx.convolution())?;
    let bare = v.sample(&grid)?;
    let eff = sv.sample(&grid)?;
    let mut out = Outcome::default();
    out.warnings.extend(sv.warnings.iter().cloned());
    out.scalar("a", a);
    if let Some(c) = &coupling {
        record_coupling(&mut out, c);
    }
    let header: Vec<String> = if grid.is_radial() {
        vec!["r".into()]
    } else {
        (1..=grid.dim()).map(|i| format!("x{i}")).collect()
    };
    let mut table = Table::with_header(
        "smooth",
        header.into_iter().chain(["v".into(), "v_eff".into()]).collect(),
    );
    for (i, (b, e)) in bare.iter().zip(&eff).enumerate() {
        let mut row: Vec<Cell> = grid.point(&grid.unravel(i)).into_iter().map(Cell::from).collect();
        row.push((*b).into());
        row.push((*e).into());
        table.push(row);
    }
    out.tables.push(table);
    let floor = v.infimum();
    let min_eff = eff.iter().cloned().fold(f64::INFINITY, f64::min);
    out.scalar("v_eff_min", min_eff);
    out.scalar("v_eff_max", eff.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let slack = 1e-10 * (1.0 + floor.abs());
    out.check(
        "lower_bound_preserved",
        !floor.is_finite() || min_eff >= floor - slack,
        format!("min V_eff = {min_eff}, inf V = {floor}"),
    );
    Ok(out)
}

fn solve(
    v: &PotentialSpec,
    a: Option<f64>,
    grid: &GridSpec,
    params: &PhysicalParams,
    k: usize,
    ctx: &Loaded,
    warnings: &mut Vec<String>,
) -> Result<SpectralResult> {
    let source = match a {
        None => PotentialSource::Bare(v.clone()),
        Some(a) => {
            let s = effective_potential_with(v, a, Some(grid), ctx.convolution())?;
            warnings.extend(s.warnings.iter().cloned());
            PotentialSource::Smoothed(s)
        }
    };
    let h = build_hamiltonian(&source, grid, params.m, params, hamiltonian_options(ctx))?;
    Ok(low_spectrum(&h, k)?)
}

pub fn spectrum(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (a, coupling) = ctx.smoothing()?;
    let params = ctx.kinetic_params(coupling.as_ref())?;
    let v = ctx.potential(params.d)?;
    let grid = ctx.grid(params.d, &v)?;
    let fine = grid.refined();
    let k = ctx.config.options.levels;
    let mut out = Outcome::default();
    let mut warnings = Vec::new();
    let bare = solve(&v, None, &grid, &params, k, ctx, &mut warnings)?;
    let bare_fine = solve(&v, None, &fine, &params, k, ctx, &mut warnings)?;
    let eff = solve(&v, Some(a), &grid, &params, k, ctx, &mut warnings)?;
    let eff_fine = solve(&v, Some(a), &fine, &params, k, ctx, &mut warnings)?;
    warnings.dedup();
    out.warnings = warnings;
    out.scalar("a", a);
    out.scalar("mass", params.m);
    out.scalar("grid_n", grid.n);
    out.scalar("refined_n", fine.n);
    let mut t = Table::new(
        "spectrum",
        &[
            "level",
            "bare",
            "bare_refined",
            "bare_residual",
            "effective",
            "effective_refined",
            "effective_residual",
        ],
    );
    let mut worst: f64 = 0.0;
    for i in 0..k {
        t.push(vec![
            i.into(),
            bare.eigenvalues[i].into(),
            bare_fine.eigenvalues[i].into(),
            bare.residuals[i].into(),
            eff.eigenvalues[i].into(),
            eff_fine.eigenvalues[i].into(),
            eff.residuals[i].into(),
        ]);
        let scale = 1.0 + bare.eigenvalues[i].abs().max(eff.eigenvalues[i].abs());
        worst = worst.max(bare.residuals[i].max(eff.residuals[i]) / scale);
    }
    out.tables.push(t);
    let tol = 100.0 * ctx.config.options.solver_tol;
    out.check(
        "eigen_residuals",
        worst <= tol,
        format!("largest scaled residual {worst:.2e} (limit {tol:.1e})"),
    );
    Ok(out)
}

pub fn shift(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (a, coupling) = ctx.smoothing()?;
    let params = ctx.kinetic_params(coupling.as_ref())?;
    let v = ctx.potential(params.d)?;
    let grid = ctx.grid(params.d, &v)?;
    let k = ctx.config.options.levels;
    let shifts = level_shifts(&v, a, &grid, &params, k, hamiltonian_options(ctx))?;
    let mut out = Outcome::default();
    out.scalar("a", a);
    out.scalar("mass", params.m);
    let mut t = Table::new("shift", &["level", "bare", "effective", "full", "first_order"]);
    for s in &shifts {
        t.push(vec![
            s.state_index.into(),
            s.bare.into(),
            s.effective.into(),
            s.full.into(),
            s.first_order.into(),
        ]);
    }
    out.tables.push(t);
    if let PotentialKind::Harmonic { k: stiffness } = v.kind {
        let expected = stiffness * params.d as f64 * a;
        out.scalar("expected_shift", expected);
        let dev = shifts.iter().map(|s| (s.full - expected).abs()).fold(0.0, f64::max);
        let tol = ctx.config.options.tolerance.unwrap_or(1e-7);
        out.check(
            "harmonic_shift_constant",
            dev <= tol * (1.0 + expected.abs()),
            format!("max |full − K·d·a| = {dev:.2e} with K·d·a = {expected}"),
        );
    }
    Ok(out)
}

fn default_momenta(d: usize) -> Vec<Vec<f64>> {
    let mut e1 = vec![0.0; d];
    e1[0] = 0.5;
    let mixed: Vec<f64> = (0..d)
        .map(|i| if i % 2 == 0 { 0.3 * (i + 1) as f64 } else { -0.4 })
        .collect();
    vec![vec![0.0; d], e1, mixed]
}

/// Kinetic mass of the fiber and the observed mass it should reproduce.
fn fiber_masses(modes: &DiscreteModes, params: &PhysicalParams, convention: MassConvention) -> Result<(f64, f64)> {
    let dressed = discrete_bare_mass(modes, params);
    match convention {
        MassConvention::ObservedInInteraction => Ok((dressed, params.m)),
        MassConvention::BareInInteraction => {
            // 1/m = 1/m₀ − (1/m₀' − 1/m₀) with m₀' the bare mass the same correction would give.
            let inverse = 2.0 / params.m - 1.0 / dressed;
            if inverse <= 0.0 {
                return Err(Error::PositivityViolation {
                    inverse_mass: inverse,
                    critical_charge: f64::NAN,
                }
                .into());
            }
            Ok((params.m, 1.0 / inverse))
        }
    }
}

pub fn fiber(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (params, convention) = ctx.physical()?;
    let field = ctx.field(&params)?;
    let modes = ctx.modes(&field, ModePreset::Tiny)?;
    let (m0, m) = fiber_masses(&modes, &params, convention)?;
    let d = params.d;
    let opts = &ctx.config.options;
    let momenta = if opts.momenta.is_empty() {
        default_momenta(d)
    } else {
        opts.momenta.clone()
    };
    if let Some(p) = momenta.iter().find(|p| p.len() != d) {
        bail!("options.momenta: {p:?} does not have {d} components");
    }
    let channels = modes.channel_count();
    let sweep = channels <= MAX_DIAGONALIZED_CHANNELS;
    let mut out = Outcome::default();
    out.scalar("channels", channels);
    out.scalar("kinetic_mass", m0);
    out.scalar("observed_mass", m);
    out.scalar("max_total", opts.max_total);
    if !sweep {
        out.warnings.push(format!(
            "{channels} channels exceed the diagonalization limit {MAX_DIAGONALIZED_CHANNELS}; truncation sweep skipped"
        ));
    }
    let basis = FockBasis::new(channels, opts.max_total)?;
    out.scalar("basis_dimension", basis.len());
    let coord: Vec<String> = (1..=d).map(|i| format!("p{i}")).collect();
    let mut table = Table::with_header(
        "fiber",
        ["case".to_string()]
            .into_iter()
            .chain(coord)
            .chain(
                [
                    "exact",
                    "expected",
                    "truncated",
                    "coherent_residual",
                    "coherent_norm_sqr",
                ]
                .map(String::from),
            )
            .collect(),
    );
    let mut sweep_table = Table::new("fiber_sweep", &["case", "max_total", "energy"]);
    let (mut worst_mass, mut worst_var, mut worst_mono): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let tol = opts.tolerance.unwrap_or(1e-10);
    for (case, p) in momenta.iter().enumerate() {
        let exact = fiber_ground_energy_exact(&modes, p, &params, m0)?;
        let expected = p.iter().map(|x| x * x).sum::<f64>() / (2.0 * m);
        worst_mass = worst_mass.max((exact - expected).abs() / (1.0 + expected.abs()));
        let h = fiber_hamiltonian(&modes, &basis, p, &params, m0)?;
        let phi = coherent_ground(&modes, p, &params, &basis)?;
        let residual = eigen_residual(&h, &phi.coefficients, exact);
        let truncated = if sweep {
            let energies = truncation_sweep(&modes, p, &params, m0, opts.max_total)?;
            for (n, e) in energies.iter().enumerate() {
                sweep_table.push(vec![case.into(), n.into(), (*e).into()]);
            }
            for w in energies.windows(2) {
                worst_mono = worst_mono.max(w[1] - w[0]);
            }
            let last = *energies.last().expect("non-empty sweep");
            worst_var = worst_var.max(exact - last);
            last
        } else {
            f64::NAN
        };
        let mut row: Vec<Cell> = vec![case.into()];
        row.extend(p.iter().map(|&x| Cell::from(x)));
        row.extend([exact, expected, truncated, residual, phi.truncated_norm_sqr()].map(Cell::from));
        table.push(row);
    }
    out.tables.push(table);
    if sweep {
        out.tables.push(sweep_table);
        out.check(
            "sweep_monotone",
            worst_mono <= tol,
            format!("largest increase along the sweep {worst_mono:.2e}"),
        );
        out.check(
            "sweep_above_exact",
            worst_var <= tol,
            format!("largest amount the truncated energy falls below the exact one {worst_var:.2e}"),
        );
    }
    // E0(P) = |P|²/2m needs Σ g gᵀ/ω proportional to the identity.
    let aniso = anisotropy(&modes.coupling_tensor(1), d);
    out.scalar("coupling_anisotropy", aniso);
    out.scalar("mass_cancellation_deviation", worst_mass);
    if aniso <= 1e-10 {
        out.check(
            "mass_cancellation",
            worst_mass <= tol,
            format!("max |E0(P) − |P|²/2m| / (1 + |P|²/2m) = {worst_mass:.2e}"),
        );
    } else {
        out.warnings.push(format!(
            "mode set is anisotropic ({aniso:.2e}); E0(P) = |P|²/2m holds only along isotropic directions, check skipped"
        ));
    }
    Ok(out)
}

/// max |T − (tr T/d)·I| relative to tr T/d.
fn anisotropy(t: &[f64], d: usize) -> f64 {
    let mean = (0..d).map(|i| t[i * d + i]).sum::<f64>() / d as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let id = if i == j { mean } else { 0.0 };
            worst = worst.max((t[i * d + j] - id).abs());
        }
    }
    worst / mean.abs()
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        bail!("options.direction must be a non-zero vector");
    }
    Ok(v.iter().map(|x| x / n).collect())
}

pub fn overlap_scan(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (params, convention) = ctx.physical()?;
    let field = ctx.field(&params)?;
    let c = effham_core::effective_coupling(&params, &field, convention)?;
    let modes = ctx.modes(&field, ModePreset::Medium)?;
    let d = params.d;
    let opts = &ctx.config.options;
    let base = opts.base_momentum.clone().unwrap_or_else(|| vec![0.0; d]);
    let dir = match &opts.direction {
        Some(v) => unit(v)?,
        None => {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        }
    };
    if base.len() != d || dir.len() != d {
        bail!("options.base_momentum and options.direction need {d} components");
    }
    if opts.dp_steps < 2 || opts.dp_max.is_nan() || opts.dp_max <= 0.0 {
        bail!("options.dp_steps must be at least 2 and options.dp_max positive");
    }
    let mut out = Outcome::default();
    out.scalar("a", c.a);
    out.scalar("channels", modes.channel_count());
    let modes_coef = overlap_exponent(&modes, &dir, &params);
    out.scalar("modes_exponent_coefficient", modes_coef);
    out.scalar("continuum_exponent_coefficient", c.a / (params.hbar * params.hbar));
    let mut t = Table::new(
        "overlap",
        &["dp", "modes", "modes_reversed", "continuum", "relative_difference"],
    );
    let (mut sym, mut range_ok, mut mono) = (0.0f64, true, true);
    let mut prev = f64::INFINITY;
    for i in 0..opts.dp_steps {
        let s = opts.dp_max * i as f64 / (opts.dp_steps - 1) as f64;
        let dp: Vec<f64> = dir.iter().map(|x| s * x).collect();
        let p2: Vec<f64> = base.iter().zip(&dp).map(|(a, b)| a + b).collect();
        let o = overlap(&modes, &base, &p2, &params)?;
        let back = overlap(&modes, &p2, &base, &params)?;
        let cont = continuum_overlap(c.a, &dp, params.hbar);
        sym = sym.max((o - back).abs());
        range_ok &= o > 0.0 && o <= 1.0 && (i > 0 || o == 1.0);
        mono &= o <= prev;
        prev = o;
        t.push(vec![
            s.into(),
            o.into(),
            back.into(),
            cont.into(),
            ((o - cont) / cont).into(),
        ]);
    }
    out.tables.push(t);
    out.check("symmetric", sym == 0.0, format!("max |⟨P,P'⟩ − ⟨P',P⟩| = {sym:e}"));
    out.check("unit_interval", range_ok, "overlap in (0, 1] and equal to 1 at ΔP = 0");
    out.check("monotone_in_dp", mono, "overlap non-increasing along the ray");
    Ok(out)
}

pub fn dressed_check(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (a, coupling) = ctx.smoothing()?;
    let params = ctx.kinetic_params(coupling.as_ref())?;
    let v = ctx.potential(params.d)?;
    let opts = &ctx.config.options;
    let grid = PhaseSpaceGrid::new(params.d, opts.phase_n, opts.phase_length, params.hbar)?;
    let psi = MomentumWavefunction::gaussian(grid, opts.sigma)?;
    let continuum = OverlapKernel::Continuum { a };
    let form = dressed_quadratic_form(&psi, &v, &continuum, &params)?;
    // ⟨ψ, H_eff ψ⟩ on the same lattice: undressed density against V_eff.
    let rho = dressed_density(&psi, &OverlapKernel::Continuum { a: 0.0 });
    let veff = effective_potential(&v, a, None)?;
    let vol = grid.dx().powi(grid.dim as i32);
    let reference_potential: f64 = rho
        .iter()
        .enumerate()
        .map(|(i, r)| vol * r * veff.value_at(&grid.position(i)))
        .sum();
    let reference = form.kinetic + reference_potential;
    let residual = (form.total() - reference).abs() / reference.abs().max(1e-300);
    let mut out = Outcome::default();
    out.warnings.extend(veff.warnings.iter().cloned());
    out.scalar("a", a);
    out.scalar("kinetic", form.kinetic);
    out.scalar("potential", form.potential);
    out.scalar("h_eff_expectation", reference);
    let mut t = Table::new(
        "dressed",
        &[
            "kernel",
            "kinetic",
            "potential",
            "total",
            "reference",
            "relative_residual",
        ],
    );
    t.push(vec![
        "continuum".into(),
        form.kinetic.into(),
        form.potential.into(),
        form.total().into(),
        reference.into(),
        residual.into(),
    ]);
    if ctx.config.modes.is_some() {
        let (iparams, _) = ctx.physical()?;
        let field = ctx.field(&iparams)?;
        let modes = ctx.modes(&field, ModePreset::Fine)?;
        let mform = dressed_quadratic_form(&psi, &v, &OverlapKernel::from_modes(&modes, &iparams), &params)?;
        let rel = (mform.total() - form.total()).abs() / form.total().abs().max(1e-300);
        out.scalar("modes_vs_continuum", rel);
        t.push(vec![
            "modes".into(),
            mform.kinetic.into(),
            mform.potential.into(),
            mform.total().into(),
            form.total().into(),
            rel.into(),
        ]);
    }
    out.tables.push(t);
    let tol = opts.tolerance.unwrap_or(1e-6);
    out.check(
        "form_identity",
        residual <= tol,
        format!("dressed form vs ⟨ψ, H_eff ψ⟩ relative residual {residual:.2e} (limit {tol:.1e})"),
    );
    Ok(out)
}

fn verdict_row(name: &str, v: &Result<Verdict, Error>) -> Vec<Cell> {
    match v {
        Ok(Verdict::Finite { value, error }) => vec![name.into(), "finite".into(), (*value).into(), (*error).into()],
        Ok(Verdict::Divergent) => vec![name.into(), "divergent".into(), f64::NAN.into(), f64::NAN.into()],
        Ok(Verdict::Inconclusive { last }) => {
            vec![name.into(), "inconclusive".into(), (*last).into(), f64::NAN.into()]
        }
        Err(_) => vec![name.into(), "unsupported".into(), f64::NAN.into(), f64::NAN.into()],
    }
}

pub fn conditions(ctx: &Loaded, seed: u64) -> Result<Outcome> {
    let (params, _) = ctx.physical()?;
    let v = ctx.potential(params.d)?;
    let opts = &ctx.config.options;
    let v2 = check_condition_v2_seeded(&v, opts.t, opts.budget, seed)?;
    let rollnik = match rollnik_norm_estimate_seeded(&v, opts.budget, seed) {
        Err(e @ Error::UnsupportedDimension { .. }) => Err(e),
        other => Ok(other?),
    };
    let mut out = Outcome::default();
    if let Err(e) = &rollnik {
        out.warnings.push(e.to_string());
    }
    let adm = v.admissibility();
    out.scalar("t", opts.t);
    out.scalar("budget", opts.budget);
    out.scalar("declared", adm);
    out.scalar("gaussian_l1", v2);
    out.scalar("rollnik", rollnik.as_ref().ok());
    let mut t = Table::new("conditions", &["condition", "verdict", "value", "error"]);
    t.push(verdict_row("gaussian_l1", &Ok(v2)));
    t.push(verdict_row("rollnik", &rollnik));
    out.tables.push(t);
    out.check(
        "declared_gaussian_integrability",
        !(adm.gaussian_integrable && matches!(v2, Verdict::Divergent)),
        format!("declared {}, numerical verdict {v2:?}", adm.gaussian_integrable),
    );
    Ok(out)
}

pub fn inequality(ctx: &Loaded, _seed: u64) -> Result<Outcome> {
    let (a, coupling) = ctx.smoothing()?;
    let params = ctx.kinetic_params(coupling.as_ref())?;
    let v = ctx.potential(params.d)?;
    let grid = ctx.grid(params.d, &v)?;
    let r = spectral_inequality_report(&v, a, &grid, &params, hamiltonian_options(ctx))?;
    let mut out = Outcome::default();
    out.scalar("report", r);
    let mut t = Table::new("inequality", &["a", "bare", "effective", "gap", "tolerance", "holds"]);
    t.push(vec![
        r.a.into(),
        r.bare.into(),
        r.effective.into(),
        r.gap.into(),
        r.tolerance.into(),
        (if r.holds { "true" } else { "false" }).into(),
    ]);
    out.tables.push(t);
    out.check(
        "ground_energy_not_lowered",
        r.holds,
        format!(
            "inf σ(H_V) = {} vs inf σ(H_eff) = {} (tolerance {:.1e})",
            r.bare, r.effective, r.tolerance
        ),
    );
    Ok(out)
}

pub fn default_seed() -> u64 {
    DEFAULT_SEED
}
