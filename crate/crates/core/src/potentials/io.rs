//! Text formats for tabulated potentials.
//!
//! Radial tables hold two whitespace- or comma-separated columns `r value`.
//! Grid files start with `# key = value` header lines naming `kind`
//! (`box` or `radial`), `dim`, `half_width` or `r_max`, and `n`, followed by
//! the samples in row-major order. Blank lines and other `#` lines are skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::grid::{GridKind, GridSpec};
use super::spec::PotentialSpec;
use crate::error::{invalid, Error, Result};
use crate::model::RadialTable;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn number(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("line {line}: cannot parse number {tok:?}")))
}

pub fn parse_radial_table(text: &str) -> Result<RadialTable> {
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            return invalid(format!("line {}: expected two columns, found {}", i + 1, cols.len()));
        }
        r.push(number(cols[0], i + 1)?);
        v.push(number(cols[1], i + 1)?);
    }
    RadialTable::new(r, v)
}

pub fn read_radial_table(path: &Path) -> Result<RadialTable> {
    parse_radial_table(&read(path)?)
}

/// Parses a grid file into its grid and samples.
pub fn parse_grid_file(text: &str) -> Result<(GridSpec, Vec<f64>)> {
    let mut header = BTreeMap::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
        {
            values.push(number(tok, i + 1)?);
        }
    }
    let get = |key: &str| {
        header
            .get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("grid header is missing `{key}`")))
    };
    let n: usize = get("n")?
        .parse()
        .map_err(|_| Error::InvalidArgument("grid header `n` must be an integer".into()))?;
    let grid = match get("kind")?.as_str() {
        "box" => {
            let dim: usize = get("dim")?
                .parse()
                .map_err(|_| Error::InvalidArgument("grid header `dim` must be an integer".into()))?;
            GridSpec::box_grid(dim, number(get("half_width")?, 0)?, n)?
        }
        "radial" => GridSpec::radial(number(get("r_max")?, 0)?, n)?,
        other => return invalid(format!("unknown grid kind {other:?}")),
    };
    if values.len() != grid.len() {
        return invalid(format!("grid expects {} values, file has {}", grid.len(), values.len()));
    }
    Ok((grid, values))
}

/// Reads a box-grid file as a grid-sampled potential.
pub fn read_grid_potential(path: &Path) -> Result<PotentialSpec> {
    let (grid, values) = parse_grid_file(&read(path)?)?;
    PotentialSpec::grid_sampled(grid, values)
}

pub fn format_grid_file(grid: &GridSpec, values: &[f64]) -> String {
    let mut out = String::new();
    match grid.kind {
        GridKind::Box { dim, half_width } => {
            let _ = writeln!(out, "# kind = box\n# dim = {dim}\n# half_width = {half_width:e}");
        }
        GridKind::Radial { r_max } => {
            let _ = writeln!(out, "# kind = radial\n# r_max = {r_max:e}");
        }
    }
    let _ = writeln!(out, "# n = {}", grid.n);
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
    out
}

pub fn write_grid_file(path: &Path, grid: &GridSpec, values: &[f64]) -> Result<()> {
    std::fs::write(path, format_grid_file(grid, values))
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_table_parses_both_separators() {
        let t = parse_radial_table("# r v\n0 -1\n1, -0.5\n\n2 0\n").unwrap();
        assert_eq!(t.radii(), &[0.0, 1.0, 2.0]);
        assert_eq!(t.values(), &[-1.0, -0.5, 0.0]);
        assert!(parse_radial_table("0 1 2\n").is_err());
    }

    #[test]
    fn grid_round_trip() {
        let grid = GridSpec::box_grid(2, 1.5, 9).unwrap();
        let values: Vec<f64> = (0..grid.len()).map(|i| (i as f64).sin() / 3.0).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.grid");
        write_grid_file(&path, &grid, &values).unwrap();
        let v = read_grid_potential(&path).unwrap();
        assert_eq!(v.sample(&grid).unwrap(), values);
    }

    #[test]
    fn grid_header_errors() {
        assert!(parse_grid_file("# kind = box\n# dim = 1\n# n = 8\n").is_err());
        assert!(parse_grid_file("# kind = cube\n# n = 8\n").is_err());
        let ok = "# kind = radial\n# r_max = 1\n# n = 8\n0 1 2 3 4 5 6 7\n";
        assert_eq!(parse_grid_file(ok).unwrap().1.len(), 8);
    }
}
