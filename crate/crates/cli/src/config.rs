//! Run configuration: one TOML document with nested blocks. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use effham_core::focksim::{discretize_field, preset_modes, AngularRule, DiscreteModes, ModePreset, RadialRule};
use effham_core::potentials::io::{read_grid_potential, read_radial_table};
use effham_core::potentials::ConvolutionMethod;
use effham_core::{
    effective_coupling, CouplingResult, Dispersion, FieldModel, FormFactor, GridSpec, MassConvention, PhysicalParams,
    PotentialKind, PotentialSpec,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub params: ParamsBlock,
    #[serde(default)]
    pub field: Option<FieldBlock>,
    #[serde(default)]
    pub potential: Option<PotentialBlock>,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub modes: Option<ModesBlock>,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Which mass the config states and which one the interaction carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Renormalization {
    /// `m` is the observed mass; the bare mass is derived.
    Observed,
    /// `m0` is the bare mass carried by the interaction; the observed mass is derived.
    Bare,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub eps0: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub m0: Option<f64>,
    pub d: usize,
    #[serde(default)]
    pub renormalization: Option<Renormalization>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionKind {
    #[default]
    Linear,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormFactorKind {
    #[default]
    SharpShell,
    GaussianShell,
    Tabulated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBlock {
    #[serde(default)]
    pub dispersion: DispersionKind,
    #[serde(default)]
    pub dispersion_table: Option<PathBuf>,
    #[serde(default)]
    pub formfactor: FormFactorKind,
    #[serde(default)]
    pub formfactor_table: Option<PathBuf>,
    #[serde(default)]
    pub center: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
    pub kappa: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialBlock {
    Harmonic {
        k: f64,
    },
    Coulomb {
        gamma: f64,
    },
    FiniteWell {
        depth: f64,
        radius: f64,
    },
    /// Two-column (radius, value) text file.
    Tabulated {
        file: PathBuf,
    },
    /// Grid file with a header describing the box.
    Grid {
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridBlock {
    Box { half_width: f64, n: usize },
    Radial { r_max: f64, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialRuleName {
    #[default]
    GaussLegendre,
    Midpoint,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModesBlock {
    Tiny,
    Medium,
    Fine,
    /// `angular` is the number of directions for d = 2 and the design order for d = 3.
    Custom {
        radial_points: usize,
        angular: usize,
        #[serde(default)]
        radial_rule: RadialRuleName,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionName {
    #[default]
    Fft,
    Direct,
    Periodic,
}

/// Experiment-specific knobs; each subcommand reads the ones it needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    /// Smoothing parameter; overrides the value derived from the field.
    pub a: Option<f64>,
    pub levels: usize,
    pub order: usize,
    pub ell: usize,
    pub convolution: ConvolutionName,
    pub solver_tol: f64,
    pub momenta: Vec<Vec<f64>>,
    pub max_total: usize,
    pub base_momentum: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    pub dp_max: f64,
    pub dp_steps: usize,
    pub phase_n: usize,
    pub phase_length: f64,
    pub sigma: f64,
    pub t: f64,
    pub budget: usize,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            a: None,
            levels: 4,
            order: 4,
            ell: 0,
            convolution: ConvolutionName::Fft,
            solver_tol: 1e-8,
            momenta: Vec::new(),
            max_total: 8,
            base_momentum: None,
            direction: None,
            dp_max: 3.0,
            dp_steps: 31,
            phase_n: 32,
            phase_length: 16.0,
            sigma: 1.0,
            t: 1.0,
            budget: 200_000,
            seed: None,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

/// A parsed config plus the directory that relative input paths refer to.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
    let config: Config =
        toml::from_str(&text).with_context(|| format!("config {} does not match the schema", path.display()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, base_dir })
}

impl Loaded {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Parameters with `m` set to the mass the config states, and the convention it implies.
    pub fn physical(&self) -> Result<(PhysicalParams, MassConvention)> {
        let p = &self.config.params;
        let (m, convention) = match (p.m, p.m0, p.renormalization) {
            (Some(_), Some(_), _) => bail!("params: give either m or m0, not both"),
            (Some(_), None, Some(Renormalization::Bare)) => {
                bail!("params: renormalization = \"bare\" expects the bare mass under m0")
            }
            (None, Some(_), Some(Renormalization::Observed)) => {
                bail!("params: renormalization = \"observed\" expects the observed mass under m")
            }
            (Some(m), None, _) => (m, MassConvention::ObservedInInteraction),
            (None, Some(m0), _) => (m0, MassConvention::BareInInteraction),
            (None, None, Some(Renormalization::Bare)) => (1.0, MassConvention::BareInInteraction),
            (None, None, _) => (1.0, MassConvention::ObservedInInteraction),
        };
        let params = PhysicalParams::new(p.hbar, p.c, p.eps0, p.q, m, p.d)?;
        Ok((params, convention))
    }

    pub fn field(&self, params: &PhysicalParams) -> Result<FieldModel> {
        let f = self
            .config
            .field
            .as_ref()
            .ok_or_else(|| anyhow!("this experiment needs a [field] block"))?;
        let dispersion = match (f.dispersion, &f.dispersion_table) {
            (DispersionKind::Linear, None) => Dispersion::Linear,
            (DispersionKind::Tabulated, Some(path)) => Dispersion::Tabulated(read_radial_table(&self.resolve(path))?),
            (DispersionKind::Linear, Some(_)) => bail!("field: dispersion_table given for a linear dispersion"),
            (DispersionKind::Tabulated, None) => bail!("field: tabulated dispersion needs dispersion_table"),
        };
        let formfactor = match f.formfactor {
            FormFactorKind::SharpShell => FormFactor::SharpShell,
            FormFactorKind::GaussianShell => FormFactor::GaussianShell {
                center: f.center.ok_or_else(|| anyhow!("field: gaussian_shell needs center"))?,
                width: f.width.ok_or_else(|| anyhow!("field: gaussian_shell needs width"))?,
            },
            FormFactorKind::Tabulated => {
                let path = f
                    .formfactor_table
                    .as_ref()
                    .ok_or_else(|| anyhow!("field: tabulated formfactor needs formfactor_table"))?;
                FormFactor::Tabulated(read_radial_table(&self.resolve(path))?)
            }
        };
        Ok(FieldModel::new(*params, dispersion, formfactor, f.kappa, f.lambda)?)
    }

    pub fn coupling(&self) -> Result<Option<CouplingResult>> {
        if self.config.field.is_none() {
            return Ok(None);
        }
        let (params, convention) = self.physical()?;
        let field = self.field(&params)?;
        Ok(Some(effective_coupling(&params, &field, convention)?))
    }

    /// Smoothing parameter: the explicit option, else the value derived from the field.
    pub fn smoothing(&self) -> Result<(f64, Option<CouplingResult>)> {
        let coupling = self.coupling()?;
        let a = match (self.config.options.a, &coupling) {
            (Some(a), _) => a,
            (None, Some(c)) => c.a,
            (None, None) => bail!("set options.a or give a [field] block to derive the smoothing parameter"),
        };
        if !(a >= 0.0 && a.is_finite()) {
            bail!("smoothing parameter must be finite and non-negative, got {a}");
        }
        Ok((a, coupling))
    }

    /// Parameters whose `m` is the observed mass, as the Schrödinger operators need.
    pub fn kinetic_params(&self, coupling: Option<&CouplingResult>) -> Result<PhysicalParams> {
        let (params, convention) = self.physical()?;
        match (convention, coupling) {
            (MassConvention::ObservedInInteraction, _) => Ok(params),
            (MassConvention::BareInInteraction, Some(c)) => Ok(params.with_mass(c.m)),
            (MassConvention::BareInInteraction, None) => {
                bail!("a bare-mass config needs a [field] block to derive the observed mass")
            }
        }
    }

    pub fn potential(&self, d: usize) -> Result<PotentialSpec> {
        let block = self
            .config
            .potential
            .as_ref()
            .ok_or_else(|| anyhow!("this experiment needs a [potential] block"))?;
        let v = match block {
            PotentialBlock::Harmonic { k } => PotentialSpec::harmonic(d, *k)?,
            PotentialBlock::Coulomb { gamma } => PotentialSpec::coulomb(*gamma)?,
            PotentialBlock::FiniteWell { depth, radius } => PotentialSpec::finite_well(d, *depth, *radius)?,
            PotentialBlock::Tabulated { file } => PotentialSpec::tabulated(d, read_radial_table(&self.resolve(file))?)?,
            PotentialBlock::Grid { file } => read_grid_potential(&self.resolve(file))?,
        };
        if v.dim != d {
            bail!("potential lives in d = {} but params.d = {d}", v.dim);
        }
        Ok(v)
    }

    /// The configured grid, or the potential's own grid for grid-sampled potentials.
    pub fn grid(&self, d: usize, v: &PotentialSpec) -> Result<GridSpec> {
        match (self.config.grid, &v.kind) {
            (Some(GridBlock::Box { half_width, n }), _) => Ok(GridSpec::box_grid(d, half_width, n)?),
            (Some(GridBlock::Radial { r_max, n }), _) => Ok(GridSpec::radial(r_max, n)?),
            (None, PotentialKind::GridSampled { grid, .. }) => Ok(*grid),
            (None, _) => bail!("this experiment needs a [grid] block"),
        }
    }

    pub fn modes(&self, field: &FieldModel, default: ModePreset) -> Result<DiscreteModes> {
        let d = field.dim();
        let modes = match self.config.modes {
            None => preset_modes(field, default)?,
            Some(ModesBlock::Tiny) => preset_modes(field, ModePreset::Tiny)?,
            Some(ModesBlock::Medium) => preset_modes(field, ModePreset::Medium)?,
            Some(ModesBlock::Fine) => preset_modes(field, ModePreset::Fine)?,
            Some(ModesBlock::Custom {
                radial_points,
                angular,
                radial_rule,
            }) => {
                let angular = match d {
                    2 => AngularRule::EqualAngles(angular),
                    _ => AngularRule::SphericalDesign(angular),
                };
                let rule = match radial_rule {
                    RadialRuleName::GaussLegendre => RadialRule::GaussLegendre,
                    RadialRuleName::Midpoint => RadialRule::Midpoint,
                };
                discretize_field(field, radial_points, angular, rule)?
            }
        };
        Ok(modes)
    }

    pub fn convolution(&self) -> ConvolutionMethod {
        match self.config.options.convolution {
            ConvolutionName::Fft => ConvolutionMethod::Fft,
            ConvolutionName::Direct => ConvolutionMethod::Direct,
            ConvolutionName::Periodic => ConvolutionMethod::Periodic,
        }
    }
}
