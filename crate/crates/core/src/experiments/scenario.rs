//! Scenario files: TOML with one table per concern.
//!
//! ```toml
//! kind = "zero_stability"        # zero_stability | instability | bs_orbital | custom
//! seed = 1
//!
//! [params]                       # a, alpha, b, beta, k, sigma
//! a = 1.0                        # or theta, gamma, k, sigma [, omega, nu]
//! alpha = 0.0
//! b = 1.0
//! beta = 0.0
//! k = -0.5
//! sigma = 2.0
//!
//! [grid]
//! kind = "dirichlet"             # dirichlet | periodic
//! L = 3.141592653589793
//! N = 64
//!
//! [initial]                      # zero_stability and custom only
//! kind = "eigenmode"             # eigenmode | gaussian | random_modes | file
//! n = 1
//! amp = 0.5
//!
//! [evolve]
//! dt = 1e-3
//! T = 30.0
//! monitor_stride = 10
//! monitors = ["L2", "H1", "Linf", "V", "Lp_2"]
//!
//! [zero_stability]               # kind-specific table
//! norm = "lp"                    # lp | h1
//! p = 2.0
//!
//! [output]
//! dir = "out/zero"
//! svg = true
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::evolve::{Frame, Monitor, DEFAULT_BLOWUP_CAP};
use crate::grid::{Field, Grid1D, GridKind, GridSpec};
use crate::params::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ZeroStability,
    Instability,
    BsOrbital,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::ZeroStability => "zero_stability",
            ScenarioKind::Instability => "instability",
            ScenarioKind::BsOrbital => "bs_orbital",
            ScenarioKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `amp sin(n pi x / L)` (Dirichlet grids).
    Eigenmode {
        n: usize,
        #[serde(default = "one")]
        amp: f64,
    },
    /// `amp exp(-(x - center)^2 / width^2)`; center defaults to mid-domain.
    Gaussian {
        amp: f64,
        width: f64,
        #[serde(default)]
        center: Option<f64>,
    },
    /// Seeded combination of the first `modes` sine modes with complex
    /// coefficients decaying like `1/m^2`, scaled to L2 norm `amp`.
    RandomModes {
        amp: f64,
        #[serde(default = "four")]
        modes: usize,
    },
    /// CSV with columns `x,re,im` on the scenario grid; relative paths are
    /// resolved against the scenario file.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}
fn four() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub frame: Frame,
    #[serde(default = "stride")]
    pub monitor_stride: usize,
    #[serde(default = "cap")]
    pub blowup_cap: f64,
    #[serde(default)]
    pub monitors: Vec<String>,
    /// Steps between saved states; none by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
}

fn stride() -> usize {
    1
}
fn cap() -> f64 {
    DEFAULT_BLOWUP_CAP
}

impl EvolveSection {
    pub fn parsed_monitors(&self) -> Result<Vec<Monitor>> {
        self.monitors.iter().map(|m| Monitor::parse(m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DecayNorm {
    #[default]
    Lp,
    H1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroStabilitySection {
    #[serde(default)]
    pub norm: DecayNorm,
    #[serde(default = "two")]
    pub p: f64,
}

fn two() -> f64 {
    2.0
}

impl Default for ZeroStabilitySection {
    fn default() -> Self {
        Self { norm: DecayNorm::Lp, p: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstabilitySection {
    /// Eigenmode used for the initial data; defaults to the window index.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "small_amp")]
    pub amp: f64,
    /// Escape radius as a multiple of the initial H1 norm.
    #[serde(default = "ten")]
    pub escape_factor: f64,
    /// Absolute escape radius; overrides `escape_factor`.
    #[serde(default)]
    pub escape_radius: Option<f64>,
}

fn small_amp() -> f64 {
    0.01
}
fn ten() -> f64 {
    10.0
}

impl Default for InstabilitySection {
    fn default() -> Self {
        Self { n: None, amp: 0.01, escape_factor: 10.0, escape_radius: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsOrbitalSection {
    pub theta: f64,
    #[serde(default = "one")]
    pub omega: f64,
    pub k: f64,
    pub sigma: f64,
    /// Perturbation size relative to `||phi||_{H1}`.
    #[serde(default = "percent")]
    pub delta: f64,
    /// Steps between orbital-distance samples.
    #[serde(default = "hundred")]
    pub distance_stride: usize,
    #[serde(default = "bump")]
    pub bump_width: f64,
}

fn percent() -> f64 {
    0.01
}
fn hundred() -> usize {
    100
}
fn bump() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub svg: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: None, svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Option<ParamSet>,
    pub grid: GridSpec,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    pub evolve: EvolveSection,
    #[serde(default)]
    pub zero_stability: Option<ZeroStabilitySection>,
    #[serde(default)]
    pub instability: Option<InstabilitySection>,
    #[serde(default)]
    pub bs_orbital: Option<BsOrbitalSection>,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory of the scenario file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| CglError::Parse(e.to_string()))?;
        sc.check()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CglError::Io(format!("{}: {e}", path.display())))?;
        let mut sc = Self::parse(&text)
            .map_err(|e| CglError::Parse(format!("{}: {e}", path.display())))?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Kind-specific required fields.
    fn check(&self) -> Result<()> {
        let missing = |what: &str| {
            Err(CglError::Parse(format!("{} scenarios need {what}", self.kind.name())))
        };
        self.evolve.parsed_monitors()?;
        if !(self.evolve.dt > 0.0 && self.evolve.dt.is_finite()) {
            return Err(CglError::Parse(format!("evolve.dt must be positive, got {}", self.evolve.dt)));
        }
        if !(self.evolve.t_final > 0.0 && self.evolve.t_final.is_finite()) {
            return Err(CglError::Parse(format!("evolve.T must be positive, got {}", self.evolve.t_final)));
        }
        match self.kind {
            ScenarioKind::ZeroStability | ScenarioKind::Custom => {
                if self.params.is_none() {
                    return missing("a [params] table");
                }
                if self.initial.is_none() {
                    return missing("an [initial] table");
                }
            }
            ScenarioKind::Instability => {
                if self.params.is_none() {
                    return missing("a [params] table");
                }
            }
            ScenarioKind::BsOrbital => {
                if self.bs_orbital.is_none() {
                    return missing("a [bs_orbital] table");
                }
                if self.grid.kind != GridKind::Periodic {
                    return Err(CglError::Parse("bs_orbital scenarios need a periodic grid".into()));
                }
            }
        }
        Ok(())
    }
}

impl InitialSpec {
    /// Samples the initial data on `grid` (physical coordinates).
    pub fn build(&self, grid: &Arc<Grid1D>, seed: u64, base_dir: Option<&Path>) -> Result<Field> {
        match self {
            InitialSpec::Eigenmode { n, amp } => {
                if grid.kind() != GridKind::Dirichlet {
                    return Err(CglError::BadGridSpec("eigenmode data needs a Dirichlet grid".into()));
                }
                if *n == 0 || *n > grid.len() {
                    return Err(CglError::IndexOutOfRange { index: *n, max: grid.len() });
                }
                let kn = *n as f64 * std::f64::consts::PI / grid.length();
                Ok(Field::from_real_fn(grid.clone(), |x| amp * (kn * x).sin()))
            }
            InitialSpec::Gaussian { amp, width, center } => {
                if !(*width > 0.0) {
                    return Err(CglError::Parse(format!("gaussian width must be positive, got {width}")));
                }
                let c = center.unwrap_or_else(|| grid.center());
                Ok(Field::from_real_fn(grid.clone(), |x| amp * (-((x - c) / width).powi(2)).exp()))
            }
            InitialSpec::RandomModes { amp, modes } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let coeffs: Vec<Complex64> = (1..=*modes)
                    .map(|m| {
                        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        c / (m * m) as f64
                    })
                    .collect();
                let l = grid.length();
                let c = grid.center();
                let f = Field::from_fn(grid.clone(), |x| {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, a)| match grid.kind() {
                            GridKind::Dirichlet => a * ((i + 1) as f64 * std::f64::consts::PI * x / l).sin(),
                            // Localized on periodic boxes so that the data is smooth across the edge.
                            GridKind::Periodic => {
                                a * ((i + 1) as f64 * (x - c)).cos() * (-(x - c).powi(2) / 4.0).exp()
                            }
                        })
                        .sum()
                });
                let norm = f.l2_norm_sq().sqrt();
                if norm == 0.0 {
                    return Err(CglError::ZeroProfile);
                }
                Ok(f.scale(Complex64::new(amp / norm, 0.0)))
            }
            InitialSpec::File { path } => {
                let full = match base_dir {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CglError::Io(format!("{}: {e}", full.display())))?;
                Field::read_csv(&text, grid.clone())
            }
        }
    }
}
