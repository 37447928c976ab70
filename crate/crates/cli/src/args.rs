//! Flags shared by the subcommands: parameters in either spelling and the grid.

use std::sync::Arc;

use cgl_core::params::{to_trig, wrap_angle};
use cgl_core::{CglError, CglParams, Grid1D, GridKind, GridSpec, ParamSet, Result, ScaleFactors, TrigParams};
use clap::{Args, ValueEnum};

/// `--a --alpha --b --beta --k --sigma` or `--theta --gamma --k --omega --nu --sigma`.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true, help_heading = "Physical parameters")]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Physical parameters")]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Physical parameters")]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Physical parameters")]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Trig parameters")]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Trig parameters")]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Trig parameters")]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Trig parameters")]
    pub nu: Option<f64>,
    /// Driving coefficient (both spellings).
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Nonlinearity power (both spellings).
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spelling {
    Physical,
    Trig,
}

fn usage(msg: impl Into<String>) -> CglError {
    CglError::Parse(msg.into())
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| usage(format!("--{name} is required")))
}

/// What a bound-state construction needs, in trig variables.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs {
    pub theta: f64,
    pub omega: f64,
    pub k: f64,
    pub sigma: f64,
    /// Nonlinear phase implied by the flags, if any; must match the construction.
    pub gamma: Option<f64>,
    pub scales: ScaleFactors,
}

impl ParamArgs {
    pub fn spelling(&self) -> Result<Spelling> {
        let phys = [self.a, self.alpha, self.b, self.beta].iter().any(Option::is_some);
        let trig = [self.theta, self.gamma, self.nu].iter().any(Option::is_some);
        match (phys, trig) {
            (true, true) => Err(usage("mix of physical (--a/--alpha/--b/--beta) and trig (--theta/--gamma/--nu) flags")),
            (true, false) => Ok(Spelling::Physical),
            (false, true) => Ok(Spelling::Trig),
            (false, false) => Err(usage("no parameters given: use --a/--b/... or --theta/--gamma/...")),
        }
    }

    fn physical(&self) -> Result<CglParams> {
        Ok(CglParams {
            a: need(self.a, "a")?,
            alpha: self.alpha.unwrap_or(0.0),
            b: self.b.unwrap_or(0.0),
            beta: self.beta.unwrap_or(0.0),
            k: self.k.unwrap_or(0.0),
            sigma: need(self.sigma, "sigma")?,
        })
    }

    /// Full parameter set for an evolution.
    pub fn param_set(&self) -> Result<ParamSet> {
        match self.spelling()? {
            Spelling::Physical => {
                if self.omega.is_some() {
                    return Err(usage("--omega (rotating frame) needs the trig spelling"));
                }
                let p = self.physical()?;
                cgl_core::params::validate(p)?;
                Ok(ParamSet::Cgl(p))
            }
            Spelling::Trig => {
                let t = TrigParams {
                    theta: need(self.theta, "theta")?,
                    gamma: need(self.gamma, "gamma")?,
                    k: self.k.unwrap_or(0.0),
                    omega: self.omega.unwrap_or(0.0),
                    nu: self.nu.unwrap_or(1.0),
                    sigma: need(self.sigma, "sigma")?,
                };
                t.validate()?;
                Ok(ParamSet::Trig(t))
            }
        }
    }

    /// `(theta, omega, k, sigma)` for a bound state; `omega` defaults to 1.
    pub fn bound_inputs(&self) -> Result<BoundInputs> {
        let omega = self.omega.unwrap_or(1.0);
        let k = self.k.unwrap_or(0.0);
        match self.spelling()? {
            Spelling::Trig => Ok(BoundInputs {
                theta: need(self.theta, "theta")?,
                omega,
                k,
                sigma: need(self.sigma, "sigma")?,
                gamma: self.gamma,
                scales: ScaleFactors::IDENTITY,
            }),
            Spelling::Physical => {
                let p = self.physical()?;
                let (t, scales) = ParamSet::Cgl(p).resolve()?;
                let gamma = (self.b.is_some() || self.beta.is_some()).then_some(t.gamma);
                Ok(BoundInputs { theta: t.theta, omega, k, sigma: p.sigma, gamma, scales })
            }
        }
    }

    /// `(theta, gamma, sigma)` for continuation.
    pub fn angles(&self) -> Result<(f64, f64, f64)> {
        match self.spelling()? {
            Spelling::Trig => Ok((need(self.theta, "theta")?, need(self.gamma, "gamma")?, need(self.sigma, "sigma")?)),
            Spelling::Physical => {
                let (t, _) = to_trig(&self.physical()?)?;
                Ok((t.theta, t.gamma, t.sigma))
            }
        }
    }
}

/// Errors unless the flags' `gamma` (if any) is the constructed one.
pub fn check_gamma(given: Option<f64>, constructed: f64) -> Result<()> {
    match given {
        Some(g) if wrap_angle(g - constructed).abs() > 1e-8 => Err(usage(format!(
            "gamma = {g} does not admit this bound state; the construction needs gamma = {constructed}"
        ))),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Grid kind [default depends on the subcommand].
    #[arg(long, value_enum)]
    pub grid: Option<GridArg>,
    /// Domain length, in physical units.
    #[arg(long)]
    pub length: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    pub nx: Option<usize>,
}

impl GridArgs {
    pub fn spec(&self, kind: GridKind, length: f64, n: usize) -> GridSpec {
        GridSpec {
            kind: match self.grid {
                Some(GridArg::Periodic) => GridKind::Periodic,
                Some(GridArg::Dirichlet) => GridKind::Dirichlet,
                None => kind,
            },
            length: self.length.unwrap_or(length),
            n: self.nx.unwrap_or(n),
        }
    }

    pub fn build(&self, kind: GridKind, length: f64, n: usize) -> Result<Arc<Grid1D>> {
        self.spec(kind, length, n).build()
    }
}
