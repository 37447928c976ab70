//! The two parameterizations of the equation.
//!
//! Physical form:  `u_t = (a + i alpha) u'' - (b + i beta)|u|^sigma u + k u`.
//! Trig form:      `u_t = e^{i theta} u'' + nu e^{i gamma}|u|^sigma u + k u - i omega u`.
//!
//! [`to_trig`] maps the first onto the second by rescaling space and
//! amplitude: `w(t, x) = u(t, spatial * x) / amplitude`, which leaves `t`
//! and `k` untouched.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::grid::Field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CglParams {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub k: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Aligned,
    NotAligned,
    /// `b = 0`: the ratio `beta / b` does not exist.
    Undefined,
}

impl Alignment {
    pub fn is_aligned(self) -> bool {
        self == Alignment::Aligned
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatedParams {
    pub params: CglParams,
    /// `b + alpha beta / a >= 0`.
    pub global_existence: bool,
    /// `alpha / a == beta / b`.
    pub lyapunov_aligned: Alignment,
}

/// Relative tolerance used when comparing `alpha / a` with `beta / b`.
pub const ALIGNMENT_RTOL: f64 = 1e-12;

pub fn validate(p: CglParams) -> Result<ValidatedParams> {
    if !(p.a > 0.0) {
        return Err(CglError::NonPositiveDiffusion(p.a));
    }
    if !(p.sigma > 0.0) {
        return Err(CglError::NonPositivePower(p.sigma));
    }
    let global_existence = p.b + p.alpha * p.beta / p.a >= 0.0;
    let lyapunov_aligned = if p.b == 0.0 {
        Alignment::Undefined
    } else {
        let lhs = p.alpha / p.a;
        let rhs = p.beta / p.b;
        if (lhs - rhs).abs() <= ALIGNMENT_RTOL * lhs.abs().max(rhs.abs()).max(1.0) {
            Alignment::Aligned
        } else {
            Alignment::NotAligned
        }
    };
    Ok(ValidatedParams { params: p, global_existence, lyapunov_aligned })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigParams {
    pub theta: f64,
    pub gamma: f64,
    pub k: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default = "one")]
    pub nu: f64,
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

impl TrigParams {
    pub fn new(theta: f64, gamma: f64, k: f64, sigma: f64) -> Self {
        Self { theta, gamma, k, omega: 0.0, nu: 1.0, sigma }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.theta, self.gamma, self.k, self.omega, self.nu, self.sigma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(CglError::InvalidTrigParams("non-finite value".into()));
        }
        if self.theta.abs() >= 0.5 * PI {
            return Err(CglError::InvalidTrigParams(format!(
                "|theta| must be < pi/2, got {}",
                self.theta
            )));
        }
        if !(self.gamma > -PI && self.gamma <= PI) {
            return Err(CglError::InvalidTrigParams(format!(
                "gamma must lie in (-pi, pi], got {}",
                self.gamma
            )));
        }
        if self.nu < 0.0 {
            return Err(CglError::InvalidTrigParams(format!("nu must be >= 0, got {}", self.nu)));
        }
        if !(self.sigma > 0.0) {
            return Err(CglError::NonPositivePower(self.sigma));
        }
        Ok(())
    }

    /// The trig equation read as a physical one with
    /// `a + i alpha = e^{i theta}`, `b + i beta = -nu e^{i gamma}`.
    pub fn as_cgl(&self) -> CglParams {
        CglParams {
            a: self.theta.cos(),
            alpha: self.theta.sin(),
            b: -self.nu * self.gamma.cos(),
            beta: -self.nu * self.gamma.sin(),
            k: self.k,
            sigma: self.sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactors {
    pub spatial: f64,
    pub amplitude: f64,
}

impl ScaleFactors {
    pub const IDENTITY: ScaleFactors = ScaleFactors { spatial: 1.0, amplitude: 1.0 };
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

pub fn to_trig(p: &CglParams) -> Result<(TrigParams, ScaleFactors)> {
    validate(*p)?;
    if p.b == 0.0 && p.beta == 0.0 {
        return Err(CglError::ZeroNonlinearity);
    }
    let lin = Complex64::new(p.a, p.alpha);
    let nonlin = Complex64::new(-p.b, -p.beta);
    let theta = lin.arg();
    // atan2(-0.0, x<0) = -pi; the convention here is (-pi, pi].
    let gamma = wrap_angle(nonlin.arg());
    let scales = ScaleFactors {
        spatial: lin.norm().sqrt(),
        amplitude: nonlin.norm().powf(-1.0 / p.sigma),
    };
    Ok((TrigParams { theta, gamma, k: p.k, omega: 0.0, nu: 1.0, sigma: p.sigma }, scales))
}

/// Either spelling of the parameters, as accepted on the command line and
/// in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSet {
    Cgl(CglParams),
    Trig(TrigParams),
}

impl ParamSet {
    /// Trig form plus the scalings back to physical variables. For a
    /// physical set with `b = beta = 0` the nonlinearity is switched off
    /// (`nu = 0`) and the spatial scaling is kept.
    pub fn resolve(&self) -> Result<(TrigParams, ScaleFactors)> {
        match self {
            ParamSet::Trig(t) => {
                t.validate()?;
                Ok((*t, ScaleFactors::IDENTITY))
            }
            ParamSet::Cgl(p) => match to_trig(p) {
                Err(CglError::ZeroNonlinearity) => {
                    let lin = Complex64::new(p.a, p.alpha);
                    Ok((
                        TrigParams {
                            theta: lin.arg(),
                            gamma: 0.0,
                            k: p.k,
                            omega: 0.0,
                            nu: 0.0,
                            sigma: p.sigma,
                        },
                        ScaleFactors { spatial: lin.norm().sqrt(), amplitude: 1.0 },
                    ))
                }
                other => other,
            },
        }
    }

    /// Physical coefficients (the trig set read as physical if needed).
    pub fn cgl(&self) -> CglParams {
        match self {
            ParamSet::Cgl(p) => *p,
            ParamSet::Trig(t) => t.as_cgl(),
        }
    }
}

/// Right-hand side of the physical equation on a sampled field.
pub fn cgl_rhs(f: &Field, p: &CglParams) -> Field {
    let lap = f.laplacian();
    let lin = Complex64::new(p.a, p.alpha);
    let nl = Complex64::new(p.b, p.beta);
    let samples = f
        .samples()
        .iter()
        .zip(lap.samples())
        .map(|(&u, &l)| lin * l - nl * u.norm().powf(p.sigma) * u + p.k * u)
        .collect();
    Field::from_vec(f.grid().clone(), samples)
}

/// Right-hand side of the trig equation, including the `-i omega u`
/// rotating-frame term (pass `omega = 0` for the lab frame).
pub fn trig_rhs(f: &Field, p: &TrigParams) -> Field {
    let lap = f.laplacian();
    let lin = Complex64::from_polar(1.0, p.theta);
    let nl = Complex64::from_polar(p.nu, p.gamma);
    let rot = Complex64::new(p.k, -p.omega);
    let samples = f
        .samples()
        .iter()
        .zip(lap.samples())
        .map(|(&u, &l)| lin * l + nl * u.norm().powf(p.sigma) * u + rot * u)
        .collect();
    Field::from_vec(f.grid().clone(), samples)
}
