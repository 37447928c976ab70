//! Lyapunov functionals, stability thresholds and the mass identity
//! `1/2 d/dt ||u||^2 = -a ||u'||^2 - b ||u||_{s+2}^{s+2} + k ||u||^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::evolve::Trajectory;
use crate::grid::{Field, Grid1D, GridKind};
use crate::params::CglParams;

/// `int |f|^p`, `p >= 2`.
pub fn w_p(f: &Field, p: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(CglError::BadExponent(p));
    }
    Ok(f.power_integral(p))
}

/// `a/2 ||f'||^2 + b/(s+2) ||f||_{s+2}^{s+2} - k/2 ||f||^2`
pub fn v_functional(f: &Field, a: f64, b: f64, k: f64, sigma: f64) -> f64 {
    0.5 * a * f.grad_norm_sq() + b / (sigma + 2.0) * f.power_integral(sigma + 2.0)
        - 0.5 * k * f.l2_norm_sq()
}

/// `-||a f'' - b |f|^s f + k f||^2`. Equals `dV/dt` only when `alpha/a = beta/b`.
pub fn v_dot(f: &Field, a: f64, b: f64, k: f64, sigma: f64) -> f64 {
    let lap = f.laplacian();
    let g: Vec<Complex64> = f
        .samples()
        .iter()
        .zip(lap.samples())
        .map(|(&u, &l)| a * l - b * u.norm().powf(sigma) * u + k * u)
        .collect();
    -f.grid().weight() * g.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// `(|Omega| / omega_N)^{-2/N}`
    pub poincare_k_over_a: f64,
    /// `a/2` times the above.
    pub h1_threshold: f64,
    /// `n` with `lambda_n < k/a < lambda_{n+1}` for the supplied Dirichlet grid.
    pub eig_window: Option<usize>,
}

pub fn thresholds(
    a: f64,
    k: f64,
    n_dim: usize,
    volume: f64,
    grid: Option<&Grid1D>,
) -> Result<ThresholdReport> {
    if n_dim == 0 {
        return Err(CglError::BadGridSpec("dimension must be at least 1".into()));
    }
    if !(volume > 0.0) {
        return Err(CglError::BadGridSpec(format!("volume must be positive, got {volume}")));
    }
    if !(a > 0.0) {
        return Err(CglError::NonPositiveDiffusion(a));
    }
    let poincare = (volume / unit_ball_volume(n_dim)).powf(-2.0 / n_dim as f64);
    let eig_window = grid
        .filter(|g| g.kind() == GridKind::Dirichlet)
        .and_then(|g| eig_window(g.mode_multipliers(), k / a));
    Ok(ThresholdReport { poincare_k_over_a: poincare, h1_threshold: 0.5 * a * poincare, eig_window })
}

/// 1-based `n` with `lambdas[n-1] < x < lambdas[n]` (strict).
fn eig_window(lambdas: &[f64], x: f64) -> Option<usize> {
    lambdas.windows(2).position(|w| w[0] < x && x < w[1]).map(|i| i + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResiduals {
    /// Sample times at which the residual was evaluated.
    pub times: Vec<f64>,
    /// `1/2 dM/dt + a G + b P - k M`, derivative by finite differences.
    pub residuals: Vec<f64>,
    /// Difference between the 3- and 5-point derivative estimates, a proxy
    /// for the truncation error of the latter (zero where only 3 points fit).
    pub truncation: Vec<f64>,
}

impl EnergyResiduals {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn is_uniform(t: &[f64]) -> bool {
    let h = t[1] - t[0];
    t.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
}

/// Residuals of the mass identity at interior samples of a trajectory that
/// recorded the `mass`, `grad2` and `pnl` monitors.
pub fn energy_identity_residuals(traj: &Trajectory, p: &CglParams) -> Result<EnergyResiduals> {
    let get = |name: &str| {
        traj.monitor(name)
            .ok_or_else(|| CglError::MissingMonitors(format!("'{name}' not recorded")))
    };
    let (mass, grad, pnl) = (get("mass")?, get("grad2")?, get("pnl")?);
    let t = &traj.times;
    if t.len() < 3 {
        return Err(CglError::NotEnoughPoints { needed: 3, found: t.len() });
    }
    let mut out = EnergyResiduals { times: Vec::new(), residuals: Vec::new(), truncation: Vec::new() };
    let n = t.len();
    // With five or more samples the outermost interior points are skipped:
    // the 3-point formula there would dominate the residual.
    let range = if n >= 5 { 2..n - 2 } else { 1..n - 1 };
    for i in range {
        let d3 = (mass[i + 1] - mass[i - 1]) / (t[i + 1] - t[i - 1]);
        let (deriv, trunc) = if i >= 2 && i + 2 < n && is_uniform(&t[i - 2..=i + 2]) {
            let h = t[i + 1] - t[i];
            let d5 = (mass[i - 2] - 8.0 * mass[i - 1] + 8.0 * mass[i + 1] - mass[i + 2]) / (12.0 * h);
            (d5, (d5 - d3).abs())
        } else {
            (d3, 0.0)
        };
        out.times.push(t[i]);
        out.residuals.push(0.5 * deriv + p.a * grad[i] + p.b * pnl[i] - p.k * mass[i]);
        out.truncation.push(0.5 * trunc);
    }
    Ok(out)
}
