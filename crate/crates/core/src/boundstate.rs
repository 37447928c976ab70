//! Explicit bound-states `phi = psi exp(i d ln psi)` of
//! `i omega phi = e^{i theta} phi'' + e^{i gamma}|phi|^sigma phi + k phi` on the line.
//!
//! Internally the construction works with the shifted angles
//! `theta_t = pi/2 - theta` and `gamma_t = gamma - theta`. Given
//! `(theta, omega, k, sigma)` the chirp `d` is fixed, `gamma` is an output,
//! and `psi` is the positive soliton of `psi'' = eps psi - eta psi^{sigma+1}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::grid::{Field, Grid1D, GridKind};
use crate::params::{wrap_angle, TrigParams};

/// `|omega cos theta + k sin theta|` below this is treated as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Largest `psi` allowed at the box edge of a periodic grid.
pub const EDGE_DECAY_TOL: f64 = 1e-10;

/// The `+` root for the chirp parameter.
pub fn compute_d(theta: f64, omega: f64, k: f64) -> Result<f64> {
    let den = omega * theta.cos() + k * theta.sin();
    if den.abs() < DEGENERATE_TOL {
        return Err(CglError::DegenerateParameters(den));
    }
    let rho = omega.hypot(k);
    Ok((k * theta.cos() - omega * theta.sin() + rho) / den)
}

/// The unique `gamma` in `(-pi, pi]` with
/// `tan(gamma - theta) = d(sigma+4)/(sigma+2-2d^2)` and
/// `d sin(gamma - theta) + cos(gamma - theta) > 0`.
///
/// Writing `gamma - theta = atan2(d(sigma+4), sigma+2-2d^2)` satisfies both:
/// the sign condition evaluates to `(sigma+2)(1+d^2)/r > 0`.
pub fn solve_gamma(d: f64, sigma: f64, theta: f64) -> f64 {
    let num = d * (sigma + 4.0);
    let den = sigma + 2.0 - 2.0 * d * d;
    wrap_angle(theta + num.atan2(den))
}

/// Soliton frequency and nonlinear coefficient of the reduced ODE.
pub fn epsilon_eta(theta: f64, gamma: f64, omega: f64, k: f64, d: f64) -> Result<(f64, f64)> {
    let theta_t = 0.5 * PI - theta;
    let gamma_t = gamma - theta;
    let scale = 1.0 + d * d;
    let epsilon = (omega * (d * theta_t.sin() + theta_t.cos())
        + k * (d * theta_t.cos() - theta_t.sin()))
        / scale;
    let eta = (d * gamma_t.sin() + gamma_t.cos()) / scale;
    if !(eta > 0.0) {
        return Err(CglError::NegativeEta(eta));
    }
    Ok((epsilon, eta))
}

/// Peak value `(eps (sigma+2) / (2 eta))^{1/sigma}` of the soliton.
pub fn soliton_amplitude(epsilon: f64, eta: f64, sigma: f64) -> f64 {
    (epsilon * (sigma + 2.0) / (2.0 * eta)).powf(1.0 / sigma)
}

/// Inverse width `sigma sqrt(eps) / 2`.
pub fn soliton_rate(epsilon: f64, sigma: f64) -> f64 {
    0.5 * sigma * epsilon.sqrt()
}

fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln psi(x)` for the soliton centred at `center`.
fn ln_soliton(x: f64, center: f64, epsilon: f64, eta: f64, sigma: f64) -> f64 {
    let amp = soliton_amplitude(epsilon, eta, sigma);
    let rate = soliton_rate(epsilon, sigma);
    amp.ln() - (2.0 / sigma) * ln_cosh(rate * (x - center))
}

/// Samples of `psi(x) = A sech^{2/sigma}(sigma sqrt(eps) (x - c) / 2)`, `c`
/// the grid midpoint.
pub fn nls_soliton(epsilon: f64, eta: f64, sigma: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(CglError::NonPositiveFrequency(epsilon));
    }
    if !(eta > 0.0) {
        return Err(CglError::NegativeEta(eta));
    }
    if !(sigma > 0.0) {
        return Err(CglError::NonPositivePower(sigma));
    }
    let c = grid.center();
    Ok(grid.nodes().iter().map(|&x| ln_soliton(x, c, epsilon, eta, sigma).exp()).collect())
}

/// Exact `psi'` of the soliton at the grid nodes.
fn soliton_slope(epsilon: f64, sigma: f64, psi: &[f64], grid: &Grid1D) -> Vec<f64> {
    let rate = soliton_rate(epsilon, sigma);
    let c = grid.center();
    grid.nodes()
        .iter()
        .zip(psi)
        .map(|(&x, &p)| -(2.0 / sigma) * rate * (rate * (x - c)).tanh() * p)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundStateDiagnostics {
    /// `psi(0)`, the certified sup-norm of `phi`.
    pub sup_norm: f64,
    /// The alternative closed form `[eps (sigma+2)/2]^{sigma/eps} eta^sigma`,
    /// reported for comparison only.
    pub sup_norm_alt_display: f64,
    /// `psi` at the first node (box edge).
    pub edge_value: f64,
    /// Max difference between the spectral `phi''` and the closed-form
    /// second derivative built from `psi` and `psi'`.
    pub second_derivative_mismatch: f64,
    /// Max pointwise residual of `(psi')^2/psi = eps psi - 2 eta/(sigma+2) psi^{sigma+1}`.
    pub first_integral_residual: f64,
}

#[derive(Debug, Clone)]
pub struct BoundState {
    pub theta: f64,
    pub gamma: f64,
    pub omega: f64,
    pub k: f64,
    pub sigma: f64,
    pub d: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub psi: Vec<f64>,
    pub phi: Field,
    pub diagnostics: BoundStateDiagnostics,
}

impl BoundState {
    pub fn grid(&self) -> &Arc<Grid1D> {
        self.phi.grid()
    }

    /// Rotating-frame trig parameters for which `phi` is an equilibrium.
    pub fn trig_params(&self) -> TrigParams {
        TrigParams::new(self.theta, self.gamma, self.k, self.sigma).with_omega(self.omega)
    }

    /// Same profile data with `phi` replaced, e.g. for negative controls.
    pub fn with_profile(&self, phi: Field) -> Self {
        let mut out = self.clone();
        out.psi = phi.samples().iter().map(|c| c.norm()).collect();
        out.phi = phi;
        out
    }

    /// `(theta, gamma, omega)` of the equivalent `k = 0` equation.
    pub fn reduced_to_k0(&self) -> (f64, f64, f64) {
        reduce_to_k0(self.theta, self.gamma, self.omega, self.k)
    }
}

/// Multiplying the elliptic equation by `e^{-i delta}`,
/// `delta = arg(omega + i k)`, turns `i omega - k` into `i sqrt(omega^2+k^2)`.
pub fn reduce_to_k0(theta: f64, gamma: f64, omega: f64, k: f64) -> (f64, f64, f64) {
    let delta = k.atan2(omega);
    (theta - delta, gamma - delta, omega.hypot(k))
}

pub fn construct_bound_state(
    theta: f64,
    omega: f64,
    k: f64,
    sigma: f64,
    grid: Arc<Grid1D>,
) -> Result<BoundState> {
    if grid.kind() != GridKind::Periodic {
        return Err(CglError::BadGridSpec("bound-states are built on periodic grids".into()));
    }
    if !(sigma > 0.0) {
        return Err(CglError::NonPositivePower(sigma));
    }
    let d = compute_d(theta, omega, k)?;
    let gamma = solve_gamma(d, sigma, theta);
    let (epsilon, eta) = epsilon_eta(theta, gamma, omega, k, d)?;
    let psi = nls_soliton(epsilon, eta, sigma, &grid)?;
    let edge_value = psi[0];
    if edge_value > EDGE_DECAY_TOL {
        return Err(CglError::EdgeDecayViolated { edge: edge_value, tol: EDGE_DECAY_TOL });
    }
    let c = grid.center();
    let phase = Complex64::new(1.0, d);
    let phi = Field::from_fn(grid.clone(), |x| (phase * ln_soliton(x, c, epsilon, eta, sigma)).exp());

    let sup_norm = soliton_amplitude(epsilon, eta, sigma);
    let sup_norm_alt_display =
        (epsilon * (sigma + 2.0) / 2.0).powf(sigma / epsilon) * eta.powf(sigma);

    let slope = soliton_slope(epsilon, sigma, &psi, &grid);
    let first_integral_residual = psi
        .iter()
        .zip(&slope)
        .map(|(&p, &s)| {
            (s * s / p - (epsilon * p - 2.0 * eta / (sigma + 2.0) * p.powf(sigma + 1.0))).abs()
        })
        .fold(0.0, f64::max);

    let lap = phi.laplacian();
    let one_id = Complex64::new(1.0, d);
    let second_derivative_mismatch = psi
        .iter()
        .zip(&slope)
        .zip(phi.samples())
        .zip(lap.samples())
        .map(|(((&p, &s), &ph), &l)| {
            let psi2 = epsilon * p - eta * p.powf(sigma + 1.0);
            let closed = (one_id * psi2 + Complex64::i() * d * one_id * (s * s / p)) * (ph / p);
            (closed - l).norm()
        })
        .fold(0.0, f64::max);

    Ok(BoundState {
        theta,
        gamma,
        omega,
        k,
        sigma,
        d,
        epsilon,
        eta,
        psi,
        phi,
        diagnostics: BoundStateDiagnostics {
            sup_norm,
            sup_norm_alt_display,
            edge_value,
            second_derivative_mismatch,
            first_integral_residual,
        },
    })
}

/// Max-norm residual of `e^{i theta} f'' + e^{i gamma}|f|^sigma f + k f - i omega f`.
pub fn elliptic_residual(
    f: &Field,
    theta: f64,
    gamma: f64,
    omega: f64,
    k: f64,
    sigma: f64,
) -> f64 {
    let lap = f.laplacian();
    let et = Complex64::from_polar(1.0, theta);
    let eg = Complex64::from_polar(1.0, gamma);
    let lin = Complex64::new(k, -omega);
    f.samples()
        .iter()
        .zip(lap.samples())
        .map(|(&u, &l)| (et * l + eg * u.norm().powf(sigma) * u + lin * u).norm())
        .fold(0.0, f64::max)
}

pub fn residual(bs: &BoundState) -> f64 {
    elliptic_residual(&bs.phi, bs.theta, bs.gamma, bs.omega, bs.k, bs.sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `omega ||f||^2 + sin(theta) ||f'||^2 - sin(gamma) ||f||_{s+2}^{s+2}`
    pub r1: f64,
    /// `cos(theta) ||f'||^2 - cos(gamma) ||f||_{s+2}^{s+2}`
    pub r2: f64,
    /// `omega cos(theta) ||f||^2 - sin(gamma - theta) ||f||_{s+2}^{s+2}`
    pub r3: f64,
}

impl IdentityResiduals {
    pub fn max_abs(&self) -> f64 {
        self.r1.abs().max(self.r2.abs()).max(self.r3.abs())
    }
}

/// Integral identities satisfied by any solution of the `k = 0` elliptic
/// equation (obtained by pairing with `conj(f)`). Residuals are relative to
/// `|omega| ||f||^2 + ||f'||^2 + ||f||_{s+2}^{s+2}`; zero for `f = 0`.
pub fn integral_identities(
    f: &Field,
    theta: f64,
    gamma: f64,
    omega: f64,
    sigma: f64,
) -> IdentityResiduals {
    let mass = f.l2_norm_sq();
    let grad = f.grad_norm_sq();
    let pot = f.power_integral(sigma + 2.0);
    let scale = omega.abs() * mass + grad + pot;
    if scale == 0.0 {
        return IdentityResiduals { r1: 0.0, r2: 0.0, r3: 0.0 };
    }
    IdentityResiduals {
        r1: (omega * mass + theta.sin() * grad - gamma.sin() * pot) / scale,
        r2: (theta.cos() * grad - gamma.cos() * pot) / scale,
        r3: (omega * theta.cos() * mass - (gamma - theta).sin() * pot) / scale,
    }
}
