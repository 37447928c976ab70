//! Newton continuation of small bound-states bifurcating from a simple
//! Dirichlet eigenvalue.
//!
//! Unknowns at fixed `mu` are `v = phi + zeta` (node values), `omega` and
//! `k`, solving
//!
//! ```text
//! F = v'' + mu e^{i(gamma - theta)} |v|^sigma v + (k - i omega) e^{-i theta} v = 0
//! Re <zeta, phi> = Re <zeta, i phi> = 0
//! ```
//!
//! At `mu = 0` the solution is `v = phi`, `k - i omega = lambda e^{i theta}`.
//! `u = mu^{1/sigma} v` then solves `e^{i theta} u'' + e^{i gamma}|u|^sigma u + (k - i omega) u = 0`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::boundstate::elliptic_residual;
use crate::error::{CglError, Result};
use crate::grid::{Field, Grid1D, GridKind};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;
pub const MIN_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub mu: f64,
    pub omega: f64,
    pub k: f64,
    pub v: Field,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub theta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub eig_index: usize,
    /// Normalized eigenfunction the branch bifurcates from.
    pub phi: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchRow {
    pub mu: f64,
    pub omega: f64,
    pub k: f64,
    pub residual: f64,
    pub v_norm: f64,
    /// Max residual of the rescaled solution `mu^{1/sigma} v` in the
    /// elliptic equation (zero at `mu = 0`).
    pub physical_residual: f64,
}

impl Branch {
    /// `mu^{1/sigma} v` for points with `mu > 0`.
    pub fn physical_solution(&self, point: &BranchPoint) -> Option<Field> {
        (point.mu > 0.0).then(|| point.v.scale(Complex64::new(point.mu.powf(1.0 / self.sigma), 0.0)))
    }

    pub fn rows(&self) -> Vec<BranchRow> {
        self.points
            .iter()
            .map(|p| BranchRow {
                mu: p.mu,
                omega: p.omega,
                k: p.k,
                residual: p.residual,
                v_norm: p.v.l2_norm_sq().sqrt(),
                physical_residual: self.physical_solution(p).map_or(0.0, |u| {
                    elliptic_residual(&u, self.theta, self.gamma, p.omega, p.k, self.sigma)
                }),
            })
            .collect()
    }

    pub fn write_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "mu,omega,k,residual,v_norm,physical_residual")?;
        for r in self.rows() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.mu, r.omega, r.k, r.residual, r.v_norm, r.physical_residual
            )?;
        }
        Ok(())
    }

    /// `(dk/dmu, domega/dmu)` at `mu = 0`: `(-cos gamma, sin gamma) ||phi||_{s+2}^{s+2} / ||phi||^2`.
    pub fn analytic_slopes(&self) -> (f64, f64) {
        let ratio = self.phi.power_integral(self.sigma + 2.0) / self.phi.l2_norm_sq();
        (-self.gamma.cos() * ratio, self.gamma.sin() * ratio)
    }
}

/// `(lambda_n, sin(n pi x / L) / sqrt(L/2))` on a Dirichlet grid over `(0, L)`.
pub fn linear_eigenpair(grid: &Arc<Grid1D>, n: usize) -> Result<(f64, Field)> {
    if grid.kind() != GridKind::Dirichlet {
        return Err(CglError::BadGridSpec("continuation needs a Dirichlet grid".into()));
    }
    if n == 0 || n > grid.len() {
        return Err(CglError::IndexOutOfRange { index: n, max: grid.len() });
    }
    let l = grid.length();
    let kn = n as f64 * std::f64::consts::PI / l;
    let norm = (0.5 * l).sqrt();
    Ok((kn * kn, Field::from_real_fn(grid.clone(), |x| (kn * x).sin() / norm)))
}

struct System<'a> {
    lap: &'a [f64],
    phi: &'a Field,
    theta: f64,
    gamma: f64,
    sigma: f64,
    mu: f64,
}

impl System<'_> {
    fn n(&self) -> usize {
        self.phi.len()
    }

    /// Stacked real residual `[Re F, Im F, c1, c2]` (F scaled by `sqrt(weight)`
    /// so that the Euclidean norm is the L2 norm).
    fn residual(&self, v: &[Complex64], omega: f64, k: f64) -> DVector<f64> {
        let n = self.n();
        let w = self.phi.grid().weight();
        let sw = w.sqrt();
        let nl = Complex64::from_polar(self.mu, self.gamma - self.theta);
        let lin = Complex64::new(k, -omega) * Complex64::from_polar(1.0, -self.theta);
        let mut out = DVector::zeros(2 * n + 2);
        for i in 0..n {
            let row = &self.lap[i * n..(i + 1) * n];
            let lap_v: Complex64 = row.iter().zip(v).map(|(a, b)| b * a).sum();
            let f = lap_v + nl * v[i].norm().powf(self.sigma) * v[i] + lin * v[i];
            out[i] = sw * f.re;
            out[n + i] = sw * f.im;
        }
        let (mut c1, mut c2) = (0.0, 0.0);
        for (vi, pi) in v.iter().zip(self.phi.samples()) {
            let z = vi - pi;
            c1 += z.re * pi.re + z.im * pi.im;
            // Re <z, i phi> = Re(z conj(i phi))
            c2 += z.im * pi.re - z.re * pi.im;
        }
        out[2 * n] = w * c1;
        out[2 * n + 1] = w * c2;
        out
    }

    fn jacobian(&self, v: &[Complex64], omega: f64, k: f64) -> DMatrix<f64> {
        let n = self.n();
        let w = self.phi.grid().weight();
        let sw = w.sqrt();
        let nl = Complex64::from_polar(self.mu, self.gamma - self.theta);
        let e = Complex64::from_polar(1.0, -self.theta);
        let mut jac = DMatrix::zeros(2 * n + 2, 2 * n + 2);
        for i in 0..n {
            for j in 0..n {
                let l = sw * self.lap[i * n + j];
                jac[(i, j)] = l;
                jac[(n + i, n + j)] = l;
            }
        }
        for i in 0..n {
            let u = v[i];
            let r = u.norm();
            let rs = r.powf(self.sigma);
            let s2 = if r > 0.0 { self.sigma * r.powf(self.sigma - 2.0) } else { 0.0 };
            // d(|v|^s v) along real and imaginary perturbations
            let dp = Complex64::new(rs, 0.0) + u * (s2 * u.re);
            let dq = Complex64::new(0.0, rs) + u * (s2 * u.im);
            let jp = nl * dp;
            let jq = nl * dq;
            jac[(i, i)] += sw * jp.re;
            jac[(n + i, i)] += sw * jp.im;
            jac[(i, n + i)] += sw * jq.re;
            jac[(n + i, n + i)] += sw * jq.im;
        }
        let lin = Complex64::new(k, -omega) * e;
        for i in 0..n {
            jac[(i, i)] += sw * lin.re;
            jac[(n + i, i)] += sw * lin.im;
            jac[(i, n + i)] -= sw * lin.im;
            jac[(n + i, n + i)] += sw * lin.re;
            let d_omega = -Complex64::i() * e * v[i];
            let d_k = e * v[i];
            jac[(i, 2 * n)] = sw * d_omega.re;
            jac[(n + i, 2 * n)] = sw * d_omega.im;
            jac[(i, 2 * n + 1)] = sw * d_k.re;
            jac[(n + i, 2 * n + 1)] = sw * d_k.im;
        }
        for (j, p) in self.phi.samples().iter().enumerate() {
            jac[(2 * n, j)] = w * p.re;
            jac[(2 * n, n + j)] = w * p.im;
            jac[(2 * n + 1, j)] = -w * p.im;
            jac[(2 * n + 1, n + j)] = w * p.re;
        }
        jac
    }
}

fn newton(
    mu: f64,
    guess: &BranchPoint,
    phi: &Field,
    lap: &[f64],
    theta: f64,
    gamma: f64,
    sigma: f64,
) -> Result<BranchPoint> {
    let sys = System { lap, phi, theta, gamma, sigma, mu };
    let n = sys.n();
    let mut v = guess.v.samples().to_vec();
    let (mut omega, mut k) = (guess.omega, guess.k);
    let mut res = sys.residual(&v, omega, k);
    let mut norm = res.norm();
    for it in 1..=NEWTON_MAX_ITER {
        let jac = sys.jacobian(&v, omega, k);
        let step = jac.lu().solve(&(-&res)).ok_or(CglError::JacobianSingular { mu })?;
        if !step.iter().all(|x| x.is_finite()) {
            return Err(CglError::JacobianSingular { mu });
        }
        // Backtracking on the residual norm.
        let mut alpha = 1.0;
        let (mut tv, mut to, mut tk, mut tres);
        loop {
            tv = v
                .iter()
                .enumerate()
                .map(|(i, c)| c + Complex64::new(alpha * step[i], alpha * step[n + i]))
                .collect::<Vec<_>>();
            to = omega + alpha * step[2 * n];
            tk = k + alpha * step[2 * n + 1];
            tres = sys.residual(&tv, to, tk);
            if tres.norm() < norm || alpha < 1e-3 {
                break;
            }
            alpha *= 0.5;
        }
        v = tv;
        omega = to;
        k = tk;
        res = tres;
        norm = res.norm();
        if !norm.is_finite() {
            break;
        }
        if norm < NEWTON_TOL {
            return Ok(BranchPoint {
                mu,
                omega,
                k,
                v: Field::new(phi.grid().clone(), v)?,
                residual: norm,
                iterations: it,
            });
        }
    }
    Err(CglError::NewtonDiverged { mu, iterations: NEWTON_MAX_ITER, residual: norm })
}

/// Solves the branch equations at fixed `mu` starting from `guess`.
pub fn newton_solve(
    mu: f64,
    guess: &BranchPoint,
    phi: &Field,
    theta: f64,
    gamma: f64,
    sigma: f64,
) -> Result<BranchPoint> {
    let lap = phi.grid().laplacian_matrix();
    newton(mu, guess, phi, &lap, theta, gamma, sigma)
}

/// The exact `mu = 0` point.
pub fn linear_point(lambda: f64, phi: &Field, theta: f64) -> BranchPoint {
    BranchPoint {
        mu: 0.0,
        omega: -lambda * theta.sin(),
        k: lambda * theta.cos(),
        v: phi.clone(),
        residual: 0.0,
        iterations: 0,
    }
}

/// Uniform `mu`-stepping from the `n`-th eigenpair up to `mu_max`, using
/// the previous point as predictor and halving the step on failure.
pub fn continue_branch(
    grid: &Arc<Grid1D>,
    n: usize,
    theta: f64,
    gamma: f64,
    sigma: f64,
    mu_max: f64,
    steps: usize,
) -> Result<Branch> {
    if steps == 0 {
        return Err(CglError::BadGridSpec("steps must be at least 1".into()));
    }
    if !(mu_max >= 0.0) {
        return Err(CglError::BadGridSpec(format!("mu_max must be non-negative, got {mu_max}")));
    }
    if !(sigma > 0.0) {
        return Err(CglError::NonPositivePower(sigma));
    }
    let (lambda, phi) = linear_eigenpair(grid, n)?;
    let lap = grid.laplacian_matrix();
    let first = newton(0.0, &linear_point(lambda, &phi, theta), &phi, &lap, theta, gamma, sigma)?;
    let mut points = vec![first];
    if mu_max > 0.0 {
        let h = mu_max / steps as f64;
        for j in 1..=steps {
            let target = if j == steps { mu_max } else { j as f64 * h };
            loop {
                let prev = points.last().unwrap();
                let mut step = target - prev.mu;
                let point = loop {
                    match newton(prev.mu + step, prev, &phi, &lap, theta, gamma, sigma) {
                        Ok(p) => break p,
                        Err(e) => {
                            step *= 0.5;
                            if step < MIN_STEP {
                                return Err(CglError::ContinuationFailed {
                                    mu: prev.mu + 2.0 * step,
                                    source: Box::new(e),
                                });
                            }
                        }
                    }
                };
                let reached = point.mu >= target;
                points.push(point);
                if reached {
                    break;
                }
            }
        }
    }
    Ok(Branch { points, theta, gamma, sigma, lambda, eig_index: n, phi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub dk_dmu: f64,
    pub domega_dmu: f64,
    pub dk_analytic: f64,
    pub domega_analytic: f64,
    /// Errors relative to `||phi||_{s+2}^{s+2}/||phi||^2`, the scale of both
    /// slopes (either may vanish individually).
    pub dk_err: f64,
    pub domega_err: f64,
}

/// Compares one-sided second-order differences at `mu = 0` with the analytic slopes.
pub fn branch_derivative_check(branch: &Branch) -> Result<DerivativeCheck> {
    let p = &branch.points;
    if p.len() < 3 {
        return Err(CglError::NotEnoughPoints { needed: 3, found: p.len() });
    }
    let (h1, h2) = (p[1].mu - p[0].mu, p[2].mu - p[0].mu);
    // Derivative at mu0 from three (possibly non-uniform) samples.
    let d = |f0: f64, f1: f64, f2: f64| {
        let s1 = (f1 - f0) / h1;
        let s2 = (f2 - f0) / h2;
        (s1 * h2 - s2 * h1) / (h2 - h1)
    };
    let dk = d(p[0].k, p[1].k, p[2].k);
    let dw = d(p[0].omega, p[1].omega, p[2].omega);
    let (ak, aw) = branch.analytic_slopes();
    let scale = ak.hypot(aw);
    Ok(DerivativeCheck {
        dk_dmu: dk,
        domega_dmu: dw,
        dk_analytic: ak,
        domega_analytic: aw,
        dk_err: (dk - ak).abs() / scale,
        domega_err: (dw - aw).abs() / scale,
    })
}

/// `mu` at which the branch reaches `k`, by linear interpolation.
pub fn mu_of_k(branch: &Branch, k: f64) -> Result<f64> {
    if branch.gamma.cos().abs() < 1e-8 {
        return Err(CglError::BranchNotInvertible(format!(
            "dk/dmu vanishes at mu = 0 (cos gamma = {:e})",
            branch.gamma.cos()
        )));
    }
    let ks: Vec<f64> = branch.points.iter().map(|p| p.k).collect();
    let increasing = ks.windows(2).all(|w| w[1] > w[0]);
    let decreasing = ks.windows(2).all(|w| w[1] < w[0]);
    if ks.len() < 2 || !(increasing || decreasing) {
        return Err(CglError::BranchNotInvertible("k(mu) is not strictly monotone".into()));
    }
    for (i, w) in ks.windows(2).enumerate() {
        let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        if (lo..=hi).contains(&k) {
            let s = (k - w[0]) / (w[1] - w[0]);
            let (m0, m1) = (branch.points[i].mu, branch.points[i + 1].mu);
            return Ok(m0 + s * (m1 - m0));
        }
    }
    Err(CglError::BranchNotInvertible(format!(
        "k = {k} outside the computed range [{}, {}]",
        ks.iter().cloned().fold(f64::INFINITY, f64::min),
        ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn eigenpairs() {
        let g = Grid1D::dirichlet(PI, 32).unwrap();
        let (l, u) = linear_eigenpair(&g, 1).unwrap();
        assert_relative_eq!(l, 1.0, epsilon = 1e-14);
        for (x, c) in g.nodes().iter().zip(u.samples()) {
            assert_relative_eq!(c.re, x.sin() / (PI / 2.0).sqrt(), epsilon = 1e-14);
        }
        assert_relative_eq!(u.l2_norm_sq(), 1.0, epsilon = 1e-13);
        assert_relative_eq!(linear_eigenpair(&g, 2).unwrap().0, 4.0, epsilon = 1e-14);
        let g2 = Grid1D::dirichlet(2.0, 32).unwrap();
        assert_relative_eq!(linear_eigenpair(&g2, 1).unwrap().0, (PI / 2.0).powi(2), epsilon = 1e-14);
        assert!(matches!(linear_eigenpair(&g, 0), Err(CglError::IndexOutOfRange { .. })));
        assert!(matches!(linear_eigenpair(&g, 33), Err(CglError::IndexOutOfRange { .. })));
    }

    #[test]
    fn linear_point_converges_immediately() {
        let g = Grid1D::dirichlet(PI, 32).unwrap();
        let (l, phi) = linear_eigenpair(&g, 1).unwrap();
        let p = newton_solve(0.0, &linear_point(l, &phi, 0.3), &phi, 0.3, 0.2, 2.0).unwrap();
        assert_eq!(p.iterations, 1);
        assert_relative_eq!(p.omega, -(0.3f64).sin(), epsilon = 1e-12);
        assert_relative_eq!(p.k, (0.3f64).cos(), epsilon = 1e-12);
    }

    #[test]
    fn small_mu_slope() {
        let g = Grid1D::dirichlet(PI, 32).unwrap();
        let (l, phi) = linear_eigenpair(&g, 1).unwrap();
        let mu = 1e-4;
        let p = newton_solve(mu, &linear_point(l, &phi, 0.3), &phi, 0.3, 0.2, 2.0).unwrap();
        // ||phi||_4^4 for sin x / sqrt(pi/2): (3 pi/8) / (pi/2)^2 = 3/(2 pi)
        let slope = -(0.2f64).cos() * 3.0 / (2.0 * PI);
        assert_relative_eq!((p.k - 0.3f64.cos()) / mu, slope, max_relative = 1e-3);
    }

    #[test]
    fn far_guess_diverges() {
        let g = Grid1D::dirichlet(PI, 32).unwrap();
        let (_, phi) = linear_eigenpair(&g, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = (0..g.len())
            .map(|_| Complex64::new(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3)))
            .collect();
        let v = Field::new(g.clone(), samples).unwrap();
        let guess = BranchPoint { mu: 1.0, omega: 1e3, k: -1e3, v, residual: 0.0, iterations: 0 };
        let out = newton_solve(1.0, &guess, &phi, 0.3, 0.2, 2.0);
        assert!(matches!(out, Err(CglError::NewtonDiverged { .. })), "{out:?}");
    }

    #[test]
    fn branch_example() {
        let g = Grid1D::dirichlet(PI, 64).unwrap();
        let b = continue_branch(&g, 1, 0.3, 0.2, 2.0, 0.1, 10).unwrap();
        assert_eq!(b.points.len(), 11);
        assert!(b.points.windows(2).all(|w| w[1].k < w[0].k));
        for (p, row) in b.points.iter().zip(b.rows()) {
            assert!(p.residual < NEWTON_TOL);
            assert!(p.v.sub(&b.phi).unwrap().inner_real(&b.phi).unwrap().abs() < 1e-10);
            let iphi = b.phi.scale(Complex64::i());
            assert!(p.v.sub(&b.phi).unwrap().inner_real(&iphi).unwrap().abs() < 1e-10);
            assert!(row.physical_residual < 1e-8, "{}", row.physical_residual);
        }
        let check = branch_derivative_check(&b).unwrap();
        assert!(check.dk_err < 1e-2 && check.domega_err < 1e-2, "{check:?}");
        assert!(check.dk_dmu < 0.0);
        let k_mid = 0.5 * (b.points[3].k + b.points[4].k);
        let mu = mu_of_k(&b, k_mid).unwrap();
        assert!(mu > b.points[3].mu && mu < b.points[4].mu);
    }

    #[test]
    fn zero_mu_max_and_short_branch() {
        let g = Grid1D::dirichlet(PI, 16).unwrap();
        let b = continue_branch(&g, 1, 0.3, 0.2, 2.0, 0.0, 5).unwrap();
        assert_eq!(b.points.len(), 1);
        assert!(matches!(
            branch_derivative_check(&b),
            Err(CglError::NotEnoughPoints { needed: 3, found: 1 })
        ));
    }

    #[test]
    fn vertical_branch_is_not_invertible() {
        let g = Grid1D::dirichlet(PI, 32).unwrap();
        let b = continue_branch(&g, 1, 0.3, PI / 2.0, 2.0, 0.05, 5).unwrap();
        let check = branch_derivative_check(&b).unwrap();
        assert!(check.dk_dmu.abs() < 1e-2 * check.domega_dmu.abs());
        assert!(matches!(mu_of_k(&b, b.points[1].k), Err(CglError::BranchNotInvertible(_))));
    }

    #[test]
    fn higher_mode_branch() {
        let g = Grid1D::dirichlet(PI, 64).unwrap();
        let b = continue_branch(&g, 2, -0.4, 0.7, 1.0, 0.2, 4).unwrap();
        assert_relative_eq!(b.lambda, 4.0, epsilon = 1e-14);
        for row in b.rows() {
            assert!(row.physical_residual < 1e-8);
        }
    }
}
