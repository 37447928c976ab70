//! Real linearization around a bound-state and its dense spectrum.
//!
//! With `u_t = -L u`,
//!
//! ```text
//! -L u = e^{i theta} u'' + e^{i gamma}(|phi|^s u + s |phi|^{s-2} phi Re(conj(phi) u)) - i omega u + k u
//! ```
//!
//! `L` is only real-linear, so it is assembled as a `2N x 2N` real matrix
//! acting on `(Re u, Im u)`. Gauge and translation invariance put `i phi`
//! and `phi'` in its kernel.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundstate::BoundState;
use crate::error::{CglError, Result};
use crate::grid::Field;

pub const DEFAULT_KERNEL_TOL: f64 = 1e-4;
/// Slack allowed in the eigenvalue lower-bound check.
pub const LOWER_BOUND_TOL: f64 = 1e-6;

/// Coefficients of the linearization (rotating-frame trig form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationParams {
    pub theta: f64,
    pub gamma: f64,
    pub omega: f64,
    pub k: f64,
    pub sigma: f64,
}

impl LinearizationParams {
    pub fn of(bs: &BoundState) -> Self {
        Self { theta: bs.theta, gamma: bs.gamma, omega: bs.omega, k: bs.k, sigma: bs.sigma }
    }
}

#[derive(Debug, Clone)]
pub struct RealLinearOperator {
    /// `2N x 2N`, rows/columns ordered `(Re u_0..Re u_{N-1}, Im u_0..Im u_{N-1})`.
    pub matrix: Mat<f64>,
    pub params: LinearizationParams,
    pub phi: Field,
}

/// Pointwise potential data: `w = |phi|^s` and `z = s e^{i gamma} |phi|^{s-2} phi`.
fn potential(phi: &Field, p: &LinearizationParams) -> Vec<(f64, Complex64)> {
    let eg = Complex64::from_polar(1.0, p.gamma);
    phi.samples()
        .iter()
        .map(|&f| {
            let r = f.norm();
            if r == 0.0 {
                (0.0, Complex64::new(0.0, 0.0))
            } else {
                (r.powf(p.sigma), eg * f * (p.sigma * r.powf(p.sigma - 2.0)))
            }
        })
        .collect()
}

/// Matrix-free `-L u`.
pub fn apply_minus_l(phi: &Field, p: &LinearizationParams, u: &Field) -> Result<Field> {
    if u.len() != phi.len() {
        return Err(CglError::SizeMismatch { expected: phi.len(), found: u.len() });
    }
    let lap = u.laplacian();
    let et = Complex64::from_polar(1.0, p.theta);
    let eg = Complex64::from_polar(1.0, p.gamma);
    let lin = Complex64::new(p.k, -p.omega);
    let pot = potential(phi, p);
    let out = u
        .samples()
        .iter()
        .zip(lap.samples())
        .zip(phi.samples())
        .zip(&pot)
        .map(|(((&v, &l), &f), &(w, z))| {
            et * l + eg * w * v + z * (f.re * v.re + f.im * v.im) + lin * v
        })
        .collect();
    Field::new(phi.grid().clone(), out)
}

/// Assembles `L` around an arbitrary profile.
pub fn assemble_about(phi: &Field, p: LinearizationParams) -> RealLinearOperator {
    let n = phi.len();
    let lap = phi.grid().laplacian_matrix();
    let (st, ct) = p.theta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    let pot = potential(phi, &p);
    let mut m = Mat::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let d = lap[i * n + j];
            // e^{i theta}(D p + i D q)
            m[(i, j)] = ct * d;
            m[(i, n + j)] = -st * d;
            m[(n + i, j)] = st * d;
            m[(n + i, n + j)] = ct * d;
        }
        let (w, z) = pot[i];
        let f = phi.samples()[i];
        m[(i, i)] += cg * w + z.re * f.re + p.k;
        m[(i, n + i)] += -sg * w + z.re * f.im + p.omega;
        m[(n + i, i)] += sg * w + z.im * f.re - p.omega;
        m[(n + i, n + i)] += cg * w + z.im * f.im + p.k;
    }
    // Everything above is -L.
    for j in 0..2 * n {
        for i in 0..2 * n {
            m[(i, j)] = -m[(i, j)];
        }
    }
    RealLinearOperator { matrix: m, params: p, phi: phi.clone() }
}

pub fn assemble(bs: &BoundState) -> RealLinearOperator {
    assemble_about(&bs.phi, LinearizationParams::of(bs))
}

impl RealLinearOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `L u` through the assembled matrix.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        let n = self.phi.len();
        if u.len() != n {
            return Err(CglError::SizeMismatch { expected: n, found: u.len() });
        }
        let x: Vec<f64> = u
            .samples()
            .iter()
            .map(|c| c.re)
            .chain(u.samples().iter().map(|c| c.im))
            .collect();
        let y: Vec<f64> = (0..2 * n)
            .map(|i| (0..2 * n).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect();
        let out = (0..n).map(|i| Complex64::new(y[i], y[n + i])).collect();
        Field::new(self.phi.grid().clone(), out)
    }
}

/// Caps the threads used by the dense eigensolver (`0` = all cores).
pub fn set_eigensolver_threads(threads: usize) {
    faer::set_global_parallelism(if threads == 1 { faer::Par::Seq } else { faer::Par::rayon(threads) });
}

/// All `2N` eigenvalues of `L`.
pub fn spectrum(op: &RealLinearOperator) -> Result<Vec<Complex64>> {
    if !op.matrix.col_iter().all(|c| c.iter().all(|x| x.is_finite())) {
        return Err(CglError::EigensolveFailed("matrix has non-finite entries".into()));
    }
    let eig = op
        .matrix
        .eigenvalues()
        .map_err(|e| CglError::EigensolveFailed(format!("{e:?}")))?;
    Ok(eig.into_iter().map(|c| Complex64::new(c.re, c.im)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelResiduals {
    /// `||L(i phi)|| / ||phi||`
    pub gauge: f64,
    /// `||L(phi')|| / ||phi'||`
    pub translation: f64,
}

pub fn kernel_check(op: &RealLinearOperator) -> Result<KernelResiduals> {
    let phi = &op.phi;
    let norm = phi.l2_norm_sq().sqrt();
    if norm == 0.0 {
        return Err(CglError::ZeroProfile);
    }
    let gauge = op.apply(&phi.scale(Complex64::i()))?.l2_norm_sq().sqrt() / norm;
    let dphi = phi.derivative();
    let dnorm = dphi.l2_norm_sq().sqrt();
    let translation = if dnorm == 0.0 {
        0.0
    } else {
        op.apply(&dphi)?.l2_norm_sq().sqrt() / dnorm
    };
    Ok(KernelResiduals { gauge, translation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub kernel_tol: f64,
    pub kernel_dim: usize,
    /// Smallest real part among eigenvalues with `|lambda| >= kernel_tol`.
    pub abscissa_excl_kernel: Option<f64>,
    /// Smallest real part over the whole spectrum.
    pub abscissa: f64,
    /// `-k`: bound on the essential spectrum of the continuum operator.
    pub essential_bound: f64,
    /// `(1 + s) ||phi||_inf^s`, with the certified sup-norm.
    pub condition_lhs: f64,
    /// Same with the alternative closed-form sup-norm (display only).
    pub condition_lhs_alt_display: f64,
    /// `(1 + s) ||phi||_inf^s < -k`
    pub condition_1_9: bool,
    /// `-k - (1 + s) ||phi||_inf^s`
    pub lower_bound: f64,
    pub lower_bound_check: bool,
    pub kernel: KernelResiduals,
}

/// Condition `(1 + s) A^s < -k` for a given sup-norm `A`.
pub fn stability_condition(sup_norm: f64, sigma: f64, k: f64) -> (f64, bool) {
    let lhs = (1.0 + sigma) * sup_norm.powf(sigma);
    (lhs, lhs < -k)
}

pub fn stability_report(bs: &BoundState, kernel_tol: f64) -> Result<StabilityReport> {
    let op = assemble(bs);
    let kernel = kernel_check(&op)?;
    let eigenvalues = spectrum(&op)?;
    let kernel_dim = eigenvalues.iter().filter(|l| l.norm() < kernel_tol).count();
    let abscissa_excl_kernel = eigenvalues
        .iter()
        .filter(|l| l.norm() >= kernel_tol)
        .map(|l| l.re)
        .reduce(f64::min);
    let abscissa = eigenvalues.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let (condition_lhs, condition_1_9) =
        stability_condition(bs.diagnostics.sup_norm, bs.sigma, bs.k);
    let (condition_lhs_alt_display, _) =
        stability_condition(bs.diagnostics.sup_norm_alt_display, bs.sigma, bs.k);
    let lower_bound = -bs.k - condition_lhs;
    Ok(StabilityReport {
        kernel_tol,
        kernel_dim,
        abscissa_excl_kernel,
        abscissa,
        essential_bound: -bs.k,
        condition_lhs,
        condition_lhs_alt_display,
        condition_1_9,
        lower_bound,
        lower_bound_check: abscissa >= lower_bound - LOWER_BOUND_TOL,
        kernel,
        eigenvalues,
    })
}

impl StabilityReport {
    pub fn write_eigenvalues_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "re,im")?;
        for l in &self.eigenvalues {
            writeln!(w, "{},{}", l.re, l.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundstate::construct_bound_state;
    use crate::grid::Grid1D;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn conj_closed(eigs: &[Complex64], tol: f64) -> bool {
        eigs.iter().all(|l| eigs.iter().any(|m| (m - l.conj()).norm() < tol))
    }

    #[test]
    fn potential_free_spectrum_matches_modes() {
        let g = Grid1D::periodic(10.0, 32).unwrap();
        let p = LinearizationParams { theta: 0.4, gamma: 1.0, omega: 0.7, k: -1.3, sigma: 2.0 };
        let op = assemble_about(&Field::zeros(g.clone()), p);
        let eigs = spectrum(&op).unwrap();
        let mut expected = Vec::new();
        for &m in g.mode_multipliers() {
            let l = Complex64::from_polar(m, p.theta) + Complex64::new(-p.k, p.omega);
            expected.push(l);
            expected.push(l.conj());
        }
        assert_eq!(eigs.len(), expected.len());
        let mut left = eigs;
        for b in expected {
            let (i, d) = left
                .iter()
                .map(|a| (a - b).norm())
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            assert!(d < 1e-8 * (1.0 + b.norm()), "{b}: off by {d}");
            left.swap_remove(i);
        }
    }

    #[test]
    fn heat_mode_example() {
        // theta = 0, omega = 0, k = -1, mode with multiplier 1: lambda = 2.
        let g = Grid1D::periodic(2.0 * std::f64::consts::PI, 8).unwrap();
        let p = LinearizationParams { theta: 0.0, gamma: 0.0, omega: 0.0, k: -1.0, sigma: 2.0 };
        let eigs = spectrum(&assemble_about(&Field::zeros(g), p)).unwrap();
        assert!(eigs.iter().filter(|l| (*l - 2.0).norm() < 1e-10).count() >= 2);
    }

    #[test]
    fn assembled_matches_matrix_free() {
        let g = Grid1D::periodic(60.0, 128).unwrap();
        let bs = construct_bound_state(0.2, 1.0, -0.5, 1.5, g).unwrap();
        let op = assemble(&bs);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let samples = (0..bs.phi.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let u = Field::new(bs.phi.grid().clone(), samples).unwrap();
            let a = op.apply(&u).unwrap();
            let b = apply_minus_l(&bs.phi, &op.params, &u).unwrap().scale(Complex64::new(-1.0, 0.0));
            let scale = b.sup_norm();
            assert!(a.sub(&b).unwrap().sup_norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn bound_state_spectrum_properties() {
        let g = Grid1D::periodic(60.0, 256).unwrap();
        let bs = construct_bound_state(0.3, 1.0, -1.0, 2.0, g).unwrap();
        let report = stability_report(&bs, DEFAULT_KERNEL_TOL).unwrap();
        assert!(conj_closed(&report.eigenvalues, 1e-8));
        assert!(report.lower_bound_check);
        assert!(report.kernel.gauge < 1e-5, "{:?}", report.kernel);

        // Continuity: a 1e-8 perturbation of phi moves eigenvalues by O(1e-8).
        let op = assemble(&bs);
        let pert = bs.phi.map(|c| c * (1.0 + 1e-8));
        let op2 = assemble_about(&pert, op.params);
        let a = sorted(spectrum(&op).unwrap());
        let b = sorted(spectrum(&op2).unwrap());
        let shift = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(shift < 1e-5, "{shift}");
    }

    #[test]
    fn kernel_controls() {
        let g = Grid1D::periodic(60.0, 128).unwrap();
        let p = LinearizationParams { theta: 0.3, gamma: 1.2, omega: 1.0, k: 0.0, sigma: 2.0 };
        let zero = assemble_about(&Field::zeros(g.clone()), p);
        assert!(matches!(kernel_check(&zero), Err(CglError::ZeroProfile)));
        let c = g.center();
        let gauss = Field::from_real_fn(g, |x| (-(x - c).powi(2) / 4.0).exp());
        let res = kernel_check(&assemble_about(&gauss, p)).unwrap();
        assert!(res.gauge > 0.1, "{res:?}");
    }

    #[test]
    fn condition_arithmetic() {
        let (lhs, ok) = stability_condition(2f64.sqrt(), 2.0, -10.0);
        assert!((lhs - 6.0).abs() < 1e-12);
        assert!(ok);
        assert!(!stability_condition(2f64.sqrt(), 2.0, -6.0).1);
    }
}
