//! Distance to the symmetry orbit `{e^{i rho} phi(. - y)}` in H1.
//!
//! For fixed `y` the best gauge is `rho = arg C(y)` with
//! `C(y) = <u, phi(. - y)>_{H1}`, so only the translation needs searching:
//! `C` on the node shifts comes from one inverse FFT, and the best node is
//! refined by bisection on the derivative of the trigonometric polynomial `|C|^2`.

use num_complex::Complex64;

use crate::grid::{Field, GridKind, Norm};

const BISECT_ITERS: usize = 80;

fn h1_dist(u: &Field, v: &Field) -> f64 {
    u.sub(v).and_then(|d| d.norm(Norm::H1)).unwrap_or(f64::INFINITY)
}

/// Coefficients `a_m` with `C(y) = L sum_m a_m e^{i kappa_m y}` (Nyquist
/// term taken as `cos`).
fn correlation_coeffs(u: &Field, phi: &Field) -> Vec<Complex64> {
    let g = u.grid();
    u.forward_modes()
        .iter()
        .zip(phi.forward_modes())
        .zip(g.mode_multipliers())
        .map(|((a, b), m)| a * b.conj() * (1.0 + m))
        .collect()
}

/// `C(y)` and `C'(y)`.
fn correlation_at(coeffs: &[Complex64], u: &Field, y: f64) -> (Complex64, Complex64) {
    let g = u.grid();
    let n = g.len();
    let (mut c, mut dc) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (m, a) in coeffs.iter().enumerate() {
        if m == n / 2 {
            let kap = g.mode_multipliers()[m].sqrt();
            c += a * (kap * y).cos();
            dc -= a * kap * (kap * y).sin();
        } else {
            let kap = g.wavenumbers()[m];
            let e = a * Complex64::from_polar(1.0, kap * y);
            c += e;
            dc += e * Complex64::new(0.0, kap);
        }
    }
    (c * g.length(), dc * g.length())
}

fn gauge_candidate(phi: &Field, c: Complex64) -> Field {
    if c.norm() == 0.0 {
        phi.clone()
    } else {
        phi.scale(c / c.norm())
    }
}

/// `min_{rho, y} ||u - e^{i rho} phi(. - y)||_{H1}`; on Dirichlet grids only
/// the gauge is minimized. Never exceeds `||u - phi||_{H1}`.
pub fn orbital_distance(u: &Field, phi: &Field) -> f64 {
    let identity = h1_dist(u, phi);
    let g = u.grid();
    if g.kind() != GridKind::Periodic {
        let c = u.inner_real_h1(phi).unwrap_or(0.0);
        let ci = u.inner_real_h1(&phi.scale(Complex64::i())).unwrap_or(0.0);
        let cand = gauge_candidate(phi, Complex64::new(c, ci));
        return identity.min(h1_dist(u, &cand));
    }
    let coeffs = correlation_coeffs(u, phi);
    let node_corr = match g.inverse(&coeffs) {
        Ok(v) => v,
        Err(_) => return identity,
    };
    let (best, _) = node_corr
        .iter()
        .enumerate()
        .map(|(j, c)| (j, c.norm()))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let n = g.len();
    let h = g.spacing();
    // Node j of the inverse transform corresponds to the shift y = j h (mod L).
    let y_node = if best > n / 2 { (best as f64 - n as f64) * h } else { best as f64 * h };

    // Bisection on d|C|^2/dy, which changes sign across the maximum.
    let slope = |y: f64| {
        let (c, dc) = correlation_at(&coeffs, u, y);
        (c.conj() * dc).re
    };
    let (mut lo, mut hi) = (y_node - h, y_node + h);
    let (s_lo, s_hi) = (slope(lo), slope(hi));
    if s_lo > 0.0 && s_hi < 0.0 {
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        lo = y_node;
        hi = y_node;
    }
    let y_ref = 0.5 * (lo + hi);

    let mut best_dist = identity;
    for y in [y_node, y_ref] {
        if let Ok(shifted) = phi.translated(y) {
            let cand = gauge_candidate(&shifted, correlation_at(&coeffs, u, y).0);
            best_dist = best_dist.min(h1_dist(u, &cand));
        }
    }
    best_dist
}
