//! One-dimensional spectral grids and complex fields sampled on them.
//!
//! Two discretizations are supported:
//!
//! * [`GridKind::Periodic`]: the box `[-L/2, L/2)` with `N` uniform nodes
//!   `x_j = -L/2 + jL/N`, Fourier modes in FFT ordering (`m = 0, 1, ..,
//!   N/2, -N/2+1, .., -1`). `mode_multipliers[m]` is the wavenumber squared
//!   `kappa_m^2`, including the Nyquist mode.
//! * [`GridKind::Dirichlet`]: the interval `(0, L)` with interior nodes
//!   `x_j = jL/(N+1)`, `j = 1..N`, expanded in `sin(m pi x / L)`,
//!   `m = 1..N`. `mode_multipliers[m-1] = (m pi / L)^2` are the exact
//!   Dirichlet eigenvalues of `-d^2/dx^2`, ascending and simple.
//!
//! Quadrature uses uniform weights `L/N` (periodic) and `L/(N+1)`
//! (Dirichlet); both integrate products of two band-limited fields exactly.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Periodic,
    Dirichlet,
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridKind::Periodic => write!(f, "periodic"),
            GridKind::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

/// Serializable grid header (`kind`, `L`, `N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid1D>> {
        Grid1D::new(self.kind, self.length, self.n).map(Arc::new)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L2,
    Lp(f64),
    H1,
    Linf,
}

pub struct Grid1D {
    kind: GridKind,
    length: f64,
    n: usize,
    nodes: Vec<f64>,
    mode_multipliers: Vec<f64>,
    /// Signed wavenumbers used for first derivatives (periodic: zero at
    /// Nyquist; Dirichlet: `m pi / L`).
    wavenumbers: Vec<f64>,
    weight: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D")
            .field("kind", &self.kind)
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.length == other.length && self.n == other.n
    }
}

impl Grid1D {
    pub fn new(kind: GridKind, length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(CglError::BadGridSpec(format!("length must be positive, got {length}")));
        }
        let min_n = match kind {
            GridKind::Periodic => 4,
            GridKind::Dirichlet => 3,
        };
        if n < min_n {
            return Err(CglError::BadGridSpec(format!("need N >= {min_n} for {kind} grids, got {n}")));
        }
        let mut planner = FftPlanner::new();
        match kind {
            GridKind::Periodic => {
                if !n.is_multiple_of(2) {
                    return Err(CglError::BadGridSpec(format!(
                        "periodic grids need even N, got {n}"
                    )));
                }
                let h = length / n as f64;
                let nodes = (0..n).map(|j| -0.5 * length + j as f64 * h).collect();
                let mut wavenumbers = Vec::with_capacity(n);
                let mut mode_multipliers = Vec::with_capacity(n);
                for m in 0..n {
                    let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                    let kappa = 2.0 * PI * signed / length;
                    mode_multipliers.push(kappa * kappa);
                    wavenumbers.push(if m == n / 2 { 0.0 } else { kappa });
                }
                Ok(Self {
                    kind,
                    length,
                    n,
                    nodes,
                    mode_multipliers,
                    wavenumbers,
                    weight: h,
                    fwd: planner.plan_fft_forward(n),
                    inv: planner.plan_fft_inverse(n),
                })
            }
            GridKind::Dirichlet => {
                let h = length / (n + 1) as f64;
                let nodes = (1..=n).map(|j| j as f64 * h).collect();
                let wavenumbers: Vec<f64> = (1..=n).map(|m| m as f64 * PI / length).collect();
                let mode_multipliers = wavenumbers.iter().map(|k| k * k).collect();
                let m = 2 * (n + 1);
                Ok(Self {
                    kind,
                    length,
                    n,
                    nodes,
                    mode_multipliers,
                    wavenumbers,
                    weight: h,
                    fwd: planner.plan_fft_forward(m),
                    inv: planner.plan_fft_inverse(m),
                })
            }
        }
    }

    pub fn periodic(length: f64, n: usize) -> Result<Arc<Self>> {
        Self::new(GridKind::Periodic, length, n).map(Arc::new)
    }

    pub fn dirichlet(length: f64, n: usize) -> Result<Arc<Self>> {
        Self::new(GridKind::Dirichlet, length, n).map(Arc::new)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn mode_multipliers(&self) -> &[f64] {
        &self.mode_multipliers
    }
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }
    /// Uniform quadrature weight.
    pub fn weight(&self) -> f64 {
        self.weight
    }
    pub fn spacing(&self) -> f64 {
        self.weight
    }
    pub fn spec(&self) -> GridSpec {
        GridSpec { kind: self.kind, length: self.length, n: self.n }
    }

    /// Midpoint of the domain (0 for periodic, L/2 for Dirichlet).
    pub fn center(&self) -> f64 {
        match self.kind {
            GridKind::Periodic => 0.0,
            GridKind::Dirichlet => 0.5 * self.length,
        }
    }

    /// Same kind and node count, domain length multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Arc<Self>> {
        Self::new(self.kind, self.length * factor, self.n).map(Arc::new)
    }

    /// Node samples to mode coefficients.
    ///
    /// Periodic: `f_j = sum_m c_m exp(2 pi i m j / N)`.
    /// Dirichlet: `f_j = sum_m b_m sin(m pi x_j / L)`.
    pub fn forward(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(samples.len())?;
        let n = self.n;
        match self.kind {
            GridKind::Periodic => {
                let mut buf = samples.to_vec();
                self.fwd.process(&mut buf);
                let scale = 1.0 / n as f64;
                buf.iter_mut().for_each(|c| *c *= scale);
                Ok(buf)
            }
            GridKind::Dirichlet => {
                let y = self.dst1(samples);
                let scale = 2.0 / (n + 1) as f64;
                Ok(y.into_iter().map(|c| c * scale).collect())
            }
        }
    }

    pub fn inverse(&self, modes: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(modes.len())?;
        match self.kind {
            GridKind::Periodic => {
                let mut buf = modes.to_vec();
                self.inv.process(&mut buf);
                Ok(buf)
            }
            GridKind::Dirichlet => Ok(self.dst1(modes)),
        }
    }

    /// Unnormalized DST-I, `y_k = sum_j x_j sin(pi j k / (N+1))`, through an
    /// odd extension of length `2(N+1)`.
    fn dst1(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let m = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1] = v;
            buf[m - j - 1] = -v;
        }
        self.fwd.process(&mut buf);
        // FFT of the odd extension equals -2i * DST-I.
        (1..=n).map(|k| buf[k] * Complex64::new(0.0, 0.5)).collect()
    }

    /// `sum_m c_m cos(pi m j / (N+1))` at the interior nodes.
    fn cosine_synthesis(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let m = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (k, &c) in coeffs.iter().enumerate() {
            buf[k + 1] = c;
            buf[m - k - 1] = c;
        }
        self.inv.process(&mut buf);
        (1..=n).map(|j| buf[j] * 0.5).collect()
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.n {
            Err(CglError::SizeMismatch { expected: self.n, found })
        } else {
            Ok(())
        }
    }

    /// Dense real matrix of the discrete Laplacian acting on node values
    /// (row-major, `N x N`).
    pub fn laplacian_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for col in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[col] = Complex64::new(1.0, 0.0);
            let modes = self.forward(&e).expect("length checked");
            let lap: Vec<Complex64> = modes
                .iter()
                .zip(&self.mode_multipliers)
                .map(|(c, m)| -c * m)
                .collect();
            let col_vals = self.inverse(&lap).expect("length checked");
            for (row, v) in col_vals.iter().enumerate() {
                out[row * n + col] = v.re;
            }
        }
        out
    }
}

/// Complex samples on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid1D>,
    samples: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Arc<Grid1D>, samples: Vec<Complex64>) -> Result<Self> {
        grid.check_len(samples.len())?;
        if samples.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CglError::BadGridSpec("field has non-finite samples".into()));
        }
        Ok(Self { grid, samples })
    }

    /// Unchecked for finiteness; used internally where values are produced
    /// by finite arithmetic or checked afterwards.
    pub(crate) fn from_vec(grid: Arc<Grid1D>, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), samples.len());
        Self { grid, samples }
    }

    pub fn zeros(grid: Arc<Grid1D>) -> Self {
        let n = grid.len();
        Self { grid, samples: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Arc<Grid1D>, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, samples }
    }

    pub fn from_real_fn(grid: Arc<Grid1D>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }
    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// The same samples reinterpreted on another grid of equal size.
    pub fn with_grid(&self, grid: Arc<Grid1D>) -> Result<Self> {
        grid.check_len(self.len())?;
        Ok(Self { grid, samples: self.samples.clone() })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_vec(self.grid.clone(), self.samples.iter().map(|&c| f(c)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|c| c * s)
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.len() != other.grid.len() {
            return Err(CglError::SizeMismatch {
                expected: self.grid.len(),
                found: other.grid.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Field) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_vec(
            self.grid.clone(),
            self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Field) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_vec(
            self.grid.clone(),
            self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        ))
    }

    /// `self + s * other`
    pub fn axpy(&self, s: Complex64, other: &Field) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_vec(
            self.grid.clone(),
            self.samples.iter().zip(&other.samples).map(|(a, b)| a + s * b).collect(),
        ))
    }

    pub fn forward_modes(&self) -> Vec<Complex64> {
        self.grid.forward(&self.samples).expect("field length matches grid")
    }

    pub fn inverse_modes(modes: &[Complex64], grid: Arc<Grid1D>) -> Result<Self> {
        let samples = grid.inverse(modes)?;
        Ok(Self::from_vec(grid, samples))
    }

    pub fn laplacian(&self) -> Self {
        let modes = self.forward_modes();
        let lap: Vec<Complex64> = modes
            .iter()
            .zip(self.grid.mode_multipliers())
            .map(|(c, m)| -c * m)
            .collect();
        Self::inverse_modes(&lap, self.grid.clone()).expect("length checked")
    }

    /// Spectral first derivative.
    pub fn derivative(&self) -> Self {
        let modes = self.forward_modes();
        match self.grid.kind {
            GridKind::Periodic => {
                let d: Vec<Complex64> = modes
                    .iter()
                    .zip(self.grid.wavenumbers())
                    .map(|(c, k)| c * Complex64::new(0.0, *k))
                    .collect();
                Self::inverse_modes(&d, self.grid.clone()).expect("length checked")
            }
            GridKind::Dirichlet => {
                let d: Vec<Complex64> =
                    modes.iter().zip(self.grid.wavenumbers()).map(|(c, k)| c * k).collect();
                Self::from_vec(self.grid.clone(), self.grid.cosine_synthesis(&d))
            }
        }
    }

    /// `||f'||^2`, computed in mode space so that `Re int conj(f) f'' =
    /// -||f'||^2` holds exactly for the discrete operators.
    pub fn grad_norm_sq(&self) -> f64 {
        let modes = self.forward_modes();
        let s: f64 = modes
            .iter()
            .zip(self.grid.mode_multipliers())
            .map(|(c, m)| c.norm_sqr() * m)
            .sum();
        match self.grid.kind {
            GridKind::Periodic => s * self.grid.length,
            GridKind::Dirichlet => s * 0.5 * self.grid.length,
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.weight * self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `int |f|^p` by quadrature.
    pub fn power_integral(&self, p: f64) -> f64 {
        self.grid.weight * self.samples.iter().map(|c| c.norm().powf(p)).sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self, which: Norm) -> Result<f64> {
        match which {
            Norm::L2 => Ok(self.l2_norm_sq().sqrt()),
            Norm::Lp(p) => {
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(CglError::BadExponent(p));
                }
                Ok(self.power_integral(p).powf(1.0 / p))
            }
            Norm::H1 => Ok((self.l2_norm_sq() + self.grad_norm_sq()).sqrt()),
            Norm::Linf => Ok(self.sup_norm()),
        }
    }

    /// `Re int f conj(g)`.
    pub fn inner_real(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.grid.weight
            * self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum::<f64>())
    }

    /// `Re <f, g>_{H1}` with the spectral derivative.
    pub fn inner_real_h1(&self, other: &Field) -> Result<f64> {
        let l2 = self.inner_real(other)?;
        let fm = self.forward_modes();
        let gm = other.forward_modes();
        let s: f64 = fm
            .iter()
            .zip(&gm)
            .zip(self.grid.mode_multipliers())
            .map(|((a, b), m)| (a * b.conj()).re * m)
            .sum();
        let factor = match self.grid.kind {
            GridKind::Periodic => self.grid.length,
            GridKind::Dirichlet => 0.5 * self.grid.length,
        };
        Ok(l2 + s * factor)
    }

    /// Periodic translation `f(x - y)` by spectral interpolation.
    pub fn translated(&self, y: f64) -> Result<Self> {
        if self.grid.kind != GridKind::Periodic {
            return Err(CglError::BadGridSpec("translation needs a periodic grid".into()));
        }
        let modes = self.forward_modes();
        let n = self.grid.len();
        let shifted: Vec<Complex64> = modes
            .iter()
            .enumerate()
            .map(|(m, c)| {
                if m == n / 2 {
                    // Keep the Nyquist mode real-consistent: cos(kappa y) only.
                    c * (self.grid.mode_multipliers()[m].sqrt() * y).cos()
                } else {
                    c * Complex64::from_polar(1.0, -self.grid.wavenumbers()[m] * y)
                }
            })
            .collect();
        Self::inverse_modes(&shifted, self.grid.clone())
    }

    /// Circular shift by whole nodes: `out[j] = f[j - shift]`.
    pub fn shifted_nodes(&self, shift: isize) -> Self {
        let n = self.len() as isize;
        let samples = (0..n)
            .map(|j| self.samples[(j - shift).rem_euclid(n) as usize])
            .collect();
        Self::from_vec(self.grid.clone(), samples)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "x,re,im")?;
        for (x, c) in self.grid.nodes().iter().zip(&self.samples) {
            writeln!(w, "{},{},{}", x, c.re, c.im)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }

    /// Reads `x,re,im` rows onto `grid`; node positions must match.
    pub fn read_csv(text: &str, grid: Arc<Grid1D>) -> Result<Self> {
        let mut samples = Vec::with_capacity(grid.len());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 3 {
                return Err(CglError::Parse(format!("line {}: expected x,re,im", lineno + 1)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CglError::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let x = parse(cols[0])?;
            let idx = samples.len();
            if idx >= grid.len() {
                return Err(CglError::SizeMismatch { expected: grid.len(), found: idx + 1 });
            }
            if (x - grid.nodes()[idx]).abs() > 1e-9 * grid.length().max(1.0) {
                return Err(CglError::Parse(format!(
                    "line {}: node {x} does not match grid node {}",
                    lineno + 1,
                    grid.nodes()[idx]
                )));
            }
            samples.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        Field::new(grid, samples)
    }
}
