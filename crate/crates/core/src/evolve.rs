//! Time integration of the trig-form equation by Strang splitting.
//!
//! The linear part `e^{i theta} u'' + (k - i omega) u` is diagonal in the
//! grid's mode basis and is applied exactly. The nonlinear part
//! `nu e^{i gamma}|u|^sigma u` is a pointwise ODE whose solution is
//! known in closed form:
//!
//! ```text
//! r(t)     = r0 (1 - sigma nu cos(gamma) r0^sigma t)^{-1/sigma}
//! phase(t) = phase0 - tan(gamma)/sigma * ln(1 - sigma nu cos(gamma) r0^sigma t)
//! ```
//!
//! so the only error is the splitting error, and finite-time blow-up of a
//! substep is detected from the vanishing denominator.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::grid::{Field, Grid1D, Norm};
use crate::lyapunov;
use crate::params::{CglParams, ScaleFactors, TrigParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    #[default]
    Lab,
    Rotating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Monitor {
    L2,
    H1,
    Linf,
    /// `int |u|^p`, recorded as column `Lp_<p>`.
    Wp(f64),
    V,
    Vdot,
    /// Records `mass`, `grad2` and `pnl` so the mass identity can be
    /// checked afterwards.
    MassIdentity,
}

impl Monitor {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let num = |rest: &str| {
            rest.trim_start_matches(['_', ':', '='])
                .parse::<f64>()
                .map_err(|_| CglError::Parse(format!("bad monitor exponent in '{s}'")))
        };
        Ok(match lower.as_str() {
            "l2" => Monitor::L2,
            "h1" => Monitor::H1,
            "linf" => Monitor::Linf,
            "v" => Monitor::V,
            "vdot" => Monitor::Vdot,
            "mass" | "mass_residual" | "mass_identity" => Monitor::MassIdentity,
            _ if lower.starts_with("lp") || lower.starts_with("wp") => Monitor::Wp(num(&lower[2..])?),
            _ => return Err(CglError::Parse(format!("unknown monitor '{s}'"))),
        })
    }

    fn columns(&self) -> Vec<String> {
        match self {
            Monitor::L2 => vec!["L2".into()],
            Monitor::H1 => vec!["H1".into()],
            Monitor::Linf => vec!["Linf".into()],
            Monitor::Wp(p) => vec![format!("Lp_{p}")],
            Monitor::V => vec!["V".into()],
            Monitor::Vdot => vec!["Vdot".into()],
            Monitor::MassIdentity => vec!["mass".into(), "grad2".into(), "pnl".into()],
        }
    }
}

/// How monitors see the state: the trig-form field `w` is mapped to
/// `u(x) = amplitude * w(x / spatial)` and functionals use `params`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalView {
    pub params: CglParams,
    pub scales: ScaleFactors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSpec {
    pub params: TrigParams,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub frame: Frame,
    #[serde(default = "default_stride")]
    pub monitor_stride: usize,
    #[serde(default = "default_cap")]
    pub blowup_cap: f64,
    #[serde(default)]
    pub monitors: Vec<Monitor>,
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    #[serde(default)]
    pub physical: Option<PhysicalView>,
    /// Stop early once the physical H1 norm exceeds this value.
    #[serde(default)]
    pub stop_h1_above: Option<f64>,
}

fn default_stride() -> usize {
    1
}
fn default_cap() -> f64 {
    DEFAULT_BLOWUP_CAP
}

pub const DEFAULT_BLOWUP_CAP: f64 = 1e6;

impl EvolveSpec {
    pub fn new(params: TrigParams, dt: f64, t_final: f64) -> Self {
        Self {
            params,
            dt,
            t_final,
            frame: Frame::Lab,
            monitor_stride: 1,
            blowup_cap: DEFAULT_BLOWUP_CAP,
            monitors: vec![Monitor::L2, Monitor::H1, Monitor::Linf],
            snapshot_stride: None,
            physical: None,
            stop_h1_above: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CglError::BadEvolveSpec(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.dt < self.t_final) {
            return Err(CglError::BadEvolveSpec(format!(
                "need dt < T, got dt = {}, T = {}",
                self.dt, self.t_final
            )));
        }
        if self.monitor_stride == 0 {
            return Err(CglError::BadEvolveSpec("monitor_stride must be >= 1".into()));
        }
        if self.snapshot_stride == Some(0) {
            return Err(CglError::BadEvolveSpec("snapshot_stride must be >= 1".into()));
        }
        if !(self.blowup_cap > 0.0) {
            return Err(CglError::BadEvolveSpec("blowup_cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Completed,
    Blowup { t: f64 },
    /// Early stop requested through `stop_h1_above`.
    Escaped { t: f64 },
    Error,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Column name and series, in recording order.
    pub monitors: Vec<(String, Vec<f64>)>,
    pub snapshots: Vec<(f64, Field)>,
    pub outcome: Outcome,
    pub final_state: Field,
    pub final_time: f64,
    pub error: Option<String>,
}

impl Trajectory {
    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn write_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        write!(w, "t")?;
        for (name, _) in &self.monitors {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for (i, t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for (_, series) in &self.monitors {
                write!(w, ",{}", series[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn linear_exponent(mult: f64, params: &TrigParams, frame: Frame) -> Complex64 {
    let rot = match frame {
        Frame::Lab => 0.0,
        Frame::Rotating => params.omega,
    };
    -Complex64::from_polar(mult, params.theta) + Complex64::new(params.k, -rot)
}

fn linear_factors(grid: &Grid1D, dt: f64, params: &TrigParams, frame: Frame) -> Vec<Complex64> {
    grid.mode_multipliers()
        .iter()
        .map(|&m| (linear_exponent(m, params, frame) * dt).exp())
        .collect()
}

fn apply_mode_factors(f: &Field, factors: &[Complex64]) -> Field {
    let mut modes = f.forward_modes();
    modes.iter_mut().zip(factors).for_each(|(c, g)| *c *= g);
    Field::inverse_modes(&modes, f.grid().clone()).expect("length checked")
}

/// Exact flow of the linear part over `dt`.
pub fn linear_substep(f: &Field, dt: f64, params: &TrigParams, frame: Frame) -> Field {
    apply_mode_factors(f, &linear_factors(f.grid(), dt, params, frame))
}

/// `-ln(1 - s) / s`, continuous at `s = 0`.
fn log_ratio(s: f64) -> f64 {
    if s.abs() < 1e-300 {
        1.0
    } else {
        -(-s).ln_1p() / s
    }
}

fn nonlinear_in_place(samples: &mut [Complex64], dt: f64, params: &TrigParams) -> Result<()> {
    if params.nu == 0.0 {
        return Ok(());
    }
    let sigma = params.sigma;
    let (sg, cg) = params.gamma.sin_cos();
    let mut earliest: Option<(usize, f64)> = None;
    for (j, u) in samples.iter().enumerate() {
        let rs = u.norm().powf(sigma);
        let rate = sigma * params.nu * cg * rs;
        if rate * dt >= 1.0 {
            let t_star = 1.0 / rate;
            if earliest.is_none_or(|(_, t)| t_star < t) {
                earliest = Some((j, t_star));
            }
        }
    }
    if let Some((node, t_star)) = earliest {
        return Err(CglError::SubstepBlowup { node, t_star, dt });
    }
    for u in samples.iter_mut() {
        let r0 = u.norm();
        if r0 == 0.0 {
            continue;
        }
        let rs = r0.powf(sigma);
        let s = sigma * params.nu * cg * rs * dt;
        let g = log_ratio(s);
        // ln(r/r0) = -ln(1 - s)/sigma = s g / sigma
        let log_gain = s * g / sigma;
        let dphase = params.nu * sg * rs * dt * g;
        *u *= Complex64::from_polar(log_gain.exp(), dphase);
    }
    Ok(())
}

/// Exact flow of `u_t = nu e^{i gamma}|u|^sigma u` over `dt`.
pub fn nonlinear_substep(f: &Field, dt: f64, params: &TrigParams) -> Result<Field> {
    let mut out = f.clone();
    nonlinear_in_place(out.samples_mut(), dt, params)?;
    Ok(out)
}

/// Half linear, full nonlinear, half linear.
pub fn step_strang(f: &Field, dt: f64, params: &TrigParams, frame: Frame) -> Result<Field> {
    let half = linear_factors(f.grid(), 0.5 * dt, params, frame);
    let mut u = apply_mode_factors(f, &half);
    nonlinear_in_place(u.samples_mut(), dt, params)?;
    Ok(apply_mode_factors(&u, &half))
}

/// Reusable Strang stepper with cached linear factors.
pub struct Stepper {
    params: TrigParams,
    frame: Frame,
    dt: f64,
    half: Vec<Complex64>,
    state: Field,
}

impl Stepper {
    pub fn new(f0: Field, params: TrigParams, dt: f64, frame: Frame) -> Self {
        let half = linear_factors(f0.grid(), 0.5 * dt, &params, frame);
        Self { params, frame, dt, half, state: f0 }
    }

    pub fn state(&self) -> &Field {
        &self.state
    }

    pub fn into_state(self) -> Field {
        self.state
    }

    pub fn step(&mut self) -> Result<()> {
        self.step_with(self.dt)
    }

    /// One step of arbitrary length (used for the final partial step).
    pub fn step_with(&mut self, dt: f64) -> Result<()> {
        let next = if dt == self.dt {
            let mut u = apply_mode_factors(&self.state, &self.half);
            nonlinear_in_place(u.samples_mut(), dt, &self.params)?;
            apply_mode_factors(&u, &self.half)
        } else {
            step_strang(&self.state, dt, &self.params, self.frame)?
        };
        self.state = next;
        Ok(())
    }
}

struct MonitorSet {
    monitors: Vec<Monitor>,
    columns: Vec<(String, Vec<f64>)>,
    view: Option<(Arc<Grid1D>, PhysicalView)>,
    params: CglParams,
}

impl MonitorSet {
    fn new(spec: &EvolveSpec, grid: &Grid1D) -> Result<Self> {
        let view = match spec.physical {
            Some(v) => Some((grid.rescaled(v.scales.spatial)?, v)),
            None => None,
        };
        let params = spec.physical.map(|v| v.params).unwrap_or_else(|| spec.params.as_cgl());
        let mut monitors = spec.monitors.clone();
        if spec.stop_h1_above.is_some() && !monitors.contains(&Monitor::H1) {
            monitors.push(Monitor::H1);
        }
        let columns = monitors
            .iter()
            .flat_map(|m| m.columns())
            .map(|c| (c, Vec::new()))
            .collect();
        Ok(Self { monitors, columns, view, params })
    }

    fn physical(&self, w: &Field) -> Field {
        match &self.view {
            Some((g, v)) => Field::from_vec(
                g.clone(),
                w.samples().iter().map(|c| c * v.scales.amplitude).collect(),
            ),
            None => w.clone(),
        }
    }

    /// Records all monitors; returns the physical H1 norm if recorded.
    fn record(&mut self, w: &Field) -> Option<f64> {
        let u = self.physical(w);
        let p = self.params;
        let mut values = Vec::with_capacity(self.columns.len());
        let mut h1 = None;
        for m in &self.monitors {
            match m {
                Monitor::L2 => values.push(u.norm(Norm::L2).unwrap()),
                Monitor::H1 => {
                    let v = u.norm(Norm::H1).unwrap();
                    h1 = Some(v);
                    values.push(v)
                }
                Monitor::Linf => values.push(u.sup_norm()),
                Monitor::Wp(q) => values.push(u.power_integral(*q)),
                Monitor::V => values.push(lyapunov::v_functional(&u, p.a, p.b, p.k, p.sigma)),
                Monitor::Vdot => values.push(lyapunov::v_dot(&u, p.a, p.b, p.k, p.sigma)),
                Monitor::MassIdentity => {
                    values.push(u.l2_norm_sq());
                    values.push(u.grad_norm_sq());
                    values.push(u.power_integral(p.sigma + 2.0));
                }
            }
        }
        for ((_, series), v) in self.columns.iter_mut().zip(values) {
            series.push(v);
        }
        h1
    }
}

/// Integrates from `f0` up to `spec.t_final` or until blow-up.
pub fn evolve(f0: &Field, spec: &EvolveSpec) -> Trajectory {
    let fail = |msg: String| Trajectory {
        times: Vec::new(),
        monitors: Vec::new(),
        snapshots: Vec::new(),
        outcome: Outcome::Error,
        final_state: f0.clone(),
        final_time: 0.0,
        error: Some(msg),
    };
    if let Err(e) = spec.validate() {
        return fail(e.to_string());
    }
    if !f0.is_finite() {
        return fail("initial data is not finite".into());
    }
    let mut monitors = match MonitorSet::new(spec, f0.grid()) {
        Ok(m) => m,
        Err(e) => return fail(e.to_string()),
    };

    let dt = spec.dt;
    let full_steps = ((spec.t_final / dt) * (1.0 + 1e-12)).floor() as usize;
    let remainder = spec.t_final - full_steps as f64 * dt;
    let has_partial = remainder > 1e-12 * spec.t_final;
    let total_steps = full_steps + usize::from(has_partial);

    let mut stepper = Stepper::new(f0.clone(), spec.params, dt, spec.frame);
    let mut times = vec![0.0];
    let mut snapshots = Vec::new();
    if spec.snapshot_stride.is_some() {
        snapshots.push((0.0, f0.clone()));
    }
    let mut outcome = Outcome::Completed;
    let mut t = 0.0;
    let h1_0 = monitors.record(f0);
    if let (Some(cap), Some(h)) = (spec.stop_h1_above, h1_0) {
        if h > cap {
            outcome = Outcome::Escaped { t: 0.0 };
        }
    }

    if outcome == Outcome::Completed {
        for n in 1..=total_steps {
            let (h, t_new) = if n <= full_steps {
                (dt, n as f64 * dt)
            } else {
                (remainder, spec.t_final)
            };
            if let Err(e) = stepper.step_with(h) {
                if let CglError::SubstepBlowup { t_star, .. } = e {
                    outcome = Outcome::Blowup { t: t + 0.5 * h + t_star };
                } else {
                    outcome = Outcome::Error;
                }
                break;
            }
            t = t_new;
            let u = stepper.state();
            let linf = u.sup_norm();
            let blown = !linf.is_finite()
                || linf * spec.physical.map_or(1.0, |v| v.scales.amplitude) > spec.blowup_cap;
            let last = n == total_steps;
            if n % spec.monitor_stride == 0 || last || blown {
                times.push(t);
                let h1 = monitors.record(u);
                if let (Some(cap), Some(h1)) = (spec.stop_h1_above, h1) {
                    if h1 > cap && !blown {
                        outcome = Outcome::Escaped { t };
                        break;
                    }
                }
            }
            if let Some(s) = spec.snapshot_stride {
                if n % s == 0 || last {
                    snapshots.push((t, u.clone()));
                }
            }
            if blown {
                outcome = Outcome::Blowup { t };
                break;
            }
        }
    }

    Trajectory {
        times,
        monitors: monitors.columns,
        snapshots,
        outcome,
        final_time: t,
        final_state: stepper.into_state(),
        error: None,
    }
}
