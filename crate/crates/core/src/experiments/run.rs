//! Scenario runners and their verdict rules.
//!
//! * `zero_stability`: confirmed iff the monitored norm never grows by more
//!   than [`MONOTONE_RTOL`] between samples and ends below
//!   [`DECAY_FACTOR`] times its initial value.
//! * `instability`: confirmed iff the H1 norm leaves the escape ball (or the
//!   solution blows up) before `T`; no escape by `T` is inconclusive, since
//!   the claim says nothing about when the escape happens.
//! * `bs_orbital`: confirmed iff the final orbital distance is at most the
//!   initial one, refuted iff it is at least [`REFUTE_FACTOR`] times the
//!   initial one, inconclusive otherwise. Unperturbed runs (`delta = 0`) are
//!   confirmed iff the distance stays below [`EQUILIBRIUM_TOL`].
//! * `custom`: no claim is tested; always inconclusive.
//!
//! Hypothesis violations are reported as inconclusive before anything runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::orbital::orbital_distance;
use super::scenario::{DecayNorm, Scenario, ScenarioKind};
use super::svg;
use crate::boundstate::{construct_bound_state, BoundState};
use crate::error::{CglError, Result};
use crate::evolve::{evolve, EvolveSpec, Monitor, Outcome, PhysicalView, Trajectory};
use crate::grid::{Field, Grid1D, GridKind, Norm};
use crate::lyapunov::{energy_identity_residuals, thresholds, v_functional};
use crate::params::{validate, Alignment, CglParams, ScaleFactors, TrigParams};
use crate::spectra::stability_condition;

pub const MONOTONE_RTOL: f64 = 1e-8;
pub const DECAY_FACTOR: f64 = 1e-3;
pub const REFUTE_FACTOR: f64 = 10.0;
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Build identifier recorded in summaries.
pub const GIT_DESCRIBE: &str = env!("CGL_GIT_DESCRIBE");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Confirmed,
    Refuted,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Confirmed => 0,
            Verdict::Refuted => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub kind: ScenarioKind,
    pub verdict: Verdict,
    pub reason: String,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: ScenarioResult,
    pub trajectory: Option<Trajectory>,
    /// Physical parameters used for monitors (mass residual column).
    pub physical: Option<CglParams>,
    /// Extra `(t, value)` series, e.g. orbital distances.
    pub series: Vec<(String, Vec<f64>, Vec<f64>)>,
}

impl RunOutput {
    fn verdict_only(kind: ScenarioKind, verdict: Verdict, reason: String, metrics: BTreeMap<String, f64>) -> Self {
        Self {
            result: ScenarioResult { kind, verdict, reason, metrics, artifacts: Vec::new() },
            trajectory: None,
            physical: None,
            series: Vec::new(),
        }
    }
}

struct Setup {
    trig: TrigParams,
    scales: ScaleFactors,
    phys: CglParams,
    phys_grid: Arc<Grid1D>,
    trig_grid: Arc<Grid1D>,
}

fn setup(sc: &Scenario) -> Result<Setup> {
    let params = sc.params.ok_or_else(|| CglError::Parse("missing [params]".into()))?;
    let (trig, scales) = params.resolve()?;
    let phys_grid = sc.grid.build()?;
    let trig_grid = phys_grid.rescaled(1.0 / scales.spatial)?;
    Ok(Setup { trig, scales, phys: params.cgl(), phys_grid, trig_grid })
}

impl Setup {
    fn to_trig_field(&self, u: &Field) -> Field {
        let s = 1.0 / self.scales.amplitude;
        Field::new(self.trig_grid.clone(), u.samples().iter().map(|c| c * s).collect())
            .expect("same node count")
    }

    /// Snapshots back on the physical grid and amplitude.
    fn physical_snapshots(&self, traj: &mut Trajectory) {
        let a = Complex64::new(self.scales.amplitude, 0.0);
        for (_, f) in traj.snapshots.iter_mut() {
            *f = Field::new(self.phys_grid.clone(), f.samples().iter().map(|c| c * a).collect())
                .expect("same node count");
        }
    }

    fn spec(&self, sc: &Scenario, extra: &[Monitor]) -> Result<EvolveSpec> {
        let mut spec = EvolveSpec::new(self.trig, sc.evolve.dt, sc.evolve.t_final);
        spec.frame = sc.evolve.frame;
        spec.monitor_stride = sc.evolve.monitor_stride;
        spec.blowup_cap = sc.evolve.blowup_cap;
        let mut monitors = sc.evolve.parsed_monitors()?;
        if monitors.is_empty() {
            monitors = vec![Monitor::L2, Monitor::H1, Monitor::Linf];
        }
        for m in extra {
            if !monitors.contains(m) {
                monitors.push(*m);
            }
        }
        spec.monitors = monitors;
        spec.snapshot_stride = sc.evolve.snapshot_stride;
        spec.physical = Some(PhysicalView { params: self.phys, scales: self.scales });
        spec.validate()?;
        Ok(spec)
    }
}

fn outcome_metrics(traj: &Trajectory, metrics: &mut BTreeMap<String, f64>) {
    metrics.insert("final_time".into(), traj.final_time);
    metrics.insert("samples".into(), traj.times.len() as f64);
    match traj.outcome {
        Outcome::Blowup { t } => {
            metrics.insert("blowup_time".into(), t);
        }
        Outcome::Escaped { t } => {
            metrics.insert("escape_time".into(), t);
        }
        _ => {}
    }
}

fn check_outcome(traj: &Trajectory) -> Result<()> {
    if traj.outcome == Outcome::Error {
        return Err(CglError::BadEvolveSpec(traj.error.clone().unwrap_or_default()));
    }
    Ok(())
}

pub fn run_zero_stability(sc: &Scenario) -> Result<RunOutput> {
    let kind = ScenarioKind::ZeroStability;
    let st = setup(sc)?;
    let section = sc.zero_stability.clone().unwrap_or_default();
    let v = validate(st.phys)?;
    let p = st.phys;
    let mut metrics = BTreeMap::new();
    let bounded = st.phys_grid.kind() == GridKind::Dirichlet;
    let th = thresholds(p.a, p.k, 1, st.phys_grid.length(), Some(&st.phys_grid))?;
    metrics.insert("poincare_k_over_a".into(), th.poincare_k_over_a);
    metrics.insert("h1_threshold".into(), th.h1_threshold);

    let hypotheses = match section.norm {
        DecayNorm::Lp => {
            let q = section.p;
            if !(q >= 2.0) {
                Err(format!("p = {q} < 2"))
            } else if q > 2.0 && p.alpha.abs() / p.a > 2.0 / (q - 2.0) {
                Err(format!("|alpha|/a = {} > 2/(p-2) = {}", p.alpha.abs() / p.a, 2.0 / (q - 2.0)))
            } else if p.k < 0.0 || (q == 2.0 && bounded && p.k / p.a < th.poincare_k_over_a) {
                Ok(())
            } else {
                Err(format!(
                    "k = {} is not negative (and the p = 2 bounded-domain threshold k/a < {} does not apply)",
                    p.k, th.poincare_k_over_a
                ))
            }
        }
        DecayNorm::H1 => {
            if !bounded {
                Err("H1 decay needs a bounded (Dirichlet) domain".into())
            } else if v.lyapunov_aligned != Alignment::Aligned {
                Err(format!("alpha/a = beta/b fails ({:?})", v.lyapunov_aligned))
            } else if p.k > th.h1_threshold {
                Err(format!("k = {} > a/2 (|Omega|/omega_1)^-2 = {}", p.k, th.h1_threshold))
            } else {
                Ok(())
            }
        }
    };
    if let Err(why) = hypotheses {
        return Ok(RunOutput::verdict_only(kind, Verdict::Inconclusive, format!("hypotheses: {why}"), metrics));
    }

    let (monitor, column) = match section.norm {
        DecayNorm::Lp => (Monitor::Wp(section.p), format!("Lp_{}", section.p)),
        DecayNorm::H1 => (Monitor::H1, "H1".to_string()),
    };
    let initial = sc.initial.as_ref().expect("checked at parse time");
    let u0 = initial.build(&st.phys_grid, sc.seed, sc.base_dir.as_deref())?;
    let spec = st.spec(sc, &[monitor])?;
    let mut traj = evolve(&st.to_trig_field(&u0), &spec);
    check_outcome(&traj)?;
    st.physical_snapshots(&mut traj);
    outcome_metrics(&traj, &mut metrics);

    // Compare norms, not W_p = ||u||_p^p.
    let power = if section.norm == DecayNorm::Lp { 1.0 / section.p } else { 1.0 };
    let series: Vec<f64> = traj.monitor(&column).unwrap().iter().map(|w| w.powf(power)).collect();
    let initial_norm = series[0];
    let final_norm = *series.last().unwrap();
    let max_growth = series
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] - 1.0 } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(f64::NEG_INFINITY, f64::max);
    let monotone = max_growth <= MONOTONE_RTOL;
    let ratio = if initial_norm > 0.0 { final_norm / initial_norm } else { 0.0 };
    metrics.insert("initial_norm".into(), initial_norm);
    metrics.insert("final_norm".into(), final_norm);
    metrics.insert("decay_ratio".into(), ratio);
    metrics.insert("max_relative_growth".into(), max_growth);

    let (verdict, reason) = if let Outcome::Blowup { t } = traj.outcome {
        (Verdict::Refuted, format!("blow-up at t = {t}"))
    } else if !monotone {
        (Verdict::Refuted, format!("{column} grew by {max_growth:e} between samples"))
    } else if ratio >= DECAY_FACTOR {
        (Verdict::Refuted, format!("{column} only decayed by a factor {ratio:e} by T"))
    } else {
        (Verdict::Confirmed, format!("{column} decayed monotonically by a factor {ratio:e}"))
    };
    Ok(RunOutput {
        result: ScenarioResult { kind, verdict, reason, metrics, artifacts: Vec::new() },
        trajectory: Some(traj),
        physical: Some(st.phys),
        series: Vec::new(),
    })
}

pub fn run_instability(sc: &Scenario) -> Result<RunOutput> {
    let kind = ScenarioKind::Instability;
    let st = setup(sc)?;
    let section = sc.instability.clone().unwrap_or_default();
    let p = st.phys;
    let v = validate(p)?;
    let mut metrics = BTreeMap::new();
    let inconclusive = |why: String, metrics| {
        Ok(RunOutput::verdict_only(kind, Verdict::Inconclusive, why, metrics))
    };
    if st.phys_grid.kind() != GridKind::Dirichlet {
        return inconclusive("hypotheses: needs a bounded (Dirichlet) domain".into(), metrics);
    }
    if !(p.b < 0.0) {
        return inconclusive(format!("hypotheses: b = {} is not negative", p.b), metrics);
    }
    if v.lyapunov_aligned != Alignment::Aligned {
        return inconclusive("hypotheses: alpha/a = beta/b fails".into(), metrics);
    }
    let th = thresholds(p.a, p.k, 1, st.phys_grid.length(), Some(&st.phys_grid))?;
    let Some(window) = th.eig_window else {
        return inconclusive(
            format!("hypotheses: k/a = {} is not strictly between consecutive eigenvalues", p.k / p.a),
            metrics,
        );
    };
    metrics.insert("eig_window".into(), window as f64);
    let n = section.n.unwrap_or(window);
    if n == 0 || n > window {
        return inconclusive(format!("hypotheses: mode {n} does not satisfy lambda_n < k/a"), metrics);
    }

    let kn = n as f64 * std::f64::consts::PI / st.phys_grid.length();
    let u0 = Field::from_real_fn(st.phys_grid.clone(), |x| section.amp * (kn * x).sin());
    let v0 = v_functional(&u0, p.a, p.b, p.k, p.sigma);
    let h1_0 = u0.norm(Norm::H1)?;
    metrics.insert("V0".into(), v0);
    metrics.insert("initial_h1".into(), h1_0);
    if !(v0 < 0.0) {
        return inconclusive(format!("initialization: V(u0) = {v0} is not negative"), metrics);
    }
    let radius = section.escape_radius.unwrap_or(section.escape_factor * h1_0);
    if !(radius > h1_0) {
        return Err(CglError::Parse(format!(
            "escape radius {radius} must exceed the initial H1 norm {h1_0}"
        )));
    }
    metrics.insert("escape_radius".into(), radius);

    let mut spec = st.spec(sc, &[Monitor::H1, Monitor::V])?;
    spec.stop_h1_above = Some(radius);
    let mut traj = evolve(&st.to_trig_field(&u0), &spec);
    check_outcome(&traj)?;
    st.physical_snapshots(&mut traj);
    outcome_metrics(&traj, &mut metrics);
    let (verdict, reason) = match traj.outcome {
        Outcome::Escaped { t } => (Verdict::Confirmed, format!("H1 norm left the ball of radius {radius} at t = {t}")),
        Outcome::Blowup { t } => (Verdict::Confirmed, format!("blow-up at t = {t}")),
        _ => (Verdict::Inconclusive, format!("no escape from radius {radius} before T")),
    };
    Ok(RunOutput {
        result: ScenarioResult { kind, verdict, reason, metrics, artifacts: Vec::new() },
        trajectory: Some(traj),
        physical: Some(st.phys),
        series: Vec::new(),
    })
}

/// Seeded smooth bump, orthogonal (real pairing) to `i phi` and `phi'`,
/// scaled to H1 norm `delta ||phi||_{H1}`.
pub fn orbital_perturbation(bs: &BoundState, delta: f64, width: f64, seed: u64) -> Result<Field> {
    let phi = &bs.phi;
    let grid = phi.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.gen_range(-2.0..2.0);
    let rho: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let c = grid.center() + offset;
    let rot = Complex64::from_polar(1.0, rho);
    let mut g = Field::from_fn(grid, |x| {
        let s = (x - c) / width;
        rot * Complex64::new(1.0, 0.5 * s) * (-s * s).exp()
    });
    let mut basis: Vec<Field> = Vec::new();
    for dir in [phi.scale(Complex64::i()), phi.derivative()] {
        let mut e = dir;
        for b in &basis {
            let c = e.inner_real(b)?;
            e = e.axpy(Complex64::new(-c, 0.0), b)?;
        }
        let norm = e.l2_norm_sq().sqrt();
        if norm > 0.0 {
            basis.push(e.scale(Complex64::new(1.0 / norm, 0.0)));
        }
    }
    for b in &basis {
        let c = g.inner_real(b)?;
        g = g.axpy(Complex64::new(-c, 0.0), b)?;
    }
    let target = delta * phi.norm(Norm::H1)?;
    let gn = g.norm(Norm::H1)?;
    if gn == 0.0 {
        return Err(CglError::ZeroProfile);
    }
    Ok(g.scale(Complex64::new(target / gn, 0.0)))
}

pub fn run_bs_orbital(sc: &Scenario) -> Result<RunOutput> {
    let kind = ScenarioKind::BsOrbital;
    let section = sc
        .bs_orbital
        .clone()
        .ok_or_else(|| CglError::Parse("missing [bs_orbital]".into()))?;
    let grid = sc.grid.build()?;
    let bs = construct_bound_state(section.theta, section.omega, section.k, section.sigma, grid)?;
    let mut metrics = BTreeMap::new();
    metrics.insert("d".into(), bs.d);
    metrics.insert("gamma".into(), bs.gamma);
    metrics.insert("epsilon".into(), bs.epsilon);
    metrics.insert("eta".into(), bs.eta);
    metrics.insert("sup_norm".into(), bs.diagnostics.sup_norm);
    let (lhs, cond) = stability_condition(bs.diagnostics.sup_norm, bs.sigma, bs.k);
    metrics.insert("condition_lhs".into(), lhs);
    metrics.insert("condition_1_9".into(), if cond { 1.0 } else { 0.0 });

    let u0 = if section.delta == 0.0 {
        bs.phi.clone()
    } else {
        let g = orbital_perturbation(&bs, section.delta, section.bump_width, sc.seed)?;
        bs.phi.add(&g)?
    };
    let trig = bs.trig_params();
    let mut spec = EvolveSpec::new(trig, sc.evolve.dt, sc.evolve.t_final);
    spec.frame = crate::evolve::Frame::Rotating;
    spec.monitor_stride = sc.evolve.monitor_stride;
    spec.blowup_cap = sc.evolve.blowup_cap;
    let monitors = sc.evolve.parsed_monitors()?;
    if !monitors.is_empty() {
        spec.monitors = monitors;
    }
    spec.snapshot_stride = Some(section.distance_stride.max(1));
    let mut traj = evolve(&u0, &spec);
    check_outcome(&traj)?;
    outcome_metrics(&traj, &mut metrics);

    let (times, dist): (Vec<f64>, Vec<f64>) =
        traj.snapshots.iter().map(|(t, u)| (*t, orbital_distance(u, &bs.phi))).unzip();
    traj.snapshots.clear();
    let d0 = dist[0];
    let d_final = *dist.last().unwrap();
    let d_max = dist.iter().cloned().fold(0.0, f64::max);
    metrics.insert("initial_distance".into(), d0);
    metrics.insert("final_distance".into(), d_final);
    metrics.insert("max_distance".into(), d_max);

    let blowup = matches!(traj.outcome, Outcome::Blowup { .. });
    let (verdict, reason) = if blowup {
        (Verdict::Refuted, "perturbed bound-state blew up".to_string())
    } else if section.delta == 0.0 {
        if d_max < EQUILIBRIUM_TOL {
            (Verdict::Confirmed, format!("unperturbed orbit kept distance {d_max:e} < {EQUILIBRIUM_TOL:e}"))
        } else {
            (Verdict::Refuted, format!("unperturbed orbit drifted to distance {d_max:e}"))
        }
    } else if d_final <= d0 {
        (Verdict::Confirmed, format!("orbital distance {d0:e} -> {d_final:e}"))
    } else if d_final >= REFUTE_FACTOR * d0 {
        (Verdict::Refuted, format!("orbital distance grew {d0:e} -> {d_final:e}"))
    } else {
        (Verdict::Inconclusive, format!("orbital distance {d0:e} -> {d_final:e}"))
    };
    Ok(RunOutput {
        result: ScenarioResult { kind, verdict, reason, metrics, artifacts: Vec::new() },
        trajectory: Some(traj),
        physical: Some(trig.as_cgl()),
        series: vec![("orbital_distance".into(), times, dist)],
    })
}

pub fn run_custom(sc: &Scenario) -> Result<RunOutput> {
    let initial = sc.initial.as_ref().ok_or_else(|| CglError::Parse("missing [initial]".into()))?;
    let u0 = initial.build(&sc.grid.build()?, sc.seed, sc.base_dir.as_deref())?;
    run_custom_from(sc, &u0)
}

/// Custom run from explicit initial data `u0`, sampled on the scenario grid
/// in physical variables; `sc.initial` is ignored.
pub fn run_custom_from(sc: &Scenario, u0: &Field) -> Result<RunOutput> {
    let st = setup(sc)?;
    if u0.grid().len() != st.phys_grid.len() {
        return Err(CglError::SizeMismatch { expected: st.phys_grid.len(), found: u0.grid().len() });
    }
    let spec = st.spec(sc, &[])?;
    let mut traj = evolve(&st.to_trig_field(u0), &spec);
    check_outcome(&traj)?;
    st.physical_snapshots(&mut traj);
    let mut metrics = BTreeMap::new();
    outcome_metrics(&traj, &mut metrics);
    Ok(RunOutput {
        result: ScenarioResult {
            kind: ScenarioKind::Custom,
            verdict: Verdict::Inconclusive,
            reason: "custom scenario: no claim tested".into(),
            metrics,
            artifacts: Vec::new(),
        },
        trajectory: Some(traj),
        physical: Some(st.phys),
        series: Vec::new(),
    })
}

pub fn run(sc: &Scenario) -> Result<RunOutput> {
    match sc.kind {
        ScenarioKind::ZeroStability => run_zero_stability(sc),
        ScenarioKind::Instability => run_instability(sc),
        ScenarioKind::BsOrbital => run_bs_orbital(sc),
        ScenarioKind::Custom => run_custom(sc),
    }
}

/// Monitors CSV, with a `mass_residual` column when the mass monitors were recorded.
pub fn monitors_csv(traj: &Trajectory, physical: Option<&CglParams>) -> String {
    let mut cols: Vec<(String, Vec<f64>)> = traj.monitors.clone();
    if let Some(p) = physical {
        if let Ok(res) = energy_identity_residuals(traj, p) {
            let mut col = vec![f64::NAN; traj.times.len()];
            let mut j = 0;
            for (i, t) in traj.times.iter().enumerate() {
                if j < res.times.len() && res.times[j] == *t {
                    col[i] = res.residuals[j];
                    j += 1;
                }
            }
            cols.push(("mass_residual".into(), col));
        }
    }
    let mut out = String::from("t");
    for (name, _) in &cols {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for (_, s) in &cols {
            out.push_str(&format!(",{}", s[i]));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a Scenario,
    result: &'a ScenarioResult,
    outcome: Option<Outcome>,
    git_describe: &'a str,
}

/// Writes CSV/JSON/SVG artifacts into `dir` and records their paths.
pub fn write_artifacts(sc: &Scenario, out: &mut RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    if let Some(traj) = &out.trajectory {
        let path = dir.join("monitors.csv");
        fs::write(&path, monitors_csv(traj, out.physical.as_ref()))?;
        written.push(path);
        if sc.output.svg && traj.times.len() > 1 {
            let series: Vec<(&str, &[f64])> = traj
                .monitors
                .iter()
                .filter(|(n, _)| !matches!(n.as_str(), "Vdot" | "V" | "mass" | "grad2" | "pnl"))
                .map(|(n, s)| (n.as_str(), s.as_slice()))
                .collect();
            let path = dir.join("monitors.svg");
            fs::write(&path, svg::line_plot(sc.kind.name(), "t", &traj.times, &series, true))?;
            written.push(path);
        }
    }
    if let Some(traj) = &out.trajectory {
        if !traj.snapshots.is_empty() {
            let sub = dir.join("snapshots");
            fs::create_dir_all(&sub)?;
            let mut index = String::from("index,t,file\n");
            for (i, (t, f)) in traj.snapshots.iter().enumerate() {
                let name = format!("u_{i:05}.csv");
                f.save_csv(&sub.join(&name))?;
                index.push_str(&format!("{i},{t},{name}\n"));
            }
            let path = sub.join("index.csv");
            fs::write(&path, index)?;
            written.push(path);
        }
    }
    for (name, t, v) in &out.series {
        let mut csv = format!("t,{name}\n");
        for (a, b) in t.iter().zip(v) {
            csv.push_str(&format!("{a},{b}\n"));
        }
        let path = dir.join(format!("{name}.csv"));
        fs::write(&path, csv)?;
        written.push(path);
        if sc.output.svg && t.len() > 1 {
            let path = dir.join(format!("{name}.svg"));
            fs::write(&path, svg::line_plot(name, "t", t, &[(name.as_str(), v.as_slice())], true))?;
            written.push(path);
        }
    }
    let summary_path = dir.join("summary.json");
    written.push(summary_path.clone());
    out.result.artifacts = written.iter().map(|p| p.display().to_string()).collect();
    let summary = Summary {
        scenario: sc,
        result: &out.result,
        outcome: out.trajectory.as_ref().map(|t| t.outcome),
        git_describe: GIT_DESCRIBE,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CglError::Io(e.to_string()))?;
    fs::write(&summary_path, json + "\n")?;
    Ok(())
}

/// Output directory: `[output] dir`, else `<scenario stem>-out` next to the file.
pub fn output_dir(sc: &Scenario, scenario_path: &Path) -> PathBuf {
    if let Some(d) = &sc.output.dir {
        return d.clone();
    }
    let stem = scenario_path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    scenario_path.with_file_name(format!("{stem}-out"))
}

/// Loads, runs and writes one scenario file. `out_dir` overrides the
/// directory named in the file.
pub fn run_scenario(path: &Path, out_dir: Option<&Path>) -> Result<ScenarioResult> {
    let sc = Scenario::load(path)?;
    let mut out = run(&sc)?;
    let dir = out_dir.map_or_else(|| output_dir(&sc, path), Path::to_path_buf);
    write_artifacts(&sc, &mut out, &dir)?;
    Ok(out.result)
}
