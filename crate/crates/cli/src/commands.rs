use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cgl_core::boundstate::residual;
use cgl_core::continuation::{branch_derivative_check, continue_branch, mu_of_k};
use cgl_core::experiments::{
    output_dir, run_custom_from, run_scenario, svg, write_artifacts, EvolveSection, InitialSpec, OutputSection,
    Scenario, ScenarioKind, ScenarioResult, Verdict, GIT_DESCRIBE,
};
use cgl_core::spectra::stability_report;
use cgl_core::{
    construct_bound_state, BoundState, CglError, Complex64, Field, Frame, Grid1D, GridKind, ParamSet, Result,
};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{check_gamma, BoundInputs, GridArgs, ParamArgs, Spelling};

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CglError::Io(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Exit code for a batch: any refuted -> 2, else any inconclusive -> 3.
fn batch_code(verdicts: &[Verdict]) -> u8 {
    if verdicts.contains(&Verdict::Refuted) {
        2
    } else if verdicts.contains(&Verdict::Inconclusive) {
        3
    } else {
        0
    }
}

pub fn run(scenarios: &[PathBuf], out: Option<&Path>) -> Result<u8> {
    let dir_for = |path: &Path| -> Option<PathBuf> {
        let out = out?;
        if scenarios.len() == 1 {
            return Some(out.to_path_buf());
        }
        let stem = path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
        Some(out.join(stem))
    };
    let results: Vec<(PathBuf, Result<ScenarioResult>)> = scenarios
        .par_iter()
        .map(|p| (p.clone(), run_scenario(p, dir_for(p).as_deref())))
        .collect();
    let mut verdicts = Vec::new();
    let mut failed = false;
    for (path, res) in results {
        match res {
            Ok(r) => {
                let dir = match dir_for(&path) {
                    Some(d) => d,
                    None => Scenario::load(&path).map(|sc| output_dir(&sc, &path)).unwrap_or_default(),
                };
                println!("{}: {:?}: {} [{}]", path.display(), r.verdict, r.reason, dir.display());
                verdicts.push(r.verdict);
            }
            Err(e) => {
                eprintln!("{}: error: {e}", path.display());
                failed = true;
            }
        }
    }
    Ok(if failed { 1 } else { batch_code(&verdicts) })
}

/// Bound state on the trig grid matching the physical grid, and the
/// physical-variable profile `amplitude * phi` on the physical nodes.
fn physical_bound_state(params: &ParamArgs, grid: &GridArgs, n: usize) -> Result<(BoundInputs, BoundState, Field)> {
    let bi = params.bound_inputs()?;
    let phys = grid.build(GridKind::Periodic, 60.0, n)?;
    let bs = construct_bound_state(bi.theta, bi.omega, bi.k, bi.sigma, phys.rescaled(1.0 / bi.scales.spatial)?)?;
    check_gamma(bi.gamma, bs.gamma)?;
    let amp = Complex64::new(bi.scales.amplitude, 0.0);
    let u = Field::new(phys, bs.phi.samples().iter().map(|c| c * amp).collect())?;
    Ok((bi, bs, u))
}

fn bound_state_json(bi: &BoundInputs, bs: &BoundState) -> serde_json::Value {
    json!({
        "theta": bs.theta,
        "gamma": bs.gamma,
        "omega": bs.omega,
        "k": bs.k,
        "sigma": bs.sigma,
        "d": bs.d,
        "epsilon": bs.epsilon,
        "eta": bs.eta,
        "scales": bi.scales,
        "grid": bs.grid().spec(),
    })
}

pub fn boundstate(params: &ParamArgs, grid: &GridArgs, out: &Path, svg_out: bool) -> Result<u8> {
    let (bi, bs, u) = physical_bound_state(params, grid, 2048)?;
    fs::create_dir_all(out)?;
    let amp = bi.scales.amplitude;
    let x = u.grid().nodes().to_vec();
    let phase: Vec<f64> = bs.psi.iter().map(|p| bs.d * p.ln()).collect();
    let mut csv = String::from("x,abs,re,im,psi,phase\n");
    for (j, c) in u.samples().iter().enumerate() {
        csv.push_str(&format!("{},{},{},{},{},{}\n", x[j], c.norm(), c.re, c.im, amp * bs.psi[j], phase[j]));
    }
    fs::write(out.join("profile.csv"), csv)?;
    let mut summary = bound_state_json(&bi, &bs);
    summary["residual"] = json!(residual(&bs));
    summary["edge_value"] = json!(bs.diagnostics.edge_value);
    summary["sup_norm"] = json!(amp * bs.diagnostics.sup_norm);
    summary["diagnostics"] = json!(bs.diagnostics);
    summary["git_describe"] = json!(GIT_DESCRIBE);
    write_json(&out.join("summary.json"), &summary)?;
    if svg_out {
        let abs: Vec<f64> = u.samples().iter().map(|c| c.norm()).collect();
        let plot = svg::line_plot("bound state", "x", &x, &[("|phi|", &abs), ("phase", &phase)], false);
        fs::write(out.join("profile.svg"), plot)?;
    }
    println!(
        "d = {}, gamma = {}, epsilon = {}, eta = {}, residual = {:e} [{}]",
        bs.d,
        bs.gamma,
        bs.epsilon,
        bs.eta,
        residual(&bs),
        out.display()
    );
    Ok(0)
}

pub fn spectrum(params: &ParamArgs, grid: &GridArgs, kernel_tol: f64, out: &Path, svg_out: bool) -> Result<u8> {
    let (bi, bs, _) = physical_bound_state(params, grid, 512)?;
    let rep = stability_report(&bs, kernel_tol)?;
    fs::create_dir_all(out)?;
    let mut f = fs::File::create(out.join("eigenvalues.csv"))?;
    rep.write_eigenvalues_csv(&mut f)?;
    let mut report = serde_json::to_value(&rep).map_err(|e| CglError::Io(e.to_string()))?;
    if let Some(obj) = report.as_object_mut() {
        obj.remove("eigenvalues");
        obj.insert("bound_state".into(), bound_state_json(&bi, &bs));
        obj.insert("git_describe".into(), json!(GIT_DESCRIBE));
    }
    write_json(&out.join("report.json"), &report)?;
    if svg_out {
        let pts: Vec<(f64, f64)> = rep.eigenvalues.iter().map(|l| (l.re, l.im)).collect();
        fs::write(out.join("spectrum.svg"), svg::scatter_plot("spectrum of L", &pts))?;
    }
    println!(
        "kernel_dim = {}, abscissa = {}, abscissa_excl_kernel = {:?}, condition_1_9 = {} [{}]",
        rep.kernel_dim,
        rep.abscissa,
        rep.abscissa_excl_kernel,
        rep.condition_1_9,
        out.display()
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
pub fn continuation(
    params: &ParamArgs,
    grid: &GridArgs,
    n: usize,
    mu_max: f64,
    steps: usize,
    k_target: Option<f64>,
    out: &Path,
    svg_out: bool,
) -> Result<u8> {
    let (theta, gamma, sigma) = params.angles()?;
    let g = grid.build(GridKind::Dirichlet, std::f64::consts::PI, 64)?;
    if g.kind() != GridKind::Dirichlet {
        return Err(CglError::BadGridSpec("continuation runs on a Dirichlet grid".into()));
    }
    let branch = continue_branch(&g, n, theta, gamma, sigma, mu_max, steps)?;
    fs::create_dir_all(out)?;
    let mut f = fs::File::create(out.join("branch.csv"))?;
    branch.write_csv(&mut f)?;
    let (dk, dw) = branch.analytic_slopes();
    let rows = branch.rows();
    let mut summary = json!({
        "theta": theta,
        "gamma": gamma,
        "sigma": sigma,
        "n": n,
        "lambda": branch.lambda,
        "grid": g.spec(),
        "points": rows.len(),
        "max_residual": rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        "max_physical_residual": rows.iter().map(|r| r.physical_residual).fold(0.0, f64::max),
        "analytic_dk_dmu": dk,
        "analytic_domega_dmu": dw,
        "git_describe": GIT_DESCRIBE,
    });
    match branch_derivative_check(&branch) {
        Ok(c) => summary["derivative_check"] = json!(c),
        Err(e) => summary["derivative_check"] = json!(e.to_string()),
    }
    if let Some(k) = k_target {
        summary["k_target"] = json!(k);
        summary["mu_of_k"] = match mu_of_k(&branch, k) {
            Ok(mu) => json!(mu),
            Err(e) => json!(e.to_string()),
        };
    }
    write_json(&out.join("summary.json"), &summary)?;
    if svg_out && rows.len() > 1 {
        let mu: Vec<f64> = rows.iter().map(|r| r.mu).collect();
        let k: Vec<f64> = rows.iter().map(|r| r.k).collect();
        let w: Vec<f64> = rows.iter().map(|r| r.omega).collect();
        let plot = svg::line_plot("branch", "mu", &mu, &[("k", &k), ("omega", &w)], false);
        fs::write(out.join("branch.svg"), plot)?;
    }
    println!("lambda = {}, {} points up to mu = {} [{}]", branch.lambda, rows.len(), mu_max, out.display());
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Lab,
    Rotating,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub dt: f64,
    /// Final time.
    #[arg(long = "t-final", alias = "T")]
    pub t_final: f64,
    #[arg(long, value_enum, default_value = "lab")]
    pub frame: FrameArg,
    #[arg(long, default_value_t = 1)]
    pub monitor_stride: usize,
    #[arg(long, default_value_t = cgl_core::evolve::DEFAULT_BLOWUP_CAP)]
    pub blowup_cap: f64,
    /// Comma-separated monitors: L2, H1, Linf, Lp<p>, V, Vdot, mass.
    #[arg(long, value_delimiter = ',', default_value = "L2,H1,Linf")]
    pub monitors: Vec<String>,
    /// boundstate | eigenmode:n[,amp] | gaussian:amp,width[,center] | random:amp[,modes] | file:path
    #[arg(long)]
    pub initial: String,
    /// Save the state every this many steps.
    #[arg(long)]
    pub snapshot_stride: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn nums(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CglError::Parse(format!("bad number '{t}' in --initial {what}"))))
        .collect()
}

/// `None` stands for the bound state.
pub fn parse_initial(s: &str) -> Result<Option<InitialSpec>> {
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let bad = || CglError::Parse(format!("bad --initial '{s}'"));
    Ok(Some(match head {
        "boundstate" if rest.is_empty() => return Ok(None),
        "eigenmode" => {
            let (n, amp) = rest.split_once(',').unwrap_or((rest, "1"));
            InitialSpec::Eigenmode {
                n: n.trim().parse().map_err(|_| bad())?,
                amp: amp.trim().parse().map_err(|_| bad())?,
            }
        }
        "gaussian" => match nums(rest, "gaussian")?.as_slice() {
            [amp, width] => InitialSpec::Gaussian { amp: *amp, width: *width, center: None },
            [amp, width, c] => InitialSpec::Gaussian { amp: *amp, width: *width, center: Some(*c) },
            _ => return Err(bad()),
        },
        "random" => match nums(rest, "random")?.as_slice() {
            [amp] => InitialSpec::RandomModes { amp: *amp, modes: 4 },
            [amp, m] if *m >= 1.0 && m.fract() == 0.0 => InitialSpec::RandomModes { amp: *amp, modes: *m as usize },
            _ => return Err(bad()),
        },
        "file" if !rest.is_empty() => InitialSpec::File { path: PathBuf::from(rest) },
        _ => return Err(bad()),
    }))
}

pub fn evolve(params: &ParamArgs, grid: &GridArgs, ev: &EvolveArgs, out: &Path, svg_out: bool) -> Result<u8> {
    let initial = parse_initial(&ev.initial)?;
    let (param_set, grid_spec, u0): (ParamSet, _, Option<Field>) = match &initial {
        None => {
            let (bi, bs, u) = physical_bound_state(params, grid, 1024)?;
            let ps = match params.spelling()? {
                Spelling::Trig => ParamSet::Trig(bs.trig_params()),
                Spelling::Physical => {
                    if bi.gamma.is_none() {
                        return Err(CglError::Parse(format!(
                            "evolving the bound state needs --b/--beta with phase gamma = {}",
                            bs.gamma
                        )));
                    }
                    params.param_set()?
                }
            };
            let spec = u.grid().spec();
            (ps, spec, Some(u))
        }
        Some(_) => (params.param_set()?, grid.spec(GridKind::Dirichlet, std::f64::consts::PI, 64), None),
    };
    let sc = Scenario {
        kind: ScenarioKind::Custom,
        seed: ev.seed,
        params: Some(param_set),
        grid: grid_spec,
        initial: initial.clone(),
        evolve: EvolveSection {
            dt: ev.dt,
            t_final: ev.t_final,
            frame: match ev.frame {
                FrameArg::Lab => Frame::Lab,
                FrameArg::Rotating => Frame::Rotating,
            },
            monitor_stride: ev.monitor_stride,
            blowup_cap: ev.blowup_cap,
            monitors: ev.monitors.clone(),
            snapshot_stride: ev.snapshot_stride,
        },
        zero_stability: None,
        instability: None,
        bs_orbital: None,
        output: OutputSection { dir: Some(out.to_path_buf()), svg: svg_out },
        base_dir: std::env::current_dir().ok(),
    };
    let u0 = match (u0, &initial) {
        (Some(u), _) => u,
        (None, Some(spec)) => {
            let g: Arc<Grid1D> = sc.grid.build()?;
            spec.build(&g, sc.seed, sc.base_dir.as_deref())?
        }
        (None, None) => unreachable!("bound state handled above"),
    };
    let mut run = run_custom_from(&sc, &u0)?;
    write_artifacts(&sc, &mut run, out)?;
    let traj = run.trajectory.as_ref().expect("custom runs record a trajectory");
    println!("{:?} at t = {} [{}]", traj.outcome, traj.final_time, out.display());
    Ok(0)
}
