//! Scenario files, runners with verdicts, and their artifacts.

mod orbital;
mod run;
mod scenario;
pub mod svg;

pub use orbital::orbital_distance;
pub use run::{
    monitors_csv, orbital_perturbation, output_dir, run, run_bs_orbital, run_custom, run_custom_from, run_instability,
    run_scenario, run_zero_stability, write_artifacts, RunOutput, ScenarioResult, Verdict,
    DECAY_FACTOR, EQUILIBRIUM_TOL, GIT_DESCRIBE, MONOTONE_RTOL, REFUTE_FACTOR,
};
pub use scenario::{
    BsOrbitalSection, DecayNorm, EvolveSection, InitialSpec, InstabilitySection, OutputSection,
    Scenario, ScenarioKind, ZeroStabilitySection,
};
