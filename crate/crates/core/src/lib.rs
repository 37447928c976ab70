//! Numerical laboratory for the complex Ginzburg-Landau equation
//! `u_t = (a + i alpha) u'' - (b + i beta)|u|^sigma u + k u`:
//! explicit bound-states, split-step evolution, Lyapunov diagnostics,
//! linearized spectra and small-amplitude branch continuation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundstate;
pub mod continuation;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod grid;
pub mod lyapunov;
pub mod params;
pub mod spectra;

pub use boundstate::{construct_bound_state, BoundState};
pub use error::{CglError, Result};
pub use evolve::{evolve, EvolveSpec, Frame, Monitor, Outcome, Trajectory};
pub use grid::{Field, Grid1D, GridKind, GridSpec, Norm};
pub use num_complex::Complex64;
pub use params::{CglParams, ParamSet, ScaleFactors, TrigParams};
