//! Inputs shared by the benchmarks.

use std::sync::Arc;

use cgl_core::{construct_bound_state, BoundState, Grid1D};

/// The θ = 0.3, ω = 1, k = 0, σ = 2 bound state on a periodic box of length 60.
pub fn bound_state(n: usize) -> BoundState {
    construct_bound_state(0.3, 1.0, 0.0, 2.0, periodic(n)).expect("valid bound state")
}

pub fn periodic(n: usize) -> Arc<Grid1D> {
    Grid1D::periodic(60.0, n).expect("valid grid")
}
