//! Lifshits-tail exponents and cluster-size decay.

mod decay;
mod fit;
mod series;

pub use decay::{
    cluster_size_decay, cluster_size_decay_with, default_radius, DecayFit, MIN_EVENTS,
};
pub use fit::{
    expected_slope, fit_tail, Edge, TailData, TailFit, TailWindow, ANALYTIC_FLOOR, MIN_POINTS,
};
pub use series::{default_n_max, ids_1d_series, ids_1d_series_left, kappa_1d, SERIES_TAIL};
