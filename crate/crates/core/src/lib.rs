// Tensor code indexes several arrays with the same loop counters.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cky;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod harmonic;
pub mod jets;
pub mod pd;
pub mod report;
pub mod rods;
pub mod tod;

pub use error::{Error, Result};
pub use harmonic::{HGauge, Mode, Nut, RodData};
pub use jets::{Jet2, Var};
pub use tod::{MetricJet, TodFields, TwoFormJet};
