//! Closed-form and Monte Carlo second-order statistics of κ-μ shadowed
//! fading channels.
//!
//! * [`specfun`]: log-gamma, Kummer ₁F₁, Humbert Φ₂ and adaptive quadrature.
//! * [`model`]: envelope PDF and CDF, level crossing rate, average fade duration.
//! * [`simulator`]: sum-of-sinusoids envelope synthesis and crossing counters.
//! * [`estimator`]: two-stage least-squares fitting of PDF and LCR.
//! * [`cli`]: the `kms` command-line front end.

pub mod cli;
mod error;
pub mod estimator;
pub mod format;
pub mod model;
pub mod simulator;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{ChannelParams, DopplerParams, SpecialCase, StatCurve, Statistic};
pub use simulator::{EmpiricalSecondOrder, EnvelopeTrace, SimConfig};

