//! Scalar special functions used by the closed-form channel statistics.

mod gamma;
mod hypergeometric;
mod quadrature;
mod series;

pub use gamma::ln_gamma;
pub use hypergeometric::{
    humbert_phi2, kummer_1f1, ln_humbert_phi2, ln_kummer_1f1, SeriesControl, CANCELLATION_LIMIT,
    KUMMER_REFLECT_BELOW,
};
pub use quadrature::{integrate_adaptive, integrate_adaptive_fallible, MAX_SUBINTERVALS};

pub(crate) use gamma::ln_gamma_unchecked;
