//! Truncated Puiseux series in a radial variable `r` with coefficients that
//! are polynomials in transversal variables `η`, together with certified
//! bounds on the omitted tails.

mod coeff;
mod compose;
mod etapoly;
mod series;
mod uniseries;

pub use compose::{compose_analytic, reciprocal, PowerSeriesGerm};
pub use etapoly::EtaPoly;
pub use series::{CubeDomain, PuiseuxSeries, DEFAULT_ETA_CAP, DENOMINATOR_CAP};
pub use coeff::SeriesCoeff;
pub use uniseries::UniSeries;
