mod discretize;
mod estimates;
mod fit;
mod heat;
mod index;
mod predict;
mod sal;
mod tridiag;

pub use discretize::{assemble_mode, circle_modes, discretize_model, graded_grid, DiscretizeOptions, DiscretizedOperator, ModeBlock, RadialForm};
pub use estimates::{basic_estimate, resolvent_decay, BasicEstimate, EstimateOptions, ResolventDecay};
pub use fit::{fit_power_log, fit_series, half_window_check, ExpansionFit, FitOptions, FitTerm, HalfWindowCheck, LatticePoint, TermChange};
pub use heat::{geometric_times, heat_trace, model_heat_trace, modes_for_window, Cutoff, HeatOptions, HeatTraceSamples};
pub use index::{bound_exponent, neumann_term_exponent, resolvent_index, NeumannExponent, ResolventFactor};
pub use predict::{distance_to_lattice, lattice, predicted_exponents, s1, s2, s2_point, FaceExponents, PredictedExponent, PredictionOptions, RULE_VERSION};
pub use sal::{euler_shift, expansion_sup, multiplicity_of, sal_convolution_exponents, sal_projector_apply, MultiplicityFunction, PowerLogTerm};
pub use tridiag::Tridiagonal;
