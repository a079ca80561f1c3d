//! Induced metric of a parametrized sector, removal of the `dr dη` cross
//! term and the model operator data extracted from it.

mod flow;
mod induced;
mod model;

pub use flow::{remove_cross_term, FlowLine, FlowOptions, NormalizedMetric};
pub use induced::{induced_metric, parametrization_metric, MetricData, MetricOptions, MetricPoint};
pub use model::{link_length, model_operator, LinkGeometry, ModelOperator, ModelOptions, RadialProfile};
