//! Parametrization of a sector of the germ over one Newton face: a chart of
//! the quasihomogeneous link, then a Newton iteration in the Puiseux ring
//! producing `x_k = r^{ν_k} χ_k(r, η)`.

mod link;
mod residual;
mod roots;
mod scheme;

pub use link::{
    chebyshev_nodes, check_coordinate_planes, link_solve, newton_step, normal_field, tensor_grid, ChartNode,
    ChartOptions, LinkChart,
};
pub use residual::{parametrization_residual, ResidualGrid, ResidualPoint, ResidualReport};
pub use roots::{horner, rational_approx, real_simple_roots};
pub use scheme::{newton_solve_series, solve_chart, ContractionReport, Parametrization, SchemeOptions};
