//! Edge-based spatial priors for areal count data.
//!
//! The crate covers the whole pipeline: building the line graph of a region
//! adjacency graph ([`graph`]), simulating Gaussian and skew-normal
//! edge-based priors ([`prior`]), fitting the Poisson log-linear hierarchy
//! with a Hamiltonian sampler ([`model`], [`sampler`]), and comparing fits
//! with DIC, WAIC, LOOIC and RMSE ([`criteria`]).

pub mod cli;
pub mod criteria;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod io;
pub mod model;
pub mod prior;
pub mod render;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{
    build_incidence, build_line_graph, load_edge_list, precision_quadratic, spectral_decompose,
    ArealGraph, IncidenceMatrix, LineGraphStructure, SpectralCache,
};
pub use model::{Dataset, ModelSpec, PoissonModel, SkewMode, Variant};
pub use prior::{
    build_lowrank_basis, prior_moments, simulate_field, sn_log_density, CarPrior, FieldDraw,
    Prior, RenegePrior, RenegeSkPrior, SkewnessSpec,
};
pub use sampler::{run_chains, Diagnostics, PosteriorDraws, SamplerConfig};
