//! Warped-product metric families `E(t) dt^2 + rho(t) h` over an interval.

pub mod alpha;
pub mod curvature;
pub mod family;
pub mod model;
pub mod profile;
pub mod quadrature;

pub use alpha::{alpha_profile, AlphaBounds, AlphaProfile};
pub use curvature::gauss_curvature;
pub use family::{make_insert_family, make_pinch_family, pinch_limit, pinch_model, ManifoldPairFamily, OuterSpec, PinchOptions};
pub use model::{arclength_reparam, ArclengthSamples, EndCondition, ModelChart, Region, SurfaceModel, INSERT_LABEL};
pub use profile::{ArclengthMap, FiberMetric, NeckRho, Segment, WarpProfile};
