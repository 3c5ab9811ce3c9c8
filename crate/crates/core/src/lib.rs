//! Discrete uniformization of decorated hyperbolic surfaces via Penner
//! coordinates, ideal Delaunay flips and convex variational principles.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`). The aliases below fix the common choices.

pub mod delaunay;
pub mod energy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod optimize;
pub mod penner;
pub mod realize;
pub mod samples;
pub mod scalar;

pub use delaunay::{
    check_delaunay, delaunay_margin, horocycle_distance, make_delaunay, DelaunayMode, DelaunayResult,
};
pub use energy::{e_bar, e_theta, h_theta, lobachevsky, triangle_f, EnergyEvaluation};
pub use error::{Error, Result};
pub use mesh::{Gluing, Side, Subcomplex, SubcomplexKind, Triangulation};
pub use optimize::{kkt_check, minimize_e_bar, minimize_e_theta, KktProblem, SolveOptions, SolveReport, SolveStatus};
pub use penner::{ConeAngleTarget, DecoratedMetric, PartialDecoration, ShearCoordinates};
pub use realize::{
    classify_realizable, layout_disk, polyhedron_from_layout, prescribe_cone_angles, two_sided_polygon,
    uniformize_sphere, uniformize_torus, Realization, RealizationKind,
};
pub use scalar::{ExtReal, Real};

pub type Metric = DecoratedMetric<f64>;
pub type Metric32 = DecoratedMetric<f32>;
pub type Decoration = PartialDecoration<f64>;
pub type Decoration32 = PartialDecoration<f32>;
pub type ConeAngles = ConeAngleTarget<f64>;
pub type ConeAngles32 = ConeAngleTarget<f32>;
pub type Delaunay = DelaunayResult<f64>;
pub type Delaunay32 = DelaunayResult<f32>;
pub type Report = SolveReport<f64>;
pub type Report32 = SolveReport<f32>;
pub type Realized = Realization<f64>;
pub type Realized32 = Realization<f32>;
