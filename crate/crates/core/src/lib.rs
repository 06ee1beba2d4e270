//! Geometric correspondence without appearance features.
//!
//! Candidate matches between two point sets are scored in tuples: each tuple
//! yields two overlapping minimal sets of a pose problem, each minimal set a
//! univariate polynomial in a shared unknown, and the tuple's affinity is a
//! decreasing function of how far the two polynomials are from sharing a root
//! (the Sylvester resultant magnitude). A tensor power iteration then turns the
//! sparse affinity tensor into an assignment.
//!
//! Supported problems are P3P (absolute pose), 3P1 (relative pose with a known
//! vertical axis) and up2p (absolute pose of an upright camera).

pub mod cli;
pub mod geometry;
pub mod matching;
pub mod polynomials;
pub mod sim;
pub mod tensor;

pub use geometry::{Camera, GeometryError, Intrinsics, MinimalProblemKind, Point2, Point3};
pub use matching::{
    accuracy, discretize, power_iteration_dense, power_iteration_sparse, AssignmentMatrix,
    IterationOptions, MatchError, SolverVariant,
};
pub use polynomials::{
    resultant_magnitude_qr, resultant_magnitude_svd, sylvester, Polynomial, PolynomialError,
    ResultantBackend, SylvesterMatrix,
};
pub use sim::{run_experiment, AccuracyCurve, ExperimentConfig, ProblemInstance, SimError};
pub use tensor::{
    build_tensor, edge_affinity, sample_hyperedges, Correspondence, EdgeTuple, HyperEdge,
    SparseAffinityTensor, TensorError,
};
