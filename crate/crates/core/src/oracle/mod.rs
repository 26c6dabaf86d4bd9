//! Exact classical bounds on small scenarios.

pub mod bounds;
pub mod lp;
pub mod vertices;

pub use bounds::{
    bilocal_bound, hybrid_vertices, kproducible_bound, local_bound, ns_bound, partition_max,
    verify_condition_i, Bound, ConditionReport, HybridVertex,
};
pub use vertices::{enumerate_ns_vertices, ns_vertices_2x2xd, NsVertex};
