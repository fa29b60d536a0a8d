//! Hamiltonian cycles in random geometric graphs on the unit square under
//! lp norms.
//!
//! Points are bucketed into a two-level grid of squares and cells. Squares
//! holding a well-populated cell are chained along a spanning tree, sparse
//! leftovers hang off nearby dense squares, and a walk around the tree threads
//! every vertex into one cycle in time linear in the number of points. A
//! separate verifier checks any claimed cycle against the raw coordinates.
//!
//! ```
//! use rgg_hamilton::{find_hamiltonian_cycle, sample_uniform, LpExponent, PipelineOptions};
//!
//! let vs = sample_uniform(70_000, 1);
//! let run = find_hamiltonian_cycle(&vs, 0.21, LpExponent::TWO, PipelineOptions::default()).unwrap();
//! assert!(run.verified());
//! ```

pub mod aux_graph;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hamiltonian;
pub mod instance;
pub mod io;
pub mod pipeline;
pub mod tessellation;

pub use error::{Error, Result};
pub use geometry::{alpha_p, lp_distance, max_box_distance, LpExponent, Point2D, Rect};
pub use hamiltonian::{
    construct_cycle, verify_cycle, ConstructionFailure, FailureReason, HamCycle, VerificationReport, ViolationKind,
};
pub use instance::{
    is_connected, resolve_radius, sample_points, sample_uniform, threshold_radius, InstanceConfig, RadiusSpec,
    VertexSet,
};
pub use pipeline::{find_hamiltonian_cycle, structural_invariants, KSelection, PipelineOptions, PipelineRun};
pub use tessellation::{CellId, SquareId, Tessellation};
