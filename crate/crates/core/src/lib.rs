pub mod amg;
pub mod comm;
pub mod dense;
pub mod dist;
pub mod error;
pub mod model;
pub mod mtx;
pub mod partition;
pub mod solve;
pub mod sparse;
pub mod stencil;
pub mod topology;

pub use error::{Error, Result};
pub use amg::{setup, Coarsening, Hierarchy, SetupConfig, SolverKind, StrategyChoice};
pub use comm::{CommPattern, CommSchedule, Exchange, MessageLog, StepClass, Strategy};
pub use model::{CommCounters, CounterSource, ModelParams, ProtocolParams, Selection};
pub use partition::{comm_pattern, distribute, PartitionedMatrix, PartitionedVector, RowPartition};
pub use solve::{solve, SolveOptions, SolveResult};
pub use sparse::CsrMatrix;
pub use stencil::{generate_stencil, Stencil};
pub use topology::Topology;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/partitions.md")]
    mod partitions {}
    #[doc = include_str!("../../../book/src/strategies.md")]
    mod strategies {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
}
