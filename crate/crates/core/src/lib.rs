//! Sparse learning over the space of all subgraph indicator features.
//!
//! A linear model `mu(g) = b0 + sum_j b_j I(x_j in g)` is fitted by block
//! coordinate gradient descent where the coordinates are subgraph patterns
//! `x_j`. The candidate patterns are never materialised: every iteration walks
//! the gSpan enumeration tree over the training graphs and prunes subtrees in
//! which no coordinate can move, so only the nonzero part of the coefficient
//! vector is ever stored.
//!
//! Module map:
//!
//! * [`graph`], [`dfs`], [`contains`]: labeled graphs, dataset files,
//!   minimum DFS codes and pattern containment.
//! * [`indicator`], [`enumtree`]: indicator vectors and depth-first traversal
//!   of the enumeration tree by right-most extension.
//! * [`bounds`]: bounds for separable objectives over indicator vectors and the
//!   single-best-feature branch-and-bound searches.
//! * [`dictpass`]: depth-first dictionary passing.
//! * [`loss`], [`bcgd`]: losses and the training algorithm.
//! * [`datagen`]: class-labeled random graph benchmarks.
//! * [`oracle`]: explicit design matrices and the dense reference optimizer.

pub mod bcgd;
pub mod bounds;
pub mod contains;
pub mod datagen;
pub mod dfs;
pub mod dictpass;
pub mod enumtree;
pub mod error;
pub mod graph;
pub mod indicator;
pub mod loss;
pub mod oracle;
pub mod threads;

pub use bcgd::{fit, predict, FitConfig, FitResult, SparseModel, TraceRow};
pub use dfs::{min_dfs_code, DfsCode, DfsEdge};
pub use error::{Error, Result};
pub use graph::{parse_dataset, GraphDataset, LabeledGraph};
pub use indicator::IndicatorVector;
pub use loss::{LossKind, Loss};
