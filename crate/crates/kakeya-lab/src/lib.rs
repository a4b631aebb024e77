//! A computational laboratory for Kakeya-type direction sets in the plane.
//!
//! Everything is exact: directions, interval endpoints, slopes, measures, and
//! probabilities are dyadic or rational numbers, never floats (floats appear
//! only in Monte-Carlo summaries and SVG output). The pieces:
//!
//! * [`dyadic`], [`bitstring`], [`interval`]: exact arithmetic, binary-tree
//!   vertices, and dyadic intervals.
//! * [`dirtree`]: finite trees of dyadic intervals encoding direction sets,
//!   with lacunary order, splitting analysis, separation, and pruning.
//! * [`families`]: the named direction families the experiments run on.
//! * [`subtree`]: search for well-separated subtrees of a given order.
//! * [`sticky`]: sticky maps from the full binary tree into a direction tree,
//!   with exact counting and restricted enumeration.
//! * [`kset`], [`sweep`], [`witness`]: unions of parallelograms, exact strip
//!   measures by plane sweep, and local averages around a point.
//! * [`poss`], [`gtree`], [`binary_perco`]: membership probabilities,
//!   coarsened choice trees with survival probabilities, and the scaling of
//!   survival on the full binary tree.
//! * [`randgen`]: seeded random instances for tests and experiments.
//! * [`lab`]: configuration, artifact writers, and the experiment runners
//!   behind the command-line interface.

pub mod binary_perco;
pub mod bitstring;
pub mod dirtree;
pub mod dyadic;
pub mod families;
pub mod gtree;
pub mod interval;
pub mod kset;
pub mod lab;
pub mod poss;
pub mod randgen;
pub mod sticky;
pub mod subtree;
pub mod sweep;
pub mod witness;

pub use bitstring::BitString;
pub use dirtree::{DirTree, Separation, SplitReport};
pub use dyadic::Dyadic;
pub use interval::{DyadicInterval, Interval, Transform};
pub use kset::{KSet, McEstimate, Parallelogram};
