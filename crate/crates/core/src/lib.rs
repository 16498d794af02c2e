//! Minimum cuts of weighted undirected graphs through spanning tree packing.
//!
//! A packing of spanning trees into a sparse random skeleton yields a few
//! trees such that the minimum cut crosses at most two edges of one of
//! them. For each tree the smallest such cut is found either with an
//! `O(n²)` table ([`respect2_dense`]) or in near-linear time with
//! path-aggregate markers and bough contraction ([`respect2_sparse`]).

pub mod driver;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod packing;
pub mod path_aggregate;
pub mod respect1;
pub mod respect2_dense;
pub mod respect2_sparse;
pub mod rooted_tree;
pub mod skeleton;

pub use error::{Error, Result};
pub use graph::{ContractionMap, Cut, Edge, WeightedGraph};
