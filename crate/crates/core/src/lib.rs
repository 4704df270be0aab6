//! Core machinery for site percolation on two-layer lattice slabs.
//!
//! The graph under study is the "sandwich" `Z² × {0,1}`: two stacked copies of
//! the square lattice joined by vertical edges (plus a periodic three-layer
//! variant). Everything here is pure computation over finite boxes: lattice
//! geometry, open/closed configurations with seeded sampling and exhaustive
//! enumeration, cluster structure through the column-graph reduction, and the
//! left-most / lowest / innermost crossing decompositions driven by lattice
//! path surgery.
//!
//! The crate is `no_std` (with `alloc`); IO, statistics and the CLI live in
//! the companion `sandwich-sim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub(crate) mod bits;

pub mod config;
pub mod connectivity;
pub mod error;
pub mod lattice;
pub mod pathalg;

pub use config::{Configuration, CouplingField, Seed, DEFAULT_ENUM_CAP};
pub use connectivity::{ColumnGraph, EventSpec, UnionFind};
pub use error::Error;
pub use lattice::{Annulus, BoxRegion, Column, GraphMode, Ribbon, Site};
pub use pathalg::{LatticePath, LeftRegion, ProjectedPath};

/// Set of columns, ordered for deterministic iteration.
pub type ColumnSet = alloc::collections::BTreeSet<lattice::Column>;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
