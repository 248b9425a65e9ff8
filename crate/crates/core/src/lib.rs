//! Wave propagation on networks of thin waveguides.
//!
//! The crate models a branched waveguide of width `ε` by a metric graph whose
//! vertices carry the junctions' scattering matrices. It provides
//!
//! - the graph model and its JSON format ([`graph`], [`vertex`]),
//! - the plane-wave linear system, secular determinant and Green function
//!   ([`assembly`]),
//! - eigenvalue search, network scattering matrices and eigenfunctions
//!   ([`spectral`]),
//! - the `λ = λ0 + μ ε²` limit near the bottom of the continuous spectrum
//!   ([`threshold`]),
//! - a finite-difference Helmholtz solver for planar junctions and networks
//!   that produces the vertex matrices and checks the graph model
//!   ([`continuum`]),
//! - file-level commands shared by the `fibernet` binary ([`io`]).
//!
//! On every edge a solution is written `ς(t) = a e^{ikt} + b e^{−ikt}` with
//! `k = √(λ − λ0)/ε`, `Im k ≥ 0`; `a` is the outgoing and `b` the incoming
//! amplitude as seen from the edge's start vertex.

pub mod assembly;
pub mod continuum;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod spectral;
pub mod threshold;
pub mod vertex;

pub use error::{Error, Result};
pub use graph::{FreeEndBc, MetricGraph};
pub use vertex::VertexCondition;
