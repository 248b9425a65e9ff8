//! Finite-difference Helmholtz solver for planar waveguide junctions and
//! bounded networks.
//!
//! Domains are unions of axis-aligned rectangles discretized by a
//! cell-centered 5-point stencil; walls are imposed through mirrored ghost
//! cells. A junction is a set of rectangles with leads (channels of width
//! `w`) attached to rectangle faces. Open leads are truncated at length `L`
//! with an exact discrete modal radiation condition; closed leads end in a
//! wall.

mod convergence;
mod eigen;
mod geometry;
mod modes;
mod scattering;

pub use convergence::{
    convergence_study, straight_channel_order, ConvergenceOptions, ConvergenceReport,
    ConvergenceRow, RichardsonReport,
};
pub use eigen::{domain_eigenvalues, network_eigenvalues_2d, EigenOptions, Spectrum2d};
pub use geometry::{Face, JunctionGeometry, Lead, LeadEnd, WallBc};
pub use modes::{transverse_modes, DiscreteModes, ModeBasis};
pub use scattering::{
    discrete_thresholds, fit_mode0, junction_smatrix, junction_smatrix_with, mode0_profile,
    scaling_invariance_check, tabulate_junction, tabulate_junction_with, DiscreteField,
    JunctionDiagnostics, JunctionOptions, JunctionSolution, Mode0Fit, Profile, ScalingReport,
    TabulatedJunction,
};
