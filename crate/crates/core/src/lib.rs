//! Spectra of periodic discrete Schrödinger operators `H = Δ + μQ` on
//! ℤᵈ-periodic graphs, computed through their quotient data.
//!
//! The crate is organized around four stages:
//!
//! - [`lattice`]: quotient graphs (fundamental cell + integer edge offsets),
//!   admissibility validation, period refinement, level sets of a potential.
//! - [`cohomology`]: cycle bases with total offsets, Betti numbers, the
//!   H¹-triviality test per level set, gauge solves, and a brute-force lift
//!   oracle used to cross-validate the criterion.
//! - [`floquet`]: Floquet matrices `H(θ)`, restricted hopping Laplacians,
//!   band structures over quasimomentum grids, and spectrum measure.
//! - [`sweep`]: large-coupling experiments: measure decay along μ-schedules,
//!   per-level band clusters, first-order coefficients, and the separable
//!   lower bound for hypercubic lattices.
//!
//! [`io`] reads and writes the text graph-file format shared with the CLI.

pub mod cohomology;
pub mod floquet;
pub mod io;
pub mod lattice;
pub mod sweep;

pub use cohomology::{
    betti_numbers, brute_force_lift_oracle, chain_psi_theta, cycle_basis, flat_path_report,
    is_h1_trivial, loop_sum, solve_gauge, CohomologyError, Cycle, CycleBasis, FlatPathReport,
    GaugePotential, LevelSetReport, OneChain,
};
pub use floquet::{
    assemble_floquet, assemble_restricted_laplacian, compute_bands, gauge_conjugate,
    hermitian_eigenvalues, spectrum_measure, BandOptions, BandStructure, FloquetError,
    FloquetMatrix, Interval, SpectrumEstimate,
};
pub use lattice::{
    gen_hypercubic, gen_stripe, level_sets, minimal_assumption_refinement, refine_period,
    CellOffset, Fragment, GeneratedLattice, GraphError, LevelSet, PeriodicGraph, Potential,
    QuotientEdge, Theta, ValidationReport, VertexId, Violation,
};
pub use sweep::{
    coupling_sweep, first_order_coefficients, fit_decay, perturbation_check,
    separable_lower_bound, DecayFit, FirstOrderCoefficients, PerturbationReport, SeparableBound,
    SweepError, SweepResult,
};
