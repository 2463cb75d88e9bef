//! Minimizers for binary and spin polynomials.

mod anneal;
mod brute;
mod external;
mod landscape;
mod sampleset;
mod spin;

pub use anneal::{anneal, anneal_traced, solve_native, solve_reduced, AnnealSchedule};
pub use brute::{
    brute_force, ground_energy, BruteForceOptions, Spectrum, DEFAULT_BRUTE_FORCE_LIMIT,
    TIE_TOLERANCE,
};
pub use external::{
    external_solve, AdapterRequest, AdapterResponse, CassetteAdapter, ExternalSolver, HttpAdapter,
    ShotResult, WireTerm, ADAPTER_CASSETTE_SCHEMA_VERSION,
};
pub use landscape::{Basis, CompiledPoly, FlipState, Landscape};
pub use sampleset::{bitstring, Sample, SampleSet, SolverMetadata};
pub use spin::{binary_to_spin, reduce_cubic_to_quadratic, spin_to_binary, SpinModel};
