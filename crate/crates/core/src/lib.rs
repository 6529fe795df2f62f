//! Spectral objects of radial p-adic pseudo-differential operators on the
//! unit ball `Z_p^n`: eigenvalues and multiplicities, heat kernels and traces
//! with certified error bounds, spectral zeta functions, and a finite level-K
//! lattice model that checks the identities between them.
//!
//! Infinite shell series are truncated with geometric tail bounds derived
//! from a symbol's growth certificate, never from sampled values; results
//! carry those bounds as [`Enclosure`]s.

pub mod enclosure;
pub mod error;
pub mod heat;
pub mod lattice;
pub mod padic;
pub mod series;
pub mod spectrum;
pub mod symbols;
pub mod zeta;

pub use enclosure::Enclosure;
pub use error::{Error, Result};
pub use heat::{
    full_space_kernel, heat_kernel, heat_trace, mellin_check, power_trace, trace_bracket,
    BracketRow, KernelQuery, MellinReport, TraceBracket,
};
pub use lattice::{
    contraction_check, fourier_diagonal_apply, generator_check, gram_matrix, kernel_coset_average,
    mercer_check, semigroup_law_check, semigroup_matrix, verify_suite, wavelet_eval,
    wavelet_family, GramMatrix, LatticeLevel, LevelCaps, LevelKFunction, VerificationRecord,
    WaveletIndex,
};
pub use num_complex::Complex64;
pub use padic::{GlobalParams, Order, PointAddress, UnitPhase};
pub use spectrum::{
    counting_function, growth_exponent_estimate, multiplicity, spectrum_iter, GrowthEstimate,
    SpectralLine,
};
pub use symbols::{
    damped_symbol, parse_table, symbol_from_table, taibleson_symbol, walpha_symbol, RadialSymbol,
    SymbolCertificate, SymbolKind, WAlphaSpec,
};
pub use zeta::{
    pole_lattice, taibleson_zeta_closed, zeta_series, PoleKind, PoleLattice, ZetaClosedForm,
    ZetaSeries,
};
