//! Failure and cheating probabilities of non-interactive, incomplete
//! 1-out-of-2 quantum oblivious transfer built from four symmetric pure states.
//!
//! Alice encodes her bits `(x0, x1)` in one of four states
//! `ψ00, ψ01, ψ11, ψ10`, generated by a unitary `U` with `U⁴ = 1`. An honest
//! Bob measures to learn one bit and errs with probability `p_f`; a cheating
//! Bob tries to learn both and succeeds with probability `p_r`; Alice can only
//! guess Bob's choice (`p_s = ½`).
//!
//! All quantities depend only on the two overlaps `f = ⟨ψ00|ψ01⟩` and
//! `g = ⟨ψ00|ψ11⟩`, or equivalently on the four eigenvalues of the Gram matrix.
//!
//! ```
//! use otlab_core::{family_metrics, NamedFamily};
//!
//! let m = family_metrics(&NamedFamily::wiesner());
//! assert!((m.p_f - 0.14644661).abs() < 1e-8);
//! assert!((m.p_r - 0.5).abs() < 1e-12);
//! ```

pub mod discrimination;
pub mod error;
pub mod frontier;
pub mod linalg;
pub mod metrics;
pub mod sim;
pub mod states;

pub use discrimination::{
    am_bound, helstrom_binary, srm_povm, srm_success_symmetric, BinaryDiscrimination, Povm,
};
pub use error::{Error, Result};
pub use frontier::{
    brute_force_frontier, verify_frontier, FrontierPoint, FrontierReport, SearchConfig,
};
pub use linalg::{
    eig_hermitian, fidelity, psd_sqrt_pinv, trace_norm, DensityOperator, EigenSystem, Matrix4,
};
pub use metrics::{
    classical_min_cheat, failure_by_measurement, failure_probability, family_metrics,
    frontier_pr_of_pf, general_bounds, receiver_cheat, BoundReport, ProtocolMetrics,
};
pub use sim::{run_cheating_receiver, run_cheating_sender, run_honest, SimEstimate};
pub use states::{
    build_states, gram_matrix, gram_spectrum, named_family, pair_mixtures, spectrum_to_overlaps,
    BitChoice, FamilyKind, GramSpectrum, NamedFamily, OverlapPair, StateFamily,
};
