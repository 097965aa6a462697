//! Quasi-exactly solvable polynomial oscillators.
//!
//! Bound states of `V(x) = g_1 x^2 + ... + g_{2q+1} x^{4q+2}` of the form
//! `exp(-P(x)) * polynomial` satisfy a finite, generally non-square linear
//! system whose eigenvalue is a q-plet of couplings. This crate builds the
//! system ([`system`]), solves it directly ([`direct`]) or by perturbation
//! series ([`perturbation`], [`large_ell`]), and checks the results
//! independently ([`verification`]). The `magyari` binary wraps it ([`cli`]).
//!
//! ```
//! use magyari::direct::solve_harmonic;
//! use magyari::model::ParityChannel;
//!
//! let ground = solve_harmonic(1.0, ParityChannel::even(), 0).unwrap();
//! assert_eq!(ground.wave.coeffs(), &[1.0]);
//! ```

pub mod cli;
pub mod direct;
pub mod error;
pub mod large_ell;
mod linalg;
pub mod model;
pub mod perturbation;
pub mod system;
pub mod verification;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/oscillators.md")]
    mod oscillators {}
    #[doc = include_str!("../../../book/src/magyari-matrix.md")]
    mod magyari_matrix {}
    #[doc = include_str!("../../../book/src/direct-solutions.md")]
    mod direct_solutions {}
    #[doc = include_str!("../../../book/src/perturbation.md")]
    mod perturbation {}
    #[doc = include_str!("../../../book/src/large-ell.md")]
    mod large_ell {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
