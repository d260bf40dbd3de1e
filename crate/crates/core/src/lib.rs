//! Certified prime recurrences.
//!
//! `p_{n+1}` is recovered from `p_1..p_n` as the certified ceiling of
//! `(zeta(s) prod (1 - p_j^-s) - 1)^(-1/s)` at `s = 2 p_n`, with ball
//! arithmetic sizing the precision so the ceiling is provably correct.
//! Classical Gandhi and Golomb-Trefeu formulas, a Dirichlet-character
//! predictor for `p_{n+1} mod 4` and a sieve oracle serve as cross-checks.

pub mod classical;
pub mod cli;
pub mod error;
pub mod mod4;
pub mod oracle;
pub mod precision;
pub mod recurrence;
pub mod scan;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use precision::{certified_ceiling, certified_floor, BallReal, CertifiedInt, PrecisionPolicy};
pub use recurrence::{generate_chain, next_prime_effective, ExponentPolicy, PrimeChain};
