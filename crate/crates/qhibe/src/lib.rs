//! XOR-homomorphic identity-based encryption from quadratic residuosity.
//!
//! The crate implements an identity-based bit-encryption scheme whose
//! ciphertext components live in the quotient ring `Z_N[x]/(x^2 - a)` with
//! `a = H(id)`. Ring multiplication XORs the underlying plaintexts, so
//! linear circuits over `Z_2` evaluate homomorphically; evaluated
//! ciphertexts are re-randomized and distributed like fresh ones. The
//! scalar scheme the construction descends from is included as a baseline,
//! together with the Galbraith test that breaks its anonymity, a universal
//! ciphertext anonymizer reversing that leak at the cost of tag-assisted
//! (non-universal) evaluation, and executable security experiments for all
//! of the above.
//!
//! Modules:
//! - [`numtheory`]: Blum moduli, Jacobi symbols, square-root extraction,
//!   the full-domain hash and symbol-constrained sampling.
//! - [`qring`]: arithmetic in `Z_N[x]/(x^2 - a)` and the encryption
//!   sampler.
//! - [`cocks`]: the scalar baseline scheme.
//! - [`xhibe`]: the XOR-homomorphic scheme.
//! - [`gm`]: a one-element-per-bit reference scheme for size comparisons.
//! - [`anonymizer`]: the universal anonymizer and the anonymous,
//!   non-universally homomorphic scheme it induces.
//! - [`games`]: attribute-hiding and payload-hiding experiment runners, the
//!   Galbraith distinguisher, and toy-scale distribution statistics.
//! - [`opcount`]: instrumented modular arithmetic backing the cost report.

pub mod anonymizer;
pub mod cocks;
pub mod error;
pub mod games;
pub mod gm;
pub mod numtheory;
pub mod opcount;
pub mod qring;
pub mod xhibe;

pub use error::{Error, Result};
pub use numtheory::{gen_blum_modulus, JacobiSymbol, MasterSecret, PublicParams};
