//! Instrumented modular arithmetic.
//!
//! Ciphertext-path multiplications and inversions go through [`mul_mod`] and
//! [`inv_mod`] so that per-operation cost counts can be checked exactly.
//! Validity checks (Jacobi symbols, Galbraith tests) use plain arithmetic and
//! are not tallied; the counters cover the same work the ciphertext cost
//! model charges for.
//!
//! Counters are thread-local: measure on a single thread.

use std::cell::Cell;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed};

thread_local! {
    static MULTIPLICATIONS: Cell<u64> = const { Cell::new(0) };
    static INVERSIONS: Cell<u64> = const { Cell::new(0) };
}

/// Snapshot of the arithmetic counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    pub multiplications: u64,
    pub inversions: u64,
}

/// Resets both counters on the current thread.
pub fn reset() {
    MULTIPLICATIONS.with(|c| c.set(0));
    INVERSIONS.with(|c| c.set(0));
}

/// Returns the counters accumulated on the current thread since the last reset.
pub fn snapshot() -> OpCounts {
    OpCounts {
        multiplications: MULTIPLICATIONS.with(Cell::get),
        inversions: INVERSIONS.with(Cell::get),
    }
}

/// Runs `f` with freshly reset counters and returns its result together with
/// the operations it performed.
pub fn tally<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    reset();
    let out = f();
    (out, snapshot())
}

/// Counted modular multiplication: `x * y mod n`.
pub fn mul_mod(x: &BigUint, y: &BigUint, n: &BigUint) -> BigUint {
    MULTIPLICATIONS.with(|c| c.set(c.get() + 1));
    (x * y) % n
}

/// Counted modular inversion. Returns `None` when `x` is not a unit mod `n`.
pub fn inv_mod(x: &BigUint, n: &BigUint) -> Option<BigUint> {
    INVERSIONS.with(|c| c.set(c.get() + 1));
    let e = BigInt::from(x % n).extended_gcd(&BigInt::from(n.clone()));
    if !e.gcd.is_one() {
        return None;
    }
    let n_signed = BigInt::from(n.clone());
    let mut inv = e.x % &n_signed;
    if inv.is_negative() {
        inv += &n_signed;
    }
    Some(inv.to_biguint().expect("reduced inverse is non-negative"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_multiplications_and_inversions() {
        let n = BigUint::from(77u32);
        let ((), counts) = tally(|| {
            let _ = mul_mod(&BigUint::from(5u32), &BigUint::from(6u32), &n);
            let _ = inv_mod(&BigUint::from(25u32), &n);
        });
        assert_eq!(
            counts,
            OpCounts {
                multiplications: 1,
                inversions: 1
            }
        );
    }

    #[test]
    fn inverse_of_25_mod_77_is_37() {
        let n = BigUint::from(77u32);
        let inv = inv_mod(&BigUint::from(25u32), &n).unwrap();
        assert_eq!(inv, BigUint::from(37u32));
        assert!(inv_mod(&BigUint::from(7u32), &n).is_none());
    }
}
