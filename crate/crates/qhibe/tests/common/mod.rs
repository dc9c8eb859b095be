//! Shared fixtures and independent test oracles.

use num_bigint::BigUint;
use once_cell::sync::Lazy;
use qhibe::numtheory::{MasterSecret, PublicParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// One set of production-size parameters per test binary.
pub static PARAMS_512: Lazy<(PublicParams, MasterSecret)> = Lazy::new(|| {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_2026);
    qhibe::gen_blum_modulus(512, &mut rng).expect("512-bit setup")
});

pub fn toy_params() -> (PublicParams, MasterSecret) {
    let pp = PublicParams::from_parts(BigUint::from(77u32), 4).unwrap();
    let msk = MasterSecret::from_parts(BigUint::from(7u32), BigUint::from(11u32)).unwrap();
    (pp, msk)
}

/// Independent u64 arithmetic mod 77 for exhaustive sweeps: Jacobi symbol
/// by Euler's criterion over the known factors, and the schoolbook ring
/// product.
pub mod oracle {
    pub const N: u64 = 77;
    const P: u64 = 7;
    const Q: u64 = 11;

    pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
        let mut acc = 1;
        base %= m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            exp >>= 1;
        }
        acc
    }

    fn legendre(x: u64, p: u64) -> i8 {
        match pow_mod(x % p, (p - 1) / 2, p) {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    pub fn jacobi(x: u64) -> i8 {
        legendre(x, P) * legendre(x, Q)
    }

    pub fn ring_mul(a: u64, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        (
            (x.0 * y.0 + a % N * (x.1 * y.1 % N)) % N,
            (x.0 * y.1 + x.1 * y.0) % N,
        )
    }

    pub fn gt(a: u64, e: (u64, u64)) -> i8 {
        jacobi((e.0 * e.0 + (N - a % N) * (e.1 * e.1 % N)) % N)
    }
}
