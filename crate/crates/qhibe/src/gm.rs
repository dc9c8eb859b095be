//! Minimal Goldwasser-Micali reference scheme.
//!
//! One bit per `Z_N` element: `c = x^2 y^b` with the canonical Blum
//! pseudosquare `y = N - 1`. Serves as the payload-size baseline in the cost
//! report (the ring scheme carries four `Z_N` elements per bit).

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;

use crate::error::Result;
use crate::numtheory::{qr_oracle, sample_unit, MasterSecret, PublicParams};

/// A GM ciphertext: a single element of `Z_N` per bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GmCiphertext(pub BigUint);

/// Number of `Z_N` payload elements per encrypted bit.
pub const PAYLOAD_ELEMENTS: usize = 1;

/// Encrypts one bit: `x^2 * y^b mod N` for uniform unit `x`, with
/// `y = N - 1` (a non-residue with Jacobi symbol +1 since `N` is Blum).
pub fn encrypt<R: Rng + ?Sized>(pp: &PublicParams, bit: bool, rng: &mut R) -> Result<GmCiphertext> {
    let n = pp.modulus();
    let x = sample_unit(n, rng)?;
    let mut c = (&x * &x) % n;
    if bit {
        c = (&c * (n - BigUint::one())) % n;
    }
    Ok(GmCiphertext(c))
}

/// Decrypts by deciding quadratic residuosity with the factorization:
/// residues are 0, non-residues are 1.
pub fn decrypt(msk: &MasterSecret, ct: &GmCiphertext) -> Result<bool> {
    Ok(!qr_oracle(&ct.0, msk)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn round_trip_and_xor_homomorphism() {
        let pp = PublicParams::from_parts(BigUint::from(77u32), 4).unwrap();
        let msk = MasterSecret::from_parts(BigUint::from(7u32), BigUint::from(11u32)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(30);
        let n = pp.modulus();
        for _ in 0..50 {
            let b1 = rng.gen_bool(0.5);
            let b2 = rng.gen_bool(0.5);
            let c1 = encrypt(&pp, b1, &mut rng).unwrap();
            let c2 = encrypt(&pp, b2, &mut rng).unwrap();
            assert_eq!(decrypt(&msk, &c1).unwrap(), b1);
            // Multiplying GM ciphertexts XORs the plaintexts.
            let prod = GmCiphertext((&c1.0 * &c2.0) % n);
            assert_eq!(decrypt(&msk, &prod).unwrap(), b1 ^ b2);
        }
    }
}
