//! The original Cocks identity-based scheme over a Blum modulus.
//!
//! Kept as the correctness baseline for the ring variant and as the target
//! of the Galbraith anonymity distinguisher. A ciphertext is the scalar pair
//! `(t1 + a t1^{-1}, t2 - a t2^{-1})` with `a = H(id)`; decryption uses the
//! component matching the sign of `r^2 ≡ ±a`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numtheory::{
    hash_to_group, jacobi_unchecked, nu_decode, nu_encode, sample_unit_with_symbol_mod,
    sqrt_extract, JacobiSymbol, MasterSecret, PublicParams, REJECTION_CAP,
};
use crate::opcount::{inv_mod, mul_mod};

/// An extracted identity key: `r` with `r^2 ≡ H(id) (mod N)` or
/// `r^2 ≡ -H(id) (mod N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityKey {
    id: Vec<u8>,
    r: BigUint,
}

impl IdentityKey {
    pub fn from_parts(id: Vec<u8>, r: BigUint) -> Self {
        IdentityKey { id, r }
    }

    pub fn id(&self) -> &[u8] {
        &self.id
    }

    pub fn r(&self) -> &BigUint {
        &self.r
    }
}

/// A Cocks ciphertext: one scalar per component, tagged with the public
/// hash value so that decryption under a mismatched key is detected as ⊥
/// rather than decoding noise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocksCiphertext {
    pub u: BigUint,
    pub v: BigUint,
    pub a: BigUint,
}

/// Delegates to [`gen_blum_modulus`](crate::numtheory::gen_blum_modulus).
pub fn setup<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> Result<(PublicParams, MasterSecret)> {
    crate::numtheory::gen_blum_modulus(bits, rng)
}

/// Extracts the identity key `(id, r)` with `r = H(id)^{(N+5-p-q)/8}`.
pub fn keygen(pp: &PublicParams, msk: &MasterSecret, id: &[u8]) -> Result<IdentityKey> {
    if !msk.matches(pp) {
        return Err(Error::InvalidParameter("master secret does not match parameters"));
    }
    let a = hash_to_group(id, pp)?;
    let r = sqrt_extract(&a, msk)?;
    Ok(IdentityKey { id: id.to_vec(), r })
}

/// Encrypts one bit: `u = t1 + a t1^{-1}`, `v = t2 - a t2^{-1}` with
/// `t1, t2` uniform in `Z*_N[ν(b)]`. Draws making a component a non-unit or
/// zeroing its Galbraith argument are resampled.
pub fn encrypt<R: Rng + ?Sized>(
    pp: &PublicParams,
    id: &[u8],
    bit: bool,
    rng: &mut R,
) -> Result<CocksCiphertext> {
    let n = pp.modulus();
    let a = hash_to_group(id, pp)?;
    let neg_a = n - &a;
    let u = encrypt_component(n, &a, bit, rng)?;
    let v = encrypt_component(n, &neg_a, bit, rng)?;
    Ok(CocksCiphertext { u, v, a })
}

/// One scalar component `t + a t^{-1}` for the given square parameter
/// (`N - a` yields the `t - a t^{-1}` side).
fn encrypt_component<R: Rng + ?Sized>(
    n: &BigUint,
    a: &BigUint,
    bit: bool,
    rng: &mut R,
) -> Result<BigUint> {
    let symbol = nu_encode(bit);
    for _ in 0..REJECTION_CAP {
        let t = sample_unit_with_symbol_mod(n, symbol, rng)?;
        let t_inv = inv_mod(&t, n).ok_or(Error::NotAUnit)?;
        let c = (&t + mul_mod(a, &t_inv, n)) % n;
        if !c.gcd(n).is_one() {
            continue;
        }
        if galbraith_scalar(a, &c, n) == JacobiSymbol::Zero {
            continue;
        }
        return Ok(c);
    }
    Err(Error::IterationCapExceeded("sampling a Cocks component"))
}

/// Decrypts by selecting the component matching `r^2 ≡ ±a` and decoding
/// `ν^{-1}((d + 2r / N))`. Mismatched keys yield ⊥.
pub fn decrypt(pp: &PublicParams, sk: &IdentityKey, ct: &CocksCiphertext) -> Result<bool> {
    let n = pp.modulus();
    let r_sq = (sk.r() * sk.r()) % n;
    let d = if r_sq == ct.a {
        &ct.u
    } else if r_sq == n - &ct.a {
        &ct.v
    } else {
        return Err(Error::AccessDenied);
    };
    let arg = (d + (sk.r() << 1)) % n;
    nu_decode(jacobi_unchecked(&arg, n))
}

/// The scalar Galbraith test `GT(a, c, N) = ((c^2 - 4a) / N)`.
///
/// +1 (or 0 on a negligible set) for honest components under the true `a`;
/// statistically close to uniform on {-1, +1} for any other parameter. This
/// is the classic anonymity attack against the scheme.
pub fn galbraith_scalar(a: &BigUint, c: &BigUint, n: &BigUint) -> JacobiSymbol {
    let c_sq = (c * c) % n;
    let four_a = (a << 2) % n;
    let arg = (&c_sq + n - &four_a) % n;
    jacobi_unchecked(&arg, n)
}
