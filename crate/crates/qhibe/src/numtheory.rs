//! Modular-arithmetic foundation: Blum modulus generation, Jacobi symbols,
//! square-root extraction, the full-domain hash onto `Z*_N[+1]`, and
//! symbol-constrained sampling.
//!
//! Everything here is a pure function of its inputs plus an explicitly
//! passed randomness stream, so the whole module is safe to use from any
//! number of threads at once.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hard cap applied to every rejection-sampling loop. Converts
/// non-termination on degenerate inputs into a detectable error.
pub const REJECTION_CAP: u32 = 1 << 16;

/// Miller-Rabin rounds; composite acceptance probability is at most 4^-40 = 2^-80.
const MILLER_RABIN_ROUNDS: u32 = 40;

/// Domain-separation tag for the full-domain hash.
const HASH_DOMAIN_TAG: &[u8] = b"qhibe/h2g/v1/sha-256";

/// A Jacobi symbol value: -1, 0 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JacobiSymbol {
    MinusOne,
    Zero,
    PlusOne,
}

impl JacobiSymbol {
    pub fn value(self) -> i8 {
        match self {
            JacobiSymbol::MinusOne => -1,
            JacobiSymbol::Zero => 0,
            JacobiSymbol::PlusOne => 1,
        }
    }

    pub fn is_plus_one(self) -> bool {
        self == JacobiSymbol::PlusOne
    }
}

impl std::ops::Mul for JacobiSymbol {
    type Output = JacobiSymbol;

    fn mul(self, rhs: JacobiSymbol) -> JacobiSymbol {
        match self.value() * rhs.value() {
            0 => JacobiSymbol::Zero,
            1 => JacobiSymbol::PlusOne,
            _ => JacobiSymbol::MinusOne,
        }
    }
}

/// Public parameters: the Blum modulus `N = pq` together with the prime bit
/// length `bits` (the security parameter).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    n: BigUint,
    bits: u32,
}

impl PublicParams {
    /// Reassembles parameters, e.g. from a file. Checks that `n` is odd and
    /// that its bit length is consistent with `bits`; compositeness is a
    /// generation-side guarantee and is not re-proved here.
    pub fn from_parts(n: BigUint, bits: u32) -> Result<Self> {
        if bits < 4 {
            return Err(Error::InvalidParameter("prime bit length must be at least 4"));
        }
        if n.is_even() || n < BigUint::from(15u32) {
            return Err(Error::InvalidModulus);
        }
        let nb = n.bits();
        if nb < (2 * bits - 1) as u64 || nb > (2 * bits) as u64 {
            return Err(Error::InvalidParameter("modulus size does not match bit parameter"));
        }
        Ok(PublicParams { n, bits })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    /// The security parameter: bit length of each prime factor.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Bytes needed for one canonically encoded element of `Z_N`.
    pub fn element_len(&self) -> usize {
        ((self.n.bits() + 7) / 8) as usize
    }
}

/// The trusted authority's factorization `(p, q)` of `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterSecret {
    p: BigUint,
    q: BigUint,
}

impl MasterSecret {
    /// Reassembles a master secret, checking the structural invariants
    /// (`p != q`, both congruent to 3 mod 4). Primality is a generation-side
    /// guarantee.
    pub fn from_parts(p: BigUint, q: BigUint) -> Result<Self> {
        let three = BigUint::from(3u32);
        let four = BigUint::from(4u32);
        if p == q {
            return Err(Error::InvalidParameter("prime factors must be distinct"));
        }
        if &p % &four != three || &q % &four != three {
            return Err(Error::InvalidParameter("prime factors must be 3 mod 4"));
        }
        Ok(MasterSecret { p, q })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn modulus(&self) -> BigUint {
        &self.p * &self.q
    }

    pub fn matches(&self, pp: &PublicParams) -> bool {
        self.modulus() == *pp.modulus()
    }
}

/// Generates a Blum modulus: `N = pq` with distinct primes `p ≡ q ≡ 3 (mod 4)`
/// of at most `bits` bits each, such that `N` has `2*bits - 1` or `2*bits`
/// bits. Deterministic given the randomness stream.
pub fn gen_blum_modulus<R: Rng + ?Sized>(
    bits: u32,
    rng: &mut R,
) -> Result<(PublicParams, MasterSecret)> {
    if bits < 4 {
        return Err(Error::InvalidParameter("prime bit length must be at least 4"));
    }
    for _ in 0..REJECTION_CAP {
        let p = random_blum_prime(bits, rng)?;
        let q = random_blum_prime(bits, rng)?;
        if p == q {
            continue;
        }
        let n = &p * &q;
        if n.bits() < (2 * bits - 1) as u64 {
            continue;
        }
        return Ok((PublicParams { n, bits }, MasterSecret { p, q }));
    }
    Err(Error::PrimeSearchExhausted)
}

fn random_blum_prime<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> Result<BigUint> {
    for _ in 0..REJECTION_CAP {
        let mut candidate = rng.gen_biguint(bits as u64);
        if bits >= 16 {
            // At cryptographic sizes force full-width primes; at toy sizes a
            // loose range is needed so that small moduli are reachable at all.
            candidate.set_bit(bits as u64 - 1, true);
        }
        candidate |= BigUint::from(3u32); // ensures candidate ≡ 3 (mod 4)
        if is_probable_prime(&candidate, rng) {
            return Ok(candidate);
        }
    }
    Err(Error::PrimeSearchExhausted)
}

const SMALL_PRIMES: [u32; 46] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211,
];

fn is_probable_prime<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n == two {
        return true;
    }
    if n < &two || n.is_even() {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    // Everything below 211^2 that survived trial division is prime.
    if *n < BigUint::from(211u32 * 211u32) {
        return true;
    }
    miller_rabin(n, rng)
}

fn miller_rabin<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().expect("n - 1 is nonzero");
    let d = &n_minus_one >> s;

    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let base = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = base.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Jacobi symbol `(x / n)` for odd `n >= 3`, computed with the binary
/// reciprocity algorithm (no factorization of `n`).
pub fn jacobi(x: &BigUint, n: &BigUint) -> Result<JacobiSymbol> {
    if n.is_even() || *n < BigUint::from(3u32) {
        return Err(Error::InvalidModulus);
    }
    Ok(jacobi_unchecked(x, n))
}

pub(crate) fn jacobi_unchecked(x: &BigUint, n: &BigUint) -> JacobiSymbol {
    debug_assert!(n.is_odd() && *n >= BigUint::from(3u32));
    let mut a = if x < n { x.clone() } else { x % n };
    let mut m = n.clone();
    let mut positive = true;
    // Reads of `mod 8` / `mod 4` come straight from the low digit.
    let low = |v: &BigUint| v.iter_u32_digits().next().unwrap_or(0);
    while !a.is_zero() {
        let z = a.trailing_zeros().expect("a is nonzero");
        if z > 0 {
            a >>= z;
        }
        let m_mod_8 = low(&m) & 7;
        if z % 2 == 1 && (m_mod_8 == 3 || m_mod_8 == 5) {
            positive = !positive;
        }
        if low(&a) & 3 == 3 && m_mod_8 & 3 == 3 {
            positive = !positive;
        }
        std::mem::swap(&mut a, &mut m);
        a %= &m;
    }
    if m.is_one() {
        if positive {
            JacobiSymbol::PlusOne
        } else {
            JacobiSymbol::MinusOne
        }
    } else {
        JacobiSymbol::Zero
    }
}

/// Extracts a square root in the Blum setting: returns `r` with
/// `r^2 ≡ a (mod N)` or `r^2 ≡ -a (mod N)` (exactly one holds), via the
/// exponent `(N + 5 - p - q) / 8`.
pub fn sqrt_extract(a: &BigUint, msk: &MasterSecret) -> Result<BigUint> {
    let n = msk.modulus();
    if jacobi(a, &n)? != JacobiSymbol::PlusOne {
        return Err(Error::SymbolNotPlusOne);
    }
    let exponent = (&n + BigUint::from(5u32) - msk.p() - msk.q()) >> 3;
    Ok(a.modpow(&exponent, &n))
}

/// Full-domain hash `H : {0,1}* -> Z*_N[+1]`.
///
/// Construction: SHA-256 over `tag || id || counter || block`, with enough
/// 32-byte blocks concatenated to cover the byte length of `N`; the candidate
/// is reduced into `[1, N)` and accepted once it is a unit with Jacobi
/// symbol +1, else the 32-bit counter is bumped. Deterministic.
pub fn hash_to_group(id: &[u8], pp: &PublicParams) -> Result<BigUint> {
    let n = pp.modulus();
    let byte_len = pp.element_len();
    let blocks = byte_len.div_ceil(32);
    for counter in 0..REJECTION_CAP {
        let mut buf = Vec::with_capacity(blocks * 32);
        for block in 0..blocks as u32 {
            let mut hasher = Sha256::new();
            hasher.update(HASH_DOMAIN_TAG);
            hasher.update(id);
            hasher.update(counter.to_be_bytes());
            hasher.update(block.to_be_bytes());
            buf.extend_from_slice(&hasher.finalize());
        }
        buf.truncate(byte_len);
        let candidate = BigUint::from_bytes_be(&buf) % n;
        if candidate.is_zero() {
            continue;
        }
        if candidate.gcd(n).is_one() && jacobi_unchecked(&candidate, n).is_plus_one() {
            return Ok(candidate);
        }
    }
    Err(Error::IterationCapExceeded("hashing onto Z*_N[+1]"))
}

/// Samples `t` uniform over the units of `Z_N` with `jacobi(t, N) = s`.
/// Rejection sampling; two draws expected.
pub fn sample_unit_with_symbol<R: Rng + ?Sized>(
    pp: &PublicParams,
    s: JacobiSymbol,
    rng: &mut R,
) -> Result<BigUint> {
    sample_unit_with_symbol_mod(pp.modulus(), s, rng)
}

pub(crate) fn sample_unit_with_symbol_mod<R: Rng + ?Sized>(
    n: &BigUint,
    s: JacobiSymbol,
    rng: &mut R,
) -> Result<BigUint> {
    if s == JacobiSymbol::Zero {
        return Err(Error::InvalidParameter("target symbol must be +1 or -1"));
    }
    let one = BigUint::one();
    for _ in 0..REJECTION_CAP {
        let t = rng.gen_biguint_range(&one, n);
        if t.gcd(n).is_one() && jacobi_unchecked(&t, n) == s {
            return Ok(t);
        }
    }
    Err(Error::IterationCapExceeded("sampling a unit with fixed symbol"))
}

/// Samples a uniform unit of `Z_N`.
pub(crate) fn sample_unit<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> Result<BigUint> {
    let one = BigUint::one();
    for _ in 0..REJECTION_CAP {
        let t = rng.gen_biguint_range(&one, n);
        if t.gcd(n).is_one() {
            return Ok(t);
        }
    }
    Err(Error::IterationCapExceeded("sampling a unit"))
}

/// The encoding `ν : (Z_2, +) -> ({-1, 1}, ·)`: `ν(0) = +1`, `ν(1) = -1`.
pub fn nu_encode(bit: bool) -> JacobiSymbol {
    if bit {
        JacobiSymbol::MinusOne
    } else {
        JacobiSymbol::PlusOne
    }
}

/// Inverse of [`nu_encode`]. A symbol of 0 means a non-unit was encountered,
/// which no honest ciphertext produces.
pub fn nu_decode(symbol: JacobiSymbol) -> Result<bool> {
    match symbol {
        JacobiSymbol::PlusOne => Ok(false),
        JacobiSymbol::MinusOne => Ok(true),
        JacobiSymbol::Zero => Err(Error::MalformedCiphertext("Jacobi symbol 0 during decode")),
    }
}

/// Test oracle: decides quadratic residuosity mod `N` by Euler's criterion
/// modulo each prime factor. Requires the master secret.
pub fn qr_oracle(x: &BigUint, msk: &MasterSecret) -> Result<bool> {
    let n = msk.modulus();
    if !x.gcd(&n).is_one() {
        return Err(Error::NotAUnit);
    }
    Ok(euler_is_residue(x, msk.p()) && euler_is_residue(x, msk.q()))
}

fn euler_is_residue(x: &BigUint, p: &BigUint) -> bool {
    let exp = (p - BigUint::one()) >> 1;
    x.modpow(&exp, p).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy() -> (PublicParams, MasterSecret) {
        let pp = PublicParams::from_parts(BigUint::from(77u32), 4).unwrap();
        let msk = MasterSecret::from_parts(BigUint::from(7u32), BigUint::from(11u32)).unwrap();
        (pp, msk)
    }

    /// Independent oracle: Legendre symbol by Euler's criterion.
    fn legendre(x: u64, p: u64) -> i8 {
        let mut result = 1u64;
        let mut base = x % p;
        let mut exp = (p - 1) / 2;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        match result {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    #[test]
    fn four_bit_blum_modulus_is_77() {
        // Enumerating Blum primes of at most 4 bits: {3, 7, 11}. The only
        // product whose bit length reaches 2*4 - 1 = 7 is 7 * 11 = 77.
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (pp, msk) = gen_blum_modulus(4, &mut rng).unwrap();
        assert_eq!(*pp.modulus(), BigUint::from(77u32));
        let (p, q) = (msk.p().clone(), msk.q().clone());
        assert_ne!(p, q);
        assert_eq!(&p * &q, BigUint::from(77u32));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (pp1, msk1) = gen_blum_modulus(24, &mut ChaCha20Rng::seed_from_u64(7)).unwrap();
        let (pp2, msk2) = gen_blum_modulus(24, &mut ChaCha20Rng::seed_from_u64(7)).unwrap();
        assert_eq!(pp1, pp2);
        assert_eq!(msk1, msk2);
        let (pp3, _) = gen_blum_modulus(24, &mut ChaCha20Rng::seed_from_u64(8)).unwrap();
        assert_ne!(pp1, pp3);
    }

    #[test]
    fn generated_modulus_respects_invariants() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for bits in [12u32, 20, 32] {
            let (pp, msk) = gen_blum_modulus(bits, &mut rng).unwrap();
            let n = pp.modulus();
            assert!(n.is_odd());
            assert!(n.bits() >= (2 * bits - 1) as u64 && n.bits() <= (2 * bits) as u64);
            let four = BigUint::from(4u32);
            assert_eq!(msk.p() % &four, BigUint::from(3u32));
            assert_eq!(msk.q() % &four, BigUint::from(3u32));
            assert_ne!(msk.p(), msk.q());
            assert!(msk.matches(&pp));
        }
    }

    #[test]
    fn tiny_bit_length_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(
            gen_blum_modulus(3, &mut rng),
            Err(Error::InvalidParameter("prime bit length must be at least 4"))
        );
    }

    #[test]
    fn jacobi_examples_mod_77() {
        let n = BigUint::from(77u32);
        let j = |x: u32| jacobi(&BigUint::from(x), &n).unwrap();
        assert_eq!(j(1), JacobiSymbol::PlusOne);
        assert_eq!(j(7), JacobiSymbol::Zero);
        assert_eq!(j(37), JacobiSymbol::PlusOne);
        assert_eq!(j(5), JacobiSymbol::MinusOne);
        assert_eq!(j(25), JacobiSymbol::PlusOne);
        assert_eq!(j(3), JacobiSymbol::MinusOne);
    }

    #[test]
    fn jacobi_rejects_bad_modulus() {
        let x = BigUint::from(3u32);
        assert_eq!(jacobi(&x, &BigUint::from(8u32)), Err(Error::InvalidModulus));
        assert_eq!(jacobi(&x, &BigUint::from(1u32)), Err(Error::InvalidModulus));
    }

    #[test]
    fn jacobi_matches_factored_oracle_exhaustively() {
        let n = BigUint::from(77u32);
        for x in 0u64..77 {
            let expected = legendre(x, 7) * legendre(x, 11);
            let got = jacobi(&BigUint::from(x), &n).unwrap().value();
            assert_eq!(got, expected, "jacobi({x}, 77)");
        }
    }

    #[test]
    fn jacobi_is_multiplicative() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (pp, _) = gen_blum_modulus(24, &mut rng).unwrap();
        let n = pp.modulus();
        for _ in 0..200 {
            let x = sample_unit(n, &mut rng).unwrap();
            let y = sample_unit(n, &mut rng).unwrap();
            let lhs = jacobi(&((&x * &y) % n), n).unwrap();
            let rhs = jacobi(&x, n).unwrap() * jacobi(&y, n).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn blum_modulus_properties() {
        let (pp, msk) = toy();
        let n = pp.modulus();
        let minus_one = n - BigUint::one();
        assert_eq!(jacobi(&minus_one, n).unwrap(), JacobiSymbol::PlusOne);
        for x in 1u64..77 {
            let x = BigUint::from(x);
            if !x.gcd(n).is_one() {
                continue;
            }
            if qr_oracle(&x, &msk).unwrap() {
                assert_eq!(jacobi(&x, n).unwrap(), JacobiSymbol::PlusOne);
            }
        }
    }

    #[test]
    fn sqrt_extract_worked_examples() {
        let (_, msk) = toy();
        // exponent (77 + 5 - 7 - 11) / 8 = 8; 4^8 mod 77 = 9 and 9^2 ≡ 4.
        let r = sqrt_extract(&BigUint::from(4u32), &msk).unwrap();
        assert_eq!(r, BigUint::from(9u32));
        // 73 ≡ -4: same root, the -a branch.
        let r = sqrt_extract(&BigUint::from(73u32), &msk).unwrap();
        assert_eq!(r, BigUint::from(9u32));
        assert_eq!((&r * &r) % BigUint::from(77u32), BigUint::from(4u32));
        // 1 is its own root.
        assert_eq!(sqrt_extract(&BigUint::one(), &msk).unwrap(), BigUint::one());
        // Precondition: Jacobi symbol must be +1.
        assert_eq!(
            sqrt_extract(&BigUint::from(5u32), &msk),
            Err(Error::SymbolNotPlusOne)
        );
    }

    #[test]
    fn sqrt_extract_squares_to_plus_or_minus_a_exhaustively() {
        let (pp, msk) = toy();
        let n = pp.modulus();
        for a in 1u64..77 {
            let a = BigUint::from(a);
            if jacobi(&a, n).unwrap() != JacobiSymbol::PlusOne {
                continue;
            }
            let r = sqrt_extract(&a, &msk).unwrap();
            let r2 = (&r * &r) % n;
            assert!(r2 == a || r2 == n - &a, "a = {a}");
        }
    }

    #[test]
    fn hash_to_group_is_deterministic_and_well_formed() {
        let (pp, _) = toy();
        let a1 = hash_to_group(b"alice", &pp).unwrap();
        let a2 = hash_to_group(b"alice", &pp).unwrap();
        assert_eq!(a1, a2);
        assert!(a1.gcd(pp.modulus()).is_one());
        assert!(jacobi(&a1, pp.modulus()).unwrap().is_plus_one());
    }

    #[test]
    fn hash_to_group_separates_identities_at_scale() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (pp, _) = gen_blum_modulus(64, &mut rng).unwrap();
        let alice = hash_to_group(b"alice", &pp).unwrap();
        let bob = hash_to_group(b"bob", &pp).unwrap();
        assert_ne!(alice, bob);
        assert!(jacobi(&alice, pp.modulus()).unwrap().is_plus_one());
        assert!(jacobi(&bob, pp.modulus()).unwrap().is_plus_one());
    }

    #[test]
    fn sampled_units_have_requested_symbol() {
        let (pp, _) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for s in [JacobiSymbol::PlusOne, JacobiSymbol::MinusOne] {
            for _ in 0..50 {
                let t = sample_unit_with_symbol(&pp, s, &mut rng).unwrap();
                assert_eq!(jacobi(&t, pp.modulus()).unwrap(), s);
            }
        }
        assert!(sample_unit_with_symbol(&pp, JacobiSymbol::Zero, &mut rng).is_err());
    }

    #[test]
    fn nu_round_trip() {
        assert_eq!(nu_encode(false), JacobiSymbol::PlusOne);
        assert_eq!(nu_encode(true), JacobiSymbol::MinusOne);
        assert_eq!(nu_decode(JacobiSymbol::PlusOne).unwrap(), false);
        assert_eq!(nu_decode(JacobiSymbol::MinusOne).unwrap(), true);
        assert!(nu_decode(JacobiSymbol::Zero).is_err());
    }

    #[test]
    fn qr_oracle_examples() {
        let (_, msk) = toy();
        assert!(qr_oracle(&BigUint::from(4u32), &msk).unwrap());
        assert!(qr_oracle(&BigUint::from(25u32), &msk).unwrap());
        // 3 is not among the squares mod 77 (brute-force check below).
        assert!(!qr_oracle(&BigUint::from(3u32), &msk).unwrap());
        let squares: std::collections::HashSet<u64> = (1u64..77).map(|x| x * x % 77).collect();
        assert!(!squares.contains(&3));
        assert_eq!(qr_oracle(&BigUint::from(7u32), &msk), Err(Error::NotAUnit));
    }
}
