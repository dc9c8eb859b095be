//! The XOR-homomorphic identity-based scheme.
//!
//! Ciphertexts are pairs of ring elements `(c, d)` with `c ∈ G_a ⊂ R_a` and
//! `d ∈ G_{-a} ⊂ R_{-a}`, tagged with the public hash value `a = H(id)`.
//! Multiplication in the ring XORs the underlying plaintext bits, so linear
//! circuits over `Z_2` evaluate as products over the selected inputs.
//! Evaluation re-randomizes its output by multiplying with a fresh
//! encryption of zero, which makes evaluated ciphertexts distributed like
//! fresh ones.

use num_bigint::BigUint;
use rand::Rng;

use crate::cocks::IdentityKey;
use crate::error::{Error, Result};
use crate::numtheory::{
    hash_to_group, jacobi_unchecked, nu_decode, MasterSecret, PublicParams, REJECTION_CAP,
};
use crate::qring::{eval_at, galbraith, in_g, ring_mul, sample_s, RingCtx, RingElement};

/// Extracts an identity key; identical to the Cocks extraction.
pub use crate::cocks::keygen;
/// Generates the Blum modulus; identical to the Cocks setup.
pub use crate::cocks::setup;

/// A ciphertext: `c(x) ∈ R_a`, `d(x) ∈ R_{-a}` and the public hash value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub c: RingElement,
    pub d: RingElement,
    pub a: BigUint,
}

/// Number of `Z_N` payload elements in a ciphertext (the four polynomial
/// coefficients; the attribute value `a` is public context, not payload).
pub const PAYLOAD_ELEMENTS: usize = 4;

impl Ciphertext {
    /// Canonical fixed-width encoding: every field as a big-endian integer
    /// padded to the byte length of `N`. Used for size accounting; the
    /// length is a function of the parameters alone, never of the history
    /// of the ciphertext.
    pub fn to_bytes(&self, pp: &PublicParams) -> Vec<u8> {
        let width = pp.element_len();
        let mut out = Vec::with_capacity(5 * width);
        for field in [&self.c.c0, &self.c.c1, &self.d.c0, &self.d.c1, &self.a] {
            let bytes = field.to_bytes_be();
            out.extend(std::iter::repeat(0u8).take(width - bytes.len()));
            out.extend_from_slice(&bytes);
        }
        out
    }
}

/// A linear circuit over `Z_2`, represented by its selection vector: the
/// output is the XOR of the inputs at the selected positions. The all-zero
/// vector (constant-0 circuit) is legal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorCircuit {
    v: Vec<bool>,
}

impl XorCircuit {
    pub fn new(v: Vec<bool>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParameter("circuit must have at least one input"));
        }
        Ok(XorCircuit { v })
    }

    pub fn arity(&self) -> usize {
        self.v.len()
    }

    pub fn selection(&self) -> &[bool] {
        &self.v
    }

    /// Indices with `v_i = 1`.
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.v.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i)
    }

    /// Evaluates the circuit on plaintext bits.
    pub fn evaluate(&self, bits: &[bool]) -> Result<bool> {
        if bits.len() != self.v.len() {
            return Err(Error::LengthMismatch {
                expected: self.v.len(),
                actual: bits.len(),
            });
        }
        Ok(self.selected().fold(false, |acc, i| acc ^ bits[i]))
    }
}

/// Encrypts one bit under `id`: both components drawn independently by the
/// subroutine sampling `(t + a g^2 t^{-1}) + 2g x`, the second one in
/// `R_{-a}` (constant term `t - a g^2 t^{-1}`).
pub fn encrypt<R: Rng + ?Sized>(
    pp: &PublicParams,
    id: &[u8],
    bit: bool,
    rng: &mut R,
) -> Result<Ciphertext> {
    let a = hash_to_group(id, pp)?;
    encrypt_under_tag(pp, &a, bit, rng)
}

/// Encryption with a precomputed hash value, shared with the anonymized
/// scheme and the game runners.
pub fn encrypt_under_tag<R: Rng + ?Sized>(
    pp: &PublicParams,
    a: &BigUint,
    bit: bool,
    rng: &mut R,
) -> Result<Ciphertext> {
    let ctx_c = RingCtx::new(a.clone(), pp.modulus().clone())?;
    let ctx_d = ctx_c.negated();
    let c = sample_s(&ctx_c, bit, rng)?;
    let d = sample_s(&ctx_d, bit, rng)?;
    Ok(Ciphertext { c, d, a: a.clone() })
}

/// Decrypts by evaluating the component selected by `r^2 ≡ ±a` at `r`.
/// ⊥ when neither congruence holds or the selected component fails its
/// Galbraith test.
pub fn decrypt(pp: &PublicParams, sk: &IdentityKey, ct: &Ciphertext) -> Result<bool> {
    let n = pp.modulus();
    let r = sk.r();
    let r_sq = (r * r) % n;
    let ctx_c = RingCtx::new(ct.a.clone(), n.clone())?;
    let e = if r_sq == ct.a && in_g(&ctx_c, &ct.c) {
        &ct.c
    } else if r_sq == n - &ct.a && in_g(&ctx_c.negated(), &ct.d) {
        &ct.d
    } else {
        return Err(Error::AccessDenied);
    };
    nu_decode(jacobi_unchecked(&eval_at(e, r, n), n))
}

/// Homomorphic evaluation of a linear `Z_2` circuit. Aborts with ⊥ when the
/// inputs carry distinct hash values (evaluation across identities is
/// undefined by construction). The raw product is re-randomized with a fresh
/// encryption of zero, so the output is distributed like a fresh encryption
/// of the result bit.
pub fn eval<R: Rng + ?Sized>(
    pp: &PublicParams,
    circuit: &XorCircuit,
    cts: &[Ciphertext],
    rng: &mut R,
) -> Result<Ciphertext> {
    let raw = eval_without_rerandomize(pp, circuit, cts)?;
    let ctx_c = RingCtx::new(raw.a.clone(), pp.modulus().clone())?;
    let (c, d) = rerandomize_parts(&ctx_c, raw.c, raw.d, rng)?;
    Ok(Ciphertext { c, d, a: raw.a })
}

/// The raw homomorphic product, without the final re-randomization.
///
/// Exposed for the cost benchmark (this is exactly the eight-multiplication
/// combine per pair) and as the negative control in the strong-homomorphism
/// statistics; `eval` is the scheme operation.
pub fn eval_without_rerandomize(
    pp: &PublicParams,
    circuit: &XorCircuit,
    cts: &[Ciphertext],
) -> Result<Ciphertext> {
    if cts.len() != circuit.arity() {
        return Err(Error::LengthMismatch {
            expected: circuit.arity(),
            actual: cts.len(),
        });
    }
    let a = &cts[0].a;
    if cts.iter().any(|ct| &ct.a != a) {
        return Err(Error::AccessDenied);
    }
    let ctx_c = RingCtx::new(a.clone(), pp.modulus().clone())?;
    let ctx_d = ctx_c.negated();
    let mut c_acc: Option<RingElement> = None;
    let mut d_acc: Option<RingElement> = None;
    for i in circuit.selected() {
        c_acc = Some(match c_acc {
            None => cts[i].c.clone(),
            Some(acc) => ring_mul(&ctx_c, &acc, &cts[i].c),
        });
        d_acc = Some(match d_acc {
            None => cts[i].d.clone(),
            Some(acc) => ring_mul(&ctx_d, &acc, &cts[i].d),
        });
    }
    // Empty selection: the product over nothing is the ring identity, and
    // the re-randomization in `eval` turns it into an encryption of zero.
    Ok(Ciphertext {
        c: c_acc.unwrap_or_else(RingElement::one),
        d: d_acc.unwrap_or_else(RingElement::one),
        a: a.clone(),
    })
}

/// Re-randomizes a valid ciphertext by multiplying both components with a
/// fresh encryption of zero. Decrypts identically; the output is distributed
/// like a fresh encryption of the same bit.
pub fn rerandomize<R: Rng + ?Sized>(
    pp: &PublicParams,
    ct: &Ciphertext,
    rng: &mut R,
) -> Result<Ciphertext> {
    if !is_valid(pp, ct) {
        return Err(Error::MalformedCiphertext("re-randomization of an invalid ciphertext"));
    }
    let ctx_c = RingCtx::new(ct.a.clone(), pp.modulus().clone())?;
    let (c, d) = rerandomize_parts(&ctx_c, ct.c.clone(), ct.d.clone(), rng)?;
    Ok(Ciphertext {
        c,
        d,
        a: ct.a.clone(),
    })
}

/// Multiplies the accumulated components by fresh encryptions of zero until
/// every output coefficient is a unit.
///
/// Fresh encryptions always have unit coefficients, but ring products can
/// acquire coefficients sharing a factor with `N`; such an output would be
/// trivially distinguishable from a fresh ciphertext. Layering further
/// zero-encryptions restores the fresh distribution exactly (conditioned on
/// unit coefficients the product of fresh components is uniform on the image
/// of the encryption sampler). At cryptographic sizes the first layer
/// already succeeds with overwhelming probability; at toy sizes a few layers
/// may be needed.
fn rerandomize_parts<R: Rng + ?Sized>(
    ctx_c: &RingCtx,
    mut c: RingElement,
    mut d: RingElement,
    rng: &mut R,
) -> Result<(RingElement, RingElement)> {
    let ctx_d = ctx_c.negated();
    let n = ctx_c.modulus();
    for _ in 0..REJECTION_CAP {
        let cz = sample_s(ctx_c, false, rng)?;
        let dz = sample_s(&ctx_d, false, rng)?;
        c = ring_mul(ctx_c, &c, &cz);
        d = ring_mul(&ctx_d, &d, &dz);
        if c.has_unit_coefficients(n) && d.has_unit_coefficients(n) {
            return Ok((c, d));
        }
    }
    Err(Error::IterationCapExceeded("re-randomizing a ciphertext"))
}

/// Ciphertext validity: both components pass their Galbraith tests. This is
/// the public decision predicate for the ciphertext space; honest
/// encryptions and evaluation outputs always satisfy it.
pub fn is_valid(pp: &PublicParams, ct: &Ciphertext) -> bool {
    let Ok(ctx_c) = RingCtx::new(ct.a.clone(), pp.modulus().clone()) else {
        return false;
    };
    galbraith(&ctx_c, &ct.c).is_plus_one() && galbraith(&ctx_c.negated(), &ct.d).is_plus_one()
}

/// Test support: finds an identity (from a deterministic sequence) whose
/// hash lands on the requested quadratic-residuosity side, so both decrypt
/// branches can be exercised at toy scale.
pub fn find_identity_on_branch(
    pp: &PublicParams,
    msk: &MasterSecret,
    qr_side: bool,
) -> Result<Vec<u8>> {
    for i in 0..4096u32 {
        let id = format!("probe-{i}").into_bytes();
        let a = hash_to_group(&id, pp)?;
        if crate::numtheory::qr_oracle(&a, msk)? == qr_side {
            return Ok(id);
        }
    }
    Err(Error::IterationCapExceeded("searching for a branch identity"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::qr_oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn b(x: u32) -> BigUint {
        BigUint::from(x)
    }

    fn toy() -> (PublicParams, MasterSecret) {
        let pp = PublicParams::from_parts(b(77), 4).unwrap();
        let msk = MasterSecret::from_parts(b(7), b(11)).unwrap();
        (pp, msk)
    }

    fn elem(c0: u32, c1: u32) -> RingElement {
        RingElement::new(b(c0), b(c1))
    }

    #[test]
    fn worked_decrypt_examples() {
        // Crafted ciphertexts under a = 4 with key r = 9 (9^2 ≡ 4 mod 77).
        let (pp, _) = toy();
        let sk = IdentityKey::from_parts(b"crafted".to_vec(), b(9));
        let filler = elem(31, 2); // a valid R_{-4} component
        let ct0 = Ciphertext { c: elem(19, 2), d: filler.clone(), a: b(4) };
        assert_eq!(decrypt(&pp, &sk, &ct0).unwrap(), false);
        let ct1 = Ciphertext { c: elem(30, 2), d: filler, a: b(4) };
        assert_eq!(decrypt(&pp, &sk, &ct1).unwrap(), true);
    }

    #[test]
    fn worked_eval_example() {
        // (19,2) encrypts 0 and (30,2) encrypts 1 under a = 4; their raw
        // product is (47,21), which evaluates at r = 9 to 5 with Jacobi -1,
        // i.e. the XOR bit 1. Re-randomization changes the ciphertext but
        // not the plaintext.
        let (pp, _) = toy();
        let sk = IdentityKey::from_parts(b"crafted".to_vec(), b(9));
        let d_filler = elem(31, 2);
        let ct0 = Ciphertext { c: elem(19, 2), d: d_filler.clone(), a: b(4) };
        let ct1 = Ciphertext { c: elem(30, 2), d: d_filler, a: b(4) };
        let circuit = XorCircuit::new(vec![true, true]).unwrap();
        let raw = eval_without_rerandomize(&pp, &circuit, &[ct0.clone(), ct1.clone()]).unwrap();
        assert_eq!(raw.c, elem(47, 21));
        assert_eq!(decrypt(&pp, &sk, &raw).unwrap(), true);
        let mut rng = ChaCha20Rng::seed_from_u64(20);
        let rerandomized = eval(&pp, &circuit, &[ct0, ct1], &mut rng).unwrap();
        assert_ne!(rerandomized.c, elem(47, 21));
        assert_eq!(decrypt(&pp, &sk, &rerandomized).unwrap(), true);
    }

    #[test]
    fn round_trip_on_both_branches() {
        let (pp, msk) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for qr_side in [true, false] {
            let id = find_identity_on_branch(&pp, &msk, qr_side).unwrap();
            let a = hash_to_group(&id, &pp).unwrap();
            assert_eq!(qr_oracle(&a, &msk).unwrap(), qr_side);
            let sk = keygen(&pp, &msk, &id).unwrap();
            for bit in [false, true] {
                for _ in 0..25 {
                    let ct = encrypt(&pp, &id, bit, &mut rng).unwrap();
                    assert!(is_valid(&pp, &ct));
                    assert_eq!(decrypt(&pp, &sk, &ct).unwrap(), bit);
                }
            }
        }
    }

    #[test]
    fn unrelated_key_is_access_denied() {
        let (pp, msk) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let n = pp.modulus();
        let a_alice = hash_to_group(b"alice", &pp).unwrap();
        let other = (0u32..200)
            .map(|i| format!("user{i}").into_bytes())
            .find(|id| {
                let a = hash_to_group(id, &pp).unwrap();
                a != a_alice && a != n - &a_alice
            })
            .unwrap();
        let sk = keygen(&pp, &msk, &other).unwrap();
        let ct = encrypt(&pp, b"alice", false, &mut rng).unwrap();
        assert_eq!(decrypt(&pp, &sk, &ct), Err(Error::AccessDenied));
    }

    #[test]
    fn eval_rejects_mismatched_attributes() {
        let (pp, _) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let ct_a = encrypt(&pp, b"alice", false, &mut rng).unwrap();
        let ct_b = encrypt(&pp, b"bob", true, &mut rng).unwrap();
        assert_ne!(ct_a.a, ct_b.a);
        let circuit = XorCircuit::new(vec![true, true]).unwrap();
        assert_eq!(
            eval(&pp, &circuit, &[ct_a.clone(), ct_b], &mut rng),
            Err(Error::AccessDenied)
        );
        // Arity mismatch is a protocol error, not ⊥.
        assert_eq!(
            eval(&pp, &circuit, &[ct_a], &mut rng),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        );
    }

    #[test]
    fn constant_zero_circuit_decrypts_to_zero() {
        let (pp, msk) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(24);
        let sk = keygen(&pp, &msk, b"alice").unwrap();
        let cts: Vec<_> = (0..3)
            .map(|i| encrypt(&pp, b"alice", i % 2 == 0, &mut rng).unwrap())
            .collect();
        let circuit = XorCircuit::new(vec![false, false, false]).unwrap();
        let out = eval(&pp, &circuit, &cts, &mut rng).unwrap();
        assert!(is_valid(&pp, &out));
        assert_eq!(decrypt(&pp, &sk, &out).unwrap(), false);
    }

    #[test]
    fn homomorphic_correctness_exhaustive_small_circuits() {
        let (pp, msk) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(25);
        let sk = keygen(&pp, &msk, b"alice").unwrap();
        for len in 1usize..=3 {
            for circuit_bits in 0u32..(1 << len) {
                let v: Vec<bool> = (0..len).map(|i| circuit_bits >> i & 1 == 1).collect();
                let circuit = XorCircuit::new(v).unwrap();
                for input_bits in 0u32..(1 << len) {
                    let bits: Vec<bool> = (0..len).map(|i| input_bits >> i & 1 == 1).collect();
                    let cts: Vec<_> = bits
                        .iter()
                        .map(|&bit| encrypt(&pp, b"alice", bit, &mut rng).unwrap())
                        .collect();
                    let out = eval(&pp, &circuit, &cts, &mut rng).unwrap();
                    let expected = circuit.evaluate(&bits).unwrap();
                    assert_eq!(decrypt(&pp, &sk, &out).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn eval_outputs_are_valid_and_compact() {
        let (pp, _) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(26);
        let fresh = encrypt(&pp, b"alice", true, &mut rng).unwrap();
        let fresh_len = fresh.to_bytes(&pp).len();
        for len in [1usize, 2, 4, 8] {
            let cts: Vec<_> = (0..len)
                .map(|i| encrypt(&pp, b"alice", i % 2 == 1, &mut rng).unwrap())
                .collect();
            let circuit = XorCircuit::new(vec![true; len]).unwrap();
            let out = eval(&pp, &circuit, &cts, &mut rng).unwrap();
            assert!(is_valid(&pp, &out));
            assert_eq!(out.to_bytes(&pp).len(), fresh_len);
        }
    }

    #[test]
    fn rerandomize_preserves_plaintext_and_changes_ciphertext() {
        let (pp, msk) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(27);
        let sk = keygen(&pp, &msk, b"alice").unwrap();
        for _ in 0..50 {
            let bit = rng.gen_bool(0.5);
            let ct = encrypt(&pp, b"alice", bit, &mut rng).unwrap();
            let rr = rerandomize(&pp, &ct, &mut rng).unwrap();
            assert_eq!(decrypt(&pp, &sk, &rr).unwrap(), bit);
            assert_ne!(rr, ct);
        }
        // Invalid input is rejected up front.
        let bogus = Ciphertext { c: elem(18, 2), d: elem(31, 2), a: b(4) };
        assert!(matches!(
            rerandomize(&pp, &bogus, &mut rng),
            Err(Error::MalformedCiphertext(_))
        ));
    }

    #[test]
    fn validity_examples() {
        let (pp, _) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(28);
        let ct = encrypt(&pp, b"alice", false, &mut rng).unwrap();
        assert!(is_valid(&pp, &ct));
        let bad = Ciphertext { c: elem(18, 2), d: ct.d.clone(), a: b(4) };
        assert!(!is_valid(&pp, &bad));
    }

    #[test]
    fn circuit_type_invariants() {
        assert!(XorCircuit::new(vec![]).is_err());
        let c = XorCircuit::new(vec![true, false, true]).unwrap();
        assert_eq!(c.arity(), 3);
        assert_eq!(c.evaluate(&[true, true, false]).unwrap(), true);
        assert_eq!(c.evaluate(&[true, true, true]).unwrap(), false);
        assert!(c.evaluate(&[true]).is_err());
    }
}
