//! Universal ciphertext anonymizer and the induced anonymous scheme.
//!
//! Anyone can mask a ciphertext: both components are blinded with uniform
//! polynomials and buried in mask lists of length `m = λ` at a
//! geometrically distributed position, with earlier positions forced to
//! fail the Galbraith test. Recovering the components requires the
//! attribute tag `α = H(id)`, which is exactly what makes the composed
//! scheme non-universally homomorphic: evaluation needs `α`, everyone else
//! learns nothing about the identity.
//!
//! Note on recovery: the unmasking scan computes `t_i - z_1`, which is the
//! negation of the original component. Negation changes neither the
//! Galbraith test nor decryption (the Jacobi symbol of -1 is +1 for a Blum
//! modulus), so the round trip is behavioral equivalence rather than
//! bitwise identity. This also means decryption of an anonymized ciphertext
//! under a mismatched key yields an unpredictable bit rather than ⊥ -- the
//! mismatch is undetectable, which is the point of anonymity.

use num_bigint::BigUint;
use rand::Rng;

use crate::cocks::IdentityKey;
use crate::error::{Error, Result};
use crate::numtheory::{
    hash_to_group, jacobi_unchecked, JacobiSymbol, PublicParams, REJECTION_CAP,
};
use crate::qring::{galbraith, RingCtx, RingElement};
use crate::xhibe::{self, Ciphertext, XorCircuit};

/// Anonymizer parameters: mask-list length `m = λ` and the bit length of
/// `N`. An anonymized ciphertext holds `2(m + 1)` ring elements, i.e.
/// `2(m + 1) · lg N` bits of coefficient payload per component pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnonParams {
    m: usize,
    log_n: u64,
}

impl AnonParams {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn log_n(&self) -> u64 {
        self.log_n
    }
}

/// Derives the anonymizer parameters from the public parameters: `m` is the
/// prime bit length (the security parameter). Deterministic.
pub fn anon_params(pp: &PublicParams) -> AnonParams {
    AnonParams {
        m: pp.bits() as usize,
        log_n: pp.modulus().bits(),
    }
}

/// The attribute tag `α = Q_A(id) = H(id)`; also the value `Q_F` assigns to
/// the point predicate for `id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeTag {
    alpha: BigUint,
}

impl AttributeTag {
    /// Wraps an explicit tag value, enforcing the Jacobi(+1) invariant.
    pub fn new(pp: &PublicParams, alpha: BigUint) -> Result<Self> {
        if jacobi_unchecked(&alpha, pp.modulus()) != JacobiSymbol::PlusOne {
            return Err(Error::SymbolNotPlusOne);
        }
        Ok(AttributeTag { alpha })
    }

    /// `Q_A(id)`: hashes the identity onto `Z*_N[+1]`.
    pub fn from_identity(pp: &PublicParams, id: &[u8]) -> Result<Self> {
        Ok(AttributeTag {
            alpha: hash_to_group(id, pp)?,
        })
    }

    pub fn alpha(&self) -> &BigUint {
        &self.alpha
    }
}

/// A masked ciphertext: `(z1, t_1..t_m, z2, v_1..v_m)`, carrying no
/// attribute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnonCiphertext {
    pub z1: RingElement,
    pub tlist: Vec<RingElement>,
    pub z2: RingElement,
    pub vlist: Vec<RingElement>,
}

impl AnonCiphertext {
    /// Total number of ring elements: `2(m + 1)`.
    pub fn element_count(&self) -> usize {
        2 + self.tlist.len() + self.vlist.len()
    }

    /// Canonical fixed-width encoding (two coefficients per element).
    pub fn to_bytes(&self, pp: &PublicParams) -> Vec<u8> {
        let width = pp.element_len();
        let mut out = Vec::with_capacity(self.element_count() * 2 * width);
        let mut push = |x: &BigUint| {
            let bytes = x.to_bytes_be();
            out.extend(std::iter::repeat(0u8).take(width - bytes.len()));
            out.extend_from_slice(&bytes);
        };
        for e in [&self.z1]
            .into_iter()
            .chain(&self.tlist)
            .chain([&self.z2])
            .chain(&self.vlist)
        {
            push(&e.c0);
            push(&e.c1);
        }
        out
    }
}

/// Geometric(1/2) on {1, 2, ...} clamped to `m`, drawn as coin flips.
fn clamped_geometric<R: Rng + ?Sized>(m: usize, rng: &mut R) -> usize {
    let mut k = 1;
    while k < m && rng.gen_bool(0.5) {
        k += 1;
    }
    k
}

fn random_poly<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> RingElement {
    use num_bigint::RandBigInt;
    RingElement::new(rng.gen_biguint_below(n), rng.gen_biguint_below(n))
}

/// Builds one mask list: position `k` hides the real mask, positions before
/// it are resampled until they fail the Galbraith test against `z`, and the
/// remaining positions are unconstrained.
fn mask_list<R: Rng + ?Sized>(
    ctx: &RingCtx,
    z: &RingElement,
    real_mask: RingElement,
    m: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<RingElement>> {
    let n = ctx.modulus();
    let mut list = Vec::with_capacity(m);
    for _ in 1..k {
        let mut accepted = None;
        for _ in 0..REJECTION_CAP {
            let candidate = random_poly(n, rng);
            if galbraith(ctx, &z.sub(&candidate, n)) == JacobiSymbol::MinusOne {
                accepted = Some(candidate);
                break;
            }
        }
        list.push(accepted.ok_or(Error::IterationCapExceeded("sampling a decoy mask"))?);
    }
    list.push(real_mask);
    for _ in k..m {
        list.push(random_poly(n, rng));
    }
    Ok(list)
}

/// Masks a valid ciphertext. Output length is always `2(m + 1)` ring
/// elements and carries no attribute value.
pub fn anonymize<R: Rng + ?Sized>(
    pp: &PublicParams,
    ap: &AnonParams,
    ct: &Ciphertext,
    rng: &mut R,
) -> Result<AnonCiphertext> {
    if !xhibe::is_valid(pp, ct) {
        return Err(Error::MalformedCiphertext("anonymizing an invalid ciphertext"));
    }
    let n = pp.modulus();
    let ctx_c = RingCtx::new(ct.a.clone(), n.clone())?;
    let ctx_d = ctx_c.negated();
    let k1 = clamped_geometric(ap.m, rng);
    let k2 = clamped_geometric(ap.m, rng);
    let t_mask = random_poly(n, rng);
    let v_mask = random_poly(n, rng);
    let z1 = ct.c.add(&t_mask, n);
    let z2 = ct.d.add(&v_mask, n);
    let tlist = mask_list(&ctx_c, &z1, t_mask, ap.m, k1, rng)?;
    let vlist = mask_list(&ctx_d, &z2, v_mask, ap.m, k2, rng)?;
    Ok(AnonCiphertext { z1, tlist, z2, vlist })
}

/// Recovers a ciphertext from its masked form: scans each list for the
/// first position whose difference against `z` passes the Galbraith test
/// under the supplied tag. With the wrong tag the scan either exhausts the
/// list or recovers garbage that no honest key decrypts to a wrong bit.
pub fn deanonymize(
    pp: &PublicParams,
    ap: &AnonParams,
    alpha: &AttributeTag,
    anon: &AnonCiphertext,
) -> Result<Ciphertext> {
    if anon.tlist.len() != ap.m || anon.vlist.len() != ap.m {
        return Err(Error::MalformedCiphertext("mask list length does not match parameters"));
    }
    let n = pp.modulus();
    let ctx_c = RingCtx::new(alpha.alpha().clone(), n.clone())?;
    let ctx_d = ctx_c.negated();
    let scan = |ctx: &RingCtx, z: &RingElement, list: &[RingElement]| -> Result<RingElement> {
        for mask in list {
            let candidate = mask.sub(z, n);
            if galbraith(ctx, &candidate) == JacobiSymbol::PlusOne {
                return Ok(candidate);
            }
        }
        Err(Error::MaskScanExhausted)
    };
    let c = scan(&ctx_c, &anon.z1, &anon.tlist)?;
    let d = scan(&ctx_d, &anon.z2, &anon.vlist)?;
    Ok(Ciphertext {
        c,
        d,
        a: alpha.alpha().clone(),
    })
}

/// The anonymous scheme's encryption: mask a fresh ciphertext.
pub fn encrypt<R: Rng + ?Sized>(
    pp: &PublicParams,
    ap: &AnonParams,
    id: &[u8],
    bit: bool,
    rng: &mut R,
) -> Result<AnonCiphertext> {
    let ct = xhibe::encrypt(pp, id, bit, rng)?;
    anonymize(pp, ap, &ct, rng)
}

/// The anonymous scheme's decryption: recover with the tag the key's
/// predicate maps to, then decrypt.
pub fn decrypt(
    pp: &PublicParams,
    ap: &AnonParams,
    sk: &IdentityKey,
    anon: &AnonCiphertext,
) -> Result<bool> {
    let alpha = AttributeTag::from_identity(pp, sk.id())?;
    let ct = deanonymize(pp, ap, &alpha, anon)?;
    xhibe::decrypt(pp, sk, &ct)
}

/// The anonymous scheme's evaluation. The caller must supply the attribute
/// tag -- this is precisely the non-universal property: evaluation requires
/// identity-derived information, an arbitrary party holds none.
pub fn eval<R: Rng + ?Sized>(
    pp: &PublicParams,
    ap: &AnonParams,
    alpha: &AttributeTag,
    circuit: &XorCircuit,
    anons: &[AnonCiphertext],
    rng: &mut R,
) -> Result<AnonCiphertext> {
    let cts = anons
        .iter()
        .map(|anon| deanonymize(pp, ap, alpha, anon))
        .collect::<Result<Vec<_>>>()?;
    let out = xhibe::eval(pp, circuit, &cts, rng)?;
    anonymize(pp, ap, &out, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::MasterSecret;
    use crate::xhibe::find_identity_on_branch;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn b(x: u32) -> BigUint {
        BigUint::from(x)
    }

    fn toy() -> (PublicParams, MasterSecret, AnonParams) {
        let pp = PublicParams::from_parts(b(77), 4).unwrap();
        let msk = MasterSecret::from_parts(b(7), b(11)).unwrap();
        let ap = anon_params(&pp);
        (pp, msk, ap)
    }

    #[test]
    fn params_derivation() {
        let (pp, _, ap) = toy();
        assert_eq!(ap.m(), 4);
        assert_eq!(ap.log_n(), 7);
        assert_eq!(anon_params(&pp), ap);
    }

    #[test]
    fn output_shape_and_mask_positions() {
        let (pp, _, ap) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(40);
        let a = hash_to_group(b"alice", &pp).unwrap();
        let ctx = RingCtx::new(a, pp.modulus().clone()).unwrap();
        for _ in 0..200 {
            let ct = xhibe::encrypt(&pp, b"alice", rng.gen_bool(0.5), &mut rng).unwrap();
            let anon = anonymize(&pp, &ap, &ct, &mut rng).unwrap();
            assert_eq!(anon.element_count(), 2 * (ap.m() + 1));
            // The first hit position carries the real mask; everything
            // before it fails the test by construction.
            let n = pp.modulus();
            let hit = anon
                .tlist
                .iter()
                .position(|t| galbraith(&ctx, &t.sub(&anon.z1, n)) == JacobiSymbol::PlusOne)
                .expect("real mask position must pass");
            for t in &anon.tlist[..hit] {
                assert_eq!(galbraith(&ctx, &t.sub(&anon.z1, n)), JacobiSymbol::MinusOne);
            }
        }
    }

    #[test]
    fn clamped_geometric_law() {
        // P(k = j) = 2^-j for j < m, with the tail mass collapsed onto m.
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let m = 4;
        let trials = 40_000u32;
        let mut counts = [0u64; 4];
        for _ in 0..trials {
            counts[clamped_geometric(m, &mut rng) - 1] += 1;
        }
        let expected = [0.5, 0.25, 0.125, 0.125];
        let chi = crate::games::stats::chi_square_gof(&counts, &expected);
        assert!(chi.p_value > 0.01, "chi-square p = {}", chi.p_value);
    }

    #[test]
    fn round_trip_recovers_negated_components_behaviorally() {
        let (pp, msk, ap) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for qr_side in [true, false] {
            let id = find_identity_on_branch(&pp, &msk, qr_side).unwrap();
            let sk = crate::cocks::keygen(&pp, &msk, &id).unwrap();
            let alpha = AttributeTag::from_identity(&pp, &id).unwrap();
            let n = pp.modulus();
            for bit in [false, true] {
                for _ in 0..25 {
                    let ct = xhibe::encrypt(&pp, &id, bit, &mut rng).unwrap();
                    let anon = anonymize(&pp, &ap, &ct, &mut rng).unwrap();
                    let back = deanonymize(&pp, &ap, &alpha, &anon).unwrap();
                    // Recovery negates both components; nothing observable changes.
                    assert_eq!(back.c, ct.c.neg(n));
                    assert_eq!(back.d, ct.d.neg(n));
                    assert!(xhibe::is_valid(&pp, &back));
                    assert_eq!(xhibe::decrypt(&pp, &sk, &back).unwrap(), bit);
                }
            }
        }
    }

    #[test]
    fn recovered_ciphertexts_keep_homomorphic_capacity() {
        let (pp, msk, ap) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(43);
        let sk = crate::cocks::keygen(&pp, &msk, b"alice").unwrap();
        let alpha = AttributeTag::from_identity(&pp, b"alice").unwrap();
        let circuit = XorCircuit::new(vec![true, true]).unwrap();
        for bits in [(false, true), (true, true), (false, false)] {
            let ct1 = xhibe::encrypt(&pp, b"alice", bits.0, &mut rng).unwrap();
            let ct2 = xhibe::encrypt(&pp, b"alice", bits.1, &mut rng).unwrap();
            let r1 = deanonymize(&pp, &ap, &alpha, &anonymize(&pp, &ap, &ct1, &mut rng).unwrap()).unwrap();
            let r2 = deanonymize(&pp, &ap, &alpha, &anonymize(&pp, &ap, &ct2, &mut rng).unwrap()).unwrap();
            let out = xhibe::eval(&pp, &circuit, &[r1, r2], &mut rng).unwrap();
            assert_eq!(xhibe::decrypt(&pp, &sk, &out).unwrap(), bits.0 ^ bits.1);
        }
    }

    #[test]
    fn wrong_tag_never_yields_a_wrong_bit_under_the_true_key() {
        let (pp, msk, ap) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(44);
        let n = pp.modulus();
        let a_alice = hash_to_group(b"alice", &pp).unwrap();
        // A tag from an identity whose hash differs from alice's in both signs.
        let other = (0u32..200)
            .map(|i| format!("user{i}").into_bytes())
            .find(|id| {
                let a = hash_to_group(id, &pp).unwrap();
                a != a_alice && a != n - &a_alice
            })
            .unwrap();
        let wrong = AttributeTag::from_identity(&pp, &other).unwrap();
        let sk_alice = crate::cocks::keygen(&pp, &msk, b"alice").unwrap();
        for _ in 0..300 {
            let bit = rng.gen_bool(0.5);
            let ct = xhibe::encrypt(&pp, b"alice", bit, &mut rng).unwrap();
            let anon = anonymize(&pp, &ap, &ct, &mut rng).unwrap();
            match deanonymize(&pp, &ap, &wrong, &anon) {
                // Scan missed everywhere: detected corruption.
                Err(Error::MaskScanExhausted) => {}
                Err(e) => panic!("unexpected error {e:?}"),
                Ok(garbage) => {
                    // The recovered data carries the wrong tag, so the true
                    // key must refuse it; it may never decrypt to a bit.
                    assert_eq!(
                        xhibe::decrypt(&pp, &sk_alice, &garbage),
                        Err(Error::AccessDenied)
                    );
                }
            }
        }
    }

    #[test]
    fn composed_scheme_round_trip_and_eval() {
        let (pp, msk, ap) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(45);
        let sk = crate::cocks::keygen(&pp, &msk, b"alice").unwrap();
        let alpha = AttributeTag::from_identity(&pp, b"alice").unwrap();
        for bit in [false, true] {
            let anon = encrypt(&pp, &ap, b"alice", bit, &mut rng).unwrap();
            assert_eq!(decrypt(&pp, &ap, &sk, &anon).unwrap(), bit);
        }
        let a0 = encrypt(&pp, &ap, b"alice", false, &mut rng).unwrap();
        let a1 = encrypt(&pp, &ap, b"alice", true, &mut rng).unwrap();
        let circuit = XorCircuit::new(vec![true, true]).unwrap();
        let out = eval(&pp, &ap, &alpha, &circuit, &[a0, a1], &mut rng).unwrap();
        assert_eq!(decrypt(&pp, &ap, &sk, &out).unwrap(), true);
    }

    #[test]
    fn eval_with_wrong_tag_destroys_the_computation() {
        // With the wrong tag the unmasking scans recover noise, so the
        // evaluation either fails outright or produces an output whose
        // decryption is independent of the true circuit result. (Anonymity
        // cuts both ways: the garbage is not detectable as garbage, so a
        // coin-like bit comes back rather than ⊥.)
        let (pp, msk, ap) = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(46);
        let n = pp.modulus();
        let a_alice = hash_to_group(b"alice", &pp).unwrap();
        let other = (0u32..200)
            .map(|i| format!("user{i}").into_bytes())
            .find(|id| {
                let a = hash_to_group(id, &pp).unwrap();
                a != a_alice && a != n - &a_alice
            })
            .unwrap();
        let wrong = AttributeTag::from_identity(&pp, &other).unwrap();
        let sk = crate::cocks::keygen(&pp, &msk, b"alice").unwrap();
        let circuit = XorCircuit::new(vec![true, true]).unwrap();
        let trials = 400u32;
        let mut agreements = 0u32;
        let mut decisions = 0u32;
        for _ in 0..trials {
            let b0 = rng.gen_bool(0.5);
            let b1 = rng.gen_bool(0.5);
            let a0 = encrypt(&pp, &ap, b"alice", b0, &mut rng).unwrap();
            let a1 = encrypt(&pp, &ap, b"alice", b1, &mut rng).unwrap();
            match eval(&pp, &ap, &wrong, &circuit, &[a0, a1], &mut rng) {
                Err(_) => {}
                Ok(out) => {
                    if let Ok(bit) = decrypt(&pp, &ap, &sk, &out) {
                        decisions += 1;
                        agreements += u32::from(bit == (b0 ^ b1));
                    }
                }
            }
        }
        assert!(decisions > 0, "expected some garbage decryptions at toy scale");
        let rate = agreements as f64 / decisions as f64;
        assert!(
            (rate - 0.5).abs() < 0.12,
            "wrong-tag output correlates with the true result: {rate}"
        );
    }
}
