//! Toy-scale enumeration oracles and the strong-homomorphism statistic.
//!
//! Everything here brute-forces over `Z_N x Z_N` and decides quadratic
//! residuosity with the master secret, so it only runs on moduli small
//! enough to enumerate. These are verification tools, not scheme
//! operations.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::numtheory::{
    hash_to_group, jacobi_unchecked, nu_encode, qr_oracle, sqrt_extract, JacobiSymbol,
    MasterSecret, PublicParams,
};
use crate::qring::{eval_at, galbraith, in_g, RingCtx, RingElement};
use crate::xhibe::{self, Ciphertext, XorCircuit};

use super::stats::{chi_square_two_sample, ChiSquare};

/// Largest modulus the enumeration oracles accept.
pub const MAX_ENUM_MODULUS: u64 = 10_000;

fn small_modulus(pp: &PublicParams) -> Result<u64> {
    pp.modulus()
        .to_u64()
        .filter(|&n| n <= MAX_ENUM_MODULUS)
        .ok_or(Error::EnumerationTooLarge)
}

/// All elements of `G_a` (Galbraith test +1) for a toy modulus.
pub fn enumerate_g(ctx: &RingCtx) -> Result<Vec<RingElement>> {
    let n = ctx
        .modulus()
        .to_u64()
        .filter(|&n| n <= MAX_ENUM_MODULUS)
        .ok_or(Error::EnumerationTooLarge)?;
    let mut out = Vec::new();
    for c0 in 0..n {
        for c1 in 0..n {
            let e = RingElement::new(BigUint::from(c0), BigUint::from(c1));
            if in_g(ctx, &e) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// All elements of the subgroup of honest-form elements for square
/// parameter `a`: Galbraith argument a unit and a quadratic residue, with a
/// unit constant coefficient. Decided with the master secret.
pub fn enumerate_s(pp: &PublicParams, msk: &MasterSecret, a: &BigUint) -> Result<Vec<RingElement>> {
    let n = small_modulus(pp)?;
    let nb = pp.modulus();
    let ctx = RingCtx::new(a.clone(), nb.clone())?;
    let mut out = Vec::new();
    for c0 in 0..n {
        for c1 in 0..n {
            let e = RingElement::new(BigUint::from(c0), BigUint::from(c1));
            if galbraith(&ctx, &e) != JacobiSymbol::PlusOne {
                continue;
            }
            if !e.c0.gcd(nb).is_one() {
                continue;
            }
            let z = galbraith_argument(&ctx, &e);
            if qr_oracle(&z, msk)? {
                out.push(e);
            }
        }
    }
    Ok(out)
}

fn galbraith_argument(ctx: &RingCtx, c: &RingElement) -> BigUint {
    let n = ctx.modulus();
    let c0sq = (&c.c0 * &c.c0) % n;
    let ac1sq = (ctx.a() * ((&c.c1 * &c.c1) % n)) % n;
    (&c0sq + n - &ac1sq) % n
}

/// The subset of [`enumerate_s`] decrypting to `bit` under the key `r`
/// (meaningful on the side with `r^2 ≡ a`).
pub fn enumerate_s_coset(
    pp: &PublicParams,
    msk: &MasterSecret,
    a: &BigUint,
    r: &BigUint,
    bit: bool,
) -> Result<Vec<RingElement>> {
    let n = pp.modulus();
    let target = nu_encode(bit);
    Ok(enumerate_s(pp, msk, a)?
        .into_iter()
        .filter(|e| jacobi_unchecked(&eval_at(e, r, n), n) == target)
        .collect())
}

/// The image of the encryption sampler inside [`enumerate_s_coset`]: both
/// coefficients are units there.
pub fn enumerate_fresh_support(
    pp: &PublicParams,
    msk: &MasterSecret,
    a: &BigUint,
    r: &BigUint,
    bit: bool,
) -> Result<Vec<RingElement>> {
    let n = pp.modulus();
    Ok(enumerate_s_coset(pp, msk, a, r, bit)?
        .into_iter()
        .filter(|e| e.c1.gcd(n).is_one())
        .collect())
}

/// Two-sample chi-square comparison between homomorphic-evaluation outputs
/// and fresh encryptions of the circuit result, binned over the enumerated
/// coset of honest-form elements.
///
/// The decrypting component (the one on the quadratic-residue side of the
/// key) is histogrammed. With re-randomization enabled this is the
/// strong-homomorphism check; with it disabled it is the negative control,
/// which fails decisively because raw ring products leave the image of the
/// encryption sampler with constant probability at toy scale.
pub fn strong_hom_test<R: Rng + ?Sized>(
    pp: &PublicParams,
    msk: &MasterSecret,
    id: &[u8],
    circuit: &XorCircuit,
    inputs: &[bool],
    trials: u32,
    rerandomize: bool,
    rng: &mut R,
) -> Result<ChiSquare> {
    small_modulus(pp)?;
    let n = pp.modulus();
    let a = hash_to_group(id, pp)?;
    let r = sqrt_extract(&a, msk)?;
    let r_sq = (&r * &r) % n;
    // The component evaluated during decryption lives on the side whose
    // parameter is the square of the key.
    let (side_param, pick): (BigUint, fn(&Ciphertext) -> &RingElement) = if r_sq == a {
        (a.clone(), |ct| &ct.c)
    } else {
        (n - &a, |ct| &ct.d)
    };
    let result_bit = circuit.evaluate(inputs)?;
    let coset = enumerate_s_coset(pp, msk, &side_param, &r, result_bit)?;
    let index: HashMap<(u64, u64), usize> = coset
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.c0.to_u64().unwrap(), e.c1.to_u64().unwrap()), i))
        .collect();

    let mut fresh_counts = vec![0u64; coset.len()];
    let mut eval_counts = vec![0u64; coset.len()];
    let bin = |counts: &mut Vec<u64>, e: &RingElement| -> Result<()> {
        let key = (e.c0.to_u64().unwrap(), e.c1.to_u64().unwrap());
        let idx = index
            .get(&key)
            .copied()
            .ok_or(Error::MalformedCiphertext("sample outside the enumerated coset"))?;
        counts[idx] += 1;
        Ok(())
    };

    for _ in 0..trials {
        let fresh = xhibe::encrypt(pp, id, result_bit, rng)?;
        bin(&mut fresh_counts, pick(&fresh))?;

        let cts = inputs
            .iter()
            .map(|&b| xhibe::encrypt(pp, id, b, rng))
            .collect::<Result<Vec<_>>>()?;
        let out = if rerandomize {
            xhibe::eval(pp, circuit, &cts, rng)?
        } else {
            xhibe::eval_without_rerandomize(pp, circuit, &cts)?
        };
        bin(&mut eval_counts, pick(&out))?;
    }
    Ok(chi_square_two_sample(&fresh_counts, &eval_counts))
}

/// Sizes and distinguishing advantages contrasting the honest-encryption
/// subgroup with the rest of the Galbraith-positive group.
///
/// At toy scale the two sets are disjoint supports, so their statistical
/// distance is 1 and the factoring oracle separates them essentially
/// perfectly; a tester limited to the public Galbraith value sees +1 on
/// both sides and gains nothing. Reported, not asserted: the gap is exactly
/// what the hardness assumption says no efficient public test can realize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corollary1Report {
    pub s_size: usize,
    pub g_size: usize,
    pub s_to_g_ratio: f64,
    pub statistical_distance: f64,
    pub factoring_oracle_advantage: f64,
    pub gt_only_advantage: f64,
}

pub fn corollary1_report<R: Rng + ?Sized>(
    pp: &PublicParams,
    msk: &MasterSecret,
    a: &BigUint,
    samples_per_side: u32,
    rng: &mut R,
) -> Result<Corollary1Report> {
    let ctx = RingCtx::new(a.clone(), pp.modulus().clone())?;
    let g = enumerate_g(&ctx)?;
    let s = enumerate_s(pp, msk, a)?;
    let s_lookup: std::collections::HashSet<(u64, u64)> = s
        .iter()
        .map(|e| (e.c0.to_u64().unwrap(), e.c1.to_u64().unwrap()))
        .collect();
    let g_minus_s: Vec<&RingElement> = g
        .iter()
        .filter(|e| !s_lookup.contains(&(e.c0.to_u64().unwrap(), e.c1.to_u64().unwrap())))
        .collect();

    let mut oracle_correct = 0u64;
    let mut gt_correct = 0u64;
    let total = 2 * samples_per_side as u64;
    for _ in 0..samples_per_side {
        for from_s in [true, false] {
            let e = if from_s {
                &s[rng.gen_range(0..s.len())]
            } else {
                g_minus_s[rng.gen_range(0..g_minus_s.len())]
            };
            let z = galbraith_argument(&ctx, e);
            if qr_oracle(&z, msk)? == from_s {
                oracle_correct += 1;
            }
            // The public tester only sees GT(e) = +1 on both sides; its best
            // output is a constant guess.
            if galbraith(&ctx, e).is_plus_one() {
                gt_correct += u64::from(from_s);
            }
        }
    }
    Ok(Corollary1Report {
        s_size: s.len(),
        g_size: g.len(),
        s_to_g_ratio: s.len() as f64 / g.len() as f64,
        // Uniform laws on disjoint supports.
        statistical_distance: 1.0,
        factoring_oracle_advantage: oracle_correct as f64 / total as f64 - 0.5,
        gt_only_advantage: gt_correct as f64 / total as f64 - 0.5,
    })
}
