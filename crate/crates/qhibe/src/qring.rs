//! Arithmetic in the quotient ring `R_a = Z_N[x] / (x^2 - a)`.
//!
//! Ciphertext components are degree-one polynomials `c1*x + c0`. The two
//! components of a ciphertext live in different rings (`R_a` and `R_{-a}`),
//! so elements never carry their ring context; a [`RingCtx`] is passed
//! explicitly to every operation that needs one.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::numtheory::{
    jacobi_unchecked, nu_encode, sample_unit, sample_unit_with_symbol_mod, JacobiSymbol,
    REJECTION_CAP,
};
use crate::opcount::{inv_mod, mul_mod};

/// A degree-one polynomial `c1*x + c0` with coefficients reduced mod `N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub c0: BigUint,
    pub c1: BigUint,
}

impl RingElement {
    pub fn new(c0: BigUint, c1: BigUint) -> Self {
        RingElement { c0, c1 }
    }

    /// The multiplicative identity `(1, 0)`.
    pub fn one() -> Self {
        RingElement {
            c0: BigUint::one(),
            c1: BigUint::zero(),
        }
    }

    /// Coefficient-wise addition mod `n`.
    pub fn add(&self, other: &RingElement, n: &BigUint) -> RingElement {
        RingElement {
            c0: (&self.c0 + &other.c0) % n,
            c1: (&self.c1 + &other.c1) % n,
        }
    }

    /// Coefficient-wise subtraction mod `n`.
    pub fn sub(&self, other: &RingElement, n: &BigUint) -> RingElement {
        RingElement {
            c0: (&self.c0 + n - (&other.c0 % n)) % n,
            c1: (&self.c1 + n - (&other.c1 % n)) % n,
        }
    }

    /// Coefficient-wise negation mod `n`.
    pub fn neg(&self, n: &BigUint) -> RingElement {
        RingElement {
            c0: (n - &self.c0 % n) % n,
            c1: (n - &self.c1 % n) % n,
        }
    }

    pub fn has_unit_coefficients(&self, n: &BigUint) -> bool {
        self.c0.gcd(n).is_one() && self.c1.gcd(n).is_one()
    }
}

/// The ring context `(a, N)` for `R_a`. Use `N - a` as the square parameter
/// to work on the `R_{-a}` side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingCtx {
    a: BigUint,
    n: BigUint,
}

impl RingCtx {
    pub fn new(a: BigUint, n: BigUint) -> Result<Self> {
        if n.is_even() || n < BigUint::from(3u32) {
            return Err(Error::InvalidModulus);
        }
        let a = a % &n;
        if !a.gcd(&n).is_one() {
            return Err(Error::NotAUnit);
        }
        Ok(RingCtx { a, n })
    }

    pub fn a(&self) -> &BigUint {
        &self.a
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    /// The context for the opposite side, `R_{-a}`.
    pub fn negated(&self) -> RingCtx {
        RingCtx {
            a: &self.n - &self.a,
            n: self.n.clone(),
        }
    }
}

/// Multiplication in `R_a`:
/// `(c0 + c1 x)(d0 + d1 x) = (c0 d0 + a c1 d1) + (c0 d1 + c1 d0) x`.
///
/// Computed Karatsuba-style with exactly three coefficient multiplications
/// plus one multiplication by `a`, so a homomorphic combine of two full
/// ciphertexts (both components) costs eight multiplications in `Z_N`.
pub fn ring_mul(ctx: &RingCtx, c: &RingElement, d: &RingElement) -> RingElement {
    let n = &ctx.n;
    let m1 = mul_mod(&c.c0, &d.c0, n);
    let m2 = mul_mod(&c.c1, &d.c1, n);
    let s1 = (&c.c0 + &c.c1) % n;
    let s2 = (&d.c0 + &d.c1) % n;
    let m3 = mul_mod(&s1, &s2, n);
    let cross = (&m3 + n + n - &m1 - &m2) % n;
    let e0 = (&m1 + mul_mod(&ctx.a, &m2, n)) % n;
    RingElement { c0: e0, c1: cross }
}

/// Inverse in `R_a`: with `z = c0^2 - a c1^2`, the inverse is
/// `(c0/z, -c1/z)`. Fails when `z` is not a unit, i.e. the element lies
/// outside the group `G_a`.
pub fn ring_inv(ctx: &RingCtx, c: &RingElement) -> Result<RingElement> {
    let n = &ctx.n;
    let z = galbraith_argument(ctx, c);
    let z_inv = inv_mod(&z, n).ok_or(Error::NotInvertible)?;
    let d0 = mul_mod(&c.c0, &z_inv, n);
    let d1_pos = mul_mod(&c.c1, &z_inv, n);
    Ok(RingElement {
        c0: d0,
        c1: (n - d1_pos) % n,
    })
}

/// Evaluation at a point: `c(r) = c0 + r c1 mod N`. Decryption evaluates the
/// selected component at the identity key.
pub fn eval_at(c: &RingElement, r: &BigUint, n: &BigUint) -> BigUint {
    (&c.c0 + mul_mod(r, &c.c1, n)) % n
}

/// `c0^2 - a c1^2 mod N`, the argument of the ring Galbraith test. Plain
/// (uncounted) arithmetic: this is validity checking, not ciphertext work.
fn galbraith_argument(ctx: &RingCtx, c: &RingElement) -> BigUint {
    let n = &ctx.n;
    let c0sq = (&c.c0 * &c.c0) % n;
    let ac1sq = (&ctx.a * ((&c.c1 * &c.c1) % n)) % n;
    (&c0sq + n - &ac1sq) % n
}

/// The Galbraith test generalized to `R_a`: the Jacobi symbol of
/// `c0^2 - a c1^2`. Honest ciphertext components give +1; for a wrong `a`
/// the value is statistically close to uniform on {-1, +1}.
pub fn galbraith(ctx: &RingCtx, c: &RingElement) -> JacobiSymbol {
    jacobi_unchecked(&galbraith_argument(ctx, c), &ctx.n)
}

/// Membership in `G_a`, the group of elements passing the Galbraith test.
/// This is the ciphertext-validity predicate.
pub fn in_g(ctx: &RingCtx, c: &RingElement) -> bool {
    galbraith(ctx, c).is_plus_one()
}

/// Builds the element `(t + a g^2 t^{-1}) + 2g x` from explicit draws.
///
/// Rejects draws whose result fails the Galbraith test or whose constant
/// coefficient is not a unit (both only happen on a negligible set at
/// cryptographic sizes, but routinely at toy sizes).
pub fn s_element(ctx: &RingCtx, t: &BigUint, g: &BigUint) -> Result<RingElement> {
    let n = &ctx.n;
    if !t.gcd(n).is_one() || !g.gcd(n).is_one() {
        return Err(Error::NotAUnit);
    }
    let t_inv = inv_mod(t, n).ok_or(Error::NotAUnit)?;
    let g_sq = mul_mod(g, g, n);
    let a_g_sq = mul_mod(&ctx.a, &g_sq, n);
    let c0 = (t + mul_mod(&a_g_sq, &t_inv, n)) % n;
    let c1 = (g << 1) % n;
    let elem = RingElement { c0, c1 };
    if !in_g(ctx, &elem) || !elem.c0.gcd(n).is_one() {
        return Err(Error::DegenerateElement);
    }
    Ok(elem)
}

/// Samples an encryption component for `bit`: draws `t` uniform in
/// `Z*_N[ν(bit)]` and `g` uniform in `Z*_N`, retrying until the element
/// passes the Galbraith test and has a unit constant coefficient.
///
/// For the second ciphertext component call this with the `R_{-a}` context,
/// which makes the constant term `t - a g^2 t^{-1}` as decryption under
/// `r^2 ≡ -a` requires.
pub fn sample_s<R: Rng + ?Sized>(ctx: &RingCtx, bit: bool, rng: &mut R) -> Result<RingElement> {
    let symbol = nu_encode(bit);
    for _ in 0..REJECTION_CAP {
        let t = sample_unit_with_symbol_mod(&ctx.n, symbol, rng)?;
        let g = sample_unit(&ctx.n, rng)?;
        match s_element(ctx, &t, &g) {
            Ok(elem) => return Ok(elem),
            Err(Error::DegenerateElement) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::IterationCapExceeded("sampling an encryption component"))
}
