//! Executable security experiments.
//!
//! The runners are parameterized over a scheme interface so the same
//! experiment exercises the scalar baseline, the ring scheme and its
//! anonymized variant. Runners are deterministic given the caller's
//! randomness stream: per-trial seeds are drawn up front and trials then
//! run independently (in parallel).

pub mod coset;
pub mod distinguisher;
pub mod stats;

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};
use rayon::prelude::*;

use crate::anonymizer::{self, AnonParams, AttributeTag};
use crate::cocks::{self, IdentityKey};
use crate::error::{Error, Result};
use crate::numtheory::{hash_to_group, jacobi_unchecked, MasterSecret, PublicParams};
use crate::qring::{in_g, RingCtx};
use crate::xhibe::{self, XorCircuit};

pub use stats::{ChiSquare, GameResult, TrialOutcome};

/// Key-extraction oracle handed to adversaries. `None` means the query was
/// refused (or extraction failed).
pub type KeyOracle<'a> = dyn FnMut(&[u8]) -> Option<IdentityKey> + 'a;

/// The scheme surface the experiments need: the attribute-tag map `Q_A`,
/// encryption, decryption and (tag-assisted) evaluation.
pub trait GameScheme: Sync {
    type Ct: Clone + Send + Sync;

    fn attribute_tag(&self, pp: &PublicParams, id: &[u8]) -> Result<BigUint>;
    fn encrypt(
        &self,
        pp: &PublicParams,
        id: &[u8],
        bit: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ct>;
    fn decrypt(&self, pp: &PublicParams, sk: &IdentityKey, ct: &Self::Ct) -> Result<bool>;
    fn eval(
        &self,
        pp: &PublicParams,
        alpha: &BigUint,
        circuit: &XorCircuit,
        cts: &[Self::Ct],
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ct>;
}

/// The ring scheme. Evaluation is universal and ignores the tag.
pub struct XhibeScheme;

impl GameScheme for XhibeScheme {
    type Ct = xhibe::Ciphertext;

    fn attribute_tag(&self, pp: &PublicParams, id: &[u8]) -> Result<BigUint> {
        hash_to_group(id, pp)
    }

    fn encrypt(
        &self,
        pp: &PublicParams,
        id: &[u8],
        bit: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ct> {
        xhibe::encrypt(pp, id, bit, rng)
    }

    fn decrypt(&self, pp: &PublicParams, sk: &IdentityKey, ct: &Self::Ct) -> Result<bool> {
        xhibe::decrypt(pp, sk, ct)
    }

    fn eval(
        &self,
        pp: &PublicParams,
        _alpha: &BigUint,
        circuit: &XorCircuit,
        cts: &[Self::Ct],
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ct> {
        xhibe::eval(pp, circuit, cts, rng)
    }
}

/// The anonymized scheme. Evaluation requires the attribute tag.
pub struct AnonXhibeScheme {
    pub ap: AnonParams,
}

impl GameScheme for AnonXhibeScheme {
    type Ct = anonymizer::AnonCiphertext;

    fn attribute_tag(&self, pp: &PublicParams, id: &[u8]) -> Result<BigUint> {
        hash_to_group(id, pp)
    }

    fn encrypt(
        &self,
        pp: &PublicParams,
        id: &[u8],
        bit: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ct> {
        anonymizer::encrypt(pp, &self.ap, id, bit, rng)
    }

    fn decrypt(&self, pp: &PublicParams, sk: &IdentityKey, ct: &Self::Ct) -> Result<bool> {
        anonymizer::decrypt(pp, &self.ap, sk, ct)
    }

    fn eval(
        &self,
        pp: &PublicParams,
        alpha: &BigUint,
        circuit: &XorCircuit,
        cts: &[Self::Ct],
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ct> {
        let tag = AttributeTag::new(pp, alpha.clone())?;
        anonymizer::eval(pp, &self.ap, &tag, circuit, cts, rng)
    }
}

/// The scalar baseline. Not homomorphic; evaluation is unsupported.
pub struct CocksScheme;

impl GameScheme for CocksScheme {
    type Ct = cocks::CocksCiphertext;

    fn attribute_tag(&self, pp: &PublicParams, id: &[u8]) -> Result<BigUint> {
        hash_to_group(id, pp)
    }

    fn encrypt(
        &self,
        pp: &PublicParams,
        id: &[u8],
        bit: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ct> {
        cocks::encrypt(pp, id, bit, rng)
    }

    fn decrypt(&self, pp: &PublicParams, sk: &IdentityKey, ct: &Self::Ct) -> Result<bool> {
        cocks::decrypt(pp, sk, ct)
    }

    fn eval(
        &self,
        _pp: &PublicParams,
        _alpha: &BigUint,
        _circuit: &XorCircuit,
        _cts: &[Self::Ct],
        _rng: &mut dyn RngCore,
    ) -> Result<Self::Ct> {
        Err(Error::UnsupportedOperation("the scalar scheme is not homomorphic"))
    }
}

/// Challenge tuple chosen by the first phase of the attribute-hiding game.
pub struct UprivChoice<St> {
    pub id0: Vec<u8>,
    pub m0: bool,
    pub id1: Vec<u8>,
    pub m1: bool,
    pub state: St,
}

/// Two-phase adversary against the attribute-hiding experiment.
pub trait UprivAdversary<S: GameScheme>: Sync {
    type State: Send;

    fn phase1(
        &self,
        scheme: &S,
        pp: &PublicParams,
        keygen: &mut KeyOracle,
        rng: &mut dyn RngCore,
    ) -> Result<UprivChoice<Self::State>>;

    #[allow(clippy::too_many_arguments)]
    fn phase2(
        &self,
        scheme: &S,
        pp: &PublicParams,
        challenge: &S::Ct,
        state: Self::State,
        keygen: &mut KeyOracle,
        eval: &mut dyn FnMut(&XorCircuit, &[S::Ct]) -> Result<S::Ct>,
        rng: &mut dyn RngCore,
    ) -> Result<bool>;
}

/// Runs the attribute-hiding experiment: the adversary names two
/// (identity, message) pairs, one is encrypted under a hidden coin, and the
/// adversary guesses the coin with access to a restricted key oracle and an
/// evaluation oracle whose tag is fixed to the challenge identity's.
///
/// The key-oracle constraint is enforced, not trusted: a first-phase query
/// for either challenge identity aborts the run, and the second-phase
/// oracle refuses both.
pub fn run_upriv<S, A, R>(
    scheme: &S,
    pp: &PublicParams,
    msk: &MasterSecret,
    adversary: &A,
    trials: u64,
    rng: &mut R,
    mut observer: Option<&mut dyn FnMut(TrialOutcome)>,
) -> Result<GameResult>
where
    S: GameScheme,
    A: UprivAdversary<S>,
    R: Rng + ?Sized,
{
    if !msk.matches(pp) {
        return Err(Error::InvalidParameter("master secret does not match parameters"));
    }
    let seeds: Vec<u64> = (0..trials).map(|_| rng.gen()).collect();
    let outcomes = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| -> Result<TrialOutcome> {
            let mut trng = StdRng::seed_from_u64(seed);
            let mut queried: Vec<Vec<u8>> = Vec::new();
            let choice = {
                let mut oracle = |id: &[u8]| -> Option<IdentityKey> {
                    queried.push(id.to_vec());
                    cocks::keygen(pp, msk, id).ok()
                };
                adversary.phase1(scheme, pp, &mut oracle, &mut trng)?
            };
            if queried
                .iter()
                .any(|q| q == &choice.id0 || q == &choice.id1)
            {
                return Err(Error::ProtocolViolation(
                    "first phase queried a challenge identity",
                ));
            }
            let hidden = trng.gen_bool(0.5);
            let (id_b, m_b) = if hidden {
                (&choice.id1, choice.m1)
            } else {
                (&choice.id0, choice.m0)
            };
            let alpha = scheme.attribute_tag(pp, id_b)?;
            let challenge = scheme.encrypt(pp, id_b, m_b, &mut trng)?;
            let mut oracle = |id: &[u8]| -> Option<IdentityKey> {
                if id == choice.id0.as_slice() || id == choice.id1.as_slice() {
                    return None;
                }
                cocks::keygen(pp, msk, id).ok()
            };
            let mut eval_rng = StdRng::seed_from_u64(seed.wrapping_add(1));
            let mut eval = |circuit: &XorCircuit, cts: &[S::Ct]| -> Result<S::Ct> {
                scheme.eval(pp, &alpha, circuit, cts, &mut eval_rng)
            };
            let guess = adversary.phase2(
                scheme, pp, &challenge, choice.state, &mut oracle, &mut eval, &mut trng,
            )?;
            Ok(TrialOutcome {
                index: index as u64,
                hidden_bit: hidden,
                guess,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let wins = outcomes.iter().filter(|o| o.win()).count() as u64;
    if let Some(obs) = observer.as_deref_mut() {
        for o in &outcomes {
            obs(*o);
        }
    }
    Ok(GameResult::from_wins(wins, trials))
}

/// Challenge tuple for the payload-hiding game.
pub struct IndCpaChoice<St> {
    pub id: Vec<u8>,
    pub m0: bool,
    pub m1: bool,
    pub state: St,
}

/// Two-phase adversary against the payload-hiding (IND-ID-CPA) experiment.
pub trait IndCpaAdversary<S: GameScheme>: Sync {
    type State: Send;

    fn phase1(
        &self,
        scheme: &S,
        pp: &PublicParams,
        keygen: &mut KeyOracle,
        rng: &mut dyn RngCore,
    ) -> Result<IndCpaChoice<Self::State>>;

    fn phase2(
        &self,
        scheme: &S,
        pp: &PublicParams,
        challenge: &S::Ct,
        state: Self::State,
        keygen: &mut KeyOracle,
        rng: &mut dyn RngCore,
    ) -> Result<bool>;
}

/// Runs the payload-hiding game with a single challenge identity.
///
/// `enforce_key_constraint` is normally true; disabling it is a deliberate
/// sanity breach that lets an adversary extract the challenge key and win
/// every trial, validating the runner itself.
pub fn run_ind_id_cpa<S, A, R>(
    scheme: &S,
    pp: &PublicParams,
    msk: &MasterSecret,
    adversary: &A,
    trials: u64,
    enforce_key_constraint: bool,
    rng: &mut R,
    mut observer: Option<&mut dyn FnMut(TrialOutcome)>,
) -> Result<GameResult>
where
    S: GameScheme,
    A: IndCpaAdversary<S>,
    R: Rng + ?Sized,
{
    if !msk.matches(pp) {
        return Err(Error::InvalidParameter("master secret does not match parameters"));
    }
    let seeds: Vec<u64> = (0..trials).map(|_| rng.gen()).collect();
    let outcomes = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| -> Result<TrialOutcome> {
            let mut trng = StdRng::seed_from_u64(seed);
            let mut queried: Vec<Vec<u8>> = Vec::new();
            let choice = {
                let mut oracle = |id: &[u8]| -> Option<IdentityKey> {
                    queried.push(id.to_vec());
                    cocks::keygen(pp, msk, id).ok()
                };
                adversary.phase1(scheme, pp, &mut oracle, &mut trng)?
            };
            if enforce_key_constraint && queried.iter().any(|q| q == &choice.id) {
                return Err(Error::ProtocolViolation(
                    "first phase queried the challenge identity",
                ));
            }
            let hidden = trng.gen_bool(0.5);
            let m_b = if hidden { choice.m1 } else { choice.m0 };
            let challenge = scheme.encrypt(pp, &choice.id, m_b, &mut trng)?;
            let mut oracle = |id: &[u8]| -> Option<IdentityKey> {
                if enforce_key_constraint && id == choice.id.as_slice() {
                    return None;
                }
                cocks::keygen(pp, msk, id).ok()
            };
            let guess =
                adversary.phase2(scheme, pp, &challenge, choice.state, &mut oracle, &mut trng)?;
            Ok(TrialOutcome {
                index: index as u64,
                hidden_bit: hidden,
                guess,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let wins = outcomes.iter().filter(|o| o.win()).count() as u64;
    if let Some(obs) = observer.as_deref_mut() {
        for o in &outcomes {
            obs(*o);
        }
    }
    Ok(GameResult::from_wins(wins, trials))
}

/// Null baseline: guesses a uniform coin.
pub struct RandomGuessAdversary {
    pub id0: Vec<u8>,
    pub id1: Vec<u8>,
}

impl<S: GameScheme> UprivAdversary<S> for RandomGuessAdversary {
    type State = ();

    fn phase1(
        &self,
        _scheme: &S,
        _pp: &PublicParams,
        _keygen: &mut KeyOracle,
        _rng: &mut dyn RngCore,
    ) -> Result<UprivChoice<()>> {
        Ok(UprivChoice {
            id0: self.id0.clone(),
            m0: false,
            id1: self.id1.clone(),
            m1: true,
            state: (),
        })
    }

    fn phase2(
        &self,
        _scheme: &S,
        _pp: &PublicParams,
        _challenge: &S::Ct,
        _state: (),
        _keygen: &mut KeyOracle,
        _eval: &mut dyn FnMut(&XorCircuit, &[S::Ct]) -> Result<S::Ct>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        Ok(rng.gen_bool(0.5))
    }
}

/// The anonymity attack run inside the experiment: uses the evaluation
/// oracle with the identity circuit to mint re-randomized copies of the
/// challenge, then takes a majority vote of ring Galbraith tests under the
/// two candidate hash values.
pub struct GalbraithUprivAdversary {
    pub id0: Vec<u8>,
    pub id1: Vec<u8>,
    /// Number of copies minted through the evaluation oracle.
    pub mint: u32,
}

pub(crate) fn majority_guess(hits0: u32, hits1: u32, rng: &mut dyn RngCore) -> bool {
    match hits0.cmp(&hits1) {
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Equal => rng.gen_bool(0.5),
    }
}

impl UprivAdversary<XhibeScheme> for GalbraithUprivAdversary {
    type State = ();

    fn phase1(
        &self,
        _scheme: &XhibeScheme,
        _pp: &PublicParams,
        _keygen: &mut KeyOracle,
        _rng: &mut dyn RngCore,
    ) -> Result<UprivChoice<()>> {
        Ok(UprivChoice {
            id0: self.id0.clone(),
            m0: false,
            id1: self.id1.clone(),
            m1: true,
            state: (),
        })
    }

    fn phase2(
        &self,
        _scheme: &XhibeScheme,
        pp: &PublicParams,
        challenge: &xhibe::Ciphertext,
        _state: (),
        _keygen: &mut KeyOracle,
        eval: &mut dyn FnMut(&XorCircuit, &[xhibe::Ciphertext]) -> Result<xhibe::Ciphertext>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        let n = pp.modulus();
        let ctx0 = RingCtx::new(hash_to_group(&self.id0, pp)?, n.clone())?;
        let ctx1 = RingCtx::new(hash_to_group(&self.id1, pp)?, n.clone())?;
        let identity_circuit = XorCircuit::new(vec![true])?;
        let mut hits0 = 0u32;
        let mut hits1 = 0u32;
        for _ in 0..self.mint {
            let copy = eval(&identity_circuit, std::slice::from_ref(challenge))?;
            hits0 += u32::from(in_g(&ctx0, &copy.c));
            hits1 += u32::from(in_g(&ctx1, &copy.c));
        }
        Ok(majority_guess(hits0, hits1, rng))
    }
}

/// The same attack pointed at the anonymized scheme: the Galbraith test is
/// applied to the masked component `z1` of copies minted through the
/// evaluation oracle. Against honest masking this learns nothing.
pub struct GalbraithAnonUprivAdversary {
    pub id0: Vec<u8>,
    pub id1: Vec<u8>,
    pub mint: u32,
}

impl UprivAdversary<AnonXhibeScheme> for GalbraithAnonUprivAdversary {
    type State = ();

    fn phase1(
        &self,
        _scheme: &AnonXhibeScheme,
        _pp: &PublicParams,
        _keygen: &mut KeyOracle,
        _rng: &mut dyn RngCore,
    ) -> Result<UprivChoice<()>> {
        Ok(UprivChoice {
            id0: self.id0.clone(),
            m0: false,
            id1: self.id1.clone(),
            m1: true,
            state: (),
        })
    }

    fn phase2(
        &self,
        _scheme: &AnonXhibeScheme,
        pp: &PublicParams,
        challenge: &anonymizer::AnonCiphertext,
        _state: (),
        _keygen: &mut KeyOracle,
        eval: &mut dyn FnMut(
            &XorCircuit,
            &[anonymizer::AnonCiphertext],
        ) -> Result<anonymizer::AnonCiphertext>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        let n = pp.modulus();
        let ctx0 = RingCtx::new(hash_to_group(&self.id0, pp)?, n.clone())?;
        let ctx1 = RingCtx::new(hash_to_group(&self.id1, pp)?, n.clone())?;
        let identity_circuit = XorCircuit::new(vec![true])?;
        let mut hits0 = 0u32;
        let mut hits1 = 0u32;
        for _ in 0..self.mint {
            let copy = eval(&identity_circuit, std::slice::from_ref(challenge))?;
            hits0 += u32::from(in_g(&ctx0, &copy.z1));
            hits1 += u32::from(in_g(&ctx1, &copy.z1));
        }
        Ok(majority_guess(hits0, hits1, rng))
    }
}

/// Null baseline for the payload-hiding game.
pub struct RandomGuessCpaAdversary {
    pub id: Vec<u8>,
}

impl<S: GameScheme> IndCpaAdversary<S> for RandomGuessCpaAdversary {
    type State = ();

    fn phase1(
        &self,
        _scheme: &S,
        _pp: &PublicParams,
        _keygen: &mut KeyOracle,
        _rng: &mut dyn RngCore,
    ) -> Result<IndCpaChoice<()>> {
        Ok(IndCpaChoice {
            id: self.id.clone(),
            m0: false,
            m1: true,
            state: (),
        })
    }

    fn phase2(
        &self,
        _scheme: &S,
        _pp: &PublicParams,
        _challenge: &S::Ct,
        _state: (),
        _keygen: &mut KeyOracle,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        Ok(rng.gen_bool(0.5))
    }
}

/// Asks the oracle for the challenge identity's key and decrypts. Wins
/// every trial when the key constraint is disabled; degrades to a coin
/// flip when the oracle refuses.
pub struct KeyholderCpaAdversary {
    pub id: Vec<u8>,
}

impl<S: GameScheme> IndCpaAdversary<S> for KeyholderCpaAdversary {
    type State = ();

    fn phase1(
        &self,
        _scheme: &S,
        _pp: &PublicParams,
        _keygen: &mut KeyOracle,
        _rng: &mut dyn RngCore,
    ) -> Result<IndCpaChoice<()>> {
        Ok(IndCpaChoice {
            id: self.id.clone(),
            m0: false,
            m1: true,
            state: (),
        })
    }

    fn phase2(
        &self,
        scheme: &S,
        pp: &PublicParams,
        challenge: &S::Ct,
        _state: (),
        keygen: &mut KeyOracle,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        match keygen(&self.id) {
            Some(sk) => scheme.decrypt(pp, &sk, challenge),
            None => Ok(rng.gen_bool(0.5)),
        }
    }
}

/// Keyless adversary guessing from the Jacobi symbol of the first
/// ciphertext coefficient; a public feature carrying no payload
/// information.
pub struct JacobiFeatureCpaAdversary {
    pub id: Vec<u8>,
}

impl IndCpaAdversary<XhibeScheme> for JacobiFeatureCpaAdversary {
    type State = ();

    fn phase1(
        &self,
        _scheme: &XhibeScheme,
        _pp: &PublicParams,
        _keygen: &mut KeyOracle,
        _rng: &mut dyn RngCore,
    ) -> Result<IndCpaChoice<()>> {
        Ok(IndCpaChoice {
            id: self.id.clone(),
            m0: false,
            m1: true,
            state: (),
        })
    }

    fn phase2(
        &self,
        _scheme: &XhibeScheme,
        pp: &PublicParams,
        challenge: &xhibe::Ciphertext,
        _state: (),
        _keygen: &mut KeyOracle,
        _rng: &mut dyn RngCore,
    ) -> Result<bool> {
        Ok(jacobi_unchecked(&challenge.c.c0, pp.modulus()) == crate::numtheory::JacobiSymbol::MinusOne)
    }
}
