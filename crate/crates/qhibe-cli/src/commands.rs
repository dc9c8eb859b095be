//! Subcommand implementations.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Num;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qhibe::anonymizer::{self, anon_params, AttributeTag};
use qhibe::games::{
    self, coset,
    distinguisher::{galbraith_distinguisher, galbraith_distinguisher_anon},
    stats::TrialOutcome,
    AnonXhibeScheme, GalbraithAnonUprivAdversary, GalbraithUprivAdversary,
    JacobiFeatureCpaAdversary, KeyholderCpaAdversary, RandomGuessAdversary,
    RandomGuessCpaAdversary, XhibeScheme,
};
use qhibe::numtheory::{MasterSecret, PublicParams};
use qhibe::xhibe::{self, XorCircuit};
use qhibe::{gm, opcount};

use crate::format;

/// Minimum prime bit length accepted without the small-parameter flag.
pub const MIN_SECURE_BITS: u32 = 512;

#[derive(Parser)]
#[command(
    name = "qhibe",
    about = "XOR-homomorphic identity-based encryption over a Blum modulus",
    long_about = "Trusted-authority and user operations for an XOR-homomorphic \
identity-based encryption scheme, plus ciphertext anonymization, security-game \
runners and a cost benchmark. Set QH_SEED (decimal integer) to make every \
randomized subcommand reproducible."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate public parameters and the master secret (TA role).
    Setup {
        /// Prime bit length (the security parameter).
        #[arg(long)]
        bits: u32,
        /// Where to write the public parameters.
        #[arg(long)]
        params: PathBuf,
        /// Where to write the master secret.
        #[arg(long)]
        master: PathBuf,
        /// Permit bit lengths below 512 (testing only).
        #[arg(long)]
        allow_small: bool,
    },
    /// Extract an identity key (TA role).
    Keygen {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        master: PathBuf,
        /// Identity string (UTF-8 bytes, hashed as-is).
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a single bit under an identity.
    Encrypt {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        id: String,
        /// The plaintext bit: 0 or 1.
        #[arg(long)]
        bit: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext with an identity key; prints the bit.
    Decrypt {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
    },
    /// Homomorphically evaluate a linear circuit over ciphertexts.
    Eval {
        #[arg(long)]
        params: PathBuf,
        /// Circuit selection vector, e.g. 1,0,1.
        #[arg(long)]
        circuit: String,
        /// Comma-separated input ciphertext files.
        #[arg(long, value_name = "FILES")]
        r#in: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mask a ciphertext so it carries no identity linkage (any party).
    Anonymize {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a ciphertext from its masked form using the attribute tag.
    Deanonymize {
        #[arg(long)]
        params: PathBuf,
        /// Identity whose hash value is the attribute tag.
        #[arg(long, conflicts_with = "alpha")]
        id: Option<String>,
        /// Explicit attribute tag (lowercase hex).
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a security experiment and print its result.
    Game(GameArgs),
    /// Cost report: instrumented operation counts, sizes and timings.
    Bench {
        /// Prime bit length for the measurement modulus.
        #[arg(long, default_value_t = 512)]
        bits: u32,
        /// Iterations per measured operation.
        #[arg(long, default_value_t = 50)]
        ops: u32,
    },
}

#[derive(Args)]
pub struct GameArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub master: PathBuf,
    /// Which experiment to run.
    #[arg(value_enum)]
    pub which: GameKind,
    /// Scheme under attack where applicable.
    #[arg(long, value_enum, default_value_t = SchemeKind::Xhibe)]
    pub scheme: SchemeKind,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Ciphertexts per trial (galbraith).
    #[arg(long, default_value_t = 32)]
    pub samples: u32,
    /// Copies minted through the evaluation oracle (upriv-galbraith).
    #[arg(long, default_value_t = 32)]
    pub mint: u32,
    #[arg(long, default_value = "alice")]
    pub id0: String,
    #[arg(long, default_value = "bob")]
    pub id1: String,
    /// Circuit for stronghom, e.g. 1,1.
    #[arg(long, default_value = "1,1")]
    pub circuit: String,
    /// Input bits for stronghom, e.g. 0,1.
    #[arg(long, default_value = "0,1")]
    pub inputs: String,
    /// Disable re-randomization (stronghom negative control).
    #[arg(long)]
    pub no_rerandomize: bool,
    /// Disable the key-oracle constraint (indcpa sanity breach).
    #[arg(long)]
    pub allow_challenge_keys: bool,
    /// Write one line per trial to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GameKind {
    UprivRandom,
    UprivGalbraith,
    IndcpaRandom,
    IndcpaKeyholder,
    IndcpaJacobi,
    Galbraith,
    Stronghom,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    Xhibe,
    Anon,
}

/// Builds the process RNG: seeded from `QH_SEED` when set, else from the OS.
pub fn make_rng() -> Result<ChaCha20Rng> {
    match std::env::var("QH_SEED") {
        Ok(text) => {
            let seed: u64 = text
                .trim()
                .parse()
                .context("QH_SEED must be a decimal integer")?;
            Ok(ChaCha20Rng::seed_from_u64(seed))
        }
        Err(_) => Ok(ChaCha20Rng::from_entropy()),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_params(path: &Path) -> Result<PublicParams> {
    format::parse_params(&read(path)?)
}

fn load_master(path: &Path, pp: &PublicParams) -> Result<MasterSecret> {
    format::parse_master(&read(path)?, pp)
}

fn parse_bit(bit: u8) -> Result<bool> {
    match bit {
        0 => Ok(false),
        1 => Ok(true),
        other => bail!("bit must be 0 or 1, got {other}"),
    }
}

fn parse_circuit(text: &str) -> Result<XorCircuit> {
    let v = text
        .split(',')
        .map(|tok| match tok.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => bail!("circuit entries must be 0 or 1, got {other:?}"),
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(XorCircuit::new(v)?)
}

fn parse_bits_list(text: &str) -> Result<Vec<bool>> {
    text.split(',')
        .map(|tok| match tok.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => bail!("bits must be 0 or 1, got {other:?}"),
        })
        .collect()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Setup {
            bits,
            params,
            master,
            allow_small,
        } => {
            if bits < MIN_SECURE_BITS && !allow_small {
                bail!("{bits}-bit primes are below the {MIN_SECURE_BITS}-bit minimum; pass --allow-small for test parameters");
            }
            let mut rng = make_rng()?;
            let (pp, msk) = qhibe::gen_blum_modulus(bits, &mut rng)?;
            write(&params, &format::write_params(&pp))?;
            write(&master, &format::write_master(&msk))?;
            println!("modulus: {} bits", pp.modulus().bits());
            Ok(())
        }
        Command::Keygen {
            params,
            master,
            id,
            out,
        } => {
            let pp = load_params(&params)?;
            let msk = load_master(&master, &pp)?;
            let sk = qhibe::cocks::keygen(&pp, &msk, id.as_bytes())?;
            write(&out, &format::write_key(&sk))
        }
        Command::Encrypt {
            params,
            id,
            bit,
            out,
        } => {
            let pp = load_params(&params)?;
            let bit = parse_bit(bit)?;
            let mut rng = make_rng()?;
            let ct = xhibe::encrypt(&pp, id.as_bytes(), bit, &mut rng)?;
            write(&out, &format::write_ciphertext(&ct))
        }
        Command::Decrypt { params, key, r#in } => {
            let pp = load_params(&params)?;
            let sk = format::parse_key(&read(&key)?, &pp)?;
            let ct = format::parse_ciphertext(&read(&r#in)?, &pp)?;
            let bit = xhibe::decrypt(&pp, &sk, &ct)?;
            println!("{}", bit as u8);
            Ok(())
        }
        Command::Eval {
            params,
            circuit,
            r#in,
            out,
        } => {
            let pp = load_params(&params)?;
            let circuit = parse_circuit(&circuit)?;
            let cts = r#in
                .split(',')
                .map(|p| format::parse_ciphertext(&read(Path::new(p.trim()))?, &pp))
                .collect::<Result<Vec<_>>>()?;
            let mut rng = make_rng()?;
            let result = xhibe::eval(&pp, &circuit, &cts, &mut rng)?;
            write(&out, &format::write_ciphertext(&result))
        }
        Command::Anonymize { params, r#in, out } => {
            let pp = load_params(&params)?;
            let ap = anon_params(&pp);
            let ct = format::parse_ciphertext(&read(&r#in)?, &pp)?;
            let mut rng = make_rng()?;
            let anon = anonymizer::anonymize(&pp, &ap, &ct, &mut rng)?;
            write(&out, &format::write_anon_ciphertext(&anon))
        }
        Command::Deanonymize {
            params,
            id,
            alpha,
            r#in,
            out,
        } => {
            let pp = load_params(&params)?;
            let ap = anon_params(&pp);
            let tag = match (id, alpha) {
                (Some(id), None) => AttributeTag::from_identity(&pp, id.as_bytes())?,
                (None, Some(hexval)) => {
                    let value = BigUint::from_str_radix(&hexval, 16)
                        .context("alpha must be lowercase hex")?;
                    AttributeTag::new(&pp, value)?
                }
                _ => bail!("exactly one of --id or --alpha is required"),
            };
            let anon = format::parse_anon_ciphertext(&read(&r#in)?, &pp)?;
            let ct = anonymizer::deanonymize(&pp, &ap, &tag, &anon)?;
            write(&out, &format::write_ciphertext(&ct))
        }
        Command::Game(args) => run_game(args),
        Command::Bench { bits, ops } => run_bench(bits, ops),
    }
}

fn trial_observer(path: Option<&Path>) -> Result<Option<fs::File>> {
    path.map(|p| fs::File::create(p).with_context(|| format!("creating {}", p.display())))
        .transpose()
}

fn run_game(args: GameArgs) -> Result<()> {
    let pp = load_params(&args.params)?;
    let msk = load_master(&args.master, &pp)?;
    let mut rng = make_rng()?;
    let mut trace = trial_observer(args.trace.as_deref())?;
    let mut sink = |o: TrialOutcome| {
        if let Some(f) = trace.as_mut() {
            let _ = writeln!(f, "{o}");
        }
    };
    let observer: Option<&mut dyn FnMut(TrialOutcome)> = Some(&mut sink);
    let id0 = args.id0.as_bytes().to_vec();
    let id1 = args.id1.as_bytes().to_vec();

    match args.which {
        GameKind::UprivRandom => {
            let adv = RandomGuessAdversary {
                id0: id0.clone(),
                id1: id1.clone(),
            };
            let result = match args.scheme {
                SchemeKind::Xhibe => games::run_upriv(
                    &XhibeScheme, &pp, &msk, &adv, args.trials, &mut rng, observer,
                )?,
                SchemeKind::Anon => {
                    let scheme = AnonXhibeScheme { ap: anon_params(&pp) };
                    games::run_upriv(&scheme, &pp, &msk, &adv, args.trials, &mut rng, observer)?
                }
            };
            println!("upriv (random-guess adversary): {result}");
        }
        GameKind::UprivGalbraith => {
            let result = match args.scheme {
                SchemeKind::Xhibe => {
                    let adv = GalbraithUprivAdversary {
                        id0,
                        id1,
                        mint: args.mint,
                    };
                    games::run_upriv(&XhibeScheme, &pp, &msk, &adv, args.trials, &mut rng, observer)?
                }
                SchemeKind::Anon => {
                    let scheme = AnonXhibeScheme { ap: anon_params(&pp) };
                    let adv = GalbraithAnonUprivAdversary {
                        id0,
                        id1,
                        mint: args.mint,
                    };
                    games::run_upriv(&scheme, &pp, &msk, &adv, args.trials, &mut rng, observer)?
                }
            };
            println!("upriv (galbraith adversary): {result}");
        }
        GameKind::IndcpaRandom => {
            let adv = RandomGuessCpaAdversary { id: id0 };
            let result = games::run_ind_id_cpa(
                &XhibeScheme,
                &pp,
                &msk,
                &adv,
                args.trials,
                !args.allow_challenge_keys,
                &mut rng,
                observer,
            )?;
            println!("ind-id-cpa (random-guess adversary): {result}");
        }
        GameKind::IndcpaKeyholder => {
            let adv = KeyholderCpaAdversary { id: id0 };
            let result = games::run_ind_id_cpa(
                &XhibeScheme,
                &pp,
                &msk,
                &adv,
                args.trials,
                !args.allow_challenge_keys,
                &mut rng,
                observer,
            )?;
            println!("ind-id-cpa (keyholder adversary): {result}");
        }
        GameKind::IndcpaJacobi => {
            let adv = JacobiFeatureCpaAdversary { id: id0 };
            let result = games::run_ind_id_cpa(
                &XhibeScheme,
                &pp,
                &msk,
                &adv,
                args.trials,
                !args.allow_challenge_keys,
                &mut rng,
                observer,
            )?;
            println!("ind-id-cpa (jacobi-feature adversary): {result}");
        }
        GameKind::Galbraith => {
            let result = match args.scheme {
                SchemeKind::Xhibe => galbraith_distinguisher(
                    &pp,
                    &id0,
                    &id1,
                    args.samples,
                    args.trials,
                    &mut rng,
                    observer,
                )?,
                SchemeKind::Anon => galbraith_distinguisher_anon(
                    &pp,
                    &anon_params(&pp),
                    &id0,
                    &id1,
                    args.samples,
                    args.trials,
                    &mut rng,
                    observer,
                )?,
            };
            println!(
                "galbraith distinguisher ({} samples): {result}",
                args.samples
            );
        }
        GameKind::Stronghom => {
            let circuit = parse_circuit(&args.circuit)?;
            let inputs = parse_bits_list(&args.inputs)?;
            let chi = coset::strong_hom_test(
                &pp,
                &msk,
                &id0,
                &circuit,
                &inputs,
                u32::try_from(args.trials).context("trials out of range")?,
                !args.no_rerandomize,
                &mut rng,
            )?;
            println!(
                "strong homomorphism {}: chi-square = {:.2}, df = {}, p = {:.3e}",
                if args.no_rerandomize {
                    "negative control (no re-randomization)"
                } else {
                    "test"
                },
                chi.statistic,
                chi.df,
                chi.p_value
            );
        }
    }
    Ok(())
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    samples[samples.len() / 2]
}

fn run_bench(bits: u32, ops: u32) -> Result<()> {
    if bits < 64 {
        bail!("bench requires at least 64-bit primes");
    }
    if ops == 0 {
        bail!("ops must be positive");
    }
    let mut rng = make_rng()?;
    let started = Instant::now();
    let (pp, msk) = qhibe::gen_blum_modulus(bits, &mut rng)?;
    println!("setup: {}-bit modulus in {:?}", pp.modulus().bits(), started.elapsed());
    println!("ops per measurement: {ops}");

    let id = b"bench";
    let sk_time = {
        let t = Instant::now();
        let _ = qhibe::cocks::keygen(&pp, &msk, id)?;
        t.elapsed()
    };
    let sk = qhibe::cocks::keygen(&pp, &msk, id)?;
    println!("keygen: {sk_time:?}");

    let mut failures: Vec<String> = Vec::new();
    let mut check = |label: &str, ok: bool, detail: String| {
        println!("  assert {label}: {}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures.push(format!("{label}: {detail}"));
        }
    };

    // Encryption: 2 modular inverses, at most 6 multiplications (3 and 1 per
    // component; degenerate draws that force a retry are negligible at
    // measurement sizes).
    let mut enc_times = Vec::with_capacity(ops as usize);
    let mut enc_mults_max = 0u64;
    let mut enc_invs_all_two = true;
    let mut cts = Vec::with_capacity(ops as usize);
    for i in 0..ops {
        let bit = i % 2 == 1;
        opcount::reset();
        let t = Instant::now();
        let ct = xhibe::encrypt(&pp, id, bit, &mut rng)?;
        enc_times.push(t.elapsed());
        let counts = opcount::snapshot();
        enc_mults_max = enc_mults_max.max(counts.multiplications);
        enc_invs_all_two &= counts.inversions == 2;
        cts.push(ct);
    }
    println!(
        "encrypt: {} multiplications (max), {} inversions, median {:?}",
        enc_mults_max,
        if enc_invs_all_two { "2" } else { "!=2" },
        median(enc_times.clone())
    );
    check(
        "encrypt inversions == 2",
        enc_invs_all_two,
        "re-randomization retry hit at measurement size".into(),
    );
    check(
        "encrypt multiplications <= 6",
        enc_mults_max <= 6,
        format!("saw {enc_mults_max}"),
    );

    // One homomorphic combine of two full ciphertexts: exactly 8
    // multiplications (the raw product; re-randomization material excluded).
    let pair_circuit = XorCircuit::new(vec![true, true])?;
    let mut combine_times = Vec::with_capacity(ops as usize);
    let mut combine_exact_eight = true;
    for i in 0..ops as usize {
        let pair = [cts[i].clone(), cts[(i + 1) % ops as usize].clone()];
        opcount::reset();
        let t = Instant::now();
        let _ = xhibe::eval_without_rerandomize(&pp, &pair_circuit, &pair)?;
        combine_times.push(t.elapsed());
        let counts = opcount::snapshot();
        combine_exact_eight &= counts.multiplications == 8 && counts.inversions == 0;
    }
    println!(
        "homomorphic combine: {} multiplications, median {:?}",
        if combine_exact_eight { "8" } else { "!=8" },
        median(combine_times)
    );
    check(
        "combine multiplications == 8",
        combine_exact_eight,
        "instrumented count deviated".into(),
    );

    // Full evaluation including re-randomization, and decryption.
    let mut eval_times = Vec::with_capacity(ops as usize);
    for i in 0..ops as usize {
        let pair = [cts[i].clone(), cts[(i + 1) % ops as usize].clone()];
        let t = Instant::now();
        let _ = xhibe::eval(&pp, &pair_circuit, &pair, &mut rng)?;
        eval_times.push(t.elapsed());
    }
    println!("eval (with re-randomization): median {:?}", median(eval_times));
    let mut dec_times = Vec::with_capacity(ops as usize);
    for ct in &cts {
        let t = Instant::now();
        let _ = xhibe::decrypt(&pp, &sk, ct)?;
        dec_times.push(t.elapsed());
    }
    println!("decrypt: median {:?}", median(dec_times));

    // Payload accounting against the one-element-per-bit reference scheme.
    let gm_ct = gm::encrypt(&pp, true, &mut rng)?;
    let _ = gm::decrypt(&msk, &gm_ct)?;
    let ratio = xhibe::PAYLOAD_ELEMENTS / gm::PAYLOAD_ELEMENTS;
    println!(
        "ciphertext payload: {} Z_N elements (reference scheme: {}), expansion factor {}",
        xhibe::PAYLOAD_ELEMENTS,
        gm::PAYLOAD_ELEMENTS,
        ratio
    );
    println!(
        "ciphertext bytes (canonical encoding): {}",
        cts[0].to_bytes(&pp).len()
    );
    check("payload expansion factor == 4", ratio == 4, format!("saw {ratio}"));

    if failures.is_empty() {
        println!("assertions: PASS");
        Ok(())
    } else {
        bail!("cost assertions failed: {}", failures.join("; "))
    }
}
