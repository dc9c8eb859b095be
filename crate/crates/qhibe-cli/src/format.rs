//! Line-oriented text files for parameters, keys and ciphertexts.
//!
//! First line: `QHIBE1 <type>`. Every following non-empty line is
//! `name = value` with integer values as lowercase big-endian hex without
//! leading zeros; list entries are indexed `name.3 = ...` (1-based).
//! Identity bytes are the one exception: raw bytes in hex, leading zeros
//! preserved. Unknown magic, type, version or field names are rejected, as
//! are duplicate or missing fields, so parse(serialize(x)) = x and nothing
//! else round-trips.

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigUint;
use num_traits::Num;
use qhibe::anonymizer::AnonCiphertext;
use qhibe::cocks::IdentityKey;
use qhibe::numtheory::{MasterSecret, PublicParams};
use qhibe::qring::RingElement;
use qhibe::xhibe::Ciphertext;

const MAGIC: &str = "QHIBE1";

/// Registered full-domain hash constructions. 1 is the SHA-256 based
/// counter construction; it is the only one defined.
pub const HASH_ALG_SHA256_FDH: u32 = 1;

fn int_to_hex(x: &BigUint) -> String {
    format!("{x:x}")
}

fn hex_to_int(s: &str) -> Result<BigUint> {
    if s.is_empty() {
        bail!("empty integer value");
    }
    if !s.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()) {
        bail!("integer values must be lowercase hex: {s:?}");
    }
    if s.len() > 1 && s.starts_with('0') {
        bail!("integer values must not have leading zeros: {s:?}");
    }
    BigUint::from_str_radix(s, 16).map_err(|e| anyhow!("bad integer {s:?}: {e}"))
}

/// Ordered `name = value` pairs under a `QHIBE1 <type>` header.
struct Fields {
    entries: Vec<(String, String)>,
    cursor: usize,
}

impl Fields {
    fn parse(text: &str, expected_kind: &str) -> Result<Fields> {
        let mut lines = text.lines();
        let header = lines.next().context("empty file")?;
        let mut parts = header.split_whitespace();
        let magic = parts.next().context("missing magic")?;
        if magic != MAGIC {
            bail!("unknown magic or version: {magic:?}");
        }
        let kind = parts.next().context("missing file type")?;
        if parts.next().is_some() {
            bail!("trailing tokens in header");
        }
        if kind != expected_kind {
            bail!("expected a {expected_kind:?} file, found {kind:?}");
        }
        let mut entries = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once(" = ")
                .with_context(|| format!("malformed line {line:?}"))?;
            if entries.iter().any(|(n, _)| n == name) {
                bail!("duplicate field {name:?}");
            }
            entries.push((name.to_string(), value.to_string()));
        }
        Ok(Fields { entries, cursor: 0 })
    }

    /// Takes the next field, which must have the expected name. Fields are
    /// positional as well as named, which keeps files canonical.
    fn take(&mut self, name: &str) -> Result<String> {
        let (found, value) = self
            .entries
            .get(self.cursor)
            .with_context(|| format!("missing field {name:?}"))?;
        if found != name {
            bail!("expected field {name:?}, found {found:?}");
        }
        self.cursor += 1;
        Ok(value.clone())
    }

    fn take_int(&mut self, name: &str) -> Result<BigUint> {
        hex_to_int(&self.take(name)?)
    }

    fn finish(self) -> Result<()> {
        if self.cursor != self.entries.len() {
            bail!("unexpected field {:?}", self.entries[self.cursor].0);
        }
        Ok(())
    }
}

fn check_below(x: &BigUint, n: &BigUint, what: &str) -> Result<()> {
    if x >= n {
        bail!("{what} is not reduced modulo N");
    }
    Ok(())
}

pub fn write_params(pp: &PublicParams) -> String {
    format!(
        "{MAGIC} params\nn = {}\nbits = {:x}\nhashalg = {:x}\n",
        int_to_hex(pp.modulus()),
        pp.bits(),
        HASH_ALG_SHA256_FDH
    )
}

pub fn parse_params(text: &str) -> Result<PublicParams> {
    let mut f = Fields::parse(text, "params")?;
    let n = f.take_int("n")?;
    let bits = u32::try_from(f.take_int("bits")?).map_err(|_| anyhow!("bits out of range"))?;
    let hashalg = f.take_int("hashalg")?;
    f.finish()?;
    if hashalg != BigUint::from(HASH_ALG_SHA256_FDH) {
        bail!("unsupported hash algorithm identifier {hashalg}");
    }
    Ok(PublicParams::from_parts(n, bits)?)
}

pub fn write_master(msk: &MasterSecret) -> String {
    format!(
        "{MAGIC} master\np = {}\nq = {}\n",
        int_to_hex(msk.p()),
        int_to_hex(msk.q())
    )
}

pub fn parse_master(text: &str, pp: &PublicParams) -> Result<MasterSecret> {
    let mut f = Fields::parse(text, "master")?;
    let p = f.take_int("p")?;
    let q = f.take_int("q")?;
    f.finish()?;
    let msk = MasterSecret::from_parts(p, q)?;
    if !msk.matches(pp) {
        bail!("master secret does not factor the parameter modulus");
    }
    Ok(msk)
}

pub fn write_key(sk: &IdentityKey) -> String {
    format!(
        "{MAGIC} key\nid = {}\nr = {}\n",
        hex::encode(sk.id()),
        int_to_hex(sk.r())
    )
}

pub fn parse_key(text: &str, pp: &PublicParams) -> Result<IdentityKey> {
    let mut f = Fields::parse(text, "key")?;
    let id = hex::decode(f.take("id")?).context("bad id bytes")?;
    let r = f.take_int("r")?;
    f.finish()?;
    check_below(&r, pp.modulus(), "r")?;
    Ok(IdentityKey::from_parts(id, r))
}

pub fn write_ciphertext(ct: &Ciphertext) -> String {
    format!(
        "{MAGIC} ciphertext\na = {}\nc0 = {}\nc1 = {}\nd0 = {}\nd1 = {}\n",
        int_to_hex(&ct.a),
        int_to_hex(&ct.c.c0),
        int_to_hex(&ct.c.c1),
        int_to_hex(&ct.d.c0),
        int_to_hex(&ct.d.c1)
    )
}

pub fn parse_ciphertext(text: &str, pp: &PublicParams) -> Result<Ciphertext> {
    let mut f = Fields::parse(text, "ciphertext")?;
    let a = f.take_int("a")?;
    let c0 = f.take_int("c0")?;
    let c1 = f.take_int("c1")?;
    let d0 = f.take_int("d0")?;
    let d1 = f.take_int("d1")?;
    f.finish()?;
    let n = pp.modulus();
    for (x, what) in [(&a, "a"), (&c0, "c0"), (&c1, "c1"), (&d0, "d0"), (&d1, "d1")] {
        check_below(x, n, what)?;
    }
    Ok(Ciphertext {
        c: RingElement::new(c0, c1),
        d: RingElement::new(d0, d1),
        a,
    })
}

pub fn write_anon_ciphertext(anon: &AnonCiphertext) -> String {
    let m = anon.tlist.len();
    let mut out = format!("{MAGIC} anonciphertext\nm = {m:x}\n");
    let mut put = |name: &str, e: &RingElement| {
        out.push_str(&format!(
            "{name}c0 = {}\n{name}c1 = {}\n",
            int_to_hex(&e.c0),
            int_to_hex(&e.c1)
        ));
    };
    put("z1", &anon.z1);
    put("z2", &anon.z2);
    let mut put_list = |name: &str, list: &[RingElement]| {
        for (i, e) in list.iter().enumerate() {
            out.push_str(&format!(
                "{name}c0.{idx} = {}\n{name}c1.{idx} = {}\n",
                int_to_hex(&e.c0),
                int_to_hex(&e.c1),
                idx = i + 1
            ));
        }
    };
    put_list("t", &anon.tlist);
    put_list("v", &anon.vlist);
    out
}

pub fn parse_anon_ciphertext(text: &str, pp: &PublicParams) -> Result<AnonCiphertext> {
    let mut f = Fields::parse(text, "anonciphertext")?;
    let m = usize::try_from(f.take_int("m")?).map_err(|_| anyhow!("m out of range"))?;
    if m == 0 || m > 1 << 20 {
        bail!("mask list length {m} out of range");
    }
    let n = pp.modulus();
    let take_elem = |f: &mut Fields, c0_name: &str, c1_name: &str| -> Result<RingElement> {
        let c0 = f.take_int(c0_name)?;
        let c1 = f.take_int(c1_name)?;
        check_below(&c0, n, c0_name)?;
        check_below(&c1, n, c1_name)?;
        Ok(RingElement::new(c0, c1))
    };
    let z1 = take_elem(&mut f, "z1c0", "z1c1")?;
    let z2 = take_elem(&mut f, "z2c0", "z2c1")?;
    let take_list = |f: &mut Fields, name: &str| -> Result<Vec<RingElement>> {
        (1..=m)
            .map(|i| take_elem(f, &format!("{name}c0.{i}"), &format!("{name}c1.{i}")))
            .collect()
    };
    let tlist = take_list(&mut f, "t")?;
    let vlist = take_list(&mut f, "v")?;
    f.finish()?;
    Ok(AnonCiphertext { z1, tlist, z2, vlist })
}
