use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::dag::Vertex;
use crate::error::{Error, Result};

pub const MIN_WIDTH: u32 = 1;
pub const MAX_WIDTH: u32 = 512;

const LABEL_TAG: u8 = 0x00;
const CHALLENGE_TAG: u8 = 0x01;

pub fn check_width(w: u32) -> Result<()> {
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&w) {
        return Err(Error::Parameter(format!("label width must lie in {MIN_WIDTH}..={MAX_WIDTH}, got {w}")));
    }
    Ok(())
}

pub fn label_bytes(w: u32) -> usize {
    w.div_ceil(8) as usize
}

/// A w-bit string stored big-endian in ⌈w/8⌉ bytes; the unused high bits of
/// the first byte are zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Vec<u8>);

impl Label {
    pub fn from_bytes(bytes: Vec<u8>, w: u32) -> Result<Self> {
        if bytes.len() != label_bytes(w) {
            return Err(Error::Format(format!("label has {} bytes, width {w} needs {}", bytes.len(), label_bytes(w))));
        }
        if bytes[0] & !high_mask(w) != 0 {
            return Err(Error::Format(format!("label padding bits set for width {w}")));
        }
        Ok(Self(bytes))
    }

    /// Masks `bytes` down to the low w bits.
    pub fn truncate(mut bytes: Vec<u8>, w: u32) -> Self {
        bytes.truncate(label_bytes(w));
        bytes[0] &= high_mask(w);
        Self(bytes)
    }

    pub fn from_u64(value: u64, w: u32) -> Self {
        let n = label_bytes(w);
        let mut bytes = vec![0u8; n];
        for (i, b) in bytes.iter_mut().rev().enumerate().take(8) {
            *b = (value >> (8 * i)) as u8;
        }
        Self::truncate(bytes, w)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, w: u32) -> Self {
        let mut bytes = vec![0u8; label_bytes(w)];
        rng.fill_bytes(&mut bytes);
        Self::truncate(bytes, w)
    }

    pub fn parse_hex(s: &str, w: u32) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("hex label: {e}")))?;
        Self::from_bytes(bytes, w).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Bit i counted from the most significant of the w bits.
    pub fn bit(&self, i: u32, w: u32) -> bool {
        let pos = (label_bytes(w) as u32 * 8 - w) + i;
        self.0[(pos / 8) as usize] >> (7 - pos % 8) & 1 == 1
    }

    pub fn flip_bit(&mut self, i: u32, w: u32) {
        let pos = (label_bytes(w) as u32 * 8 - w) + i;
        self.0[(pos / 8) as usize] ^= 1 << (7 - pos % 8);
    }
}

fn high_mask(w: u32) -> u8 {
    match w % 8 {
        0 => 0xff,
        r => (1u8 << r) - 1,
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(&self.0))
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{self}")
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// 0x00 ‖ χ ‖ |v| ‖ v packed big-endian ‖ ℓ_in(v).
pub fn label_input(chi: &Label, v: Vertex, inputs: &[Label]) -> Vec<u8> {
    let mut out = vec![LABEL_TAG];
    out.extend_from_slice(chi.as_bytes());
    out.push(v.len() as u8);
    let vb = v.len().div_ceil(8) as usize;
    out.extend_from_slice(&v.bits().to_be_bytes()[4 - vb..]);
    for l in inputs {
        out.extend_from_slice(l.as_bytes());
    }
    out
}

/// 0x01 ‖ χ ‖ φ ‖ counter as u32 big-endian.
pub fn challenge_input(chi: &Label, phi: &Label, counter: u32) -> Vec<u8> {
    let mut out = vec![CHALLENGE_TAG];
    out.extend_from_slice(chi.as_bytes());
    out.extend_from_slice(phi.as_bytes());
    out.extend_from_slice(&counter.to_be_bytes());
    out
}

/// Inverse of [`label_input`] for width w; None on anything else.
pub fn parse_label_input(bytes: &[u8], chi: &Label, w: u32) -> Option<(Vertex, Vec<Label>)> {
    let lb = label_bytes(w);
    let rest = bytes.strip_prefix(&[LABEL_TAG])?.strip_prefix(chi.as_bytes())?;
    let (&len, rest) = rest.split_first()?;
    let vb = (len as usize).div_ceil(8);
    if rest.len() < vb || !(rest.len() - vb).is_multiple_of(lb) {
        return None;
    }
    let mut bits = [0u8; 4];
    bits[4 - vb..].copy_from_slice(&rest[..vb]);
    let v = Vertex::new(len as u32, u32::from_be_bytes(bits)).ok()?;
    let labels = rest[vb..].chunks(lb).map(|c| Label::from_bytes(c.to_vec(), w)).collect::<Result<Vec<_>>>().ok()?;
    Some((v, labels))
}

/// A random oracle with w-bit outputs on framed byte inputs.
pub trait RandomOracle {
    fn width(&self) -> u32;
    fn query(&mut self, input: &[u8]) -> Label;
}

/// Lazily sampled random function: each fresh input gets an output drawn
/// from a ChaCha stream keyed by the seed and the input. Keeps the query log
/// and the sampled database.
#[derive(Clone, Debug)]
pub struct TableOracle {
    seed: u64,
    w: u32,
    table: BTreeMap<Vec<u8>, Label>,
    log: Vec<Vec<u8>>,
}

impl TableOracle {
    pub fn new(seed: u64, w: u32) -> Result<Self> {
        check_width(w)?;
        Ok(Self { seed, w, table: BTreeMap::new(), log: Vec::new() })
    }

    pub fn log(&self) -> &[Vec<u8>] {
        &self.log
    }

    pub fn table(&self) -> &BTreeMap<Vec<u8>, Label> {
        &self.table
    }

    fn sample(&self, input: &[u8]) -> Label {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(input);
        let key: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(key);
        Label::random(&mut rng, self.w)
    }
}

impl RandomOracle for TableOracle {
    fn width(&self) -> u32 {
        self.w
    }

    fn query(&mut self, input: &[u8]) -> Label {
        self.log.push(input.to_vec());
        if let Some(l) = self.table.get(input) {
            return l.clone();
        }
        let l = self.sample(input);
        self.table.insert(input.to_vec(), l.clone());
        l
    }
}

/// SHA-256 in counter mode, truncated to w bits. Keeps no state.
#[derive(Clone, Copy, Debug)]
pub struct CryptoOracle {
    w: u32,
}

impl CryptoOracle {
    pub fn new(w: u32) -> Result<Self> {
        check_width(w)?;
        Ok(Self { w })
    }
}

impl RandomOracle for CryptoOracle {
    fn width(&self) -> u32 {
        self.w
    }

    fn query(&mut self, input: &[u8]) -> Label {
        let need = label_bytes(self.w);
        let mut out = Vec::with_capacity(need + 32);
        let mut block = 0u32;
        while out.len() < need {
            let mut h = Sha256::new();
            h.update(block.to_be_bytes());
            h.update(input);
            out.extend_from_slice(&h.finalize());
            block += 1;
        }
        Label::truncate(out, self.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Table,
    Crypto,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Self::Table),
            "crypto" => Ok(Self::Crypto),
            other => Err(Error::Parse(format!("unknown backend '{other}'"))),
        }
    }
}

/// Either backend behind one type, for callers choosing at run time.
#[derive(Clone, Debug)]
pub enum Backend {
    Table(TableOracle),
    Crypto(CryptoOracle),
}

impl Backend {
    pub fn new(kind: BackendKind, seed: u64, w: u32) -> Result<Self> {
        Ok(match kind {
            BackendKind::Table => Self::Table(TableOracle::new(seed, w)?),
            BackendKind::Crypto => Self::Crypto(CryptoOracle::new(w)?),
        })
    }
}

impl RandomOracle for Backend {
    fn width(&self) -> u32 {
        match self {
            Self::Table(t) => t.width(),
            Self::Crypto(c) => c.width(),
        }
    }

    fn query(&mut self, input: &[u8]) -> Label {
        match self {
            Self::Table(t) => t.query(input),
            Self::Crypto(c) => c.query(input),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_masking_and_bits() {
        let l = Label::from_u64(0b101, 3);
        assert_eq!(l.as_bytes(), &[0b101]);
        assert!(l.bit(0, 3) && !l.bit(1, 3) && l.bit(2, 3));
        assert!(Label::from_bytes(vec![0b1000], 3).is_err());
        assert!(Label::from_bytes(vec![0, 0], 3).is_err());
        let mut m = Label::from_u64(0, 12);
        m.flip_bit(0, 12);
        assert_eq!(m.as_bytes(), &[0x08, 0x00]);
        assert_eq!(Label::parse_hex("0800", 12).unwrap(), m);
    }

    #[test]
    fn label_input_round_trips() {
        let chi = Label::from_u64(0xab, 8);
        let v = Vertex::parse("1011").unwrap();
        let ins = vec![Label::from_u64(1, 8), Label::from_u64(2, 8)];
        let bytes = label_input(&chi, v, &ins);
        assert_eq!(bytes, [0x00, 0xab, 4, 0b1011, 1, 2]);
        assert_eq!(parse_label_input(&bytes, &chi, 8), Some((v, ins)));
        assert_eq!(parse_label_input(&challenge_input(&chi, &chi, 1), &chi, 8), None);
        let root = label_input(&chi, Vertex::ROOT, &[]);
        assert_eq!(parse_label_input(&root, &chi, 8), Some((Vertex::ROOT, vec![])));
    }

    #[test]
    fn table_is_lazy_and_deterministic() {
        let mut a = TableOracle::new(7, 16).unwrap();
        let mut b = TableOracle::new(7, 16).unwrap();
        let x = a.query(b"abc");
        b.query(b"zzz");
        assert_eq!(b.query(b"abc"), x);
        assert_eq!(a.query(b"abc"), x);
        assert_eq!(a.log().len(), 2);
        assert_eq!(a.table().len(), 1);
        let mut c = TableOracle::new(8, 16).unwrap();
        assert_ne!(c.query(b"abc"), x);
    }

    #[test]
    fn crypto_widths() {
        for w in [8, 13, 256, 300, 512] {
            let mut o = CryptoOracle::new(w).unwrap();
            let l = o.query(b"x");
            assert_eq!(l.as_bytes().len(), label_bytes(w));
            assert_eq!(o.query(b"x"), l);
        }
        assert!(CryptoOracle::new(0).is_err());
        assert!(CryptoOracle::new(513).is_err());
    }
}
