//! Computable prefix codes viewed as incomplete measures `P(x) = 2^{-|code(x)|}`.
//!
//! Two codes are provided: an LZ78 code with a fixed bit layout, and a
//! Shannon-Fano code built on the exact process measure. Both prefix an
//! Elias gamma length header, so each is a single prefix-free code over
//! strings of all lengths and satisfies the Kraft inequality.
//!
//! LZ78 layout, for input length `n` over an alphabet of size `m`:
//!
//! ```text
//! gamma(n) | ref_1 sym_1 | ref_2 sym_2 | ... | ref_c sym_c
//! ```
//!
//! Phrase `j` stores a back-reference in `[0, j-1]` on `⌈log₂ j⌉` bits and
//! one symbol on `⌈log₂(m+1)⌉` bits. Symbol value `m` is a terminator used
//! only by a final phrase that repeats an existing dictionary entry.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::measures::log_prob;
use crate::pmi::{PmiSample, PmiSource};
use crate::sampling::{ProcessSpec, Symbol, Window};
use crate::{Error, Result};

/// Identifier of a codec, as used in files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CodecId {
    Lz78,
    ShannonFano,
}

impl CodecId {
    pub fn as_str(self) -> &'static str {
        match self {
            CodecId::Lz78 => "lz78",
            CodecId::ShannonFano => "shannon-fano",
        }
    }
}

impl core::str::FromStr for CodecId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lz78" => Ok(CodecId::Lz78),
            "shannon-fano" => Ok(CodecId::ShannonFano),
            _ => Err(Error::Parameter("unknown codec (expected lz78 or shannon-fano)")),
        }
    }
}

/// A code applicable to process windows.
#[derive(Debug, Clone, PartialEq)]
pub enum Codec {
    Lz78,
    /// Shannon-Fano code of the exact measure of the given process.
    ShannonFano(ProcessSpec),
}

impl Codec {
    pub fn id(&self) -> CodecId {
        match self {
            Codec::Lz78 => CodecId::Lz78,
            Codec::ShannonFano(_) => CodecId::ShannonFano,
        }
    }

    /// Code length of a process block.
    pub fn length(&self, symbols: &[Symbol]) -> Result<CodeLength> {
        match self {
            Codec::Lz78 => lz78_length(&serialize_bits(symbols), 2),
            Codec::ShannonFano(spec) => shannon_fano_length(spec, symbols),
        }
    }
}

/// Length of a codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeLength {
    pub bits: u64,
    /// LZ78 phrases; zero for other codes.
    pub phrase_count: u64,
}

/// `⌈log₂ x⌉` for `x ≥ 1`.
fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    64 - (x - 1).leading_zeros()
}

/// Elias gamma length `2⌊log₂ n⌋ + 1`.
pub fn elias_gamma_length(n: u64) -> u64 {
    assert!(n >= 1, "Elias gamma encodes positive integers");
    2 * u64::from(63 - n.leading_zeros()) + 1
}

/// Append-only bit buffer, most significant bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString {
    bytes: Vec<u8>,
    len: u64,
}

impl BitString {
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Push the low `width` bits of `value`.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for i in (0..width).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    pub fn push_gamma(&mut self, n: u64) {
        let width = 64 - n.leading_zeros();
        self.push_bits(0, width - 1);
        self.push_bits(n, width);
    }

    pub fn get(&self, i: u64) -> Option<bool> {
        (i < self.len).then(|| self.bytes[(i / 8) as usize] & (0x80 >> (i % 8)) != 0)
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: u64,
}

impl BitReader<'_> {
    pub fn read(&mut self) -> Result<bool> {
        let bit = self.bits.get(self.pos).ok_or(Error::Decode("unexpected end of input"))?;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read()?);
        }
        Ok(v)
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        let mut zeros = 0;
        while !self.read()? {
            zeros += 1;
            if zeros > 63 {
                return Err(Error::Decode("gamma code too long"));
            }
        }
        Ok((1 << zeros) | self.read_bits(zeros)?)
    }

    pub fn position(&self) -> u64 {
        self.pos
    }
}

/// One LZ78 phrase: back-reference and fresh symbol (`None` = terminator).
type Phrase = (u32, Option<u32>);

fn check_alphabet(data: &[u32], m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::Parameter("alphabet size must be at least 2"));
    }
    if data.is_empty() {
        return Err(Error::Parameter("LZ78 input must be nonempty"));
    }
    if data.iter().any(|&x| x >= m) {
        return Err(Error::Parameter("symbol outside the alphabet"));
    }
    Ok(())
}

/// Greedy incremental parse; calls `emit` once per phrase.
fn lz78_parse(data: &[u32], mut emit: impl FnMut(Phrase)) {
    let mut trie: HashMap<(u32, u32), u32> = HashMap::with_capacity(data.len() / 4 + 16);
    let mut node = 0u32;
    let mut next = 1u32;
    for &sym in data {
        if let Some(&child) = trie.get(&(node, sym)) {
            node = child;
            continue;
        }
        trie.insert((node, sym), next);
        next += 1;
        emit((node, Some(sym)));
        node = 0;
    }
    if node != 0 {
        emit((node, None));
    }
}

/// Length of the LZ78 codeword of `data` over an alphabet of size `m`.
pub fn lz78_length(data: &[u32], m: u32) -> Result<CodeLength> {
    check_alphabet(data, m)?;
    let sym_width = u64::from(ceil_log2(u64::from(m) + 1));
    let mut phrases = 0u64;
    let mut bits = elias_gamma_length(data.len() as u64);
    lz78_parse(data, |_| {
        phrases += 1;
        bits += u64::from(ceil_log2(phrases)) + sym_width;
    });
    Ok(CodeLength { bits, phrase_count: phrases })
}

/// LZ78 codeword of `data`.
pub fn lz78_encode(data: &[u32], m: u32) -> Result<BitString> {
    check_alphabet(data, m)?;
    let sym_width = ceil_log2(u64::from(m) + 1);
    let mut out = BitString::default();
    out.push_gamma(data.len() as u64);
    let mut j = 0u64;
    lz78_parse(data, |(reference, sym)| {
        j += 1;
        out.push_bits(u64::from(reference), ceil_log2(j));
        out.push_bits(u64::from(sym.unwrap_or(m)), sym_width);
    });
    Ok(out)
}

/// Inverse of [`lz78_encode`]; reads one codeword from the front of `bits`.
pub fn lz78_decode(bits: &BitString, m: u32) -> Result<Vec<u32>> {
    if m < 2 {
        return Err(Error::Parameter("alphabet size must be at least 2"));
    }
    let sym_width = ceil_log2(u64::from(m) + 1);
    let mut reader = bits.reader();
    let n = reader.read_gamma()?;
    // dictionary entry j: (parent, symbol); entry 0 is the empty phrase
    let mut dict: Vec<(u32, u32)> = alloc::vec![(0, 0)];
    let mut out: Vec<u32> = Vec::with_capacity(n as usize);
    let mut phrase = Vec::new();
    let mut j = 0u64;
    while (out.len() as u64) < n {
        j += 1;
        let reference = reader.read_bits(ceil_log2(j))? as usize;
        if reference >= dict.len() {
            return Err(Error::Decode("back-reference past the dictionary"));
        }
        let sym = reader.read_bits(sym_width)? as u32;
        if sym > m {
            return Err(Error::Decode("symbol outside the alphabet"));
        }
        phrase.clear();
        let mut node = reference;
        while node != 0 {
            let (parent, s) = dict[node];
            phrase.push(s);
            node = parent as usize;
        }
        out.extend(phrase.iter().rev());
        if sym == m {
            if reference == 0 || out.len() as u64 != n {
                return Err(Error::Decode("misplaced terminator"));
            }
            break;
        }
        out.push(sym);
        dict.push((reference as u32, sym));
    }
    if out.len() as u64 != n {
        return Err(Error::Decode("decoded length disagrees with the header"));
    }
    Ok(out)
}

/// Prefix-free binary serialization of process symbols: a bit stays a
/// bit; an indexed symbol becomes `gamma(index)` followed by its bit.
pub fn serialize_bits(symbols: &[Symbol]) -> Vec<u32> {
    let mut out = Vec::with_capacity(symbols.len() * 4);
    for sym in symbols {
        match *sym {
            Symbol::Bit(b) => out.push(u32::from(b)),
            Symbol::Indexed { index, value } => {
                let width = 64 - index.leading_zeros();
                out.extend(core::iter::repeat_n(0, width as usize - 1));
                out.extend((0..width).rev().map(|i| ((index >> i) & 1) as u32));
                out.push(u32::from(value));
            }
        }
    }
    out
}

/// `x` rounded up, treating values within 1e-9 of an integer as that integer.
fn ceil_snapped(x: f64) -> f64 {
    let r = libm::round(x);
    if libm::fabs(x - r) < 1e-9 {
        r
    } else {
        libm::ceil(x)
    }
}

/// `⌈-log₂ Q(x)⌉ + gamma(n)` for the exact measure `Q` of `spec`.
pub fn shannon_fano_length(spec: &ProcessSpec, symbols: &[Symbol]) -> Result<CodeLength> {
    if symbols.is_empty() {
        return Err(Error::Parameter("block must be nonempty"));
    }
    let lp = log_prob(spec, symbols)?;
    if lp.is_impossible() {
        return Err(Error::ImpossibleEvent);
    }
    let bits = ceil_snapped(-lp.value()) as u64 + elias_gamma_length(symbols.len() as u64);
    Ok(CodeLength { bits, phrase_count: 0 })
}

/// Largest number of strings [`kraft_check`] enumerates.
pub const KRAFT_MAX_STRINGS: u64 = 2_000_000;

/// `Σ_x 2^{-|code(x)|}` over all `m^n` strings of length `n`.
///
/// LZ78 enumerates raw symbols `0..m`. The Shannon-Fano code needs a finite
/// alphabet, so only the Bernoulli mixture with `m = 2` is supported.
pub fn kraft_check(codec: &Codec, n: u32, m: u32) -> Result<f64> {
    if n == 0 || m < 2 {
        return Err(Error::Parameter("kraft check needs n >= 1 and m >= 2"));
    }
    let count = u64::from(m)
        .checked_pow(n)
        .filter(|&c| c <= KRAFT_MAX_STRINGS)
        .ok_or(Error::Resource { what: "too many strings to enumerate", limit: Some(KRAFT_MAX_STRINGS) })?;
    match codec {
        Codec::ShannonFano(ProcessSpec::MixtureBernoulli) if m == 2 => {}
        Codec::ShannonFano(_) => return Err(Error::Parameter("Shannon-Fano enumeration needs the mixture with m = 2")),
        Codec::Lz78 => {}
    }
    let mut total = 0.0;
    let mut digits = alloc::vec![0u32; n as usize];
    for _ in 0..count {
        let bits = match codec {
            Codec::Lz78 => lz78_length(&digits, m)?.bits,
            Codec::ShannonFano(spec) => {
                let syms: Vec<Symbol> = digits.iter().map(|&d| Symbol::Bit(d == 1)).collect();
                shannon_fano_length(spec, &syms)?.bits
            }
        };
        total += libm::exp2(-(bits as f64));
        for d in digits.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    Ok(total)
}

/// Code-based PMI `|code(left)| + |code(right)| - |code(left, right)|`.
///
/// Codes are not the process measure, so the value may be negative.
pub fn code_pmi(codec: &Codec, window: &Window, spec: &ProcessSpec) -> Result<PmiSample> {
    let left = codec.length(window.left())?.bits as f64;
    let right = codec.length(window.right())?.bits as f64;
    let joint = codec.length(&window.joined())?.bits as f64;
    Ok(PmiSample {
        n: window.n(),
        value: left + right - joint,
        process: spec.clone(),
        source: PmiSource::Code(codec.id()),
    })
}

/// LZ78 code PMI of two raw blocks over an alphabet of size `m`.
pub fn code_pmi_raw(left: &[u32], right: &[u32], m: u32) -> Result<f64> {
    if left.len() != right.len() {
        return Err(Error::Parameter("blocks must have equal length"));
    }
    let mut joint = Vec::with_capacity(2 * left.len());
    joint.extend_from_slice(left);
    joint.extend_from_slice(right);
    let l = lz78_length(left, m)?.bits as f64;
    let r = lz78_length(right, m)?.bits as f64;
    let j = lz78_length(&joint, m)?.bits as f64;
    Ok(l + r - j)
}
