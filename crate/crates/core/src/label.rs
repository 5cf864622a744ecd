//! Vertex labels and their textual codec.
//!
//! A label is `n b1 b2 … bj . l`: the subnet digit `n` (the hub the vertex
//! hangs below), a bit string whose length is the vertex's birth step, and a
//! position index `l` among all vertices sharing that bit string. Hubs are the
//! bare digits `1`, `2`, `3`.
//!
//! The bit string does not spell out a path from the hub. A child born at step
//! `j` below a father born at step `i` carries `bits(father) · 0 · 1^(j-i-1)`,
//! so the rightmost zero always marks where the father's string ends.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, ParseRule, Result};

/// Longest bit string a label can carry.
pub const MAX_BITS: usize = 63;

/// Packed bit string; bit `k` (0-based, `b_{k+1}` in print order) is stored at
/// position `k` of `word`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: u8,
    word: u64,
}

impl Bits {
    pub const fn empty() -> Self {
        Bits { len: 0, word: 0 }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 0-based position `k`.
    pub fn get(&self, k: usize) -> bool {
        assert!(
            k < self.len(),
            "bit {k} out of range for length {}",
            self.len
        );
        self.word >> k & 1 == 1
    }

    /// Returns a copy with `bit` appended. Panics past [`MAX_BITS`].
    pub fn pushed(self, bit: bool) -> Self {
        assert!(self.len() < MAX_BITS, "bit string longer than {MAX_BITS}");
        Bits {
            len: self.len + 1,
            word: self.word | (u64::from(bit) << self.len),
        }
    }

    /// `self · 0 · 1^ones`.
    pub fn child_pattern(self, ones: usize) -> Self {
        let mut b = self.pushed(false);
        for _ in 0..ones {
            b = b.pushed(true);
        }
        b
    }

    /// First `n` bits.
    pub fn truncated(self, n: usize) -> Self {
        assert!(n <= self.len());
        let mask = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
        Bits {
            len: n as u8,
            word: self.word & mask,
        }
    }

    pub fn ones(&self) -> usize {
        self.word.count_ones() as usize
    }

    pub fn zeros(&self) -> usize {
        self.len() - self.ones()
    }

    /// 0-based position of the rightmost zero bit.
    pub fn rightmost_zero(&self) -> Option<usize> {
        (0..self.len()).rev().find(|&k| !self.get(k))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |k| self.get(k))
    }

    /// Builds a bit string from `0`/`1` characters.
    pub fn from_str_bits(s: &str) -> Option<Self> {
        if s.len() > MAX_BITS {
            return None;
        }
        let mut b = Bits::empty();
        for c in s.chars() {
            b = b.pushed(match c {
                '0' => false,
                '1' => true,
                _ => return None,
            });
        }
        Some(b)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

/// Identity of a vertex: subnet, bit string, position index.
///
/// Hubs have an empty bit string and no index. Every other label has a bit
/// string starting with 0 and an index of at least 1; the upper bound on the
/// index depends on `m` and is checked by [`Label::checked`] and
/// [`parse_label`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    subnet: u8,
    bits: Bits,
    // 0 for hubs
    index: u64,
}

impl Label {
    pub fn hub(subnet: u8) -> Result<Self> {
        if !(1..=3).contains(&subnet) {
            return Err(Error::Argument(format!("subnet {subnet} not in 1..=3")));
        }
        Ok(Label {
            subnet,
            bits: Bits::empty(),
            index: 0,
        })
    }

    /// Non-hub label with structural checks only (no upper index bound).
    pub fn new(subnet: u8, bits: Bits, index: u64) -> Result<Self> {
        if !(1..=3).contains(&subnet) {
            return Err(Error::Argument(format!("subnet {subnet} not in 1..=3")));
        }
        if bits.is_empty() {
            return Err(Error::Argument(
                "non-hub label needs a nonempty bit string".into(),
            ));
        }
        if bits.get(0) {
            return Err(Error::Argument("first bit must be 0".into()));
        }
        if index == 0 {
            return Err(Error::Argument("index starts at 1".into()));
        }
        Ok(Label {
            subnet,
            bits,
            index,
        })
    }

    /// Non-hub label whose index is also checked against `l_max(m, bits)`.
    pub fn checked(m: u32, subnet: u8, bits: Bits, index: u64) -> Result<Self> {
        let label = Label::new(subnet, bits, index)?;
        let max = l_max(m, &bits)?;
        if index > max {
            return Err(Error::Argument(format!(
                "index {index} exceeds group size {max} for bits {bits}"
            )));
        }
        Ok(label)
    }

    /// Same bits and subnet, different index. Only for in-crate arithmetic
    /// that already knows the index is valid.
    pub(crate) fn with_index(self, index: u64) -> Self {
        debug_assert!(!self.is_hub() && index >= 1);
        Label { index, ..self }
    }

    pub(crate) fn raw(subnet: u8, bits: Bits, index: u64) -> Self {
        Label {
            subnet,
            bits,
            index,
        }
    }

    pub fn subnet(&self) -> u8 {
        self.subnet
    }

    pub fn bits(&self) -> Bits {
        self.bits
    }

    pub fn index(&self) -> Option<u64> {
        (!self.is_hub()).then_some(self.index)
    }

    pub fn is_hub(&self) -> bool {
        self.bits.is_empty()
    }

    /// Step at which the vertex joined the network.
    pub fn birth_step(&self) -> u32 {
        self.bits.len() as u32
    }

    /// Index used for block arithmetic: hubs behave as a single block, index 1.
    pub(crate) fn block_index(&self) -> u64 {
        if self.is_hub() {
            1
        } else {
            self.index
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_hub() {
            write!(f, "{}", self.subnet)
        } else {
            write!(f, "{}{}.{}", self.subnet, self.bits, self.index)
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({self})")
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses the grammar without the `m`-dependent index bound.
impl FromStr for Label {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        parse_structure(text)
    }
}

fn parse_structure(text: &str) -> Result<Label> {
    let mut chars = text.chars();
    let subnet = match chars.next() {
        None => return Err(Error::parse(text, ParseRule::Empty)),
        Some(c @ '1'..='3') => c as u8 - b'0',
        Some(_) => return Err(Error::parse(text, ParseRule::Subnet)),
    };
    let rest = chars.as_str();
    if rest.is_empty() {
        return Label::hub(subnet);
    }
    let (bits_text, index_text) = match rest.split_once('.') {
        Some(parts) => parts,
        None => {
            if rest.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::parse(text, ParseRule::MissingDot));
            }
            return Err(Error::parse(text, ParseRule::BitCharacter));
        }
    };
    if bits_text.is_empty() {
        return Err(Error::parse(text, ParseRule::BitCharacter));
    }
    if !bits_text.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::parse(text, ParseRule::BitCharacter));
    }
    if bits_text.len() > MAX_BITS {
        return Err(Error::parse(text, ParseRule::TooManyBits));
    }
    if bits_text.starts_with('1') {
        return Err(Error::parse(text, ParseRule::LeadingOne));
    }
    if index_text.is_empty() {
        return Err(Error::parse(text, ParseRule::MissingIndex));
    }
    if !index_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(text, ParseRule::IndexDigits));
    }
    let index: u64 = index_text
        .parse()
        .map_err(|_| Error::parse(text, ParseRule::IndexOverflow))?;
    if index == 0 {
        return Err(Error::parse(text, ParseRule::IndexZero));
    }
    if index_text.starts_with('0') {
        return Err(Error::parse(text, ParseRule::IndexLeadingZero));
    }
    let bits = Bits::from_str_bits(bits_text).expect("validated above");
    Ok(Label::raw(subnet, bits, index))
}

/// Parses `n` or `n bits . l` and checks the index against the group size for
/// `m`.
pub fn parse_label(text: &str, m: u32) -> Result<Label> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    let label = parse_structure(text)?;
    if !label.is_hub() {
        // A group size beyond u64 admits every representable index.
        if let Ok(max) = l_max(m, &label.bits) {
            if label.index > max {
                return Err(Error::parse(text, ParseRule::IndexRange));
            }
        }
    }
    Ok(label)
}

pub fn format_label(label: &Label) -> String {
    label.to_string()
}

/// Number of vertices sharing one bit string: `(2m)^zeros · (m+1)^ones`.
pub fn l_max(m: u32, bits: &Bits) -> Result<u64> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    if bits.is_empty() {
        return Err(Error::Argument(
            "hubs have an empty bit string and no index space".into(),
        ));
    }
    let m = u64::from(m);
    (2 * m)
        .checked_pow(bits.zeros() as u32)
        .and_then(|a| {
            (m + 1)
                .checked_pow(bits.ones() as u32)
                .and_then(|b| a.checked_mul(b))
        })
        .ok_or_else(|| Error::Argument(format!("group size for bits {bits} overflows u64")))
}

/// Every label of `K_{m,t}` in canonical order: hubs, then by birth step,
/// subnet, bit pattern, index.
pub fn enumerate_labels(m: u32, t: u32) -> Result<Vec<Label>> {
    enumerate_labels_capped(m, t, crate::graph::DEFAULT_MAX_VERTICES)
}

pub fn enumerate_labels_capped(m: u32, t: u32, cap: u64) -> Result<Vec<Label>> {
    let total = crate::graph::vertex_count(m, t)?;
    if total > u128::from(cap) {
        return Err(Error::SizeCap {
            requested: total,
            cap,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    for n in 1..=3 {
        out.push(Label::hub(n)?);
    }
    for j in 1..=t as usize {
        for n in 1..=3u8 {
            // Patterns of length j with b_1 = 0: the remaining j-1 bits range freely.
            for tail in 0u64..(1u64 << (j - 1)) {
                let bits = Bits {
                    len: j as u8,
                    word: tail << 1,
                };
                let max = l_max(m, &bits)?;
                out.extend((1..=max).map(|l| Label::raw(n, bits, l)));
            }
        }
    }
    Ok(out)
}
