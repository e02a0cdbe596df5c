//! Bit-string values and the validity predicates checked on them.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

/// An arbitrary-length bit string, stored most-significant-bit first.
///
/// Bits past `bit_len` in the last byte are always zero, so two values with
/// the same bits compare equal regardless of how they were built.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl Value {
    /// Builds a value from `bit_len` leading bits of `bytes`.
    ///
    /// Missing bytes read as zero; surplus bits are masked off.
    pub fn from_bits(mut bytes: Vec<u8>, bit_len: usize) -> Self {
        let byte_len = bit_len.div_ceil(8);
        bytes.resize(byte_len, 0);
        let spare = byte_len * 8 - bit_len;
        if spare > 0 {
            let last = byte_len - 1;
            bytes[last] &= 0xffu8 << spare;
        }
        Value { bytes, bit_len }
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_len = bytes.len() * 8;
        Value { bytes, bit_len }
    }

    /// Parses a bit string written with `0`/`1` characters.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let mut bytes = vec![0u8; s.len().div_ceil(8)];
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bytes[i / 8] |= 0x80 >> (i % 8),
                _ => return None,
            }
        }
        Some(Value::from_bits(bytes, s.len()))
    }

    /// Uniformly random value of `bit_len` bits.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, bit_len: usize) -> Self {
        let mut bytes = vec![0u8; bit_len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        Value::from_bits(bytes, bit_len)
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(
            i < self.bit_len,
            "bit index {i} out of range {}",
            self.bit_len
        );
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn set_bit(&mut self, i: usize, on: bool) {
        assert!(
            i < self.bit_len,
            "bit index {i} out of range {}",
            self.bit_len
        );
        let mask = 0x80 >> (i % 8);
        if on {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Bitwise complement over the value's own length.
    pub fn complement(&self) -> Self {
        let bytes = self.bytes.iter().map(|b| !b).collect();
        Value::from_bits(bytes, self.bit_len)
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 8;
        let hex = self.to_hex();
        if hex.len() > 2 * SHOWN {
            write!(f, "Value({}b, {}..)", self.bit_len, &hex[..2 * SHOWN])
        } else {
            write!(f, "Value({}b, {hex})", self.bit_len)
        }
    }
}

/// A value moving through the recursion, or `Bottom` when a sub-instance
/// failed to produce anything usable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Proposal {
    Value(Value),
    Bottom,
}

impl Proposal {
    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Proposal::Value(v) => Some(v),
            Proposal::Bottom => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Proposal::Bottom)
    }
}

impl From<Value> for Proposal {
    fn from(v: Value) -> Self {
        Proposal::Value(v)
    }
}

/// External validity predicate.
pub trait Validity: Send + Sync {
    fn is_valid(&self, value: &Value) -> bool;

    /// Short stable identifier used in reports.
    fn name(&self) -> &str;
}

/// Prefix carried by every value accepted by [`BuiltinValidity::MagicPrefix`].
pub const MAGIC_PREFIX: u16 = 0xB17E;

/// Predicates selectable by name from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinValidity {
    AlwaysTrue,
    EvenParity,
    MagicPrefix,
}

impl BuiltinValidity {
    pub const ALL: [BuiltinValidity; 3] = [
        BuiltinValidity::AlwaysTrue,
        BuiltinValidity::EvenParity,
        BuiltinValidity::MagicPrefix,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Shortest value length for which valid values exist.
    pub fn min_bits(self) -> usize {
        match self {
            BuiltinValidity::AlwaysTrue => 0,
            BuiltinValidity::EvenParity => 1,
            BuiltinValidity::MagicPrefix => 16,
        }
    }

    /// Forces `value` into the predicate's accepted set with a minimal edit.
    pub fn repair(self, value: &mut Value) {
        match self {
            BuiltinValidity::AlwaysTrue => {}
            BuiltinValidity::EvenParity => {
                if value.count_ones() % 2 == 1 && !value.is_empty() {
                    let last = value.bit_len() - 1;
                    let cur = value.bit(last);
                    value.set_bit(last, !cur);
                }
            }
            BuiltinValidity::MagicPrefix => {
                for i in 0..16.min(value.bit_len()) {
                    value.set_bit(i, MAGIC_PREFIX & (0x8000 >> i) != 0);
                }
            }
        }
    }

    /// A random valid value of `bit_len` bits.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R, bit_len: usize) -> Value {
        let mut v = Value::random(rng, bit_len);
        self.repair(&mut v);
        v
    }
}

impl Validity for BuiltinValidity {
    fn is_valid(&self, value: &Value) -> bool {
        match self {
            BuiltinValidity::AlwaysTrue => true,
            BuiltinValidity::EvenParity => value.count_ones().is_multiple_of(2),
            BuiltinValidity::MagicPrefix => {
                value.bit_len() >= 16
                    && u16::from_be_bytes([value.as_bytes()[0], value.as_bytes()[1]])
                        == MAGIC_PREFIX
            }
        }
    }

    fn name(&self) -> &str {
        match self {
            BuiltinValidity::AlwaysTrue => "always-true",
            BuiltinValidity::EvenParity => "even-parity",
            BuiltinValidity::MagicPrefix => "magic-prefix",
        }
    }
}

/// The validity check used by the protocol: a fixed value length plus a
/// pluggable predicate.
#[derive(Clone)]
pub struct ValidityRule {
    bit_len: usize,
    predicate: Arc<dyn Validity>,
}

impl ValidityRule {
    pub fn new(bit_len: usize, predicate: Arc<dyn Validity>) -> Self {
        ValidityRule { bit_len, predicate }
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn predicate_name(&self) -> &str {
        self.predicate.name()
    }

    pub fn accepts(&self, value: &Value) -> bool {
        value.bit_len() == self.bit_len && self.predicate.is_valid(value)
    }

    pub fn accepts_proposal(&self, p: &Proposal) -> bool {
        p.as_value().is_some_and(|v| self.accepts(v))
    }
}

impl fmt::Debug for ValidityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValidityRule")
            .field("bit_len", &self.bit_len)
            .field("predicate", &self.predicate.name())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn from_bits_masks_tail() {
        let v = Value::from_bits(vec![0xff, 0xff], 10);
        assert_eq!(v.as_bytes(), &[0xff, 0xc0]);
        assert_eq!(v.count_ones(), 10);
    }

    #[test]
    fn bit_str_round_trip() {
        let v = Value::from_bit_str("10110001").unwrap();
        assert_eq!(v.as_bytes(), &[0b1011_0001]);
        assert!(v.bit(0) && !v.bit(1));
        assert!(Value::from_bit_str("10x").is_none());
    }

    #[test]
    fn repaired_samples_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for p in BuiltinValidity::ALL {
            for _ in 0..50 {
                let v = p.sample(&mut rng, 40);
                assert!(p.is_valid(&v), "{}", p.name());
            }
        }
    }

    #[test]
    fn rule_rejects_wrong_length() {
        let rule = ValidityRule::new(16, Arc::new(BuiltinValidity::AlwaysTrue));
        assert!(rule.accepts(&Value::from_bytes(vec![1, 2])));
        assert!(!rule.accepts(&Value::from_bytes(vec![1])));
        assert!(!rule.accepts_proposal(&Proposal::Bottom));
    }

    #[test]
    fn magic_prefix() {
        let p = BuiltinValidity::MagicPrefix;
        assert!(p.is_valid(&Value::from_bytes(vec![0xB1, 0x7E, 0])));
        assert!(!p.is_valid(&Value::from_bytes(vec![0xB1, 0x7F, 0])));
        assert!(!p.is_valid(&Value::from_bytes(vec![0xB1])));
    }
}
