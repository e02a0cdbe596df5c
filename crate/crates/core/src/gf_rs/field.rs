//! Arithmetic in GF(2^16).

#![allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub};
use std::sync::OnceLock;

/// Field exponent: elements are 16-bit.
pub const FIELD_BITS: usize = 16;

/// Reduction polynomial x^16 + x^12 + x^3 + x + 1.
pub const IRREDUCIBLE: u32 = 0x1100B;

const ORDER: usize = 1 << FIELD_BITS;
const MULT_ORDER: usize = ORDER - 1;

struct Tables {
    log: Vec<u16>,
    // doubled so that exp[log a + log b] never needs a modulo
    exp: Vec<u16>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut log = vec![0u16; ORDER];
        let mut exp = vec![0u16; 2 * MULT_ORDER];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().enumerate().take(MULT_ORDER) {
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (ORDER as u32) != 0 {
                x ^= IRREDUCIBLE;
            }
        }
        for i in MULT_ORDER..2 * MULT_ORDER {
            exp[i] = exp[i - MULT_ORDER];
        }
        Tables { log, exp }
    })
}

/// An element of GF(2^16).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf16(pub u16);

impl Gf16 {
    pub const ZERO: Gf16 = Gf16(0);
    pub const ONE: Gf16 = Gf16(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<Gf16> {
        if self.0 == 0 {
            return None;
        }
        let t = tables();
        let l = t.log[self.0 as usize] as usize;
        Some(Gf16(t.exp[(MULT_ORDER - l) % MULT_ORDER]))
    }

    pub fn pow(self, mut e: u32) -> Gf16 {
        let mut base = self;
        let mut acc = Gf16::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Gf16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04x}", self.0)
    }
}

impl Add for Gf16 {
    type Output = Gf16;
    #[inline]
    fn add(self, rhs: Gf16) -> Gf16 {
        Gf16(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf16 {
    #[inline]
    fn add_assign(&mut self, rhs: Gf16) {
        self.0 ^= rhs.0;
    }
}

impl Sub for Gf16 {
    type Output = Gf16;
    #[inline]
    fn sub(self, rhs: Gf16) -> Gf16 {
        Gf16(self.0 ^ rhs.0)
    }
}

impl Mul for Gf16 {
    type Output = Gf16;
    #[inline]
    fn mul(self, rhs: Gf16) -> Gf16 {
        if self.0 == 0 || rhs.0 == 0 {
            return Gf16::ZERO;
        }
        let t = tables();
        Gf16(t.exp[t.log[self.0 as usize] as usize + t.log[rhs.0 as usize] as usize])
    }
}

impl MulAssign for Gf16 {
    #[inline]
    fn mul_assign(&mut self, rhs: Gf16) {
        *self = *self * rhs;
    }
}

impl Div for Gf16 {
    type Output = Gf16;
    fn div(self, rhs: Gf16) -> Gf16 {
        self * rhs.inverse().expect("division by zero in GF(2^16)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slow_mul(a: u16, b: u16) -> u16 {
        let (mut a, mut b) = (a as u32, b as u32);
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & 0x10000 != 0 {
                a ^= IRREDUCIBLE;
            }
        }
        acc as u16
    }

    #[test]
    fn generator_is_primitive() {
        // every nonzero element shows up exactly once in the exp table
        let t = tables();
        let mut seen = vec![false; ORDER];
        for &e in &t.exp[..MULT_ORDER] {
            assert!(!seen[e as usize], "repeat at {e}");
            seen[e as usize] = true;
        }
        assert!(!seen[0]);
    }

    #[test]
    fn table_mul_matches_carryless() {
        let samples = [0u16, 1, 2, 3, 0x8000, 0xffff, 0x1234, 0xbeef, 0x0100];
        for &a in &samples {
            for &b in &samples {
                assert_eq!((Gf16(a) * Gf16(b)).0, slow_mul(a, b), "{a:x}*{b:x}");
            }
        }
    }

    #[test]
    fn inverse_and_additive_self_inverse() {
        for a in (1u16..=0xffff).step_by(97) {
            let x = Gf16(a);
            assert_eq!(x * x.inverse().unwrap(), Gf16::ONE);
            assert_eq!(x + x, Gf16::ZERO);
        }
        assert!(Gf16::ZERO.inverse().is_none());
    }

    #[test]
    fn pow_agrees_with_repeated_mul() {
        let x = Gf16(0x1d3);
        let mut acc = Gf16::ONE;
        for e in 0..40 {
            assert_eq!(x.pow(e), acc);
            acc *= x;
        }
    }
}
