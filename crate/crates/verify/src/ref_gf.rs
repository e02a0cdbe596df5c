//! Bit-serial GF(2^16) arithmetic, written without tables so it can serve
//! as a check on the table-driven field.

/// x^16 + x^12 + x^3 + x + 1
pub const POLY: u32 = 0x1_100B;

pub fn mul(a: u16, b: u16) -> u16 {
    let (mut a, mut b) = (a as u32, b as u32);
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & 0x1_0000 != 0 {
            a ^= POLY;
        }
    }
    acc as u16
}

pub fn pow(a: u16, mut e: u32) -> u16 {
    let (mut base, mut acc) = (a, 1u16);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    acc
}

/// Fermat inverse, `a^(2^16 - 2)`.
pub fn inv(a: u16) -> u16 {
    assert_ne!(a, 0, "zero has no inverse");
    pow(a, (1 << 16) - 2)
}
