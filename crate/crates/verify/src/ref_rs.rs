//! Straight-line Reed–Solomon reference: framing, evaluation by Lagrange
//! basis, and a decoder that tries every `k`-subset of the received symbols.

use itertools::Itertools;

use crate::ref_gf::{inv, mul};

/// Header, payload bits, zero pad; `k * e` big-endian 16-bit words with
/// `e` sized for `max(bit_len, capacity)`.
pub fn frame(bytes: &[u8], bit_len: usize, capacity: usize, k: usize) -> Vec<u16> {
    let bits = bit_len.max(capacity) + 32;
    let e = bits.div_ceil(16 * k);
    let mut raw = (bit_len as u32).to_be_bytes().to_vec();
    raw.extend_from_slice(&bytes[..bit_len.div_ceil(8)]);
    raw.resize(2 * k * e, 0);
    raw.chunks(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect()
}

/// Evaluation of the polynomial with `coeffs` (lowest first) at `x`, by
/// summing monomials.
fn eval(coeffs: &[u16], x: u16) -> u16 {
    let mut acc = 0u16;
    let mut xp = 1u16;
    for &c in coeffs {
        acc ^= mul(c, xp);
        xp = mul(xp, x);
    }
    acc
}

/// Symbol `i` (1-based) is lane-wise evaluation at `x = i`; lane `j` has
/// coefficients `framed[c*e + j]` for `c = 0..k`.
pub fn encode(framed: &[u16], num_symbols: usize, k: usize) -> Vec<Vec<u16>> {
    let e = framed.len() / k;
    (1..=num_symbols)
        .map(|i| {
            (0..e)
                .map(|j| {
                    let coeffs: Vec<u16> = (0..k).map(|c| framed[c * e + j]).collect();
                    eval(&coeffs, i as u16)
                })
                .collect()
        })
        .collect()
}

/// Value at `x` of the unique polynomial of degree < `pts.len()` through
/// `pts`.
fn lagrange_at(pts: &[(u16, u16)], x: u16) -> u16 {
    let mut acc = 0u16;
    for (m, &(xm, ym)) in pts.iter().enumerate() {
        let mut num = 1u16;
        let mut den = 1u16;
        for (q, &(xq, _)) in pts.iter().enumerate() {
            if q != m {
                num = mul(num, x ^ xq);
                den = mul(den, xm ^ xq);
            }
        }
        acc ^= mul(ym, mul(num, inv(den)));
    }
    acc
}

/// Coefficients of the interpolant through `pts`, by Gauss–Jordan
/// elimination on the Vandermonde system.
fn coefficients(pts: &[(u16, u16)]) -> Vec<u16> {
    let k = pts.len();
    let mut rows: Vec<Vec<u16>> = pts
        .iter()
        .map(|&(x, y)| {
            let mut row = Vec::with_capacity(k + 1);
            let mut xp = 1u16;
            for _ in 0..k {
                row.push(xp);
                xp = mul(xp, x);
            }
            row.push(y);
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k)
            .find(|&r| rows[r][col] != 0)
            .expect("distinct points");
        rows.swap(col, piv);
        let iv = inv(rows[col][col]);
        for v in rows[col].iter_mut() {
            *v = mul(*v, iv);
        }
        for r in 0..k {
            if r != col && rows[r][col] != 0 {
                let f = rows[r][col];
                let pivot_row = rows[col].clone();
                for (v, p) in rows[r].iter_mut().zip(pivot_row) {
                    *v ^= mul(f, p);
                }
            }
        }
    }
    rows.into_iter().map(|r| r[k]).collect()
}

/// Brute-force unique decoding: the first `k`-subset whose interpolants
/// agree with at least `received.len() - r` whole symbols wins. Returns the
/// framed words.
pub fn brute_decode(k: usize, r: usize, received: &[(u16, Vec<u16>)]) -> Option<Vec<u16>> {
    if received.len() < k + 2 * r {
        return None;
    }
    let e = received[0].1.len();
    let need = received.len() - r;
    for subset in (0..received.len()).combinations(k) {
        let mut lanes: Vec<Vec<(u16, u16)>> = Vec::with_capacity(e);
        for j in 0..e {
            lanes.push(
                subset
                    .iter()
                    .map(|&p| (received[p].0, received[p].1[j]))
                    .collect(),
            );
        }
        let agree = received
            .iter()
            .filter(|(x, s)| (0..e).all(|j| lagrange_at(&lanes[j], *x) == s[j]))
            .count();
        if agree >= need {
            let per_lane: Vec<Vec<u16>> = lanes.iter().map(|l| coefficients(l)).collect();
            let mut framed = vec![0u16; k * e];
            for (j, coeffs) in per_lane.iter().enumerate() {
                for (c, &v) in coeffs.iter().enumerate() {
                    framed[c * e + j] = v;
                }
            }
            return Some(framed);
        }
    }
    None
}

/// Splits framed words back into `(bit_len, bytes)`, checking the header
/// and zero padding.
pub fn unframe(framed: &[u16]) -> Option<(usize, Vec<u8>)> {
    let bytes: Vec<u8> = framed.iter().flat_map(|w| w.to_be_bytes()).collect();
    let bit_len = u32::from_be_bytes(bytes[..4].try_into().ok()?) as usize;
    let body = &bytes[4..];
    if bit_len > body.len() * 8 {
        return None;
    }
    let used = bit_len.div_ceil(8);
    let mut payload = body[..used].to_vec();
    if !bit_len.is_multiple_of(8) {
        let mask = 0xFFu8 << (8 - bit_len % 8);
        if payload[used - 1] & !mask != 0 {
            return None;
        }
        payload[used - 1] &= mask;
    }
    body[used..]
        .iter()
        .all(|&b| b == 0)
        .then_some((bit_len, payload))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_points() {
        let framed = frame(&[0xDE, 0xAD, 0xBE, 0xEF], 32, 0, 3);
        let syms = encode(&framed, 6, 3);
        let rec: Vec<(u16, Vec<u16>)> = syms
            .iter()
            .enumerate()
            .map(|(i, s)| ((i + 1) as u16, s.clone()))
            .collect();
        assert_eq!(brute_decode(3, 1, &rec[..5]).unwrap(), framed);
        assert_eq!(
            unframe(&framed).unwrap(),
            (32, vec![0xDE, 0xAD, 0xBE, 0xEF])
        );
    }
}
