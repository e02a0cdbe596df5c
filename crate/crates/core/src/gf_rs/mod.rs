//! Reed–Solomon coding over GF(2^16).
//!
//! A framed payload is cut into `k` equal chunks. Element `j` of every chunk
//! forms lane `j`, the coefficient vector of one polynomial of degree below
//! `k`. Symbol `i` holds every lane's evaluation at the point `i`, so a
//! symbol is `len / k` elements long and any `k` symbols pin down all lanes.
//!
//! Decoding is Berlekamp–Welch per lane. Corruption is symbol-granular in
//! practice, so a lane is first checked against an interpolation through
//! trusted positions and only falls back to the full solver when that check
//! fails. Either route returns the unique polynomial within `r` errors, so
//! the shortcut never changes the answer.

mod field;
mod frame;
mod linalg;

use std::sync::Arc;

use thiserror::Error;

pub use field::{Gf16, FIELD_BITS, IRREDUCIBLE};
pub use frame::{elements_per_symbol, Decoded, Frame, HEADER_BITS, RESERVED_HEADER};

use crate::value::Value;

/// Largest usable evaluation count; points are the nonzero field elements.
pub const MAX_SYMBOLS: usize = (1 << FIELD_BITS) - 1;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RsError {
    #[error("invalid code parameters: k={k}, num_symbols={num_symbols}")]
    InvalidParameters { k: usize, num_symbols: usize },
    #[error("correcting {r} errors at k={k} needs {needed} symbols, got {got}")]
    InsufficientSymbols {
        k: usize,
        r: usize,
        needed: usize,
        got: usize,
    },
    #[error("received symbols disagree on length")]
    MismatchedLengths,
    #[error("duplicate or out-of-range evaluation index {0}")]
    BadIndex(u16),
    #[error("no polynomial of degree below {k} lies within {r} errors")]
    TooManyErrors { k: usize, r: usize },
    #[error("length header {header:#x} does not fit a {capacity}-bit frame")]
    InconsistentHeader { header: u32, capacity: usize },
    #[error("decoded the reserved frame where a payload was expected")]
    ReservedFrame,
}

/// One evaluation of every lane at the point `index`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    index: u16,
    elements: Arc<[Gf16]>,
}

impl Symbol {
    pub fn new(index: u16, elements: Vec<Gf16>) -> Self {
        Symbol {
            index,
            elements: elements.into(),
        }
    }

    /// The placeholder used for a missing symbol: all-zero elements.
    pub fn zero(index: u16, len: usize) -> Self {
        Symbol::new(index, vec![Gf16::ZERO; len])
    }

    /// 1-based evaluation index.
    pub fn index(&self) -> u16 {
        self.index
    }

    pub fn elements(&self) -> &[Gf16] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Semantic size: element count times the field exponent.
    pub fn bit_size(&self) -> u64 {
        (self.elements.len() * FIELD_BITS) as u64
    }

    /// Same elements, relabelled to another evaluation index.
    pub fn with_index(&self, index: u16) -> Self {
        Symbol {
            index,
            elements: self.elements.clone(),
        }
    }

    /// Same elements as `other`, ignoring the index.
    pub fn same_elements(&self, other: &Symbol) -> bool {
        Arc::ptr_eq(&self.elements, &other.elements) || self.elements == other.elements
    }
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Symbol#{}[{} el]", self.index, self.elements.len())
    }
}

/// The `num_symbols` evaluations produced by one encode call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    symbols: Vec<Symbol>,
    k: usize,
}

impl Codeword {
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    /// Symbol with 1-based evaluation index `index`.
    pub fn symbol(&self, index: usize) -> &Symbol {
        &self.symbols[index - 1]
    }
}

fn check_params(num_symbols: usize, k: usize) -> Result<(), RsError> {
    if k == 0 || num_symbols < k || num_symbols > MAX_SYMBOLS {
        return Err(RsError::InvalidParameters { k, num_symbols });
    }
    Ok(())
}

/// Encodes `payload` into `num_symbols` symbols, any `k` of which determine it.
pub fn rs_encode(payload: &Value, num_symbols: usize, k: usize) -> Result<Codeword, RsError> {
    encode_frame(Frame::Data(payload), 0, num_symbols, k)
}

/// Encodes a frame padded to hold at least `capacity_bits` payload bits, so
/// that every frame of the same capacity yields equally long symbols.
pub fn encode_frame(
    frame: Frame<'_>,
    capacity_bits: usize,
    num_symbols: usize,
    k: usize,
) -> Result<Codeword, RsError> {
    check_params(num_symbols, k)?;
    let framed = frame::frame_elements(frame, capacity_bits, k);
    Ok(encode_elements(&framed, num_symbols, k))
}

/// Encodes `k * e` raw elements; `framed.len()` must be a multiple of `k`.
pub fn encode_elements(framed: &[Gf16], num_symbols: usize, k: usize) -> Codeword {
    assert_eq!(
        framed.len() % k,
        0,
        "framed length must split into k chunks"
    );
    let e = framed.len() / k;
    let symbols = (1..=num_symbols)
        .map(|i| {
            let x = Gf16(i as u16);
            let elements = (0..e)
                .map(|j| {
                    (0..k)
                        .rev()
                        .fold(Gf16::ZERO, |acc, c| acc * x + framed[c * e + j])
                })
                .collect();
            Symbol::new(i as u16, elements)
        })
        .collect();
    Codeword { symbols, k }
}

/// Decodes a payload from `received`, correcting up to `r` corrupted symbols.
pub fn rs_decode(k: usize, r: usize, received: &[Symbol]) -> Result<Value, RsError> {
    match decode_frame(k, r, received)? {
        Decoded::Data(v) => Ok(v),
        Decoded::Reserved => Err(RsError::ReservedFrame),
    }
}

/// Decodes and un-frames, keeping the reserved marker distinguishable.
pub fn decode_frame(k: usize, r: usize, received: &[Symbol]) -> Result<Decoded, RsError> {
    let framed = decode_elements(k, r, received)?;
    frame::unframe(&framed)
}

/// Recovers the `k * e` framed elements behind `received`.
///
/// Requires `received.len() >= k + 2r` (unique decoding).
pub fn decode_elements(k: usize, r: usize, received: &[Symbol]) -> Result<Vec<Gf16>, RsError> {
    if k == 0 {
        return Err(RsError::InvalidParameters {
            k,
            num_symbols: received.len(),
        });
    }
    let needed = k + 2 * r;
    if received.len() < needed {
        return Err(RsError::InsufficientSymbols {
            k,
            r,
            needed,
            got: received.len(),
        });
    }
    let e = received[0].len();
    if received.iter().any(|s| s.len() != e) {
        return Err(RsError::MismatchedLengths);
    }
    let mut seen = std::collections::HashSet::with_capacity(received.len());
    for s in received {
        if s.index == 0 || !seen.insert(s.index) {
            return Err(RsError::BadIndex(s.index));
        }
    }

    let points: Vec<Gf16> = received.iter().map(|s| Gf16(s.index)).collect();
    let mut suspect = vec![false; received.len()];
    let mut interp = Interpolator::new(&points, &suspect, k);
    let mut out = vec![Gf16::ZERO; k * e];
    let mut lane = vec![Gf16::ZERO; received.len()];

    for j in 0..e {
        for (slot, s) in lane.iter_mut().zip(received) {
            *slot = s.elements[j];
        }
        let coeffs = match interp.try_lane(&points, &lane, r) {
            Some(c) => c,
            None => {
                let coeffs =
                    berlekamp_welch(&points, &lane, k, r).ok_or(RsError::TooManyErrors { k, r })?;
                let mut grew = false;
                for (p, (&x, &y)) in points.iter().zip(&lane).enumerate() {
                    if linalg::eval(&coeffs, x) != y && !suspect[p] {
                        suspect[p] = true;
                        grew = true;
                    }
                }
                if grew {
                    interp = Interpolator::new(&points, &suspect, k);
                }
                coeffs
            }
        };
        for (c, &v) in coeffs.iter().enumerate() {
            out[c * e + j] = v;
        }
    }
    Ok(out)
}

/// Interpolation through the first `k` non-suspect positions.
struct Interpolator {
    chosen: Vec<usize>,
    inverse: Vec<Gf16>,
    k: usize,
}

impl Interpolator {
    fn new(points: &[Gf16], suspect: &[bool], k: usize) -> Self {
        let mut chosen: Vec<usize> = (0..points.len()).filter(|&p| !suspect[p]).take(k).collect();
        // more than r suspects means the lane solver will fail anyway; keep k rows
        if chosen.len() < k {
            chosen = (0..k).collect();
        }
        let pts: Vec<Gf16> = chosen.iter().map(|&p| points[p]).collect();
        Interpolator {
            inverse: linalg::vandermonde_inverse(&pts),
            chosen,
            k,
        }
    }

    /// Coefficients if the interpolant disagrees with at most `r` positions.
    fn try_lane(&self, points: &[Gf16], lane: &[Gf16], r: usize) -> Option<Vec<Gf16>> {
        let k = self.k;
        let coeffs: Vec<Gf16> = (0..k)
            .map(|c| {
                self.chosen
                    .iter()
                    .enumerate()
                    .fold(Gf16::ZERO, |acc, (m, &p)| {
                        acc + self.inverse[c * k + m] * lane[p]
                    })
            })
            .collect();
        let mut misses = 0;
        for (&x, &y) in points.iter().zip(lane) {
            if linalg::eval(&coeffs, x) != y {
                misses += 1;
                if misses > r {
                    return None;
                }
            }
        }
        Some(coeffs)
    }
}

/// Unique decoding of one lane; `None` when no polynomial of degree below
/// `k` is within `r` errors.
fn berlekamp_welch(points: &[Gf16], lane: &[Gf16], k: usize, r: usize) -> Option<Vec<Gf16>> {
    if r == 0 {
        return None;
    }
    // unknowns: Q (k + r coefficients) then the low r coefficients of monic E
    let q_len = k + r;
    let cols = q_len + r;
    let mut a = Vec::with_capacity(points.len() * cols);
    let mut b = Vec::with_capacity(points.len());
    for (&x, &y) in points.iter().zip(lane) {
        let mut pw = Gf16::ONE;
        let mut powers = Vec::with_capacity(q_len + 1);
        for _ in 0..=q_len {
            powers.push(pw);
            pw *= x;
        }
        a.extend_from_slice(&powers[..q_len]);
        a.extend(powers[..r].iter().map(|&p| y * p));
        b.push(y * powers[r]);
    }
    let sol = linalg::solve(a, b, cols)?;
    let q = &sol[..q_len];
    let mut e_poly = sol[q_len..].to_vec();
    e_poly.push(Gf16::ONE);
    let (quot, rem) = linalg::divide(q, &e_poly);
    if rem.iter().any(|c| !c.is_zero()) {
        return None;
    }
    let mut coeffs = quot;
    if coeffs.len() > k && coeffs[k..].iter().any(|c| !c.is_zero()) {
        return None;
    }
    coeffs.resize(k, Gf16::ZERO);
    let misses = points
        .iter()
        .zip(lane)
        .filter(|(&x, &y)| linalg::eval(&coeffs, x) != y)
        .count();
    (misses <= r).then_some(coeffs)
}

/// XOR of two equally long element vectors; used to state linearity.
pub fn add_elements(a: &[Gf16], b: &[Gf16]) -> Vec<Gf16> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn garble(sym: &Symbol, rng: &mut ChaCha8Rng) -> Symbol {
        loop {
            let els: Vec<Gf16> = (0..sym.len()).map(|_| Gf16(rng.gen())).collect();
            if els.as_slice() != sym.elements() {
                return Symbol::new(sym.index(), els);
            }
        }
    }

    #[test]
    fn single_symbol_is_framed_payload() {
        let v = Value::from_bit_str("10110001").unwrap();
        let cw = rs_encode(&v, 1, 1).unwrap();
        assert_eq!(cw.num_symbols(), 1);
        assert_eq!(
            cw.symbols()[0].elements(),
            &[Gf16(0), Gf16(8), Gf16(0xb100)]
        );
        assert_eq!(rs_decode(1, 0, cw.symbols()).unwrap(), v);
    }

    #[test]
    fn rejects_bad_parameters() {
        let v = Value::from_bytes(vec![1]);
        assert!(matches!(
            rs_encode(&v, 3, 0),
            Err(RsError::InvalidParameters { .. })
        ));
        assert!(matches!(
            rs_encode(&v, 2, 3),
            Err(RsError::InvalidParameters { .. })
        ));
        assert!(rs_encode(&v, MAX_SYMBOLS + 1, 1).is_err());
    }

    #[test]
    fn full_rate_round_trip() {
        let v = Value::from_bytes((0..37).collect());
        for k in 1..=6 {
            let cw = rs_encode(&v, k, k).unwrap();
            assert_eq!(rs_decode(k, 0, cw.symbols()).unwrap(), v);
        }
    }

    #[test]
    fn every_pair_of_seven_decodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = Value::random(&mut rng, 64);
        let cw = rs_encode(&v, 7, 2).unwrap();
        for a in 0..7 {
            for b in a + 1..7 {
                let pick = [cw.symbols()[a].clone(), cw.symbols()[b].clone()];
                assert_eq!(rs_decode(2, 0, &pick).unwrap(), v, "subset {a},{b}");
            }
        }
    }

    #[test]
    fn corrects_two_of_seven() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = Value::random(&mut rng, 64);
        let cw = rs_encode(&v, 7, 2).unwrap();
        for a in 0..7 {
            for b in a + 1..7 {
                let mut syms = cw.symbols().to_vec();
                syms[a] = garble(&syms[a], &mut rng);
                syms[b] = garble(&syms[b], &mut rng);
                assert_eq!(rs_decode(2, 2, &syms).unwrap(), v);
            }
        }
    }

    #[test]
    fn three_corruptions_never_silently_pass_as_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = Value::random(&mut rng, 64);
        let cw = rs_encode(&v, 7, 2).unwrap();
        for trial in 0..200 {
            let mut syms = cw.symbols().to_vec();
            let mut idx: Vec<usize> = (0..7).collect();
            for i in 0..3 {
                let j = rng.gen_range(i..7);
                idx.swap(i, j);
            }
            for &p in &idx[..3] {
                syms[p] = garble(&syms[p], &mut rng);
            }
            match rs_decode(2, 2, &syms) {
                Err(_) => {}
                Ok(got) => {
                    // whatever came out must re-encode into at least 5 of the received symbols
                    let re = rs_encode(&got, 7, 2).unwrap();
                    let agree = re
                        .symbols()
                        .iter()
                        .zip(&syms)
                        .filter(|(a, b)| a.same_elements(b))
                        .count();
                    assert!(got != v || agree >= 5, "trial {trial}");
                }
            }
        }
    }

    #[test]
    fn enforces_unique_decoding_bound() {
        let v = Value::from_bytes(vec![9; 8]);
        let cw = rs_encode(&v, 5, 2).unwrap();
        let err = rs_decode(2, 2, cw.symbols()).unwrap_err();
        assert!(matches!(
            err,
            RsError::InsufficientSymbols {
                needed: 6,
                got: 5,
                ..
            }
        ));
    }

    #[test]
    fn rejects_duplicate_indices_and_ragged_lengths() {
        let v = Value::from_bytes(vec![9; 8]);
        let cw = rs_encode(&v, 4, 2).unwrap();
        let dup = vec![cw.symbols()[0].clone(), cw.symbols()[0].clone()];
        assert_eq!(rs_decode(2, 0, &dup).unwrap_err(), RsError::BadIndex(1));
        let ragged = vec![cw.symbols()[0].clone(), Symbol::zero(2, 1)];
        assert_eq!(
            rs_decode(2, 0, &ragged).unwrap_err(),
            RsError::MismatchedLengths
        );
    }

    #[test]
    fn reserved_frame_survives_coding() {
        let cw = encode_frame(Frame::Reserved, 64, 6, 2).unwrap();
        assert_eq!(decode_frame(2, 2, cw.symbols()).unwrap(), Decoded::Reserved);
        assert_eq!(
            rs_decode(2, 2, cw.symbols()).unwrap_err(),
            RsError::ReservedFrame
        );
    }

    #[test]
    fn lane_specific_corruption_is_corrected() {
        // corrupt different lanes of different symbols; total corrupted symbols stays 3
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let v = Value::random(&mut rng, 2000);
        let cw = rs_encode(&v, 13, 3).unwrap();
        let mut syms = cw.symbols().to_vec();
        for (p, lane) in [(1usize, 0usize), (6, 17), (11, 40)] {
            let mut els = syms[p].elements().to_vec();
            els[lane] += Gf16(1);
            els[lane + 1] += Gf16(0x55);
            syms[p] = Symbol::new(syms[p].index(), els);
        }
        assert_eq!(rs_decode(3, 5, &syms).unwrap(), v);
    }
}
