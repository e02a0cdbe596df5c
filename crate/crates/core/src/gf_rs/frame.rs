//! Payload framing: a 32-bit big-endian bit-length header, the payload bits,
//! then zero padding up to a whole number of code rows.

use super::field::{Gf16, FIELD_BITS};
use super::RsError;
use crate::value::Value;

pub const HEADER_BITS: usize = 32;

/// Header value reserved for the distinguished "no value" frame.
pub const RESERVED_HEADER: u32 = u32::MAX;

/// What gets framed: a payload, or the reserved marker.
#[derive(Clone, Copy, Debug)]
pub enum Frame<'a> {
    Data(&'a Value),
    Reserved,
}

/// Outcome of un-framing a decoded element vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Data(Value),
    Reserved,
}

/// Elements per symbol for a frame of `payload_bits` framed at data count `k`.
pub fn elements_per_symbol(payload_bits: usize, k: usize) -> usize {
    (payload_bits + HEADER_BITS).div_ceil(k * FIELD_BITS)
}

/// Lays the frame out as `k * elements_per_symbol(max(len, capacity), k)`
/// field elements.
pub fn frame_elements(frame: Frame<'_>, capacity_bits: usize, k: usize) -> Vec<Gf16> {
    let (header, payload) = match frame {
        Frame::Data(v) => (v.bit_len() as u32, Some(v)),
        Frame::Reserved => (RESERVED_HEADER, None),
    };
    let payload_bits = payload.map_or(0, Value::bit_len);
    let per_symbol = elements_per_symbol(payload_bits.max(capacity_bits), k);
    let total = k * per_symbol;
    let mut bytes = Vec::with_capacity(total * 2);
    bytes.extend_from_slice(&header.to_be_bytes());
    if let Some(v) = payload {
        bytes.extend_from_slice(v.as_bytes());
    }
    bytes.resize(total * 2, 0);
    bytes
        .chunks_exact(2)
        .map(|c| Gf16(u16::from_be_bytes([c[0], c[1]])))
        .collect()
}

/// Inverse of [`frame_elements`]. Rejects headers that do not fit and
/// nonzero padding.
pub fn unframe(elements: &[Gf16]) -> Result<Decoded, RsError> {
    let bytes: Vec<u8> = elements.iter().flat_map(|e| e.0.to_be_bytes()).collect();
    if bytes.len() < 4 {
        return Err(RsError::InconsistentHeader {
            header: 0,
            capacity: 0,
        });
    }
    let header = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    let body = &bytes[4..];
    let capacity = body.len() * 8;
    if header == RESERVED_HEADER {
        return if body.iter().all(|&b| b == 0) {
            Ok(Decoded::Reserved)
        } else {
            Err(RsError::InconsistentHeader { header, capacity })
        };
    }
    let bit_len = header as usize;
    if bit_len > capacity {
        return Err(RsError::InconsistentHeader { header, capacity });
    }
    let value = Value::from_bits(body[..bit_len.div_ceil(8)].to_vec(), bit_len);
    // padding past the declared length must be zero
    let tail_ok = value.as_bytes() == &body[..bit_len.div_ceil(8)]
        && body[bit_len.div_ceil(8)..].iter().all(|&b| b == 0);
    if !tail_ok {
        return Err(RsError::InconsistentHeader { header, capacity });
    }
    Ok(Decoded::Data(value))
}
