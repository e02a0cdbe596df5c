//! Proposal-level wrappers over the codec: `Bottom` travels as the reserved
//! frame, and every frame in an instance is padded to one capacity so that
//! all symbols of that instance have the same length.

use crate::gf_rs::{self, elements_per_symbol, Codeword, Decoded, Frame, RsError, Symbol};
use crate::value::Proposal;

pub fn encode_proposal(
    p: &Proposal,
    capacity_bits: usize,
    num_symbols: usize,
    k: usize,
) -> Result<Codeword, RsError> {
    let frame = match p {
        Proposal::Value(v) => Frame::Data(v),
        Proposal::Bottom => Frame::Reserved,
    };
    gf_rs::encode_frame(frame, capacity_bits, num_symbols, k)
}

/// Decodes a proposal; values longer than `capacity_bits` are rejected since
/// no correct process can have encoded them.
pub fn decode_proposal(
    k: usize,
    r: usize,
    received: &[Symbol],
    capacity_bits: usize,
) -> Result<Proposal, RsError> {
    match gf_rs::decode_frame(k, r, received)? {
        Decoded::Reserved => Ok(Proposal::Bottom),
        Decoded::Data(v) if v.bit_len() <= capacity_bits => Ok(Proposal::Value(v)),
        Decoded::Data(v) => Err(RsError::InconsistentHeader {
            header: v.bit_len() as u32,
            capacity: capacity_bits,
        }),
    }
}

/// Symbol length, in elements, for frames of `capacity_bits` at data count `k`.
pub fn symbol_len(capacity_bits: usize, k: usize) -> usize {
    elements_per_symbol(capacity_bits, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    #[test]
    fn bottom_and_values_share_symbol_length() {
        let v = Proposal::Value(Value::from_bytes(vec![7; 12]));
        let a = encode_proposal(&v, 96, 5, 2).unwrap();
        let b = encode_proposal(&Proposal::Bottom, 96, 5, 2).unwrap();
        assert_eq!(a.symbols()[0].len(), b.symbols()[0].len());
        assert_eq!(a.symbols()[0].len(), symbol_len(96, 2));
        assert_eq!(decode_proposal(2, 1, a.symbols(), 96).unwrap(), v);
        assert_eq!(
            decode_proposal(2, 1, b.symbols(), 96).unwrap(),
            Proposal::Bottom
        );
    }

    #[test]
    fn over_capacity_value_is_rejected() {
        let v = Proposal::Value(Value::from_bytes(vec![7; 12]));
        let a = encode_proposal(&v, 96, 3, 1).unwrap();
        assert!(decode_proposal(1, 0, a.symbols(), 95).is_err());
    }
}
