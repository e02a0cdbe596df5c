use extba::gf_rs::{
    add_elements, decode_elements, elements_per_symbol, encode_elements, rs_decode, rs_encode,
    Gf16, Symbol,
};
use extba::Value;
use proptest::prelude::*;

fn hex_elements(s: &str) -> Vec<u16> {
    (0..s.len())
        .step_by(4)
        .map(|i| u16::from_str_radix(&s[i..i + 4], 16).unwrap())
        .collect()
}

#[test]
fn golden_vectors() {
    let text = include_str!("fixtures/rs_golden.txt");
    let mut cases = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split(' ').collect();
        let (k, n): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let bytes = if f[2] == "-" {
            Vec::new()
        } else {
            (0..f[2].len())
                .step_by(2)
                .map(|i| u8::from_str_radix(&f[2][i..i + 2], 16).unwrap())
                .collect()
        };
        let payload = Value::from_bytes(bytes);
        let cw = rs_encode(&payload, n, k).unwrap();
        let want: Vec<Vec<u16>> = f[3].split(',').map(hex_elements).collect();
        assert_eq!(cw.symbols().len(), n, "{line}");
        for (sym, w) in cw.symbols().iter().zip(&want) {
            let got: Vec<u16> = sym.elements().iter().map(|e| e.0).collect();
            assert_eq!(&got, w, "k={k} n={n} symbol {}", sym.index());
        }
        assert_eq!(rs_decode(k, 0, cw.symbols()).unwrap(), payload);
        cases += 1;
    }
    assert_eq!(cases, 16);
}

fn params() -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
    (1usize..=24).prop_flat_map(|n| (Just(n), 1..=n, prop::collection::vec(any::<u8>(), 0..40)))
}

proptest! {
    #[test]
    fn round_trip_from_any_k_symbols((n, k, bytes) in params(), seed in any::<u64>()) {
        let v = Value::from_bytes(bytes);
        let cw = rs_encode(&v, n, k).unwrap();
        let mut picked: Vec<Symbol> = cw.symbols().to_vec();
        // deterministic subset of size k
        let mut s = seed;
        while picked.len() > k {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            picked.remove((s >> 33) as usize % picked.len());
        }
        prop_assert_eq!(rs_decode(k, 0, &picked).unwrap(), v);
    }

    #[test]
    fn corrects_up_to_r_errors(
        (n, k, bytes) in params(),
        noise in prop::collection::vec(any::<u16>(), 64),
        victims in prop::collection::vec(any::<prop::sample::Index>(), 12),
    ) {
        let r = (n - k) / 2;
        let v = Value::from_bytes(bytes);
        let mut symbols = rs_encode(&v, n, k).unwrap().into_symbols();
        for (i, victim) in victims.iter().take(r).enumerate() {
            let at = victim.index(n);
            let len = symbols[at].len();
            let junk = (0..len).map(|j| Gf16(noise[(i * 7 + j) % noise.len()] | 1)).collect();
            symbols[at] = Symbol::new(symbols[at].index(), junk);
        }
        prop_assert_eq!(rs_decode(k, r, &symbols).unwrap(), v);
    }

    #[test]
    fn encoding_is_linear(
        n in 1usize..=16,
        k_seed in any::<prop::sample::Index>(),
        a in prop::collection::vec(any::<u16>(), 1..12),
        b_seed in any::<u64>(),
    ) {
        let k = k_seed.index(n) + 1;
        let e = a.len();
        let a: Vec<Gf16> = (0..k * e).map(|i| Gf16(a[i % e].wrapping_mul(i as u16 + 1))).collect();
        let b: Vec<Gf16> = (0..k * e).map(|i| Gf16((b_seed >> (i % 48)) as u16)).collect();
        let sum = encode_elements(&add_elements(&a, &b), n, k);
        let ca = encode_elements(&a, n, k);
        let cb = encode_elements(&b, n, k);
        for i in 0..n {
            let want = add_elements(ca.symbols()[i].elements(), cb.symbols()[i].elements());
            prop_assert_eq!(sum.symbols()[i].elements(), &want[..]);
        }
        prop_assert_eq!(decode_elements(k, 0, sum.symbols()).unwrap(), add_elements(&a, &b));
    }

    #[test]
    fn symbol_size_bound(bits in 0usize..5000, k in 1usize..48) {
        let bytes = vec![0x5Au8; bits.div_ceil(8)];
        let v = Value::from_bits(bytes, bits);
        let cw = rs_encode(&v, k, k).unwrap();
        let e = elements_per_symbol(bits, k);
        prop_assert!(cw.symbols().iter().all(|s| s.len() == e));
        // at most one extra element per symbol beyond an even split
        prop_assert!(16 * e * k >= bits + 32);
        prop_assert!(16 * e <= (bits + 32).div_ceil(k) + 16);
    }
}
