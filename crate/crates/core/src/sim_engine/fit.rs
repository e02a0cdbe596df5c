//! Least-squares fit of measured bits against the expected cost model
//! `bits ≈ a·n·log2(n)·L + b·n²·log2(n)`.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BitsFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

/// Model features for one `(n, L)` point.
pub fn features(n: usize, bit_len: usize) -> [f64; 2] {
    let nf = n as f64;
    let lg = nf.log2();
    [nf * lg * bit_len as f64, nf * nf * lg]
}

/// Fits `(n, L, total_bits)` samples; `None` when the normal equations are
/// singular (e.g. fewer than two distinct shapes).
pub fn fit_bits(samples: &[(usize, usize, u64)]) -> Option<BitsFit> {
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, l, y) in samples {
        let [x1, x2] = features(n, l);
        let y = y as f64;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * y;
        s2y += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= f64::EPSILON * s11 * s22 {
        return None;
    }
    let a = (s1y * s22 - s2y * s12) / det;
    let b = (s2y * s11 - s1y * s12) / det;
    let predict = |n, l| {
        let [x1, x2] = features(n, l);
        a * x1 + b * x2
    };
    Some(BitsFit {
        a,
        b,
        r_squared: r_squared(samples.iter().map(|&(n, l, y)| (predict(n, l), y as f64))),
    })
}

/// Coefficient of determination over `(predicted, observed)` pairs.
pub fn r_squared(pairs: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let count = pairs.clone().count() as f64;
    let mean = pairs.clone().map(|(_, y)| y).sum::<f64>() / count;
    let ss_tot: f64 = pairs.clone().map(|(_, y)| (y - mean).powi(2)).sum();
    let ss_res: f64 = pairs.map(|(p, y)| (y - p).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}
