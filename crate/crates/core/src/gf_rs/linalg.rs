//! Dense linear algebra and polynomial helpers over GF(2^16).

use super::field::Gf16;

/// Solves `a * x = b` for any solution; free variables are set to zero.
///
/// `a` is row-major with `cols` columns. Returns `None` if inconsistent.
pub fn solve(mut a: Vec<Gf16>, mut b: Vec<Gf16>, cols: usize) -> Option<Vec<Gf16>> {
    let rows = b.len();
    debug_assert_eq!(a.len(), rows * cols);
    let mut pivot_cols = Vec::with_capacity(cols.min(rows));
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !a[r * cols + col].is_zero()) else {
            continue;
        };
        if p != row {
            for c in 0..cols {
                a.swap(p * cols + c, row * cols + c);
            }
            b.swap(p, row);
        }
        let inv = a[row * cols + col].inverse().expect("pivot is nonzero");
        for c in col..cols {
            a[row * cols + c] *= inv;
        }
        b[row] *= inv;
        for r in 0..rows {
            if r == row {
                continue;
            }
            let f = a[r * cols + col];
            if f.is_zero() {
                continue;
            }
            for c in col..cols {
                let v = a[row * cols + c];
                a[r * cols + c] += f * v;
            }
            let v = b[row];
            b[r] += f * v;
        }
        pivot_cols.push(col);
        row += 1;
    }
    if b[row..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![Gf16::ZERO; cols];
    for (r, &c) in pivot_cols.iter().enumerate() {
        x[c] = b[r];
    }
    Some(x)
}

/// Inverse of the Vandermonde matrix on `points` (row i = powers of points[i]).
///
/// Row-major `k x k`; multiplying by evaluations yields coefficients.
pub fn vandermonde_inverse(points: &[Gf16]) -> Vec<Gf16> {
    let k = points.len();
    let mut inv = vec![Gf16::ZERO; k * k];
    // column m of the inverse holds the coefficients of the m-th Lagrange basis poly
    for m in 0..k {
        let mut basis = vec![Gf16::ONE];
        let mut denom = Gf16::ONE;
        for (j, &pj) in points.iter().enumerate() {
            if j == m {
                continue;
            }
            basis = mul_linear(&basis, pj);
            denom *= points[m] + pj;
        }
        let scale = denom.inverse().expect("evaluation points are distinct");
        for (c, &coef) in basis.iter().enumerate() {
            inv[c * k + m] = coef * scale;
        }
    }
    inv
}

/// Multiplies `poly` (ascending coefficients) by `(x + root)`.
fn mul_linear(poly: &[Gf16], root: Gf16) -> Vec<Gf16> {
    let mut out = vec![Gf16::ZERO; poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i + 1] += c;
        out[i] += c * root;
    }
    out
}

/// Horner evaluation of ascending coefficients.
#[inline]
pub fn eval(coeffs: &[Gf16], x: Gf16) -> Gf16 {
    coeffs.iter().rev().fold(Gf16::ZERO, |acc, &c| acc * x + c)
}

/// Divides `num` by monic-or-not `den`; returns `(quotient, remainder)`.
pub fn divide(num: &[Gf16], den: &[Gf16]) -> (Vec<Gf16>, Vec<Gf16>) {
    let den_deg = den
        .iter()
        .rposition(|c| !c.is_zero())
        .expect("divisor must be nonzero");
    let lead_inv = den[den_deg].inverse().expect("leading coefficient nonzero");
    let mut rem = num.to_vec();
    if rem.len() <= den_deg {
        return (vec![], rem);
    }
    let mut quot = vec![Gf16::ZERO; rem.len() - den_deg];
    for i in (0..quot.len()).rev() {
        let c = rem[i + den_deg] * lead_inv;
        quot[i] = c;
        if c.is_zero() {
            continue;
        }
        for (j, &d) in den[..=den_deg].iter().enumerate() {
            rem[i + j] += c * d;
        }
    }
    rem.truncate(den_deg);
    (quot, rem)
}
