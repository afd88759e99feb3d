//! Divided differences of the exponential function.
//!
//! The exponential integral over a simplex with vertex exponents `a_0..a_n` is
//! `n! vol(S) * exp[a_0, .., a_n]` (Hermite-Genocchi), and its first and second
//! moments are divided differences with repeated nodes. The naive recursive
//! formula divides by node gaps and loses all accuracy when nodes cluster, so
//! the divided table is taken instead from the exponential of the bidiagonal
//! matrix `diag(z) + superdiag(1)`, computed by scaling and squaring. Every
//! entry of that table is positive, so the squaring phase never cancels.

/// Number of Taylor terms in the scaled phase. Nodes are scaled to `|y| <= 1/2`,
/// which makes the remainder far below `f64` resolution.
const SERIES_TERMS: usize = 40;

/// `exp[z_0, ..., z_k]`, nodes may repeat.
pub fn exp_divided_difference(nodes: &[f64]) -> f64 {
    assert!(!nodes.is_empty(), "divided difference needs at least one node");
    let p = nodes.len();
    if p == 1 {
        return nodes[0].exp();
    }
    let center = nodes.iter().sum::<f64>() / p as f64;
    let spread = nodes
        .iter()
        .map(|z| (z - center).abs())
        .fold(0.0_f64, f64::max);
    let mut squarings = 0u32;
    while spread / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let scale = 2f64.powi(-(squarings as i32));
    let y: Vec<f64> = nodes.iter().map(|z| (z - center) * scale).collect();

    let mut table = scaled_table(&y, scale);
    for _ in 0..squarings {
        table = square_upper(&table);
    }
    center.exp() * table[0][p - 1]
}

/// Upper-triangular `exp(Y)` for `Y = diag(y) + scale * superdiag(1)`.
/// Entry `(i, j)` equals `scale^(j-i) * exp[y_i..y_j]`, expanded as
/// `sum_m h_m(y_i..y_j) / (m + j - i)!` with `h_m` the complete homogeneous
/// symmetric polynomials.
fn scaled_table(y: &[f64], scale: f64) -> Vec<Vec<f64>> {
    let p = y.len();
    let mut inv_fact = vec![1.0; SERIES_TERMS + p + 1];
    for k in 1..inv_fact.len() {
        inv_fact[k] = inv_fact[k - 1] / k as f64;
    }
    let mut t = vec![vec![0.0; p]; p];
    for i in 0..p {
        // h[m] over the growing node window y_i..y_j
        let mut h = vec![0.0; SERIES_TERMS];
        h[0] = 1.0;
        for m in 1..SERIES_TERMS {
            h[m] = h[m - 1] * y[i];
        }
        let mut pow = 1.0;
        for j in i..p {
            if j > i {
                for m in 1..SERIES_TERMS {
                    h[m] += y[j] * h[m - 1];
                }
                pow *= scale;
            }
            let d = j - i;
            let s: f64 = (0..SERIES_TERMS).map(|m| h[m] * inv_fact[m + d]).sum();
            t[i][j] = pow * s;
        }
    }
    t
}

fn square_upper(t: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = t.len();
    let mut out = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i..p {
            out[i][j] = (i..=j).map(|k| t[i][k] * t[k][j]).sum();
        }
    }
    out
}
