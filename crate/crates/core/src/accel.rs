//! Richardson-type extrapolation of slowly convergent partial sums.
//!
//! At `λ = 0` every solution decays like `n^{-α/2}`, so bilinear series converge
//! like `N^{1-α}` — far too slowly to sum directly. The partial sums admit an
//! expansion `S_N = S + Σ_i c_i N^{e_i}` with exponents built from `1-α` and
//! `2-2α` in integer steps; we eliminate the leading terms by solving for `S`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Leading tail exponents of the bilinear λ = 0 series, in decreasing order.
pub fn tail_exponents(alpha: f64, count: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..count)
        .flat_map(|j| [1.0 - alpha - j as f64, 2.0 - 2.0 * alpha - j as f64])
        .filter(|v| *v < -1e-9)
        .collect();
    e.sort_by(|a, b| b.partial_cmp(a).unwrap());
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    e.truncate(count);
    e
}

/// Intercept `S` of the model `S_N = S + Σ c_i N^{e_i}` interpolating the last
/// `exps.len() + 1` samples.
pub fn extrapolate(ns: &[f64], values: &[Complex64], exps: &[f64]) -> Complex64 {
    let k = exps.len();
    let m = k + 1;
    assert!(ns.len() >= m && values.len() == ns.len());
    let off = ns.len() - m;
    let n_ref = ns[ns.len() - 1];
    let mat = DMatrix::from_fn(m, m, |i, j| {
        if j == 0 {
            1.0
        } else {
            (ns[off + i] / n_ref).powf(exps[j - 1])
        }
    });
    let lu = mat.lu();
    let re = DVector::from_fn(m, |i, _| values[off + i].re);
    let im = DVector::from_fn(m, |i, _| values[off + i].im);
    match (lu.solve(&re), lu.solve(&im)) {
        (Some(x), Some(y)) => Complex64::new(x[0], y[0]),
        _ => values[values.len() - 1],
    }
}

/// Extrapolated value with error estimate `|S_k - S_{k-1}|` from the two highest orders.
pub fn extrapolate_with_error(ns: &[f64], values: &[Complex64], alpha: f64, order: usize) -> (Complex64, f64) {
    let order = order.min(ns.len() - 1).max(1);
    let exps = tail_exponents(alpha, order);
    let best = extrapolate(ns, values, &exps);
    let prev = extrapolate(ns, values, &exps[..order - 1]);
    (best, (best - prev).norm())
}
