//! Symmetric tridiagonal kernels: Sturm counts, bisection, inverse iteration and
//! pivoted linear solves. `diag` has length `n`, `off` length `n - 1`.

use num_complex::{Complex64, ComplexFloat};

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let scale = diag.iter().chain(off).fold(1.0f64, |m, v| m.max(v.abs()));
    let pivmin = f64::MIN_POSITIVE.sqrt() * scale;
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin enclosure of the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    (lo - pad, hi + pad)
}

/// `k`-th smallest eigenvalue (0-based) by Sturm bisection to full precision,
/// optionally inside a known bracket.
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize, bracket: Option<(f64, f64)>) -> f64 {
    let (mut lo, mut hi) = bracket.unwrap_or_else(|| gershgorin(diag, off));
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues in `[lo, hi)`, ascending.
pub fn eigenvalues_in(diag: &[f64], off: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let first = sturm_count(diag, off, lo);
    let last = sturm_count(diag, off, hi);
    (first..last)
        .map(|k| kth_eigenvalue(diag, off, k, Some((lo, hi))))
        .collect()
}

/// Solves the tridiagonal system with Gaussian elimination and partial pivoting.
/// Returns `None` on an exactly singular pivot.
pub fn solve<T: ComplexFloat<Real = f64>>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Option<Vec<T>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut dl = sub.to_vec();
    let mut du = sup.to_vec();
    let mut b = rhs.to_vec();
    if n == 0 {
        return Some(b);
    }
    let zero = T::zero();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == zero {
                return None;
            }
            let fact = dl[i] / d[i];
            d[i + 1] = d[i + 1] - fact * du[i];
            b[i + 1] = b[i + 1] - fact * b[i];
            dl[i] = zero;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = zero;
            }
            du[i] = temp;
            let temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - fact * b[i + 1];
        }
    }
    if d[n - 1] == zero {
        return None;
    }
    b[n - 1] = b[n - 1] / d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
    Some(b)
}

/// Solves `(T - z) x = rhs` for the real symmetric tridiagonal `T`.
pub fn solve_shifted(diag: &[f64], off: &[f64], z: Complex64, rhs: &[Complex64]) -> Option<Vec<Complex64>> {
    let d: Vec<Complex64> = diag.iter().map(|&v| Complex64::new(v, 0.0) - z).collect();
    let e: Vec<Complex64> = off.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    solve(&e, &d, &e, rhs)
}

/// Unit eigenvector for the (simple) eigenvalue `ev` by inverse iteration, normalised
/// with a nonnegative first component.
pub fn eigenvector(diag: &[f64], off: &[f64], ev: f64) -> Vec<f64> {
    let n = diag.len();
    let scale = diag.iter().chain(off).fold(1.0f64, |m, v| m.max(v.abs()));
    let mut shift = ev;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        let d: Vec<f64> = diag.iter().map(|&v| v - shift).collect();
        let y = match solve(off, &d, off, &x) {
            Some(y) => y,
            None => {
                shift += 4.0 * f64::EPSILON * scale;
                continue;
            }
        };
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
    }
    let pivot = if x[0].abs() > 1e-200 { x[0] } else { x.iter().cloned().fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m }) };
    if pivot < 0.0 {
        for v in &mut x {
            *v = -*v;
        }
    }
    x
}
