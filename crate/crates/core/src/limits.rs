//! Coupling sequences `λ_j → 0` along which `J(λ_j)` converges to a chosen
//! extension `J_t`, and measurements of that convergence.
//!
//! The construction: keep a fixed `E ∈ σ(J_t)` in the spectrum of every
//! `J(λ_j)`. Eigenvalue curves `E^(l)(λ)` increase with `λ` and tend to `-∞` as
//! `λ → 0`, so for each `l` with `E^(l)(λ_hi) > E` bisection finds `λ < λ_hi`
//! with `E^(l)(λ) = E`.

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::CoefficientFamily;
use crate::error::{invalid, Error, Result};
use crate::recurrence::orthogonal_polynomials;
use crate::spectral::{self, ExtensionM, ExtensionParam, LimitCircle, MSample, NevanlinnaQuad, Truncation};
use crate::tridiag;

type C64 = Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct LambdaSolve {
    pub lambda: f64,
    /// Final bisection bracket `E^(l)(lo) < E < E^(l)(hi)`.
    pub bracket: (f64, f64),
    /// `|E^(l)(λ) - E|`.
    pub residual: f64,
    pub n_used: usize,
}

/// `λ ∈ (0, λ_hi)` with `|E^(l)(λ) - E| < tol`, by bisection on the monotone curve.
pub fn lambda_for_eigenvalue(
    fam: &CoefficientFamily,
    e: f64,
    l: usize,
    lambda_hi: f64,
    tol: f64,
    tr: &Truncation,
) -> Result<LambdaSolve> {
    if !(lambda_hi > 0.0) || !(tol > 0.0) {
        return invalid("lambda_for_eigenvalue needs lambda_hi > 0 and tol > 0");
    }
    let curve = |lam: f64| spectral::stabilized_eigenvalue(fam, l, lam, tr);
    let (e_hi, n_hi) = curve(lambda_hi)?;
    if e_hi <= e {
        return Err(Error::Bracket(format!(
            "E^({l})({lambda_hi:e}) = {e_hi} <= E = {e}; increase l"
        )));
    }
    let mut hi = lambda_hi;
    let mut lo = lambda_hi;
    let mut best = (lambda_hi, e_hi - e, n_hi);
    loop {
        lo /= 2.0;
        if lo < 1e-14 {
            return Err(Error::Bracket(format!("E^({l})(λ) stays above E = {e} down to λ = {lo:e}")));
        }
        let (v, n) = curve(lo)?;
        if (v - e).abs() < best.1.abs() {
            best = (lo, v - e, n);
        }
        if v < e {
            break;
        }
        hi = lo;
    }
    for _ in 0..200 {
        if best.1.abs() < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v, n) = curve(mid)?;
        if (v - e).abs() < best.1.abs() {
            best = (mid, v - e, n);
        }
        if v < e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(best.1.abs() < tol) {
        return Err(Error::NoConvergence {
            what: format!("bisection for E^({l})(λ) = {e}"),
            n: best.2,
            change: best.1.abs(),
        });
    }
    Ok(LambdaSolve { lambda: best.0, bracket: (lo, hi), residual: best.1.abs(), n_used: best.2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceElement {
    pub j: usize,
    pub lambda: f64,
    /// Eigenvalue index `l` with `E^(l)(λ_j) = E`.
    pub level: usize,
    /// `λ_j / λ_{j-1}`, with `λ_0 = 1`.
    pub ratio: f64,
    pub residual: f64,
    pub n_used: usize,
    /// Distance from `E` to the spectrum of the stabilised truncation.
    pub spectrum_distance: f64,
}

/// Projective distance `|sin(θ_1 - θ_2)|` between two extension parameters.
pub fn param_distance(a: ExtensionParam, b: ExtensionParam) -> f64 {
    let (a0, a1) = a.projective();
    let (b0, b1) = b.projective();
    (a0 * b1 - a1 * b0).abs() / (a0.hypot(a1) * b0.hypot(b1))
}

/// `λ_1 > λ_2 > …` with `E ∈ σ(J(λ_j))` and `λ_j ≤ λ_{j-1}/2`, converging to `J_t`.
pub fn select_sequence(
    fam: &CoefficientFamily,
    t: ExtensionParam,
    e: f64,
    count: usize,
    tol: f64,
    tr: &Truncation,
) -> Result<Vec<SequenceElement>> {
    if count == 0 {
        return invalid("select_sequence needs count >= 1");
    }
    let te = spectral::extension_param_for(fam, e, 1e-8)?;
    let dist = param_distance(te, t);
    if dist > 1e-6 {
        return invalid(format!(
            "E = {e} is not in the spectrum of J_t for t = {} (E belongs to t = {}, distance {dist:.2e})",
            t.label(),
            te.label()
        ));
    }
    let mut out = Vec::with_capacity(count);
    let mut lambda_prev = 1.0;
    let mut level = 0usize;
    for j in 1..=count {
        let hi = lambda_prev / 2.0;
        // The smallest admissible level: curves do not cross, so scan upwards.
        loop {
            let (v, _) = spectral::stabilized_eigenvalue(fam, level, hi, tr)?;
            if v > e {
                break;
            }
            level += 1;
            if level > 1 << 16 {
                return Err(Error::Bracket(format!("no level with E^(l)({hi:e}) > {e}")));
            }
        }
        let sol = lambda_for_eigenvalue(fam, e, level, hi, tol, tr)?;
        let (d, off) = spectral::truncation(fam, sol.lambda, sol.n_used);
        let ev = tridiag::kth_eigenvalue(&d, &off, level, None);
        out.push(SequenceElement {
            j,
            lambda: sol.lambda,
            level,
            ratio: sol.lambda / lambda_prev,
            residual: sol.residual,
            n_used: sol.n_used,
            spectrum_distance: (ev - e).abs(),
        });
        lambda_prev = sol.lambda;
    }
    Ok(out)
}

/// `m(z, t)` from a quadruple, failing on a pole (`z ∈ σ(J_t)`).
pub fn extension_value(quad: &NevanlinnaQuad, t: ExtensionParam) -> Result<C64> {
    match spectral::extension_m(quad, t) {
        ExtensionM::Value(v) => Ok(v),
        ExtensionM::Pole => invalid(format!("z is an eigenvalue of J_t for t = {}", t.label())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Spiral {
    pub z: (f64, f64),
    pub samples: Vec<MSample>,
    pub circle: LimitCircle,
    /// `| |M - c| - r |` per sample.
    pub distances: Vec<f64>,
}

/// `M(z, λ)` along a decreasing λ grid, with the limit circle at `z`.
pub fn spiral_samples(
    fam: &CoefficientFamily,
    z: C64,
    lambda_grid: &[f64],
    circle_points: usize,
    tr: &Truncation,
) -> Result<Spiral> {
    if lambda_grid.is_empty() {
        return invalid("spiral needs a non-empty lambda grid");
    }
    if lambda_grid.iter().any(|l| !(*l > 0.0)) {
        return invalid("spiral needs a strictly positive lambda grid");
    }
    if !(z.im > 0.0) {
        return invalid("spiral needs Im z > 0");
    }
    let quad = spectral::nevanlinna_quad(fam, z, 1e-8)?;
    let circle = spectral::limit_circle(&quad, circle_points)?;
    let samples = lambda_grid
        .iter()
        .map(|&lam| spectral::weyl_m(fam, lam, z, tr))
        .collect::<Result<Vec<_>>>()?;
    let distances = samples.iter().map(|s| circle.distance(s.value())).collect();
    Ok(Spiral { z: (z.re, z.im), samples, circle, distances })
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenError {
    pub j: usize,
    pub lambda: f64,
    pub n: usize,
    pub m: usize,
    pub error: f64,
}

/// `g_nm(z, t) = (m(z, t) P⁰_max + Q⁰_max) P⁰_min` of the extension `J_t`.
pub fn extension_green(fam: &CoefficientFamily, quad: &NevanlinnaQuad, t: ExtensionParam, n: usize, m: usize) -> Result<C64> {
    let mv = extension_value(quad, t)?;
    let z = C64::new(quad.z.0, quad.z.1);
    let (hi, lo) = (n.max(m), n.min(m));
    let pq = orthogonal_polynomials(fam, 0.0, z, hi.max(1))?;
    Ok((mv * pq.p[hi] + pq.q[hi]) * pq.p[lo])
}

/// `|G_nm(z, λ_j) - g_nm(z, t)|` for each sequence element and index pair.
pub fn green_convergence(
    fam: &CoefficientFamily,
    lambdas: &[f64],
    t: ExtensionParam,
    z: C64,
    pairs: &[(usize, usize)],
    tr: &Truncation,
) -> Result<Vec<GreenError>> {
    let quad = spectral::nevanlinna_quad(fam, z, 1e-8)?;
    let limits: Vec<C64> = pairs
        .iter()
        .map(|&(n, m)| extension_green(fam, &quad, t, n, m))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(lambdas.len() * pairs.len());
    for (j, &lam) in lambdas.iter().enumerate() {
        for (&(n, m), g) in pairs.iter().zip(&limits) {
            let gl = spectral::green_function(fam, lam, z, n, m, tr)?;
            out.push(GreenError { j: j + 1, lambda: lam, n, m, error: (gl - g).norm() });
        }
    }
    Ok(out)
}
