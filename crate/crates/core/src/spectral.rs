//! Spectra of `J(λ)` truncations, eigenvalue curves, the Weyl function `M(z, λ)`,
//! the Green function, and the Nevanlinna quadruple of `J(0)` with the
//! self-adjoint extensions `J_t` it parametrises.

use num_complex::Complex64;
use serde::Serialize;

use crate::accel;
use crate::coeffs::CoefficientFamily;
use crate::error::{invalid, Error, Result};
use crate::recurrence::orthogonal_polynomials;
use crate::tridiag;

type C64 = Complex64;

/// Adaptive truncation control: stop when successive refinements change by less
/// than `tol`; give up beyond `n_max`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Truncation {
    pub tol: f64,
    pub n_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { tol: 1e-12, n_max: 1 << 20 }
    }
}

/// Diagonal `λ f_0 … λ f_{n-1}` and off-diagonal `a_0 … a_{n-2}` of the `n`-truncation.
pub fn truncation(fam: &CoefficientFamily, lambda: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = (0..n).map(|k| lambda * fam.f(k)).collect();
    let off = (0..n.saturating_sub(1)).map(|k| fam.a(k)).collect();
    (diag, off)
}

/// Eigenvalues of the `n × n` truncation, ascending, optionally restricted to `[lo, hi)`.
pub fn truncated_eigenvalues(
    fam: &CoefficientFamily,
    lambda: f64,
    n: usize,
    window: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    if n < 1 {
        return invalid("truncation size must be >= 1");
    }
    let (d, e) = truncation(fam, lambda, n);
    let (lo, hi) = window.unwrap_or_else(|| tridiag::gershgorin(&d, &e));
    Ok(tridiag::eigenvalues_in(&d, &e, lo, hi))
}

/// Column 0 of `(J_n(λ) - z)^{-1}`.
pub fn resolvent_column(fam: &CoefficientFamily, lambda: f64, z: C64, n: usize) -> Result<Vec<C64>> {
    let (d, e) = truncation(fam, lambda, n);
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    rhs[0] = C64::new(1.0, 0.0);
    tridiag::solve_shifted(&d, &e, z, &rhs).ok_or_else(|| Error::InvalidParameter("z is an eigenvalue of the truncation".into()))
}

/// Truncation size from which the `j`-th eigenvector is expected to be resolved.
fn start_size(fam: &CoefficientFamily, lambda: f64, j: usize) -> usize {
    let h = lambda.powf(1.0 / fam.delta());
    let x4 = (39.0f64 / 8.0).powf(1.0 / fam.delta());
    let n4 = (x4 / h).min(1e8) as usize;
    (2 * j + 16).max(n4 + 8)
}

/// Stabilised `j`-th lowest eigenvalue of `J(λ)` with the truncation size used.
pub fn stabilized_eigenvalue(fam: &CoefficientFamily, j: usize, lambda: f64, tr: &Truncation) -> Result<(f64, usize)> {
    if !(lambda > 0.0) {
        return invalid("eigenvalue curves need lambda > 0");
    }
    let mut n = start_size(fam, lambda, j);
    let kth = |n: usize| {
        let (d, e) = truncation(fam, lambda, n);
        tridiag::kth_eigenvalue(&d, &e, j, None)
    };
    let mut prev = kth(n);
    loop {
        let next_n = n + n / 2;
        if next_n > tr.n_max {
            return Err(Error::NoConvergence {
                what: format!("eigenvalue E^({j}) at lambda = {lambda:e}"),
                n,
                change: f64::NAN,
            });
        }
        let next = kth(next_n);
        let change = (next - prev).abs();
        if change <= tr.tol * prev.abs().max(1.0) {
            return Ok((next, next_n));
        }
        prev = next;
        n = next_n;
    }
}

/// `(E_j, dE_j/dλ)` on a fixed truncation, the derivative by Hellmann–Feynman `<ψ, F ψ>`.
pub fn hellmann_feynman(fam: &CoefficientFamily, lambda: f64, j: usize, n: usize) -> (f64, f64) {
    let (d, e) = truncation(fam, lambda, n);
    let ev = tridiag::kth_eigenvalue(&d, &e, j, None);
    let psi = tridiag::eigenvector(&d, &e, ev);
    let deriv = psi.iter().enumerate().map(|(k, v)| fam.f(k) * v * v).sum();
    (ev, deriv)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveSample {
    pub lambda: f64,
    pub value: f64,
    pub n_used: usize,
    /// Hellmann–Feynman derivative `dE/dλ` on the stabilised truncation.
    pub derivative: f64,
}

/// Samples of the `j`-th eigenvalue curve `E^(j)(λ)` on a grid of positive `λ`.
pub fn eigenvalue_curve(fam: &CoefficientFamily, j: usize, grid: &[f64], tr: &Truncation) -> Result<Vec<CurveSample>> {
    grid.iter()
        .map(|&lambda| {
            let (value, n_used) = stabilized_eigenvalue(fam, j, lambda, tr)?;
            let (_, derivative) = hellmann_feynman(fam, lambda, j, n_used);
            Ok(CurveSample { lambda, value, n_used, derivative })
        })
        .collect()
}

/// Value of a Weyl function with its provenance.
#[derive(Clone, Debug, Serialize)]
pub struct MSample {
    pub z: (f64, f64),
    pub lambda: f64,
    pub m: (f64, f64),
    pub n_used: usize,
    /// `|M - G_00|` against a truncated resolvent at twice the depth.
    pub crosscheck: f64,
}

impl MSample {
    pub fn value(&self) -> C64 {
        C64::new(self.m.0, self.m.1)
    }
}

/// Continued fraction `s_n = 1/(λ f_n - z - a_n² s_{n+1})`, `s_depth = 0`.
pub fn continued_fraction(fam: &CoefficientFamily, lambda: f64, z: C64, depth: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for n in (0..depth).rev() {
        let a = fam.a(n);
        s = (lambda * fam.f(n) - z - s * (a * a)).inv();
    }
    s
}

/// Weyl function `M(z, λ) = <e_0, (J(λ) - z)^{-1} e_0>` for `λ > 0`.
pub fn weyl_m(fam: &CoefficientFamily, lambda: f64, z: C64, tr: &Truncation) -> Result<MSample> {
    if !(lambda > 0.0) {
        return invalid("weyl_m needs lambda > 0 (use extension_m at lambda = 0)");
    }
    if z.im == 0.0 {
        return invalid("weyl_m needs Im z != 0");
    }
    let mut depth = start_size(fam, lambda, 0).max(32);
    let mut prev = continued_fraction(fam, lambda, z, depth);
    loop {
        let next_depth = 2 * depth;
        if next_depth > tr.n_max {
            return Err(Error::NoConvergence {
                what: format!("continued fraction at lambda = {lambda:e}"),
                n: depth,
                change: f64::NAN,
            });
        }
        let next = continued_fraction(fam, lambda, z, next_depth);
        if (next - prev).norm() <= tr.tol {
            let col = resolvent_column(fam, lambda, z, 2 * next_depth)?;
            return Ok(MSample {
                z: (z.re, z.im),
                lambda,
                m: (next.re, next.im),
                n_used: next_depth,
                crosscheck: (col[0] - next).norm(),
            });
        }
        prev = next;
        depth = next_depth;
    }
}

/// Green function `G_nm(z, λ) = (M P_max + Q_max) P_min`.
pub fn green_function(fam: &CoefficientFamily, lambda: f64, z: C64, n: usize, m: usize, tr: &Truncation) -> Result<C64> {
    let mv = weyl_m(fam, lambda, z, tr)?.value();
    let (hi, lo) = (n.max(m), n.min(m));
    let pq = orthogonal_polynomials(fam, lambda, z, hi.max(1))?;
    Ok((mv * pq.p[hi] + pq.q[hi]) * pq.p[lo])
}

/// Self-adjoint extension parameter `t ∈ ℝ ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ExtensionParam {
    Finite(f64),
    Infinity,
}

impl ExtensionParam {
    /// Homogeneous coordinates `(τ0 : τ1)` with `t = τ0/τ1`.
    pub fn projective(&self) -> (f64, f64) {
        match *self {
            ExtensionParam::Finite(t) => (t, 1.0),
            ExtensionParam::Infinity => (1.0, 0.0),
        }
    }

    /// `t = cot θ`, so `θ = 0` is `∞` and `θ = π/2` is `0`.
    pub fn from_angle(theta: f64) -> ExtensionParam {
        let (s, c) = theta.sin_cos();
        if s.abs() < 1e-300 {
            ExtensionParam::Infinity
        } else {
            ExtensionParam::Finite(c / s)
        }
    }

    pub fn from_projective(t0: f64, t1: f64) -> ExtensionParam {
        if t1 == 0.0 {
            ExtensionParam::Infinity
        } else {
            ExtensionParam::Finite(t0 / t1)
        }
    }

    pub fn parse(s: &str) -> Option<ExtensionParam> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Some(ExtensionParam::Infinity),
            other => other.parse::<f64>().ok().filter(|v| v.is_finite()).map(ExtensionParam::Finite),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ExtensionParam::Finite(t) => format!("{t}"),
            ExtensionParam::Infinity => "inf".into(),
        }
    }
}

/// `A, B, C, D` at `w = 0` of the λ = 0 polynomials.
#[derive(Clone, Debug, Serialize)]
pub struct NevanlinnaQuad {
    pub z: (f64, f64),
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub c: (f64, f64),
    pub d: (f64, f64),
    /// Largest index summed.
    pub truncation: usize,
    /// Estimated remaining error after tail extrapolation, relative to `1 + |entry|`.
    pub tail_estimate: f64,
}

fn pair(v: C64) -> (f64, f64) {
    (v.re, v.im)
}

fn cplx(p: (f64, f64)) -> C64 {
    C64::new(p.0, p.1)
}

impl NevanlinnaQuad {
    pub fn entries(&self) -> [C64; 4] {
        [cplx(self.a), cplx(self.b), cplx(self.c), cplx(self.d)]
    }

    pub fn determinant(&self) -> C64 {
        let [a, b, c, d] = self.entries();
        a * d - b * c
    }

    /// First-order bound on the error of `AD - BC` implied by `tail_estimate`.
    pub fn determinant_error_bound(&self) -> f64 {
        let [a, b, c, d] = self.entries().map(|v| v.norm());
        let e = |x: f64| self.tail_estimate * (1.0 + x);
        e(a) * d + a * e(d) + e(b) * c + b * e(c) + 4.0 * f64::EPSILON * (a * d + b * c)
    }
}

/// Checkpointed partial sums of the λ = 0 series.
struct Lambda0Sums {
    ns: Vec<f64>,
    /// A, B, C, D and Σ|P_n(z)|² at each checkpoint.
    cols: [Vec<C64>; 5],
}

const LEVELS: usize = 8;
const ORDER: usize = 5;

/// Index beyond which `a_n` dominates `|z|` comfortably, rounded to a multiple of 4.
fn asymptotic_start(fam: &CoefficientFamily, z: C64, base: usize) -> usize {
    let target = 64.0 * (1.0 + z.norm());
    let mut n = base.max(64);
    while fam.a(n) < target {
        n *= 2;
    }
    (n + 3) / 4 * 4
}

fn lambda0_sums(fam: &CoefficientFamily, z: C64, n0: usize) -> Lambda0Sums {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let a0 = fam.a(0);
    // (P(z), Q(z)) and (P(0), Q(0)) at levels n-1 and n.
    let (mut pz0, mut pz1) = (one, z / a0);
    let (mut qz0, mut qz1) = (zero, one / a0);
    let (mut p00, mut p01) = (1.0f64, 0.0f64);
    let (mut q00, mut q01) = (0.0f64, 1.0 / a0);
    let mut sums = [zero; 5];
    let mut ns = Vec::with_capacity(LEVELS);
    let mut cols: [Vec<C64>; 5] = Default::default();
    let last = n0 << (LEVELS - 1);
    let mut next_mark = n0;
    let mut n = 0usize;
    loop {
        // accumulate index n
        sums[0] += qz0 * q00;
        sums[1] += pz0 * q00;
        sums[2] += qz0 * p00;
        sums[3] += pz0 * p00;
        sums[4] += C64::new(pz0.norm_sqr(), 0.0);
        n += 1;
        if n == next_mark {
            ns.push(n as f64);
            cols[0].push(z * sums[0]);
            cols[1].push(z * sums[1] - one);
            cols[2].push(-(z * sums[2]) - one);
            cols[3].push(-(z * sums[3]));
            cols[4].push(sums[4]);
            if n == last {
                break;
            }
            next_mark *= 2;
        }
        // advance index n-1 -> n (values at n are pz1 etc.), then compute n+1
        let am = fam.a(n - 1);
        let an = fam.a(n);
        let pz2 = (z * pz1 - pz0 * am) / an;
        let qz2 = (z * qz1 - qz0 * am) / an;
        let p02 = -p00 * am / an;
        let q02 = -q00 * am / an;
        pz0 = pz1;
        pz1 = pz2;
        qz0 = qz1;
        qz1 = qz2;
        p00 = p01;
        p01 = p02;
        q00 = q01;
        q01 = q02;
    }
    Lambda0Sums { ns, cols }
}

/// Nevanlinna quadruple of the λ = 0 polynomials at `w = 0`, with extrapolated tails:
/// `A = zΣQ_n(z)Q_n(0)`, `B = -1 + zΣP_n(z)Q_n(0)`, `C = -1 - zΣQ_n(z)P_n(0)`,
/// `D = -zΣP_n(z)P_n(0)`.
///
/// The signs of the `C` and `D` sums are chosen so that `AD - BC ≡ -1` and
/// `m(z, t) = -(A + Ct)/(B + Dt)` is Herglotz in `z` for every real `t`; other
/// choices break one or the other. `t = 0` and `t = ∞` are the limits of even
/// and odd truncations respectively.
pub fn nevanlinna_quad(fam: &CoefficientFamily, z: C64, tol: f64) -> Result<NevanlinnaQuad> {
    let quad = nevanlinna_quad_best(fam, z, tol)?;
    if quad.tail_estimate > tol {
        return Err(Error::SlowDecay {
            tail: quad.tail_estimate,
            tol,
            n: quad.truncation,
        });
    }
    Ok(quad)
}

/// As [`nevanlinna_quad`], but returns the most refined quadruple even when its
/// tail estimate stays above `tol` (the caller inspects `tail_estimate`).
pub fn nevanlinna_quad_best(fam: &CoefficientFamily, z: C64, tol: f64) -> Result<NevanlinnaQuad> {
    if !(fam.alpha > 1.0) {
        return invalid("nevanlinna_quad needs alpha > 1 (limit circle)");
    }
    let mut n0 = asymptotic_start(fam, z, 256);
    let mut best: Option<NevanlinnaQuad> = None;
    for _ in 0..3 {
        let sums = lambda0_sums(fam, z, n0);
        let mut vals = [C64::new(0.0, 0.0); 4];
        let mut tail: f64 = 0.0;
        for (i, v) in vals.iter_mut().enumerate() {
            let (x, err) = accel::extrapolate_with_error(&sums.ns, &sums.cols[i], fam.alpha, ORDER);
            *v = x;
            tail = tail.max(err / (1.0 + x.norm()));
        }
        if z == C64::new(0.0, 0.0) {
            vals = [C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)];
            tail = 0.0;
        }
        let quad = NevanlinnaQuad {
            z: pair(z),
            a: pair(vals[0]),
            b: pair(vals[1]),
            c: pair(vals[2]),
            d: pair(vals[3]),
            truncation: *sums.ns.last().unwrap() as usize,
            tail_estimate: tail,
        };
        let done = tail <= tol;
        best = Some(quad);
        if done {
            break;
        }
        n0 *= 2;
    }
    Ok(best.unwrap())
}

/// `‖P^0(E)‖² = Σ_n P_n(E)²` at λ = 0 for real `E`, with error estimate.
pub fn lambda0_norm_sq(fam: &CoefficientFamily, e: f64) -> (f64, f64) {
    let z = C64::new(e, 0.0);
    let sums = lambda0_sums(fam, z, asymptotic_start(fam, z, 256));
    let (v, err) = accel::extrapolate_with_error(&sums.ns, &sums.cols[4], fam.alpha, ORDER);
    (v.re, err)
}

/// Outcome of the Möbius parametrisation: a value, or `z ∈ σ(J_t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtensionM {
    Value(C64),
    Pole,
}

impl ExtensionM {
    pub fn value(&self) -> Option<C64> {
        match self {
            ExtensionM::Value(v) => Some(*v),
            ExtensionM::Pole => None,
        }
    }
}

/// `m(z, t) = -(A + C t)/(B + D t)`, evaluated projectively.
pub fn extension_m(quad: &NevanlinnaQuad, t: ExtensionParam) -> ExtensionM {
    let [a, b, c, d] = quad.entries();
    let (t0, t1) = t.projective();
    let num = a * t1 + c * t0;
    let den = b * t1 + d * t0;
    let scale = (b * t1).norm() + (d * t0).norm() + (a * t1).norm() + (c * t0).norm();
    if den.norm() <= 1e-14 * scale {
        ExtensionM::Pole
    } else {
        ExtensionM::Value(-num / den)
    }
}

/// Eigenvalue `E` determines the unique `t` with `E ∈ σ(J_t)`: `t = -B(E)/D(E)`.
pub fn extension_param_for(fam: &CoefficientFamily, e: f64, tol: f64) -> Result<ExtensionParam> {
    let quad = nevanlinna_quad(fam, C64::new(e, 0.0), tol)?;
    Ok(ExtensionParam::from_projective(-quad.b.0, quad.d.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitCircle {
    pub center: (f64, f64),
    pub radius: f64,
    /// `(θ, m(z, cot θ))` samples.
    pub samples: Vec<(f64, (f64, f64))>,
    /// Largest `| |m - c| - r |` over the samples.
    pub max_deviation: f64,
}

impl LimitCircle {
    pub fn center_c(&self) -> C64 {
        cplx(self.center)
    }

    pub fn distance(&self, m: C64) -> f64 {
        ((m - self.center_c()).norm() - self.radius).abs()
    }
}

fn circumcircle(p: C64, q: C64, r: C64) -> Option<(C64, f64)> {
    let (b, c) = (q - p, r - p);
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    let scale = b.norm() * c.norm();
    if d.abs() <= 1e-12 * scale {
        return None;
    }
    let ux = (c.im * b.norm_sqr() - b.im * c.norm_sqr()) / d;
    let uy = (b.re * c.norm_sqr() - c.re * b.norm_sqr()) / d;
    let u = C64::new(ux, uy);
    Some((p + u, u.norm()))
}

/// Samples `m(z, t)` over a projective grid of `t` and fits the Weyl circle.
pub fn limit_circle(quad: &NevanlinnaQuad, count: usize) -> Result<LimitCircle> {
    if quad.z.1 <= 0.0 {
        return invalid("limit_circle needs Im z > 0");
    }
    if count < 3 {
        return invalid("limit_circle needs at least 3 samples");
    }
    let mut samples = Vec::with_capacity(count);
    for j in 0..count {
        let theta = std::f64::consts::PI * j as f64 / count as f64;
        match extension_m(quad, ExtensionParam::from_angle(theta)) {
            ExtensionM::Value(m) => samples.push((theta, m)),
            ExtensionM::Pole => return invalid("pole of m(z, t) at non-real z"),
        }
    }
    let (center, radius) = circumcircle(samples[0].1, samples[count / 3].1, samples[2 * count / 3].1)
        .ok_or_else(|| Error::InvalidParameter("degenerate circle fit: samples collinear (limit point?)".into()))?;
    let max_deviation = samples
        .iter()
        .map(|(_, m)| ((m - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    Ok(LimitCircle {
        center: pair(center),
        radius,
        samples: samples.into_iter().map(|(t, m)| (t, pair(m))).collect(),
        max_deviation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionSpectrum {
    pub t: ExtensionParam,
    pub window: (f64, f64),
    pub eigenvalues: Vec<f64>,
    pub scan_points: usize,
    pub warnings: Vec<String>,
}

/// Characteristic function `τ1 B(E) + τ0 D(E)` of `J_t` on the real line.
///
/// Only its sign is used, so a quadruple whose tail estimate misses `tol` is accepted.
pub fn characteristic(fam: &CoefficientFamily, t: ExtensionParam, e: f64, tol: f64) -> Result<f64> {
    let quad = nevanlinna_quad_best(fam, C64::new(e, 0.0), tol)?;
    let (t0, t1) = t.projective();
    Ok(t1 * quad.b.0 + t0 * quad.d.0)
}

fn sign_brackets(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..xs.len() - 1 {
        if ys[i] == 0.0 {
            out.push((xs[i], xs[i], ys[i], ys[i]));
        } else if ys[i] * ys[i + 1] < 0.0 {
            out.push((xs[i], xs[i + 1], ys[i], ys[i + 1]));
        }
    }
    out
}

/// Eigenvalues of `J_t` in `window` by sign changes of the characteristic function.
pub fn extension_spectrum(
    fam: &CoefficientFamily,
    t: ExtensionParam,
    window: (f64, f64),
    tol: f64,
    scan_points: usize,
) -> Result<ExtensionSpectrum> {
    let (lo, hi) = window;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return invalid("extension_spectrum needs a bounded window lo < hi");
    }
    if scan_points < 2 {
        return invalid("extension_spectrum needs at least 2 scan points");
    }
    let qtol = 1e-6;
    let eval = |e: f64| characteristic(fam, t, e, qtol);
    let fine = 2 * scan_points;
    let xs: Vec<f64> = (0..=fine).map(|i| lo + (hi - lo) * i as f64 / fine as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| eval(x)).collect::<Result<_>>()?;
    let coarse_x: Vec<f64> = xs.iter().step_by(2).cloned().collect();
    let coarse_y: Vec<f64> = ys.iter().step_by(2).cloned().collect();
    let fine_brackets = sign_brackets(&xs, &ys);
    let coarse_count = sign_brackets(&coarse_x, &coarse_y).len();
    let mut warnings = Vec::new();
    if coarse_count != fine_brackets.len() {
        warnings.push(format!(
            "scan with {scan_points} points found {coarse_count} roots, refinement found {}",
            fine_brackets.len()
        ));
    }
    let mut eigenvalues = Vec::with_capacity(fine_brackets.len());
    for (mut a, mut b, mut fa, _) in fine_brackets {
        while b - a > tol {
            let mid = 0.5 * (a + b);
            let fm = eval(mid)?;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm * fa < 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        eigenvalues.push(0.5 * (a + b));
    }
    Ok(ExtensionSpectrum {
        t,
        window,
        eigenvalues,
        scan_points,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::squeezing_family;

    #[test]
    fn one_by_one_truncation() {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let ev = truncated_eigenvalues(&fam, 0.7, 1, None).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0] - 0.7 * fam.f(0)).abs() < 1e-15);
    }

    #[test]
    fn quad_at_origin_is_exact() {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let q = nevanlinna_quad(&fam, C64::new(0.0, 0.0), 1e-9).unwrap();
        assert_eq!(q.entries(), [C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(extension_m(&q, ExtensionParam::Infinity), ExtensionM::Pole);
        assert_eq!(extension_m(&q, ExtensionParam::Finite(2.5)).value().unwrap(), C64::new(-2.5, 0.0));
    }

    #[test]
    fn projective_round_trip() {
        assert_eq!(ExtensionParam::from_angle(0.0), ExtensionParam::Infinity);
        match ExtensionParam::from_angle(std::f64::consts::FRAC_PI_2) {
            ExtensionParam::Finite(t) => assert!(t.abs() < 1e-15),
            _ => panic!(),
        }
        assert_eq!(ExtensionParam::parse("inf"), Some(ExtensionParam::Infinity));
        assert_eq!(ExtensionParam::parse("-1.5"), Some(ExtensionParam::Finite(-1.5)));
        assert_eq!(ExtensionParam::parse("nan"), None);
    }
}
