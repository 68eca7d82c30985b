//! Three-regime analysis of the recurrence for small `λ`: region chart, the
//! `q`-function and its turning point, the Langer transform, Airy-type
//! approximate solutions, and the bound diagnostic `r_n^{λ,z}`.
//!
//! All approximate solutions are handled through moduli (and the sign of `Ai`);
//! the amplitude `A(x, h)` is positive on the real axis, so no branch choice is
//! needed for the comparisons made here.

pub mod airy;

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::{Check, CoefficientFamily};
use crate::error::{invalid, Error, Result};
use crate::recurrence::{default_seed, riccati_ratios};

type C64 = Complex64;

/// `x_j^δ` for `j = 1…4`.
pub const XJ_DELTA: [f64; 4] = [5.0 / 8.0, 7.0 / 8.0, 33.0 / 8.0, 39.0 / 8.0];

/// Scale `h = λ^{1/δ}`.
pub fn scale_h(fam: &CoefficientFamily, lambda: f64) -> f64 {
    lambda.powf(1.0 / fam.delta())
}

/// Abscissae `x_1 … x_4`.
pub fn abscissae(fam: &CoefficientFamily) -> [f64; 4] {
    XJ_DELTA.map(|c| c.powf(1.0 / fam.delta()))
}

/// `g(λ, n) = λ f_n / a_n`.
pub fn regularity_ratio(fam: &CoefficientFamily, lambda: f64, n: usize) -> f64 {
    lambda * fam.f(n) / fam.a(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionChart {
    pub lambda: f64,
    pub h: f64,
    /// `N_0 … N_4`.
    pub n: [usize; 5],
    /// `x_1 … x_4`.
    pub x: [f64; 4],
    /// Spot checks of the regularity inequalities on the chart.
    pub checks: Vec<Check>,
}

impl RegionChart {
    pub fn valid(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Smallest `N_0` from which `|1 - a_{n-1}/a_n| ≤ 1/8` holds on `[N_0, window]`.
pub fn stable_index(fam: &CoefficientFamily, window: usize) -> usize {
    let mut n0 = window + 1;
    for n in (1..=window).rev() {
        if (1.0 - fam.a(n - 1) / fam.a(n)).abs() > 0.125 {
            break;
        }
        n0 = n;
    }
    n0
}

fn check(name: &'static str, pass: bool, value: f64, detail: String) -> Check {
    Check { name, pass, value, detail }
}

/// Region chart without the validity gate; the checks record which inequalities fail.
pub fn chart_unchecked(fam: &CoefficientFamily, lambda: f64) -> Result<RegionChart> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid("region chart needs 0 < lambda < inf");
    }
    let h = scale_h(fam, lambda);
    let x = abscissae(fam);
    let cap = (1usize << 24) as f64;
    let n1 = (x[0] / h).ceil().min(cap) as usize;
    let n2 = (x[1] / h).floor().min(cap) as usize;
    let n3 = (x[2] / h).ceil().min(cap) as usize;
    let n4 = (x[3] / h).floor().min(cap) as usize;
    let window = (4 * n4).clamp(256, 1 << 16);
    let n0 = stable_index(fam, window);
    let mut checks = Vec::new();
    let ordered = n0 < n1 && n1 < n2 && n2 < n3 && n3 < n4;
    checks.push(check("ordering", ordered, n0 as f64, format!("N = ({n0}, {n1}, {n2}, {n3}, {n4})")));
    let g = |n: usize| regularity_ratio(fam, lambda, n);
    let max_g = (n0..=n2).map(g).fold(0.0, f64::max);
    checks.push(check("g_at_most_1", n0 > n2 || max_g <= 1.0, max_g, "max g(λ,n) on [N0, N2]".into()));
    let far = (4 * n4).max(n4 + 8).min(1 << 20);
    let min_g1 = (n1..=far).map(g).fold(f64::INFINITY, f64::min);
    checks.push(check("g_at_least_half", min_g1 >= 0.5, min_g1, format!("min g(λ,n) on [N1, {far}]")));
    let min_g3 = (n3..=far).map(g).fold(f64::INFINITY, f64::min);
    checks.push(check("g_at_least_4", min_g3 >= 4.0, min_g3, format!("min g(λ,n) on [N3, {far}]")));
    let inside = n1 > n4 || ((n1 as f64) * h >= x[0] && (n4 as f64) * h <= x[3]);
    checks.push(check("scaled_window", inside, (n4 as f64) * h, "h·[N1, N4] inside [x1, x4]".into()));
    Ok(RegionChart { lambda, h, n: [n0, n1, n2, n3, n4], x, checks })
}

/// Largest `λ` (bisected on a log scale) whose chart passes every check.
pub fn max_admissible_lambda(fam: &CoefficientFamily) -> Result<f64> {
    let ok = |l: f64| chart_unchecked(fam, l).map(|c| c.valid()).unwrap_or(false);
    let mut hi = 1e3;
    if ok(hi) {
        return Ok(hi);
    }
    let mut lo = hi;
    while !ok(lo) {
        lo /= 4.0;
        if lo < 1e-14 {
            return Err(Error::NoConvergence { what: "admissible lambda search".into(), n: 0, change: lo });
        }
    }
    hi = lo * 4.0;
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-10 {
            break;
        }
    }
    Ok(lo)
}

/// Region chart of the three-regime analysis at `λ`; rejects `λ` beyond the admissible range.
pub fn region_chart(fam: &CoefficientFamily, lambda: f64) -> Result<RegionChart> {
    let chart = chart_unchecked(fam, lambda)?;
    if chart.valid() {
        Ok(chart)
    } else {
        Err(Error::LambdaTooLarge { lambda, max_lambda: max_admissible_lambda(fam)? })
    }
}

/// `ã(x, h) = x^α (1 + c_a h/x)`.
pub fn a_tilde(fam: &CoefficientFamily, x: f64, h: f64) -> f64 {
    x.powf(fam.alpha) * (1.0 + fam.c_a * h / x)
}

/// `q(x, h) = x^β(1 + c_f h/x) / (2 ã(x - h/2, h))`.
pub fn qfun(fam: &CoefficientFamily, x: f64, h: f64) -> f64 {
    let b = x.powf(fam.beta) * (1.0 + fam.c_f * h / x);
    b / (2.0 * a_tilde(fam, x - 0.5 * h, h))
}

/// `∂q/∂x` by a central difference.
fn qprime(fam: &CoefficientFamily, x: f64, h: f64) -> f64 {
    let e = 1e-5 * x;
    (qfun(fam, x + e, h) - qfun(fam, x - e, h)) / (2.0 * e)
}

/// Turning point `x_0(h)`: the root of `q(·, h) = 1` in `(x_2, x_3)`.
pub fn turning_point(fam: &CoefficientFamily, h: f64, tol: f64) -> Result<f64> {
    let x = abscissae(fam);
    let (mut lo, mut hi) = (x[1], x[2]);
    let f = |y: f64| qfun(fam, y, h) - 1.0;
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Bracket(format!(
            "q(·, h) - 1 has no sign change on (x2, x3) = ({lo}, {hi}) at h = {h:e}"
        )));
    }
    while hi - lo > tol.max(4.0 * f64::EPSILON * hi) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Langer data at fixed `h`: turning point, `ξ(x, h)`, `|A(x, h)|`, `|g(x, h)|`.
#[derive(Clone, Debug)]
pub struct TurningPointChart<'a> {
    pub fam: &'a CoefficientFamily,
    pub h: f64,
    pub x0: f64,
    /// `ξ'(x_0) = (2 q'(x_0))^{1/3}`.
    pub xi_prime0: f64,
    /// Relative half-width around `x_0` where `|A|` uses its limit value.
    pub fallback: f64,
    pub tol: f64,
}

impl<'a> TurningPointChart<'a> {
    pub fn new(fam: &'a CoefficientFamily, h: f64, tol: f64) -> Result<Self> {
        let x0 = turning_point(fam, h, 1e-15)?;
        let xi_prime0 = (2.0 * qprime(fam, x0, h)).cbrt();
        Ok(TurningPointChart { fam, h, x0, xi_prime0, fallback: 1e-6, tol })
    }

    /// `ξ(x, h)`.
    pub fn xi(&self, x: f64) -> Result<f64> {
        langer_xi_at(self.fam, x, self.h, self.x0, self.xi_prime0, self.tol)
    }

    /// `|A(x, h)|` and whether the turning-point limit was used.
    pub fn weight_a(&self, x: f64, xi: f64) -> (f64, bool) {
        if (x - self.x0).abs() <= self.fallback * self.x0 {
            return (self.xi_prime0.powf(-0.5), true);
        }
        let q = qfun(self.fam, x, self.h);
        let v = (xi.abs() / (1.0 - q * q).abs()).powf(0.25);
        (v, false)
    }

    /// `|g(x, h)| = |A(x, h)| ã(x - h/2, h)^{-1/2}`.
    pub fn g(&self, x: f64, xi: f64) -> (f64, bool) {
        let (a, fb) = self.weight_a(x, xi);
        (a / a_tilde(self.fam, x - 0.5 * self.h, self.h).sqrt(), fb)
    }
}

/// `ξ(x, h)` with a known turning point.
fn langer_xi_at(fam: &CoefficientFamily, x: f64, h: f64, x0: f64, xi_prime0: f64, tol: f64) -> Result<f64> {
    let d = x - x0;
    if d == 0.0 {
        return Ok(0.0);
    }
    let s_max = d.abs().sqrt();
    // Leading behaviour ∫ ≈ (2/3) ξ'(x0)^{3/2} |d|^{3/2} sets the relative scale.
    let scale = (2.0 / 3.0) * xi_prime0.powf(1.5) * d.abs().powf(1.5);
    let target = (tol * scale).max(1e-300);
    let out = if d < 0.0 {
        quadrature::integrate(|s: f64| 2.0 * s * qfun(fam, x0 - s * s, h).clamp(-1.0, 1.0).acos(), 0.0, s_max, target)
    } else {
        quadrature::integrate(|s: f64| 2.0 * s * qfun(fam, x0 + s * s, h).max(1.0).acosh(), 0.0, s_max, target)
    };
    if !(out.error_estimate <= 100.0 * target) || !out.integral.is_finite() {
        return Err(Error::NoConvergence {
            what: format!("Langer quadrature at x = {x}"),
            n: out.num_function_evaluations as usize,
            change: out.error_estimate,
        });
    }
    let mag = (1.5 * out.integral).powf(2.0 / 3.0);
    Ok(if d < 0.0 { -mag } else { mag })
}

/// `ξ(x, h) = ∓(3/2 ∫ arccos/arccosh q)^{2/3}`, negative left of the turning point.
pub fn langer_xi(fam: &CoefficientFamily, x: f64, h: f64, tol: f64) -> Result<f64> {
    let x_range = abscissae(fam);
    if !(x >= x_range[0] * 0.999 && x <= x_range[3] * 1.001) {
        return invalid(format!("langer_xi needs x in [x1, x4] = [{}, {}]", x_range[0], x_range[3]));
    }
    let tp = TurningPointChart::new(fam, h, tol)?;
    tp.xi(x)
}

/// Approximate solutions on `n ∈ [N_1, N_4]`, stored as (signed) values with log-moduli.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxSolutions {
    pub lambda: f64,
    pub h: f64,
    pub z: (f64, f64),
    pub x0: f64,
    pub n: Vec<usize>,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    /// `|g(nh, h)|`.
    pub g: Vec<f64>,
    /// Airy argument `h^{-2/3} ξ`.
    pub arg: Vec<f64>,
    pub ln_psi_r: Vec<f64>,
    /// Sign of `Ai(h^{-2/3} ξ)`.
    pub sign_psi_r: Vec<f64>,
    pub ln_psi_d: Vec<f64>,
    pub ln_w_r: Vec<f64>,
    /// Indices where `|A|` used its turning-point limit.
    pub fallback_used: Vec<usize>,
}

impl ApproxSolutions {
    pub fn psi_r_abs(&self) -> Vec<f64> {
        self.ln_psi_r.iter().map(|v| v.exp()).collect()
    }
    pub fn psi_d_abs(&self) -> Vec<f64> {
        self.ln_psi_d.iter().map(|v| v.exp()).collect()
    }
    pub fn w_r_abs(&self) -> Vec<f64> {
        self.ln_w_r.iter().map(|v| v.exp()).collect()
    }
}

/// `|ψ^r|`, `|ψ^d|`, `|w^r|` on the chart's window `[N_1, N_4]`.
pub fn approx_solutions(fam: &CoefficientFamily, lambda: f64, z: C64, chart: &RegionChart) -> Result<ApproxSolutions> {
    if !chart.valid() {
        return invalid("approx_solutions needs a valid region chart");
    }
    let h = chart.h;
    let tp = TurningPointChart::new(fam, h, 1e-12)?;
    let [_, n1, _, _, n4] = chart.n;
    let mut out = ApproxSolutions {
        lambda,
        h,
        z: (z.re, z.im),
        x0: tp.x0,
        n: Vec::new(),
        x: Vec::new(),
        xi: Vec::new(),
        g: Vec::new(),
        arg: Vec::new(),
        ln_psi_r: Vec::new(),
        sign_psi_r: Vec::new(),
        ln_psi_d: Vec::new(),
        ln_w_r: Vec::new(),
        fallback_used: Vec::new(),
    };
    let h23 = h.powf(-2.0 / 3.0);
    for n in n1..=n4 {
        let x = n as f64 * h;
        let xi = tp.xi(x)?;
        let (g, fb) = tp.g(x, xi);
        if fb {
            out.fallback_used.push(n);
        }
        let arg = h23 * xi;
        let (ln_ai_abs, sign) = if arg >= 0.0 {
            (airy::ln_ai(arg), 1.0)
        } else {
            let ai = airy::airy_pair(arg).ai;
            (ai.abs().ln(), ai.signum())
        };
        out.n.push(n);
        out.x.push(x);
        out.xi.push(xi);
        out.g.push(g);
        out.arg.push(arg);
        out.ln_psi_r.push(g.ln() + ln_ai_abs);
        out.sign_psi_r.push(sign);
        out.ln_psi_d.push(g.ln() + airy::ln_rotated_airy_abs(arg));
        out.ln_w_r.push(g.ln() + airy::ln_hankel_helper_abs(arg));
    }
    Ok(out)
}

/// `ln((-1)^n u_n)` of the recessive solution (`u_0 = 1`) for `0 ≤ n ≤ last`.
///
/// Accumulated from the Riccati ratios so that no value under- or overflows.
pub fn ln_recessive(fam: &CoefficientFamily, lambda: f64, z: C64, last: usize) -> Result<Vec<C64>> {
    let seed = default_seed(fam, lambda).max(2 * last + 2);
    let r = riccati_ratios(fam, lambda, z, seed)?;
    let mut out = Vec::with_capacity(last + 1);
    out.push(C64::new(0.0, 0.0));
    for k in 1..=last {
        let step = r[k] * (fam.a(k - 1) / fam.a(k)).sqrt();
        out.push(out[k - 1] + step.ln());
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TurningPointSample {
    pub lambda: f64,
    pub h: f64,
    pub x0: f64,
    /// Matching index `N_3`.
    pub n_match: usize,
    /// `sup_n |u_n - (-1)^n c ψ^r_n| / |c w^r_n|` over `[N_1, N_4]`.
    pub sup_error: f64,
    pub argmax: usize,
    /// Error at the matching index (zero by construction).
    pub match_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TurningPointReport {
    pub z: (f64, f64),
    pub samples: Vec<TurningPointSample>,
    /// Least-squares slope of `ln sup_error` against `ln h`.
    pub slope: f64,
}

/// Sup error of the Airy approximation to the recessive solution per `λ`, and its `h`-scaling.
pub fn turning_point_error(fam: &CoefficientFamily, lambda_grid: &[f64], z: C64) -> Result<TurningPointReport> {
    if lambda_grid.len() < 2 {
        return invalid("turning_point_error needs at least 2 lambda values");
    }
    let mut samples = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let chart = region_chart(fam, lambda)?;
        let approx = approx_solutions(fam, lambda, z, &chart)?;
        let [_, n1, _, n3, n4] = chart.n;
        let lu = ln_recessive(fam, lambda, z, n4)?;
        let idx = n3 - n1;
        // c = s_{N3} / ψ^r_{N3}, ψ^r > 0 there (right of the turning point).
        let ln_c = lu[n3] - C64::new(approx.ln_psi_r[idx], 0.0);
        let mut sup_error: f64 = 0.0;
        let mut argmax = n1;
        let mut match_residual = f64::NAN;
        for (i, &n) in approx.n.iter().enumerate() {
            // (s_n / c - ψ^r_n) / |w^r_n|, evaluated relative to |w^r_n| in log space.
            let ratio = (lu[n] - ln_c - approx.ln_w_r[i]).exp();
            let psi_over_w = approx.sign_psi_r[i] * (approx.ln_psi_r[i] - approx.ln_w_r[i]).exp();
            let err = (ratio - psi_over_w).norm();
            if n == n3 {
                match_residual = err;
            }
            if err > sup_error {
                sup_error = err;
                argmax = n;
            }
        }
        samples.push(TurningPointSample {
            lambda,
            h: chart.h,
            x0: approx.x0,
            n_match: n3,
            sup_error,
            argmax,
            match_residual,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.h.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.sup_error.ln()).collect();
    let slope = ls_slope(&xs, &ys);
    Ok(TurningPointReport { z: (z.re, z.im), samples, slope })
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundSup {
    pub n0: usize,
    pub sup: f64,
    pub argmax: usize,
    /// `(n* h)^δ`, to compare with the turning point `(nh)^δ = 2`.
    pub argmax_scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub lambda: f64,
    pub h: f64,
    /// Largest index evaluated; beyond it `r_n` decays geometrically.
    pub n_last: usize,
    pub sups: Vec<BoundSup>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundTable {
    pub z: (f64, f64),
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    /// `(min, max)` of the suprema over the λ grid for the given `n_0`.
    pub fn range(&self, n0: usize) -> Option<(f64, f64)> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|r| r.sups.iter().find(|s| s.n0 == n0).map(|s| s.sup))
            .collect();
        if vals.is_empty() {
            return None;
        }
        Some((vals.iter().cloned().fold(f64::INFINITY, f64::min), vals.iter().cloned().fold(0.0, f64::max)))
    }
}

/// `r_n = n^{α/2 - 1/6} |u_n| / (|u_0| + |u_1|)` for the recessive solution, `0 ≤ n ≤ last`.
pub fn bound_ratios(fam: &CoefficientFamily, lambda: f64, z: C64, last: usize) -> Result<Vec<f64>> {
    let lu = ln_recessive(fam, lambda, z, last.max(1))?;
    let norm = 1.0 + lu[1].re.exp();
    let p = fam.alpha / 2.0 - 1.0 / 6.0;
    Ok((0..=last).map(|n| (n as f64).powf(p) * lu[n].re.exp() / norm).collect())
}

/// Table of `sup_{n ≥ n_0} r_n^{λ,z}` over a λ grid.
pub fn bound_diagnostic(fam: &CoefficientFamily, z: C64, lambda_grid: &[f64], n0_list: &[usize]) -> Result<BoundTable> {
    if lambda_grid.iter().any(|l| !(*l > 0.0)) {
        return invalid("bound_diagnostic needs a positive lambda grid");
    }
    let n0_max = n0_list.iter().cloned().max().unwrap_or(1);
    let mut rows = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let h = scale_h(fam, lambda);
        let n4 = (abscissae(fam)[3] / h).floor() as usize;
        let n_last = (2 * n4).max(n0_max + 8).max(32);
        let r = bound_ratios(fam, lambda, z, n_last)?;
        let sups = n0_list
            .iter()
            .map(|&n0| {
                let (argmax, sup) = r
                    .iter()
                    .enumerate()
                    .skip(n0.max(1))
                    .fold((n0, f64::NEG_INFINITY), |best, (n, &v)| if v > best.1 { (n, v) } else { best });
                BoundSup { n0, sup, argmax, argmax_scaled: (argmax as f64 * h).powf(fam.delta()) }
            })
            .collect();
        rows.push(BoundRow { lambda, h, n_last, sups });
    }
    Ok(BoundTable { z: (z.re, z.im), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::squeezing_family;

    #[test]
    fn q_collapses_at_zero_h() {
        let fam = squeezing_family(3, 3, 0).unwrap();
        for x in [0.8, 1.3, 2.0] {
            assert!((qfun(&fam, x, 0.0) - x.powf(1.5) / 2.0).abs() < 1e-15);
        }
        let x0 = turning_point(&fam, 0.0, 1e-14).unwrap();
        assert!((x0 - 2f64.powf(1.0 / 1.5)).abs() < 1e-13);
    }

    #[test]
    fn chart_ordering_for_small_lambda() {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let c = region_chart(&fam, 1e-3).unwrap();
        let [n0, n1, n2, n3, n4] = c.n;
        assert!(n0 < n1 && n1 < n2 && n2 < n3 && n3 < n4);
        assert!(matches!(region_chart(&fam, 10.0), Err(Error::LambdaTooLarge { .. })));
    }

    #[test]
    fn xi_sign_pattern() {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let h = 0.01;
        let tp = TurningPointChart::new(&fam, h, 1e-12).unwrap();
        assert!(tp.xi(tp.x0 * 0.9).unwrap() < 0.0);
        assert!(tp.xi(tp.x0 * 1.1).unwrap() > 0.0);
        assert_eq!(tp.xi(tp.x0).unwrap(), 0.0);
    }
}
