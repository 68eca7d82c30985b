//! Coefficient families `(a_n, f_n)` for the operator family `J(λ)`.
//!
//! `J(λ)` has off-diagonal `a_n` and diagonal `λ f_n`. A family carries its
//! growth exponents `a_n ~ n^α (1 + c_a/n)`, `f_n ~ n^β (1 + c_f/n)`; these are
//! supplied (or closed-form for squeezing families) and only cross-checked by
//! [`validate_hypothesis`], never fitted.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Entries below this index are precomputed once at construction.
const CACHE_LEN: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilyKind {
    /// Residue-class block `m` of the order-`k` squeezing operator with diagonal power `hpow`.
    Squeezing { k: u32, hpow: u32, m: u32 },
    /// Tabulated prefix, continued by the leading asymptotics beyond the table.
    Explicit { a: Vec<f64>, f: Vec<f64> },
}

/// Immutable coefficient family; cheap to clone and safe to share between threads.
#[derive(Clone, Debug)]
pub struct CoefficientFamily {
    pub kind: FamilyKind,
    pub alpha: f64,
    pub beta: f64,
    pub c_a: f64,
    pub c_f: f64,
    cache_a: Arc<[f64]>,
    cache_f: Arc<[f64]>,
}

impl CoefficientFamily {
    fn build(kind: FamilyKind, alpha: f64, beta: f64, c_a: f64, c_f: f64) -> Self {
        let mut fam = CoefficientFamily {
            kind,
            alpha,
            beta,
            c_a,
            c_f,
            cache_a: Arc::from(Vec::new()),
            cache_f: Arc::from(Vec::new()),
        };
        let a: Vec<f64> = (0..CACHE_LEN).map(|n| fam.eval_a(n)).collect();
        let f: Vec<f64> = (0..CACHE_LEN).map(|n| fam.eval_f(n)).collect();
        fam.cache_a = a.into();
        fam.cache_f = f.into();
        fam
    }

    fn eval_a(&self, n: usize) -> f64 {
        match &self.kind {
            FamilyKind::Squeezing { k, m, .. } => {
                let base = (*m as f64) + (n as f64) * (*k as f64);
                let prod: f64 = (1..=*k).map(|i| base + i as f64).product();
                (prod / (*k as f64).powi(*k as i32)).sqrt()
            }
            FamilyKind::Explicit { a, .. } => match a.get(n) {
                Some(v) => *v,
                None => {
                    let x = n as f64;
                    x.powf(self.alpha) * (1.0 + self.c_a / x)
                }
            },
        }
    }

    fn eval_f(&self, n: usize) -> f64 {
        match &self.kind {
            FamilyKind::Squeezing { k, hpow, m } => {
                let x = ((*m as f64) + (n as f64) * (*k as f64)) / (*k as f64);
                x.powi(*hpow as i32)
            }
            FamilyKind::Explicit { f, .. } => match f.get(n) {
                Some(v) => *v,
                None => {
                    let x = n as f64;
                    x.powf(self.beta) * (1.0 + self.c_f / x)
                }
            },
        }
    }

    /// Off-diagonal entry `a_n`.
    #[inline]
    pub fn a(&self, n: usize) -> f64 {
        match self.cache_a.get(n) {
            Some(v) => *v,
            None => self.eval_a(n),
        }
    }

    /// Diagonal profile `f_n`.
    #[inline]
    pub fn f(&self, n: usize) -> f64 {
        match self.cache_f.get(n) {
            Some(v) => *v,
            None => self.eval_f(n),
        }
    }

    pub fn delta(&self) -> f64 {
        self.beta - self.alpha
    }

    /// Time scale `k^{k/2}` relating a squeezing block to the full operator (1 otherwise).
    pub fn time_scale(&self) -> f64 {
        match self.kind {
            FamilyKind::Squeezing { k, .. } => (k as f64).powf(k as f64 / 2.0),
            FamilyKind::Explicit { .. } => 1.0,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            FamilyKind::Squeezing { k, hpow, m } => format!("squeezing({k},{hpow},{m})"),
            FamilyKind::Explicit { a, .. } => {
                format!("explicit(alpha={},beta={},prefix={})", self.alpha, self.beta, a.len())
            }
        }
    }

    /// Family parameters as JSON, for artifact sidecars.
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label(),
            "family": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "c_a": self.c_a,
            "c_f": self.c_f,
            "delta": self.delta(),
        })
    }
}

/// Rising factorial `x (x+1) … (x+s-1)` with overflow detection.
pub fn pochhammer(x: u64, s: u64) -> Result<u128> {
    let mut acc: u128 = 1;
    for i in 0..s {
        let factor = (x as u128)
            .checked_add(i as u128)
            .ok_or(Error::Overflow { x, s })?;
        acc = acc.checked_mul(factor).ok_or(Error::Overflow { x, s })?;
    }
    Ok(acc)
}

/// Jacobi block `m` of the squeezing operator `(a†)^k + a^k + K (a†a)^hpow`.
///
/// `a_n = k^{-k/2} √((m+nk+1)_k)`, `f_n = k^{-hpow} (m+nk)^hpow`.
pub fn squeezing_family(k: u32, hpow: u32, m: u32) -> Result<CoefficientFamily> {
    if k < 3 {
        return invalid(format!("squeezing order k = {k} < 3"));
    }
    if 2 * hpow <= k {
        return invalid(format!("2·hpow = {} must exceed k = {k}", 2 * hpow));
    }
    if m >= k {
        return invalid(format!("residue class m = {m} outside [0, {k})"));
    }
    let (kf, hf, mf) = (k as f64, hpow as f64, m as f64);
    // √∏(1 + (m+l)/(nk)) = 1 + Σ(m+l)/(2nk) + …;  (1 + m/(nk))^h = 1 + hm/(nk) + …
    let c_a = (2.0 * mf + kf + 1.0) / 4.0;
    let c_f = hf * mf / kf;
    Ok(CoefficientFamily::build(
        FamilyKind::Squeezing { k, hpow, m },
        kf / 2.0,
        hf,
        c_a,
        c_f,
    ))
}

/// User family: tabulated prefixes, continued by `n^α(1 + c_a/n)` and `n^β(1 + c_f/n)`.
pub fn explicit_family(
    alpha: f64,
    beta: f64,
    c_a: f64,
    c_f: f64,
    a_prefix: Vec<f64>,
    f_prefix: Vec<f64>,
) -> Result<CoefficientFamily> {
    if a_prefix.is_empty() || f_prefix.is_empty() {
        return invalid("explicit family needs at least a_0 and f_0");
    }
    if !(alpha.is_finite() && beta.is_finite() && c_a.is_finite() && c_f.is_finite()) {
        return invalid("explicit family exponents must be finite");
    }
    Ok(CoefficientFamily::build(
        FamilyKind::Explicit { a: a_prefix, f: f_prefix },
        alpha,
        beta,
        c_a,
        c_f,
    ))
}

/// One pass/fail line of the hypothesis report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub window: usize,
    pub checks: Vec<Check>,
    /// `f_r/a_r` strictly increasing on the window (sufficient for the variation bound).
    pub ratio_increasing: bool,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Scaled second-order residual `n² |x_n n^{-p} - 1 - c/n|`, maximised over two
/// consecutive halves of the tail window. Bounded residuals mean the stated expansion holds.
fn residual_halves(x: impl Fn(usize) -> f64, p: f64, c: f64, window: usize) -> (f64, f64) {
    let r = |n: usize| {
        let nf = n as f64;
        nf * nf * (x(n) / nf.powf(p) - 1.0 - c / nf).abs()
    };
    let q = (window / 4).max(2);
    let early = (q..window / 2).map(r).fold(0.0, f64::max);
    let late = (window / 2..=window).map(r).fold(0.0, f64::max);
    (early, late)
}

/// Finite-window check of the growth and variation hypotheses on `(a_n, f_n)`.
pub fn validate_hypothesis(fam: &CoefficientFamily, window: usize) -> Result<HypothesisReport> {
    if window < 10 {
        return invalid(format!("validation window {window} < 10"));
    }
    let mut checks = Vec::new();

    let bad_a = (0..=window).find(|&n| !(fam.a(n) > 0.0));
    let bad_f = (0..=window).find(|&n| !(fam.f(n) >= 0.0));
    checks.push(Check {
        name: "positivity",
        pass: bad_a.is_none() && bad_f.is_none(),
        value: (0..=window).map(|n| fam.a(n)).fold(f64::INFINITY, f64::min),
        detail: match (bad_a, bad_f) {
            (None, None) => "a_n > 0 and f_n >= 0 on the window".into(),
            (Some(n), _) => format!("a_{n} = {} not positive", fam.a(n)),
            (_, Some(n)) => format!("f_{n} = {} negative", fam.f(n)),
        },
    });

    checks.push(Check {
        name: "exponent_gate",
        pass: fam.alpha > 4.0 / 3.0,
        value: fam.alpha,
        detail: "alpha > 4/3".into(),
    });

    // Bounded (not growing) scaled residuals certify the O(n^-2) remainder.
    let bounded = |(early, late): (f64, f64)| late.is_finite() && late <= 2.0 * early + 1.0;
    let ra = residual_halves(|n| fam.a(n), fam.alpha, fam.c_a, window);
    checks.push(Check {
        name: "growth_a",
        pass: bounded(ra),
        value: ra.1,
        detail: format!("sup n^2|a_n n^-alpha - 1 - c_a/n|: {:.3e} then {:.3e}", ra.0, ra.1),
    });
    let rf = residual_halves(|n| fam.f(n), fam.beta, fam.c_f, window);
    checks.push(Check {
        name: "growth_f",
        pass: bounded(rf) && fam.beta > fam.alpha,
        value: rf.1,
        detail: format!(
            "beta > alpha: {}; sup n^2|f_n n^-beta - 1 - c_f/n|: {:.3e} then {:.3e}",
            fam.beta > fam.alpha,
            rf.0,
            rf.1
        ),
    });

    // V_n - d_n with V_n the total variation of d = f/a up to n.
    let d = |n: usize| fam.f(n) / fam.a(n);
    let mut variation = 0.0;
    let mut excess = Vec::with_capacity(window + 1);
    excess.push(-d(0));
    let mut increasing = true;
    for n in 1..=window {
        let step = d(n) - d(n - 1);
        if step <= 0.0 {
            increasing = false;
        }
        variation += step.abs();
        excess.push(variation - d(n));
    }
    let half = window / 2;
    let c_early = excess[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c_all = excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + d(window).abs();
    checks.push(Check {
        name: "variation",
        pass: c_all <= c_early + 1e-9 * scale,
        value: c_all,
        detail: format!("sup (V_n - f_n/a_n) = {c_all:.6e} (first half {c_early:.6e})"),
    });

    // Σ 1/a_n converges iff alpha > 1; the remaining tail is ~ N^{1-α}/(α-1).
    let partial: f64 = (0..=window).map(|n| 1.0 / fam.a(n)).sum();
    let tail = if fam.alpha > 1.0 {
        (window as f64).powf(1.0 - fam.alpha) / (fam.alpha - 1.0)
    } else {
        f64::INFINITY
    };
    checks.push(Check {
        name: "carleman_fails",
        pass: fam.alpha > 1.0 && tail < partial,
        value: partial,
        detail: format!("sum 1/a_n over window = {partial:.6e}, tail estimate {tail:.3e}"),
    });

    Ok(HypothesisReport {
        window,
        checks,
        ratio_increasing: increasing,
    })
}
