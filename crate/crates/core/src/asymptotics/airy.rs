//! Airy functions on the real line.
//!
//! `|x| ≤ X_SWITCH`: Maclaurin series summed in double-double so that the
//! cancellation in `Ai` for positive `x` costs nothing visible in `f64`.
//! `|x| > X_SWITCH`: the standard asymptotic expansions in `ζ = (2/3)|x|^{3/2}`,
//! truncated at the smallest term. Log-moduli variants cover arguments where
//! `Ai`/`Bi` under- or overflow.

use std::f64::consts::{FRAC_PI_4, PI};
use twofloat::TwoFloat;

/// Branch seam between the series and the asymptotic expansions.
pub const X_SWITCH: f64 = 8.5;

/// `Ai(0)` as an unevaluated sum `hi + lo`.
const AI0: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
/// `-Ai'(0)` as `hi + lo`.
const AIP0: (f64, f64) = (0.2588194037928068, -2.522243111610832e-17);

/// `(Ai, Bi, Ai', Bi')` at `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryValues {
    pub ai: f64,
    pub bi: f64,
    pub aip: f64,
    pub bip: f64,
}

impl AiryValues {
    /// `Ai·Bi' - Ai'·Bi`, equal to `1/π`.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bip - self.aip * self.bi
    }
}

fn dd(p: (f64, f64)) -> TwoFloat {
    TwoFloat::new_add(p.0, p.1)
}

fn to_f64(v: TwoFloat) -> f64 {
    v.hi() + v.lo()
}

/// Maclaurin series for all four functions (any `x`; accurate for moderate `|x|`).
pub fn airy_series(x: f64) -> AiryValues {
    let x3 = TwoFloat::new_mul(x, x) * x;
    let eps = 1e-34;
    // f = Σ 3^k (1/3)_k x^{3k}/(3k)!, g = Σ 3^k (2/3)_k x^{3k+1}/(3k+1)! and derivatives.
    let mut f = TwoFloat::from_f64(1.0);
    let mut g = TwoFloat::from_f64(x);
    let mut fp = TwoFloat::from_f64(0.0);
    let mut gp = TwoFloat::from_f64(1.0);
    let mut tf = f;
    let mut tg = g;
    let mut tfp = TwoFloat::new_mul(x, x) / 2.0;
    let mut tgp = gp;
    fp += tfp;
    for k in 1..400 {
        let kk = k as f64;
        tf = tf * x3 / ((3.0 * kk - 1.0) * 3.0 * kk);
        tg = tg * x3 / (3.0 * kk * (3.0 * kk + 1.0));
        tgp = tgp * x3 / (3.0 * kk * (3.0 * kk - 2.0));
        f += tf;
        g += tg;
        gp += tgp;
        if k >= 2 {
            tfp = tfp * x3 / ((3.0 * kk - 1.0) * (3.0 * kk - 3.0));
            fp += tfp;
        }
        let small = |t: TwoFloat, s: TwoFloat| t.hi().abs() <= eps * s.hi().abs().max(1e-300);
        if k > 2 && small(tf, f) && small(tg, g) && small(tfp, fp) && small(tgp, gp) {
            break;
        }
    }
    let c1 = dd(AI0);
    let c2 = dd(AIP0);
    let sqrt3 = TwoFloat::new_add(1.7320508075688772, 1.0035084221806903e-16);
    AiryValues {
        ai: to_f64(c1 * f - c2 * g),
        bi: to_f64(sqrt3 * (c1 * f + c2 * g)),
        aip: to_f64(c1 * fp - c2 * gp),
        bip: to_f64(sqrt3 * (c1 * fp + c2 * gp)),
    }
}

/// Asymptotic coefficients `u_k`, `v_k` up to the smallest term for `ζ`.
fn asymptotic_coeffs(zeta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    let mut last = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        let term = uk.abs().max(vk.abs()) / zeta.powi(k as i32);
        if term > last || term < 1e-18 {
            break;
        }
        last = term;
        u.push(uk);
        v.push(vk);
    }
    (u, v)
}

/// Sum of `c_k (s/ζ)^k` over `k ≡ parity (mod step)`, i.e. alternating or plain series.
fn series_sum(c: &[f64], zeta: f64, sign: f64, start: usize, step: usize) -> f64 {
    let mut acc = 0.0;
    let mut k = start;
    let mut j = 0;
    while k < c.len() {
        let s = if j % 2 == 0 { 1.0 } else { sign };
        acc += s * c[k] / zeta.powi(k as i32);
        k += step;
        j += 1;
    }
    acc
}

/// Positive-side expansion, scaled: `(Ai e^ζ, Bi e^{-ζ}, Ai' e^ζ, Bi' e^{-ζ})`.
fn asymptotic_pos_scaled(x: f64) -> (AiryValues, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = asymptotic_coeffs(zeta);
    let q = x.powf(0.25);
    let sp = PI.sqrt();
    let alt = |c: &[f64]| c.iter().enumerate().map(|(k, c)| if k % 2 == 0 { 1.0 } else { -1.0 } * c / zeta.powi(k as i32)).sum::<f64>();
    let plain = |c: &[f64]| c.iter().enumerate().map(|(k, c)| c / zeta.powi(k as i32)).sum::<f64>();
    (
        AiryValues {
            ai: alt(&u) / (2.0 * sp * q),
            bi: plain(&u) / (sp * q),
            aip: -q * alt(&v) / (2.0 * sp),
            bip: q * plain(&v) / sp,
        },
        zeta,
    )
}

/// Negative-side expansion at `x < 0`.
fn asymptotic_neg(x: f64) -> AiryValues {
    let y = -x;
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let (u, v) = asymptotic_coeffs(zeta);
    let q = y.powf(0.25);
    let sp = PI.sqrt();
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let ue = series_sum(&u, zeta, -1.0, 0, 2);
    let uo = series_sum(&u, zeta, -1.0, 1, 2);
    let ve = series_sum(&v, zeta, -1.0, 0, 2);
    let vo = series_sum(&v, zeta, -1.0, 1, 2);
    AiryValues {
        ai: (c * ue + s * uo) / (sp * q),
        bi: (-s * ue + c * uo) / (sp * q),
        aip: q * (s * ve - c * vo) / sp,
        bip: q * (c * ve + s * vo) / sp,
    }
}

/// Asymptotic branch at any `|x|` (accurate for `|x| ≳ 7`).
pub fn airy_asymptotic(x: f64) -> AiryValues {
    if x > 0.0 {
        let (s, zeta) = asymptotic_pos_scaled(x);
        let (em, ep) = ((-zeta).exp(), zeta.exp());
        AiryValues { ai: s.ai * em, bi: s.bi * ep, aip: s.aip * em, bip: s.bip * ep }
    } else {
        asymptotic_neg(x)
    }
}

/// `(Ai(x), Bi(x), Ai'(x), Bi'(x))`.
pub fn airy_pair(x: f64) -> AiryValues {
    if x.abs() <= X_SWITCH {
        airy_series(x)
    } else {
        airy_asymptotic(x)
    }
}

/// `ln Ai(x)` for `x ≥ 0` without underflow.
pub fn ln_ai(x: f64) -> f64 {
    if x <= X_SWITCH {
        airy_series(x).ai.ln()
    } else {
        let (s, zeta) = asymptotic_pos_scaled(x);
        s.ai.ln() - zeta
    }
}

/// `ln Bi(x)` for `x ≥ 0` without overflow.
pub fn ln_bi(x: f64) -> f64 {
    if x <= X_SWITCH {
        airy_series(x).bi.ln()
    } else {
        let (s, zeta) = asymptotic_pos_scaled(x);
        s.bi.ln() + zeta
    }
}

/// `|Ai_{±1}(x)| = ½√(Ai(x)² + Bi(x)²)`.
pub fn rotated_airy_abs(x: f64) -> f64 {
    let v = airy_pair(x);
    0.5 * v.ai.hypot(v.bi)
}

/// `ln |Ai_{±1}(x)|`, finite where `Bi` overflows.
pub fn ln_rotated_airy_abs(x: f64) -> f64 {
    if x <= X_SWITCH {
        rotated_airy_abs(x).ln()
    } else {
        let lb = ln_bi(x);
        let la = ln_ai(x);
        lb + 0.5 * (1.0 + (2.0 * (la - lb)).exp()).ln() - std::f64::consts::LN_2
    }
}

/// `|w̃₁(x)|`: `√(Ai² + Bi²)` for `x < 0`, `2 Ai(x)` for `x ≥ 0`.
pub fn hankel_helper_abs(x: f64) -> f64 {
    let v = airy_pair(x);
    if x < 0.0 {
        v.ai.hypot(v.bi)
    } else {
        2.0 * v.ai
    }
}

/// `ln |w̃₁(x)|`, finite where `Ai` underflows.
pub fn ln_hankel_helper_abs(x: f64) -> f64 {
    if x < 0.0 {
        hankel_helper_abs(x).ln()
    } else {
        std::f64::consts::LN_2 + ln_ai(x)
    }
}
