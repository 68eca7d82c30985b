//! The three-term recurrence `a_n u_{n+1} + (λ f_n - z) u_n + a_{n-1} u_{n-1} = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::CoefficientFamily;
use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];

/// First- and second-kind polynomials `P_n(z)`, `Q_n(z)` of `J(λ)`.
#[derive(Clone, Debug)]
pub struct PolyPair {
    pub lambda: f64,
    pub z: C64,
    pub p: Vec<C64>,
    pub q: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    General,
    Recessive,
    Dominant,
}

#[derive(Clone, Debug)]
pub struct ThreeTermSolution {
    pub lambda: f64,
    pub z: C64,
    pub values: Vec<C64>,
    pub kind: SolutionKind,
    /// Index normalised to 1.
    pub anchor: usize,
}

impl ThreeTermSolution {
    /// Largest relative recurrence residual over interior indices whose terms are representable.
    pub fn residual(&self, fam: &CoefficientFamily) -> f64 {
        max_residual(fam, self.lambda, self.z, &self.values)
    }
}

pub(crate) fn max_residual(fam: &CoefficientFamily, lambda: f64, z: C64, u: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 1..u.len().saturating_sub(1) {
        let t1 = u[n + 1] * fam.a(n);
        let t2 = u[n] * (lambda * fam.f(n) - z);
        let t3 = u[n - 1] * fam.a(n - 1);
        let scale = t1.norm() + t2.norm() + t3.norm();
        if scale > 1e-280 {
            worst = worst.max((t1 + t2 + t3).norm() / scale);
        }
    }
    worst
}

/// Forward recursion from `(u_0, u_1)` up to index `n`.
pub fn solve_forward(fam: &CoefficientFamily, lambda: f64, z: C64, u0: C64, u1: C64, n: usize) -> ThreeTermSolution {
    let mut values = Vec::with_capacity(n + 1);
    values.push(u0);
    if n >= 1 {
        values.push(u1);
    }
    for k in 1..n {
        let next = ((z - lambda * fam.f(k)) * values[k] - values[k - 1] * fam.a(k - 1)) / fam.a(k);
        values.push(next);
    }
    ThreeTermSolution {
        lambda,
        z,
        values,
        kind: SolutionKind::General,
        anchor: 0,
    }
}

/// `P_0 … P_n` and `Q_0 … Q_n`.
pub fn orthogonal_polynomials(fam: &CoefficientFamily, lambda: f64, z: C64, n: usize) -> Result<PolyPair> {
    if n < 1 {
        return invalid("orthogonal_polynomials needs N >= 1");
    }
    let a0 = fam.a(0);
    let p = solve_forward(fam, lambda, z, C64::new(1.0, 0.0), (z - lambda * fam.f(0)) / a0, n).values;
    let q = solve_forward(fam, lambda, z, C64::new(0.0, 0.0), C64::new(1.0 / a0, 0.0), n).values;
    Ok(PolyPair { lambda, z, p, q })
}

/// Discrete Wronskian `a_n (u_n v_{n+1} - u_{n+1} v_n)`.
pub fn wronskian(fam: &CoefficientFamily, u: &[C64], v: &[C64], n: usize) -> C64 {
    (u[n] * v[n + 1] - u[n + 1] * v[n]) * fam.a(n)
}

/// Maps `(u_n, u_{n-1})` to `(u_{n+1}, u_n)`.
pub fn transfer_matrix(fam: &CoefficientFamily, lambda: f64, z: C64, n: usize) -> Result<Mat2> {
    if n < 1 {
        return invalid("transfer_matrix needs n >= 1");
    }
    let an = fam.a(n);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    Ok([
        [(z - lambda * fam.f(n)) / an, C64::new(-fam.a(n - 1) / an, 0.0)],
        [one, zero],
    ])
}

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub fn mat_vec(x: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [x[0][0] * v[0] + x[0][1] * v[1], x[1][0] * v[0] + x[1][1] * v[1]]
}

/// Turán quadratic form `<Re(E T_n) v, v>`, `E = [[0, 1], [-1, 0]]`, with `Re` the Hermitian part.
pub fn turan_form(fam: &CoefficientFamily, lambda: f64, z: C64, n: usize, v: [C64; 2]) -> Result<f64> {
    let t = transfer_matrix(fam, lambda, z, n)?;
    let et = [[t[1][0], t[1][1]], [-t[0][0], -t[0][1]]];
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            let herm = (et[i][j] + et[j][i].conj()) * 0.5;
            acc += v[i].conj() * herm * v[j];
        }
    }
    Ok(acc.re)
}

/// `a_n` times the Turán form at `(u_n, u_{n-1})`.
pub fn turan_determinant(fam: &CoefficientFamily, lambda: f64, z: C64, u: &[C64], n: usize) -> Result<f64> {
    Ok(fam.a(n) * turan_form(fam, lambda, z, n, [u[n], u[n - 1]])?)
}

/// Default seed index `2·⌊x_4/h⌋`, pushed out until the tail regime `λ f_n/a_n ≥ 8` is reached.
pub fn default_seed(fam: &CoefficientFamily, lambda: f64) -> usize {
    let delta = fam.delta();
    let h = lambda.powf(1.0 / delta);
    let x4 = (39.0f64 / 8.0).powf(1.0 / delta);
    let n4 = (x4 / h).floor().min(1e9) as usize;
    let mut seed = (2 * n4).max(16);
    while lambda * fam.f(seed) / fam.a(seed) < 8.0 && seed < 1 << 26 {
        seed *= 2;
    }
    seed
}

/// Square-summable solution of the recurrence on `0..=n`, normalised to `u_0 = 1`.
///
/// In the variables `u_n = (-1)^n a_n^{-1/2} v_n` the ratios `r_n = v_n/v_{n-1}` obey a
/// contracting backward Riccati map; it is seeded with `r ≈ a_n/(λ f_n)` far in the tail.
pub fn recessive_solution(fam: &CoefficientFamily, lambda: f64, z: C64, n: usize) -> Result<ThreeTermSolution> {
    if !(lambda > 0.0) {
        return invalid("recessive_solution needs lambda > 0 (no tail regime at lambda = 0)");
    }
    let seed = default_seed(fam, lambda).max(n + 1);
    recessive_solution_seeded(fam, lambda, z, n, seed)
}

/// As [`recessive_solution`] with an explicit seed index (`seed > n`).
pub fn recessive_solution_seeded(
    fam: &CoefficientFamily,
    lambda: f64,
    z: C64,
    n: usize,
    seed: usize,
) -> Result<ThreeTermSolution> {
    if !(lambda > 0.0) {
        return invalid("recessive_solution needs lambda > 0 (no tail regime at lambda = 0)");
    }
    if seed <= n {
        return invalid(format!("seed {seed} must exceed the window {n}"));
    }
    let ratios = riccati_ratios(fam, lambda, z, seed)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(C64::new(1.0, 0.0));
    for k in 1..=n {
        let step = -ratios[k] * (fam.a(k - 1) / fam.a(k)).sqrt();
        values.push(values[k - 1] * step);
    }
    let sol = ThreeTermSolution {
        lambda,
        z,
        values,
        kind: SolutionKind::Recessive,
        anchor: 0,
    };
    let res = sol.residual(fam);
    if !(res < 1e-10) {
        return Err(Error::NoConvergence {
            what: "recessive solution residual".into(),
            n,
            change: res,
        });
    }
    Ok(sol)
}

/// Backward Riccati ratios `r_k = v_k / v_{k-1}` for `1 ≤ k ≤ seed` (index 0 unused).
pub fn riccati_ratios(fam: &CoefficientFamily, lambda: f64, z: C64, seed: usize) -> Result<Vec<C64>> {
    let delta = fam.delta();
    let h = lambda.powf(1.0 / delta);
    let n3 = ((33.0f64 / 8.0).powf(1.0 / delta) / h).ceil();
    let mut r = vec![C64::new(0.0, 0.0); seed + 2];
    r[seed + 1] = C64::new(fam.a(seed + 1) / (lambda * fam.f(seed + 1)), 0.0);
    for k in (1..=seed).rev() {
        let (am, a0, ap) = (fam.a(k - 1), fam.a(k), fam.a(k + 1));
        let mu = (am * ap).sqrt() / a0;
        let g = (lambda * fam.f(k) - z) / a0;
        let den = g * (ap / a0).sqrt() - r[k + 1];
        let rk = mu / den;
        if !(rk.re.is_finite() && rk.im.is_finite()) {
            return Err(Error::NoConvergence {
                what: "Riccati ratio (z on the real spectrum?)".into(),
                n: k,
                change: f64::INFINITY,
            });
        }
        r[k] = rk;
        let ratio = lambda * fam.f(k) / a0;
        if (k as f64) >= n3 && ratio >= 4.0 {
            let eps = (rk * ratio - 1.0).norm();
            if eps > 1.0 / 3.0 {
                return Err(Error::NoConvergence {
                    what: "Riccati tail error proxy above 1/3".into(),
                    n: k,
                    change: eps,
                });
            }
        }
    }
    r.truncate(seed + 1);
    Ok(r)
}
