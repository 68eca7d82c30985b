//! Higher-order squeezing `A_{k,h}(K) = (a†)^k + a^k + K (a†a)^h` on Fock space:
//! banded assembly, the decomposition into `k` Jacobi blocks, truncated unitary
//! evolution, the extension dynamics `Φ_k(t, T)`, and Wigner functions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::{pochhammer, squeezing_family, CoefficientFamily};
use crate::error::{invalid, Error, Result};
use crate::limits;
use crate::recurrence::orthogonal_polynomials;
use crate::spectral::{self, ExtensionParam, Truncation};

type C64 = Complex64;

/// Symmetric matrix with nonzero entries only on the diagonal and the `±k` band.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedSym {
    pub n: usize,
    pub k: usize,
    pub diag: Vec<f64>,
    /// `band[i] = ⟨φ_{i+k}|A|φ_i⟩`.
    pub band: Vec<f64>,
}

impl BandedSym {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (i.min(j), i.max(j));
        if lo == hi {
            self.diag[lo]
        } else if hi - lo == self.k {
            self.band[lo]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j))
    }
}

fn check_params(k: u32, hpow: u32) -> Result<()> {
    if k < 3 || 2 * hpow <= k {
        return invalid(format!("squeezing needs k >= 3 and 2h > k (got k = {k}, h = {hpow})"));
    }
    Ok(())
}

/// `A_{k,h}(K)` on the Fock truncation `span{φ_0 … φ_{N-1}}`.
pub fn assemble_full(k: u32, hpow: u32, coupling: f64, n: usize) -> Result<BandedSym> {
    check_params(k, hpow)?;
    if !(coupling >= 0.0) {
        return invalid("coupling K must be >= 0");
    }
    let ku = k as usize;
    let diag = (0..n).map(|i| coupling * (i as f64).powi(hpow as i32)).collect();
    let band = (0..n.saturating_sub(ku))
        .map(|i| pochhammer(i as u64 + 1, k as u64).map(|p| (p as f64).sqrt()))
        .collect::<Result<_>>()?;
    Ok(BandedSym { n, k: ku, diag, band })
}

/// Block coupling `λ = k^{h - k/2} K` of the Jacobi blocks.
pub fn block_lambda(k: u32, hpow: u32, coupling: f64) -> f64 {
    (k as f64).powf(hpow as f64 - k as f64 / 2.0) * coupling
}

/// Inverse of [`block_lambda`]: `K = k^{k/2 - h} λ`.
pub fn physical_coupling(k: u32, hpow: u32, lambda: f64) -> f64 {
    (k as f64).powf(k as f64 / 2.0 - hpow as f64) * lambda
}

/// `A_{k,h}(K)` rebuilt by interleaving the `k` scaled Jacobi blocks `k^{k/2} J^{(m)}(λ)`.
pub fn assemble_blocks(k: u32, hpow: u32, coupling: f64, n: usize) -> Result<BandedSym> {
    check_params(k, hpow)?;
    let ku = k as usize;
    let lambda = block_lambda(k, hpow, coupling);
    let scale = (k as f64).powf(k as f64 / 2.0);
    let mut diag = vec![0.0; n];
    let mut band = vec![0.0; n.saturating_sub(ku)];
    for m in 0..k {
        let fam = squeezing_family(k, hpow, m)?;
        let mut r = 0usize;
        loop {
            let i = m as usize + r * ku;
            if i >= n {
                break;
            }
            diag[i] = scale * lambda * fam.f(r);
            if i + ku < n {
                band[i] = scale * fam.a(r);
            }
            r += 1;
        }
    }
    Ok(BandedSym { n, k: ku, diag, band })
}

/// Complex coefficient vector in an orthonormal (Fock or block) basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockVector {
    #[serde(serialize_with = "ser_complex_vec")]
    pub coeffs: Vec<C64>,
}

fn ser_complex_vec<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&(c.re, c.im))?;
    }
    seq.end()
}

impl FockVector {
    pub fn basis(n: usize, i: usize) -> FockVector {
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        coeffs[i] = C64::new(1.0, 0.0);
        FockVector { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩` over the common support (missing entries are zero).
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self, other⟩| / (‖self‖ ‖other‖)`.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm() / (self.norm() * other.norm())
    }

    /// `‖self - other‖`, zero-padding the shorter vector.
    pub fn distance(&self, other: &FockVector) -> f64 {
        let n = self.len().max(other.len());
        let zero = C64::new(0.0, 0.0);
        (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(zero);
                let b = other.coeffs.get(i).copied().unwrap_or(zero);
                (a - b).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Embeds a block-`m` vector (basis `φ_{m + rk}`) into Fock space.
    pub fn block_to_fock(&self, k: usize, m: usize) -> FockVector {
        let n = if self.is_empty() { 0 } else { m + (self.len() - 1) * k + 1 };
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (r, c) in self.coeffs.iter().enumerate() {
            coeffs[m + r * k] = *c;
        }
        FockVector { coeffs }
    }

    /// `⟨ψ|H|ψ⟩` for a real symmetric tridiagonal `H`.
    pub fn tridiagonal_energy(&self, diag: &[f64], off: &[f64]) -> f64 {
        let c = &self.coeffs;
        let mut e = C64::new(0.0, 0.0);
        for i in 0..c.len() {
            e += c[i].conj() * c[i] * diag[i];
            if i + 1 < c.len() {
                e += (c[i].conj() * c[i + 1] + c[i + 1].conj() * c[i]) * off[i];
            }
        }
        e.re
    }
}

/// `exp(-i k^{k/2} J_N(λ) T) e_0` on the `N`-truncation of a block.
pub fn evolve_truncated(fam: &CoefficientFamily, lambda: f64, time: f64, n: usize) -> Result<FockVector> {
    if n < 2 {
        return invalid("evolve_truncated needs N >= 2");
    }
    if !(lambda >= 0.0) {
        return invalid("evolve_truncated needs lambda >= 0");
    }
    let (d, e) = spectral::truncation(fam, lambda, n);
    let mat = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            d[i]
        } else if i + 1 == j {
            e[i]
        } else if j + 1 == i {
            e[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(mat);
    let s = fam.time_scale() * time;
    let mut out = DVector::from_element(n, C64::new(0.0, 0.0));
    for (col, &ev) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(col);
        let w = C64::from_polar(v[0], -s * ev);
        for i in 0..n {
            out[i] += w * v[i];
        }
    }
    Ok(FockVector { coeffs: out.iter().cloned().collect() })
}

/// Evolution on growing truncations (×1.5) until successive states agree to `tol`.
pub fn evolve_stabilized(fam: &CoefficientFamily, lambda: f64, time: f64, n_start: usize, tol: f64, n_max: usize) -> Result<(FockVector, usize)> {
    let mut n = n_start.max(8);
    let mut prev = evolve_truncated(fam, lambda, time, n)?;
    loop {
        let next_n = n + n / 2;
        if next_n > n_max {
            return Err(Error::NoConvergence { what: format!("truncated evolution at lambda = {lambda:e}"), n, change: f64::NAN });
        }
        let next = evolve_truncated(fam, lambda, time, next_n)?;
        if next.distance(&prev) <= tol {
            return Ok((next, next_n));
        }
        prev = next;
        n = next_n;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionState {
    pub t: ExtensionParam,
    pub time: f64,
    pub window: (f64, f64),
    pub eigenvalues: Vec<f64>,
    /// `1/‖P⁰(E)‖²` per eigenvalue.
    pub weights: Vec<f64>,
    /// `|1 - Σ_E 1/‖P⁰(E)‖²|`.
    pub completeness_defect: f64,
    pub state: FockVector,
}

/// `Φ(t, T) = Σ_E e^{-i k^{k/2} E T} P⁰(E)/‖P⁰(E)‖²` over the eigenvalues of `J_t` in `window`,
/// on the first `components` basis vectors.
pub fn extension_evolve(
    fam: &CoefficientFamily,
    t: ExtensionParam,
    time: f64,
    window: (f64, f64),
    tol: f64,
    components: usize,
) -> Result<ExtensionState> {
    let spec = spectral::extension_spectrum(fam, t, window, 1e-11, 1000)?;
    extension_state_from(fam, t, time, &spec, tol, components)
}

/// [`extension_evolve`] from an already computed extension spectrum.
pub fn extension_state_from(
    fam: &CoefficientFamily,
    t: ExtensionParam,
    time: f64,
    spec: &spectral::ExtensionSpectrum,
    tol: f64,
    components: usize,
) -> Result<ExtensionState> {
    if components == 0 {
        return invalid("extension_evolve needs at least one component");
    }
    let s = fam.time_scale() * time;
    let mut coeffs = vec![C64::new(0.0, 0.0); components];
    let mut weights = Vec::with_capacity(spec.eigenvalues.len());
    for &ev in &spec.eigenvalues {
        let (nsq, _) = spectral::lambda0_norm_sq(fam, ev);
        let w = 1.0 / nsq;
        weights.push(w);
        let pq = orthogonal_polynomials(fam, 0.0, C64::new(ev, 0.0), components.max(2))?;
        let phase = C64::from_polar(w, -s * ev);
        for (c, p) in coeffs.iter_mut().zip(&pq.p) {
            *c += phase * p.re;
        }
    }
    let completeness_defect = (1.0 - weights.iter().sum::<f64>()).abs();
    if completeness_defect >= tol {
        return Err(Error::Completeness { defect: completeness_defect, tol });
    }
    Ok(ExtensionState {
        t,
        time,
        window: spec.window,
        eigenvalues: spec.eigenvalues.clone(),
        weights,
        completeness_defect,
        state: FockVector { coeffs },
    })
}

/// Phase-space grid specification for [`wigner`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
    pub nx: usize,
    pub np: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { x_range: (-6.0, 6.0), p_range: (-6.0, 6.0), nx: 121, np: 121 }
    }
}

impl GridSpec {
    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_range, self.nx)
    }
    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_range, self.np)
    }
}

fn linspace((a, b): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub const WIGNER_CONVENTION: &str = "x,p quadratures; vacuum (1/pi) exp(-x^2 - p^2); unit integral";

#[derive(Clone, Debug, Serialize)]
pub struct WignerGrid {
    pub spec: GridSpec,
    /// `values[i][j] = W(x_i, p_j)`.
    pub values: Vec<Vec<f64>>,
    pub convention: &'static str,
}

impl WignerGrid {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let xs = self.spec.xs();
        let ps = self.spec.ps();
        let wx = trapezoid_weights(&xs);
        let wp = trapezoid_weights(&ps);
        let mut s = 0.0;
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                s += wx[i] * wp[j] * v;
            }
        }
        s
    }

    /// `∫ W(x_i, p) dp` on the grid.
    pub fn position_marginal(&self) -> Vec<f64> {
        let wp = trapezoid_weights(&self.spec.ps());
        self.values.iter().map(|row| row.iter().zip(&wp).map(|(v, w)| v * w).sum()).collect()
    }
}

fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Hermite functions `ψ_0(x) … ψ_{n-1}(x)`.
pub fn hermite_functions(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let p0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(p0);
    if n > 1 {
        out.push(2f64.sqrt() * x * p0);
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Position wavefunction `ψ(x) = Σ c_n ψ_n(x)` of a Fock-basis state.
pub fn position_wavefunction(state: &FockVector, x: f64) -> C64 {
    let h = hermite_functions(x, state.len());
    state.coeffs.iter().zip(&h).map(|(c, v)| c * v).sum()
}

/// `W(x, p) = (1/π) ∫ ψ*(x+y) ψ(x-y) e^{2ipy} dy` on the grid, by the trapezoidal rule.
pub fn wigner(state: &FockVector, grid: &GridSpec) -> Result<WignerGrid> {
    if grid.nx == 0 || grid.np == 0 {
        return invalid("wigner grid needs nx, np >= 1");
    }
    let norm = state.norm();
    if !((norm - 1.0).abs() < 1e-6) {
        return invalid(format!("wigner needs a normalised state (norm = {norm})"));
    }
    let n_max = state
        .coeffs
        .iter()
        .rposition(|c| c.norm() > 1e-16)
        .unwrap_or(0);
    let root = (2.0 * n_max as f64 + 1.0).sqrt();
    let p_max = grid.p_range.0.abs().max(grid.p_range.1.abs());
    let dy = std::f64::consts::PI / (4.0 * (root + p_max + 2.0));
    // ψ is negligible beyond |u| > root + 8.
    let reach = root + 8.0;
    let xs = grid.xs();
    let ps = grid.ps();
    let mut values = Vec::with_capacity(xs.len());
    for &x in &xs {
        let y_max = reach + x.abs();
        let ny = (y_max / dy).ceil() as usize;
        // y ≥ 0 half: the integrand at -y is the conjugate of the one at y.
        let prod: Vec<C64> = (0..=ny)
            .map(|j| {
                let y = j as f64 * dy;
                position_wavefunction(state, x + y).conj() * position_wavefunction(state, x - y)
            })
            .collect();
        let row = ps
            .iter()
            .map(|&p| {
                let mut s = prod[0].re;
                for (j, v) in prod.iter().enumerate().skip(1) {
                    let e = C64::from_polar(1.0, 2.0 * p * j as f64 * dy);
                    s += 2.0 * (v * e).re;
                }
                s * dy / std::f64::consts::PI
            })
            .collect();
        values.push(row);
    }
    Ok(WignerGrid { spec: *grid, values, convention: WIGNER_CONVENTION })
}

#[derive(Clone, Debug, Serialize)]
pub struct VacuumRow {
    pub j: usize,
    pub lambda: f64,
    /// Physical coupling `K_j = k^{k/2-h} λ_j`.
    pub coupling: f64,
    pub n_used: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VacuumReport {
    pub k: u32,
    pub hpow: u32,
    pub t_target: ExtensionParam,
    /// Eigenvalue of `J_t` kept in every `σ(J(λ_j))`: smallest modulus in the window.
    pub e_target: f64,
    pub time: f64,
    pub window: (f64, f64),
    pub completeness_defect: f64,
    pub rows: Vec<VacuumRow>,
    /// `Φ_k(t_target, T)` on the `m = 0` block basis.
    pub limit_state: FockVector,
    /// `Ψ_{k,h}(K_count, T)` on the `m = 0` block basis.
    pub final_state: FockVector,
}

/// Controls for [`vacuum_experiment`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VacuumConfig {
    pub window: (f64, f64),
    pub completeness_tol: f64,
    pub components: usize,
    pub evolve_tol: f64,
    pub n_max: usize,
    pub lambda_tol: f64,
}

impl Default for VacuumConfig {
    fn default() -> Self {
        VacuumConfig {
            window: (-100.0, 100.0),
            completeness_tol: 1e-4,
            components: 400,
            evolve_tol: 1e-8,
            n_max: 1 << 13,
            lambda_tol: 1e-10,
        }
    }
}

/// Vacuum dynamics `Ψ_{k,h}(K_j, T)` along a sequence selected for `t_target`, compared
/// with the limit `Φ_k(t_target, T)`.
pub fn vacuum_experiment(k: u32, hpow: u32, t_target: ExtensionParam, time: f64, count: usize, cfg: &VacuumConfig) -> Result<VacuumReport> {
    let fam = squeezing_family(k, hpow, 0)?;
    let spec = spectral::extension_spectrum(&fam, t_target, cfg.window, 1e-11, 1000)?;
    let e_target = spec
        .eigenvalues
        .iter()
        .cloned()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .ok_or_else(|| Error::InvalidParameter("no eigenvalue of J_t in the window".into()))?;
    let limit = extension_state_from(&fam, t_target, time, &spec, cfg.completeness_tol, cfg.components)?;
    // E = 0 lies exactly in σ(J_∞); avoid bisection noise there.
    let e_target = if t_target == ExtensionParam::Infinity && e_target.abs() < 1e-9 { 0.0 } else { e_target };
    let tr = Truncation::default();
    let seq = limits::select_sequence(&fam, t_target, e_target, count, cfg.lambda_tol, &tr)?;
    let mut rows = Vec::with_capacity(count);
    let mut final_state = FockVector { coeffs: Vec::new() };
    for el in &seq {
        let (psi, n_used) = evolve_stabilized(&fam, el.lambda, time, el.n_used.max(32), cfg.evolve_tol, cfg.n_max)?;
        rows.push(VacuumRow {
            j: el.j,
            lambda: el.lambda,
            coupling: physical_coupling(k, hpow, el.lambda),
            n_used,
            fidelity: limit.state.fidelity(&psi),
        });
        final_state = psi;
    }
    Ok(VacuumReport {
        k,
        hpow,
        t_target,
        e_target,
        time,
        window: cfg.window,
        completeness_defect: limit.completeness_defect,
        rows,
        limit_state: limit.state,
        final_state,
    })
}
