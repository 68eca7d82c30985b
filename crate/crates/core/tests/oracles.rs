//! Independent oracles: closed forms, dense linear algebra (nalgebra) and
//! brute-force recursions, plus frozen regression values of the main pipeline.

use limit_circle::asymptotics::{self, airy};
use limit_circle::coeffs::{self, explicit_family, pochhammer, squeezing_family, validate_hypothesis, CoefficientFamily};
use limit_circle::limits;
use limit_circle::recurrence::{self, orthogonal_polynomials, solve_forward, transfer_matrix, turan_form, wronskian};
use limit_circle::spectral::{self, ExtensionM, ExtensionParam, Truncation};
use limit_circle::squeezing::{self, FockVector, GridSpec};
use limit_circle::Complex64 as C64;
use nalgebra::{DMatrix, SymmetricEigen};

fn fam333() -> CoefficientFamily {
    squeezing_family(3, 3, 0).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn dense_truncation(fam: &CoefficientFamily, lambda: f64, n: usize) -> DMatrix<f64> {
    let (d, e) = spectral::truncation(fam, lambda, n);
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => d[i],
        1 => e[i.min(j)],
        _ => 0.0,
    })
}

fn dense_resolvent(fam: &CoefficientFamily, lambda: f64, z: C64, n: usize) -> DMatrix<C64> {
    let m = dense_truncation(fam, lambda, n).map(|v| c(v, 0.0)) - DMatrix::from_diagonal_element(n, n, z);
    m.try_inverse().expect("J_n - z invertible for non-real z")
}

// ----- coefficient families -------------------------------------------------

#[test]
fn pochhammer_direct_products() {
    assert_eq!(pochhammer(7, 0).unwrap(), 1);
    assert_eq!(pochhammer(4, 3).unwrap(), 4 * 5 * 6);
    assert_eq!(pochhammer(1, 3).unwrap(), 6);
    assert!(pochhammer(u64::MAX - 2, 5).is_err());
}

#[test]
fn squeezing_family_direct_evaluation() {
    let fam = fam333();
    let k32 = 3f64.powf(1.5);
    assert!(rel(fam.a(0), 6f64.sqrt() / k32) < 1e-15);
    assert!(rel(fam.a(1), 120f64.sqrt() / k32) < 1e-15);
    assert!((fam.a(0) - 0.4714).abs() < 1e-4 && (fam.a(1) - 2.1082).abs() < 1e-4);
    for n in 0..50 {
        assert_eq!(fam.f(n), (n as f64).powi(3));
    }
    assert_eq!((fam.alpha, fam.beta), (1.5, 3.0));
}

#[test]
fn hypothesis_report_cases() {
    let ok = validate_hypothesis(&fam333(), 2000).unwrap();
    assert!(ok.all_pass(), "{:?}", ok.checks);
    assert!(ok.ratio_increasing);
    // n^2 both ways: beta = alpha.
    let flat = explicit_family(2.0, 2.0, 0.0, 0.0, vec![1.0], vec![0.0]).unwrap();
    let rep = validate_hypothesis(&flat, 500).unwrap();
    assert!(!rep.get("growth_f").unwrap().pass);
    let slow = explicit_family(1.0, 3.0, 0.0, 0.0, vec![1.0], vec![0.0]).unwrap();
    let rep = validate_hypothesis(&slow, 500).unwrap();
    assert!(!rep.get("exponent_gate").unwrap().pass);
    assert!(validate_hypothesis(&fam333(), 9).is_err());
}

// ----- recurrence -----------------------------------------------------------

#[test]
fn polynomial_initial_values() {
    let fam = fam333();
    let pq = orthogonal_polynomials(&fam, 1.0, c(0.0, 0.0), 4).unwrap();
    assert_eq!(pq.p[0], c(1.0, 0.0));
    assert_eq!(pq.q[0], c(0.0, 0.0));
    assert_eq!(pq.q[1], c(1.0 / fam.a(0), 0.0));
    assert_eq!(pq.p[1], c(0.0, 0.0));
}

/// `P_n(λ, z)` is a polynomial of degree `n` in `λ`: Lagrange interpolation through
/// `n + 1` nodes reproduces it at a further point.
#[test]
fn polynomials_interpolate_in_lambda() {
    let fam = fam333();
    let z = c(0.4, 0.7);
    let n = 6;
    let nodes: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let vals: Vec<C64> = nodes.iter().map(|&l| orthogonal_polynomials(&fam, l, z, n).unwrap().p[n]).collect();
    for x in [0.37, -0.81, 0.05] {
        let mut interp = c(0.0, 0.0);
        for (i, &xi) in nodes.iter().enumerate() {
            let w: f64 = nodes.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &xj)| (x - xj) / (xi - xj)).product();
            interp += vals[i] * w;
        }
        let direct = orthogonal_polynomials(&fam, x, z, n).unwrap().p[n];
        assert!((interp - direct).norm() <= 1e-9 * direct.norm().max(1.0), "{interp} vs {direct}");
    }
}

#[test]
fn transfer_matrix_product_reproduces_recursion() {
    let fam = fam333();
    let (lambda, z) = (0.02, c(-0.3, 0.9));
    let pq = orthogonal_polynomials(&fam, lambda, z, 41).unwrap();
    let mut v = [pq.p[1], pq.p[0]];
    for n in 1..=40 {
        let t = transfer_matrix(&fam, lambda, z, n).unwrap();
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        assert!((det - fam.a(n - 1) / fam.a(n)).norm() < 1e-15);
        assert_eq!((t[1][0], t[1][1]), (c(1.0, 0.0), c(0.0, 0.0)));
        v = recurrence::mat_vec(&t, v);
        assert!((v[0] - pq.p[n + 1]).norm() <= 1e-12 * pq.p[n + 1].norm().max(1.0));
        assert!((v[1] - pq.p[n]).norm() <= 1e-12 * pq.p[n].norm().max(1.0));
    }
}

#[test]
fn turan_form_matches_explicit_assembly() {
    let fam = fam333();
    let (lambda, z) = (0.01, c(0.25, 0.6));
    let v = [c(0.3, -0.2), c(-1.1, 0.4)];
    for n in [1, 5, 17, 40] {
        let (an, am, fl) = (fam.a(n), fam.a(n - 1), lambda * fam.f(n));
        let a01 = (c(fl, 0.0) - z.conj()) / (2.0 * an);
        let a10 = (c(fl, 0.0) - z) / (2.0 * an);
        let quad = v[0].conj() * v[0] + v[0].conj() * a01 * v[1] + v[1].conj() * a10 * v[0] + v[1].conj() * (am / an) * v[1];
        assert!((turan_form(&fam, lambda, z, n, v).unwrap() - quad.re).abs() < 1e-14);
        assert!(quad.im.abs() < 1e-15);
    }
    assert_eq!(turan_form(&fam, lambda, z, 3, [c(0.0, 0.0); 2]).unwrap(), 0.0);
}

/// Two brute-force forward solutions have an `n`-independent Wronskian.
#[test]
fn wronskian_of_two_solutions_is_constant() {
    let fam = fam333();
    let (lambda, z) = (0.003, c(0.8, 0.3));
    let u = solve_forward(&fam, lambda, z, c(0.2, 1.0), c(-0.5, 0.1), 120).values;
    let v = solve_forward(&fam, lambda, z, c(1.3, -0.4), c(0.7, 0.9), 120).values;
    let w0 = wronskian(&fam, &u, &v, 0);
    for n in 1..119 {
        let w = wronskian(&fam, &u, &v, n);
        // Cancellation floor: both terms of the Wronskian are of size a_n|u_n||v_{n+1}|.
        let floor = 64.0 * f64::EPSILON * fam.a(n) * (u[n].norm() * v[n + 1].norm() + u[n + 1].norm() * v[n].norm());
        assert!((w - w0).norm() <= 1e-12 * w0.norm() + floor, "n = {n}: {w} vs {w0}");
    }
    assert_eq!(wronskian(&fam, &u, &u, 7), c(0.0, 0.0));
}

/// The recessive solution is proportional to the resolvent column of a large truncation.
#[test]
fn recessive_solution_matches_resolvent_column() {
    let fam = fam333();
    let (lambda, z) = (0.01, c(0.2, 1.0));
    let sol = recurrence::recessive_solution(&fam, lambda, z, 60).unwrap();
    assert!(sol.residual(&fam) < 1e-10);
    let g = dense_resolvent(&fam, lambda, z, 300);
    // G_{n0} = u_n / W for n >= 1 (recessive on the right of the diagonal entry 0).
    let scale = g[(1, 0)] / sol.values[1];
    for n in 1..=60 {
        let expect = g[(n, 0)] / scale;
        assert!((sol.values[n] - expect).norm() <= 1e-9 * expect.norm().max(1e-300), "n = {n}");
    }
}

// ----- spectra and Weyl functions ----------------------------------------------

#[test]
fn truncated_eigenvalues_match_dense_eigensolver() {
    let fam = fam333();
    for (lambda, n) in [(0.0, 30), (0.05, 60), (1.0, 25)] {
        let ours = spectral::truncated_eigenvalues(&fam, lambda, n, None).unwrap();
        let mut dense: Vec<f64> = SymmetricEigen::new(dense_truncation(&fam, lambda, n)).eigenvalues.iter().cloned().collect();
        dense.sort_by(f64::total_cmp);
        let scale = dense.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in ours.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-11 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn weyl_function_and_green_function_match_dense_resolvent() {
    let fam = fam333();
    let tr = Truncation::default();
    for (lambda, z) in [(0.05, c(0.0, 1.0)), (0.3, c(-1.5, 0.4)), (0.01, c(2.0, 3.0))] {
        let g = dense_resolvent(&fam, lambda, z, 400);
        let m = spectral::weyl_m(&fam, lambda, z, &tr).unwrap();
        assert!((m.value() - g[(0, 0)]).norm() < 1e-10, "M = {} vs {}", m.value(), g[(0, 0)]);
        for (n, k) in [(0, 3), (4, 2), (5, 5)] {
            let ours = spectral::green_function(&fam, lambda, z, n, k, &tr).unwrap();
            assert!((ours - g[(n, k)]).norm() < 1e-9, "G_{n}{k}");
        }
    }
}

#[test]
fn hellmann_feynman_matches_dense_eigenvector() {
    let fam = fam333();
    let (lambda, n) = (0.02, 80);
    let eig = SymmetricEigen::new(dense_truncation(&fam, lambda, n));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    for j in 0..3 {
        let col = eig.eigenvectors.column(idx[j]);
        let expect: f64 = (0..n).map(|k| fam.f(k) * col[k] * col[k]).sum();
        let (ev, d) = spectral::hellmann_feynman(&fam, lambda, j, n);
        assert!(rel(ev, eig.eigenvalues[idx[j]]) < 1e-12);
        assert!(rel(d, expect) < 1e-9);
    }
}

#[test]
fn quad_at_origin_and_moebius_values() {
    let fam = fam333();
    let q0 = spectral::nevanlinna_quad(&fam, c(0.0, 0.0), 1e-8).unwrap();
    assert_eq!((q0.a, q0.b, q0.c, q0.d), ((0.0, 0.0), (-1.0, 0.0), (-1.0, 0.0), (0.0, 0.0)));
    // m(0, t) = -t.
    for t in [-2.0, 0.0, 0.5, 3.0] {
        assert_eq!(spectral::extension_m(&q0, ExtensionParam::Finite(t)), ExtensionM::Value(c(-t, 0.0) + 0.0));
    }
    assert_eq!(spectral::extension_m(&q0, ExtensionParam::Infinity), ExtensionM::Pole);
}

/// Parity-selected truncations at λ = 0 converge to the two distinguished extensions:
/// even sizes to `t = 0`, odd sizes to `t = ∞` (slowly).
#[test]
fn parity_truncations_approach_extension_values() {
    let fam = fam333();
    let z = c(0.0, 1.0);
    let quad = spectral::nevanlinna_quad(&fam, z, 1e-8).unwrap();
    let m0 = limits::extension_value(&quad, ExtensionParam::Finite(0.0)).unwrap();
    let minf = limits::extension_value(&quad, ExtensionParam::Infinity).unwrap();
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for n in [200, 800, 3200] {
        let even = spectral::continued_fraction(&fam, 0.0, z, n);
        let odd = spectral::continued_fraction(&fam, 0.0, z, n + 1);
        let d = ((even - m0).norm(), (odd - minf).norm());
        assert!(d.0 < prev.0 && d.1 < prev.1, "n = {n}: {d:?}");
        prev = d;
    }
    assert!(prev.0 < 5e-3 && prev.1 < 5e-3, "{prev:?}");
}

/// Eigenvalues of `J_t` against the λ = 0 truncations: `J_∞` contains 0 (odd sizes), and
/// the smallest positive eigenvalue of `J_0` is the limit of even truncations.
#[test]
fn extension_spectrum_against_parity_truncations() {
    let fam = fam333();
    let s_inf = spectral::extension_spectrum(&fam, ExtensionParam::Infinity, (-3.0, 3.0), 1e-12, 300).unwrap();
    let s_zero = spectral::extension_spectrum(&fam, ExtensionParam::Finite(0.0), (-3.0, 3.0), 1e-12, 300).unwrap();
    assert!(s_inf.eigenvalues.iter().any(|e| e.abs() < 1e-10), "{:?}", s_inf.eigenvalues);
    let e0 = s_zero.eigenvalues.iter().cloned().filter(|e| *e > 0.0).fold(f64::INFINITY, f64::min);
    let mut prev = f64::INFINITY;
    for n in [100, 400, 1600] {
        let ev = spectral::truncated_eigenvalues(&fam, 0.0, n, Some((1e-9, 3.0))).unwrap()[0];
        let d = (ev - e0).abs();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-2, "{prev}");
    // Eigenvalues of J_t and J_s interlace (distinct extensions).
    let all: Vec<(f64, u8)> = {
        let mut v: Vec<(f64, u8)> = s_inf.eigenvalues.iter().map(|&e| (e, 0)).chain(s_zero.eigenvalues.iter().map(|&e| (e, 1))).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    assert!(all.windows(2).all(|w| w[0].1 != w[1].1));
}

// ----- frozen regression values (computed once, checked for drift) ----------------

#[test]
fn frozen_limit_circle_at_i() {
    let fam = fam333();
    let quad = spectral::nevanlinna_quad(&fam, c(0.0, 1.0), 1e-8).unwrap();
    let circle = spectral::limit_circle(&quad, 100).unwrap();
    assert!(circle.center.0.abs() < 1e-12);
    assert!(rel(circle.center.1, 0.9046607626178889) < 1e-8);
    assert!(rel(circle.radius, 0.020240096239406518) < 1e-7);
    let minf = limits::extension_value(&quad, ExtensionParam::Infinity).unwrap();
    let m0 = limits::extension_value(&quad, ExtensionParam::Finite(0.0)).unwrap();
    assert!(rel(minf.im, 0.9249008588572953) < 1e-8 && minf.re.abs() < 1e-12);
    assert!(rel(m0.im, 0.8844206664) < 1e-8 && m0.re.abs() < 1e-12, "{m0}");
}

#[test]
fn frozen_selection_sequence() {
    let fam = fam333();
    let seq = limits::select_sequence(&fam, ExtensionParam::Infinity, 0.0, 6, 1e-10, &Truncation::default()).unwrap();
    let frozen = [0.343996262177825, 0.13434224606664852, 0.050165907797298424, 0.022212722211852963, 0.010037636396651013, 0.004702938290427016];
    let levels = [1, 2, 4, 7, 12, 20];
    for ((el, &l), &lev) in seq.iter().zip(&frozen).zip(&levels) {
        assert!(rel(el.lambda, l) < 1e-8, "{} vs {l}", el.lambda);
        assert_eq!(el.level, lev);
    }
}

#[test]
fn frozen_admissible_couplings() {
    let l3 = asymptotics::max_admissible_lambda(&fam333()).unwrap();
    let l4 = asymptotics::max_admissible_lambda(&squeezing_family(4, 4, 0).unwrap()).unwrap();
    assert!((l3 - 0.01504).abs() < 5e-5, "{l3}");
    assert!((l4 - 0.0027778).abs() < 1e-6, "{l4}");
    assert!(matches!(asymptotics::region_chart(&fam333(), 0.1), Err(limit_circle::Error::LambdaTooLarge { .. })));
}

// ----- turning-point machinery ------------------------------------------------

/// `d/dx |ξ|^{3/2} = ±(3/2) arccosh q` right of the turning point and `∓(3/2) arccos q` left of it.
#[test]
fn langer_transform_derivative_identity() {
    let fam = fam333();
    let h = 0.05;
    let tp = asymptotics::TurningPointChart::new(&fam, h, 1e-13).unwrap();
    let x = asymptotics::abscissae(&fam);
    for xv in [x[0] * 1.05, 0.5 * (x[1] + tp.x0), tp.x0 * 1.3, x[3] * 0.98] {
        let e = 1e-4 * xv;
        let f = |y: f64| tp.xi(y).unwrap().abs().powf(1.5);
        let num = (f(xv + e) - f(xv - e)) / (2.0 * e);
        let q = asymptotics::qfun(&fam, xv, h);
        let expect = if xv > tp.x0 { 1.5 * q.acosh() } else { -1.5 * q.acos() };
        assert!((num - expect).abs() < 1e-6 * expect.abs().max(1.0), "x = {xv}: {num} vs {expect}");
    }
}

#[test]
fn turning_point_solves_q_equal_one() {
    let fam = squeezing_family(4, 4, 0).unwrap();
    for h in [0.1, 0.03, 0.01] {
        let x0 = asymptotics::turning_point(&fam, h, 1e-14).unwrap();
        assert!((asymptotics::qfun(&fam, x0, h) - 1.0).abs() < 1e-12);
    }
    let x0 = asymptotics::turning_point(&fam, 1e-9, 1e-15).unwrap();
    assert!((x0 - 2f64.powf(1.0 / fam.delta())).abs() < 1e-8);
}

#[test]
fn airy_special_values() {
    // Ai'(0) = -3^{-1/3}/Γ(1/3), Bi(0) = √3 Ai(0), Bi'(0) = -√3 Ai'(0).
    let aip0 = -3f64.powf(-1.0 / 3.0) / statrs::function::gamma::gamma(1.0 / 3.0);
    let v = airy::airy_pair(0.0);
    assert!((v.aip - aip0).abs() < 1e-15);
    assert!(rel(v.bi, 3f64.sqrt() * v.ai) < 1e-15 && rel(v.bip, -(3f64.sqrt()) * v.aip) < 1e-15);
    // |Ai_{±1}|² = (Ai² + Bi²)/4 and the helper at the origin.
    assert!(rel(airy::rotated_airy_abs(0.0), 0.5 * v.ai.hypot(v.bi)) < 1e-15);
    assert!(rel(airy::hankel_helper_abs(0.0), 2.0 * v.ai) < 1e-15);
    for x in [-12.0, -3.0, 2.0, 11.0] {
        assert!((airy::airy_pair(x).wronskian() - std::f64::consts::FRAC_1_PI).abs() < 1e-13);
    }
}

// ----- squeezing ----------------------------------------------------------------

#[test]
fn assembly_entries() {
    let a = squeezing::assemble_full(3, 3, 1.0, 12).unwrap();
    assert_eq!(a.entry(3, 0), 6f64.sqrt());
    assert_eq!(a.entry(0, 3), 6f64.sqrt());
    assert_eq!(a.entry(7, 4), (pochhammer(5, 3).unwrap() as f64).sqrt());
    for n in 0..12 {
        assert_eq!(a.entry(n, n), (n as f64).powi(3));
    }
}

/// Block evolution embedded into Fock space equals evolution of the full truncation.
#[test]
fn block_evolution_matches_full_operator() {
    let (k, hpow, coupling) = (3u32, 3u32, 0.2);
    let n_block = 20;
    let n_full = 3 * n_block;
    let dense = squeezing::assemble_full(k, hpow, coupling, n_full).unwrap().to_dense();
    let eig = SymmetricEigen::new(dense);
    let time = 0.3;
    let mut full = vec![c(0.0, 0.0); n_full];
    for (col, &ev) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(col);
        let w = C64::from_polar(v[0], -ev * time);
        for i in 0..n_full {
            full[i] += w * v[i];
        }
    }
    let fam = squeezing_family(k, hpow, 0).unwrap();
    let lambda = squeezing::block_lambda(k, hpow, coupling);
    let block = squeezing::evolve_truncated(&fam, lambda, time, n_block).unwrap().block_to_fock(3, 0);
    for i in 0..block.len() {
        assert!((block.coeffs[i] - full[i]).norm() < 1e-10, "i = {i}");
    }
    assert!(rel(squeezing::physical_coupling(k, hpow, lambda), coupling) < 1e-15);
}

#[test]
fn wigner_marginals_match_hermite_densities() {
    let grid = GridSpec { x_range: (-5.0, 5.0), p_range: (-7.0, 7.0), nx: 41, np: 141 };
    for n in [0usize, 1] {
        let w = squeezing::wigner(&FockVector::basis(4, n), &grid).unwrap();
        let marg = w.position_marginal();
        for (x, m) in grid.xs().iter().zip(&marg) {
            let psi = squeezing::hermite_functions(*x, n + 1)[n];
            assert!((m - psi * psi).abs() < 1e-3, "n = {n}, x = {x}: {m} vs {}", psi * psi);
        }
    }
}

#[test]
fn wigner_origin_is_parity() {
    let grid = GridSpec { x_range: (-1.0, 1.0), p_range: (-1.0, 1.0), nx: 3, np: 3 };
    let s = FockVector { coeffs: vec![c(0.6, 0.0), c(0.0, 0.48), c(0.0, 0.0), c(0.64, 0.0)] };
    let w = squeezing::wigner(&s, &grid).unwrap();
    let parity: f64 = s.coeffs.iter().enumerate().map(|(n, c)| if n % 2 == 0 { 1.0 } else { -1.0 } * c.norm_sqr()).sum();
    assert!((w.values[1][1] - parity / std::f64::consts::PI).abs() < 1e-10);
}

#[test]
fn family_config_round_trip() {
    let text = "kind = \"explicit\"\nalpha = 2.0\nbeta = 4.0\na = [0.5, 1.5]\nf = [0.0, 1.0]\n";
    let spec: limit_circle::cli::FamilyFile = toml::from_str(text).unwrap();
    let fam = spec.build().unwrap();
    assert_eq!((fam.alpha, fam.beta, fam.a(1), fam.f(0)), (2.0, 4.0, 1.5, 0.0));
    assert_eq!(fam.a(10), 100.0);
    let sq: limit_circle::cli::FamilyFile = toml::from_str("kind = \"squeezing\"\nk = 4\nhpow = 4\n").unwrap();
    assert_eq!(sq.build().unwrap().label(), coeffs::squeezing_family(4, 4, 0).unwrap().label());
}
