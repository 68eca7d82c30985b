//! Structural invariants checked on randomly drawn parameters.

use limit_circle::asymptotics::{self, airy};
use limit_circle::coeffs::{pochhammer, squeezing_family};
use limit_circle::recurrence::{self, solve_forward, transfer_matrix, turan_form, wronskian};
use limit_circle::spectral::{self, ExtensionM, ExtensionParam};
use limit_circle::squeezing::{self, FockVector};
use limit_circle::Complex64 as C64;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn upper_z() -> impl Strategy<Value = C64> {
    (-4.0..4.0f64, 0.2..3.0f64).prop_map(|(x, y)| c(x, y))
}

fn log_lambda(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|e: f64| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pochhammer_recurrence(x in 1u64..200, s in 0u64..6) {
        let lhs = pochhammer(x, s + 1).unwrap();
        prop_assert_eq!(lhs, pochhammer(x, s).unwrap() * (x + s) as u128);
        prop_assert_eq!(lhs, x as u128 * pochhammer(x + 1, s).unwrap());
    }

    /// `k^k a_n^2 = (kn + 1)_k` and `f_n = n^h`.
    #[test]
    fn squeezing_coefficients_are_pochhammer_roots(k in 3u32..6, n in 0usize..300) {
        let fam = squeezing_family(k, k, 0).unwrap();
        let kk = (k as f64).powi(k as i32);
        let p = pochhammer(k as u64 * n as u64 + 1, k as u64).unwrap() as f64;
        prop_assert!((fam.a(n).powi(2) * kk / p - 1.0).abs() < 1e-13);
        prop_assert_eq!(fam.f(n), (n as f64).powi(k as i32));
    }

    /// The ratio `f_n / a_n` increases strictly.
    #[test]
    fn diagonal_to_offdiagonal_ratio_increases(k in 3u32..6, n in 1usize..5000) {
        let fam = squeezing_family(k, k, 0).unwrap();
        prop_assert!(fam.f(n + 1) / fam.a(n + 1) > fam.f(n) / fam.a(n));
    }

    #[test]
    fn transfer_determinant_is_offdiagonal_ratio(lambda in log_lambda(-6.0, 0.0), z in upper_z(), n in 1usize..400) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let t = transfer_matrix(&fam, lambda, z, n).unwrap();
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        prop_assert!((det - fam.a(n - 1) / fam.a(n)).norm() < 1e-14);
    }

    #[test]
    fn wronskian_is_conserved(lambda in log_lambda(-6.0, -1.0), z in upper_z(), u0 in -1.0..1.0f64, v1 in -1.0..1.0f64) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let u = solve_forward(&fam, lambda, z, c(u0, 1.0), c(0.3, -0.2), 80).values;
        let v = solve_forward(&fam, lambda, z, c(1.0, 0.0), c(v1, 0.5), 80).values;
        let w0 = wronskian(&fam, &u, &v, 0);
        for n in 1..79 {
            let w = wronskian(&fam, &u, &v, n);
            let floor = 64.0 * f64::EPSILON * fam.a(n) * (u[n].norm() * v[n + 1].norm() + u[n + 1].norm() * v[n].norm());
            prop_assert!((w - w0).norm() <= 1e-12 * w0.norm() + floor, "n = {}: {} vs {}", n, w, w0);
        }
    }

    /// Bisection eigenvalues agree with a dense symmetric eigensolver.
    #[test]
    fn sturm_count_matches_dense(lambda in log_lambda(-4.0, 0.5), n in 2usize..60) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let (d, e) = spectral::truncation(&fam, lambda, n);
        let dense = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) { 0 => d[i], 1 => e[i.min(j)], _ => 0.0 });
        let mut ev: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        let ours = spectral::truncated_eigenvalues(&fam, lambda, n, None).unwrap();
        prop_assert_eq!(ours.len(), n);
        let scale = ev.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in ours.iter().zip(&ev) {
            prop_assert!((a - b).abs() <= 1e-11 * scale);
        }
    }

    /// The Turán form is comparable to the Euclidean norm on the first region.
    #[test]
    fn turan_form_is_coercive(lambda in log_lambda(-4.0, -2.0), z in upper_z(), v in prop::array::uniform4(-1.0..1.0f64)) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let chart = asymptotics::region_chart(&fam, lambda).unwrap();
        let w = [c(v[0], v[1]), c(v[2], v[3])];
        let norm = w[0].norm_sqr() + w[1].norm_sqr();
        prop_assume!(norm > 1e-6);
        let (lo, hi) = (chart.n[0].max(1), chart.n[2]);
        for n in [lo, (lo + hi) / 2, hi] {
            let q = turan_form(&fam, lambda, z, n, w).unwrap() / norm;
            prop_assert!((0.25..=2.0).contains(&q), "n = {}: {}", n, q);
        }
    }

    /// Deep in the dominant region the recessive ratio is close to the diagonal scale.
    #[test]
    fn riccati_tail_is_close_to_diagonal_scale(lambda in log_lambda(-4.0, -2.0), z in upper_z()) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let chart = asymptotics::region_chart(&fam, lambda).unwrap();
        let seed = recurrence::default_seed(&fam, lambda);
        let r = recurrence::riccati_ratios(&fam, lambda, z, seed).unwrap();
        for n in chart.n[3]..seed {
            let g = lambda * fam.f(n) / fam.a(n);
            prop_assert!((r[n] * g - 1.0).norm() <= 1.0 / 3.0, "n = {}", n);
        }
    }

    #[test]
    fn extension_param_round_trips(theta in 0.0..std::f64::consts::PI) {
        let t = ExtensionParam::from_angle(theta);
        prop_assert_eq!(ExtensionParam::parse(&t.label()), Some(t));
        let (t0, t1) = t.projective();
        prop_assert_eq!(ExtensionParam::from_projective(t0, t1), t);
    }

    #[test]
    fn airy_wronskian(x in -30.0..30.0f64) {
        let v = airy::airy_pair(x);
        let scale = (v.ai * v.bip).abs() + (v.aip * v.bi).abs();
        prop_assert!((v.wronskian() - std::f64::consts::FRAC_1_PI).abs() <= 1e-12 * scale.max(1.0));
    }

    /// `d/dx |ξ|^{3/2}` equals `(3/2) arccosh q` right of the turning point and `-(3/2) arccos q` left of it.
    #[test]
    fn langer_variable_derivative(e in -3.0..-1.0f64, s in 0.1..0.9f64) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let h = 10f64.powf(e);
        let tp = asymptotics::TurningPointChart::new(&fam, h, 1e-13).unwrap();
        let x = asymptotics::abscissae(&fam);
        for xv in [x[0] + s * (tp.x0 - x[0]), tp.x0 + s * (x[3] - tp.x0)] {
            prop_assume!((xv - tp.x0).abs() > 1e-3 * tp.x0);
            let step = 1e-5 * xv;
            let f = |y: f64| tp.xi(y).unwrap().abs().powf(1.5);
            let num = (f(xv + step) - f(xv - step)) / (2.0 * step);
            let q = asymptotics::qfun(&fam, xv, h);
            let expect = if xv > tp.x0 { 1.5 * q.acosh() } else { -1.5 * q.acos() };
            prop_assert!((num - expect).abs() < 1e-5 * expect.abs().max(1e-2), "x = {}: {} vs {}", xv, num, expect);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// `Im m > 0` in the upper half-plane, and on-circle for every real `t`.
    #[test]
    fn extension_values_are_herglotz_and_on_circle(z in upper_z(), theta in 0.0..std::f64::consts::PI) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let quad = spectral::nevanlinna_quad(&fam, z, 1e-8).unwrap();
        let circle = spectral::limit_circle(&quad, 8).unwrap();
        match spectral::extension_m(&quad, ExtensionParam::from_angle(theta)) {
            ExtensionM::Value(m) => {
                prop_assert!(m.im > 0.0);
                prop_assert!(circle.distance(m) <= 1e-6 * (1.0 + circle.radius), "{}", circle.distance(m));
            }
            ExtensionM::Pole => prop_assert!(false, "pole off the real axis"),
        }
        prop_assert!((quad.determinant() + 1.0).norm() <= quad.determinant_error_bound().max(1e-9));
    }

    /// Truncated evolution is unitary and conserves the energy.
    #[test]
    fn evolution_is_unitary_and_conserves_energy(lambda in log_lambda(-3.0, 0.0), time in 0.0..2.0f64, n in 8usize..60) {
        let fam = squeezing_family(3, 3, 0).unwrap();
        let psi = squeezing::evolve_truncated(&fam, lambda, time, n).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        let (d, e) = spectral::truncation(&fam, lambda, n);
        let energy = psi.tridiagonal_energy(&d, &e);
        prop_assert!((energy - d[0]).abs() < 1e-9 * (1.0 + d.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        let start = FockVector::basis(n, 0);
        prop_assert!((start.fidelity(&psi) - psi.coeffs[0].norm()).abs() < 1e-12);
    }

    /// The band operator decomposes into `k` blocks, block `m` a Jacobi matrix on `φ_{m + rk}`.
    #[test]
    fn band_operator_decomposes_into_blocks(k in 3u32..6, coupling in 0.01..1.0f64, n in 20usize..60) {
        let full = squeezing::assemble_full(k, k, coupling, n).unwrap();
        let blocks = squeezing::assemble_blocks(k, k, coupling, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (full.entry(i, j), blocks.entry(i, j));
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "({}, {}): {} vs {}", i, j, a, b);
                if full.entry(i, j) != 0.0 && i != j {
                    prop_assert_eq!(i.abs_diff(j), k as usize);
                }
            }
        }
    }
}
