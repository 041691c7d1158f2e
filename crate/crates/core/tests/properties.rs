use std::f64::consts::TAU;

use bishop_discs::bishop::{
    apply_a_inv, apply_lambda, verify_attachment, BishopProblem, SolveConfig, TaylorTail,
};
use bishop_discs::circle::CircleFunction;
use bishop_discs::conformal::{aux_r, map_for, riemann_map, MapOptions};
use bishop_discs::maslov::{index_report, index_via_winding, index_via_zero_count};
use bishop_discs::surface::{
    make_bishop_quadric, make_example_4_1, make_power, HermitianHomPoly, PolyZZbar, SurfaceGerm,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real trigonometric polynomial from `(k, a, b)` triples:
/// `Σ a cos kθ + b sin kθ`.
fn trig(n: usize, terms: &[(u32, f64, f64)]) -> CircleFunction {
    CircleFunction::from_real_fn(n, |t| {
        terms
            .iter()
            .map(|&(k, a, b)| a * (k as f64 * t).cos() + b * (k as f64 * t).sin())
            .sum()
    })
    .unwrap()
}

fn trig_terms(max_k: u32) -> impl Strategy<Value = Vec<(u32, f64, f64)>> {
    prop::collection::vec((0..=max_k, -1.0..1.0f64, -1.0..1.0f64), 1..8)
}

/// Hermitian homogeneous polynomial of degree `m` with coefficients in the
/// unit square: `c_{νμ} = conj(c_{μν})`, diagonal real. `boost` is added to
/// the `|z|^m` coefficient when `m` is even.
fn hermitian(m: u32, raw: &[(f64, f64)], boost: f64) -> PolyZZbar {
    let mut p = PolyZZbar::zero();
    for mu in 0..=m {
        let nu = m - mu;
        let (re, im) = raw[mu as usize];
        match mu.cmp(&nu) {
            std::cmp::Ordering::Less => {
                p.add_term(mu, nu, c(re, im));
                p.add_term(nu, mu, c(re, -im));
            }
            std::cmp::Ordering::Equal => p.add_term(mu, nu, c(re + boost, 0.0)),
            std::cmp::Ordering::Greater => {}
        }
    }
    p
}

fn hermitian_strategy() -> impl Strategy<Value = HermitianHomPoly> {
    (2u32..=6)
        .prop_flat_map(|m| {
            let raw = prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), m as usize + 1);
            (Just(m), raw, prop_oneof![Just(0.0), 1.0..3.0f64])
        })
        .prop_map(|(m, raw, boost)| {
            HermitianHomPoly::with_degree(m, hermitian(m, &raw, boost)).unwrap()
        })
        .prop_filter("isolated CR singularity", |f| {
            f.is_isolated_cr_singularity()
        })
}

/// Remainder with terms of total degree `lo..=lo+2` and coefficients in the
/// disc of radius `bound`.
fn remainder_strategy(lo: u32, bound: f64) -> impl Strategy<Value = PolyZZbar> {
    prop::collection::vec((0u32..=lo + 2, 0u32..=lo + 2, 0.0..bound, 0.0..TAU), 1..5).prop_map(
        move |raw| {
            let mut p = PolyZZbar::zero();
            for (mu, nu, rho, phi) in raw {
                if mu + nu >= lo {
                    p.add_term(mu, nu, Complex64::from_polar(rho, phi));
                }
            }
            p
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_squared_is_minus_identity_plus_mean(terms in trig_terms(40)) {
        let f = trig(256, &terms);
        let hh = f.hilbert().unwrap().hilbert().unwrap();
        let expect = f.scale_real(-1.0).add_constant(f.mean());
        prop_assert!(hh.sup_distance(&expect) < 1e-10 * f.sup_norm().max(1.0));
    }

    #[test]
    fn analytic_completion_has_no_negative_modes(terms in trig_terms(40)) {
        let f = trig(256, &terms);
        let a = f.analytic_completion().unwrap();
        let c = a.coeffs();
        prop_assert!(c.negative_energy_fraction() < 1e-12);
    }

    #[test]
    fn winding_ignores_positive_factors(k in -6i64..=6, terms in trig_terms(6), shift in 0.0..TAU) {
        let n = 512;
        let gamma = CircleFunction::from_fn(n, |t| {
            Complex64::from_polar(1.0, k as f64 * t) * (1.0 + 0.3 * (t + shift).cos())
        }).unwrap();
        let raw = trig(n, &terms);
        let pos = raw.map_real(|x| (0.8 * x).exp());
        let w0 = gamma.winding_number().unwrap();
        prop_assert_eq!(w0, k);
        prop_assert_eq!(gamma.mul(&pos).winding_number().unwrap(), w0);
    }

    #[test]
    fn winding_adds_across_factors(k1 in -5i64..=5, k2 in -5i64..=5, a in 0.0..0.5f64, b in 0.0..0.5f64) {
        let n = 512;
        let g1 = CircleFunction::from_fn(n, |t| Complex64::from_polar(1.0, k1 as f64 * t) + a).unwrap();
        let g2 = CircleFunction::from_fn(n, |t| Complex64::from_polar(1.0, k2 as f64 * t) + c(0.0, b)).unwrap();
        let w1 = g1.winding_number().unwrap();
        let w2 = g2.winding_number().unwrap();
        prop_assert_eq!(g1.mul(&g2).winding_number().unwrap(), w1 + w2);
    }

    #[test]
    fn taylor_expansion_is_exact(
        f in hermitian_strategy(),
        x in (-1.0..1.0f64, -1.0..1.0f64),
        y in (-1.0..1.0f64, -1.0..1.0f64),
    ) {
        let (x, y) = (c(x.0, x.1), c(y.0, y.1));
        let q = TaylorTail::new(&f).eval(x, y);
        let lhs = f.eval(x + y);
        let rhs = f.eval(x) + 2.0 * (f.dz().eval(x) * y).re + q.re;
        let scale = f.scale() * 3f64.powi(f.degree() as i32);
        prop_assert!((lhs - rhs).abs() < 1e-10 * scale, "{} vs {}", lhs, rhs);
        prop_assert!(q.im.abs() < 1e-10 * scale);
    }

    #[test]
    fn leading_term_is_homogeneous(f in hermitian_strategy(), t in 0.01..10.0f64, z in (-1.0..1.0f64, -1.0..1.0f64)) {
        let z = c(z.0, z.1);
        let lhs = f.eval(z * t);
        let rhs = t.powi(f.degree() as i32) * f.eval(z);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1e-300));
    }

    #[test]
    fn profile_zeros_are_simple(f in hermitian_strategy()) {
        let n = 4096;
        let p = f.angular_profile(n).unwrap();
        prop_assert!(p.imaginary_defect() == 0.0);
        let vals = p.re();
        for k in 0..n {
            let (t0, t1) = (TAU * k as f64 / n as f64, TAU * (k + 1) as f64 / n as f64);
            if vals[k].signum() != vals[(k + 1) % n].signum() {
                let (d0, d1) = (f.profile_derivative(t0), f.profile_derivative(t1));
                prop_assert!(d0.signum() == d1.signum(), "f′ changes sign in [{}, {}]", t0, t1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn three_index_formulas_agree(f in hermitian_strategy()) {
        let germ = SurfaceGerm::new(f, PolyZZbar::zero(), 1.0).unwrap();
        let rep = index_report(&germ, 0.05);
        prop_assert!(rep.is_ok(), "{:?}", rep);
        let rep = rep.unwrap();
        prop_assert!(rep.ind_winding == rep.ind_zero_count && rep.ind_zero_count == rep.ind_roots);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_survives_higher_order_remainders(
        (f, rem) in hermitian_strategy().prop_flat_map(|f| {
            let lo = f.degree() + 1;
            (Just(f), remainder_strategy(lo, 0.1))
        }),
        r in 0.001..0.01f64,
    ) {
        let bare = SurfaceGerm::new(f.clone(), PolyZZbar::zero(), 1.0).unwrap();
        let pert = SurfaceGerm::new(f, rem, 1.0).unwrap();
        prop_assert_eq!(index_via_winding(&pert, r), index_via_winding(&bare, r));
    }

    #[test]
    fn index_sign_matches_profile_sign(f in hermitian_strategy()) {
        let germ = SurfaceGerm::new(f.clone(), PolyZZbar::zero(), 1.0).unwrap();
        let idx = index_via_winding(&germ, 0.05).unwrap();
        let zc = index_via_zero_count(&f).unwrap();
        let p = f.angular_profile(4096).unwrap().re();
        let constant_sign = p.iter().all(|&v| v > 0.0) || p.iter().all(|&v| v < 0.0);
        prop_assert_eq!(idx > 0, zc.zero_count == 0);
        prop_assert_eq!(zc.zero_count == 0, constant_sign);
        if zc.zero_count == 0 {
            prop_assert_eq!(idx, 1);
        } else {
            prop_assert!(zc.zero_count >= 2 && idx <= 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rotating_the_domain_rotates_the_map(terms in trig_terms(4), shift in 0usize..256) {
        let n = 256;
        let log_rho = trig(n, &terms);
        let scale = 0.15 / log_rho.sup_norm().max(1e-12);
        let rho = log_rho.map_real(|x| (scale * x).exp());
        let rotated = CircleFunction::new((0..n).map(|k| rho.values()[(k + n - shift) % n]).collect()).unwrap();
        let a = riemann_map(&rho).unwrap();
        let b = riemann_map(&rotated).unwrap();
        let t0 = TAU * shift as f64 / n as f64;
        let expect = CircleFunction::new(
            (0..n).map(|k| Complex64::from_polar(1.0, t0) * a.g_boundary().values()[(k + n - shift) % n]).collect(),
        ).unwrap();
        prop_assert!(b.g_boundary().sup_distance(&expect) < 1e-8);
        prop_assert!((b.g_prime_at_0() - a.g_prime_at_0()).abs() < 1e-9);
        prop_assert!(b.g_prime_at_0() > 0.0);
        let g1 = b.g_boundary().mode(1);
        prop_assert!(g1.im.abs() < 1e-8 * g1.norm());
    }

    #[test]
    fn quadric_maps_are_conformal_and_on_the_curve(gamma in 0.0..0.3f64) {
        let f = HermitianHomPoly::new(bishop_discs::surface::bishop_quadric_leading(gamma)).unwrap();
        let map = map_for(&f, &MapOptions::default()).unwrap();
        prop_assert!(map.g_boundary().negative_mode_energy() < 1e-9);
        prop_assert!(map.level_residual(&f) < 1e-7);
    }

    #[test]
    fn aux_matches_annulus_quotient(gamma in 0.0..0.3f64, radii in prop::array::uniform3(0.01..0.5f64)) {
        let f = HermitianHomPoly::new(bishop_discs::surface::bishop_quadric_leading(gamma)).unwrap();
        let map = map_for(&f, &MapOptions::default()).unwrap();
        let aux = aux_r(&f, &map).unwrap();
        let kappa = map.kappa();
        let m = f.degree() as i32;
        for r in radii {
            for k in (0..map.len()).step_by(7) {
                let zeta = Complex64::from_polar(1.0, map.g_boundary().theta(k));
                let quotient = |s: f64| {
                    let z = map.g_series(zeta * s) * (kappa * r);
                    (f.eval(z) - (kappa * r).powi(m)) / (r.powi(m) * (s * s - 1.0))
                };
                let q = 0.5 * (quotient(1.0 - 1e-4) + quotient(1.0 + 1e-4));
                let expect = aux.values()[k].re;
                prop_assert!((q - expect).abs() < 1e-4 * expect.abs(), "r={} k={}: {} vs {}", r, k, q, expect);
            }
        }
    }
}

fn round_trip_germs() -> Vec<SurfaceGerm> {
    vec![
        make_power(2, PolyZZbar::zero()).unwrap(),
        make_power(4, PolyZZbar::zero()).unwrap(),
        make_bishop_quadric(0.25, PolyZZbar::zero()).unwrap(),
        make_example_4_1(0.7, 0.5, PolyZZbar::zero()).unwrap(),
    ]
}

fn problems() -> &'static [BishopProblem] {
    static CELL: std::sync::OnceLock<Vec<BishopProblem>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        round_trip_germs()
            .into_iter()
            .map(|g| BishopProblem::new(g, &MapOptions::default(), SolveConfig::default()).unwrap())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn lambda_inverts_a(terms in trig_terms(30)) {
        for (i, p) in problems().iter().enumerate() {
            let f = trig(p.map().len(), &terms);
            for r in [0.01, 0.05, 0.2] {
                let a = apply_a_inv(p.map(), p.aux(), r, p.germ().degree(), &f).unwrap();
                let back = apply_lambda(p.germ().leading(), p.map(), r, a.function());
                prop_assert!(back.sup_distance(&f) <= 1e-8 * f.sup_norm(), "r={} err={}", r, back.sup_distance(&f) / f.sup_norm());
                // Example 4.1 (last) has a crowded map whose `G̃′` leaks negative modes.
                if i < 3 {
                    let mean = a.function().coeffs().get(0).norm();
                    prop_assert!(mean <= 1e-10 * a.function().sup_norm(), "mean {}", mean);
                }
            }
        }
    }

    #[test]
    fn lambda_and_a_are_real_linear(t1 in trig_terms(20), t2 in trig_terms(20), s in -3.0..3.0f64, r in 0.01..0.2f64) {
        let p = &problems()[2];
        let n = p.map().len();
        let (f1, f2) = (trig(n, &t1), trig(n, &t2));
        let combo = f1.add(&f2.scale_real(s));
        let a = |f: &CircleFunction| p.a_inv(r, f).unwrap().into_inner();
        let lhs = a(&combo);
        let rhs = a(&f1).add(&a(&f2).scale_real(s));
        prop_assert!(lhs.sup_distance(&rhs) <= 1e-12 * lhs.sup_norm().max(rhs.sup_norm()).max(1e-300));
        let l = p.lambda(r, &lhs);
        let lr = p.lambda(r, &a(&f1)).add(&p.lambda(r, &a(&f2)).scale_real(s));
        prop_assert!(l.sup_distance(&lr) <= 1e-10 * l.sup_norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_germs_have_zero_perturbation(which in 0usize..3, r in 0.01..0.1f64) {
        let p = &problems()[which];
        let sol = p.iterate_h(r).unwrap();
        prop_assert!(sol.a.function().sup_norm() < 1e-14, "a = {}", sol.a.function().sup_norm());
        prop_assert!(sol.diagnostics.iterations <= 1);
        let disc = p.assemble_disc(r, &sol.a).unwrap();
        let g = p.g_r(r);
        prop_assert!(disc.f1_boundary.sup_distance(&g) < 1e-14);
        prop_assert!(disc.residual < 1e-12);
    }

    #[test]
    fn converged_solutions_are_certified_fixed_points(rem in remainder_strategy(3, 0.1), r in 0.005..0.05f64) {
        let germ = make_power(2, rem).unwrap();
        let cfg = SolveConfig::default();
        let p = BishopProblem::new(germ, &MapOptions::default(), cfg).unwrap();
        let (sol, disc) = p.disc(r).unwrap();
        prop_assert!(sol.diagnostics.fixed_point_residual < 2.0 * cfg.tol);
        let h = p.h_map(r, sol.a.function()).unwrap();
        prop_assert!(h.function().sup_distance(sol.a.function()) < 2.0 * cfg.tol);
        let att = verify_attachment(&disc, p.germ());
        prop_assert!(att.residual < 1e-7 || !att.certified());
        prop_assert!(sol.diagnostics.contraction_ratio < 1.0);
    }

    #[test]
    fn perturbed_families_shrink_linearly(rem in remainder_strategy(3, 0.1)) {
        let germ = make_power(2, rem).unwrap();
        let p = BishopProblem::new(germ, &MapOptions::default(), SolveConfig::default()).unwrap();
        let fam = p.disc_family(0.01, 0.1, 10).unwrap();
        prop_assert_eq!(fam.discs.len(), 10);
        let ratio: Vec<f64> = fam.discs.iter().map(|d| d.sup_norm / d.r).collect();
        let c = ratio.iter().cloned().fold(0.0, f64::max);
        for (d, q) in fam.discs.iter().zip(&ratio) {
            prop_assert!(d.sup_norm <= c * d.r * (1.0 + 1e-12));
            prop_assert!(*q > 0.5 * c, "sup_norm/r = {} at r = {}, max {}", q, d.r, c);
        }
        for rec in &fam.records {
            let s = rec.summary.as_ref().unwrap();
            prop_assert!(s.residual < 1e-7 || s.flagged);
        }
        let rates: Vec<f64> = fam.records.iter().map(|r| r.summary.as_ref().unwrap().contraction_ratio).collect();
        prop_assert!(rates.iter().all(|&q| q < 1.0));
        prop_assert!(rates.last().unwrap() >= rates.first().unwrap(), "{:?}", rates);
    }
}
