use super::*;
use crate::series_engine::{build_series, lambert_front, segment_solution};
use crate::lambertw::Branch;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn lift_of_constant_profile() {
    let c = 0.7;
    let f = lift(&Profile::segment(c, 0.0), &PressureSpec::none(), 0.3, (4, 4)).unwrap();
    let mut fact = 1.0;
    for j in 0..=4 {
        fact *= (j + 1) as f64;
        assert!(rel(f.bijet.get(0, j), c.powi(j as i32 + 1) / fact) < 1e-15);
        assert_eq!(f.bijet.get(1, j), 0.0);
    }
}

#[test]
fn lift_of_segment_and_zero() {
    let f = lift(&Profile::segment(0.5, 2.0), &PressureSpec::none(), 1.5, (5, 3)).unwrap();
    let l0 = f.bijet.layer(0);
    assert_eq!(l0.coeffs()[..3], [3.5, 2.0, 0.0]);
    let z = lift(&Profile::zero(), &PressureSpec::linear_in_x(1.0), 0.0, (6, 6)).unwrap();
    assert_eq!(z.bijet.max_abs(), 0.0);
    assert!(matches!(
        lift(&Profile::zero(), &PressureSpec::none(), 0.0, (2, 3)),
        Err(ExtraError::Order { .. })
    ));
    assert!(matches!(
        lift(&Profile::triangle(-1.0, 0.0, 1.0, 1.0), &PressureSpec::none(), 0.0, (4, 4)),
        Err(ExtraError::Model(ModelError::Kink { .. }))
    ));
}

#[test]
fn lift_round_trip() {
    let p = Profile::exponential(1.3, 0.7);
    let f = lift(&p, &PressureSpec::constant(0.4), -0.2, (10, 5)).unwrap();
    let j = profile_jet(&p, -0.2, 10).unwrap();
    let u = extract_u(&f);
    for i in 0..=10 {
        assert!(rel(u.coeff(i), j.coeff(i)) < 1e-15);
    }
}

#[test]
fn free_evolution_of_segment() {
    let (alpha, beta) = (0.4, 1.5);
    let f = lift(&Profile::segment(alpha, beta), &PressureSpec::none(), 0.2, (60, 60)).unwrap();
    assert_eq!(evolve_free(&f, 0.0).bijet, f.bijet);
    let t = 0.3;
    let u = extract_u(&evolve_free(&f, t));
    let want = segment_solution(alpha, beta, &PressureSpec::none(), 0.2, t).unwrap();
    assert!(rel(u.value(), want) < 1e-12);
    assert!(rel(u.coeff(1), beta / (1.0 - beta * t)) < 1e-12);
}

#[test]
fn const_grad_examples() {
    let k = 0.8;
    let z = lift(&Profile::zero(), &PressureSpec::constant(k), 0.0, (4, 4)).unwrap();
    assert_eq!(extract_u(&evolve_const_grad(&z, k, 0.6)).value(), k * 0.6);

    let (alpha, beta, x0, t) = (0.3, -0.7, 0.5, 0.4);
    let f = lift(&Profile::segment(alpha, beta), &PressureSpec::constant(k), x0, (60, 60)).unwrap();
    let u = extract_u(&evolve_const_grad(&f, k, t)).value();
    let want = k * t + (alpha + beta * (x0 + 0.5 * k * t * t)) / (1.0 - beta * t);
    assert!(rel(u, want) < 1e-12);

    assert_eq!(evolve_const_grad(&f, 0.0, t).bijet, evolve_free(&f, t).bijet);
}

#[test]
fn lin_grad_examples() {
    let k = 1.0;
    let t = 0.4;
    let z = lift(&Profile::zero(), &PressureSpec::linear_in_x(k), 0.7, (4, 4)).unwrap();
    let u = extract_u(&evolve_lin_grad(&z, k, t).unwrap());
    assert!(rel(u.value(), k * 0.7 * (k * t).tan()) < 1e-15);
    assert!(rel(u.coeff(1), k * (k * t).tan()) < 1e-15);

    let (alpha, beta) = (0.2, 0.9);
    for x0 in [0.0, 0.6, -1.1] {
        let f = lift(&Profile::segment(alpha, beta), &PressureSpec::linear_in_x(k), x0, (80, 80)).unwrap();
        let u = extract_u(&evolve_lin_grad(&f, k, t).unwrap()).value();
        let c = (k * t).cos();
        let want = k * x0 * (k * t).tan() + (alpha + beta * x0 / c) / (c - beta * (k * t).sin());
        assert!(rel(u, want) < 1e-12, "x0 = {x0}: {u} vs {want}");
    }
    assert!(matches!(
        evolve_lin_grad(&z, 1.0, std::f64::consts::FRAC_PI_2),
        Err(ExtraError::Pole { .. })
    ));
}

#[test]
fn lin_grad_tends_to_free_as_k_squared() {
    let f = lift(&Profile::exponential(0.5, 1.0), &PressureSpec::none(), 0.1, (12, 12)).unwrap();
    let t = 0.2;
    let free = evolve_free(&f, t).bijet;
    let diff = |k: f64| evolve_lin_grad(&f, k, t).unwrap().bijet.sub(&free).max_abs();
    let (d1, d2) = (diff(1e-2), diff(5e-3));
    assert!(d1 < 1e-4);
    assert!((d1 / d2 - 4.0).abs() < 0.05, "ratio {}", d1 / d2);
}

#[test]
fn lin_grad_exponential_matches_lambert_front() {
    let (a, l, k) = (1.0, 1.0, 0.5);
    let p = PressureSpec::linear_in_x(k);
    for (x0, t) in [(-0.5, 0.1), (0.0, 0.08), (-2.0, 0.5)] {
        let f = lift(&Profile::exponential(a, l), &p, x0, (60, 60)).unwrap();
        let u = extract_u(&evolve_lin_grad(&f, k, t).unwrap()).value();
        let want = lambert_front(a, l, &p, x0, t, Branch::Principal).unwrap();
        assert!(rel(u, want) < 1e-12, "({x0}, {t}): {u} vs {want}");
    }
}

#[test]
fn time_coefficients_match_series_engine() {
    let profiles = [Profile::segment(0.4, 1.3), Profile::exponential(1.0, 1.0), Profile::exponential(-0.6, 0.8)];
    let pressures = [PressureSpec::none(), PressureSpec::constant(0.7), PressureSpec::linear_in_x(1.2)];
    let n = 20;
    for p in &profiles {
        for g in &pressures {
            for x0 in [0.0, 0.35] {
                let f = lift(p, g, x0, (n, n)).unwrap();
                let a = time_coefficients(&f, n).unwrap();
                let b = build_series(p, g, x0, n).unwrap().time_coeffs();
                let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for (i, (x, y)) in a.iter().zip(&b).enumerate() {
                    assert!(
                        (x - y).abs() <= 1e-13 * y.abs().max(1e-3 * scale),
                        "{p:?} {g:?} x0={x0} n={i}: {x} vs {y}"
                    );
                }
            }
        }
    }
    let f = lift(&Profile::zero(), &PressureSpec::none(), 0.0, (4, 4)).unwrap();
    assert!(matches!(time_coefficients(&f, 5), Err(ExtraError::Order { .. })));
}

#[test]
fn residual_of_exact_fields() {
    let cases = [
        (Profile::exponential(1.0, 1.0), PressureSpec::none(), 0.05),
        (Profile::exponential(0.8, 1.2), PressureSpec::constant(0.6), 0.1),
        (Profile::segment(0.3, 0.9), PressureSpec::linear_in_x(1.1), 0.2),
        (Profile::exponential(0.5, 1.0), PressureSpec::linear_in_x(0.7), 0.1),
    ];
    for (p, g, t) in cases {
        let f = evolve(&lift(&p, &g, 0.3, (12, 12)).unwrap(), t).unwrap();
        let r1 = diffusion_residual(&f, &g, 4e-3).unwrap();
        let r2 = diffusion_residual(&f, &g, 2e-3).unwrap();
        assert!((r1 / r2 - 16.0).abs() < 1.0, "{g:?}: {r1} {r2}");
        assert!(diffusion_residual(&f, &g, 1e-4).unwrap() < 1e-9);
    }
}

#[test]
fn residual_of_series_backed_field() {
    let g = PressureSpec::poly_x(vec![0.2, -0.5, 0.3]);
    let f = evolve(&lift(&Profile::exponential(0.4, 1.0), &g, 0.1, (40, 20)).unwrap(), 0.05).unwrap();
    let r = diffusion_residual(&f, &g, 1e-3).unwrap();
    assert!(r < 1e-8, "{r}");
    let wrong = diffusion_residual(&f, &PressureSpec::none(), 1e-3).unwrap();
    assert!(wrong > 1e-2);
}

#[test]
fn residual_negative_controls() {
    let z = lift(&Profile::zero(), &PressureSpec::none(), 0.0, (6, 6)).unwrap();
    assert_eq!(diffusion_residual(&z, &PressureSpec::none(), 1e-3).unwrap(), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut b = BiJet::zeros(0.0, 6, 6);
    for row in b.coeffs.iter_mut() {
        for c in row.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
    }
    let s = static_field(b);
    assert!(diffusion_residual(&s, &PressureSpec::none(), 1e-3).unwrap() > 0.1);

    let free = evolve(&lift(&Profile::exponential(1.0, 1.0), &PressureSpec::none(), 0.0, (8, 8)).unwrap(), 0.2).unwrap();
    assert!(diffusion_residual(&free, &PressureSpec::linear_in_x(1.0), 1e-3).unwrap() > 0.1);
}

#[test]
fn algebra_relations_on_monomials() {
    let (nx, na) = (6, 6);
    for x0 in [0.0, 0.4] {
        for i in 0..nx {
            for j in 0..na {
                let m = BiJet::monomial(x0, nx, na, i, j);
                let ab = apply_a(&apply_b(&m)).sub(&apply_b(&apply_a(&m)));
                assert!(ab.sub(&apply_a(&m)).max_abs() < 1e-12);
                let ac = apply_a(&apply_c(&m)).sub(&apply_c(&apply_a(&m)));
                assert!(ac.max_abs() < 1e-12);
                let bc = apply_b(&apply_c(&m)).sub(&apply_c(&apply_b(&m)));
                assert!(bc.max_abs() < 1e-12);
            }
        }
    }
}

#[test]
fn lin_grad_kernel_factorization() {
    let (k, t, n) = (0.9f64, 0.5f64, 7);
    let s = 1.0 / (k * t).cos();
    let tau = (2.0 * k * t).sin() / (2.0 * k);
    let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
    for i in 0..=n {
        for j in 0..=n {
            let m = BiJet::monomial(0.0, n, n, i, j);
            let mut f = static_field(m);
            f.kernel = KernelSpec::LinGrad { k };
            let got = evolve_lin_grad(&f, k, t).unwrap().bijet;
            let mut want = BiJet::zeros(0.0, n, n);
            for q in 0..=i.min(j) {
                want.coeffs[i - q][j - q] = s.powi((i + j + 1) as i32) * tau.powi(q as i32) / fact(q)
                    * fact(i) / fact(i - q)
                    * fact(j) / fact(j - q);
            }
            assert!(got.sub(&want).max_abs() <= 1e-13 * want.max_abs());
            let lit = apply_factors(&BiJet::monomial(0.0, n, n, i, j), KernelSpec::LinGrad { k }.factors(t).unwrap());
            assert!(lit.sub(&want).max_abs() <= 1e-13 * want.max_abs());
        }
    }
}

#[test]
fn family_g_of_da_times_dx() {
    let p = Profile::exponential(0.6, 1.0);
    let (x0, nx, na) = (0.2, 10, 8);
    let f = lift(&p, &PressureSpec::none(), x0, (nx, na)).unwrap();
    let g = vec![0.5, -1.0, 0.25];
    let fam = solution_family(&f, &[Generator::PolyA { coeffs: g.clone() }, Generator::X]).unwrap();
    // G(u)·u_x·e^{au}, layer j = G(u)·u_x·u^j/j!
    let u = profile_jet(&p, x0, nx).unwrap();
    let gu = &(&Jet::constant(x0, g[0], nx) + &u.scale(g[1])) + &(&u * &u).scale(g[2]);
    let base = &gu * &u.derivative();
    let mut pow = Jet::constant(x0, 1.0, nx);
    let mut fact = 1.0;
    for j in 0..na - 2 {
        if j > 0 {
            pow = &pow * &u;
            fact *= j as f64;
        }
        let want = (&base * &pow).scale(1.0 / fact);
        for i in 0..nx - 1 {
            assert!((fam.bijet.get(i, j) - want.coeff(i)).abs() < 1e-12, "({i},{j})");
        }
    }
}

#[test]
fn family_members_stay_solutions() {
    let p = Profile::exponential(0.3, 1.0);
    let none = PressureSpec::none();
    let f = evolve(&lift(&p, &none, 0.1, (12, 12)).unwrap(), 0.2).unwrap();
    let boosted = solution_family(&f, &[Generator::Boost]).unwrap();
    assert!(diffusion_residual(&boosted, &none, 2.5e-4).unwrap() < 1e-10);
    let dt = solution_family(&f, &[Generator::T, Generator::X]).unwrap();
    assert!(diffusion_residual(&dt, &none, 2.5e-4).unwrap() < 1e-10);

    let lin = PressureSpec::linear_in_x(0.8);
    let f = evolve(&lift(&p, &lin, 0.1, (12, 12)).unwrap(), 0.2).unwrap();
    for word in [vec![Generator::Boost], vec![Generator::T], vec![Generator::T, Generator::Boost]] {
        let fam = solution_family(&f, &word).unwrap();
        let r = diffusion_residual(&fam, &lin, 2.5e-4).unwrap();
        assert!(r < 1e-10, "{word:?}: {r}");
    }
    assert_eq!(solution_family(&f, &[Generator::X]), Err(ExtraError::NotCommuting("d/dx")));

    let poly = PressureSpec::poly_x(vec![0.0, 0.0, 1.0]);
    let f = lift(&p, &poly, 0.0, (8, 4)).unwrap();
    assert!(matches!(solution_family(&f, &[Generator::X]), Err(ExtraError::NotCommuting(_))));
}

#[test]
fn covariance_examples() {
    let k = 0.7;
    let sim = covariance_const(&SolutionHandle::Similarity, k).unwrap();
    let pts: Vec<(f64, f64)> = (0..10)
        .flat_map(|i| (0..10).map(move |j| (-1.0 + 0.2 * i as f64, 0.1 + 0.1 * j as f64)))
        .collect();
    for &(x, t) in &pts {
        let want = k * t - (x + 0.5 * k * t * t) / t;
        assert!(rel(sim.eval(x, t).unwrap(), want) < 1e-14);
    }
    assert!(pde_residual(&sim, &pts) < 1e-8);

    let id = covariance_const(&SolutionHandle::Similarity, 0.0).unwrap();
    assert_eq!(id.eval(0.3, 0.4), SolutionHandle::Similarity.eval(0.3, 0.4));

    let seg = SolutionHandle::Segment { alpha: 0.2, beta: 0.8 };
    let near: Vec<(f64, f64)> = pts.iter().map(|&(x, t)| (x, 0.5 * t)).collect();
    for (map, g) in [
        (covariance_const(&seg, k).unwrap(), PressureSpec::constant(k)),
        (covariance_linear(&seg, k).unwrap(), PressureSpec::linear_in_x(k)),
    ] {
        for &(x, t) in &near {
            let want = segment_solution(0.2, 0.8, &g, x, t).unwrap();
            assert!(rel(map.eval(x, t).unwrap(), want) < 1e-13);
        }
        assert!(pde_residual(&map, &near) < 1e-8);
    }

    let zero = covariance_linear(&SolutionHandle::Zero, k).unwrap();
    assert!(rel(zero.eval(0.5, 0.3).unwrap(), k * 0.5 * (k * 0.3f64).tan()) < 1e-15);

    let front = SolutionHandle::LambertFront { a: 1.0, l: 1.0 };
    let lf = covariance_linear(&front, k).unwrap();
    let g = PressureSpec::linear_in_x(k);
    for (x, t) in [(-1.0, 0.2), (-0.3, 0.1), (-2.0, 0.6)] {
        let want = lambert_front(1.0, 1.0, &g, x, t, Branch::Principal).unwrap();
        assert!(rel(lf.eval(x, t).unwrap(), want) < 1e-13);
    }
    let far: Vec<(f64, f64)> = pts.iter().map(|&(x, t)| (x - 2.0, 0.6 * t)).collect();
    assert!(pde_residual(&lf, &far) < 1e-8);

    let bad = SolutionHandle::Segment { alpha: 0.0, beta: 0.0 };
    assert!(covariance_const(&bad, k).is_ok());
    let not_a_solution = covariance_const(&seg, k).unwrap();
    assert!(matches!(covariance_linear(&not_a_solution, k), Err(ExtraError::Residual { .. })));
}

#[test]
fn covariance_limits() {
    let front = SolutionHandle::LambertFront { a: 1.0, l: 1.0 };
    let (x, t) = (-0.5, 0.2);
    let base = front.eval(x, t).unwrap();
    let lin = |k: f64| (covariance_linear(&front, k).unwrap().eval(x, t).unwrap() - base).abs();
    let cst = |k: f64| (covariance_const(&front, k).unwrap().eval(x, t).unwrap() - base).abs();
    assert!(lin(1e-6) < 1e-5);
    assert!((lin(1e-2) / lin(5e-3) - 4.0).abs() < 0.05);
    assert!((cst(1e-2) / cst(5e-3) - 2.0).abs() < 0.05);
}

#[test]
fn v_factor_pairs() {
    let k = 1.3;
    let pts: Vec<(f64, f64)> = (0..8)
        .flat_map(|i| (1..8).map(move |j| (-1.0 + 0.3 * i as f64, 0.15 * j as f64)))
        .collect();
    let pairs = [
        (ClosedForm::KxTan { k }, ClosedForm::NegSec { k }),
        (ClosedForm::NegKxCot { k }, ClosedForm::Csc { k }),
    ];
    for (u, v) in pairs {
        assert!(verify_v_factor(&u, &v, &pts).unwrap() < 1e-12);
        assert!(v_factor_residual_fd(&u, &v, &pts).unwrap() < 1e-10);
    }
    let u = ClosedForm::Linear { alpha: 0.0, beta: 1.0 };
    assert!(verify_v_factor(&u, &ClosedForm::Constant { c: 1.0 }, &pts).unwrap() > 0.5);
    let pole = [(0.0, std::f64::consts::FRAC_PI_2 / k)];
    assert!(matches!(
        verify_v_factor(&ClosedForm::KxTan { k }, &ClosedForm::NegSec { k }, &pole),
        Err(ExtraError::PoleOnGrid { .. })
    ));
}

#[test]
fn random_segment_points_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in [PressureSpec::none(), PressureSpec::constant(0.5), PressureSpec::linear_in_x(0.9)] {
        for _ in 0..10 {
            let (alpha, beta) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0));
            let x = rng.gen_range(-1.0..1.0);
            let tb = match g.variant {
                Forcing::LinearInX { k } => (k / beta).atan() / k,
                _ => 1.0 / beta,
            };
            let t = rng.gen_range(0.0..0.5 * tb);
            let u = solve_point(&Profile::segment(alpha, beta), &g, x, t, 80).unwrap();
            let want = segment_solution(alpha, beta, &g, x, t).unwrap();
            assert!((u - want).abs() < 1e-10 * want.abs().max(1.0), "{g:?}: {u} vs {want}");
        }
    }
}

#[test]
fn field_json_round_trip() {
    let f = evolve(&lift(&Profile::exponential(1.0, 1.0), &PressureSpec::linear_in_x(0.5), 0.0, (4, 3)).unwrap(), 0.1).unwrap();
    let s = serde_json::to_string(&f).unwrap();
    let back: DoubledField = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f);
}



