use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn lam(v: &[f64]) -> Lambda<f64> {
    Lambda::new(v.to_vec())
}

fn all_kinds(n: usize) -> Vec<SymmetricFunction> {
    let mut out = vec![SymmetricFunction::sigma1(n), SymmetricFunction::monge_ampere(n)];
    for k in 2..=n {
        out.push(SymmetricFunction::new(Kind::SigmaRoot { k }, n).unwrap());
    }
    for l in 1..=n {
        for k in 0..l {
            out.push(SymmetricFunction::new(Kind::Quotient { k, l }, n).unwrap());
        }
    }
    out
}

#[test]
fn kind_names_roundtrip() {
    for s in ["sigma1", "sigmaK:3", "ma", "quotient:1:3"] {
        assert_eq!(s.parse::<Kind>().unwrap().to_string(), s);
    }
    assert_eq!("sigmaK:1".parse::<Kind>().unwrap(), Kind::SigmaRoot { k: 1 });
    assert!("sigma".parse::<Kind>().is_err());
    assert!("quotient:3:2".parse::<Kind>().is_ok());
    assert!(SymmetricFunction::new(Kind::Quotient { k: 3, l: 2 }, 4).is_err());
    assert!(SymmetricFunction::new(Kind::SigmaRoot { k: 4 }, 3).is_err());
}

#[test]
fn elementary_symmetric_small() {
    let e = elementary_symmetric(&[1.0, 2.0, 3.0], 3);
    assert_eq!(e, vec![1.0, 6.0, 11.0, 6.0]);
    let ex = elementary_symmetric_excluding(&[1.0, 2.0, 3.0], 1, 2);
    assert_eq!(ex, vec![1.0, 4.0, 3.0]);
}

#[test]
fn membership_examples() {
    assert!(SymmetricFunction::sigma1(3).in_cone(&lam(&[3.0, -1.0, -1.0])));
    assert!(!SymmetricFunction::monge_ampere(2).in_cone(&lam(&[1.0, -0.5])));
    let s2 = SymmetricFunction::new(Kind::SigmaRoot { k: 2 }, 3).unwrap();
    // sigma_2(2, 2, -1) = 4 - 2 - 2 = 0: on the boundary
    assert!(!s2.in_cone(&lam(&[2.0, 2.0, -1.0])));
    assert!(s2.in_cone(&lam(&[2.0, 2.0, -0.9])));
    assert!(!s2.in_cone(&lam(&[1.0, 1.0])));
}

#[test]
fn eval_and_grad_examples() {
    let s1 = SymmetricFunction::sigma1(3);
    let (f, g) = s1.eval_with_grad(&lam(&[0.5, 2.0, -1.0])).unwrap();
    assert_relative_eq!(f, 1.5);
    assert_eq!(g.values(), &[1.0, 1.0, 1.0]);

    let ma = SymmetricFunction::monge_ampere(2);
    let (f, g) = ma.eval_with_grad(&lam(&[1.0, 4.0])).unwrap();
    assert_relative_eq!(f, 2.0, epsilon = 1e-15);
    assert_relative_eq!(g.values()[0], 1.0, epsilon = 1e-15);
    assert_relative_eq!(g.values()[1], 0.25, epsilon = 1e-15);

    assert_eq!(ma.eval(&lam(&[1.0, -4.0])), Err(ConeError::OutsideCone));
    assert!(matches!(ma.eval(&lam(&[1.0])), Err(ConeError::DimensionMismatch { .. })));
}

#[test]
fn quotient_matches_definition() {
    let q = SymmetricFunction::new(Kind::Quotient { k: 1, l: 3 }, 3).unwrap();
    let l = lam(&[1.0, 2.0, 3.0]);
    assert_relative_eq!(q.eval(&l).unwrap(), (6.0f64 / 6.0).sqrt(), epsilon = 1e-15);
    let q02 = SymmetricFunction::new(Kind::Quotient { k: 0, l: 2 }, 3).unwrap();
    let s2 = SymmetricFunction::new(Kind::SigmaRoot { k: 2 }, 3).unwrap();
    assert_relative_eq!(q02.eval(&l).unwrap(), s2.eval(&l).unwrap(), epsilon = 1e-15);
}

#[test]
fn homogeneity_degree_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fun in all_kinds(4) {
        for _ in 0..20 {
            let l = sample_cone_point(&fun, &mut rng);
            assert_relative_eq!(fun.eval(&l.scaled(2.0)).unwrap(), 2.0 * fun.eval(&l).unwrap(), max_relative = 1e-13);
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for fun in all_kinds(4) {
        for _ in 0..25 {
            let l = sample_cone_point(&fun, &mut rng);
            let g = fun.grad(&l).unwrap();
            let h = 1e-6;
            for i in 0..4 {
                let mut p = l.values().to_vec();
                let mut m = l.values().to_vec();
                p[i] += h;
                m[i] -= h;
                let fd = (fun.eval(&lam(&p)).unwrap() - fun.eval(&lam(&m)).unwrap()) / (2.0 * h);
                let gi = g.values()[i];
                assert!(gi > 0.0, "{} gradient not positive", fun.kind());
                assert!((fd - gi).abs() <= 1e-5 * gi.abs().max(1e-3), "{} fd {fd} vs {gi}", fun.kind());
            }
        }
    }
}

#[test]
fn concavity_examples() {
    let s1 = SymmetricFunction::sigma1(2);
    let c = check_concavity(&s1, &lam(&[1.0, 2.0]), &lam(&[-0.5, 4.0])).unwrap();
    assert!(c.midpoint_gap.abs() < 1e-15 && c.tangent_gap.abs() < 1e-15);

    let ma = SymmetricFunction::monge_ampere(2);
    let c = check_concavity(&ma, &lam(&[1.0, 1.0]), &lam(&[4.0, 4.0])).unwrap();
    assert!(c.midpoint_gap.abs() < 1e-14);
    assert!(c.holds());

    let c = check_concavity(&ma, &lam(&[1.0, 4.0]), &lam(&[4.0, 1.0])).unwrap();
    assert_relative_eq!(c.midpoint_gap, 0.5, epsilon = 1e-14);
    assert!(c.holds());
    assert_eq!(
        check_concavity(&ma, &lam(&[1.0, 4.0]), &lam(&[-4.0, 1.0])),
        Err(ConeError::OutsideCone)
    );
}

#[test]
fn euler_examples() {
    assert_relative_eq!(euler_positivity(&SymmetricFunction::sigma1(3), &lam(&[1.0, 2.0, 3.0])).unwrap(), 6.0);
    assert_relative_eq!(
        euler_positivity(&SymmetricFunction::monge_ampere(2), &lam(&[1.0, 4.0])).unwrap(),
        2.0,
        epsilon = 1e-15
    );
    for fun in all_kinds(3) {
        let t = 1.7;
        let v = euler_positivity(&fun, &Lambda::constant(3, t)).unwrap();
        assert_relative_eq!(v, t * fun.eval(&Lambda::constant(3, 1.0)).unwrap(), max_relative = 1e-13);
        assert!(v > 0.0);
    }
}

#[test]
fn ray_examples() {
    let t = ray_intersect(&SymmetricFunction::sigma1(3), &lam(&[1.0, 1.0, 1.0]), 3.0).unwrap();
    assert_relative_eq!(t, 1.0, epsilon = 1e-12);
    let ma = SymmetricFunction::monge_ampere(2);
    let l = lam(&[1.0, 4.0]);
    let t = ray_intersect(&ma, &l, 4.0).unwrap();
    assert_relative_eq!(t, 2.0, epsilon = 1e-12);
    let t2 = ray_intersect(&ma, &l.scaled(2.0), 4.0).unwrap();
    assert_relative_eq!(t2, t / 2.0, epsilon = 1e-12);
    assert!(matches!(ray_intersect(&ma, &l, 0.0), Err(ConeError::LevelOutOfRange { .. })));
    assert!(matches!(ray_intersect(&ma, &l, -1.0), Err(ConeError::LevelOutOfRange { .. })));
    assert_eq!(ray_intersect(&ma, &lam(&[-1.0, 4.0]), 1.0), Err(ConeError::OutsideCone));
}

#[test]
fn ray_hits_extreme_levels() {
    let q = SymmetricFunction::new(Kind::Quotient { k: 1, l: 2 }, 3).unwrap();
    let l = lam(&[0.3, 1.0, 2.0]);
    for sigma in [1e-6, 1e-2, 1.0, 1e3, 1e7] {
        let t = ray_intersect(&q, &l, sigma).unwrap();
        assert!((q.eval(&l.scaled(t)).unwrap() - sigma).abs() <= 1e-10 * (1.0 + sigma));
    }
}

#[test]
fn fi_sum_bound_examples() {
    let s1 = SymmetricFunction::sigma1(3);
    let p = LevelSetPoint::on_ray(&s1, &lam(&[1.0, 2.0, 0.5]), 2.0).unwrap();
    for t in [0.5, 1.0, 3.0] {
        let slack = fi_sum_bound_slack(&s1, &p, t).unwrap();
        // 3 > 3 - sigma / t
        assert_relative_eq!(slack, 2.0 / t, epsilon = 1e-12);
    }

    let ma = SymmetricFunction::monge_ampere(2);
    let p = LevelSetPoint::on_ray(&ma, &lam(&[1.0, 4.0]), 2.0).unwrap();
    assert_relative_eq!(fi_sum_bound_slack(&ma, &p, 1.0).unwrap(), 1.25 + 1.0, epsilon = 1e-10);
    assert!(check_fi_sum_bound(&ma, &p, 1.0).unwrap());

    // On the diagonal at the point's own scale the right side vanishes.
    for fun in all_kinds(3) {
        let sigma = 1.5;
        let p = LevelSetPoint::on_ray(&fun, &Lambda::constant(3, 1.0), sigma).unwrap();
        let c = p.lambda.values()[0];
        let lhs = fun.grad(&p.lambda).unwrap().sum();
        assert_relative_eq!(lhs * c, sigma, max_relative = 1e-9);
        assert_relative_eq!(fi_sum_bound_slack(&fun, &p, c).unwrap(), lhs, max_relative = 1e-9);
    }
}

#[test]
fn fi_sum_bound_rejects_bad_inputs() {
    let ma = SymmetricFunction::monge_ampere(2);
    let p = LevelSetPoint::on_ray(&ma, &lam(&[1.0, 4.0]), 2.0).unwrap();
    assert!(fi_sum_bound_slack(&ma, &p, 0.0).is_err());
    let mut bad = p.clone();
    bad.sigma = 3.0;
    assert!(matches!(fi_sum_bound_slack(&ma, &bad, 1.0), Err(ConeError::InvalidPoint(_))));
}

#[test]
fn gap_identical_normals_is_near() {
    let s1 = SymmetricFunction::sigma1(3);
    let r = lam(&[1.0, 2.0, 3.0]);
    let beta = SubsolutionGapSpec::max_beta(&s1, &r).unwrap();
    assert_relative_eq!(beta, 0.5 / 3f64.sqrt(), epsilon = 1e-15);
    let spec = SubsolutionGapSpec { beta, epsilon: 0.1 };
    let out = subsolution_gap(&s1, &r, &r, &spec).unwrap();
    assert_eq!(out.branch, GapBranch::NormalNear);
    assert!(out.holds());
    // sigma_1 normals never move
    let out = subsolution_gap(&s1, &r, &lam(&[-5.0, 9.0, 0.1]), &spec).unwrap();
    assert_eq!(out.branch, GapBranch::NormalNear);
    assert!(out.residual >= 0.0);
}

#[test]
fn gap_far_branch_matches_grid_search() {
    let ma = SymmetricFunction::monge_ampere(2);
    let reference = lam(&[1.0, 1.0]);
    let lambda = lam(&[3.0, 1.0 / 3.0]);
    assert_relative_eq!(ma.eval(&lambda).unwrap(), 1.0, epsilon = 1e-15);
    let beta = SubsolutionGapSpec::max_beta(&ma, &reference).unwrap();
    let spec = SubsolutionGapSpec { beta, epsilon: 0.01 };
    let out = subsolution_gap(&ma, &reference, &lambda, &spec).unwrap();
    assert_eq!(out.branch, GapBranch::NormalFar);

    // Brute force: evaluate both sides over a fine grid of eps'.
    let g = [1.0 / 6.0, 1.5];
    let lhs = g[0] * (1.0 - 3.0) + g[1] * (1.0 - 1.0 / 3.0);
    let mut best = 0.0;
    for i in 0..=100_000 {
        let eps = i as f64 * 1e-5;
        if lhs >= 1.0 - 1.0 + eps * (1.0 + g[0] + g[1]) {
            best = eps;
        }
    }
    assert!((out.residual - best).abs() <= 1e-5);
    assert_relative_eq!(out.residual, 0.25, epsilon = 1e-12);
    assert!(out.holds());
}

#[test]
fn gap_rejects_large_beta() {
    let ma = SymmetricFunction::monge_ampere(2);
    let spec = SubsolutionGapSpec { beta: 0.5, epsilon: 0.1 };
    assert!(matches!(
        subsolution_gap(&ma, &lam(&[1.0, 1.0]), &lam(&[1.0, 2.0]), &spec),
        Err(ConeError::BetaTooLarge { .. })
    ));
}

#[test]
fn delta_examples() {
    let ma = SymmetricFunction::monge_ampere(2);
    assert_eq!(delta_nondegeneracy(&ma, &[1.0, 1.0]), 1.0);
    assert_eq!(delta_nondegeneracy(&ma, &[0.5, 2.0, 0.1]), 0.1);
    assert_eq!(delta_nondegeneracy(&ma, &[0.0; 4]), 0.0);
}

#[test]
fn kappa_examples() {
    assert_relative_eq!(kappa_lower_bound(&SymmetricFunction::sigma1(3), 3.0).unwrap(), 1.5, epsilon = 1e-10);
    let ma = SymmetricFunction::monge_ampere(2);
    assert_relative_eq!(kappa_lower_bound(&ma, 1.0).unwrap(), 0.5, epsilon = 1e-10);
    // degree one: c0 = sup_psi / f(1), so kappa = f(1) / (1 + c0); the
    // additive one in 1 + c0 keeps kappa from scaling with sup_psi
    let q = SymmetricFunction::new(Kind::Quotient { k: 1, l: 3 }, 3).unwrap();
    for fun in [ma, SymmetricFunction::sigma1(4), q] {
        let f1 = fun.eval(&Lambda::constant(fun.dim(), 1.0)).unwrap();
        for sup_psi in [0.3, 1.3, 2.6, 40.0] {
            let expected = f1 / (1.0 + sup_psi / f1);
            assert_relative_eq!(kappa_lower_bound(&fun, sup_psi).unwrap(), expected, max_relative = 1e-10);
        }
    }
    let k1 = kappa_lower_bound(&ma, 1.3).unwrap();
    let k2 = kappa_lower_bound(&ma, 2.6).unwrap();
    assert!(k2 < k1 && k2 > 0.0);
    assert!(kappa_lower_bound(&ma, 0.0).is_err());
}

#[test]
fn level_set_csv_roundtrip() {
    let ma = SymmetricFunction::monge_ampere(2);
    let p = LevelSetPoint::on_ray(&ma, &lam(&[1.0, 4.0]), 3.0).unwrap();
    let text = format!("{}\n{}\n", level_set_csv_header(2), level_set_csv_row(&p));
    assert!(text.starts_with("lambda_1,lambda_2,sigma\n"));
    let back = parse_level_set_csv(&text).unwrap();
    assert_eq!(back.len(), 1);
    assert_relative_eq!(back[0].1, 3.0);
    assert_relative_eq!(back[0].0.values()[1], p.lambda.values()[1], max_relative = 1e-14);
}

#[test]
fn single_precision_eval() {
    let ma = SymmetricFunction::monge_ampere(2);
    let (f, g) = ma.eval_with_grad(&Lambda::new(vec![1.0f32, 4.0])).unwrap();
    assert!((f - 2.0).abs() < 1e-6 && (g.values()[1] - 0.25).abs() < 1e-6);
}
