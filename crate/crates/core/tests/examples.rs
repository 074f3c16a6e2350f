//! Worked examples through the public API, one block per module.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use ruin_core::andersen::{psi0_andersen, spitzer_estimate};
use ruin_core::classical::{epsilon_sweep_classical, pk_psi0};
use ruin_core::discrete::{
    alpha_coefficients, dp_finite_horizon, find_unit_disk_roots, pgf_solution, seasonal_recurrence_step,
    solve_numerator, survival_pgf_coefficients, survival_recursion, weak_to_strict,
};
use ruin_core::dist::{
    choose_site, integrated_tail_cdf, perturb_continuous, perturb_discrete, truncation_bound, ClaimLaw, ContinuousClaim,
};
use ruin_core::mc::{simulate_coupled, simulate_ruin, DiscreteCoupling, DiscreteSampler, McConfig};
use ruin_core::{
    AndersenModel, ClassicalModel, Convention, Exact, ExactPmf, Pmf, RuinError, Seasonal, SurvivalTable,
};

fn q(n: i64, d: i64) -> Exact {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

fn pmf(pairs: &[(usize, f64)]) -> Pmf {
    Pmf::from_pairs(pairs.iter().copied()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn pmf_basics() {
    assert_eq!(pmf(&[(0, 0.5), (2, 0.5)]).mean(), 1.0);
    assert_eq!(pmf(&[(1, 1.0)]).mean(), 1.0);
    assert!(close(pmf(&[(0, 0.55), (2, 0.45)]).mean(), 0.9, 1e-15));
    let p = pmf(&[(0, 0.5), (2, 0.5)]);
    assert!(close(p.pgf(Complex64::new(1.0, 0.0)).unwrap().re, 1.0, 1e-15));
    assert!(close(p.pgf(Complex64::new(0.0, 0.0)).unwrap().re, 0.5, 1e-15));
    assert!(close(p.pgf(Complex64::new(-1.0, 0.0)).unwrap().re, 1.0, 1e-15));
    assert_eq!(Pmf::point(0).convolve(&p), p);
    assert_eq!(p.convolve(&p), pmf(&[(0, 0.25), (2, 0.5), (4, 0.25)]));
}

#[test]
fn discrete_perturbation() {
    let p = ExactPmf::from_pairs([(0, q(1, 2)), (2, q(1, 2))]).unwrap();
    let c = perturb_discrete(&p, 2, 0, q(1, 10)).unwrap();
    assert_eq!(c.joint().get(&(0, 0)), Some(&q(1, 2)));
    assert_eq!(c.joint().get(&(2, 2)), Some(&q(9, 20)));
    assert_eq!(c.joint().get(&(0, 2)), Some(&q(1, 20)));
    let star = c.starred_marginal();
    assert_eq!(star, ExactPmf::from_pairs([(0, q(11, 20)), (2, q(9, 20))]).unwrap());
    assert_eq!(star.mean(), q(9, 10));
    assert!(matches!(perturb_discrete(&p, 2, 0, q(1, 1)), Err(RuinError::InvalidPerturbation(_))));
    assert!(matches!(perturb_discrete(&p, 1, 0, q(1, 100)), Err(RuinError::EmptySite(1))));

    // {0: h0, 1: h1, 3: h3} with eps = 3 h3 / 2 moves half of h3 to 0
    let r = ExactPmf::from_pairs([(0, q(1, 4)), (1, q(1, 4)), (3, q(1, 2))]).unwrap();
    let star = perturb_discrete(&r, 3, 0, q(3, 4)).unwrap().starred_marginal();
    assert_eq!(star, ExactPmf::from_pairs([(0, q(1, 2)), (1, q(1, 4)), (3, q(1, 4))]).unwrap());

    assert_eq!(choose_site(&pmf(&[(0, 0.5), (2, 0.5)]), 1).unwrap(), (2, 0));
    assert!(matches!(choose_site(&pmf(&[(1, 1.0)]), 1), Err(RuinError::DegenerateModel(_))));
    assert_eq!(choose_site(&pmf(&[(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]), 2).unwrap(), (2, 0));
}

#[test]
fn continuous_perturbation_and_tail() {
    let e = ContinuousClaim::exponential(1.0).unwrap();
    let p = perturb_continuous(&e, 2f64.ln(), 0.2).unwrap();
    assert!(close(p.mean(), 0.9, 1e-12));
    let tiny = perturb_continuous(&e, 2f64.ln(), 1e-9).unwrap();
    assert!(close(tiny.mean(), 1.0, 1e-8));
    let law = ClaimLaw::Plain(e);
    assert_eq!(integrated_tail_cdf(&law, 0.0, 1e-3).unwrap(), 0.0);
    assert!(close(integrated_tail_cdf(&law, 1.0, 1e-3).unwrap(), 1.0 - (-1.0f64).exp(), 1e-6));
    assert!(close(integrated_tail_cdf(&law, 60.0, 1e-2).unwrap(), 1.0, 1e-6));
}

#[test]
fn truncation_bound_examples() {
    // expected number of Exp(1) renewals in [0, 1] is 1
    let b = truncation_bound(1.0, 1.0, 0.5).unwrap();
    assert!(close(b.bound, std::f64::consts::E, 1e-12));
    assert!(b.bound >= 1.0);
    assert_eq!(truncation_bound(0.0, 2.0, 0.5).unwrap().bound, 1.0);
    assert!(truncation_bound(1.0, 1.0, 1.0 - 1e-12).unwrap().bound > 1e11);
}

#[test]
fn recursion_and_alpha() {
    let p = ExactPmf::from_pairs([(0, q(11, 20)), (2, q(9, 20))]).unwrap();
    assert_eq!(survival_recursion(&p, q(2, 11), 1).unwrap().phi[1], q(40, 121));
    assert!(survival_recursion(&p, q(0, 1), 20).unwrap().phi.iter().all(|x| *x == q(0, 1)));
    let neutral = ExactPmf::from_pairs([(0, q(1, 2)), (2, q(1, 2))]).unwrap();
    assert!(survival_recursion(&neutral, q(0, 1), 20).unwrap().phi.iter().all(|x| *x == q(0, 1)));
    let alpha = alpha_coefficients(&p, 1).unwrap();
    assert_eq!(alpha, vec![q(1, 1), q(20, 11)]);
    assert!(matches!(
        survival_recursion(&pmf(&[(1, 0.5), (2, 0.5)]), 0.5, 3),
        Err(RuinError::NeedsShift)
    ));
}

#[test]
fn generating_function_and_roots() {
    let p = ExactPmf::from_pairs([(0, q(11, 20)), (2, q(9, 20))]).unwrap();
    let t = survival_pgf_coefficients(&p, 1, 1).unwrap();
    assert_eq!(t.phi, vec![q(2, 11), q(40, 121)]);
    let neutral = pmf(&[(0, 0.5), (2, 0.5)]);
    assert!(matches!(survival_pgf_coefficients(&neutral, 1, 3), Err(RuinError::NpcViolation(_))));

    let sub = Seasonal::homogeneous(1, pmf(&[(0, 0.55), (2, 0.45)])).unwrap();
    let roots = find_unit_disk_roots(&sub).unwrap();
    assert_eq!(roots.count(), 1);
    assert!(close(roots.roots[0].re, 1.0, 1e-10));
    for p in [pmf(&[(0, 0.5), (2, 0.5)]), pmf(&[(0, 0.25), (1, 0.5), (2, 0.25)])] {
        let r = find_unit_disk_roots(&Seasonal::homogeneous(1, p).unwrap()).unwrap();
        assert!(r.unit_multiplicity >= 2);
    }
    assert_eq!(solve_numerator(&sub, &roots).unwrap().len(), 1);
    assert!(close(solve_numerator(&sub, &roots).unwrap()[0], 0.1, 1e-12));

    // zero claims with c = 2: P(s) = 1 + s and phi = 1
    let zero = Seasonal::homogeneous(2, Pmf::point(0)).unwrap();
    let r = find_unit_disk_roots(&zero).unwrap();
    let num = solve_numerator(&zero, &r).unwrap();
    assert!(close(num[0], 1.0, 1e-10) && close(num[1], 1.0, 1e-10));
    let sol = pgf_solution(&Pmf::point(0), 2, 10).unwrap();
    assert!(sol.table.phi.iter().all(|&x| close(x, 1.0, 1e-12)));
}

#[test]
fn conventions_differ_by_one_unit() {
    let p = pmf(&[(0, 0.55), (2, 0.45)]);
    let model = Seasonal::homogeneous(1, p.clone()).unwrap();
    let weak = survival_pgf_coefficients(&p, 1, 20).unwrap();
    let strict = weak_to_strict(&model, &weak).unwrap();
    // phi_strict(0) = 1 - E X with unit premium
    assert!(close(strict.phi[0], 0.1, 1e-14));
    for u in 1..=20 {
        assert_eq!(strict.phi[u], weak.phi[u - 1]);
    }
}

#[test]
fn seasonal_relation_neutral_zeros() {
    let model = Seasonal::new(1, vec![pmf(&[(0, 0.5), (2, 0.5)]), pmf(&[(0, 0.5), (2, 0.5)])]).unwrap();
    let t: SurvivalTable<f64> = seasonal_recurrence_step(&model, &[0.0, 0.0], 30).unwrap();
    assert!(t.phi.iter().all(|&x| x == 0.0));
}

#[test]
fn dp_examples() {
    let model = Seasonal::homogeneous(1, pmf(&[(0, 0.5), (2, 0.5)])).unwrap();
    let t = dp_finite_horizon(&model, 0, 2, Convention::Weak, 1 << 20).unwrap();
    assert_eq!(t.psi, vec![0.5, 0.5]);
    let sub = Seasonal::homogeneous(1, pmf(&[(0, 0.55), (2, 0.45)])).unwrap();
    let weak = survival_pgf_coefficients(&pmf(&[(0, 0.55), (2, 0.45)]), 1, 3).unwrap();
    for u in 0..=3 {
        let t = dp_finite_horizon(&sub, u, 10_000, Convention::Weak, 1 << 22).unwrap();
        assert!(close(t.last(), 1.0 - weak.phi[u], 1e-3));
    }
    match dp_finite_horizon(&model, 0, 100, Convention::Weak, 50) {
        Err(RuinError::StateBudgetExceeded { achieved, requested, .. }) => {
            assert_eq!(requested, 100);
            assert!(achieved < 100);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn classical_examples() {
    let e = ContinuousClaim::exponential(1.0).unwrap();
    let neutral = ClassicalModel::new(1.0, 1.0, e.clone()).unwrap();
    assert_eq!(pk_psi0(&neutral).unwrap(), 1.0);
    let star = neutral.with_claim(perturb_continuous(&e, 2f64.ln(), 0.2).unwrap());
    assert!(close(pk_psi0(&star).unwrap(), 0.9, 1e-12));
    let sweep = epsilon_sweep_classical(&neutral, 2f64.ln(), &[0.2, 0.1, 0.05], &[0.0], 1e-6, 0.05).unwrap();
    let psi0: Vec<f64> = sweep.rows.iter().map(|r| r.psi0).collect();
    for (got, want) in psi0.iter().zip([0.9, 0.95, 0.975]) {
        assert!(close(*got, want, 1e-12));
    }
    for row in &sweep.rows {
        assert!(close(row.phi[0], 1.0 - row.psi0, 1e-15));
    }
}

#[test]
fn monte_carlo_examples() {
    let model = Seasonal::homogeneous(1, pmf(&[(0, 0.5), (2, 0.5)])).unwrap();
    let sampler = DiscreteSampler::new(&model);
    let est = simulate_ruin(&sampler, 0.0, Convention::Weak, &McConfig::new(200_000, 1, 42)).unwrap();
    assert!(est.agrees_with(0.5, 3.0));

    let one = ContinuousClaim::point(1.0).unwrap();
    let flat = AndersenModel::new(1.0, one.clone(), one).unwrap();
    let est = simulate_ruin(&flat, 0.0, Convention::Weak, &McConfig::new(1000, 100, 1)).unwrap();
    assert_eq!(est.p_hat, 0.0);

    let e = ContinuousClaim::exponential(1.0).unwrap();
    let renewal = AndersenModel::new(1.0, e.clone(), e).unwrap();
    let est = simulate_ruin(&renewal, 0.0, Convention::Weak, &McConfig::new(20_000, 10_000, 7)).unwrap();
    assert!(est.p_hat >= 0.95);

    // identity coupling: both processes coincide
    let p = pmf(&[(0, 0.5), (2, 0.5)]);
    let id = ruin_core::Coupling::identity(&p);
    let coupled = DiscreteCoupling::new(&model, 0, &id).unwrap();
    let rep = simulate_coupled(&coupled, 0.0, Convention::Weak, &McConfig::new(10_000, 50, 3), &[10, 50]).unwrap();
    assert_eq!(rep.violations, 0);
    assert_eq!(rep.identical_paths, 10_000);
    assert_eq!(rep.starred, rep.original);
}

#[test]
fn spitzer_bracket() {
    let e = ContinuousClaim::exponential(1.0).unwrap();
    let model = AndersenModel::new(1.0, e.clone(), e).unwrap();
    let sp = spitzer_estimate(&model, &[1, 100, 10_000], &McConfig::new(4_000, 1, 11)).unwrap();
    let b = psi0_andersen(&sp);
    assert_eq!(b.n, 10_000);
    // A_N ~ (ln N + 0.5772) / 2 gives 1 - exp(-A) ~ 0.9925
    assert!(close(b.lower, 0.9925, 0.003), "{}", b.lower);
    assert_eq!(b.upper, 1.0);
}
