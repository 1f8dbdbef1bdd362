use hcsck::grid::{random_field, ScalarField, TorusGrid};
use hcsck::higgs::{
    complex_mm_residual, degenerate_family, random_solution, semidefinite_family, HiggsField,
};
use hcsck::hk_torus::{
    convexity_probe, hk_energy, hk_gradient, real_mm_residual, second_variation, solve_real_mm,
    ConvexityHypothesis, HKState, SolveOptions,
};
use hcsck::potentials::SymplecticPotential;

fn state(n: usize, seed: u64) -> HKState {
    let g = TorusGrid::square(n).unwrap();
    let u = SymplecticPotential::from_perturbation(random_field(g, seed, 3, 1e-3).unwrap());
    HKState::new(u, random_solution(g, seed + 100, 3, 0.15).unwrap()).unwrap()
}

fn shifted(s: &HKState, phi: &ScalarField, t: f64) -> f64 {
    let u = SymplecticPotential::new(s.u().q, s.u().h.add(&phi.scaled(t))).unwrap();
    hk_energy(&s.with_potential(u).unwrap()).unwrap()
}

#[test]
fn gradient_matches_central_differences() {
    let s = state(16, 1);
    let grad = hk_gradient(&s).unwrap();
    let t = 1e-5;
    for k in 0..20 {
        let phi = random_field(s.grid(), 50 + k, 4, 1e-3).unwrap();
        let fd = (shifted(&s, &phi, t) - shifted(&s, &phi, -t)) / (2.0 * t);
        let exact = grad.mul(&phi).integrate();
        assert!((fd - exact).abs() < 1e-6 * exact.abs(), "{fd} vs {exact}");
    }
}

#[test]
fn second_variation_matches_second_differences() {
    let s = state(16, 2);
    let t = 1e-4;
    for k in 0..5 {
        let phi = random_field(s.grid(), 70 + k, 4, 1e-3).unwrap();
        let fd =
            (shifted(&s, &phi, t) - 2.0 * shifted(&s, &phi, 0.0) + shifted(&s, &phi, -t)) / (t * t);
        let exact = second_variation(&s, &phi).unwrap();
        assert!((fd - exact).abs() < 1e-4 * exact.abs(), "{fd} vs {exact}");
    }
}

#[test]
fn second_variation_vanishes_on_affine_free_directions() {
    let s = state(8, 3);
    let c = ScalarField::constant(s.grid(), 0.7);
    assert!(second_variation(&s, &c).unwrap().abs() < 1e-14);
}

fn rank_one_family(g: TorusGrid, seed: u64, amp: f64) -> HiggsField {
    degenerate_family(g, seed, amp).unwrap()
}

#[test]
fn probe_families_satisfy_hypotheses() {
    let g = TorusGrid::square(16).unwrap();
    let u0 = SymplecticPotential::from_perturbation(random_field(g, 1, 3, 1e-3).unwrap());
    let u1 = SymplecticPotential::from_perturbation(random_field(g, 2, 3, 1e-3).unwrap());
    let xi = rank_one_family(g, 3, 0.1);
    assert!(complex_mm_residual(&xi).sup_norm() < 1e-11);
    let r = convexity_probe(&u0, &u1, &xi, 9).unwrap();
    assert_eq!(r.hypothesis, ConvexityHypothesis::Degenerate);
    assert!(r.convex, "{}", r.min_second_difference);
    let xi = semidefinite_family(g, 4, 0.15).unwrap();
    assert!(complex_mm_residual(&xi).sup_norm() < 1e-11);
    let r = convexity_probe(&u0, &u1, &xi, 9).unwrap();
    assert_eq!(r.hypothesis, ConvexityHypothesis::SemidefiniteParts);
    assert!(r.convex, "{}", r.min_second_difference);
    let r = convexity_probe(&u0, &u1, &HiggsField::zero(g), 9).unwrap();
    assert!(r.convex);
}

#[test]
fn solver_is_independent_of_initialization() {
    let g = TorusGrid::square(16).unwrap();
    let xi = rank_one_family(g, 11, 0.1);
    let opts = SolveOptions::default();
    let a = solve_real_mm(&xi, &SymplecticPotential::flat(g), &opts).unwrap();
    let start = SymplecticPotential::from_perturbation(random_field(g, 12, 3, 1e-3).unwrap());
    let b = solve_real_mm(&xi, &start, &opts).unwrap();
    assert!(a.report.residual_sup < 1e-8 && b.report.residual_sup < 1e-8);
    assert!(a.potential.h.sub(&b.potential.h).sup_norm() < 1e-7);
    let s = HKState::new(a.potential.clone(), xi).unwrap();
    assert!(real_mm_residual(&s).unwrap().sup_norm() < 1e-8);
    for tr in [&a.report.energy_trace, &b.report.energy_trace] {
        assert!(tr
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-13 * (1.0 + w[0].abs())));
    }
}
