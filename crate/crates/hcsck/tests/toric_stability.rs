use hcsck::spectral::C64;
use hcsck::toric::poly::{Poly2, SymPoly};
use hcsck::toric::*;

fn square() -> DelzantPolytope {
    DelzantPolytope::unit_square()
}

fn simplex() -> DelzantPolytope {
    DelzantPolytope::standard_simplex()
}

#[test]
fn square_functional_values() {
    let m = BoundaryMeasure::default();
    let p = square();
    let c = futaki_constant(&p, m);
    assert!((c - 4.0).abs() < 1e-14);
    let crease = donaldson_functional(&p, &PLConvexFn::crease([1.0, 0.0], -0.5), c, m);
    assert!((crease - 0.25).abs() < 1e-12, "{crease}");
    let fv = futaki_vector(&p, m);
    assert!(fv[0].abs() < 1e-14 && fv[1].abs() < 1e-14, "{fv:?}");
    let odd = donaldson_functional(&p, &PLConvexFn::affine([1.0, 0.0], -0.5), c, m);
    assert!(odd.abs() < 1e-14);
    let one = donaldson_functional(&p, &PLConvexFn::affine([0.0, 0.0], 1.0), c, m);
    assert!(one.abs() < 1e-14);
}

#[test]
fn simplex_constant_and_futaki_vector() {
    let p = simplex();
    let c = futaki_constant(&p, BoundaryMeasure::InverseSquareNorm);
    assert!((c - (4.0 + 2f64.sqrt())).abs() < 1e-12);
    // With the |∇ℓ|⁻² weight the hypotenuse is under-weighted and the
    // affine functional no longer vanishes.
    let fv = futaki_vector(&p, BoundaryMeasure::InverseSquareNorm);
    let expect = -1.0 / 6.0 + 2f64.sqrt() / 12.0;
    assert!(
        (fv[0] - expect).abs() < 1e-14 && (fv[1] - expect).abs() < 1e-14,
        "{fv:?}"
    );
    let c1 = futaki_constant(&p, BoundaryMeasure::InverseNorm);
    assert!((c1 - 6.0).abs() < 1e-12);
    let fv1 = futaki_vector(&p, BoundaryMeasure::InverseNorm);
    assert!(fv1[0].abs() < 1e-14 && fv1[1].abs() < 1e-14, "{fv1:?}");
}

#[test]
fn functional_is_linear_and_matches_quadrature() {
    let m = BoundaryMeasure::default();
    for p in [square(), simplex(), square().scaled(2.0).unwrap()] {
        let c = futaki_constant(&p, m);
        let f = PLConvexFn {
            pieces: vec![
                AffinePiece {
                    a: [1.0, -1.0],
                    b: 0.1,
                },
                AffinePiece {
                    a: [-0.5, 2.0],
                    b: -0.3,
                },
                AffinePiece {
                    a: [0.0, 0.0],
                    b: 0.05,
                },
            ],
        };
        let exact = donaldson_functional(&p, &f, c, m);
        let quad = Quadrature {
            order: 20,
            levels: 0,
        };
        let smooth = donaldson_functional_smooth(&p, c, m, quad, |y| f.eval(y));
        assert!((exact - smooth).abs() < 2e-3, "{exact} {smooth}");
        let doubled = PLConvexFn {
            pieces: f
                .pieces
                .iter()
                .map(|q| AffinePiece {
                    a: [2.0 * q.a[0], 2.0 * q.a[1]],
                    b: 2.0 * q.b,
                })
                .collect(),
        };
        assert!((donaldson_functional(&p, &doubled, c, m) - 2.0 * exact).abs() < 1e-13);
        // An affine crease along the boundary reduces to the affine function.
        let a = [1.0, 0.0];
        let lo = p
            .vertices()
            .iter()
            .map(|v| v[0])
            .fold(f64::INFINITY, f64::min);
        let degenerate = donaldson_functional(&p, &PLConvexFn::crease(a, -lo), c, m);
        let affine = donaldson_functional(&p, &PLConvexFn::affine(a, -lo), c, m);
        assert!((degenerate - affine).abs() < 1e-12);
    }
}

#[test]
fn probe_on_symmetric_polytopes() {
    let r = stability_probe(&square(), BoundaryMeasure::default(), 9);
    assert!(r.min > 0.0 && !r.destabilized, "{r:?}");
    let r = stability_probe(&simplex(), BoundaryMeasure::InverseNorm, 9);
    assert!(r.min > 0.0 && !r.destabilized, "{r:?}");
}

#[test]
fn kernel_decays_linearly_on_every_facet() {
    for p in [square(), simplex()] {
        for r in 0..p.facets().len() {
            let rep = boundary_kernel_check(&p, &Poly2::zero(), r, 12).unwrap();
            assert!(
                (rep.decay_order - 1.0).abs() < 0.1,
                "{r} {}",
                rep.decay_order
            );
        }
        for v in 0..p.vertices().len() {
            let tr = vertex_kernel_trace(&p, &Poly2::zero(), v, 20).unwrap();
            assert!(tr.last().unwrap() < &1e-5, "{tr:?}");
            assert!(tr.windows(2).all(|w| w[1] < w[0]));
        }
    }
    let bad = Poly2::real(&[(2, 0, -40.0)]);
    assert!(boundary_kernel_check(&square(), &bad, 0, 8).is_err());
}

#[test]
fn constant_scales_inversely_with_polytope() {
    let m = BoundaryMeasure::default();
    for t in [0.5, 2.0, 7.0] {
        for p in [square(), simplex()] {
            let c = futaki_constant(&p, m);
            assert!((futaki_constant(&p.scaled(t).unwrap(), m) - c / t).abs() < 1e-12);
        }
    }
}

#[test]
fn polytope_file_round_trip() {
    let json = r#"{ "facets": [ { "normal": [1, 0], "offset": 0 }, { "normal": [0, 1], "offset": 0 }, { "normal": [-1, -1], "offset": 1 } ] }"#;
    let f: PolytopeFile = serde_json::from_str(json).unwrap();
    let p = DelzantPolytope::from_file(&f).unwrap();
    assert_eq!(p, simplex());
    let bad = r#"{ "facets": [ { "normal": [2, 0], "offset": 0 }, { "normal": [0, 1], "offset": 0 }, { "normal": [-1, -1], "offset": 1 } ] }"#;
    let f: PolytopeFile = serde_json::from_str(bad).unwrap();
    assert!(matches!(
        DelzantPolytope::from_file(&f),
        Err(hcsck::Error::Polytope(
            hcsck::PolytopeError::NonPrimitive { .. }
        ))
    ));
}

#[test]
fn complex_integration_by_parts() {
    let f = Poly2::real(&[(1, 1, 1.0)]);
    let rep = intbyparts_complex(&square(), &Poly2::zero(), &SymPoly::identity(), &f).unwrap();
    assert!(rep.defect < 1e-5, "{rep:?}");
    let zero = intbyparts_complex(&square(), &Poly2::zero(), &SymPoly::zero(), &f).unwrap();
    assert!(zero.lhs.abs() < 1e-15 && zero.rhs.abs() < 1e-15);
    let phi = SymPoly {
        m11: Poly2::real(&[(0, 0, 0.5), (1, 0, 0.3)]),
        m12: Poly2 {
            terms: vec![poly::Term {
                i: 0,
                j: 1,
                re: 0.1,
                im: 0.2,
            }],
        },
        m22: Poly2::constant(C64::new(0.4, -0.1)),
    };
    let g = Poly2::real(&[(2, 1, 1.0), (0, 3, -0.5)]);
    let rep = intbyparts_complex(&simplex(), &Poly2::zero(), &phi, &g).unwrap();
    assert!(rep.defect < 1e-5, "{rep:?}");
}

#[test]
fn real_integration_by_parts() {
    let f = Poly2::real(&[(1, 1, 1.0)]);
    let rep = intbyparts_real(
        &square(),
        &Poly2::zero(),
        &SymPoly::identity(),
        &f,
        BoundaryMeasure::default(),
    )
    .unwrap();
    assert!(rep.defect < 1e-4, "{rep:?}");
    let g = Poly2::real(&[(2, 0, 1.0), (0, 1, 0.5)]);
    let phi = SymPoly::identity().scale(0.5);
    let rep = intbyparts_real(
        &simplex(),
        &Poly2::zero(),
        &phi,
        &g,
        BoundaryMeasure::InverseNorm,
    )
    .unwrap();
    assert!(rep.defect < 1e-4, "{rep:?}");
    let off = intbyparts_real(
        &simplex(),
        &Poly2::zero(),
        &phi,
        &g,
        BoundaryMeasure::InverseSquareNorm,
    )
    .unwrap();
    assert!(off.defect > 1e-2, "{off:?}");
}

#[test]
fn energy_stabilizes_under_refinement() {
    let rep = toric_hk_energy(
        &square(),
        &Poly2::zero(),
        &SymPoly::zero(),
        BoundaryMeasure::default(),
    )
    .unwrap();
    let t = &rep.trace;
    assert!((t[2].1 - t[1].1).abs() < 1e-4, "{t:?}");
    assert!(rep.value.is_finite());
}

#[test]
fn energy_derivative_matches_finite_difference() {
    let m = BoundaryMeasure::default();
    let p = square();
    let h = Poly2::real(&[(2, 0, 0.2), (1, 1, 0.1)]);
    let phi = SymPoly::identity().scale(0.5);
    let f = Poly2::real(&[(1, 1, 1.0), (2, 0, 0.3), (0, 3, -0.2)]);
    let t = 1e-3;
    let e = |s: f64| {
        toric_hk_energy(&p, &h.add(&f.scale(s)), &phi, m)
            .unwrap()
            .value
    };
    let fd = (e(t) - e(-t)) / (2.0 * t);
    let exact = toric_energy_derivative(&p, &h, &phi, &f, m).unwrap();
    assert!((fd - exact).abs() < 1e-3 * exact.abs(), "{fd} {exact}");
}

#[test]
fn inadmissible_higgs_field_is_rejected() {
    let phi = SymPoly::identity().scale(5.0);
    let f = Poly2::real(&[(1, 1, 1.0)]);
    assert!(intbyparts_complex(&square(), &Poly2::zero(), &phi, &f).is_err());
    assert!(toric_hk_energy(&square(), &Poly2::zero(), &phi, BoundaryMeasure::default()).is_err());
}
