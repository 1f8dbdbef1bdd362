//! Symplectic potentials `u = ½yᵀQy + h(y)` on the torus, Abreu's operator and
//! Legendre duality with Kähler potentials in complex coordinates.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Field, FieldContainer, Modes, ScalarField, TorusGrid};
use crate::spectral::{Sym2, C64};

pub type SymField = Field<Sym2>;

/// `u(y) = ½ yᵀQy + h(y)` with `h` periodic and normalized to zero mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticPotential {
    pub q: Sym2,
    pub h: ScalarField,
}

impl SymplecticPotential {
    /// Subtracts the mean of `h`.
    pub fn new(q: Sym2, h: ScalarField) -> Result<Self> {
        if q.min_eig() <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "quadratic part {q:?} is not positive-definite"
            )));
        }
        let m = h.mean();
        Ok(Self {
            q,
            h: h.map(|v| v - m),
        })
    }

    pub fn flat(grid: TorusGrid) -> Self {
        Self {
            q: Sym2::identity(),
            h: ScalarField::zeros(grid),
        }
    }

    pub fn from_perturbation(h: ScalarField) -> Self {
        let m = h.mean();
        Self {
            q: Sym2::identity(),
            h: h.map(|v| v - m),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.h.grid
    }

    pub fn to_json(&self) -> PotentialFile {
        PotentialFile {
            q: [[self.q.a11, self.q.a12], [self.q.a12, self.q.a22]],
            h: self.h.to_container(),
        }
    }

    pub fn from_json(f: &PotentialFile) -> Result<Self> {
        if (f.q[0][1] - f.q[1][0]).abs() > 1e-14 {
            return Err(Error::InvalidArgument(
                "quadratic part is not symmetric".into(),
            ));
        }
        Self::new(
            Sym2::new(f.q[0][0], f.q[0][1], f.q[1][1]),
            ScalarField::from_container(&f.h)?,
        )
    }
}

/// `{ "Q": [[..]], "h": {n1, n2, values} }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialFile {
    #[serde(rename = "Q")]
    pub q: [[f64; 2]; 2],
    pub h: FieldContainer,
}

/// `∂₁²m₁₁ + 2∂₁∂₂m₁₂ + ∂₂²m₂₂`, assembled in mode space.
pub fn second_divergence(
    m11: &ComplexField,
    m12: &ComplexField,
    m22: &ComplexField,
) -> ComplexField {
    let a = m11.to_modes().derivative(2, 0);
    let b = m12.to_modes().derivative(1, 1).scale(C64::new(2.0, 0.0));
    let c = m22.to_modes().derivative(0, 2);
    a.add(&b).add(&c).to_field()
}

pub fn second_divergence_real(m: &SymField) -> ScalarField {
    let a = m.map(|s| C64::new(s.a11, 0.0));
    let b = m.map(|s| C64::new(s.a12, 0.0));
    let c = m.map(|s| C64::new(s.a22, 0.0));
    second_divergence(&a, &b, &c).re()
}

/// Hessian of `h` from its modes, without positivity checks.
pub fn hessian_of(h: &ScalarField) -> SymField {
    let modes = h.to_modes();
    let d11 = modes.derivative(2, 0).to_field();
    let d12 = modes.derivative(1, 1).to_field();
    let d22 = modes.derivative(0, 2).to_field();
    Field {
        grid: h.grid,
        values: (0..h.grid.len())
            .map(|k| Sym2::new(d11.values[k].re, d12.values[k].re, d22.values[k].re))
            .collect(),
    }
}

/// `G = Q + Hess h`, checked positive-definite at every node.
pub fn hessian(u: &SymplecticPotential) -> Result<SymField> {
    let hh = hessian_of(&u.h);
    let g = hh.map(|s| Sym2::new(s.a11 + u.q.a11, s.a12 + u.q.a12, s.a22 + u.q.a22));
    check_positive(&g)?;
    Ok(g)
}

pub fn check_positive(g: &SymField) -> Result<()> {
    for (idx, s) in g.values.iter().enumerate() {
        let e = s.min_eig();
        if !(e > 1e-12 * s.trace().abs().max(1.0)) {
            let (i, j) = (idx / g.grid.n2, idx % g.grid.n2);
            return Err(Error::DegeneratePotential { i, j, min_eig: e });
        }
    }
    Ok(())
}

/// Abreu's scalar curvature `S = −¼ (u^{ab})_{,ab}`.
pub fn abreu_scalar(u: &SymplecticPotential) -> Result<ScalarField> {
    let g = hessian(u)?;
    let inv = g.map(|s| s.inverse());
    Ok(second_divergence_real(&inv).scaled(-0.25))
}

/// Trigonometric interpolant of a real periodic field, evaluable off-grid.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    modes: Modes,
}

/// Value, gradient and Hessian at a point.
#[derive(Clone, Copy, Debug)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: Sym2,
}

impl TrigInterpolant {
    pub fn new(f: &ScalarField) -> Self {
        Self {
            modes: f.to_modes(),
        }
    }

    pub fn eval(&self, x: (f64, f64)) -> Jet2 {
        let g = self.modes.grid;
        let axis = |n: usize, t: f64| -> Vec<C64> {
            (0..n)
                .map(|i| {
                    let k = if i <= n / 2 {
                        i as f64
                    } else {
                        i as f64 - n as f64
                    };
                    C64::from_polar(1.0, 2.0 * PI * k * t)
                })
                .collect()
        };
        let e1 = axis(g.n1, x.0);
        let e2 = axis(g.n2, x.1);
        let mut acc = [C64::new(0.0, 0.0); 6];
        for i in 0..g.n1 {
            let k1 = g.wavenumber(i * g.n2).0;
            let (ny1, _) = g.is_nyquist(k1, 0);
            let w1 = 2.0 * PI * k1 as f64;
            for j in 0..g.n2 {
                let k2 = g.wavenumber(j).1;
                let (_, ny2) = g.is_nyquist(0, k2);
                let w2 = 2.0 * PI * k2 as f64;
                let c = self.modes.coeffs[i * g.n2 + j] * e1[i] * e2[j];
                let d1 = if ny1 { 0.0 } else { w1 };
                let d2 = if ny2 { 0.0 } else { w2 };
                acc[0] += c;
                acc[1] += c * C64::new(0.0, d1);
                acc[2] += c * C64::new(0.0, d2);
                acc[3] += c * (-w1 * w1);
                acc[4] += c * (-d1 * d2);
                acc[5] += c * (-w2 * w2);
            }
        }
        Jet2 {
            value: acc[0].re,
            grad: [acc[1].re, acc[2].re],
            hess: Sym2::new(acc[3].re, acc[4].re, acc[5].re),
        }
    }
}

/// Output of a Legendre transform: the dual potential plus the per-node dual
/// points `x(y)` and the raw (un-normalized) values `u(y)`.
#[derive(Clone, Debug)]
pub struct LegendreDual {
    pub potential: SymplecticPotential,
    pub dual_points: Vec<(f64, f64)>,
    pub raw_values: Vec<f64>,
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;

/// Solves `∇v(x) = y` for `v = ½xᵀQx + h(x)` by Newton's method from `x = Q⁻¹y`.
pub fn invert_gradient(
    interp: &TrigInterpolant,
    q: Sym2,
    y: (f64, f64),
) -> Result<((f64, f64), Jet2)> {
    let qi = q.inverse();
    let mut x = (qi.a11 * y.0 + qi.a12 * y.1, qi.a12 * y.0 + qi.a22 * y.1);
    for _ in 0..NEWTON_MAX_ITER {
        let jet = interp.eval(x);
        let r0 = q.a11 * x.0 + q.a12 * x.1 + jet.grad[0] - y.0;
        let r1 = q.a12 * x.0 + q.a22 * x.1 + jet.grad[1] - y.1;
        let hv = Sym2::new(
            q.a11 + jet.hess.a11,
            q.a12 + jet.hess.a12,
            q.a22 + jet.hess.a22,
        );
        if hv.min_eig() <= 0.0 {
            return Err(Error::NoConvergence(format!(
                "Hessian of the convex function is not positive at {x:?}"
            )));
        }
        if r0.hypot(r1) < NEWTON_TOL {
            return Ok((x, jet));
        }
        let hi = hv.inverse();
        x.0 -= hi.a11 * r0 + hi.a12 * r1;
        x.1 -= hi.a12 * r0 + hi.a22 * r1;
    }
    Err(Error::NoConvergence(format!(
        "gradient inversion did not reach {NEWTON_TOL:e} in {NEWTON_MAX_ITER} steps at y = {y:?}"
    )))
}

/// Legendre transform of `v(x) = ½xᵀQx + h_v(x)`. A nonzero periodic part
/// requires `Q = I` so that the dual perturbation is periodic on the same lattice.
pub fn legendre(v_h: &ScalarField, q: Sym2) -> Result<LegendreDual> {
    if q.min_eig() <= 0.0 {
        return Err(Error::InvalidArgument(
            "quadratic part must be positive-definite".into(),
        ));
    }
    let grid = v_h.grid;
    let perturbed = v_h.sup_norm() > 0.0;
    let identity =
        (q.a11 - 1.0).abs() < 1e-15 && q.a12.abs() < 1e-15 && (q.a22 - 1.0).abs() < 1e-15;
    if perturbed && !identity {
        return Err(Error::InvalidArgument(
            "periodic perturbations are supported only with an identity quadratic part".into(),
        ));
    }
    let qi = q.inverse();
    let interp = TrigInterpolant::new(v_h);
    let nodes: Vec<(usize, usize)> = grid.nodes().collect();
    let solved: Vec<Result<((f64, f64), f64, f64)>> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let y = grid.node(i, j);
            let (x, jet) = invert_gradient(&interp, q, y)?;
            let vx =
                0.5 * (q.a11 * x.0 * x.0 + 2.0 * q.a12 * x.0 * x.1 + q.a22 * x.1 * x.1) + jet.value;
            let u = x.0 * y.0 + x.1 * y.1 - vx;
            let quad = 0.5 * (qi.a11 * y.0 * y.0 + 2.0 * qi.a12 * y.0 * y.1 + qi.a22 * y.1 * y.1);
            Ok((x, u, u - quad))
        })
        .collect();
    let mut dual_points = Vec::with_capacity(nodes.len());
    let mut raw_values = Vec::with_capacity(nodes.len());
    let mut hu = Vec::with_capacity(nodes.len());
    for s in solved {
        let (x, u, h) = s?;
        dual_points.push(x);
        raw_values.push(u);
        hu.push(h);
    }
    let h = ScalarField::new(grid, hu)?;
    Ok(LegendreDual {
        potential: SymplecticPotential::new(qi, h)?,
        dual_points,
        raw_values,
    })
}

/// Scalar curvature in complex coordinates,
/// `S = −¼ v^{ab} ∂_b (v^{cd} ∂_c v_{,ad})`, on the grid of `v`.
pub fn complex_side_scalar(v: &SymplecticPotential) -> Result<ScalarField> {
    let grid = v.grid();
    let g = hessian(v)?;
    let w = g.map(|s| s.inverse());
    let modes = v.h.to_modes();
    let third = |o1: u32, o2: u32| modes.derivative(o1, o2).to_field().re();
    // ∂_c v_{ad} indexed as d[a][d][c].
    let v111 = third(3, 0);
    let v112 = third(2, 1);
    let v122 = third(1, 2);
    let v222 = third(0, 3);
    let dv = |a: usize, d: usize, c: usize, k: usize| -> f64 {
        match a + d + c {
            0 => v111.values[k],
            1 => v112.values[k],
            2 => v122.values[k],
            _ => v222.values[k],
        }
    };
    let winv = |k: usize, a: usize, b: usize| -> f64 {
        let s = w.values[k];
        match (a, b) {
            (0, 0) => s.a11,
            (1, 1) => s.a22,
            _ => s.a12,
        }
    };
    let mut t = [ScalarField::zeros(grid), ScalarField::zeros(grid)];
    for k in 0..grid.len() {
        for (a, ta) in t.iter_mut().enumerate() {
            let mut acc = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    acc += winv(k, c, d) * dv(a, d, c, k);
                }
            }
            ta.values[k] = acc;
        }
    }
    let dt = [
        [t[0].partial(1, 1), t[0].partial(2, 1)],
        [t[1].partial(1, 1), t[1].partial(2, 1)],
    ];
    let values = (0..grid.len())
        .map(|k| {
            let mut acc = 0.0;
            for (a, row) in dt.iter().enumerate() {
                for (b, f) in row.iter().enumerate() {
                    acc += winv(k, a, b) * f.values[k];
                }
            }
            -0.25 * acc
        })
        .collect();
    ScalarField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_field;

    fn cos_potential(n: usize, eps: f64) -> SymplecticPotential {
        let g = TorusGrid::square(n).unwrap();
        SymplecticPotential::from_perturbation(ScalarField::from_fn(g, |a, _| {
            eps * (2.0 * PI * a).cos()
        }))
    }

    #[test]
    fn flat_hessian_is_identity() {
        let g = hessian(&SymplecticPotential::flat(TorusGrid::square(8).unwrap())).unwrap();
        assert!(g.values.iter().all(|s| *s == Sym2::identity()));
    }

    #[test]
    fn cosine_hessian() {
        let eps = 0.01;
        let u = cos_potential(16, eps);
        let g = hessian(&u).unwrap();
        let w = (2.0 * PI).powi(2);
        for (i, j) in u.grid().nodes() {
            let (y1, _) = u.grid().node(i, j);
            let s = g.at(i, j);
            assert!((s.a11 - (1.0 - eps * w * (2.0 * PI * y1).cos())).abs() < 1e-12);
            assert!(s.a12.abs() < 1e-12 && (s.a22 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_potential_names_node() {
        let u = cos_potential(16, 1.0 / (2.0 * PI).powi(2));
        match hessian(&u) {
            Err(Error::DegeneratePotential { i, j, .. }) => assert_eq!((i, j), (0, 0)),
            other => panic!("expected degenerate-potential error, got {other:?}"),
        }
    }

    #[test]
    fn abreu_one_dimensional_oracle() {
        let g = TorusGrid::square(32).unwrap();
        let eps = 0.001;
        let w1 = 2.0 * PI;
        let w2 = 4.0 * PI;
        let f = |y: f64| eps * ((w1 * y).cos() + 0.5 * (w2 * y).sin());
        // D = 1 + f'' and its derivatives; S = -1/4 (1/D)'' = -1/4 (2D'^2/D^3 - D''/D^2).
        let d0 = |y: f64| 1.0 - eps * (w1 * w1 * (w1 * y).cos() + 0.5 * w2 * w2 * (w2 * y).sin());
        let d1 = |y: f64| eps * (w1.powi(3) * (w1 * y).sin() - 0.5 * w2.powi(3) * (w2 * y).cos());
        let d2 = |y: f64| eps * (w1.powi(4) * (w1 * y).cos() + 0.5 * w2.powi(4) * (w2 * y).sin());
        let u = SymplecticPotential::from_perturbation(ScalarField::from_fn(g, |a, _| f(a)));
        let s = abreu_scalar(&u).unwrap();
        for (i, j) in g.nodes() {
            let (y, _) = g.node(i, j);
            let exact = -0.25 * (2.0 * d1(y).powi(2) / d0(y).powi(3) - d2(y) / d0(y).powi(2));
            assert!(
                (s.at(i, j) - exact).abs() < 1e-8,
                "{} vs {exact}",
                s.at(i, j)
            );
        }
        assert!(s.mean().abs() < 1e-10);
    }

    #[test]
    fn quadratic_legendre_duality() {
        let g = TorusGrid::square(8).unwrap();
        let a = Sym2::new(2.0, 0.5, 1.0);
        let dual = legendre(&ScalarField::zeros(g), a).unwrap();
        let ai = a.inverse();
        assert!((dual.potential.q.a11 - ai.a11).abs() < 1e-15);
        assert!((dual.potential.q.a12 - ai.a12).abs() < 1e-15);
        assert!(dual.potential.h.sup_norm() < 1e-14);
    }

    #[test]
    fn legendre_rejects_nonidentity_with_perturbation() {
        let g = TorusGrid::square(8).unwrap();
        let h = random_field(g, 1, 2, 1e-3).unwrap();
        assert!(legendre(&h, Sym2::new(2.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn complex_side_flat_and_quadratic() {
        let g = TorusGrid::square(16).unwrap();
        assert!(
            complex_side_scalar(&SymplecticPotential::flat(g))
                .unwrap()
                .sup_norm()
                < 1e-14
        );
        let v = SymplecticPotential::new(Sym2::new(3.0, 1.0, 2.0), ScalarField::zeros(g)).unwrap();
        assert!(complex_side_scalar(&v).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn interpolant_reproduces_nodes() {
        let g = TorusGrid::square(16).unwrap();
        let f = random_field(g, 5, 4, 1.0).unwrap();
        let t = TrigInterpolant::new(&f);
        let d1 = f.partial(1, 1);
        for (i, j) in g.nodes().step_by(7) {
            let jet = t.eval(g.node(i, j));
            assert!((jet.value - f.at(i, j)).abs() < 1e-13);
            assert!((jet.grad[0] - d1.at(i, j)).abs() < 1e-11);
        }
    }
}
