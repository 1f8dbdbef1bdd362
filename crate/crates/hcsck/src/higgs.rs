//! Higgs tensors on the torus: the linear complex moment map, its mode-wise
//! projection, admissibility fields and the integrability defect.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Field, Modes, ScalarField, TorusGrid};
use crate::potentials::{hessian, second_divergence, SymplecticPotential};
use crate::spectral::{eigenpair, CMat2, CSym2, Spectrum2, Sym2, C64};

pub type CSymField = Field<CSym2>;

#[derive(Clone, Debug, PartialEq)]
pub struct HiggsField {
    pub xi: CSymField,
}

impl HiggsField {
    pub fn new(xi: CSymField) -> Self {
        Self { xi }
    }

    pub fn zero(grid: TorusGrid) -> Self {
        Self {
            xi: Field::constant(grid, CSym2::zero()),
        }
    }

    pub fn constant(grid: TorusGrid, m: CSym2) -> Self {
        Self {
            xi: Field::constant(grid, m),
        }
    }

    pub fn from_components(m11: &ComplexField, m12: &ComplexField, m22: &ComplexField) -> Self {
        let values = (0..m11.grid.len())
            .map(|k| CSym2::new(m11.values[k], m12.values[k], m22.values[k]))
            .collect();
        Self {
            xi: Field {
                grid: m11.grid,
                values,
            },
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.xi.grid
    }

    pub fn components(&self) -> [ComplexField; 3] {
        [
            self.xi.map(|m| m.m11),
            self.xi.map(|m| m.m12),
            self.xi.map(|m| m.m22),
        ]
    }

    pub fn scale(&self, s: C64) -> HiggsField {
        Self {
            xi: self.xi.map(|m| m.scale(s)),
        }
    }

    pub fn add(&self, o: &HiggsField) -> HiggsField {
        Self {
            xi: self.xi.zip_map(&o.xi, |a, b| a + b),
        }
    }

    pub fn sup_entry(&self) -> f64 {
        self.xi.values.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }

    /// `sqrt(mean(|ξ₁₁|² + 2|ξ₁₂|² + |ξ₂₂|²))`.
    pub fn l2_norm(&self) -> f64 {
        (self.xi.values.iter().map(|m| m.norm_sqr()).sum::<f64>() / self.grid().len() as f64).sqrt()
    }

    pub fn to_file(&self) -> HiggsFile {
        let inter = |f: &ComplexField| f.values.iter().flat_map(|z| [z.re, z.im]).collect();
        let [a, b, c] = self.components();
        HiggsFile {
            n1: self.grid().n1,
            n2: self.grid().n2,
            entries: HiggsEntries {
                m11: inter(&a),
                m12: inter(&b),
                m22: inter(&c),
            },
        }
    }

    pub fn from_file(f: &HiggsFile) -> Result<Self> {
        let grid = TorusGrid::new(f.n1, f.n2)?;
        let split = |v: &[f64]| -> Result<ComplexField> {
            if v.len() != 2 * grid.len() {
                return Err(Error::SizeMismatch {
                    expected: 2 * grid.len(),
                    got: v.len(),
                });
            }
            ComplexField::new(grid, v.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
        };
        Ok(Self::from_components(
            &split(&f.entries.m11)?,
            &split(&f.entries.m12)?,
            &split(&f.entries.m22)?,
        ))
    }
}

/// `{ "n1", "n2", "entries": { "m11", "m12", "m22" } }` with interleaved re/im pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HiggsFile {
    pub n1: usize,
    pub n2: usize,
    pub entries: HiggsEntries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HiggsEntries {
    pub m11: Vec<f64>,
    pub m12: Vec<f64>,
    pub m22: Vec<f64>,
}

/// `Σ_{a,b} ∂_a∂_b ξ^{ab}`.
pub fn complex_mm_residual(xi: &HiggsField) -> ComplexField {
    let [a, b, c] = xi.components();
    second_divergence(&a, &b, &c)
}

/// Discrete symbol `K(k)` of the residual operator in Frobenius form: the
/// residual mode is `−4π²⟨K, ξ_k⟩` with `⟨A,B⟩ = A₁₁B₁₁ + 2A₁₂B₁₂ + A₂₂B₂₂`.
/// The mixed entry vanishes on Nyquist wavenumbers, matching first derivatives.
pub fn mode_symbol(grid: TorusGrid, k1: i64, k2: i64) -> Sym2 {
    let (ny1, ny2) = grid.is_nyquist(k1, k2);
    let mixed = if ny1 || ny2 { 0.0 } else { (k1 * k2) as f64 };
    Sym2::new((k1 * k1) as f64, mixed, (k2 * k2) as f64)
}

fn pair(k: Sym2, m: (C64, C64, C64)) -> C64 {
    m.0 * k.a11 + m.1 * (2.0 * k.a12) + m.2 * k.a22
}

fn mode_arrays(xi: &HiggsField) -> [Modes; 3] {
    let [a, b, c] = xi.components();
    [a.to_modes(), b.to_modes(), c.to_modes()]
}

/// `max_k |⟨K(k), ξ_k⟩|` over all modes.
pub fn mode_condition_sup(xi: &HiggsField) -> f64 {
    let grid = xi.grid();
    let [a, b, c] = mode_arrays(xi);
    (0..grid.len())
        .map(|idx| {
            let (k1, k2) = grid.wavenumber(idx);
            pair(
                mode_symbol(grid, k1, k2),
                (a.coeffs[idx], b.coeffs[idx], c.coeffs[idx]),
            )
            .norm()
        })
        .fold(0.0, f64::max)
}

/// Orthogonal projection of each mode onto `{M : ⟨K(k), M⟩ = 0}`.
pub fn project_complex_mm(xi: &HiggsField) -> HiggsField {
    let grid = xi.grid();
    let [mut a, mut b, mut c] = mode_arrays(xi);
    for idx in 0..grid.len() {
        let (k1, k2) = grid.wavenumber(idx);
        if k1 == 0 && k2 == 0 {
            continue;
        }
        let k = mode_symbol(grid, k1, k2);
        let norm = k.a11 * k.a11 + 2.0 * k.a12 * k.a12 + k.a22 * k.a22;
        let t = pair(k, (a.coeffs[idx], b.coeffs[idx], c.coeffs[idx])) / norm;
        a.coeffs[idx] -= t * k.a11;
        b.coeffs[idx] -= t * k.a12;
        c.coeffs[idx] -= t * k.a22;
    }
    HiggsField::from_components(&a.to_field(), &b.to_field(), &c.to_field())
}

fn random_complex_modes(grid: TorusGrid, rng: &mut impl Rng, bandwidth: usize) -> Modes {
    let b = bandwidth as i64;
    let mut m = Modes::zeros(grid);
    for k1 in -b..=b {
        for k2 in -b..=b {
            let w = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            m.set(
                k1,
                k2,
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w,
            );
        }
    }
    m
}

/// Seeded solution of the complex moment map with entries bounded by `amplitude`.
pub fn random_solution(
    grid: TorusGrid,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> Result<HiggsField> {
    if 2 * bandwidth >= grid.n1.min(grid.n2) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth {bandwidth} must be below {}",
            grid.n1.min(grid.n2) / 2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps: Vec<ComplexField> = (0..3)
        .map(|_| random_complex_modes(grid, &mut rng, bandwidth).to_field())
        .collect();
    let xi = project_complex_mm(&HiggsField::from_components(
        &comps[0], &comps[1], &comps[2],
    ));
    let sup = xi.sup_entry();
    if sup == 0.0 {
        return Ok(xi);
    }
    Ok(xi.scale(C64::new(amplitude / sup, 0.0)))
}

/// `X = ξGξ̄G` at one node.
pub fn x_matrix(xi: &CSym2, g: &Sym2) -> CMat2 {
    let gm = g.mat();
    xi.mat() * gm * xi.conj().mat() * gm
}

/// Eigenvalues of `ξGξ̄G` from `p = Tr` and `q = |det ξ|² (det G)²`.
pub fn node_spectrum(xi: &CSym2, g: &Sym2) -> Result<Spectrum2> {
    let p = x_matrix(xi, g).trace().re;
    let q = xi.det().norm_sqr() * g.det() * g.det();
    eigenpair(p, q)
}

fn spectra(xi: &HiggsField, u: &SymplecticPotential) -> Result<Field<Spectrum2>> {
    let g = hessian(u)?;
    let values = xi
        .xi
        .values
        .iter()
        .zip(&g.values)
        .map(|(x, g)| node_spectrum(x, g))
        .collect::<Result<Vec<_>>>()?;
    Field::new(xi.grid(), values)
}

/// Node-wise `δ⁺`.
pub fn spectral_radius_field(xi: &HiggsField, u: &SymplecticPotential) -> Result<ScalarField> {
    Ok(spectra(xi, u)?.map(|s| s.delta_plus))
}

/// Node-wise `‖ξ‖²_u = δ⁺ + δ⁻`.
pub fn xi_norm_field(xi: &HiggsField, u: &SymplecticPotential) -> Result<ScalarField> {
    Ok(spectra(xi, u)?.map(|s| s.trace()))
}

/// L² norm of the curl pair of `H = GξG`; vanishes iff `H` is a Hessian field.
pub fn integrability_defect(xi: &HiggsField, u: &SymplecticPotential) -> Result<f64> {
    let g = hessian(u)?;
    let h: Vec<CMat2> = xi
        .xi
        .values
        .iter()
        .zip(&g.values)
        .map(|(x, g)| g.mat() * x.mat() * g.mat())
        .collect();
    let grid = xi.grid();
    let comp = |r: usize, c: usize| ComplexField {
        grid,
        values: h.iter().map(|m| m.0[r][c]).collect(),
    };
    let (h11, h12, h22) = (comp(0, 0), comp(0, 1), comp(1, 1));
    let c1 = h11.partial(2, 1).zip_map(&h12.partial(1, 1), |a, b| a - b);
    let c2 = h12.partial(2, 1).zip_map(&h22.partial(1, 1), |a, b| a - b);
    let total: f64 = c1
        .values
        .iter()
        .zip(&c2.values)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .sum();
    Ok((total / grid.len() as f64).sqrt())
}

fn row_field(grid: TorusGrid, h: &ScalarField, axis: usize) -> ScalarField {
    ScalarField::from_fn(grid, |a, b| {
        let t = if axis == 1 { a } else { b };
        h.at((t * grid.n1 as f64).round() as usize % grid.n1, 0)
    })
}

/// Seeded solution with `det ξ = 0`: `ξ = [[c, f], [f, f²/c]]` with `f` a function of `y¹`.
pub fn degenerate_family(grid: TorusGrid, seed: u64, amplitude: f64) -> Result<HiggsField> {
    let fr = row_field(
        grid,
        &crate::grid::random_field(grid, seed, 3, amplitude)?,
        1,
    );
    let fi = row_field(
        grid,
        &crate::grid::random_field(grid, seed + 1, 3, amplitude)?,
        1,
    );
    let c = C64::new(0.2, 0.05);
    let f: ComplexField = fr.zip_map(&fi, |a, b| C64::new(a, b));
    let m22 = f.map(|z| z * z / c);
    Ok(HiggsField::from_components(
        &ComplexField::constant(grid, c),
        &f,
        &m22,
    ))
}

/// Seeded diagonal solution whose real and imaginary parts are positive semidefinite:
/// `ξ₁₁` depends on `y²` and `ξ₂₂` on `y¹`.
pub fn semidefinite_family(grid: TorusGrid, seed: u64, amplitude: f64) -> Result<HiggsField> {
    let pos = |s: u64, axis: usize| -> Result<ScalarField> {
        let f = row_field(
            grid,
            &crate::grid::random_field(grid, s, 3, amplitude)?,
            axis,
        );
        let lift = f.sup_norm();
        Ok(f.map(|v| v + lift))
    };
    let (a, b, c, d) = (
        pos(seed, 2)?,
        pos(seed + 1, 1)?,
        pos(seed + 2, 2)?,
        pos(seed + 3, 1)?,
    );
    let m11 = a.zip_map(&c, |x, y| C64::new(x, y));
    let m22 = b.zip_map(&d, |x, y| C64::new(x, y));
    Ok(HiggsField::from_components(
        &m11,
        &ComplexField::constant(grid, C64::new(0.0, 0.0)),
        &m22,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single_mode(grid: TorusGrid, k: (i64, i64), m: CSym2) -> HiggsField {
        let comp = |c: C64| {
            let mut modes = Modes::zeros(grid);
            modes.set(k.0, k.1, c);
            modes.to_field()
        };
        HiggsField::from_components(&comp(m.m11), &comp(m.m12), &comp(m.m22))
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let g = TorusGrid::square(8).unwrap();
        let xi = HiggsField::constant(g, CSym2::new(one(), C64::new(0.3, 0.1), one()));
        assert!(complex_mm_residual(&xi).sup_norm() < 1e-12);
    }

    #[test]
    fn single_mode_residual_amplitude() {
        let g = TorusGrid::square(8).unwrap();
        let zero = C64::new(0.0, 0.0);
        let xi = single_mode(g, (1, 0), CSym2::new(one(), zero, zero));
        let r = complex_mm_residual(&xi).to_modes();
        assert!((r.get(1, 0) - C64::new(-4.0 * PI * PI, 0.0)).norm() < 1e-12);
        let xi = single_mode(g, (1, 0), CSym2::new(zero, one(), zero));
        assert!(complex_mm_residual(&xi).sup_norm() < 1e-12);
    }

    #[test]
    fn projection_kills_kk_transpose() {
        let g = TorusGrid::square(8).unwrap();
        let zero = C64::new(0.0, 0.0);
        let xi = single_mode(g, (1, 0), CSym2::new(one(), zero, zero));
        let p = project_complex_mm(&xi);
        assert!(p.sup_entry() < 1e-15);
    }

    #[test]
    fn projection_is_idempotent_and_exact() {
        let g = TorusGrid::square(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c: Vec<ComplexField> = (0..3)
            .map(|_| random_complex_modes(g, &mut rng, 7).to_field())
            .collect();
        let xi = HiggsField::from_components(&c[0], &c[1], &c[2]);
        let p = project_complex_mm(&xi);
        assert!(complex_mm_residual(&p).sup_norm() < 1e-11);
        let pp = project_complex_mm(&p);
        let diff = pp.xi.zip_map(&p.xi, |a, b| (a - b).max_abs());
        assert!(diff.values.iter().all(|d| *d < 1e-13));
        assert!(p.l2_norm() <= xi.l2_norm() + 1e-14);
    }

    #[test]
    fn random_solution_contract() {
        let g = TorusGrid::square(16).unwrap();
        let a = random_solution(g, 8, 4, 0.2).unwrap();
        assert_eq!(a, random_solution(g, 8, 4, 0.2).unwrap());
        assert!(complex_mm_residual(&a).sup_norm() < 1e-11);
        assert!(a.sup_entry() <= 0.2 + 1e-15);
        let b = random_solution(g, 8, 4, 0.4).unwrap();
        let diff =
            b.xi.zip_map(&a.xi, |x, y| (x - y.scale(C64::new(2.0, 0.0))).max_abs());
        assert!(diff.values.iter().all(|d| *d < 1e-15));
    }

    #[test]
    fn radius_of_diagonal_field() {
        let g = TorusGrid::square(8).unwrap();
        let u = SymplecticPotential::flat(g);
        let a = C64::new(0.3, 0.4);
        let xi = HiggsField::constant(g, CSym2::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        let r = spectral_radius_field(&xi, &u).unwrap();
        assert!(r.values.iter().all(|v| (v - a.norm_sqr()).abs() < 1e-15));
        let z = HiggsField::zero(g);
        assert_eq!(spectral_radius_field(&z, &u).unwrap().sup_norm(), 0.0);
        assert_eq!(xi_norm_field(&z, &u).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn file_round_trip() {
        let g = TorusGrid::square(8).unwrap();
        let xi = random_solution(g, 1, 2, 0.1).unwrap();
        let back = HiggsField::from_file(&xi.to_file()).unwrap();
        assert_eq!(back, xi);
    }
}
