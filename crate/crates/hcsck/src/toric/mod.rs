//! Toric surfaces: Delzant polygons, Guillemin potentials, the boundary
//! measure, the Donaldson–Futaki functional and the toric HK-energy.

pub mod geometry;
pub mod jet;
pub mod poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PolytopeError, Result};
use crate::spectral::{bg_function, matrix_spectrum, CMat2, C64};
use geometry::{polygon_rule, segment_rule, Point, Polygon};
use jet::{Jet, JetMat};
use poly::{Poly2, SymPoly};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: [i64; 2],
    pub offset: f64,
}

impl Facet {
    /// `ℓ(y) = ⟨ν, y⟩ + λ`.
    pub fn ell(&self, y: Point) -> f64 {
        self.normal[0] as f64 * y[0] + self.normal[1] as f64 * y[1] + self.offset
    }

    pub fn normal_f64(&self) -> [f64; 2] {
        [self.normal[0] as f64, self.normal[1] as f64]
    }

    pub fn norm_sq(&self) -> f64 {
        (self.normal[0] * self.normal[0] + self.normal[1] * self.normal[1]) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub facets: Vec<Facet>,
}

/// Edge of the polygon: facet index and its two vertex indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub facet: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelzantPolytope {
    facets: Vec<Facet>,
    vertices: Vec<Point>,
    edges: Vec<Edge>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Checks the defining inequalities and builds vertices and edges.
pub fn validate_delzant(facets: &[Facet]) -> Result<DelzantPolytope> {
    for (r, f) in facets.iter().enumerate() {
        if gcd(f.normal[0], f.normal[1]) != 1 {
            return Err(PolytopeError::NonPrimitive {
                facet: r,
                normal: f.normal,
            }
            .into());
        }
    }
    let recedes = |d: [f64; 2]| {
        facets
            .iter()
            .all(|f| f.normal_f64()[0] * d[0] + f.normal_f64()[1] * d[1] >= 0.0)
    };
    let unbounded = facets.is_empty()
        || facets.iter().any(|f| {
            let [a, b] = f.normal_f64();
            recedes([-b, a]) || recedes([b, -a])
        });
    if unbounded {
        return Err(PolytopeError::Unbounded.into());
    }
    let scale = 1.0 + facets.iter().fold(0.0f64, |m, f| m.max(f.offset.abs()));
    let tol = 1e-9 * scale;
    let mut vertices: Vec<Point> = Vec::new();
    for (i, fi) in facets.iter().enumerate() {
        for fj in &facets[i + 1..] {
            let det = (fi.normal[0] * fj.normal[1] - fi.normal[1] * fj.normal[0]) as f64;
            if det == 0.0 {
                continue;
            }
            let y = [
                (-fi.offset * fj.normal[1] as f64 + fj.offset * fi.normal[1] as f64) / det,
                (-fj.offset * fi.normal[0] as f64 + fi.offset * fj.normal[0] as f64) / det,
            ];
            if facets.iter().all(|f| f.ell(y) >= -tol)
                && !vertices
                    .iter()
                    .any(|v| (v[0] - y[0]).abs() < tol && (v[1] - y[1]).abs() < tol)
            {
                vertices.push(y);
            }
        }
    }
    if vertices.len() < 3 {
        return Err(PolytopeError::Empty.into());
    }
    let n = vertices.len() as f64;
    let c = [
        vertices.iter().map(|v| v[0]).sum::<f64>() / n,
        vertices.iter().map(|v| v[1]).sum::<f64>() / n,
    ];
    vertices.sort_by(|a, b| {
        let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
        let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
        ta.partial_cmp(&tb).unwrap()
    });
    if Polygon::new(vertices.clone()).area() <= tol {
        return Err(PolytopeError::Empty.into());
    }
    let active = |y: Point| -> Vec<usize> {
        (0..facets.len())
            .filter(|&r| facets[r].ell(y).abs() < tol)
            .collect()
    };
    let nv = vertices.len();
    let mut edges = Vec::with_capacity(nv);
    for i in 0..nv {
        let j = (i + 1) % nv;
        let (ai, aj) = (active(vertices[i]), active(vertices[j]));
        let facet = ai
            .iter()
            .copied()
            .find(|r| aj.contains(r))
            .ok_or(PolytopeError::Empty)?;
        edges.push(Edge {
            facet,
            start: i,
            end: j,
        });
    }
    for r in 0..facets.len() {
        if !edges.iter().any(|e| e.facet == r) {
            return Err(PolytopeError::Redundant { facet: r }.into());
        }
    }
    for v in &vertices {
        let a = active(*v);
        let det = if a.len() == 2 {
            let (p, q) = (facets[a[0]].normal, facets[a[1]].normal);
            p[0] * q[1] - p[1] * q[0]
        } else {
            0
        };
        if det.abs() != 1 {
            return Err(PolytopeError::NotDelzant { vertex: *v, det }.into());
        }
    }
    Ok(DelzantPolytope {
        facets: facets.to_vec(),
        vertices,
        edges,
    })
}

impl DelzantPolytope {
    pub fn new(facets: Vec<Facet>) -> Result<Self> {
        validate_delzant(&facets)
    }

    pub fn unit_square() -> Self {
        let f = |normal, offset| Facet { normal, offset };
        Self::new(vec![
            f([1, 0], 0.0),
            f([-1, 0], 1.0),
            f([0, 1], 0.0),
            f([0, -1], 1.0),
        ])
        .unwrap()
    }

    pub fn standard_simplex() -> Self {
        let f = |normal, offset| Facet { normal, offset };
        Self::new(vec![f([1, 0], 0.0), f([0, 1], 0.0), f([-1, -1], 1.0)]).unwrap()
    }

    pub fn from_file(f: &PolytopeFile) -> Result<Self> {
        Self::new(f.facets.clone())
    }

    pub fn to_file(&self) -> PolytopeFile {
        PolytopeFile {
            facets: self.facets.clone(),
        }
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn polygon(&self) -> Polygon {
        Polygon::new(self.vertices.clone())
    }

    /// `tP`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale {t} must be positive"
            )));
        }
        Self::new(
            self.facets
                .iter()
                .map(|f| Facet {
                    offset: f.offset * t,
                    ..*f
                })
                .collect(),
        )
    }

    pub fn is_interior(&self, y: Point) -> bool {
        self.facets.iter().all(|f| f.ell(y) > 0.0)
    }

    /// `P_δ = {ℓʳ ≥ δ for all r}`.
    pub fn inner(&self, delta: f64) -> Polygon {
        self.facets.iter().fold(self.polygon(), |p, f| {
            p.clip(f.normal_f64(), f.offset - delta)
        })
    }

    fn edge_points(&self, e: &Edge) -> (Point, Point) {
        (self.vertices[e.start], self.vertices[e.end])
    }
}

/// Weight of the boundary measure on a facet relative to arc length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMeasure {
    /// `|∇ℓ|⁻²`.
    #[default]
    InverseSquareNorm,
    /// `|∇ℓ|⁻¹`, the measure for which `dσ ∧ dℓ` is Lebesgue measure.
    InverseNorm,
}

impl BoundaryMeasure {
    pub fn weight(self, f: &Facet) -> f64 {
        match self {
            BoundaryMeasure::InverseSquareNorm => 1.0 / f.norm_sq(),
            BoundaryMeasure::InverseNorm => 1.0 / f.norm_sq().sqrt(),
        }
    }
}

/// Gauss order per panel and number of dyadic refinement levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub order: usize,
    pub levels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            order: 10,
            levels: 0,
        }
    }
}

pub fn sigma_integral(
    p: &DelzantPolytope,
    measure: BoundaryMeasure,
    quad: Quadrature,
    f: impl Fn(Point) -> f64,
) -> f64 {
    p.edges
        .iter()
        .map(|e| {
            let (a, b) = p.edge_points(e);
            let w = measure.weight(&p.facets[e.facet]);
            w * segment_rule(a, b, quad.order, quad.levels)
                .iter()
                .map(|(y, wt)| wt * f(*y))
                .sum::<f64>()
        })
        .sum()
}

pub fn lebesgue_integral(p: &DelzantPolytope, quad: Quadrature, f: impl Fn(Point) -> f64) -> f64 {
    polygon_integral(&p.polygon(), quad, f)
}

fn polygon_integral(poly: &Polygon, quad: Quadrature, f: impl Fn(Point) -> f64) -> f64 {
    polygon_rule(poly, quad.order, quad.levels)
        .iter()
        .map(|(y, w)| w * f(*y))
        .sum()
}

/// `C = σ(∂P)/|P|`, the value making `L_C(1) = 0`.
pub fn futaki_constant(p: &DelzantPolytope, measure: BoundaryMeasure) -> f64 {
    let perimeter: f64 = p
        .edges
        .iter()
        .map(|e| {
            let (a, b) = p.edge_points(e);
            measure.weight(&p.facets[e.facet])
                * ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        })
        .sum();
    perimeter / p.polygon().area()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub a: [f64; 2],
    pub b: f64,
}

impl AffinePiece {
    pub fn eval(&self, y: Point) -> f64 {
        self.a[0] * y[0] + self.a[1] * y[1] + self.b
    }
}

/// Maximum of finitely many affine functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLConvexFn {
    pub pieces: Vec<AffinePiece>,
}

impl PLConvexFn {
    pub fn affine(a: [f64; 2], b: f64) -> Self {
        Self {
            pieces: vec![AffinePiece { a, b }],
        }
    }

    /// `max(0, ⟨a, y⟩ + b)`.
    pub fn crease(a: [f64; 2], b: f64) -> Self {
        Self {
            pieces: vec![
                AffinePiece {
                    a: [0.0, 0.0],
                    b: 0.0,
                },
                AffinePiece { a, b },
            ],
        }
    }

    pub fn eval(&self, y: Point) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.eval(y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn distinct_pieces(&self) -> Vec<AffinePiece> {
        let mut out: Vec<AffinePiece> = Vec::new();
        for p in &self.pieces {
            if !out.contains(p) {
                out.push(*p);
            }
        }
        out
    }

    /// Exact `∫_P f`: each piece is integrated over the cell where it is maximal.
    pub fn lebesgue_integral(&self, p: &DelzantPolytope) -> f64 {
        let pieces = self.distinct_pieces();
        pieces
            .iter()
            .enumerate()
            .map(|(k, pk)| {
                let cell = pieces
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .fold(p.polygon(), |poly, (_, pj)| {
                        poly.clip([pk.a[0] - pj.a[0], pk.a[1] - pj.a[1]], pk.b - pj.b)
                    });
                cell.integrate_affine(pk.a, pk.b)
            })
            .sum()
    }

    /// Exact `∫_∂P f dσ`, splitting each facet at the breakpoints of `f`.
    pub fn sigma_integral(&self, p: &DelzantPolytope, measure: BoundaryMeasure) -> f64 {
        let pieces = self.distinct_pieces();
        p.edges
            .iter()
            .map(|e| {
                let (a, b) = p.edge_points(e);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let line: Vec<(f64, f64)> = pieces
                    .iter()
                    .map(|pc| (pc.eval(a), pc.eval(b) - pc.eval(a)))
                    .collect();
                let mut ts = vec![0.0, 1.0];
                for (i, (ai, bi)) in line.iter().enumerate() {
                    for (aj, bj) in &line[i + 1..] {
                        if bi != bj {
                            let t = (aj - ai) / (bi - bj);
                            if t > 0.0 && t < 1.0 {
                                ts.push(t);
                            }
                        }
                    }
                }
                ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
                let f = |t: f64| {
                    line.iter()
                        .map(|(a0, a1)| a0 + a1 * t)
                        .fold(f64::NEG_INFINITY, f64::max)
                };
                let integral: f64 = ts
                    .windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (f(w[0]) + f(w[1])))
                    .sum();
                measure.weight(&p.facets[e.facet]) * len * integral
            })
            .sum()
    }
}

/// `L_C(f) = ∫_∂P f dσ − C ∫_P f dμ` for piecewise-linear convex `f`.
pub fn donaldson_functional(
    p: &DelzantPolytope,
    f: &PLConvexFn,
    c: f64,
    measure: BoundaryMeasure,
) -> f64 {
    f.sigma_integral(p, measure) - c * f.lebesgue_integral(p)
}

/// `L_C` for a smooth function by quadrature.
pub fn donaldson_functional_smooth(
    p: &DelzantPolytope,
    c: f64,
    measure: BoundaryMeasure,
    quad: Quadrature,
    f: impl Fn(Point) -> f64,
) -> f64 {
    sigma_integral(p, measure, quad, &f) - c * lebesgue_integral(p, quad, &f)
}

/// `(L_C(y¹), L_C(y²))` with `C` from [`futaki_constant`].
pub fn futaki_vector(p: &DelzantPolytope, measure: BoundaryMeasure) -> [f64; 2] {
    let c = futaki_constant(p, measure);
    [
        donaldson_functional(p, &PLConvexFn::affine([1.0, 0.0], 0.0), c, measure),
        donaldson_functional(p, &PLConvexFn::affine([0.0, 1.0], 0.0), c, measure),
    ]
}

/// Threshold below which the probe reports a destabilizing crease.
pub const PROBE_DESTABILIZING: f64 = -1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub min: f64,
    pub argmin_a: [f64; 2],
    pub argmin_b: f64,
    pub evaluated: usize,
    pub destabilized: bool,
}

/// Primitive integer directions with entries in `{−2, …, 2}`.
pub fn probe_directions() -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            if (a, b) != (0, 0) && gcd(a, b) == 1 {
                out.push([a as f64, b as f64]);
            }
        }
    }
    out
}

/// Minimum of `L_C` over creases `max(0, ⟨a, y⟩ + b)` whose crease line meets
/// the interior, at `samples` evenly spaced levels per direction.
pub fn stability_probe(
    p: &DelzantPolytope,
    measure: BoundaryMeasure,
    samples: usize,
) -> StabilityReport {
    let c = futaki_constant(p, measure);
    let mut best = StabilityReport {
        min: f64::INFINITY,
        argmin_a: [0.0; 2],
        argmin_b: 0.0,
        evaluated: 0,
        destabilized: false,
    };
    for a in probe_directions() {
        let vals: Vec<f64> = p
            .vertices
            .iter()
            .map(|v| a[0] * v[0] + a[1] * v[1])
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for k in 1..=samples {
            let b = -(lo + (hi - lo) * k as f64 / (samples + 1) as f64);
            let value = donaldson_functional(p, &PLConvexFn::crease(a, b), c, measure);
            best.evaluated += 1;
            if value < best.min {
                best.min = value;
                best.argmin_a = a;
                best.argmin_b = b;
            }
        }
    }
    best.destabilized = best.min < PROBE_DESTABILIZING;
    best
}

/// `u_P = Σ ℓʳ log ℓʳ`.
pub fn guillemin_potential(p: &DelzantPolytope, y: Point) -> Result<f64> {
    if !p.is_interior(y) {
        return Err(Error::Domain(format!(
            "{y:?} is not interior to the polytope"
        )));
    }
    Ok(p.facets.iter().map(|f| f.ell(y) * f.ell(y).ln()).sum())
}

/// Potential `u = u_P + h` with values allowed on the boundary (`0 log 0 = 0`).
fn potential_value(p: &DelzantPolytope, h: &Poly2, y: Point) -> f64 {
    p.facets
        .iter()
        .map(|f| {
            let l = f.ell(y).max(0.0);
            if l == 0.0 {
                0.0
            } else {
                l * l.ln()
            }
        })
        .sum::<f64>()
        + h.eval(y).re
}

/// Hessian of `u_P + h` with its first and second derivatives.
pub fn metric_jet(p: &DelzantPolytope, h: &Poly2, y: Point) -> JetMat {
    let [h11, h12, h22] = h.hessian();
    let mut g = [[h11.jet(y), h12.jet(y)], [h12.jet(y), h22.jet(y)]];
    for f in &p.facets {
        let r = Jet::affine(f.normal_f64(), f.offset, y).recip();
        let n = f.normal_f64();
        for a in 0..2 {
            for b in 0..2 {
                g[a][b] = g[a][b] + r * (n[a] * n[b]);
            }
        }
    }
    JetMat(g)
}

/// `D²(u_P + h)` at an interior point.
pub fn guillemin_hessian(p: &DelzantPolytope, y: Point, h: &Poly2) -> Result<[[f64; 2]; 2]> {
    if !p.is_interior(y) {
        return Err(Error::Domain(format!(
            "{y:?} is not interior to the polytope"
        )));
    }
    let g = metric_jet(p, h, y).values();
    Ok([[g.0[0][0].re, g.0[0][1].re], [g.0[1][0].re, g.0[1][1].re]])
}

fn check_positive(g: &[[f64; 2]; 2], y: Point) -> Result<()> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(g[0][0] > 0.0 && det > 0.0) {
        return Err(Error::Domain(format!(
            "Hessian is not positive-definite at {y:?}"
        )));
    }
    Ok(())
}

/// Pointwise data built from `u = u_P + h` and `ξ = G⁻¹ΦG⁻¹`.
struct PointData {
    ginv: JetMat,
    xi: JetMat,
    /// `√(1 − X)G⁻¹` with `X = G⁻¹ΦG⁻¹Φ̄`.
    m: JetMat,
    x: CMat2,
}

fn point_data(p: &DelzantPolytope, h: &Poly2, phi: &SymPoly, y: Point) -> Result<PointData> {
    let g = metric_jet(p, h, y);
    let gv = g.values();
    check_positive(
        &[
            [gv.0[0][0].re, gv.0[0][1].re],
            [gv.0[1][0].re, gv.0[1][1].re],
        ],
        y,
    )?;
    let ginv = g.inverse();
    let ph = phi.jet(y);
    let xi = ginv.mul(&ph).mul(&ginv);
    let x = xi.mul(&ph.conj());
    let s = matrix_spectrum(&x.values())?;
    if s.delta_plus >= 1.0 {
        return Err(Error::Domain(format!(
            "spectral radius {} ≥ 1 at {y:?}",
            s.delta_plus
        )));
    }
    let m = JetMat::identity().sub(&x).sqrt().mul(&ginv);
    Ok(PointData {
        ginv,
        xi,
        m,
        x: x.values(),
    })
}

fn trace_pair(m: &JetMat, f: &[C64; 3]) -> f64 {
    let a = &m.0;
    (a[0][0].v * f[0] + (a[0][1].v + a[1][0].v) * f[1] + a[1][1].v * f[2]).re
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelReport {
    pub facet: usize,
    pub decay_order: f64,
    /// `(ℓ, ‖G⁻¹∇ℓ‖)` along the inward ray from the facet midpoint.
    pub samples: Vec<(f64, f64)>,
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    num / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

/// Log-log decay order of `‖G⁻¹∇ℓʳ‖` against `ℓʳ` approaching facet `r`.
pub fn boundary_kernel_check(
    p: &DelzantPolytope,
    h: &Poly2,
    facet: usize,
    samples: usize,
) -> Result<KernelReport> {
    let e = p
        .edges
        .iter()
        .find(|e| e.facet == facet)
        .ok_or_else(|| Error::InvalidArgument(format!("no facet {facet}")))?;
    let (a, b) = p.edge_points(e);
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let f = p.facets[facet];
    let nu = f.normal_f64();
    let norm = f.norm_sq().sqrt();
    let depth = 0.1 * (p.polygon().area()).sqrt();
    let pts = (0..samples.max(2))
        .map(|k| {
            let s = depth * 0.5f64.powi(k as i32 + 1);
            let y = [mid[0] + s * nu[0] / norm, mid[1] + s * nu[1] / norm];
            let g = guillemin_hessian(p, y, h)?;
            check_positive(&g, y)?;
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let v = [
                (g[1][1] * nu[0] - g[0][1] * nu[1]) / det,
                (-g[1][0] * nu[0] + g[0][0] * nu[1]) / det,
            ];
            Ok((f.ell(y), (v[0] * v[0] + v[1] * v[1]).sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelReport {
        facet,
        decay_order: fit_slope(&pts),
        samples: pts,
    })
}

/// `‖G⁻¹‖` at points approaching `vertex` from the centroid.
pub fn vertex_kernel_trace(
    p: &DelzantPolytope,
    h: &Poly2,
    vertex: usize,
    samples: usize,
) -> Result<Vec<f64>> {
    let c = p.polygon().centroid();
    let v = p.vertices[vertex];
    (0..samples)
        .map(|k| {
            let s = 0.5f64.powi(k as i32 + 1);
            let y = [v[0] + s * (c[0] - v[0]), v[1] + s * (c[1] - v[1])];
            let g = guillemin_hessian(p, y, h)?;
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let gi = [g[1][1] / det, -g[0][1] / det, g[0][0] / det];
            Ok((gi[0] * gi[0] + 2.0 * gi[1] * gi[1] + gi[2] * gi[2]).sqrt())
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IbpReport {
    pub defect: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `(δ, lhs, rhs)` on the inner polygons.
    pub trace: Vec<(f64, f64, f64)>,
}

/// Shrinking parameters for the inner polygons.
pub const IBP_DELTAS: [f64; 5] = [0.04, 0.02, 0.01, 0.005, 0.0025];

/// Polynomial extrapolation to `δ = 0` through the given samples (Neville).
pub fn extrapolate_to_zero(pts: &[(f64, f64)]) -> f64 {
    let mut p: Vec<f64> = pts.iter().map(|x| x.1).collect();
    let xs: Vec<f64> = pts.iter().map(|x| x.0).collect();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

fn ibp_report(trace: Vec<(f64, f64, f64)>) -> IbpReport {
    let lhs = extrapolate_to_zero(&trace.iter().map(|t| (t.0, t.1)).collect::<Vec<_>>());
    let rhs = extrapolate_to_zero(&trace.iter().map(|t| (t.0, t.2)).collect::<Vec<_>>());
    IbpReport {
        defect: (lhs - rhs).abs(),
        lhs,
        rhs,
        trace,
    }
}

const IBP_QUAD: Quadrature = Quadrature {
    order: 12,
    levels: 2,
};

/// `∫ (ξ^{ij})_{,ij} f` against `∫ ξ^{ij} f_{,ij}` for `ξ = G⁻¹ΦG⁻¹`.
pub fn intbyparts_complex(
    p: &DelzantPolytope,
    h: &Poly2,
    phi: &SymPoly,
    f: &Poly2,
) -> Result<IbpReport> {
    let [f11, f12, f22] = f.hessian();
    let mut trace = Vec::new();
    for &delta in &IBP_DELTAS {
        let poly = p.inner(delta);
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for (y, w) in polygon_rule(&poly, IBP_QUAD.order, IBP_QUAD.levels) {
            let d = point_data(p, h, phi, y)?;
            let fv = f.eval(y);
            lhs += w * (d.xi.double_divergence() * fv).re;
            rhs += w * trace_pair(&d.xi, &[f11.eval(y), f12.eval(y), f22.eval(y)]);
        }
        trace.push((delta, lhs, rhs));
    }
    Ok(ibp_report(trace))
}

/// `∫ Tr(√(1−X)G⁻¹ D²f)` against `∫ f (√(1−X)G⁻¹)_{,ab} + ∫_∂P f dσ`.
pub fn intbyparts_real(
    p: &DelzantPolytope,
    h: &Poly2,
    phi: &SymPoly,
    f: &Poly2,
    measure: BoundaryMeasure,
) -> Result<IbpReport> {
    let [f11, f12, f22] = f.hessian();
    let boundary = sigma_integral(
        p,
        measure,
        Quadrature {
            order: 12,
            levels: 0,
        },
        |y| f.eval(y).re,
    );
    let mut trace = Vec::new();
    for &delta in &IBP_DELTAS {
        let poly = p.inner(delta);
        let (mut lhs, mut rhs) = (0.0, boundary);
        for (y, w) in polygon_rule(&poly, IBP_QUAD.order, IBP_QUAD.levels) {
            let d = point_data(p, h, phi, y)?;
            lhs += w * trace_pair(&d.m, &[f11.eval(y), f12.eval(y), f22.eval(y)]);
            rhs += w * (d.m.double_divergence() * f.eval(y)).re;
        }
        trace.push((delta, lhs, rhs));
    }
    Ok(ibp_report(trace))
}

/// Refinement levels used for boundary-singular integrals.
pub const ENERGY_LEVELS: [usize; 3] = [16, 17, 18];
const ENERGY_ORDER: usize = 8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    /// `(levels, value)` before extrapolation.
    pub trace: Vec<(usize, f64)>,
}

fn energy_at_level(
    p: &DelzantPolytope,
    h: &Poly2,
    phi: &SymPoly,
    measure: BoundaryMeasure,
    levels: usize,
) -> Result<f64> {
    let c = futaki_constant(p, measure);
    let quad = Quadrature {
        order: ENERGY_ORDER,
        levels,
    };
    let boundary = sigma_integral(p, measure, quad, |y| potential_value(p, h, y));
    let mut interior = 0.0;
    for (y, w) in polygon_rule(&p.polygon(), quad.order, quad.levels) {
        let d = point_data(p, h, phi, y)?;
        let det_ginv = d.ginv.det().v.re;
        let rho = bg_function(matrix_spectrum(&d.x)?)?;
        interior += w * (-c * potential_value(p, h, y) + det_ginv.ln() - rho);
    }
    Ok(boundary + interior)
}

/// `F̂ = ∫_∂P u dσ − C∫u − ∫ log det D²u − ∫ ρ(G⁻¹ΦG⁻¹Φ̄)` for `u = u_P + h`,
/// extrapolated in the dyadic refinement level.
pub fn toric_hk_energy(
    p: &DelzantPolytope,
    h: &Poly2,
    phi: &SymPoly,
    measure: BoundaryMeasure,
) -> Result<EnergyReport> {
    let trace = ENERGY_LEVELS
        .iter()
        .map(|&l| Ok((l, energy_at_level(p, h, phi, measure, l)?)))
        .collect::<Result<Vec<_>>>()?;
    let n = trace.len();
    // Panel error of the log singularity halves per level.
    let value = 2.0 * trace[n - 1].1 - trace[n - 2].1;
    Ok(EnergyReport { value, trace })
}

/// `∫_∂P f dσ − C∫f − ∫ Tr(√(1−X)G⁻¹D²f)`, the derivative of [`toric_hk_energy`]
/// along `h ↦ h + t f`.
pub fn toric_energy_derivative(
    p: &DelzantPolytope,
    h: &Poly2,
    phi: &SymPoly,
    f: &Poly2,
    measure: BoundaryMeasure,
) -> Result<f64> {
    let c = futaki_constant(p, measure);
    let quad = Quadrature {
        order: 12,
        levels: 2,
    };
    let [f11, f12, f22] = f.hessian();
    let mut acc = sigma_integral(p, measure, quad, |y| f.eval(y).re);
    for (y, w) in polygon_rule(&p.polygon(), quad.order, quad.levels) {
        let d = point_data(p, h, phi, y)?;
        acc -= w * (c * f.eval(y).re + trace_pair(&d.m, &[f11.eval(y), f12.eval(y), f22.eval(y)]));
    }
    Ok(acc)
}

/// `−∫ f·(C + (√(1−X)G⁻¹)_{,ab})`, the pairing of `f` with the toric residual.
pub fn residual_pairing(
    p: &DelzantPolytope,
    h: &Poly2,
    phi: &SymPoly,
    f: &Poly2,
    measure: BoundaryMeasure,
) -> Result<f64> {
    let c = futaki_constant(p, measure);
    let quad = Quadrature {
        order: 12,
        levels: 2,
    };
    let mut acc = 0.0;
    for (y, w) in polygon_rule(&p.polygon(), quad.order, quad.levels) {
        let d = point_data(p, h, phi, y)?;
        acc -= w * f.eval(y).re * (c + d.m.double_divergence().re);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn facet(normal: [i64; 2], offset: f64) -> Facet {
        Facet { normal, offset }
    }

    #[test]
    fn named_polytope_errors() {
        let err = |f: Vec<Facet>| match validate_delzant(&f) {
            Err(Error::Polytope(e)) => e,
            other => panic!("{other:?}"),
        };
        assert!(matches!(
            err(vec![
                facet([2, 0], 0.0),
                facet([-1, 0], 1.0),
                facet([0, 1], 0.0),
                facet([0, -1], 1.0)
            ]),
            PolytopeError::NonPrimitive { facet: 0, .. }
        ));
        assert_eq!(
            err(vec![facet([1, 0], 0.0), facet([0, 1], 0.0)]),
            PolytopeError::Unbounded
        );
        assert_eq!(
            err(vec![
                facet([1, 0], -2.0),
                facet([-1, 0], 1.0),
                facet([0, 1], 0.0),
                facet([0, -1], 1.0)
            ]),
            PolytopeError::Empty
        );
        assert!(matches!(
            err(vec![
                facet([1, 0], 0.0),
                facet([0, 1], 0.0),
                facet([-1, -2], 2.0)
            ]),
            PolytopeError::NotDelzant { .. }
        ));
        assert!(matches!(
            err(vec![
                facet([1, 0], 0.0),
                facet([-1, 0], 1.0),
                facet([0, 1], 0.0),
                facet([0, -1], 1.0),
                facet([-1, -1], 5.0)
            ]),
            PolytopeError::Redundant { facet: 4 }
        ));
    }

    #[test]
    fn square_and_simplex_shapes() {
        let s = DelzantPolytope::unit_square();
        assert_eq!(s.vertices().len(), 4);
        assert_eq!(s.edges().len(), 4);
        let t = DelzantPolytope::standard_simplex();
        assert_eq!(t.vertices().len(), 3);
        assert!((t.polygon().area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn guillemin_values() {
        let s = DelzantPolytope::unit_square();
        assert!((guillemin_potential(&s, [0.5, 0.5]).unwrap() + 2.0 * 2f64.ln()).abs() < 1e-15);
        let g = guillemin_hessian(&s, [0.5, 0.5], &Poly2::zero()).unwrap();
        assert_eq!(g, [[4.0, 0.0], [0.0, 4.0]]);
        let t = DelzantPolytope::standard_simplex();
        let third = 1.0 / 3.0;
        assert!((guillemin_potential(&t, [third, third]).unwrap() + 3f64.ln()).abs() < 1e-15);
        assert!(guillemin_potential(&t, [0.0, 0.5]).is_err());
    }

    #[test]
    fn determinant_law_near_facets() {
        let t = DelzantPolytope::standard_simplex();
        for k in 2..14 {
            let s = 0.5f64.powi(k);
            for y in [[s, 0.4], [0.3, s], [0.5 - s, 0.5 - s]] {
                let g = guillemin_hessian(&t, y, &Poly2::zero()).unwrap();
                let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
                let prod: f64 = t.facets().iter().map(|f| f.ell(y)).product();
                let v = det * prod;
                assert!(v > 0.9 && v < 1.1, "{v}");
            }
        }
    }

    #[test]
    fn sigma_and_lebesgue_integrals() {
        let s = DelzantPolytope::unit_square();
        let m = BoundaryMeasure::default();
        assert!((sigma_integral(&s, m, Quadrature::default(), |_| 1.0) - 4.0).abs() < 1e-14);
        assert!((lebesgue_integral(&s, Quadrature::default(), |_| 1.0) - 1.0).abs() < 1e-14);
        let t = DelzantPolytope::standard_simplex();
        let expect = 2.0 + 0.5 * 2f64.sqrt();
        assert!((sigma_integral(&t, m, Quadrature::default(), |_| 1.0) - expect).abs() < 1e-14);
        let y5 = lebesgue_integral(&t, Quadrature::default(), |y| y[0].powi(5));
        assert!((y5 - 1.0 / 42.0).abs() < 1e-14);
    }

    #[test]
    fn futaki_constant_scales_inversely() {
        for p in [
            DelzantPolytope::unit_square(),
            DelzantPolytope::standard_simplex(),
        ] {
            let c = futaki_constant(&p, BoundaryMeasure::default());
            let c3 = futaki_constant(&p.scaled(3.0).unwrap(), BoundaryMeasure::default());
            assert!((c3 - c / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pl_integrals_are_exact() {
        let s = DelzantPolytope::unit_square();
        let f = PLConvexFn::crease([1.0, 0.0], -0.5);
        assert!((f.lebesgue_integral(&s) - 0.125).abs() < 1e-15);
        assert!((f.sigma_integral(&s, BoundaryMeasure::default()) - 0.75).abs() < 1e-15);
        let g = PLConvexFn {
            pieces: vec![
                AffinePiece {
                    a: [1.0, 0.0],
                    b: 0.0,
                },
                AffinePiece {
                    a: [0.0, 1.0],
                    b: 0.0,
                },
                AffinePiece {
                    a: [0.0, 1.0],
                    b: 0.0,
                },
            ],
        };
        // ∫ max(y¹, y²) over the square is 2/3.
        assert!((g.lebesgue_integral(&s) - 2.0 / 3.0).abs() < 1e-15);
        let q = lebesgue_integral(
            &s,
            Quadrature {
                order: 10,
                levels: 0,
            },
            |y| g.eval(y),
        );
        assert!((q - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn extrapolation_is_exact_on_quadratics() {
        let pts: Vec<(f64, f64)> = IBP_DELTAS
            .iter()
            .map(|&d| (d, 1.5 - 2.0 * d + 7.0 * d * d))
            .collect();
        assert!((extrapolate_to_zero(&pts) - 1.5).abs() < 1e-13);
    }
}
