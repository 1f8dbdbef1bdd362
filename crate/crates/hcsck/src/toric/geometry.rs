//! Convex polygons: clipping, exact moments and graded Gauss quadrature.

use gauss_quad::GaussLegendre;

pub type Point = [f64; 2];

/// Convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3 || self.area() <= 0.0
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self
            .edges()
            .map(|(p, q)| p[0] * q[1] - q[0] * p[1])
            .sum::<f64>()
    }

    /// `(∫ y₁, ∫ y₂)`.
    pub fn first_moments(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (p, q) in self.edges() {
            let cross = p[0] * q[1] - q[0] * p[1];
            m[0] += (p[0] + q[0]) * cross;
            m[1] += (p[1] + q[1]) * cross;
        }
        [m[0] / 6.0, m[1] / 6.0]
    }

    pub fn centroid(&self) -> Point {
        let a = self.area();
        let m = self.first_moments();
        [m[0] / a, m[1] / a]
    }

    /// Exact `∫ (⟨a, y⟩ + b)`.
    pub fn integrate_affine(&self, a: [f64; 2], b: f64) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let m = self.first_moments();
        a[0] * m[0] + a[1] * m[1] + b * self.area()
    }

    /// Part where `⟨a, y⟩ + b ≥ 0` (Sutherland–Hodgman).
    pub fn clip(&self, a: [f64; 2], b: f64) -> Polygon {
        let val = |p: Point| a[0] * p[0] + a[1] * p[1] + b;
        let mut out = Vec::new();
        for (p, q) in self.edges() {
            let (vp, vq) = (val(p), val(q));
            if vp >= 0.0 {
                out.push(p);
            }
            if (vp >= 0.0) != (vq >= 0.0) {
                let t = vp / (vp - vq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        out.dedup_by(|x, y| (x[0] - y[0]).abs() < 1e-15 && (x[1] - y[1]).abs() < 1e-15);
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        Polygon::new(out)
    }
}

/// Gauss–Legendre panels on `[0, 1]` with dyadic refinement toward the ends.
#[derive(Clone, Debug)]
pub struct GradedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GradedRule {
    /// `levels` dyadic panels toward each end flagged in `(toward_zero, toward_one)`.
    pub fn new(order: usize, levels: usize, toward_zero: bool, toward_one: bool) -> Self {
        let mut breaks = vec![0.0, 1.0];
        let push_graded = |breaks: &mut Vec<f64>, from_one: bool| {
            for k in 1..=levels {
                let x = 0.5f64.powi(k as i32);
                breaks.push(if from_one { 1.0 - x } else { x });
            }
        };
        match (toward_zero, toward_one) {
            (false, false) => breaks.push(0.5),
            (true, false) => push_graded(&mut breaks, false),
            (false, true) => push_graded(&mut breaks, true),
            (true, true) => {
                let mut half = Vec::new();
                push_graded(&mut half, false);
                breaks.extend(half.iter().map(|x| 0.5 * x));
                breaks.extend(half.iter().map(|x| 1.0 - 0.5 * x));
                breaks.push(0.5);
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let rule = GaussLegendre::new(order.max(1).try_into().unwrap());
        let pairs = rule.as_node_weight_pairs();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            for &(x, wt) in pairs {
                nodes.push(0.5 * (a + b) + 0.5 * (b - a) * x);
                weights.push(0.5 * (b - a) * wt);
            }
        }
        Self { nodes, weights }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Quadrature nodes and weights for a polygon: centroid fan, each triangle
/// mapped from the unit square with refinement toward its outer edge and
/// the two polygon vertices on it.
pub fn polygon_rule(poly: &Polygon, order: usize, levels: usize) -> Vec<(Point, f64)> {
    let c = poly.centroid();
    let rs = GradedRule::new(order, levels, false, levels > 0);
    let rt = GradedRule::new(order, levels, levels > 0, levels > 0);
    let n = poly.vertices.len();
    let mut out = Vec::with_capacity(n * rs.len() * rt.len());
    for i in 0..n {
        let (p, q) = (poly.vertices[i], poly.vertices[(i + 1) % n]);
        let e = [q[0] - p[0], q[1] - p[1]];
        let pc = [p[0] - c[0], p[1] - c[1]];
        let jac = (pc[0] * e[1] - pc[1] * e[0]).abs();
        for (s, ws) in rs.iter() {
            for (t, wt) in rt.iter() {
                let y = [c[0] + s * (pc[0] + t * e[0]), c[1] + s * (pc[1] + t * e[1])];
                out.push((y, ws * wt * s * jac));
            }
        }
    }
    out
}

/// Nodes and length weights along a segment, refined toward both ends.
pub fn segment_rule(p: Point, q: Point, order: usize, levels: usize) -> Vec<(Point, f64)> {
    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    GradedRule::new(order, levels, levels > 0, levels > 0)
        .iter()
        .map(|(t, w)| {
            (
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])],
                w * len,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    #[test]
    fn moments_and_clip() {
        let s = square();
        assert_eq!(s.area(), 1.0);
        assert_eq!(s.first_moments(), [0.5, 0.5]);
        let half = s.clip([1.0, 0.0], -0.5);
        assert!((half.area() - 0.5).abs() < 1e-15);
        assert!((half.integrate_affine([1.0, 0.0], -0.5) - 0.125).abs() < 1e-15);
        assert!(s.clip([1.0, 0.0], -2.0).is_degenerate());
    }

    #[test]
    fn graded_rule_integrates_log() {
        let rule = GradedRule::new(10, 30, true, true);
        let sum: f64 = rule.iter().map(|(x, w)| w * x.ln()).sum();
        assert!((sum + 1.0).abs() < 1e-9);
        let poly: f64 = rule.iter().map(|(x, w)| w * x.powi(5)).sum();
        assert!((poly - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn polygon_rule_is_exact_on_quadratics() {
        let tri = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        for levels in [0, 4] {
            let r = polygon_rule(&tri, 6, levels);
            let area: f64 = r.iter().map(|(_, w)| w).sum();
            let m: f64 = r.iter().map(|(y, w)| w * y[0] * y[1]).sum();
            assert!((area - 0.5).abs() < 1e-14);
            assert!((m - 1.0 / 24.0).abs() < 1e-14);
        }
    }
}
