//! Second-order jets in two real variables with complex values.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::spectral::C64;

/// Value, gradient and Hessian `[∂₁₁, ∂₁₂, ∂₂₂]` of a function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: C64,
    pub d: [C64; 2],
    pub h: [C64; 3],
}

const Z: C64 = C64::new(0.0, 0.0);

impl Jet {
    pub fn constant(v: C64) -> Self {
        Self {
            v,
            d: [Z; 2],
            h: [Z; 3],
        }
    }

    pub fn real(v: f64) -> Self {
        Self::constant(C64::new(v, 0.0))
    }

    /// Affine function `⟨a, y⟩ + b` at `y`.
    pub fn affine(a: [f64; 2], b: f64, y: [f64; 2]) -> Self {
        Self {
            v: C64::new(a[0] * y[0] + a[1] * y[1] + b, 0.0),
            d: [C64::new(a[0], 0.0), C64::new(a[1], 0.0)],
            h: [Z; 3],
        }
    }

    /// `φ ∘ self` given `φ`, `φ′`, `φ″` at the value.
    pub fn chain(self, f0: C64, f1: C64, f2: C64) -> Self {
        let [a, b] = self.d;
        Self {
            v: f0,
            d: [f1 * a, f1 * b],
            h: [
                f1 * self.h[0] + f2 * a * a,
                f1 * self.h[1] + f2 * a * b,
                f1 * self.h[2] + f2 * b * b,
            ],
        }
    }

    pub fn recip(self) -> Self {
        let r = self.v.inv();
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    /// Principal square root.
    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn conj(self) -> Self {
        Self {
            v: self.v.conj(),
            d: self.d.map(|x| x.conj()),
            h: self.h.map(|x| x.conj()),
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
            h: [self.h[0] + o.h[0], self.h[1] + o.h[1], self.h[2] + o.h[2]],
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            d: self.d.map(|x| -x),
            h: self.h.map(|x| -x),
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (f, g) = (self, o);
        Jet {
            v: f.v * g.v,
            d: [f.d[0] * g.v + f.v * g.d[0], f.d[1] * g.v + f.v * g.d[1]],
            h: [
                f.h[0] * g.v + 2.0 * f.d[0] * g.d[0] + f.v * g.h[0],
                f.h[1] * g.v + f.d[0] * g.d[1] + f.d[1] * g.d[0] + f.v * g.h[1],
                f.h[2] * g.v + 2.0 * f.d[1] * g.d[1] + f.v * g.h[2],
            ],
        }
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, s: C64) -> Jet {
        Jet {
            v: self.v * s,
            d: self.d.map(|x| x * s),
            h: self.h.map(|x| x * s),
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self * C64::new(s, 0.0)
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

/// 2×2 matrix of jets.
#[derive(Clone, Copy, Debug)]
pub struct JetMat(pub [[Jet; 2]; 2]);

impl JetMat {
    pub fn identity() -> Self {
        let (o, z) = (Jet::real(1.0), Jet::real(0.0));
        JetMat([[o, z], [z, o]])
    }

    pub fn scalar(s: Jet) -> Self {
        let z = Jet::real(0.0);
        JetMat([[s, z], [z, s]])
    }

    pub fn mul(&self, o: &JetMat) -> JetMat {
        let a = &self.0;
        let b = &o.0;
        JetMat([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn add(&self, o: &JetMat) -> JetMat {
        let (a, b) = (&self.0, &o.0);
        JetMat([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    pub fn sub(&self, o: &JetMat) -> JetMat {
        let (a, b) = (&self.0, &o.0);
        JetMat([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }

    pub fn scale(&self, s: Jet) -> JetMat {
        let a = &self.0;
        JetMat([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn trace(&self) -> Jet {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Jet {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn conj(&self) -> JetMat {
        let a = &self.0;
        JetMat([
            [a[0][0].conj(), a[0][1].conj()],
            [a[1][0].conj(), a[1][1].conj()],
        ])
    }

    pub fn inverse(&self) -> JetMat {
        let a = &self.0;
        let r = self.det().recip();
        JetMat([[a[1][1] * r, -a[0][1] * r], [-a[1][0] * r, a[0][0] * r]])
    }

    /// `√M = (M + √det·I)/√(Tr M + 2√det)`, valid when both eigenvalues lie
    /// off the negative real axis.
    pub fn sqrt(&self) -> JetMat {
        let s = self.det().sqrt();
        let t = (self.trace() + s * 2.0).sqrt();
        self.add(&JetMat::scalar(s)).scale(t.recip())
    }

    /// `(M^{ab})_{,ab}` with the off-diagonal part symmetrized.
    pub fn double_divergence(&self) -> C64 {
        let a = &self.0;
        a[0][0].h[0] + a[0][1].h[1] + a[1][0].h[1] + a[1][1].h[2]
    }

    pub fn values(&self) -> crate::spectral::CMat2 {
        let a = &self.0;
        crate::spectral::CMat2([[a[0][0].v, a[0][1].v], [a[1][0].v, a[1][1].v]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize, y: [f64; 2]) -> Jet {
        let mut a = [0.0; 2];
        a[i] = 1.0;
        Jet::affine(a, 0.0, y)
    }

    #[test]
    fn product_quotient_and_root() {
        let y = [0.3, 0.7];
        let (x1, x2) = (var(0, y), var(1, y));
        // f = x1² x2 / (1 + x1) and g = √(1 + x1 x2)
        let one = Jet::real(1.0);
        let f = x1 * x1 * x2 / (one + x1);
        let g = (one + x1 * x2).sqrt();
        let fe = |a: f64, b: f64| a * a * b / (1.0 + a);
        let ge = |a: f64, b: f64| (1.0 + a * b).sqrt();
        let h = 1e-4;
        for (jet, e) in [(f, &fe as &dyn Fn(f64, f64) -> f64), (g, &ge)] {
            let (a, b) = (y[0], y[1]);
            let d11 = (e(a + h, b) - 2.0 * e(a, b) + e(a - h, b)) / (h * h);
            let d12 = (e(a + h, b + h) - e(a + h, b - h) - e(a - h, b + h) + e(a - h, b - h))
                / (4.0 * h * h);
            let d22 = (e(a, b + h) - 2.0 * e(a, b) + e(a, b - h)) / (h * h);
            let d1 = (e(a + h, b) - e(a - h, b)) / (2.0 * h);
            assert!((jet.v.re - e(a, b)).abs() < 1e-15);
            assert!((jet.d[0].re - d1).abs() < 1e-7);
            for (k, d) in [d11, d12, d22].into_iter().enumerate() {
                assert!((jet.h[k].re - d).abs() < 1e-6, "{k} {} {d}", jet.h[k].re);
            }
        }
    }

    #[test]
    fn matrix_sqrt_squares_back() {
        let y = [0.2, 0.4];
        let (x1, x2) = (var(0, y), var(1, y));
        let one = Jet::real(1.0);
        let m = JetMat([
            [one + x1 * 0.5, x1 * x2 * 0.2],
            [x1 * x2 * 0.2, one + x2 * x2],
        ]);
        let r = m.sqrt();
        let sq = r.mul(&r).sub(&m);
        for row in sq.0 {
            for e in row {
                assert!(e.v.norm() < 1e-15);
                assert!(e.d.iter().chain(e.h.iter()).all(|x| x.norm() < 1e-14));
            }
        }
    }
}
