//! Bivariate polynomials with complex coefficients.

use serde::{Deserialize, Serialize};

use super::jet::Jet;
use crate::spectral::C64;

/// One term `coeff · y₁^i y₂^j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub i: u32,
    pub j: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    pub terms: Vec<Term>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: C64) -> Self {
        Self {
            terms: vec![Term {
                i,
                j,
                re: c.re,
                im: c.im,
            }],
        }
    }

    pub fn real(terms: &[(u32, u32, f64)]) -> Self {
        Self {
            terms: terms
                .iter()
                .map(|&(i, j, re)| Term { i, j, re, im: 0.0 })
                .collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.im == 0.0)
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().chain(&o.terms).copied().collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    re: t.re * s,
                    im: t.im * s,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn derivative(&self, axis: usize) -> Poly2 {
        let terms = self
            .terms
            .iter()
            .filter_map(|t| {
                let p = if axis == 0 { t.i } else { t.j };
                (p > 0).then(|| {
                    let (i, j) = if axis == 0 {
                        (t.i - 1, t.j)
                    } else {
                        (t.i, t.j - 1)
                    };
                    Term {
                        i,
                        j,
                        re: t.re * p as f64,
                        im: t.im * p as f64,
                    }
                })
            })
            .collect();
        Poly2 { terms }
    }

    pub fn eval(&self, y: [f64; 2]) -> C64 {
        self.terms
            .iter()
            .map(|t| C64::new(t.re, t.im) * y[0].powi(t.i as i32) * y[1].powi(t.j as i32))
            .sum()
    }

    pub fn jet(&self, y: [f64; 2]) -> Jet {
        let d1 = self.derivative(0);
        let d2 = self.derivative(1);
        Jet {
            v: self.eval(y),
            d: [d1.eval(y), d2.eval(y)],
            h: [
                d1.derivative(0).eval(y),
                d1.derivative(1).eval(y),
                d2.derivative(1).eval(y),
            ],
        }
    }

    /// Hessian entries `[∂₁₁, ∂₁₂, ∂₂₂]` as polynomials.
    pub fn hessian(&self) -> [Poly2; 3] {
        let d1 = self.derivative(0);
        let d2 = self.derivative(1);
        [d1.derivative(0), d1.derivative(1), d2.derivative(1)]
    }
}

/// Symmetric 2×2 matrix of polynomials.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymPoly {
    pub m11: Poly2,
    pub m12: Poly2,
    pub m22: Poly2,
}

impl SymPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        let one = Poly2::constant(C64::new(1.0, 0.0));
        Self {
            m11: one.clone(),
            m12: Poly2::zero(),
            m22: one,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m11: self.m11.scale(s),
            m12: self.m12.scale(s),
            m22: self.m22.scale(s),
        }
    }

    pub fn is_zero(&self) -> bool {
        [&self.m11, &self.m12, &self.m22]
            .iter()
            .all(|p| p.terms.iter().all(|t| t.re == 0.0 && t.im == 0.0))
    }

    pub fn jet(&self, y: [f64; 2]) -> super::jet::JetMat {
        let (a, b, c) = (self.m11.jet(y), self.m12.jet(y), self.m22.jet(y));
        super::jet::JetMat([[a, b], [b, c]])
    }
}
