//! Chebyshev series on `[0, 1]`, in the variable `x = 2λ − 1`.

use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct Chebyshev {
    pub coeffs: Vec<f64>,
}

/// Interior Chebyshev–Gauss nodes on `[0, 1]`, descending.
pub fn gauss_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 0.5 * (1.0 + (PI * (j as f64 + 0.5) / n as f64).cos()))
        .collect()
}

impl Chebyshev {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(v: f64) -> Self {
        Self { coeffs: vec![v] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, lambda: f64) -> f64 {
        let x = 2.0 * lambda - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &a in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + a;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
    }

    /// Derivative in `λ`.
    pub fn derivative(&self) -> Chebyshev {
        let n = self.coeffs.len();
        if n <= 1 {
            return Chebyshev::constant(0.0);
        }
        let mut d = vec![0.0; n - 1];
        for k in (0..n - 1).rev() {
            let next = if k + 2 < n - 1 { d[k + 2] } else { 0.0 };
            d[k] = next + 2.0 * (k + 1) as f64 * self.coeffs[k + 1];
        }
        d[0] *= 0.5;
        Chebyshev::new(d.into_iter().map(|v| 2.0 * v).collect())
    }

    /// Antiderivative in `λ`, vanishing at `λ = 0`.
    pub fn antiderivative(&self) -> Chebyshev {
        let n = self.coeffs.len();
        let a = |k: usize| if k < n { self.coeffs[k] } else { 0.0 };
        let mut c = vec![0.0; n + 1];
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            let prev = if k == 1 { 2.0 * a(0) } else { a(k - 1) };
            *ck = 0.25 * (prev - a(k + 1)) / k as f64;
        }
        c[0] = -c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| if k % 2 == 1 { -v } else { *v })
            .sum::<f64>();
        Chebyshev::new(c)
    }

    /// Interpolant through `f` at `n` Chebyshev–Gauss nodes.
    pub fn interpolate(f: impl Fn(f64) -> f64, n: usize) -> Chebyshev {
        let values: Vec<f64> = gauss_nodes(n).into_iter().map(f).collect();
        Self::from_gauss_values(&values)
    }

    /// Coefficients from values at [`gauss_nodes`].
    pub fn from_gauss_values(values: &[f64]) -> Chebyshev {
        let n = values.len();
        let coeffs = (0..n)
            .map(|k| {
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                    .sum();
                if k == 0 {
                    s / n as f64
                } else {
                    2.0 * s / n as f64
                }
            })
            .collect();
        Chebyshev::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(l: f64) -> f64 {
        1.0 - 2.0 * l + 3.0 * l * l * l
    }

    #[test]
    fn interpolation_is_exact_on_polynomials() {
        let c = Chebyshev::interpolate(cubic, 6);
        for &l in &[0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((c.eval(l) - cubic(l)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_and_antiderivative() {
        let c = Chebyshev::interpolate(cubic, 6);
        let d = c.derivative();
        let a = c.antiderivative();
        for &l in &[0.0, 0.3, 0.9, 1.0] {
            assert!((d.eval(l) - (-2.0 + 9.0 * l * l)).abs() < 1e-13);
            let exact = l - l * l + 0.75 * l.powi(4);
            assert!((a.eval(l) - exact).abs() < 1e-14);
        }
        assert!(a
            .derivative()
            .coeffs
            .iter()
            .zip(&c.coeffs)
            .all(|(x, y)| (x - y).abs() < 1e-14));
    }
}
