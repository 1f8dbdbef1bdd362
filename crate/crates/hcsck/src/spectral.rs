//! Pointwise spectral kernel for 2×2 Higgs data: eigenvalues of `ξGξ̄G`,
//! the functions ψ and ρ, and matrix functions built from the 2×2 resolvent.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Margin applied to the open upper bound `δ < 1`.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Eigenvalue gap below which matrix functions use the first-order scalar branch.
pub const DEGENERATE_GAP: f64 = 1e-8;

/// Complex symmetric 2×2 matrix; the (2,1) entry is `m12`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CSym2 {
    pub m11: C64,
    pub m12: C64,
    pub m22: C64,
}

impl CSym2 {
    pub fn new(m11: C64, m12: C64, m22: C64) -> Self {
        Self { m11, m12, m22 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn from_real(s: Sym2) -> Self {
        Self::new(s.a11.into(), s.a12.into(), s.a22.into())
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    pub fn conj(&self) -> Self {
        Self::new(self.m11.conj(), self.m12.conj(), self.m22.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m22 * s)
    }

    pub fn re(&self) -> Sym2 {
        Sym2::new(self.m11.re, self.m12.re, self.m22.re)
    }

    pub fn im(&self) -> Sym2 {
        Sym2::new(self.m11.im, self.m12.im, self.m22.im)
    }

    pub fn mat(&self) -> CMat2 {
        CMat2([[self.m11, self.m12], [self.m12, self.m22]])
    }

    /// Frobenius norm squared, counting the off-diagonal entry twice.
    pub fn norm_sqr(&self) -> f64 {
        self.m11.norm_sqr() + 2.0 * self.m12.norm_sqr() + self.m22.norm_sqr()
    }

    pub fn max_abs(&self) -> f64 {
        self.m11.norm().max(self.m12.norm()).max(self.m22.norm())
    }
}

impl Add for CSym2 {
    type Output = CSym2;
    fn add(self, o: CSym2) -> CSym2 {
        CSym2::new(self.m11 + o.m11, self.m12 + o.m12, self.m22 + o.m22)
    }
}

impl Sub for CSym2 {
    type Output = CSym2;
    fn sub(self, o: CSym2) -> CSym2 {
        CSym2::new(self.m11 - o.m11, self.m12 - o.m12, self.m22 - o.m22)
    }
}

/// Real symmetric 2×2 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.a11 + self.a22);
        let r = (0.25 * (self.a11 - self.a22).powi(2) + self.a12 * self.a12).sqrt();
        (m - r, m + r)
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2::new(self.a22 / d, -self.a12 / d, self.a11 / d)
    }

    pub fn mat(&self) -> CMat2 {
        CMat2([
            [self.a11.into(), self.a12.into()],
            [self.a12.into(), self.a22.into()],
        ])
    }

    pub fn is_semidefinite(&self, tol: f64) -> bool {
        let (lo, hi) = self.eigenvalues();
        lo >= -tol || hi <= tol
    }
}

/// General complex 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CMat2(pub [[C64; 2]; 2]);

impl CMat2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::scalar(C64::new(1.0, 0.0))
    }

    pub fn scalar(s: C64) -> Self {
        CMat2([[s, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), s]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn adjoint(&self) -> Self {
        let a = &self.0;
        CMat2([
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let a = &self.0;
        CMat2([[f(a[0][0]), f(a[0][1])], [f(a[1][0]), f(a[1][1])]])
    }

    pub fn inverse(&self) -> Self {
        let a = &self.0;
        let d = self.det();
        CMat2([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, o: CMat2) -> CMat2 {
        let (a, b) = (&self.0, &o.0);
        CMat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, o: CMat2) -> CMat2 {
        self + (-o)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.map(|z| -z)
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, o: CMat2) -> CMat2 {
        let (a, b) = (&self.0, &o.0);
        CMat2([
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
}

/// Eigenvalues `δ⁺ ≥ δ⁻` of `X = ξGξ̄G`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Spectrum2 {
    pub delta_plus: f64,
    pub delta_minus: f64,
}

impl Spectrum2 {
    pub fn new(delta_plus: f64, delta_minus: f64) -> Self {
        Self {
            delta_plus,
            delta_minus,
        }
    }

    pub fn trace(&self) -> f64 {
        self.delta_plus + self.delta_minus
    }

    pub fn det(&self) -> f64 {
        self.delta_plus * self.delta_minus
    }

    pub fn radius(&self) -> f64 {
        self.delta_plus.abs().max(self.delta_minus.abs())
    }
}

fn check_open_unit(x: f64, what: &str) -> Result<()> {
    if x.is_nan() || x >= 1.0 - DOMAIN_TOL {
        return Err(Error::Domain(format!("{what} = {x} is not below 1")));
    }
    Ok(())
}

/// `ψ(x) = ½(1+√(1−x))⁻¹`, defined for `x ≤ 1`.
pub fn psi(x: f64) -> Result<f64> {
    if x.is_nan() || x > 1.0 {
        return Err(Error::Domain(format!("psi argument {x} exceeds 1")));
    }
    Ok(0.5 / (1.0 + (1.0 - x).sqrt()))
}

/// `ψ′(x) = (4s(1+s)²)⁻¹` with `s = √(1−x)`, for `x < 1`.
pub fn psi_prime(x: f64) -> Result<f64> {
    check_open_unit(x, "psi' argument")?;
    let s = (1.0 - x).sqrt();
    Ok(0.25 / (s * (1.0 + s) * (1.0 + s)))
}

/// Per-eigenvalue summand `1 − √(1−δ) + log((1+√(1−δ))/2)` of ρ.
pub fn bg_density(delta: f64) -> Result<f64> {
    if delta.is_nan() || !(-DOMAIN_TOL..=1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "bg_density argument {delta} outside [0, 1]"
        )));
    }
    let s = (1.0 - delta.max(0.0)).sqrt();
    // 1 − s + log((1+s)/2) with the log written as ln_1p for small δ.
    Ok(1.0 - s + (0.5 * (s - 1.0)).ln_1p())
}

fn real_spectrum(t: f64, d: f64) -> Result<Spectrum2> {
    let disc = t * t - 4.0 * d;
    let tol = 1e-12 * t * t + 1e-300;
    if disc.is_nan() || disc < -tol {
        return Err(Error::Domain(format!(
            "negative discriminant {disc:e} for trace {t} and determinant {d}"
        )));
    }
    let r = disc.max(0.0).sqrt();
    if t >= 0.0 {
        let plus = 0.5 * (t + r);
        let minus = if plus > 0.0 {
            (d / plus).min(plus)
        } else {
            0.0
        };
        Ok(Spectrum2::new(plus, minus))
    } else {
        let minus = 0.5 * (t - r);
        let plus = (d / minus).max(minus);
        Ok(Spectrum2::new(plus, minus))
    }
}

/// `δ± = ½(t ± √(t² − 4d))` for `t = Tr X ≥ 0` and `d = det X ≥ 0`.
pub fn eigenpair(trace_x: f64, det_mod2: f64) -> Result<Spectrum2> {
    let tol = DOMAIN_TOL * (1.0 + trace_x.abs());
    if trace_x < -tol || det_mod2 < -tol * tol.max(trace_x.abs()) {
        return Err(Error::Domain(format!(
            "eigenpair needs nonnegative trace and determinant, got ({trace_x}, {det_mod2})"
        )));
    }
    let s = real_spectrum(trace_x.max(0.0), det_mod2.max(0.0))?;
    Ok(Spectrum2::new(s.delta_plus, s.delta_minus.max(0.0)))
}

/// Spectrum of a 2×2 matrix whose eigenvalues are known to be real.
pub fn matrix_spectrum(x: &CMat2) -> Result<Spectrum2> {
    let t = x.trace();
    let d = x.det();
    let scale = 1.0 + t.norm() + d.norm();
    if t.im.abs() > 1e-10 * scale || d.im.abs() > 1e-10 * scale {
        return Err(Error::Domain(format!(
            "matrix spectrum is not real (trace {t}, det {d})"
        )));
    }
    real_spectrum(t.re, d.re)
}

/// `f(X) = aX + bI` from the 2×2 resolvent decomposition. `dd` is the divided
/// difference `(f(x)−f(y))/(x−y)` in a cancellation-free form.
fn spectral_apply(
    x: &CMat2,
    s: Spectrum2,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    dd: impl Fn(f64, f64) -> f64,
) -> CMat2 {
    let (a, b) = if s.delta_plus - s.delta_minus < DEGENERATE_GAP {
        let mid = 0.5 * (s.delta_plus + s.delta_minus);
        let slope = df(mid);
        (slope, f(mid) - mid * slope)
    } else {
        let slope = dd(s.delta_plus, s.delta_minus);
        (slope, f(s.delta_plus) - slope * s.delta_plus)
    };
    x.scale(a.into()) + CMat2::scalar(b.into())
}

fn admissible_spectrum(x: &CMat2) -> Result<Spectrum2> {
    let s = matrix_spectrum(x)?;
    if s.radius() >= 1.0 - DOMAIN_TOL {
        return Err(Error::Domain(format!(
            "spectral radius {} is not below 1",
            s.radius()
        )));
    }
    Ok(s)
}

/// ψ applied spectrally to `X`.
pub fn psi_of_matrix(x: &CMat2) -> Result<CMat2> {
    let s = admissible_spectrum(x)?;
    let root = |v: f64| (1.0 - v).sqrt();
    Ok(spectral_apply(
        x,
        s,
        |v| 0.5 / (1.0 + root(v)),
        |v| {
            let r = root(v);
            0.25 / (r * (1.0 + r) * (1.0 + r))
        },
        |a, b| {
            let (ra, rb) = (root(a), root(b));
            0.5 / ((ra + rb) * (1.0 + ra) * (1.0 + rb))
        },
    ))
}

/// Principal square root of `1 − X`.
pub fn sqrt_one_minus(x: &CMat2) -> Result<CMat2> {
    let s = admissible_spectrum(x)?;
    let root = |v: f64| (1.0 - v).sqrt();
    Ok(spectral_apply(
        x,
        s,
        root,
        |v| -0.5 / root(v),
        |a, b| -1.0 / (root(a) + root(b)),
    ))
}

/// `ψ₁ = ½(s₊+s₋)⁻¹`, `ψ₂ = ψ₁(1+s₊)⁻¹(1+s₋)⁻¹` with `s± = √(1−δ±)`.
pub fn psi12(s: Spectrum2) -> Result<(f64, f64)> {
    check_open_unit(s.delta_plus, "delta_plus")?;
    if s.delta_minus < -DOMAIN_TOL {
        return Err(Error::Domain(format!(
            "delta_minus {} is negative",
            s.delta_minus
        )));
    }
    let sp = (1.0 - s.delta_plus).sqrt();
    let sm = (1.0 - s.delta_minus.max(0.0)).sqrt();
    let psi1 = 0.5 / (sp + sm);
    Ok((psi1, psi1 / ((1.0 + sp) * (1.0 + sm))))
}

/// `ρ = Σ bg_density(δ)` over both eigenvalues.
pub fn bg_function(s: Spectrum2) -> Result<f64> {
    Ok(bg_density(s.delta_plus)? + bg_density(s.delta_minus)?)
}

/// ρ as a function of `p = δ⁺+δ⁻` and `q = δ⁺δ⁻`, with first and second partials.
#[derive(Clone, Copy, Debug)]
pub struct RhoPq {
    pub value: f64,
    pub dp: f64,
    pub dq: f64,
    pub dpp: f64,
    pub dpq: f64,
    pub dqq: f64,
}

/// Closed forms `P = √(1−p+q) = s₊s₋`, `S = √(2−p+2P) = s₊+s₋`; then
/// `∂ρ/∂p = ψ₁ = 1/(2S)` and `∂ρ/∂q = −ψ₂ = −1/(2S(1+S+P))`.
pub fn rho_pq(p: f64, q: f64) -> Result<RhoPq> {
    let s = eigenpair(p, q)?;
    check_open_unit(s.delta_plus, "delta_plus")?;
    let value = bg_function(s)?;
    let pp = (1.0 - p + q).max(0.0).sqrt();
    let ss = (2.0 - p + 2.0 * pp).sqrt();
    let t = 1.0 + ss + pp;
    let pp_p = -0.5 / pp;
    let pp_q = 0.5 / pp;
    let ss_p = (-1.0 + 2.0 * pp_p) / (2.0 * ss);
    let ss_q = (2.0 * pp_q) / (2.0 * ss);
    let dp = 0.5 / ss;
    let dq = -0.5 / (ss * t);
    let dpp = -ss_p / (2.0 * ss * ss);
    let dpq = -ss_q / (2.0 * ss * ss);
    let t_q = ss_q + pp_q;
    let dqq = 0.5 * (ss_q * t + ss * t_q) / (ss * t).powi(2);
    Ok(RhoPq {
        value,
        dp,
        dq,
        dpp,
        dpq,
        dqq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0).unwrap(), 0.25);
        assert!((psi(0.75).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(psi(1.0).unwrap(), 0.5);
        assert!(psi(1.0 + 1e-9).is_err());
    }

    #[test]
    fn bg_density_values() {
        assert_eq!(bg_density(0.0).unwrap(), 0.0);
        assert!((bg_density(1.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!(bg_density(1.1).is_err());
        assert!(bg_density(-0.1).is_err());
    }

    #[test]
    fn density_derivative_is_psi() {
        let h = 1e-5;
        for i in 0..1000 {
            let d = 0.001 + 0.99 * i as f64 / 1000.0;
            let fd = (bg_density(d + h).unwrap() - bg_density(d - h).unwrap()) / (2.0 * h);
            let exact = psi(d).unwrap();
            assert!((fd - exact).abs() < 1e-8 * exact, "at {d}: {fd} vs {exact}");
        }
    }

    #[test]
    fn x_psi_identity() {
        for i in 0..=200 {
            let x = -2.0 + 3.0 * i as f64 / 200.0;
            let lhs = x * psi(x).unwrap();
            let rhs = 0.5 * (1.0 - (1.0 - x).sqrt());
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn eigenpair_values() {
        assert_eq!(eigenpair(0.0, 0.0).unwrap(), Spectrum2::new(0.0, 0.0));
        let s = eigenpair(0.5, 0.04).unwrap();
        assert!((s.delta_plus - 0.4).abs() < 1e-15);
        assert!((s.delta_minus - 0.1).abs() < 1e-15);
        assert!(eigenpair(0.1, 0.01).is_err());
    }

    #[test]
    fn repeated_eigenvalue_gives_scalar() {
        let d = 0.3;
        let x = CMat2::scalar(d.into());
        let p = psi_of_matrix(&x).unwrap();
        let expect = CMat2::scalar(psi(d).unwrap().into());
        assert!((p - expect).norm() < 1e-15);
        assert!(
            (psi_of_matrix(&CMat2::zero()).unwrap() - CMat2::scalar(0.25.into())).norm() < 1e-16
        );
    }

    #[test]
    fn sqrt_one_minus_diagonal() {
        let x = CMat2([[0.36.into(), 0.0.into()], [0.0.into(), 0.0.into()]]);
        let r = sqrt_one_minus(&x).unwrap();
        assert!((r.0[0][0] - C64::new(0.8, 0.0)).norm() < 1e-15);
        assert!((r.0[1][1] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(r.0[0][1].norm() < 1e-15);
        assert!((sqrt_one_minus(&CMat2::zero()).unwrap() - CMat2::identity()).norm() < 1e-16);
    }

    #[test]
    fn jordan_block_uses_first_order_branch() {
        let d = 0.2;
        let eps = 1e-3;
        let x = CMat2([[d.into(), eps.into()], [0.0.into(), d.into()]]);
        let r = sqrt_one_minus(&x).unwrap();
        assert!((r * r - (CMat2::identity() - x)).norm() < 1e-15);
    }

    #[test]
    fn rejects_spectral_radius_one() {
        let x = CMat2::scalar(1.0.into());
        assert!(psi_of_matrix(&x).is_err());
        assert!(sqrt_one_minus(&x).is_err());
    }

    #[test]
    fn psi12_values() {
        let (a, b) = psi12(Spectrum2::new(0.0, 0.0)).unwrap();
        assert_eq!((a, b), (0.25, 0.0625));
        let (a, _) = psi12(Spectrum2::new(0.6, 0.0)).unwrap();
        assert!((a - psi(0.6).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn bg_function_values() {
        assert_eq!(bg_function(Spectrum2::new(0.0, 0.0)).unwrap(), 0.0);
        let v = bg_function(Spectrum2::new(1.0, 1.0)).unwrap();
        assert!((v - 2.0 * (1.0 - 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn rho_pq_derivatives_match_differences() {
        let (p, q) = (0.7, 0.05);
        let r = rho_pq(p, q).unwrap();
        let h = 1e-5;
        let f = |p: f64, q: f64| rho_pq(p, q).unwrap();
        let fd_p = (f(p + h, q).value - f(p - h, q).value) / (2.0 * h);
        let fd_q = (f(p, q + h).value - f(p, q - h).value) / (2.0 * h);
        assert!((fd_p - r.dp).abs() < 1e-9);
        assert!((fd_q - r.dq).abs() < 1e-9);
        let fd_pp = (f(p + h, q).dp - f(p - h, q).dp) / (2.0 * h);
        let fd_pq = (f(p, q + h).dp - f(p, q - h).dp) / (2.0 * h);
        let fd_qq = (f(p, q + h).dq - f(p, q - h).dq) / (2.0 * h);
        assert!((fd_pp - r.dpp).abs() < 1e-8);
        assert!((fd_pq - r.dpq).abs() < 1e-8);
        assert!((fd_qq - r.dqq).abs() < 1e-8);
    }
}
