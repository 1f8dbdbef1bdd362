//! Momentum profiles on the ruled surface over a curve of genus at least two,
//! in the adiabatic regime where the fibre parameter `m` is small.
//!
//! Profiles live on `λ ∈ [0, 1]` and are stored as
//! `φ(λ) = m·w·g`, `w = λ(1−λ)`, `g = 1 + w·q` with `q` a Chebyshev series, so
//! the boundary data `φ(0) = φ(1) = 0`, `φ′(0) = −φ′(1) = m` hold for every `q`.
//! The exponential factor splits as
//! `exp(∫_{1/2}^λ m/φ) = λ/(1−λ) · exp(−∫_{1/2}^λ q/g)`,
//! which lets every endpoint singularity cancel in closed form.

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chebyshev::{gauss_nodes, Chebyshev};
use crate::error::{Error, Result};

/// Largest `m` for which the solver is validated.
pub const MAX_SOLVER_M: f64 = 0.2;

/// Samples used to certify `g > 0`.
const POSITIVITY_SAMPLES: usize = 513;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `F_m` of the standard complexification.
    Standard,
    /// The square-root equation of the alternative complexification.
    Norm,
}

impl Variant {
    /// Leading-order constant `c₀ / m²`.
    pub fn c0_factor(self) -> f64 {
        match self {
            Variant::Standard => 2.0,
            Variant::Norm => 8.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MomentumProfile {
    pub m: f64,
    q: Chebyshev,
    dq: Chebyshev,
    ddq: Chebyshev,
}

/// Values of `g`, `φ` and their first two derivatives at one point.
#[derive(Clone, Copy, Debug)]
pub struct ProfileJet {
    pub q: f64,
    pub g: f64,
    pub dg: f64,
    pub ddg: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

impl MomentumProfile {
    /// Profile with correction series `q`; fails unless `m > 0` and `g > 0`.
    pub fn new(m: f64, q: Chebyshev) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "fibre parameter m = {m} must be positive"
            )));
        }
        let dq = q.derivative();
        let ddq = dq.derivative();
        let p = Self { m, q, dq, ddq };
        let gmin = p.min_g();
        if !(gmin > 0.0) {
            return Err(Error::Domain(format!(
                "profile factor g reaches {gmin} on [0, 1]"
            )));
        }
        Ok(p)
    }

    pub fn q(&self) -> &Chebyshev {
        &self.q
    }

    pub fn jet(&self, l: f64) -> ProfileJet {
        let m = self.m;
        let (q, dq, ddq) = (self.q.eval(l), self.dq.eval(l), self.ddq.eval(l));
        let w = l * (1.0 - l);
        let dw = 1.0 - 2.0 * l;
        let g = 1.0 + w * q;
        let dg = dw * q + w * dq;
        let ddg = -2.0 * q + 2.0 * dw * dq + w * ddq;
        ProfileJet {
            q,
            g,
            dg,
            ddg,
            phi: m * w * g,
            dphi: m * (dw * g + w * dg),
            ddphi: m * (-2.0 * g + 2.0 * dw * dg + w * ddg),
        }
    }

    pub fn g(&self, l: f64) -> f64 {
        1.0 + l * (1.0 - l) * self.q.eval(l)
    }

    pub fn phi(&self, l: f64) -> f64 {
        self.m * l * (1.0 - l) * self.g(l)
    }

    pub fn min_g(&self) -> f64 {
        (0..POSITIVITY_SAMPLES)
            .map(|i| self.g(i as f64 / (POSITIVITY_SAMPLES - 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Chebyshev coefficients of `g` itself.
    pub fn g_coeffs(&self) -> Vec<f64> {
        Chebyshev::interpolate(|l| self.g(l), self.q.coeffs.len() + 3).coeffs
    }

    /// `λ ↦ ∫_{1/2}^λ q/g`, by exact integration of a Chebyshev interpolant.
    fn regular_log_part(&self) -> impl Fn(f64) -> f64 {
        let n = (2 * self.q.coeffs.len()).max(64);
        let ratio = Chebyshev::interpolate(|l| self.q.eval(l) / self.g(l), n).antiderivative();
        let base = ratio.eval(0.5);
        move |l| ratio.eval(l) - base
    }
}

/// `φ₀ = mλ(1−λ)(4 + 2m − m(4+3m)λ(1−λ)) / (2(2+m))`.
pub fn phi0(m: f64) -> Result<MomentumProfile> {
    let kappa = m * (4.0 + 3.0 * m) / (2.0 * (2.0 + m));
    MomentumProfile::new(m, Chebyshev::constant(-kappa))
}

pub fn c0(m: f64, variant: Variant) -> f64 {
    variant.c0_factor() * m * m
}

/// `t(λ) = ∫_{1/2}^λ m/φ`, split as `log(λ/(1−λ)) − ∫_{1/2}^λ q/g`.
pub fn t_of_lambda(profile: &MomentumProfile, l: f64) -> Result<f64> {
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::Domain(format!(
            "t diverges at λ = {l}; use interior points"
        )));
    }
    Ok((l / (1.0 - l)).ln() - profile.regular_log_part()(l))
}

/// Residual of the profile equation at the given interior points.
pub fn residual_at(
    profile: &MomentumProfile,
    c: f64,
    variant: Variant,
    points: &[f64],
) -> Result<Vec<f64>> {
    let m = profile.m;
    let log_part = profile.regular_log_part();
    points
        .iter()
        .map(|&l| {
            let j = profile.jet(l);
            if !(j.g > 0.0) {
                return Err(Error::Domain(format!(
                    "profile factor g = {} at λ = {l}",
                    j.g
                )));
            }
            let e = (-log_part(l)).exp();
            let den = 1.0 + l * m;
            let a = -l * j.q + 2.0 * j.g + l * j.dg;
            let csck = j.ddphi + (2.0 * m * j.dphi + m * m) / den;
            // e^t (φ′+m)² and e^t φ φ″ with the (1−λ) and λ factors cancelled.
            let grad_sq = l * e * m * m * (1.0 - l) * a * a;
            let curv = l * e * m * l * j.g * j.ddphi;
            Ok(match variant {
                Variant::Standard => {
                    csck + 4.0 * m / (2.0 + m) - c / (m * m) * (grad_sq + curv) / den
                }
                Variant::Norm => {
                    let z = c / (m * m) * m * l * l * j.g * e / den;
                    if !(z < 1.0) {
                        return Err(Error::Domain(format!(
                            "square-root argument 1 − {z} is not positive"
                        )));
                    }
                    let root = (1.0 - z).sqrt();
                    let bracket = z * m * m * j.phi / (den * den) - c / (m * m) * grad_sq / den;
                    (1.0 + root) * csck + 8.0 * m / (2.0 + m) + bracket / (2.0 * root)
                }
            })
        })
        .collect()
}

/// `F_m(φ, c)` at the `n` Chebyshev–Gauss collocation nodes.
pub fn f_m(profile: &MomentumProfile, c: f64, variant: Variant, n: usize) -> Result<Vec<f64>> {
    if c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "c = {c} must be non-negative"
        )));
    }
    residual_at(profile, c, variant, &gauss_nodes(n))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Scalar curvature `s = s_Σ/(1+τ) − φ_τ″ − 2φ_τ′/(1+τ)` at `τ = mλ`, where
/// `φ_τ(τ) = φ(τ/m)`.
pub fn scal_from_profile(profile: &MomentumProfile, s_sigma: f64, lambdas: &[f64]) -> Vec<f64> {
    let m = profile.m;
    lambdas
        .iter()
        .map(|&l| {
            let j = profile.jet(l);
            let tau = m * l;
            s_sigma / (1.0 + tau) - j.ddphi / (m * m) - 2.0 * j.dphi / (m * (1.0 + tau))
        })
        .collect()
}

/// `(∫₀^m s(1+τ) dτ, average of s with weight 1+τ)` by Gauss–Legendre quadrature.
pub fn scal_integral(profile: &MomentumProfile, s_sigma: f64) -> (f64, f64) {
    let m = profile.m;
    let rule = GaussLegendre::new((profile.q.coeffs.len() + 8).try_into().unwrap());
    let integral = rule.integrate(0.0, m, |tau| {
        (1.0 + tau) * scal_from_profile(profile, s_sigma, &[tau / m])[0]
    });
    (integral, integral / (m + 0.5 * m * m))
}

/// Leading-order inverse of the linearisation: solves
/// `u″ + 2k(3λ² − 2λ) = f` with `u(0) = u′(0) = u(1) = 0`; `u′(1) = ∫f`.
pub fn linearized_inverse(f: &Chebyshev) -> (Chebyshev, f64) {
    let f2 = f.antiderivative().antiderivative();
    let k = -6.0 * f2.eval(1.0);
    let quartic = Chebyshev::interpolate(|l| l.powi(4) / 4.0 - l.powi(3) / 3.0, 5);
    let n = f2.coeffs.len().max(quartic.coeffs.len());
    let coeffs = (0..n)
        .map(|i| {
            f2.coeffs.get(i).copied().unwrap_or(0.0)
                - 2.0 * k * quartic.coeffs.get(i).copied().unwrap_or(0.0)
        })
        .collect();
    (Chebyshev::new(coeffs), k)
}

/// `u″ + 2k(3λ² − 2λ)` at the given points.
pub fn linearized_operator(u: &Chebyshev, k: f64, points: &[f64]) -> Vec<f64> {
    let ddu = u.derivative().derivative();
    points
        .iter()
        .map(|&l| ddu.eval(l) + 2.0 * k * (3.0 * l * l - 2.0 * l))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuledOptions {
    pub nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub variant: Variant,
    pub fd_step: f64,
}

impl Default for RuledOptions {
    fn default() -> Self {
        Self {
            nodes: 64,
            tol: 1e-10,
            max_iter: 40,
            variant: Variant::Standard,
            fd_step: 1e-7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RuledSolution {
    pub profile: MomentumProfile,
    pub c: f64,
    pub variant: Variant,
    pub nodes: usize,
    pub residual_sup: f64,
    pub iterations: usize,
    pub residual_trace: Vec<f64>,
}

impl RuledSolution {
    pub fn min_g(&self) -> f64 {
        self.profile.min_g()
    }

    /// `|c − c₀| ≤ m^{5/2}`.
    pub fn within_radius(&self) -> bool {
        let m = self.profile.m;
        (self.c - c0(m, self.variant)).abs() <= m.powf(2.5)
    }
}

fn unpack(m: f64, x: &[f64]) -> Result<(MomentumProfile, f64)> {
    let (c, q) = x.split_last().unwrap();
    Ok((MomentumProfile::new(m, Chebyshev::new(q.to_vec()))?, *c))
}

fn residual_vec(m: f64, x: &[f64], opts: &RuledOptions) -> Result<Vec<f64>> {
    let (p, c) = unpack(m, x)?;
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c = {c} is not positive")));
    }
    f_m(&p, c, opts.variant, opts.nodes)
}

/// Newton collocation for `(φ, c)` starting from `(φ₀, c₀)`, refined once by
/// [`linearized_inverse`].
pub fn solve_ruled(m: f64, opts: &RuledOptions) -> Result<RuledSolution> {
    if !(m > 0.0) || m > MAX_SOLVER_M {
        return Err(Error::InvalidArgument(format!(
            "m = {m} is outside (0, {MAX_SOLVER_M}]"
        )));
    }
    let n = opts.nodes;
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "collocation needs at least 8 nodes, got {n}"
        )));
    }
    let p0 = phi0(m)?;
    let mut x = vec![0.0; n];
    x[0] = p0.q().coeffs[0];
    x[n - 1] = c0(m, opts.variant);
    let mut r = residual_vec(m, &x, opts)?;
    let mut trace = vec![sup(&r)];

    // One step with the explicit inverse of the leading-order linearisation.
    // The inverse lands in the boundary-constrained space only for zero-mean data.
    let mut f = Chebyshev::from_gauss_values(&r.iter().map(|v| -v).collect::<Vec<_>>());
    f.coeffs[0] -= f.antiderivative().eval(1.0);
    let (u, k) = linearized_inverse(&f);
    let dq = Chebyshev::interpolate(
        |l| {
            let w = l * (1.0 - l);
            u.eval(l) / (m * w * w)
        },
        n - 1,
    );
    let mut trial = x.clone();
    for (t, d) in trial.iter_mut().zip(&dq.coeffs) {
        *t += d;
    }
    trial[n - 1] += k;
    if let Ok(rt) = residual_vec(m, &trial, opts) {
        if sup(&rt) < sup(&r) {
            x = trial;
            r = rt;
            trace.push(sup(&r));
        }
    }

    let mut iterations = 0;
    while sup(&r) >= opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence(format!(
                "profile Newton stalled at residual {:.3e} after {iterations} iterations",
                sup(&r)
            )));
        }
        iterations += 1;
        let mut jac = DMatrix::zeros(n, n);
        for col in 0..n {
            let h = opts.fd_step * x[col].abs().max(if col == n - 1 { m * m } else { 1.0 });
            let mut xp = x.clone();
            xp[col] += h;
            let rp = residual_vec(m, &xp, opts)?;
            for row in 0..n {
                jac[(row, col)] = (rp[row] - r[row]) / h;
            }
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NoConvergence("singular collocation Jacobian".into()))?;
        let mut alpha = 1.0;
        loop {
            let cand: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + alpha * s)
                .collect();
            match residual_vec(m, &cand, opts) {
                Ok(rc) if sup(&rc) < sup(&r) || alpha == 1.0 && sup(&rc) < 2.0 * sup(&r) => {
                    x = cand;
                    r = rc;
                    break;
                }
                _ => {
                    alpha *= 0.5;
                    if alpha < 1e-6 {
                        return Err(Error::NoConvergence(format!(
                            "profile line search failed at residual {:.3e}",
                            sup(&r)
                        )));
                    }
                }
            }
        }
        trace.push(sup(&r));
    }
    let (profile, c) = unpack(m, &x)?;
    Ok(RuledSolution {
        profile,
        c,
        variant: opts.variant,
        nodes: n,
        residual_sup: sup(&r),
        iterations,
        residual_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi0_boundary_data() {
        let m = 0.1;
        let p = phi0(m).unwrap();
        let (a, b) = (p.jet(0.0), p.jet(1.0));
        assert!(a.phi.abs() < 1e-16 && b.phi.abs() < 1e-16);
        assert!((a.dphi - m).abs() < 1e-15 && (b.dphi + m).abs() < 1e-15);
        assert!((a.g - 1.0).abs() < 1e-15 && (b.g - 1.0).abs() < 1e-15);
        let closed = (4.0 + 2.0 * m - m * (4.0 + 3.0 * m) / 4.0) / (2.0 * (2.0 + m));
        assert!((p.g(0.5) - closed).abs() < 1e-15);
        for l in [0.1, 0.37, 0.8] {
            let w = l * (1.0 - l);
            let exact =
                l * m * (1.0 - l) / (2.0 * (2.0 + m)) * (4.0 + 2.0 * m - m * (4.0 + 3.0 * m) * w);
            assert!((p.phi(l) - exact).abs() < 1e-16);
        }
        assert!(phi0(0.0).is_err());
    }

    #[test]
    fn phi0_positive_up_to_half() {
        for m in [0.05, 0.2, 0.5] {
            assert!(phi0(m).unwrap().min_g() > 0.0);
        }
    }

    #[test]
    fn t_for_unit_g_is_logit() {
        let p = MomentumProfile::new(0.1, Chebyshev::constant(0.0)).unwrap();
        for l in [0.1, 0.5, 0.9] {
            assert!((t_of_lambda(&p, l).unwrap() - (l / (1.0 - l)).ln()).abs() < 1e-15);
        }
        assert!(t_of_lambda(&p, 0.0).is_err());
        assert!(t_of_lambda(&p, 1.0).is_err());
    }

    #[test]
    fn t_is_odd_for_symmetric_g() {
        let p =
            MomentumProfile::new(0.1, Chebyshev::new(vec![-0.3, 0.0, 0.2, 0.0, -0.05])).unwrap();
        for l in [0.05, 0.2, 0.45] {
            let (a, b) = (
                t_of_lambda(&p, l).unwrap(),
                t_of_lambda(&p, 1.0 - l).unwrap(),
            );
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_node_count_converges() {
        let sol = solve_ruled(
            0.1,
            &RuledOptions {
                nodes: 33,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(sol.residual_sup < 1e-10);
    }

    #[test]
    fn t_matches_direct_quadrature() {
        let p = phi0(0.1).unwrap();
        let rule = GaussLegendre::new(80.try_into().unwrap());
        for l in [0.2, 0.5, 0.7] {
            let direct = rule.integrate(0.5, l, |x| p.m / p.phi(x));
            assert!((t_of_lambda(&p, l).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_is_affine_in_c() {
        let p = phi0(0.1).unwrap();
        let r0 = f_m(&p, 0.0, Variant::Standard, 16).unwrap();
        let r1 = f_m(&p, 0.01, Variant::Standard, 16).unwrap();
        let r2 = f_m(&p, 0.03, Variant::Standard, 16).unwrap();
        for i in 0..16 {
            assert!(((r2[i] - r0[i]) - 3.0 * (r1[i] - r0[i])).abs() < 1e-15);
        }
        assert!(sup(&r0) > 1e-4);
    }

    #[test]
    fn regularised_term_matches_singular_form() {
        let p = phi0(0.1).unwrap();
        let (m, c) = (0.1, 0.02);
        for l in [0.05, 0.5, 0.93] {
            let j = p.jet(l);
            let et = t_of_lambda(&p, l).unwrap().exp();
            let raw = j.ddphi + (2.0 * m * j.dphi + m * m) / (1.0 + l * m) + 4.0 * m / (2.0 + m)
                - c / (m * m) * et / (1.0 + l * m) * ((j.dphi + m).powi(2) + j.phi * j.ddphi);
            let reg = residual_at(&p, c, Variant::Standard, &[l]).unwrap()[0];
            assert!((raw - reg).abs() < 1e-14);
        }
    }

    #[test]
    fn linearized_inverse_special_cases() {
        let (u, k) = linearized_inverse(&Chebyshev::constant(0.0));
        assert!(k == 0.0 && u.coeffs.iter().all(|v| *v == 0.0));
        let f = Chebyshev::interpolate(|l| 2.0 * (3.0 * l * l - 2.0 * l), 4);
        let (u, k) = linearized_inverse(&f);
        assert!((k - 1.0).abs() < 1e-14);
        assert!(u.coeffs.iter().all(|v| v.abs() < 1e-14));
    }
}
