//! The real moment map on the torus as the Euler–Lagrange equation of the
//! periodic HK-energy, with a damped Newton solver for the potential.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Field, ScalarField, TorusGrid};
use crate::higgs::{complex_mm_residual, node_spectrum, x_matrix, HiggsField};
use crate::potentials::{hessian, hessian_of, second_divergence, SymField, SymplecticPotential};
use crate::spectral::{bg_function, psi_of_matrix, rho_pq, sqrt_one_minus, CMat2, Spectrum2, C64};

/// Solvers keep `δ⁺ ≤ 1 − ADMISSIBILITY_MARGIN` at every node.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-6;

/// Largest grid on which the dense finite-difference Jacobian is assembled.
pub const MAX_SOLVER_NODES: usize = 32 * 32;

/// A potential and Higgs field with cached `G`, `X = ξGξ̄G` and spectra.
#[derive(Clone, Debug)]
pub struct HKState {
    u: SymplecticPotential,
    xi: HiggsField,
    g: SymField,
    x: Vec<CMat2>,
    spectra: Vec<Spectrum2>,
}

impl HKState {
    pub fn new(u: SymplecticPotential, xi: HiggsField) -> Result<Self> {
        if u.grid() != xi.grid() {
            return Err(Error::InvalidArgument(
                "potential and Higgs field use different grids".into(),
            ));
        }
        let g = hessian(&u)?;
        let grid = u.grid();
        let mut x = Vec::with_capacity(grid.len());
        let mut spectra = Vec::with_capacity(grid.len());
        for (idx, (m, gg)) in xi.xi.values.iter().zip(&g.values).enumerate() {
            let s = node_spectrum(m, gg)?;
            if s.delta_plus > 1.0 - ADMISSIBILITY_MARGIN {
                return Err(Error::Inadmissible {
                    i: idx / grid.n2,
                    j: idx % grid.n2,
                    radius: s.delta_plus,
                });
            }
            x.push(x_matrix(m, gg));
            spectra.push(s);
        }
        Ok(Self {
            u,
            xi,
            g,
            x,
            spectra,
        })
    }

    pub fn u(&self) -> &SymplecticPotential {
        &self.u
    }

    pub fn xi(&self) -> &HiggsField {
        &self.xi
    }

    pub fn metric(&self) -> &SymField {
        &self.g
    }

    pub fn spectra(&self) -> &[Spectrum2] {
        &self.spectra
    }

    pub fn grid(&self) -> TorusGrid {
        self.u.grid()
    }

    pub fn with_potential(&self, u: SymplecticPotential) -> Result<Self> {
        Self::new(u, self.xi.clone())
    }

    /// `1 − max δ⁺`.
    pub fn admissibility_margin(&self) -> f64 {
        1.0 - self.spectra.iter().fold(0.0f64, |m, s| m.max(s.delta_plus))
    }

    /// `√(1−X)·G⁻¹` at every node.
    pub fn real_mm_tensor(&self) -> Result<Vec<CMat2>> {
        self.x
            .iter()
            .zip(&self.g.values)
            .map(|(x, g)| Ok(sqrt_one_minus(x)? * g.inverse().mat()))
            .collect()
    }
}

fn divergence_of(grid: TorusGrid, m: &[CMat2]) -> ComplexField {
    let comp = |f: &dyn Fn(&CMat2) -> C64| ComplexField {
        grid,
        values: m.iter().map(f).collect(),
    };
    second_divergence(
        &comp(&|a| a.0[0][0]),
        &comp(&|a| 0.5 * (a.0[0][1] + a.0[1][0])),
        &comp(&|a| a.0[1][1]),
    )
}

/// Tolerance on the imaginary part of the raw residual.
pub const REALNESS_TOL: f64 = 1e-10;

/// Raw complex `((√(1−X)G⁻¹)^{ab})_{,ab}` before taking the real part.
pub fn real_mm_residual_raw(state: &HKState) -> Result<ComplexField> {
    Ok(divergence_of(state.grid(), &state.real_mm_tensor()?))
}

/// `((1−ξGξ̄G)^{1/2} G⁻¹)^{ab}_{,ab}`; the imaginary part of the raw
/// computation must vanish up to `REALNESS_TOL`.
pub fn real_mm_residual(state: &HKState) -> Result<ScalarField> {
    let raw = real_mm_residual_raw(state)?;
    let imag = raw.im().sup_norm();
    if imag > REALNESS_TOL {
        return Err(Error::Domain(format!(
            "real moment map has imaginary part {imag:e}"
        )));
    }
    Ok(raw.re())
}

/// `(−½G⁻¹ + α̌ξGξ̄)^{ab}_{,ab}` with `α̌ = ψ(X)`.
pub fn alpha_form_divergence(state: &HKState) -> Result<ComplexField> {
    let m = state
        .x
        .iter()
        .zip(&state.xi.xi.values)
        .zip(&state.g.values)
        .map(|((x, xi), g)| {
            let xgx = xi.mat() * g.mat() * xi.conj().mat();
            Ok(g.inverse().mat().scale((-0.5).into()) + psi_of_matrix(x)? * xgx)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(divergence_of(state.grid(), &m))
}

/// `F̂ = ∫ (−½ log det G + ½ ρ) dμ`.
pub fn hk_energy(state: &HKState) -> Result<f64> {
    let mut acc = 0.0;
    for (g, s) in state.g.values.iter().zip(&state.spectra) {
        acc += -0.5 * g.det().ln() + 0.5 * bg_function(*s)?;
    }
    Ok(acc / state.grid().len() as f64)
}

/// L² gradient of `F̂` with respect to `h`, from the α̌-form of the first variation.
pub fn hk_gradient(state: &HKState) -> Result<ScalarField> {
    Ok(alpha_form_divergence(state)?.re())
}

/// `d²/dt² F̂(u + t·udot)` at `t = 0`.
pub fn second_variation(state: &HKState, udot: &ScalarField) -> Result<f64> {
    if udot.grid != state.grid() {
        return Err(Error::InvalidArgument(
            "direction lives on a different grid".into(),
        ));
    }
    let gdot = hessian_of(udot);
    let mut acc = 0.0;
    for k in 0..state.grid().len() {
        let g = state.g.values[k];
        let gd = gdot.values[k];
        let a = g.inverse().mat() * gd.mat();
        let tr_a = a.trace().re;
        let tr_a2 = (a * a).trace().re;
        let xi = state.xi.xi.values[k];
        let (xm, xc) = (xi.mat(), xi.conj().mat());
        let (gm, gdm) = (g.mat(), gd.mat());
        let p = state.x[k].trace().re;
        let q = xi.det().norm_sqr() * g.det() * g.det();
        let pd = (xm * gdm * xc * gm + xm * gm * xc * gdm).trace().re;
        let pdd = 2.0 * (xm * gdm * xc * gdm).trace().re;
        let qd = 2.0 * q * tr_a;
        let qdd = 4.0 * q * tr_a * tr_a - 2.0 * q * tr_a2;
        let r = rho_pq(p, q)?;
        let rho_dd =
            r.dp * pdd + r.dq * qdd + r.dpp * pd * pd + 2.0 * r.dpq * pd * qd + r.dqq * qd * qd;
        acc += 0.5 * tr_a2 + 0.5 * rho_dd;
    }
    Ok(acc / state.grid().len() as f64)
}

/// Which hypothesis of the convexity theorem a Higgs field satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexityHypothesis {
    Degenerate,
    SemidefiniteParts,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub hypothesis: ConvexityHypothesis,
    pub energies: Vec<f64>,
    pub min_second_difference: f64,
    pub convex: bool,
}

/// Second differences of `F̂` along the path must stay above this.
pub const CONVEXITY_TOL: f64 = -1e-9;

pub fn check_convexity_hypothesis(xi: &HiggsField) -> Result<ConvexityHypothesis> {
    let degenerate = xi
        .xi
        .values
        .iter()
        .all(|m| m.det().norm() <= 1e-12 * (1.0 + m.max_abs() * m.max_abs()));
    if degenerate {
        return Ok(ConvexityHypothesis::Degenerate);
    }
    let semidefinite = xi.xi.values.iter().all(|m| {
        let tol = 1e-12 * (1.0 + m.max_abs());
        m.re().is_semidefinite(tol) && m.im().is_semidefinite(tol)
    });
    if semidefinite {
        return Ok(ConvexityHypothesis::SemidefiniteParts);
    }
    Err(Error::Hypothesis(
        "ξ is neither degenerate (det ξ = 0) nor has semidefinite real and imaginary parts".into(),
    ))
}

/// Samples `F̂` along `(1−t)u₀ + t·u₁` and reports the smallest second difference.
pub fn convexity_probe(
    u0: &SymplecticPotential,
    u1: &SymplecticPotential,
    xi: &HiggsField,
    samples: usize,
) -> Result<ConvexityReport> {
    if samples < 3 {
        return Err(Error::InvalidArgument(
            "convexity probe needs at least 3 samples".into(),
        ));
    }
    for (name, u) in [("u0", u0), ("u1", u1)] {
        let norm = crate::higgs::xi_norm_field(xi, u)?;
        let worst = norm.values.iter().fold(0.0f64, |m, v| m.max(*v));
        if worst >= 1.0 {
            return Err(Error::Hypothesis(format!(
                "endpoint {name} has ‖ξ‖² = {worst} ≥ 1"
            )));
        }
    }
    let hypothesis = check_convexity_hypothesis(xi)?;
    let energies = (0..samples)
        .map(|i| {
            let t = i as f64 / (samples - 1) as f64;
            let h = u0.h.scaled(1.0 - t).add(&u1.h.scaled(t));
            let q = crate::spectral::Sym2::new(
                (1.0 - t) * u0.q.a11 + t * u1.q.a11,
                (1.0 - t) * u0.q.a12 + t * u1.q.a12,
                (1.0 - t) * u0.q.a22 + t * u1.q.a22,
            );
            hk_energy(&HKState::new(SymplecticPotential::new(q, h)?, xi.clone())?)
        })
        .collect::<Result<Vec<_>>>()?;
    let min_second_difference = energies
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::INFINITY, f64::min);
    Ok(ConvexityReport {
        hypothesis,
        energies,
        min_second_difference,
        convex: min_second_difference >= CONVEXITY_TOL,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub max_halvings: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            fd_step: 1e-8,
            max_halvings: 40,
        }
    }
}

/// `{ iterations, residual_sup, energy_trace, admissibility_min_margin }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_sup: f64,
    pub energy_trace: Vec<f64>,
    pub admissibility_min_margin: f64,
}

#[derive(Clone, Debug)]
pub struct RealMmSolution {
    pub potential: SymplecticPotential,
    pub report: SolveReport,
}

fn residual_of(h: &ScalarField, q: crate::spectral::Sym2, xi: &HiggsField) -> Result<ScalarField> {
    real_mm_residual(&HKState::new(
        SymplecticPotential { q, h: h.clone() },
        xi.clone(),
    )?)
}

fn fd_jacobian(
    h: &ScalarField,
    q: crate::spectral::Sym2,
    xi: &HiggsField,
    r0: &ScalarField,
    step: f64,
) -> Result<DMatrix<f64>> {
    let n = h.grid.len();
    let cols = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut hp = h.clone();
            hp.values[j] += step;
            let r = residual_of(&hp, q, xi)?;
            Ok(r.values
                .iter()
                .zip(&r0.values)
                .map(|(a, b)| (a - b) / step)
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut jac = DMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            jac[(i, j)] = *v;
        }
    }
    // The residual has zero mean and ignores constants; a rank-one term pins the mean of the step.
    let scale = (0..n).map(|i| jac[(i, i)].abs()).sum::<f64>() / n as f64;
    jac.iter_mut().for_each(|v| *v += scale / n as f64);
    Ok(jac)
}

/// Damped Newton iteration for the real moment map with `ξ` fixed.
pub fn solve_real_mm(
    xi: &HiggsField,
    u_init: &SymplecticPotential,
    opts: &SolveOptions,
) -> Result<RealMmSolution> {
    let grid = xi.grid();
    if grid.len() > MAX_SOLVER_NODES {
        return Err(Error::InvalidArgument(format!(
            "the Newton solver assembles dense Jacobians up to {MAX_SOLVER_NODES} nodes, got {}",
            grid.len()
        )));
    }
    let cmm = complex_mm_residual(xi).sup_norm();
    if cmm > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "ξ does not solve the complex moment map (residual {cmm:e})"
        )));
    }
    let mut state = HKState::new(u_init.clone(), xi.clone())?;
    let q = u_init.q;
    let mut energy = hk_energy(&state)?;
    let mut residual = real_mm_residual(&state)?;
    let mut report = SolveReport {
        iterations: 0,
        residual_sup: residual.sup_norm(),
        energy_trace: vec![energy],
        admissibility_min_margin: state.admissibility_margin(),
    };
    let mut jacobian: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
    let mut last_ratio = 1.0;
    while report.residual_sup >= opts.tol {
        if report.iterations >= opts.max_iter {
            return Err(Error::NoConvergence(format!(
                "real moment map residual {:e} after {} iterations",
                report.residual_sup, report.iterations
            )));
        }
        if jacobian.is_none() || last_ratio > 0.25 {
            jacobian = Some(fd_jacobian(&state.u.h, q, xi, &residual, opts.fd_step)?.lu());
        }
        let rhs = DVector::from_iterator(grid.len(), residual.values.iter().map(|v| -v));
        let step = jacobian
            .as_ref()
            .and_then(|lu| lu.solve(&rhs))
            .ok_or_else(|| Error::NoConvergence("singular Newton system".into()))?;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let values = state
                .u
                .h
                .values
                .iter()
                .zip(step.iter())
                .map(|(h, d)| h + alpha * d)
                .collect();
            let trial = SymplecticPotential::new(q, ScalarField::new(grid, values)?)?;
            if let Ok(s) = state.with_potential(trial) {
                let e = hk_energy(&s)?;
                if e <= energy + 1e-13 * (1.0 + energy.abs()) {
                    accepted = Some((s, e));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let (s, e) = accepted.ok_or_else(|| {
            Error::NoConvergence(
                "line search could not keep the state admissible while descending".into(),
            )
        })?;
        let new_residual = real_mm_residual(&s)?;
        last_ratio = new_residual.sup_norm() / report.residual_sup.max(f64::MIN_POSITIVE);
        if alpha < 1.0 {
            last_ratio = 1.0;
        }
        state = s;
        energy = e;
        residual = new_residual;
        report.iterations += 1;
        report.residual_sup = residual.sup_norm();
        report.energy_trace.push(energy);
        report.admissibility_min_margin = report
            .admissibility_min_margin
            .min(state.admissibility_margin());
    }
    Ok(RealMmSolution {
        potential: state.u,
        report,
    })
}

/// Node-wise minimum eigenvalue of the Hermitian matrix `√(1−X)G⁻¹`.
pub fn real_mm_tensor_min_eig(state: &HKState) -> Result<Field<f64>> {
    let t = state.real_mm_tensor()?;
    let values = t
        .iter()
        .map(|m| {
            let a = m.0[0][0].re;
            let d = m.0[1][1].re;
            let b = 0.5 * (m.0[0][1] + m.0[1][0].conj());
            0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
        })
        .collect();
    Field::new(state.grid(), values)
}
