//! Solutions on the torus that depend on `y¹` only, with the rank-one Higgs
//! family `ξ = [[c, F], [F, F²/c]]` and `u = ½|y|² + f(y¹)`.
//!
//! For this family the real moment map collapses to a pointwise equation in
//! `φ = f″` plus one scalar `k`, fixed by requiring `mean(φ) = 0`. Writing
//! `p = (1+φ)|c|² + |F|²`, `δ = p²/|c|²` and `s = √(1−δ)`:
//!
//! * [`Reduction::Exact`]: `p/(1+s) − 1/(1+φ) = k`, i.e. the (1,1) entry of
//!   `√(1−X)G⁻¹` is constant. Lifts to a solution of the torus equations.
//! * [`Reduction::Literal`]: `p/(1+s) − (1+φ) = k`, solved through the cubic
//!   of [`cubic_roots`] in `x = φ + 1 + k`. Kept for comparison; its solutions
//!   do not lift to zeros of the torus residual when `F` is not constant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, ScalarField, TorusGrid};
use crate::higgs::HiggsField;
use crate::potentials::SymplecticPotential;
use crate::spectral::{CSym2, C64};

/// `|c|` bound of the guaranteed-existence regime.
pub const EXISTENCE_CMOD: f64 = 0.3;

/// Nonsingularity margin: `p² ≤ |c|²(1 − ε)`.
pub const NONSINGULAR_EPS: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FMode {
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inv1DProblem {
    pub c: C64,
    /// `F` at the nodes `y¹ = i/n`.
    pub f: Vec<C64>,
}

impl Inv1DProblem {
    pub fn new(c: C64, f: Vec<C64>) -> Result<Self> {
        let n = f.len();
        if n < 8 || n % 2 != 0 {
            return Err(Error::Grid(format!(
                "resolution {n} must be even and at least 8"
            )));
        }
        if c.norm() == 0.0 {
            return Err(Error::InvalidArgument(
                "the constant mode c must be nonzero".into(),
            ));
        }
        if let Some(v) = f.iter().find(|v| v.norm() > c.norm()) {
            return Err(Error::InvalidArgument(format!(
                "|F| = {} exceeds |c| = {}",
                v.norm(),
                c.norm()
            )));
        }
        Ok(Self { c, f })
    }

    /// `F(y) = Σ (re + i·im) e^{2πi k y}`.
    pub fn from_modes(c: C64, modes: &[FMode], n: usize) -> Result<Self> {
        let f = (0..n)
            .map(|i| {
                let y = i as f64 / n as f64;
                modes
                    .iter()
                    .map(|m| C64::new(m.re, m.im) * C64::from_polar(1.0, 2.0 * PI * m.k as f64 * y))
                    .sum()
            })
            .collect();
        Self::new(c, f)
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// Enforces `|c| < 3/10`.
    pub fn check_existence_regime(&self) -> Result<()> {
        if self.c.norm() >= EXISTENCE_CMOD {
            return Err(Error::InvalidArgument(format!(
                "|c| = {} is outside the guaranteed-existence regime |c| < {EXISTENCE_CMOD}",
                self.c.norm()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Exact,
    Literal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Inv1DOptions {
    pub reduction: Reduction,
    /// Bracket for `k`; `None` means `[−1, |c| − 1]`.
    pub bracket: Option<(f64, f64)>,
    pub scan_samples: usize,
}

impl Default for Inv1DOptions {
    fn default() -> Self {
        Self {
            reduction: Reduction::Exact,
            bracket: None,
            scan_samples: 128,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Inv1DBounds {
    pub k_plus_one: f64,
    pub k_bracket_ok: bool,
    pub min_one_plus_phi: f64,
    pub metric_floor_ok: bool,
    pub max_p_sq_over_c_sq: f64,
    pub nonsingular_ok: bool,
    pub max_p_over_c_sq: f64,
    pub growth_ok: bool,
}

impl Inv1DBounds {
    pub fn all_ok(&self) -> bool {
        self.k_bracket_ok && self.metric_floor_ok && self.nonsingular_ok && self.growth_ok
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanSummary {
    pub samples: usize,
    pub sign_changes: usize,
    pub multiple_roots_flag: bool,
}

#[derive(Clone, Debug)]
pub struct Inv1DSolution {
    pub phi: Vec<f64>,
    pub k: f64,
    /// Periodic `f` with `f″ = φ`, zero mean.
    pub f: Vec<f64>,
    pub reduction: Reduction,
    pub residual_sup: f64,
    pub bounds: Inv1DBounds,
    pub scan: ScanSummary,
}

/// `ξ = [[c, F], [F, F²/c]]` on the square `n × n` grid.
pub fn assemble_xi(p: &Inv1DProblem) -> Result<HiggsField> {
    assemble_xi_on(p, p.n())
}

pub fn assemble_xi_on(p: &Inv1DProblem, n2: usize) -> Result<HiggsField> {
    if p.c.norm() == 0.0 {
        return Err(Error::InvalidArgument(
            "the constant mode c must be nonzero".into(),
        ));
    }
    let grid = TorusGrid::new(p.n(), n2)?;
    let values = grid
        .nodes()
        .map(|(i, _)| {
            let f = p.f[i];
            CSym2::new(p.c, f, f * f / p.c)
        })
        .collect();
    Ok(HiggsField::new(Field::new(grid, values)?))
}

/// Real roots in `(0, 1 + |c|]` of
/// `x³ + (|F/c|² − k)x² + (|c|² − 2)x + |F|² − k|c|² = 0`
/// with `(x−k)|c|² + |F|² ≤ |c|`, ascending.
pub fn cubic_roots(cmod: f64, fmod: f64, k: f64) -> Vec<f64> {
    if !(cmod > 0.0) {
        return Vec::new();
    }
    let c2 = cmod * cmod;
    let f2 = fmod * fmod;
    let b = f2 / c2 - k;
    let c = c2 - 2.0;
    let d = f2 - k * c2;
    let poly = |x: f64| ((x + b) * x + c) * x + d;
    let dpoly = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    let mut roots: Vec<f64> = real_cubic_roots(b, c, d)
        .into_iter()
        .map(|mut x| {
            for _ in 0..3 {
                let dp = dpoly(x);
                if dp == 0.0 {
                    break;
                }
                x -= poly(x) / dp;
            }
            x
        })
        .filter(|&x| x > 0.0 && x <= 1.0 + cmod && (x - k) * c2 + f2 <= cmod)
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    roots
}

/// Real roots of the monic cubic `x³ + bx² + cx + d`.
fn real_cubic_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if p.abs() < 1e-300 && q.abs() < 1e-300 {
        return vec![-shift];
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        let t = (-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt();
        vec![t - shift]
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|j| 2.0 * r * (theta - 2.0 * PI * j as f64 / 3.0).cos() - shift)
            .collect()
    }
}

fn p_of(phi: f64, c2: f64, f2: f64) -> f64 {
    (1.0 + phi) * c2 + f2
}

fn lhs(phi: f64, c2: f64, f2: f64, reduction: Reduction) -> f64 {
    let p = p_of(phi, c2, f2);
    let s = (1.0 - p * p / c2).max(0.0).sqrt();
    match reduction {
        Reduction::Exact => p / (1.0 + s) - 1.0 / (1.0 + phi),
        Reduction::Literal => p / (1.0 + s) - (1.0 + phi),
    }
}

/// Pointwise residual of the reduced equation.
pub fn reduced_residual(phi: f64, c: C64, f: C64, k: f64, reduction: Reduction) -> f64 {
    lhs(phi, c.norm_sqr(), f.norm_sqr(), reduction) - k
}

/// Unique root in `φ` of the exact reduction; its left side increases strictly
/// from `−∞` at `φ = −1` to its value at `δ = 1`.
fn exact_node(k: f64, c2: f64, f2: f64) -> Option<f64> {
    let cmod = c2.sqrt();
    let hi_bound = (cmod - f2) / c2 - 1.0;
    let (mut lo, mut hi) = (-1.0, hi_bound);
    if !(hi > lo) || lhs(hi, c2, f2, Reduction::Exact) < k {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lhs(mid, c2, f2, Reduction::Exact) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn literal_node(k: f64, cmod: f64, fmod: f64, previous: Option<f64>) -> Option<f64> {
    let roots = cubic_roots(cmod, fmod, k);
    let x = match previous {
        Some(prev) => {
            let target = prev + 1.0 + k;
            roots
                .into_iter()
                .min_by(|a, b| (a - target).abs().partial_cmp(&(b - target).abs()).unwrap())?
        }
        None => *roots.first()?,
    };
    Some(x - 1.0 - k)
}

fn phi_of_k(
    p: &Inv1DProblem,
    k: f64,
    reduction: Reduction,
    warm: Option<&[f64]>,
) -> Option<Vec<f64>> {
    let c2 = p.c.norm_sqr();
    p.f.iter()
        .enumerate()
        .map(|(i, f)| match reduction {
            Reduction::Exact => exact_node(k, c2, f.norm_sqr()),
            Reduction::Literal => literal_node(k, p.c.norm(), f.norm(), warm.map(|w| w[i])),
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Spectral double antiderivative with zero mean.
pub fn double_antiderivative(phi: &[f64]) -> Vec<f64> {
    let n = phi.len();
    let mut modes: Vec<C64> = phi.iter().map(|v| C64::new(*v, 0.0)).collect();
    let planner = &mut rustfft::FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut modes);
    for (i, m) in modes.iter_mut().enumerate() {
        let k = if i <= n / 2 {
            i as f64
        } else {
            i as f64 - n as f64
        };
        *m = if i == 0 {
            C64::new(0.0, 0.0)
        } else {
            *m / (-(2.0 * PI * k).powi(2))
        };
    }
    planner.plan_fft_inverse(n).process(&mut modes);
    modes.iter().map(|m| m.re / n as f64).collect()
}

fn bounds_for(p: &Inv1DProblem, phi: &[f64], k: f64) -> Inv1DBounds {
    let cmod = p.c.norm();
    let c2 = cmod * cmod;
    let min_one_plus_phi = phi.iter().fold(f64::INFINITY, |m, v| m.min(1.0 + v));
    let ps: Vec<f64> = phi
        .iter()
        .zip(&p.f)
        .map(|(v, f)| p_of(*v, c2, f.norm_sqr()))
        .collect();
    let max_p = ps.iter().fold(0.0f64, |m, v| m.max(*v));
    let max_p_sq_over_c_sq = max_p * max_p / c2;
    let max_p_over_c_sq = max_p / c2;
    Inv1DBounds {
        k_plus_one: k + 1.0,
        k_bracket_ok: (0.0..=cmod).contains(&(k + 1.0)),
        min_one_plus_phi,
        metric_floor_ok: min_one_plus_phi >= 1.0 - cmod,
        max_p_sq_over_c_sq,
        nonsingular_ok: max_p_sq_over_c_sq <= 1.0 - NONSINGULAR_EPS,
        max_p_over_c_sq,
        growth_ok: max_p_over_c_sq < 3.0 + cmod,
    }
}

/// Finds `k` with `mean(φ(k)) = 0`: a uniform pre-scan over the bracket
/// locates sign changes (the one nearest the `F ≡ 0` value `−√(1−|c|²)` is
/// kept if there are several), then bisection refines it.
pub fn solve_inv1d(p: &Inv1DProblem, opts: &Inv1DOptions) -> Result<Inv1DSolution> {
    p.check_existence_regime()?;
    let cmod = p.c.norm();
    let (lo, hi) = opts.bracket.unwrap_or((-1.0, cmod - 1.0));
    if !(hi > lo) || opts.scan_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "empty bracket [{lo}, {hi}]"
        )));
    }
    let reduction = opts.reduction;
    let m = opts.scan_samples;
    let ks: Vec<f64> = (0..=m)
        .map(|i| lo + (hi - lo) * i as f64 / m as f64)
        .collect();
    let mut warm: Option<Vec<f64>> = None;
    let means: Vec<Option<f64>> = ks
        .iter()
        .map(|&k| {
            let phi = phi_of_k(p, k, reduction, warm.as_deref());
            if let Some(ref v) = phi {
                warm = Some(v.clone());
            }
            phi.map(|v| mean(&v))
        })
        .collect();
    let cells: Vec<usize> = (0..m)
        .filter(|&i| match (means[i], means[i + 1]) {
            (Some(a), Some(b)) => a == 0.0 || (a < 0.0) != (b < 0.0),
            _ => false,
        })
        .collect();
    let scan = ScanSummary {
        samples: m + 1,
        sign_changes: cells.len(),
        multiple_roots_flag: cells.len() > 1,
    };
    let k0 = -(1.0 - cmod * cmod).sqrt();
    let cell = *cells
        .iter()
        .min_by(|&&a, &&b| {
            let da = (0.5 * (ks[a] + ks[a + 1]) - k0).abs();
            let db = (0.5 * (ks[b] + ks[b + 1]) - k0).abs();
            da.partial_cmp(&db).unwrap()
        })
        .ok_or_else(|| {
            let trace: Vec<String> = ks
                .iter()
                .zip(&means)
                .step_by((m / 8).max(1))
                .map(|(k, v)| {
                    format!(
                        "{k:.6}:{}",
                        v.map_or("none".to_string(), |x| format!("{x:.3e}"))
                    )
                })
                .collect();
            Error::NoConvergence(format!(
                "no admissible k in [{lo}, {hi}] makes mean(φ) vanish; scan {}",
                trace.join(", ")
            ))
        })?;
    let (mut a, mut b) = (ks[cell], ks[cell + 1]);
    let mut fa = means[cell].unwrap();
    let mut warm = phi_of_k(p, a, reduction, None);
    let mut best = (a, warm.clone().unwrap());
    if fa != 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let phi = phi_of_k(p, mid, reduction, warm.as_deref())
                .ok_or_else(|| Error::NoConvergence(format!("no admissible root at k = {mid}")))?;
            let fm = mean(&phi);
            best = (mid, phi.clone());
            warm = Some(phi);
            if fm == 0.0 {
                break;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
    }
    let (k, phi) = best;
    let residual_sup = phi
        .iter()
        .zip(&p.f)
        .map(|(v, f)| reduced_residual(*v, p.c, *f, k, reduction).abs())
        .fold(0.0, f64::max);
    let bounds = bounds_for(p, &phi, k);
    let f = double_antiderivative(&phi);
    Ok(Inv1DSolution {
        phi,
        k,
        f,
        reduction,
        residual_sup,
        bounds,
        scan,
    })
}

/// The diagonal family `ξ = diag(0, b(y¹))`: the reduction reads
/// `1/(1+φ) = −k`, so zero mean forces `φ ≡ 0` and `k = −1`.
pub fn solve_diagonal_family(b: &[C64]) -> Result<Inv1DSolution> {
    let n = b.len();
    if n < 8 || n % 2 != 0 {
        return Err(Error::Grid(format!(
            "resolution {n} must be even and at least 8"
        )));
    }
    if let Some(v) = b.iter().find(|v| v.norm() >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "|ξ²²| = {} is not below 1",
            v.norm()
        )));
    }
    let phi = vec![0.0; n];
    Ok(Inv1DSolution {
        f: vec![0.0; n],
        phi,
        k: -1.0,
        reduction: Reduction::Exact,
        residual_sup: 0.0,
        bounds: Inv1DBounds {
            k_plus_one: 0.0,
            k_bracket_ok: true,
            min_one_plus_phi: 1.0,
            metric_floor_ok: true,
            max_p_sq_over_c_sq: 0.0,
            nonsingular_ok: true,
            max_p_over_c_sq: 0.0,
            growth_ok: true,
        },
        scan: ScanSummary {
            samples: 0,
            sign_changes: 1,
            multiple_roots_flag: false,
        },
    })
}

/// Embeds a solution as a `y²`-independent state on an `n × n` grid.
pub fn lift_to_torus(
    p: &Inv1DProblem,
    sol: &Inv1DSolution,
) -> Result<(SymplecticPotential, HiggsField)> {
    let n = p.n();
    let grid = TorusGrid::square(n)?;
    let h = ScalarField::new(grid, grid.nodes().map(|(i, _)| sol.f[i]).collect())?;
    Ok((SymplecticPotential::from_perturbation(h), assemble_xi(p)?))
}
