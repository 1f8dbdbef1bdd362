//! Uniform periodic grids on ℝ²/ℤ², Fourier-spectral differentiation and
//! band-limited random fields.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Node `(i, j)` sits at `(i/n1, j/n2)`; storage is row-major with `j` fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n1: usize,
    pub n2: usize,
}

impl TorusGrid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        for n in [n1, n2] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::Grid(format!(
                    "resolution {n} must be even and at least 8"
                )));
            }
        }
        Ok(Self { n1, n2 })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 / self.n1 as f64, j as f64 / self.n2 as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n1).flat_map(move |i| (0..self.n2).map(move |j| (i, j)))
    }

    /// Signed wavenumbers `(k1, k2)` of storage slot `idx` in mode space.
    pub fn wavenumber(&self, idx: usize) -> (i64, i64) {
        let (i, j) = (idx / self.n2, idx % self.n2);
        (signed(i, self.n1), signed(j, self.n2))
    }

    pub fn mode_index(&self, k1: i64, k2: i64) -> usize {
        let i = k1.rem_euclid(self.n1 as i64) as usize;
        let j = k2.rem_euclid(self.n2 as i64) as usize;
        self.index(i, j)
    }

    pub fn is_nyquist(&self, k1: i64, k2: i64) -> (bool, bool) {
        (
            k1.unsigned_abs() as usize * 2 == self.n1,
            k2.unsigned_abs() as usize * 2 == self.n2,
        )
    }
}

fn signed(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Values on a torus grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub grid: TorusGrid,
    pub values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<C64>;

impl<T: Copy> Field<T> {
    pub fn new(grid: TorusGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> T) -> Self {
        let values = grid
            .nodes()
            .map(|(i, j)| {
                let (y1, y2) = grid.node(i, j);
                f(y1, y2)
            })
            .collect();
        Self { grid, values }
    }

    pub fn constant(grid: TorusGrid, v: T) -> Self {
        Self {
            grid,
            values: vec![v; grid.len()],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<U: Copy, V>(&self, other: &Field<U>, f: impl Fn(T, U) -> V) -> Field<V> {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Integral over the unit torus (area 1), equal to the mean.
    pub fn integrate(&self) -> f64 {
        self.mean()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| C64::new(v, 0.0))
    }

    pub fn to_modes(&self) -> Modes {
        self.to_complex().to_modes()
    }

    pub fn partial(&self, axis: usize, order: u32) -> ScalarField {
        let (o1, o2) = if axis == 1 { (order, 0) } else { (0, order) };
        self.to_modes().derivative(o1, o2).to_field().re()
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("y1,y2,value\n");
        for (i, j) in self.grid.nodes() {
            let (y1, y2) = self.grid.node(i, j);
            let _ = writeln!(out, "{y1:.16e},{y2:.16e},{:.16e}", self.at(i, j));
        }
        out
    }

    pub fn to_container(&self) -> FieldContainer {
        FieldContainer {
            n1: self.grid.n1,
            n2: self.grid.n2,
            values: self.values.clone(),
        }
    }

    pub fn from_container(c: &FieldContainer) -> Result<Self> {
        Self::new(TorusGrid::new(c.n1, c.n2)?, c.values.clone())
    }
}

impl ComplexField {
    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn re(&self) -> ScalarField {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> ScalarField {
        self.map(|v| v.im)
    }

    pub fn to_modes(&self) -> Modes {
        let mut buf = self.values.clone();
        fft2(self.grid, &mut buf, FftDirection::Forward);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        Modes {
            grid: self.grid,
            coeffs: buf,
        }
    }

    pub fn partial(&self, axis: usize, order: u32) -> ComplexField {
        let (o1, o2) = if axis == 1 { (order, 0) } else { (0, order) };
        self.to_modes().derivative(o1, o2).to_field()
    }
}

/// Fourier coefficients normalized so that the zero mode is the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct Modes {
    pub grid: TorusGrid,
    pub coeffs: Vec<C64>,
}

impl Modes {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn new(grid: TorusGrid, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn get(&self, k1: i64, k2: i64) -> C64 {
        self.coeffs[self.grid.mode_index(k1, k2)]
    }

    pub fn set(&mut self, k1: i64, k2: i64, v: C64) {
        let idx = self.grid.mode_index(k1, k2);
        self.coeffs[idx] = v;
    }

    pub fn to_field(&self) -> ComplexField {
        let mut buf = self.coeffs.clone();
        fft2(self.grid, &mut buf, FftDirection::Inverse);
        ComplexField {
            grid: self.grid,
            values: buf,
        }
    }

    /// Mean of `|f|²`, by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Spectral derivative `∂₁^{o1} ∂₂^{o2}`.
    pub fn derivative(&self, o1: u32, o2: u32) -> Modes {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let (k1, k2) = self.grid.wavenumber(idx);
                c * multiplier(k1, self.grid.n1, o1) * multiplier(k2, self.grid.n2, o2)
            })
            .collect();
        Modes {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, s: C64) -> Modes {
        Modes {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Modes) -> Modes {
        Modes {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Symbol of `∂^order` for wavenumber `k` on an `n`-point axis; odd orders
/// drop the Nyquist mode.
pub fn multiplier(k: i64, n: usize, order: u32) -> C64 {
    if order == 0 {
        return C64::new(1.0, 0.0);
    }
    if order % 2 == 1 && k.unsigned_abs() as usize * 2 == n {
        return C64::new(0.0, 0.0);
    }
    C64::new(0.0, 2.0 * PI * k as f64).powu(order)
}

fn fft2(grid: TorusGrid, buf: &mut [C64], dir: FftDirection) {
    let (n1, n2) = (grid.n1, grid.n2);
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let rows = planner.plan_fft(n2, dir);
        let cols = planner.plan_fft(n1, dir);
        rows.process(buf);
        let mut t = vec![C64::new(0.0, 0.0); n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                t[j * n1 + i] = buf[i * n2 + j];
            }
        }
        cols.process(&mut t);
        for i in 0..n1 {
            for j in 0..n2 {
                buf[i * n2 + j] = t[j * n1 + i];
            }
        }
    });
}

/// `{ "n1", "n2", "values" }` container for real fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldContainer {
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<f64>,
}

/// Seeded zero-mean trigonometric polynomial with modes `|k|∞ ≤ bandwidth`,
/// scaled to sup-norm `amplitude` over the grid nodes.
pub fn random_field(
    grid: TorusGrid,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> Result<ScalarField> {
    let modes = random_modes(grid, &mut ChaCha8Rng::seed_from_u64(seed), bandwidth)?;
    let f = modes.to_field().re();
    let sup = f.sup_norm();
    if sup == 0.0 {
        return Ok(f);
    }
    let mut g = f.scaled(amplitude / sup);
    let m = g.mean();
    g.values.iter_mut().for_each(|v| *v -= m);
    Ok(g)
}

/// Hermitian-symmetric random modes with zero mean and `1/(1+|k|²)` decay.
pub fn random_modes(grid: TorusGrid, rng: &mut impl Rng, bandwidth: usize) -> Result<Modes> {
    if 2 * bandwidth >= grid.n1.min(grid.n2) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth {bandwidth} must be below {}",
            grid.n1.min(grid.n2) / 2
        )));
    }
    let b = bandwidth as i64;
    let mut modes = Modes::zeros(grid);
    for k1 in 0..=b {
        for k2 in -b..=b {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let w = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w;
            modes.set(k1, k2, c);
            modes.set(-k1, -k2, c.conj());
        }
    }
    Ok(modes)
}
