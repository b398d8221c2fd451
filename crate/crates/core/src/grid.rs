//! Periodic grid functions on the circle `[0, 1)`.
//!
//! A [`DensityGrid`] stores samples `values[i] ≈ f(i / N)` of a 1-periodic
//! function. Quadrature is the midpoint rule, which is exact for
//! trigonometric polynomials of degree `< N`. All reductions run left to
//! right in index order so results do not depend on the caller's threading.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Smallest admissible grid size.
pub const MIN_POINTS: usize = 16;

/// Default grid size used throughout the crate.
pub const DEFAULT_POINTS: usize = 256;

/// Local interpolation stencil on a uniform periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// 4-point Catmull–Rom spline (C¹, third order).
    CatmullRom,
    /// 6-point Lagrange interpolation (sixth order).
    #[default]
    Lagrange6,
}

/// Weights of a stencil evaluated at one point: `f(x) ≈ Σ_k weights[k] · f[start + k]`
/// with indices taken modulo `N`.
#[derive(Debug, Clone, Copy)]
pub struct StencilWeights {
    pub start: isize,
    pub weights: [f64; 6],
    pub len: usize,
}

impl StencilWeights {
    pub fn iter(&self, n: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(move |k| (wrap_index(self.start + k as isize, n), self.weights[k]))
    }
}

#[inline]
pub(crate) fn wrap_index(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Reduces `x` into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl Stencil {
    pub fn weights(&self, x: f64, n: usize) -> StencilWeights {
        let s = wrap_unit(x) * n as f64;
        let i0 = s.floor();
        let t = s - i0;
        let i0 = i0 as isize;
        match self {
            Stencil::CatmullRom => {
                let t2 = t * t;
                let t3 = t2 * t;
                let mut weights = [0.0; 6];
                weights[0] = 0.5 * (-t3 + 2.0 * t2 - t);
                weights[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
                weights[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
                weights[3] = 0.5 * (t3 - t2);
                StencilWeights {
                    start: i0 - 1,
                    weights,
                    len: 4,
                }
            }
            Stencil::Lagrange6 => {
                const NODES: [f64; 6] = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
                const DENOMS: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
                let mut weights = [0.0; 6];
                for (k, w) in weights.iter_mut().enumerate() {
                    let mut num = 1.0;
                    for (m, node) in NODES.iter().enumerate() {
                        if m != k {
                            num *= t - node;
                        }
                    }
                    *w = num / DENOMS[k];
                }
                StencilWeights {
                    start: i0 - 2,
                    weights,
                    len: 6,
                }
            }
        }
    }
}

/// Samples of a 1-periodic real function on the uniform grid `x_i = i / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < MIN_POINTS || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "grid size must be even and >= {MIN_POINTS}, got {n}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i}")));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| f(i as f64 / n as f64)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    /// Internal constructor for values produced from an already valid grid.
    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= MIN_POINTS && values.len() % 2 == 0);
        Self { values }
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_points() as f64
    }

    /// Total mass `(1/N) Σ values[i]`.
    pub fn mass(&self) -> f64 {
        let mut s = 0.0;
        for v in &self.values {
            s += v;
        }
        s / self.n_points() as f64
    }

    pub fn norm_l1(&self) -> f64 {
        let mut s = 0.0;
        for v in &self.values {
            s += v.abs();
        }
        s / self.n_points() as f64
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sixth-order centred difference on the periodic grid.
    pub fn derivative(&self) -> DensityGrid {
        let n = self.n_points();
        let f = &self.values;
        let scale = n as f64 / 60.0;
        let out = (0..n)
            .map(|i| {
                let at = |k: isize| f[wrap_index(i as isize + k, n)];
                scale
                    * (45.0 * (at(1) - at(-1)) - 9.0 * (at(2) - at(-2)) + (at(3) - at(-3)))
            })
            .collect();
        DensityGrid::from_values_unchecked(out)
    }

    /// `‖f‖_{L¹} + ‖f′‖_{L¹}`.
    pub fn norm_w11(&self) -> f64 {
        self.norm_l1() + self.derivative().norm_l1()
    }

    /// Evaluates the grid function at an arbitrary point with the default stencil.
    pub fn interpolate(&self, x: f64) -> f64 {
        self.interpolate_with(x, Stencil::default())
    }

    pub fn interpolate_with(&self, x: f64, stencil: Stencil) -> f64 {
        let n = self.n_points();
        let w = stencil.weights(x, n);
        let mut s = 0.0;
        for (j, wj) in w.iter(n) {
            s += wj * self.values[j];
        }
        s
    }

    pub fn project_zero_mass(&self) -> DensityGrid {
        let m = self.mass();
        DensityGrid::from_values_unchecked(self.values.iter().map(|v| v - m).collect())
    }

    /// Rescales to unit mass.
    pub fn normalize(&self) -> Result<DensityGrid> {
        let m = self.mass();
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize a density of mass {m}"
            )));
        }
        Ok(self.scale(1.0 / m))
    }

    pub fn is_probability(&self) -> bool {
        self.values.iter().all(|&v| v >= -1e-12) && (self.mass() - 1.0).abs() <= 1e-10
    }

    pub fn scale(&self, c: f64) -> DensityGrid {
        DensityGrid::from_values_unchecked(self.values.iter().map(|v| c * v).collect())
    }

    /// Pointwise product.
    pub fn pointwise_mul(&self, other: &DensityGrid) -> Result<DensityGrid> {
        self.check_same(other)?;
        Ok(DensityGrid::from_values_unchecked(
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        ))
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: f64, other: &DensityGrid) -> Result<DensityGrid> {
        self.check_same(other)?;
        Ok(DensityGrid::from_values_unchecked(
            self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
        ))
    }

    pub fn l1_distance(&self, other: &DensityGrid) -> Result<f64> {
        Ok(self.axpy(-1.0, other)?.norm_l1())
    }

    pub fn w11_distance(&self, other: &DensityGrid) -> Result<f64> {
        Ok(self.axpy(-1.0, other)?.norm_w11())
    }

    pub fn sup_distance(&self, other: &DensityGrid) -> Result<f64> {
        Ok(self.axpy(-1.0, other)?.norm_sup())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_same(&self, other: &DensityGrid) -> Result<()> {
        if self.n_points() != other.n_points() {
            return Err(Error::DimensionMismatch {
                expected: self.n_points(),
                got: other.n_points(),
            });
        }
        Ok(())
    }

    /// Writes the `x,value` CSV form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:?},{:?}", self.node(i), v)?;
        }
        Ok(())
    }

    /// Reads the `x,value` CSV form, rejecting non-uniform abscissae.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty density file".into()))??;
        if header.trim() != "x,value" {
            return Err(Error::Format(format!("expected header `x,value`, got `{header}`")));
        }
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (x, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("line {}: expected two fields", lineno + 2)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))
            };
            xs.push(parse(x)?);
            vals.push(parse(v)?);
        }
        let n = vals.len();
        for (i, x) in xs.iter().enumerate() {
            if (x - i as f64 / n as f64).abs() > 1e-12 {
                return Err(Error::Format(format!(
                    "non-uniform abscissa at row {i}: {x} (expected {})",
                    i as f64 / n as f64
                )));
            }
        }
        Self::new(vals)
    }
}

impl Add for &DensityGrid {
    type Output = DensityGrid;
    fn add(self, rhs: &DensityGrid) -> DensityGrid {
        self.axpy(1.0, rhs).expect("grid size mismatch in addition")
    }
}

impl Sub for &DensityGrid {
    type Output = DensityGrid;
    fn sub(self, rhs: &DensityGrid) -> DensityGrid {
        self.axpy(-1.0, rhs).expect("grid size mismatch in subtraction")
    }
}

impl Mul<&DensityGrid> for f64 {
    type Output = DensityGrid;
    fn mul(self, rhs: &DensityGrid) -> DensityGrid {
        rhs.scale(self)
    }
}

/// `Σ_k (a_k cos 2πkx + b_k sin 2πkx)` sampled on `n` points; `terms` are `(k, a_k, b_k)`.
pub fn trig_grid(n: usize, terms: &[(u32, f64, f64)]) -> Result<DensityGrid> {
    DensityGrid::from_fn(n, |x| {
        terms.iter().fold(0.0, |s, &(k, a, b)| {
            let th = 2.0 * PI * k as f64 * x;
            s + a * th.cos() + b * th.sin()
        })
    })
}
