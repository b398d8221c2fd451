//! Random circle maps with additive noise: `X_{n+1} = f_n^ε(X_n) + ξ_n (mod 1)`
//! with `ξ_n` drawn from a common density `q`.
//!
//! The annealed transfer operator has kernel `q(y − f^ε(x))`. With
//! `q ≥ α > 0` it splits as `α·(mass projector) + (1 − α)·(Markov)`, so
//! zero-mass densities contract in L¹ by `1 − α` per step.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{wrap_unit, DensityGrid};
use crate::maps::{CircleMap, ExpandingMap, TrigPoly};
use crate::transfer::{OperatorKind, TransferMatrix};

/// Samples per Monte Carlo block; each block owns one RNG stream.
const MC_BLOCK: usize = 1 << 16;

/// Noise density sampled on a grid.
#[derive(Debug, Clone)]
pub struct NoiseDensity {
    q: DensityGrid,
    dq: DensityGrid,
    alpha: f64,
    lip: f64,
    cdf: Vec<f64>,
}

impl NoiseDensity {
    pub fn new(q: DensityGrid) -> Result<Self> {
        let mass = q.mass();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "noise density must have unit mass, got {mass}"
            )));
        }
        let alpha = q.min();
        if alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise density has a negative sample ({alpha})"
            )));
        }
        if alpha == 0.0 {
            log::warn!("noise density vanishes somewhere; Doeblin contraction unavailable");
        }
        let dq = q.derivative();
        let lip = dq.norm_sup();
        let n = q.n_points();
        let mut cdf = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for v in q.values() {
            acc += v / n as f64;
            cdf.push(acc);
        }
        Ok(Self {
            q,
            dq,
            alpha,
            lip,
            cdf,
        })
    }

    /// Normalises arbitrary nonnegative samples first.
    pub fn from_unnormalized(q: DensityGrid) -> Result<Self> {
        Self::new(q.normalize()?)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(DensityGrid::constant(n, 1.0)?)
    }

    /// `floor + (1 − floor)·b/∫b` with `b` a von Mises bump of angular
    /// standard deviation `2π·width` centred at `center`.
    pub fn bump(n: usize, center: f64, width: f64, floor: f64) -> Result<Self> {
        if !(width > 0.0) || !(0.0..1.0).contains(&floor) {
            return Err(Error::InvalidArgument(format!(
                "bump needs width > 0 and floor in [0, 1), got width {width}, floor {floor}"
            )));
        }
        let kappa = 1.0 / (2.0 * PI * width).powi(2);
        let b = DensityGrid::from_fn(n, |x| (kappa * ((2.0 * PI * (x - center)).cos() - 1.0)).exp())?
            .normalize()?;
        let q = DensityGrid::from_fn(n, |_| floor)?.axpy(1.0 - floor, &b)?;
        Self::new(q)
    }

    /// `floor + (1 − floor)·(1 + cos 2π(x − center))`.
    pub fn raised_cosine(n: usize, center: f64, floor: f64) -> Result<Self> {
        Self::new(DensityGrid::from_fn(n, |x| {
            floor + (1.0 - floor) * (1.0 + (2.0 * PI * (x - center)).cos())
        })?)
    }

    pub fn density(&self) -> &DensityGrid {
        &self.q
    }

    pub fn derivative(&self) -> &DensityGrid {
        &self.dq
    }

    /// Doeblin minorisation constant: the smallest sample of `q`.
    pub fn doeblin_alpha(&self) -> f64 {
        self.alpha
    }

    /// Probed Lipschitz constant `sup |q′|`.
    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn require_positive(&self) -> Result<f64> {
        if self.alpha > 0.0 {
            Ok(self.alpha)
        } else {
            Err(Error::NoiseNotPositive { alpha: self.alpha })
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.q.interpolate(x)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.dq.interpolate(x)
    }

    /// Inverse CDF of the piecewise-constant density whose cell `i` is
    /// centred at node `i / N`.
    pub fn sample(&self, u: f64) -> f64 {
        let n = self.q.n_points();
        let total = self.cdf[n];
        let target = u * total;
        let cell = self.cdf[1..]
            .partition_point(|&c| c <= target)
            .min(n - 1);
        let width = self.cdf[cell + 1] - self.cdf[cell];
        let frac = if width > 0.0 {
            ((target - self.cdf[cell]) / width).clamp(0.0, 1.0)
        } else {
            0.5
        };
        wrap_unit((cell as f64 - 0.5 + frac) / n as f64)
    }
}

/// Unperturbed drift `f⁰`.
#[derive(Debug, Clone)]
pub enum DriftBase {
    /// Lift `degree·x + p(x)`.
    Trig { degree: i64, poly: TrigPoly },
    /// Lift `degree·x + r(x)` with `r` given on a grid.
    Sampled { degree: i64, residual: DensityGrid },
}

impl DriftBase {
    pub fn identity() -> Self {
        DriftBase::Trig {
            degree: 1,
            poly: TrigPoly::zero(),
        }
    }

    pub fn lift(&self, x: f64) -> f64 {
        match self {
            DriftBase::Trig { degree, poly } => *degree as f64 * x + poly.eval(x),
            DriftBase::Sampled { degree, residual } => {
                *degree as f64 * x + residual.interpolate(x)
            }
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match self {
            DriftBase::Trig { degree, poly } => DriftBase::Trig {
                degree: *degree,
                poly: poly.scaled(c),
            },
            DriftBase::Sampled { degree, residual } => DriftBase::Sampled {
                degree: *degree,
                residual: residual.scale(c),
            },
        }
    }
}

impl From<&CircleMap> for DriftBase {
    fn from(map: &CircleMap) -> Self {
        DriftBase::Trig {
            degree: map.degree(),
            poly: map.poly().clone(),
        }
    }
}

/// Drift `f^ε = f⁰ + ε ḟ` (the remainder is zero).
#[derive(Debug, Clone)]
pub struct DriftMap {
    pub base: DriftBase,
    /// Perturbation direction `ḟ` sampled on a grid.
    pub dot: DensityGrid,
}

impl DriftMap {
    pub fn new(base: DriftBase, dot: DensityGrid) -> Self {
        Self { base, dot }
    }

    pub fn unperturbed(base: DriftBase, n: usize) -> Result<Self> {
        Ok(Self::new(base, DensityGrid::zeros(n)?))
    }

    /// `f^ε(x)` reduced mod 1.
    pub fn eval(&self, eps: f64, x: f64) -> f64 {
        let mut y = self.base.lift(x);
        if eps != 0.0 {
            y += eps * self.dot.interpolate(x);
        }
        wrap_unit(y)
    }

    pub fn dot_at(&self, x: f64) -> f64 {
        self.dot.interpolate(x)
    }

    /// Same direction, nonlinear part of the base scaled by `c`.
    pub fn with_scaled_base(&self, c: f64) -> Self {
        Self::new(self.base.scaled(c), self.dot.clone())
    }
}

/// Annealed operator `(Lφ)(y) = ∫ φ(x) q(y − f^ε(x)) dx` by the rectangle rule.
pub fn build_kernel(drift: &DriftMap, eps: f64, q: &NoiseDensity, n: usize) -> Result<TransferMatrix> {
    let images: Vec<f64> = (0..n).map(|j| drift.eval(eps, j as f64 / n as f64)).collect();
    let inv_n = 1.0 / n as f64;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let y = i as f64 * inv_n;
            images.iter().map(|fx| inv_n * q.eval(y - fx)).collect()
        })
        .collect();
    Ok(TransferMatrix::from_rows(n, rows, OperatorKind::Kernel))
}

/// `g(y) = ∫ μ(x) [−q′(y − f⁰(x))] ḟ(x) dx`, the ε-derivative of the kernel operator at `μ`.
pub fn kernel_forcing(drift: &DriftMap, q: &NoiseDensity, mu: &DensityGrid) -> DensityGrid {
    let n = mu.n_points();
    let inv_n = 1.0 / n as f64;
    // per-node source weight μ(x_j) ḟ(x_j) and image f⁰(x_j)
    let sources: Vec<(f64, f64)> = mu
        .values()
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let x = j as f64 * inv_n;
            (m * drift.dot_at(x), drift.eval(0.0, x))
        })
        .collect();
    let out = (0..n)
        .into_par_iter()
        .map(|i| {
            let y = i as f64 * inv_n;
            let mut s = 0.0;
            for &(w, fx) in &sources {
                if w != 0.0 {
                    s -= w * q.eval_derivative(y - fx);
                }
            }
            s * inv_n
        })
        .collect();
    DensityGrid::from_values_unchecked(out)
}

/// Density-normalised histogram on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.density.len()
    }

    pub fn bin_left(&self, b: usize) -> f64 {
        b as f64 / self.n_bins() as f64
    }

    /// Bin averages of a grid density, integrated with interpolation.
    pub fn from_density(f: &DensityGrid, n_bins: usize) -> Self {
        const SUB: usize = 32;
        let density = (0..n_bins)
            .map(|b| {
                let mut s = 0.0;
                for k in 0..SUB {
                    let x = (b as f64 + (k as f64 + 0.5) / SUB as f64) / n_bins as f64;
                    s += f.interpolate(x);
                }
                s / SUB as f64
            })
            .collect();
        Self { density }
    }

    /// `Σ_b |a_b − b_b| / n_bins`.
    pub fn l1_distance(&self, other: &Histogram) -> f64 {
        let n = self.n_bins() as f64;
        self.density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / n
    }

    pub fn sup_distance_to(&self, value: f64) -> f64 {
        self.density.iter().fold(0.0, |m, d| m.max((d - value).abs()))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_left,density")?;
        for (b, d) in self.density.iter().enumerate() {
            writeln!(w, "{:?},{:?}", self.bin_left(b), d)?;
        }
        Ok(())
    }
}

/// Monte Carlo marginal of `X_{n_steps}` started from `X_0 ~ Uniform`.
///
/// Step `t` uses `drift_at(t)`. Samples are processed in fixed-size blocks,
/// block `b` drawing from ChaCha stream `b` of `seed`, so the histogram does
/// not depend on the number of threads.
pub fn simulate_marginal<'a, F>(
    drift_at: F,
    eps: f64,
    q: &NoiseDensity,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
    n_bins: usize,
) -> Result<Histogram>
where
    F: Fn(usize) -> &'a DriftMap + Sync,
{
    if n_bins == 0 {
        return Err(Error::InvalidArgument("n_bins must be positive".into()));
    }
    let n_blocks = n_samples.div_ceil(MC_BLOCK);
    let counts = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = MC_BLOCK.min(n_samples - b * MC_BLOCK);
            let mut counts = vec![0u64; n_bins];
            for _ in 0..len {
                let mut x: f64 = rng.gen();
                for t in 0..n_steps {
                    let xi = q.sample(rng.gen());
                    x = wrap_unit(drift_at(t).eval(eps, x) + xi);
                }
                let bin = ((x * n_bins as f64) as usize).min(n_bins - 1);
                counts[bin] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; n_bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let scale = n_bins as f64 / n_samples as f64;
    Ok(Histogram {
        density: counts.iter().map(|&c| c as f64 * scale).collect(),
    })
}
