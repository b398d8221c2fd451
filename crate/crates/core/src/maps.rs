//! Expanding circle maps given by trigonometric-polynomial lifts, their
//! inverse branches, and near-identity kick diffeomorphisms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::wrap_unit;

/// Number of points of the probe grid used for sup-norm estimates.
pub const PROBE_POINTS: usize = 8192;

/// Maximum number of Fourier terms (and maximum frequency) of a map.
pub const MAX_TERMS: usize = 16;

const NEWTON_MAX_ITER: usize = 64;
const BRANCH_RESIDUAL: f64 = 1e-13;

/// A real trigonometric polynomial `Σ_k (a_k cos 2πkx + b_k sin 2πkx)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    /// `(k, a_k, b_k)` triples.
    pub terms: Vec<(u32, f64, f64)>,
}

impl TrigPoly {
    pub fn new(terms: Vec<(u32, f64, f64)>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn sin(k: u32, amplitude: f64) -> Self {
        Self::new(vec![(k, 0.0, amplitude)])
    }

    pub fn cos(k: u32, amplitude: f64) -> Self {
        Self::new(vec![(k, amplitude, 0.0)])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(0, c, 0.0)])
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|&(k, a, b)| a == 0.0 && (b == 0.0 || k == 0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.terms.iter().map(|&(k, a, b)| (k, c * a, c * b)).collect())
    }

    /// `order`-th derivative at `x`.
    pub fn derivative_at(&self, x: f64, order: u32) -> f64 {
        let mut s = 0.0;
        for &(k, a, b) in &self.terms {
            if k == 0 {
                if order == 0 {
                    s += a;
                }
                continue;
            }
            let w = 2.0 * PI * k as f64;
            let th = w * x;
            let (sn, cs) = th.sin_cos();
            let wp = w.powi(order as i32);
            // d^m/dx^m cos = w^m cos(th + m pi/2), likewise for sin
            let (c_part, s_part) = match order % 4 {
                0 => (cs, sn),
                1 => (-sn, cs),
                2 => (-cs, -sn),
                _ => (sn, -cs),
            };
            s += wp * (a * c_part + b * s_part);
        }
        s
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.derivative_at(x, 0)
    }

    /// Sup norm of the `order`-th derivative on the probe grid.
    pub fn sup_norm(&self, order: u32) -> f64 {
        (0..PROBE_POINTS)
            .map(|i| self.derivative_at(i as f64 / PROBE_POINTS as f64, order).abs())
            .fold(0.0, f64::max)
    }

    pub fn difference(&self, other: &TrigPoly) -> TrigPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|&(k, a, b)| (k, -a, -b)));
        TrigPoly::new(terms)
    }
}

/// `(λ₀, M₀, M₂) = (inf |T′|, sup |T′|, sup |T″|)` measured on the probe grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapConstants {
    pub lambda0: f64,
    pub m0: f64,
    pub m2: f64,
}

/// One-sided shrink applied to the probed infimum of `|T′|`.
pub const LAMBDA0_SAFETY: f64 = 1e-9;

/// Anything with an evaluable lift, derivatives and global inverse branches.
pub trait ExpandingMap: Sync {
    fn degree(&self) -> i64;
    fn lift(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    /// The `degree` preimages of `x`, sorted increasingly in `[0, 1)`.
    fn inverse_branches(&self, x: f64) -> Result<Vec<f64>>;

    fn eval(&self, x: f64) -> f64 {
        wrap_unit(self.lift(x))
    }

    fn constants(&self) -> Result<MapConstants> {
        let mut min1 = f64::INFINITY;
        let mut max1: f64 = 0.0;
        let mut max2: f64 = 0.0;
        for i in 0..PROBE_POINTS {
            let x = i as f64 / PROBE_POINTS as f64;
            let d1 = self.d1(x);
            min1 = min1.min(d1);
            max1 = max1.max(d1.abs());
            max2 = max2.max(self.d2(x).abs());
        }
        if min1 <= 1.0 {
            return Err(Error::NotExpanding {
                min_derivative: min1,
            });
        }
        Ok(MapConstants {
            lambda0: min1 - LAMBDA0_SAFETY,
            m0: max1,
            m2: max2,
        })
    }
}

/// Solves `g(y) = target` for an increasing `g` on `[lo, hi]` with `g(lo) <= target <= g(hi)`.
fn solve_monotone(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> Option<f64> {
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..NEWTON_MAX_ITER {
        let r = g(y) - target;
        if r.abs() <= BRANCH_RESIDUAL {
            return Some(y);
        }
        let mut next = y - r / dg(y);
        if !(next > lo - 1e-9 && next < hi + 1e-9) {
            next = 0.5 * (lo + hi);
        }
        if r < 0.0 {
            lo = lo.max(y);
        } else {
            hi = hi.min(y);
        }
        if next == y {
            return (r.abs() <= 4.0 * BRANCH_RESIDUAL).then_some(y);
        }
        y = next;
    }
    None
}

/// Degree-`d` expanding map with lift `ℓ(x) = d·x + p(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleMap {
    degree: i64,
    poly: TrigPoly,
}

impl CircleMap {
    pub fn new(degree: i64, poly: TrigPoly) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidArgument(format!(
                "map degree must be >= 2, got {degree}"
            )));
        }
        if poly.terms.len() > MAX_TERMS || poly.terms.iter().any(|t| t.0 as usize > MAX_TERMS) {
            return Err(Error::InvalidArgument(format!(
                "at most {MAX_TERMS} Fourier terms of frequency <= {MAX_TERMS} are supported"
            )));
        }
        let map = Self { degree, poly };
        map.constants()?;
        Ok(map)
    }

    pub fn linear(degree: i64) -> Result<Self> {
        Self::new(degree, TrigPoly::zero())
    }

    pub fn doubling() -> Self {
        Self::linear(2).expect("doubling map is expanding")
    }

    pub fn poly(&self) -> &TrigPoly {
        &self.poly
    }

    /// Same degree, nonlinear part scaled by `c`.
    pub fn with_scaled_poly(&self, c: f64) -> Result<Self> {
        Self::new(self.degree, self.poly.scaled(c))
    }

    /// Sum of sup norms of the lift difference and its first two derivatives.
    pub fn c2_distance(&self, other: &CircleMap) -> Result<f64> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let diff = self.poly.difference(&other.poly);
        Ok(diff.sup_norm(0) + diff.sup_norm(1) + diff.sup_norm(2))
    }

    /// Sup norm of the lift difference alone.
    pub fn c0_distance(&self, other: &CircleMap) -> Result<f64> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(self.poly.difference(&other.poly).sup_norm(0))
    }
}

/// Targets `t_j` in `[ℓ(0), ℓ(0) + d)` congruent to `x`, in increasing order.
fn branch_targets(lift0: f64, degree: i64, x: f64) -> impl Iterator<Item = f64> {
    let base = lift0 + (x - lift0).rem_euclid(1.0);
    (0..degree).map(move |j| base + j as f64)
}

impl ExpandingMap for CircleMap {
    fn degree(&self) -> i64 {
        self.degree
    }

    fn lift(&self, x: f64) -> f64 {
        self.degree as f64 * x + self.poly.eval(x)
    }

    fn d1(&self, x: f64) -> f64 {
        self.degree as f64 + self.poly.derivative_at(x, 1)
    }

    fn d2(&self, x: f64) -> f64 {
        self.poly.derivative_at(x, 2)
    }

    fn inverse_branches(&self, x: f64) -> Result<Vec<f64>> {
        let lift0 = self.lift(0.0);
        let mut out = Vec::with_capacity(self.degree as usize);
        for (j, t) in branch_targets(lift0, self.degree, x).enumerate() {
            let y = solve_monotone(|y| self.lift(y), |y| self.d1(y), t, 0.0, 1.0)
                .ok_or(Error::NoConvergence { x, branch: j })?;
            out.push(y.clamp(0.0, 1.0 - f64::EPSILON));
        }
        Ok(out)
    }
}

/// Kick family `h_ε(x) = x + ε X(x) + ε² R(x)` on the circle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KickField {
    pub field: TrigPoly,
    /// Second-order remainder profile `R`; zero when absent.
    #[serde(default)]
    pub remainder: Option<TrigPoly>,
}

/// Bound on `|ε|·sup|X′|` (plus the remainder contribution) for admissible kicks.
pub const KICK_LIMIT: f64 = 0.5;

impl KickField {
    pub fn new(field: TrigPoly) -> Self {
        Self {
            field,
            remainder: None,
        }
    }

    pub fn with_remainder(mut self, remainder: TrigPoly) -> Self {
        self.remainder = Some(remainder);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero() && self.remainder.as_ref().is_none_or(|r| r.is_zero())
    }

    /// The vector field `X` itself.
    pub fn x(&self, x: f64) -> f64 {
        self.field.eval(x)
    }

    fn part(&self, eps: f64, x: f64, order: u32) -> f64 {
        let mut v = eps * self.field.derivative_at(x, order);
        if let Some(r) = &self.remainder {
            v += eps * eps * r.derivative_at(x, order);
        }
        v
    }

    /// Lift of `h_ε`.
    pub fn h(&self, eps: f64, x: f64) -> f64 {
        x + self.part(eps, x, 0)
    }

    pub fn h_d1(&self, eps: f64, x: f64) -> f64 {
        1.0 + self.part(eps, x, 1)
    }

    pub fn h_d2(&self, eps: f64, x: f64) -> f64 {
        self.part(eps, x, 2)
    }

    /// `|ε|·sup|X′| + ε²·sup|R′|`.
    pub fn distortion(&self, eps: f64) -> f64 {
        let mut v = eps.abs() * self.field.sup_norm(1);
        if let Some(r) = &self.remainder {
            v += eps * eps * r.sup_norm(1);
        }
        v
    }

    pub fn check_eps(&self, eps: f64) -> Result<()> {
        let value = self.distortion(eps);
        if value >= KICK_LIMIT {
            return Err(Error::KickTooLarge {
                value,
                limit: KICK_LIMIT,
            });
        }
        Ok(())
    }

    /// `h_ε⁻¹(x)` in `[0, 1)`.
    pub fn inverse(&self, eps: f64, x: f64) -> Result<f64> {
        if eps == 0.0 {
            return Ok(wrap_unit(x));
        }
        let x = wrap_unit(x);
        // |h(z) - z| <= |ε| sup|X| + ε² sup|R|, so the root lies within that radius of x
        let mut radius = eps.abs() * self.field.sup_norm(0) + 1e-12;
        if let Some(r) = &self.remainder {
            radius += eps * eps * r.sup_norm(0);
        }
        let z = solve_monotone(
            |z| self.h(eps, z),
            |z| self.h_d1(eps, z),
            x,
            x - radius,
            x + radius,
        )
        .ok_or(Error::NoConvergence { x, branch: 0 })?;
        Ok(wrap_unit(z))
    }
}

/// The post-composed map `h_ε ∘ T`.
#[derive(Debug, Clone)]
pub struct KickedMap {
    base: CircleMap,
    kick: KickField,
    eps: f64,
}

/// Builds `h_ε ∘ T`, rejecting kicks that are not safely invertible.
pub fn kick_map(kick: &KickField, eps: f64, base: &CircleMap) -> Result<KickedMap> {
    kick.check_eps(eps)?;
    Ok(KickedMap {
        base: base.clone(),
        kick: kick.clone(),
        eps,
    })
}

impl KickedMap {
    pub fn base(&self) -> &CircleMap {
        &self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl ExpandingMap for KickedMap {
    fn degree(&self) -> i64 {
        self.base.degree
    }

    fn lift(&self, x: f64) -> f64 {
        self.kick.h(self.eps, self.base.lift(x))
    }

    fn d1(&self, x: f64) -> f64 {
        self.kick.h_d1(self.eps, self.base.lift(x)) * self.base.d1(x)
    }

    fn d2(&self, x: f64) -> f64 {
        let l = self.base.lift(x);
        let l1 = self.base.d1(x);
        self.kick.h_d2(self.eps, l) * l1 * l1 + self.kick.h_d1(self.eps, l) * self.base.d2(x)
    }

    fn inverse_branches(&self, x: f64) -> Result<Vec<f64>> {
        let z = self.kick.inverse(self.eps, x)?;
        self.base.inverse_branches(z)
    }
}
