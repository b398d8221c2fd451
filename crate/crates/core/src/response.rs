//! First-order linear response of an equivariant family.
//!
//! The response is the causal sum of past forcings pushed forward,
//!
//! ```text
//! η_n = g_{n−1} + Σ_{k=1}^{K} L_{n−1} ⋯ L_{n−k} g_{n−k−1},
//! ```
//!
//! which solves `η_n = L_{n−1} η_{n−1} + g_{n−1}` up to the truncation tail.
//! The bare `k = 0` term `g_{n−1}` is included: without it the recursion does
//! not close and the finite-difference quotients disagree at first order.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::DecayBound;
use crate::error::{Error, Result};
use crate::grid::DensityGrid;
use crate::noise::kernel_forcing;
use crate::sequence::{pullback_equivariant, Element, EquivariantFamily, OperatorTable, SequenceSystem};
use crate::transfer::d_operator;

/// Differences below this L¹ level count as discretisation noise in [`validate`].
pub const DISCRETIZATION_FLOOR: f64 = 1e-6;

/// Grids on the contiguous index range `start..start+len`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedGrids {
    start: i64,
    grids: Vec<DensityGrid>,
}

impl IndexedGrids {
    pub fn new(start: i64, grids: Vec<DensityGrid>) -> Self {
        Self { start, grids }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last index (inclusive); `start − 1` when empty.
    pub fn end(&self) -> i64 {
        self.start + self.grids.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.grids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grids.is_empty()
    }

    pub fn get(&self, n: i64) -> Option<&DensityGrid> {
        if n < self.start {
            return None;
        }
        self.grids.get((n - self.start) as usize)
    }

    fn at(&self, n: i64) -> Result<&DensityGrid> {
        self.get(n).ok_or(Error::WindowExceeded {
            lo: n,
            hi: n,
            window_lo: self.start,
            window_hi: self.end(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &DensityGrid)> {
        self.grids
            .iter()
            .enumerate()
            .map(move |(i, g)| (self.start + i as i64, g))
    }

    /// The last `count` entries (all of them if there are fewer).
    pub fn last(&self, count: usize) -> IndexedGrids {
        let skip = self.grids.len().saturating_sub(count);
        IndexedGrids::new(self.start + skip as i64, self.grids[skip..].to_vec())
    }

    pub fn sup_w11(&self) -> f64 {
        self.grids.iter().map(|g| g.norm_w11()).fold(0.0, f64::max)
    }

    pub fn max_abs_mass(&self) -> f64 {
        self.grids.iter().map(|g| g.mass().abs()).fold(0.0, f64::max)
    }
}

/// Forcing `g_n = (d/dε) L_n^ε μ_n` at `ε = 0` for `n` in `[start, end − 1]`.
///
/// Kicked maps give `g_n = −(X μ_{n+1})′`; noisy maps the kernel formula at
/// `μ_n`, projected onto zero mass so it matches the mass-corrected operators.
pub fn forcing(sys: &SequenceSystem, family: &EquivariantFamily) -> Result<IndexedGrids> {
    if family.len() < 2 {
        return Err(Error::InvalidArgument(
            "forcing needs a family with at least two indices".into(),
        ));
    }
    let grids = (family.start()..family.end())
        .into_par_iter()
        .map(|n| {
            let g = match sys.schedule.element(n)? {
                Element::Deterministic { kick, .. } => d_operator(&kick, family.get(n + 1).unwrap()),
                Element::Noisy { drift, noise } => {
                    kernel_forcing(&drift, &noise, family.get(n).unwrap()).project_zero_mass()
                }
            };
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexedGrids::new(family.start(), grids))
}

/// `Σ_{k=0}^{K} L_{n−1} ⋯ L_{n−k} g_{n−k−1}` by one backward (Horner) accumulation.
pub fn partial_sum(ops: &OperatorTable, g: &IndexedGrids, n: i64, k: usize) -> Result<DensityGrid> {
    let first = n - k as i64 - 1;
    if first < g.start() || n - 1 > g.end() {
        return Err(Error::WindowExceeded {
            lo: first,
            hi: n - 1,
            window_lo: g.start(),
            window_hi: g.end(),
        });
    }
    let mut s = g.at(first)?.clone();
    for idx in first + 1..n {
        s = ops.at(idx)?.apply(&s)?.axpy(1.0, g.at(idx)?)?;
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct ResponseReport {
    /// `η_n` for `n` in `[g.start + K + 1, g.end + 1]`.
    pub eta: IndexedGrids,
    pub truncation_order: usize,
    /// `C ρ^K sup‖g‖_{W¹¹} / (1 − ρ)`.
    pub tail_bound: f64,
    pub bound: DecayBound,
    pub masses: Vec<f64>,
    pub oracle: Option<ValidationSummary>,
}

/// Truncation order meeting `tol`, capped so at least one index can be reported.
pub fn default_truncation(bound: &DecayBound, tol: f64, g: &IndexedGrids) -> usize {
    let wanted = bound.truncation_order(tol, g.sup_w11());
    wanted.min(g.len().saturating_sub(1)).max(1)
}

/// Truncated response series at order `k`. With `tolerance`, fails with
/// [`Error::TailNotSmall`] when the certified tail exceeds it.
pub fn neumann_response(
    ops: &OperatorTable,
    g: &IndexedGrids,
    k: usize,
    bound: DecayBound,
    tolerance: Option<f64>,
) -> Result<ResponseReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("truncation order must be >= 1".into()));
    }
    if g.len() < k + 1 {
        return Err(Error::WindowExceeded {
            lo: g.end() + 1 - k as i64 - 1,
            hi: g.end(),
            window_lo: g.start(),
            window_hi: g.end(),
        });
    }
    let sup_g = g.sup_w11();
    let tail_bound = bound.tail(k, sup_g);
    if let Some(tol) = tolerance {
        if tail_bound > tol {
            return Err(Error::TailNotSmall {
                tail_bound,
                tolerance: tol,
                required_k: bound.truncation_order(tol, sup_g),
            });
        }
    }
    let first = g.start() + k as i64 + 1;
    let grids = (first..=g.end() + 1)
        .into_par_iter()
        .map(|n| partial_sum(ops, g, n, k))
        .collect::<Result<Vec<_>>>()?;
    let masses = grids.iter().map(DensityGrid::mass).collect();
    Ok(ResponseReport {
        eta: IndexedGrids::new(first, grids),
        truncation_order: k,
        tail_bound,
        bound,
        masses,
        oracle: None,
    })
}

/// `max_n ‖η_n − L_{n−1} η_{n−1} − g_{n−1}‖_{L¹}` over consecutive reported indices.
pub fn resolvent_residual(ops: &OperatorTable, report: &ResponseReport, g: &IndexedGrids) -> Result<f64> {
    let eta = &report.eta;
    let mut worst: f64 = 0.0;
    for n in eta.start() + 1..=eta.end() {
        let pushed = ops.at(n - 1)?.apply(eta.at(n - 1)?)?;
        let predicted = pushed.axpy(1.0, g.at(n - 1)?)?;
        worst = worst.max(eta.at(n)?.l1_distance(&predicted)?);
    }
    Ok(worst)
}

/// Difference quotient `h^ε` of the equivariant family.
#[derive(Debug, Clone)]
pub struct DifferenceQuotient {
    pub eps: f64,
    /// `(μ^ε − μ^{−ε})/(2ε)` instead of `(μ^ε − μ⁰)/ε`.
    pub symmetric: bool,
    pub quotient: IndexedGrids,
}

fn quotient(plus: &EquivariantFamily, minus: &EquivariantFamily, scale: f64) -> Result<IndexedGrids> {
    let grids = plus
        .iter()
        .map(|(n, p)| {
            let m = minus.get(n).ok_or_else(|| {
                Error::InvalidArgument(format!("families do not share index {n}"))
            })?;
            Ok((p - m).scale(scale))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexedGrids::new(plus.start(), grids))
}

/// Pullback families at each `ε` (same window, burn-in and seed as `base`)
/// turned into difference quotients against `base` or the family at `−ε`.
pub fn finite_difference_response(
    sys: &SequenceSystem,
    base: &EquivariantFamily,
    eps_list: &[f64],
    seed: &DensityGrid,
    tolerance: f64,
    symmetric: bool,
) -> Result<Vec<DifferenceQuotient>> {
    if let Some(bad) = eps_list.iter().find(|e| **e == 0.0 || !e.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be nonzero and finite, got {bad}"
        )));
    }
    let family_at = |eps: f64| -> Result<EquivariantFamily> {
        let ops = sys.with_eps(eps).operators()?;
        pullback_equivariant(&ops, base.burn_in, seed, tolerance)
    };
    eps_list
        .par_iter()
        .map(|&eps| {
            let plus = family_at(eps)?;
            let quotient = if symmetric {
                quotient(&plus, &family_at(-eps)?, 0.5 / eps)?
            } else {
                quotient(&plus, base, 1.0 / eps)?
            };
            Ok(DifferenceQuotient {
                eps,
                symmetric,
                quotient,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub eps: Vec<f64>,
    /// `max_n ‖h_n^ε − η_n‖_{L¹}` per step.
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    /// Same in W¹¹, diagnostic only.
    pub d_w11: Vec<f64>,
    /// Least-squares slope of `log D` against `log ε`, when defined.
    pub order: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares difference quotients to the series response on shared indices.
///
/// Passes when `D` decreases along `fd` (pairs both under
/// [`DISCRETIZATION_FLOOR`] count as decreasing) and `D` at the smallest
/// step is at most `tolerance`.
pub fn validate(report: &ResponseReport, fd: &[DifferenceQuotient], tolerance: f64) -> Result<ValidationSummary> {
    let mut d = Vec::with_capacity(fd.len());
    let mut d_w11 = Vec::with_capacity(fd.len());
    for q in fd {
        let (mut l1, mut w11, mut shared) = (0.0f64, 0.0f64, 0usize);
        for (n, eta) in report.eta.iter() {
            if let Some(h) = q.quotient.get(n) {
                l1 = l1.max(h.l1_distance(eta)?);
                w11 = w11.max(h.w11_distance(eta)?);
                shared += 1;
            }
        }
        if shared == 0 {
            return Err(Error::InvalidArgument(format!(
                "no shared indices between response and quotient at eps = {}",
                q.eps
            )));
        }
        d.push(l1);
        d_w11.push(w11);
    }
    let decreasing = d
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] <= DISCRETIZATION_FLOOR && w[1] <= DISCRETIZATION_FLOOR));
    let smallest = fd
        .iter()
        .zip(&d)
        .min_by(|a, b| a.0.eps.abs().total_cmp(&b.0.eps.abs()))
        .map(|(_, d)| *d);
    let pass = decreasing && smallest.is_some_and(|s| s <= tolerance);
    let eps: Vec<f64> = fd.iter().map(|q| q.eps).collect();
    Ok(ValidationSummary {
        order: fitted_order(&eps, &d),
        eps,
        d,
        d_w11,
        tolerance,
        pass,
    })
}

fn fitted_order(eps: &[f64], d: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(d)
        .filter(|(e, d)| **d > 0.0 && **e != 0.0)
        .map(|(e, d)| (e.abs().ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}
