//! Explicit constants for uniform loss of memory near a reference map `T₀`.
//!
//! Given `λ₀ = inf|T₀′|`, `M₀ = sup|T₀′|`, `M₂ = sup|T₀″|` and a radius `δ*`,
//! every map in the C² ball of radius `δ*` around `T₀` satisfies a one-step
//! Lasota–Yorke inequality with
//!
//! ```text
//! λ₁ = 1/(λ₀ − δ*),     B = (M₂ + δ*)/(λ₀ − δ*)²
//! ```
//!
//! A block length `M` with `λ₁^M ≤ 1/(10(B/(1−λ₁)+1))` and
//! `‖L₀^M v‖_{L¹} ≤ (1−λ₁)/(10B)‖v‖_{W¹¹}` on zero-mass `v`, together with
//! `C(T₀)·δ* ≤ 7(1−λ₁)²/(10·M·B·(1/(1−λ₁)+B))`, yields contraction of the
//! W¹¹ norm by 9/10 over every block of `2M` steps. The weak-contraction
//! half of the `M` condition is checked on the discretised operator, so the
//! certificate is numerical rather than rigorous.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::DensityGrid;
use crate::maps::{CircleMap, ExpandingMap, MapConstants};
use crate::transfer::{build_deterministic, TransferMatrix};

/// Upper limit for the block length search.
pub const M_LIMIT: usize = 10_000;

/// Absolute tolerance of the `δ*` bisection.
pub const DELTA_STAR_TOL: f64 = 1e-6;

/// Minimum burn-in length regardless of the certified rate.
pub const MIN_BURN_IN: usize = 50;

/// Mixed-norm Lipschitz constant of `T ↦ L_T` from `W¹¹` to `L¹`:
/// `n[2(M₀+λ₀−1)/λ₀² + (M₀+λ₀−1)(M₂/λ₀³ + 1/λ₀)]`.
pub fn c_t0(base: &MapConstants, degree: i64) -> f64 {
    let MapConstants { lambda0, m0, m2 } = *base;
    let spread = m0 + lambda0 - 1.0;
    degree as f64
        * (2.0 * spread / (lambda0 * lambda0)
            + spread * (m2 / lambda0.powi(3) + 1.0 / lambda0))
}

/// Alternative closed form `2n(M₀+λ₀−1)(1/λ₀² + M₂/λ₀³ + 1/λ₀)`, reported for comparison.
pub fn c_t0_alternative(base: &MapConstants, degree: i64) -> f64 {
    let MapConstants { lambda0, m0, m2 } = *base;
    2.0 * degree as f64
        * (m0 + lambda0 - 1.0)
        * (1.0 / (lambda0 * lambda0) + m2 / lambda0.powi(3) + 1.0 / lambda0)
}

/// Uniform Lasota–Yorke pair `(λ₁, B)` on the ball of radius `delta_star`.
pub fn lasota_yorke(lambda0: f64, m2: f64, delta_star: f64) -> (f64, f64) {
    let shrunk = lambda0 - delta_star;
    (1.0 / shrunk, (m2 + delta_star) / (shrunk * shrunk))
}

/// Right-hand side of `λ₁^M ≤ 1/(10(B/(1−λ₁)+1))`.
pub fn m_power_threshold(lambda1: f64, b: f64) -> f64 {
    1.0 / (10.0 * (b / (1.0 - lambda1) + 1.0))
}

/// Smallest `M` with `λ₁^M` below the threshold, or `None` beyond [`M_LIMIT`].
pub fn m_closed_form(lambda1: f64, b: f64) -> Option<usize> {
    if !(lambda1 > 0.0 && lambda1 < 1.0) {
        return None;
    }
    let thr = m_power_threshold(lambda1, b);
    let mut pow = 1.0;
    for m in 1..=M_LIMIT {
        pow *= lambda1;
        if pow <= thr {
            return Some(m);
        }
    }
    None
}

/// Required ratio `‖L₀^M v‖_{L¹}/‖v‖_{W¹¹} ≤ (1−λ₁)/(10B)` for zero-mass `v`.
pub fn weak_threshold(lambda1: f64, b: f64) -> f64 {
    if b == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - lambda1) / (10.0 * b)
    }
}

/// Right-hand side of `C(T₀)·δ* ≤ 7(1−λ₁)²/(10·M·B·(1/(1−λ₁)+B))`.
pub fn ml3_threshold(lambda1: f64, b: f64, m: usize) -> f64 {
    let gap = 1.0 - lambda1;
    let denom = 10.0 * m as f64 * b * (1.0 / gap + b);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        7.0 * gap * gap / denom
    }
}

/// Zero-mass probe densities for the weak-contraction check: 20 harmonics
/// (`cos`, `sin` for `k = 1..10`) and 30 seeded random trigonometric polynomials.
pub fn probe_basis(n: usize) -> Vec<DensityGrid> {
    let mut out = Vec::with_capacity(50);
    for k in 1..=10 {
        let w = 2.0 * PI * k as f64;
        out.push(DensityGrid::from_fn(n, |x| (w * x).cos()).expect("valid grid size"));
        out.push(DensityGrid::from_fn(n, |x| (w * x).sin()).expect("valid grid size"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    for _ in 0..30 {
        let coeffs: Vec<(f64, f64)> = (1..=8)
            .map(|k| {
                let decay = 1.0 / k as f64;
                (decay * rng.gen_range(-1.0..1.0), decay * rng.gen_range(-1.0..1.0))
            })
            .collect();
        out.push(
            DensityGrid::from_fn(n, |x| {
                coeffs.iter().enumerate().fold(0.0, |s, (k, (a, b))| {
                    let th = 2.0 * PI * (k + 1) as f64 * x;
                    s + a * th.cos() + b * th.sin()
                })
            })
            .expect("valid grid size"),
        );
    }
    out
}

/// Smallest `M` meeting both the power condition and the numerically
/// verified weak contraction, with the weak threshold scaled by `tightening ∈ (0, 1]`.
pub fn choose_m(l0: &TransferMatrix, lambda1: f64, b: f64, tightening: f64) -> Result<usize> {
    let start = m_closed_form(lambda1, b).ok_or(Error::MNotFound { limit: M_LIMIT })?;
    let thr = tightening * weak_threshold(lambda1, b);
    if thr.is_infinite() {
        return Ok(start);
    }
    let probes = probe_basis(l0.n_points());
    let strong: Vec<f64> = probes.iter().map(|v| v.norm_w11()).collect();
    let mut images = probes;
    for _ in 0..start {
        images = images.iter().map(|v| l0.apply(v)).collect::<Result<_>>()?;
    }
    let mut m = start;
    loop {
        let worst = images
            .iter()
            .zip(&strong)
            .map(|(v, s)| v.norm_l1() / s)
            .fold(0.0, f64::max);
        if worst <= thr {
            return Ok(m);
        }
        m += 1;
        if m > M_LIMIT {
            return Err(Error::MNotFound { limit: M_LIMIT });
        }
        images = images.iter().map(|v| l0.apply(v)).collect::<Result<_>>()?;
    }
}

/// Theoretical displacement bounds between a reference map and a nearby one,
/// with the measured branch and weight displacements on 512 probe points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Displacement {
    pub delta: f64,
    pub branch_bound: f64,
    pub weight_bound: f64,
    /// `2(M₀+δ)δ/λ₀`, the factor multiplying `‖f′‖_{L¹}`.
    pub comp_factor: f64,
    pub measured_branch: f64,
    pub measured_weight: f64,
}

impl Displacement {
    pub fn holds(&self) -> bool {
        const SLACK: f64 = 1e-12;
        self.measured_branch <= self.branch_bound + SLACK
            && self.measured_weight <= self.weight_bound + SLACK
    }
}

pub fn displacement_bounds(t0: &CircleMap, t1: &CircleMap) -> Result<Displacement> {
    let delta = t0.c2_distance(t1)?;
    let MapConstants { lambda0, m0, m2 } = t0.constants()?;
    let mut measured_branch: f64 = 0.0;
    let mut measured_weight: f64 = 0.0;
    for i in 0..512 {
        let x = i as f64 / 512.0;
        let b0 = t0.inverse_branches(x)?;
        let b1 = t1.inverse_branches(x)?;
        for (y0, y1) in b0.iter().zip(&b1) {
            let d = (y0 - y1).abs();
            measured_branch = measured_branch.max(d.min(1.0 - d));
            let w = (1.0 / t0.d1(*y0).abs() - 1.0 / t1.d1(*y1).abs()).abs();
            measured_weight = measured_weight.max(w);
        }
    }
    Ok(Displacement {
        delta,
        branch_bound: delta / lambda0,
        weight_bound: (m2 / lambda0.powi(3) + 1.0 / lambda0) * delta,
        comp_factor: 2.0 * (m0 + delta) * delta / lambda0,
        measured_branch,
        measured_weight,
    })
}

/// One re-checked inequality of a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub formula: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Exponential decay bound `‖Φ_k v‖ ≤ C ρ^k ‖v‖` on zero-mass densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBound {
    pub constant: f64,
    pub rate: f64,
}

impl DecayBound {
    /// Doeblin bound in L¹: `C = 1`, `ρ = 1 − α`.
    pub fn doeblin(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::NoiseNotPositive { alpha });
        }
        Ok(Self {
            constant: 1.0,
            rate: 1.0 - alpha,
        })
    }

    /// `ceil(log(tol/C)/log ρ)`, at least [`MIN_BURN_IN`].
    pub fn burn_in(&self, tol: f64) -> usize {
        if self.rate <= 0.0 {
            return MIN_BURN_IN;
        }
        let k = ((tol / self.constant).ln() / self.rate.ln()).ceil();
        (k.max(0.0) as usize).max(MIN_BURN_IN)
    }

    /// Tail of the response series after `k` terms: `C ρ^k sup‖g‖/(1−ρ)`.
    pub fn tail(&self, k: usize, sup_forcing: f64) -> f64 {
        self.constant * self.rate.powi(k as i32) * sup_forcing / (1.0 - self.rate)
    }

    /// Smallest `K` with `tail(K) ≤ tol`.
    pub fn truncation_order(&self, tol: f64, sup_forcing: f64) -> usize {
        if sup_forcing == 0.0 || self.rate <= 0.0 {
            return 1;
        }
        let k = ((tol * (1.0 - self.rate) / (self.constant * sup_forcing)).ln() / self.rate.ln())
            .ceil();
        (k.max(1.0)) as usize
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub degree: i64,
    pub lambda0: f64,
    #[serde(rename = "M0")]
    pub m0: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    pub delta_star: f64,
    pub lambda1: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "C_T0")]
    pub c_t0: f64,
    #[serde(rename = "C_T0_alternative")]
    pub c_t0_alt: f64,
    pub elom_c: f64,
    pub elom_rate: f64,
    /// Largest observed `‖L₀^M v‖_{L¹}/‖v‖_{W¹¹}` on the probe set.
    pub weak_ratio: f64,
    pub formulas: Vec<(&'static str, &'static str)>,
    pub status: &'static str,
}

const FORMULAS: [(&str, &str); 7] = [
    ("lambda1", "1/(lambda0 - delta_star)"),
    ("B", "(M2 + delta_star)/(lambda0 - delta_star)^2"),
    ("M", "min M: lambda1^M <= 1/(10(B/(1-lambda1)+1)) and |L0^M v|_L1 <= (1-lambda1)/(10B) |v|_W11"),
    ("C_T0", "n[2(M0+lambda0-1)/lambda0^2 + (M0+lambda0-1)(M2/lambda0^3 + 1/lambda0)]"),
    ("C_T0_alternative", "2n(M0+lambda0-1)(1/lambda0^2 + M2/lambda0^3 + 1/lambda0)"),
    ("elom_rate", "(9/10)^(1/(2M))"),
    ("elom_c", "(10/9)(B/(1-lambda1) + 1)"),
];

impl Certificate {
    pub fn decay_bound(&self) -> DecayBound {
        DecayBound {
            constant: self.elom_c,
            rate: self.elom_rate,
        }
    }

    /// Uniform W¹¹ bound `B/(1−λ₁) + 1` along compositions.
    pub fn strong_bound(&self) -> f64 {
        self.b / (1.0 - self.lambda1) + 1.0
    }

    /// Re-evaluates the four defining inequalities from the stored constants.
    pub fn verify(&self) -> Vec<InequalityCheck> {
        let (l1, b) = lasota_yorke(self.lambda0, self.m2, self.delta_star);
        let pow = self.lambda1.powi(self.m as i32);
        let pow_rhs = m_power_threshold(self.lambda1, self.b);
        let ml3_rhs = ml3_threshold(self.lambda1, self.b, self.m);
        vec![
            InequalityCheck {
                name: "delta_star_range",
                formula: "0 < delta_star < lambda0 - 1",
                lhs: self.delta_star,
                rhs: self.lambda0 - 1.0,
                holds: self.delta_star > 0.0 && self.delta_star < self.lambda0 - 1.0,
            },
            InequalityCheck {
                name: "lasota_yorke_constants",
                formula: "lambda1 = 1/(lambda0-delta_star) in (0,1), B = (M2+delta_star)/(lambda0-delta_star)^2",
                lhs: self.lambda1,
                rhs: l1,
                holds: self.lambda1 == l1
                    && self.b == b
                    && self.lambda1 > 0.0
                    && self.lambda1 < 1.0,
            },
            InequalityCheck {
                name: "block_length_power",
                formula: "lambda1^M <= 1/(10(B/(1-lambda1)+1))",
                lhs: pow,
                rhs: pow_rhs,
                holds: pow <= pow_rhs,
            },
            InequalityCheck {
                name: "perturbation_radius",
                formula: "C_T0 delta_star <= 7(1-lambda1)^2/(10 M B (1/(1-lambda1)+B))",
                lhs: self.c_t0 * self.delta_star,
                rhs: ml3_rhs,
                holds: self.c_t0 * self.delta_star <= ml3_rhs,
            },
        ]
    }

    pub fn all_hold(&self) -> bool {
        self.verify().iter().all(|c| c.holds)
    }
}

struct Chain {
    lambda1: f64,
    b: f64,
    m: usize,
}

fn chain_at(
    base: &MapConstants,
    c: f64,
    l0: &TransferMatrix,
    delta: f64,
) -> Result<Option<Chain>> {
    let (lambda1, b) = lasota_yorke(base.lambda0, base.m2, delta);
    if !(lambda1 > 0.0 && lambda1 < 1.0) {
        return Ok(None);
    }
    let m = match choose_m(l0, lambda1, b, 1.0) {
        Ok(m) => m,
        Err(Error::MNotFound { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok((c * delta <= ml3_threshold(lambda1, b, m)).then_some(Chain { lambda1, b, m }))
}

/// Certificate for measured constants and a prebuilt reference operator.
pub fn certify_constants(base: MapConstants, degree: i64, l0: &TransferMatrix) -> Result<Certificate> {
    if base.lambda0 <= 1.0 {
        return Err(Error::NotExpanding {
            min_derivative: base.lambda0,
        });
    }
    let c = c_t0(&base, degree);
    let mut lo = 0.0;
    let mut hi = base.lambda0 - 1.0;
    let mut best: Option<(f64, Chain)> = None;
    while hi - lo > DELTA_STAR_TOL {
        let mid = 0.5 * (lo + hi);
        match chain_at(&base, c, l0, mid)? {
            Some(chain) => {
                lo = mid;
                best = Some((mid, chain));
            }
            None => hi = mid,
        }
    }
    let (delta_star, chain) = match best {
        Some(b) => b,
        None => {
            // the bisection never probed below its tolerance; try once there
            let delta = 0.5 * DELTA_STAR_TOL;
            match chain_at(&base, c, l0, delta)? {
                Some(chain) => (delta, chain),
                None => {
                    return Err(Error::DeltaStarNotFound(format!(
                        "constraints fail even at delta_star = {delta:e}"
                    )))
                }
            }
        }
    };
    let probes = probe_basis(l0.n_points());
    let mut weak_ratio: f64 = 0.0;
    for v in &probes {
        let mut w = v.clone();
        for _ in 0..chain.m {
            w = l0.apply(&w)?;
        }
        weak_ratio = weak_ratio.max(w.norm_l1() / v.norm_w11());
    }
    let cert = Certificate {
        degree,
        lambda0: base.lambda0,
        m0: base.m0,
        m2: base.m2,
        delta_star,
        lambda1: chain.lambda1,
        b: chain.b,
        m: chain.m,
        c_t0: c,
        c_t0_alt: c_t0_alternative(&base, degree),
        elom_c: (10.0 / 9.0) * (chain.b / (1.0 - chain.lambda1) + 1.0),
        elom_rate: 0.9f64.powf(1.0 / (2.0 * chain.m as f64)),
        weak_ratio,
        formulas: FORMULAS.to_vec(),
        status: "numerically certified",
    };
    Ok(cert)
}

/// Full certificate for a reference map on an `n`-point grid.
pub fn certify(t0: &CircleMap, n: usize) -> Result<Certificate> {
    let base = t0.constants()?;
    let l0 = build_deterministic(t0, n)?;
    certify_constants(base, t0.degree(), &l0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::TrigPoly;

    const DOUBLING: MapConstants = MapConstants {
        lambda0: 2.0,
        m0: 2.0,
        m2: 0.0,
    };

    #[test]
    fn c_t0_doubling_hand_value() {
        // 2·[2·3/4 + 3·(0 + 1/2)] = 6
        assert_eq!(c_t0(&DOUBLING, 2), 6.0);
        // 2·2·3·(1/4 + 0 + 1/2) = 9
        assert_eq!(c_t0_alternative(&DOUBLING, 2), 9.0);
    }

    #[test]
    fn c_t0_simplified_form() {
        for lam in [1.5, 2.0, 3.7] {
            let base = MapConstants {
                lambda0: lam,
                m0: lam,
                m2: 0.0,
            };
            for n in [2, 3] {
                let simplified = n as f64 * (2.0 * lam - 1.0) * (2.0 / (lam * lam) + 1.0 / lam);
                assert!((c_t0(&base, n) - simplified).abs() <= 1e-12 * simplified);
            }
        }
    }

    #[test]
    fn c_t0_increases_with_m2() {
        let mut prev = c_t0(&DOUBLING, 2);
        for m2 in [0.1, 1.0, 5.0] {
            let c = c_t0(&MapConstants { m2, ..DOUBLING }, 2);
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn lasota_yorke_at_half() {
        let (l1, b) = lasota_yorke(2.0, 0.0, 0.5);
        assert!((l1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((b - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_m_matches_enumeration() {
        let (l1, b) = lasota_yorke(2.0, 0.0, 0.5);
        let thr = m_power_threshold(l1, b);
        // threshold 0.06; (2/3)^6 ≈ 0.0878 > 0.06 ≥ (2/3)^7 ≈ 0.0585
        assert!((thr - 0.06).abs() < 1e-15);
        let brute = (1..100).find(|&m| (2.0f64 / 3.0).powi(m) <= thr).unwrap();
        assert_eq!(brute, 7);
        assert_eq!(m_closed_form(l1, b), Some(7));
    }

    #[test]
    fn choose_m_doubling() {
        let l0 = build_deterministic(&CircleMap::doubling(), 256).unwrap();
        let (l1, b) = lasota_yorke(2.0, 0.0, 0.5);
        let m = choose_m(&l0, l1, b, 1.0).unwrap();
        assert_eq!(m, 7);
    }

    #[test]
    fn choose_m_fails_near_unit_lambda1() {
        let l0 = TransferMatrix::identity(32);
        assert!(matches!(
            choose_m(&l0, 1.0 - 1e-9, 0.1, 1.0),
            Err(Error::MNotFound { .. })
        ));
        // identity never contracts, so a finite threshold is never met
        assert!(matches!(
            choose_m(&l0, 0.5, 10.0, 1.0),
            Err(Error::MNotFound { .. })
        ));
    }

    #[test]
    fn tightening_never_decreases_m() {
        let map = CircleMap::new(2, TrigPoly::sin(1, 0.08)).unwrap();
        let l0 = build_deterministic(&map, 128).unwrap();
        let base = map.constants().unwrap();
        let (l1, b) = lasota_yorke(base.lambda0, base.m2, 0.05);
        let mut prev = 0;
        for t in [1.0, 0.3, 0.1, 0.03, 0.01] {
            let m = choose_m(&l0, l1, b, t).unwrap();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn doubling_certificate_self_validates() {
        let cert = certify(&CircleMap::doubling(), 256).unwrap();
        for c in cert.verify() {
            assert!(c.holds, "{} fails: {} vs {}", c.name, c.lhs, c.rhs);
        }
        assert!(cert.delta_star > 0.0);
        assert!(cert.elom_rate > 0.0 && cert.elom_rate < 1.0);
        assert!(cert.elom_c >= 1.0);
        assert!((cert.c_t0 - 6.0).abs() < 1e-8);
        // δ* must sit within the bisection tolerance of infeasibility
        let base = CircleMap::doubling().constants().unwrap();
        let l0 = build_deterministic(&CircleMap::doubling(), 256).unwrap();
        let c = c_t0(&base, 2);
        assert!(chain_at(&base, c, &l0, cert.delta_star + 2.0 * DELTA_STAR_TOL)
            .unwrap()
            .is_none());
    }

    #[test]
    fn larger_m2_shrinks_delta_star() {
        let l0 = build_deterministic(&CircleMap::doubling(), 128).unwrap();
        let mut prev = f64::INFINITY;
        for m2 in [0.0, 0.5, 2.0, 8.0] {
            let cert = certify_constants(MapConstants { m2, ..DOUBLING }, 2, &l0).unwrap();
            assert!(cert.delta_star <= prev + DELTA_STAR_TOL);
            prev = cert.delta_star;
        }
    }

    #[test]
    fn rejects_non_expanding_constants() {
        let l0 = TransferMatrix::identity(16);
        let base = MapConstants {
            lambda0: 0.9,
            m0: 1.0,
            m2: 0.0,
        };
        assert!(matches!(
            certify_constants(base, 2, &l0),
            Err(Error::NotExpanding { .. })
        ));
    }

    #[test]
    fn displacement_examples() {
        let t0 = CircleMap::doubling();
        let same = displacement_bounds(&t0, &t0).unwrap();
        assert_eq!(same.delta, 0.0);
        assert_eq!(same.measured_branch, 0.0);
        assert_eq!(same.branch_bound, 0.0);
        assert_eq!(same.weight_bound, 0.0);

        let t1 = CircleMap::new(2, TrigPoly::sin(1, 0.01)).unwrap();
        let d = displacement_bounds(&t0, &t1).unwrap();
        assert!(d.holds());
        let bound = 0.01 * (1.0 + 2.0 * PI + 4.0 * PI * PI) / 2.0;
        assert!(d.measured_branch <= bound);
        assert!(d.measured_branch > 0.0);
    }

    #[test]
    fn decay_bound_helpers() {
        let d = DecayBound::doeblin(0.3).unwrap();
        assert!((d.rate - 0.7).abs() < 1e-15);
        let k = d.truncation_order(1e-8, 2.0);
        assert!(d.tail(k, 2.0) <= 1e-8);
        assert!(d.tail(k - 1, 2.0) > 1e-8);
        assert_eq!(d.burn_in(1e-3), MIN_BURN_IN);
        assert!(d.burn_in(1e-30) > MIN_BURN_IN);
        assert!(DecayBound::doeblin(0.0).is_err());
    }
}
