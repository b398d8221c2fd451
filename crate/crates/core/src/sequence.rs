//! Finite-window realisation of a bi-infinite sequential system.
//!
//! Time runs over integer indices. The operator at index `n` is built from the
//! schedule element at `n`; products are always applied in increasing time
//! order, so `compose(j, k, f) = L_{j+k−1} ⋯ L_{j+1} L_j f`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::{Certificate, DecayBound};
use crate::error::{Error, Result};
use crate::grid::DensityGrid;
use crate::maps::{CircleMap, KickField};
use crate::noise::{build_kernel, DriftMap, NoiseDensity};
use crate::transfer::{build_deterministic, build_kick, TransferMatrix};

/// Default W¹¹ tolerance on the pullback convergence residual.
pub const DEFAULT_PULLBACK_TOL: f64 = 1e-8;

/// Relative floor below which decay norms are excluded from rate fits.
const FIT_FLOOR: f64 = 1e-12;

/// One time step of the system.
#[derive(Debug, Clone)]
pub enum Element {
    /// Expanding map followed by the kick `h_ε`.
    Deterministic { map: CircleMap, kick: KickField },
    /// Drift `f^ε` plus additive noise.
    Noisy {
        drift: DriftMap,
        noise: Arc<NoiseDensity>,
    },
}

impl Element {
    /// Transfer operator of this element at perturbation strength `eps`.
    pub fn operator(&self, eps: f64, n: usize) -> Result<TransferMatrix> {
        match self {
            Element::Deterministic { map, kick } => {
                let base = build_deterministic(map, n)?;
                if eps == 0.0 || kick.is_zero() {
                    Ok(base)
                } else {
                    build_kick(kick, eps, n)?.after(&base)
                }
            }
            Element::Noisy { drift, noise } => build_kernel(drift, eps, noise, n),
        }
    }

    fn scaled(&self, c: f64) -> Result<Element> {
        Ok(match self {
            Element::Deterministic { map, kick } => Element::Deterministic {
                map: map.with_scaled_poly(c)?,
                kick: kick.clone(),
            },
            Element::Noisy { drift, noise } => Element::Noisy {
                drift: drift.with_scaled_base(c),
                noise: noise.clone(),
            },
        })
    }

    pub fn map(&self) -> Option<&CircleMap> {
        match self {
            Element::Deterministic { map, .. } => Some(map),
            Element::Noisy { .. } => None,
        }
    }
}

/// Rule assigning an element to every time index.
#[derive(Debug, Clone)]
pub enum Schedule {
    Constant(Element),
    Periodic(Vec<Element>),
    /// `base` with its nonlinear part scaled by `offset + amplitude·sin(2πn/period)`.
    Parametric {
        base: Element,
        offset: f64,
        amplitude: f64,
        period: u32,
    },
    /// Uniform choice among `choices`, a pure function of `(seed, n)`.
    SeededRandom { choices: Vec<Element>, seed: u64 },
}

impl Schedule {
    /// Indices with equal keys share one operator.
    pub fn key(&self, n: i64) -> usize {
        match self {
            Schedule::Constant(_) => 0,
            Schedule::Periodic(list) => n.rem_euclid(list.len() as i64) as usize,
            Schedule::Parametric { period, .. } => n.rem_euclid(*period as i64) as usize,
            Schedule::SeededRandom { choices, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(n as u64);
                rng.gen_range(0..choices.len())
            }
        }
    }

    /// Element for a key produced by [`Schedule::key`].
    pub fn element_for_key(&self, key: usize) -> Result<Element> {
        match self {
            Schedule::Constant(e) => Ok(e.clone()),
            Schedule::Periodic(list) => Ok(list[key].clone()),
            Schedule::Parametric {
                base,
                offset,
                amplitude,
                period,
            } => {
                let phase = 2.0 * PI * key as f64 / *period as f64;
                base.scaled(offset + amplitude * phase.sin())
            }
            Schedule::SeededRandom { choices, .. } => Ok(choices[key].clone()),
        }
    }

    pub fn element(&self, n: i64) -> Result<Element> {
        self.element_for_key(self.key(n))
    }

    fn validate(&self) -> Result<()> {
        let empty = match self {
            Schedule::Periodic(l) => l.is_empty(),
            Schedule::SeededRandom { choices, .. } => choices.is_empty(),
            Schedule::Parametric { period, .. } => *period == 0,
            Schedule::Constant(_) => false,
        };
        if empty {
            return Err(Error::InvalidArgument("schedule has no elements".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SequenceSystem {
    /// Inclusive index range `[n_lo, n_hi]` available for computation.
    pub window: (i64, i64),
    pub schedule: Schedule,
    /// Perturbation strength used when building operators.
    pub eps: f64,
    pub n_points: usize,
    /// Reference map `T₀` for class membership checks.
    pub reference: Option<CircleMap>,
}

impl SequenceSystem {
    pub fn new(window: (i64, i64), schedule: Schedule, n_points: usize) -> Result<Self> {
        if window.1 < window.0 {
            return Err(Error::InvalidArgument(format!("empty window {window:?}")));
        }
        schedule.validate()?;
        DensityGrid::zeros(n_points)?;
        Ok(Self {
            window,
            schedule,
            eps: 0.0,
            n_points,
            reference: None,
        })
    }

    pub fn with_reference(mut self, reference: CircleMap) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self {
            eps,
            ..self.clone()
        }
    }

    pub fn is_noisy(&self) -> bool {
        matches!(self.schedule.element(self.window.0), Ok(Element::Noisy { .. }))
    }

    fn check_range(&self, lo: i64, hi: i64) -> Result<()> {
        if lo < self.window.0 || hi > self.window.1 {
            return Err(Error::WindowExceeded {
                lo,
                hi,
                window_lo: self.window.0,
                window_hi: self.window.1,
            });
        }
        Ok(())
    }

    fn distinct_keys(&self) -> Vec<usize> {
        let mut keys: Vec<usize> = (self.window.0..=self.window.1)
            .map(|n| self.schedule.key(n))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    /// Checks every scheduled map against the certified ball around the
    /// reference. Violations are errors when `strict`, warnings otherwise.
    pub fn check_class(&self, cert: &Certificate, strict: bool) -> Result<()> {
        let Some(reference) = &self.reference else {
            return Ok(());
        };
        for key in self.distinct_keys() {
            let element = self.schedule.element_for_key(key)?;
            if let Some(map) = element.map() {
                let distance = reference.c2_distance(map)?;
                if distance > cert.delta_star {
                    let index = (self.window.0..=self.window.1)
                        .find(|&n| self.schedule.key(n) == key)
                        .unwrap_or(self.window.0);
                    if strict {
                        return Err(Error::OutsideCertifiedClass {
                            index,
                            distance,
                            delta_star: cert.delta_star,
                        });
                    }
                    log::warn!(
                        "map at index {index} lies outside the certified ball ({distance} > {})",
                        cert.delta_star
                    );
                }
            }
        }
        Ok(())
    }

    /// Decay bound for products of the scheduled operators: the Doeblin bound
    /// of the weakest noise for noisy schedules, the certificate otherwise.
    pub fn decay_bound(&self, cert: Option<&Certificate>) -> Result<DecayBound> {
        let mut alpha = f64::INFINITY;
        for key in self.distinct_keys() {
            match self.schedule.element_for_key(key)? {
                Element::Noisy { noise, .. } => alpha = alpha.min(noise.doeblin_alpha()),
                Element::Deterministic { .. } => {
                    return cert.map(Certificate::decay_bound).ok_or_else(|| {
                        Error::InvalidArgument(
                            "deterministic schedules need a certificate for decay bounds".into(),
                        )
                    })
                }
            }
        }
        DecayBound::doeblin(alpha)
    }

    /// Builds every distinct operator of the window at strength `self.eps`.
    pub fn operators(&self) -> Result<OperatorTable> {
        let keys = self.distinct_keys();
        let built = keys
            .par_iter()
            .map(|&key| {
                let element = self.schedule.element_for_key(key)?;
                Ok((key, Arc::new(element.operator(self.eps, self.n_points)?)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorTable {
            window: self.window,
            keys: (self.window.0..=self.window.1)
                .map(|n| self.schedule.key(n))
                .collect(),
            matrices: built.into_iter().collect(),
        })
    }
}

/// Operators of a window, shared by schedule key. Read-only once built.
#[derive(Debug, Clone)]
pub struct OperatorTable {
    window: (i64, i64),
    keys: Vec<usize>,
    matrices: HashMap<usize, Arc<TransferMatrix>>,
}

impl OperatorTable {
    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn distinct(&self) -> usize {
        self.matrices.len()
    }

    pub fn at(&self, n: i64) -> Result<&TransferMatrix> {
        if n < self.window.0 || n > self.window.1 {
            return Err(Error::WindowExceeded {
                lo: n,
                hi: n,
                window_lo: self.window.0,
                window_hi: self.window.1,
            });
        }
        let key = self.keys[(n - self.window.0) as usize];
        Ok(&self.matrices[&key])
    }

    /// `L_{j+k−1} ⋯ L_j f`; `k = 0` returns `f`.
    pub fn compose(&self, j: i64, k: usize, f: &DensityGrid) -> Result<DensityGrid> {
        if k == 0 {
            return Ok(f.clone());
        }
        let last = j + k as i64 - 1;
        if j < self.window.0 || last > self.window.1 {
            return Err(Error::WindowExceeded {
                lo: j,
                hi: last,
                window_lo: self.window.0,
                window_hi: self.window.1,
            });
        }
        let mut out = f.clone();
        for n in j..=last {
            out = self.at(n)?.apply(&out)?;
        }
        Ok(out)
    }
}

/// Convenience wrapper building the operators of `sys` on the fly.
pub fn compose(sys: &SequenceSystem, j: i64, k: usize, f: &DensityGrid) -> Result<DensityGrid> {
    if k > 0 {
        sys.check_range(j, j + k as i64 - 1)?;
    }
    sys.operators()?.compose(j, k, f)
}

/// Probability densities `μ_n` with `μ_{n+1} = L_n μ_n` on an index range.
#[derive(Debug, Clone)]
pub struct EquivariantFamily {
    start: i64,
    densities: Vec<DensityGrid>,
    pub burn_in: usize,
    /// `max_n ‖μ_n^{(burn_in)} − μ_n^{(burn_in/2)}‖_{W¹¹}`.
    pub convergence_residual: f64,
}

impl EquivariantFamily {
    pub fn from_parts(start: i64, densities: Vec<DensityGrid>) -> Self {
        Self {
            start,
            densities,
            burn_in: 0,
            convergence_residual: 0.0,
        }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last index (inclusive).
    pub fn end(&self) -> i64 {
        self.start + self.densities.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn get(&self, n: i64) -> Option<&DensityGrid> {
        if n < self.start {
            return None;
        }
        self.densities.get((n - self.start) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &DensityGrid)> {
        self.densities
            .iter()
            .enumerate()
            .map(move |(i, d)| (self.start + i as i64, d))
    }

    /// `max_n ‖μ_{n+1} − L_n μ_n‖_{L¹}` over interior indices.
    pub fn equivariance_residual(&self, ops: &OperatorTable) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for n in self.start..self.end() {
            let pushed = ops.at(n)?.apply(&self.densities[(n - self.start) as usize])?;
            worst = worst.max(pushed.l1_distance(&self.densities[(n - self.start + 1) as usize])?);
        }
        Ok(worst)
    }

    /// Largest L¹ distance to another family over shared indices.
    pub fn l1_distance(&self, other: &EquivariantFamily) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (n, d) in self.iter() {
            if let Some(o) = other.get(n) {
                worst = worst.max(d.l1_distance(o)?);
            }
        }
        Ok(worst)
    }

    pub fn max_w11(&self) -> f64 {
        self.densities.iter().map(|d| d.norm_w11()).fold(0.0, f64::max)
    }
}

/// Sweeps `seed` forward from `from` and keeps the densities at indices `>= keep_from`.
fn sweep(
    ops: &OperatorTable,
    seed: &DensityGrid,
    from: i64,
    keep_from: i64,
    to: i64,
) -> Result<Vec<DensityGrid>> {
    let mut mu = seed.clone();
    let mut kept = Vec::with_capacity((to - keep_from + 1).max(0) as usize);
    if from >= keep_from {
        kept.push(mu.clone());
    }
    for n in from..to {
        mu = ops.at(n)?.apply(&mu)?;
        if n + 1 >= keep_from {
            kept.push(mu.clone());
        }
    }
    Ok(kept)
}

/// Pullback family on `[n_lo + burn_in, n_hi]` from a single sweep started at `n_lo`.
pub fn pullback_equivariant(
    ops: &OperatorTable,
    burn_in: usize,
    seed: &DensityGrid,
    tolerance: f64,
) -> Result<EquivariantFamily> {
    let (lo, hi) = ops.window();
    if burn_in == 0 {
        return Err(Error::InvalidArgument("burn_in must be >= 1".into()));
    }
    if hi - lo < 2 * burn_in as i64 {
        return Err(Error::InvalidArgument(format!(
            "window [{lo}, {hi}] shorter than twice the burn-in {burn_in}"
        )));
    }
    if !seed.is_probability() {
        return Err(Error::InvalidArgument("seed must be a probability density".into()));
    }
    let keep_from = lo + burn_in as i64;
    let densities = sweep(ops, seed, lo, keep_from, hi)?;
    let half = sweep(ops, seed, keep_from - (burn_in / 2) as i64, keep_from, hi)?;
    let mut residual: f64 = 0.0;
    for (a, b) in densities.iter().zip(&half) {
        residual = residual.max(a.w11_distance(b)?);
    }
    if residual > tolerance {
        return Err(Error::NotConverged {
            residual,
            tolerance,
        });
    }
    Ok(EquivariantFamily {
        start: keep_from,
        densities,
        burn_in,
        convergence_residual: residual,
    })
}

/// Norms of `k`-step pushforwards of a zero-mass density.
#[derive(Debug, Clone)]
pub struct MemoryDecay {
    pub initial_w11: f64,
    pub initial_l1: f64,
    /// `(k, ‖Φ_k v‖_{W¹¹}, ‖Φ_k v‖_{L¹})` for `k = 1..=k_max`.
    pub rows: Vec<(usize, f64, f64)>,
    /// Least-squares exponential rate of the W¹¹ norms over the second half
    /// of the range. Norms below `1e-12` of the initial norm are excluded;
    /// with fewer than two usable points the rate is reported as 0.
    pub rate: f64,
}

pub fn memory_decay(ops: &OperatorTable, v: &DensityGrid, j: i64, k_max: usize) -> Result<MemoryDecay> {
    if v.mass().abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "memory decay needs a zero-mass density, mass = {:e}",
            v.mass()
        )));
    }
    let initial_w11 = v.norm_w11();
    let initial_l1 = v.norm_l1();
    let mut rows = Vec::with_capacity(k_max);
    let mut w = v.clone();
    for k in 1..=k_max {
        w = ops.at(j + k as i64 - 1)?.apply(&w)?;
        rows.push((k, w.norm_w11(), w.norm_l1()));
    }
    let floor = FIT_FLOOR * initial_w11;
    let points: Vec<(f64, f64)> = rows[k_max / 2..]
        .iter()
        .filter(|r| r.1 > floor)
        .map(|r| (r.0 as f64, r.1.ln()))
        .collect();
    let rate = if points.len() < 2 {
        0.0
    } else {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    };
    Ok(MemoryDecay {
        initial_w11,
        initial_l1,
        rows,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::trig_grid;
    use crate::maps::TrigPoly;

    const N: usize = 256;

    fn doubling_element() -> Element {
        Element::Deterministic {
            map: CircleMap::doubling(),
            kick: KickField::default(),
        }
    }

    fn doubling_system(window: (i64, i64)) -> SequenceSystem {
        SequenceSystem::new(window, Schedule::Constant(doubling_element()), N).unwrap()
    }

    fn smooth_seed() -> DensityGrid {
        trig_grid(N, &[(0, 1.0, 0.0), (1, 0.5, 0.2), (3, 0.0, 0.1)]).unwrap()
    }

    #[test]
    fn empty_composition_is_identity() {
        let sys = doubling_system((0, 10));
        let f = smooth_seed();
        assert_eq!(compose(&sys, 3, 0, &f).unwrap(), f);
    }

    #[test]
    fn doubling_annihilates_first_harmonic() {
        let sys = doubling_system((0, 10));
        let f = trig_grid(N, &[(0, 1.0, 0.0), (1, 1.0, 0.0)]).unwrap();
        let out = compose(&sys, 0, 1, &f).unwrap();
        assert!(out.sup_distance(&DensityGrid::constant(N, 1.0).unwrap()).unwrap() <= 1e-8);
    }

    #[test]
    fn mass_survives_fifty_steps() {
        let sched = Schedule::Periodic(vec![
            doubling_element(),
            Element::Deterministic {
                map: CircleMap::new(2, TrigPoly::sin(1, 0.03)).unwrap(),
                kick: KickField::default(),
            },
        ]);
        let sys = SequenceSystem::new((0, 60), sched, N).unwrap();
        let f = smooth_seed();
        let out = compose(&sys, 0, 50, &f).unwrap();
        assert!((out.mass() - f.mass()).abs() <= 1e-8);
    }

    #[test]
    fn compose_outside_window_fails() {
        let sys = doubling_system((0, 10));
        assert!(matches!(
            compose(&sys, 5, 10, &smooth_seed()),
            Err(Error::WindowExceeded { .. })
        ));
    }

    #[test]
    fn periodic_schedule_shares_operators() {
        let sched = Schedule::Periodic(vec![doubling_element(), doubling_element(), doubling_element()]);
        let sys = SequenceSystem::new((-5, 40), sched, 64).unwrap();
        assert_eq!(sys.operators().unwrap().distinct(), 3);
    }

    #[test]
    fn seeded_random_schedule_is_pure() {
        let sched = Schedule::SeededRandom {
            choices: vec![doubling_element(), doubling_element()],
            seed: 42,
        };
        let keys: Vec<usize> = (0..50).map(|n| sched.key(n)).collect();
        let again: Vec<usize> = (0..50).map(|n| sched.key(n)).collect();
        assert_eq!(keys, again);
        assert!(keys.contains(&0) && keys.contains(&1));
    }

    #[test]
    fn parametric_schedule_scales_map() {
        let base = Element::Deterministic {
            map: CircleMap::new(2, TrigPoly::sin(1, 0.05)).unwrap(),
            kick: KickField::default(),
        };
        let sched = Schedule::Parametric {
            base,
            offset: 1.0,
            amplitude: 0.5,
            period: 4,
        };
        // n = 1: scale 1.5
        let e = sched.element(1).unwrap();
        assert_eq!(e.map().unwrap().poly(), &TrigPoly::sin(1, 0.05 * 1.5));
        assert_eq!(sched.key(5), sched.key(1));
    }

    #[test]
    fn doubling_pullback_is_uniform() {
        let sys = doubling_system((0, 200));
        let ops = sys.operators().unwrap();
        let fam = pullback_equivariant(&ops, 60, &smooth_seed(), DEFAULT_PULLBACK_TOL).unwrap();
        assert_eq!(fam.start(), 60);
        assert_eq!(fam.end(), 200);
        let one = DensityGrid::constant(N, 1.0).unwrap();
        for (_, mu) in fam.iter() {
            assert!(mu.l1_distance(&one).unwrap() <= 1e-9);
        }
        assert!(fam.convergence_residual <= 1e-9);
        assert!(fam.equivariance_residual(&ops).unwrap() <= 1e-9);
    }

    #[test]
    fn pullback_rejects_short_window_and_bad_seed() {
        let ops = doubling_system((0, 100)).operators().unwrap();
        assert!(pullback_equivariant(&ops, 60, &smooth_seed(), 1e-8).is_err());
        let bad = smooth_seed().scale(2.0);
        assert!(pullback_equivariant(&ops, 20, &bad, 1e-8).is_err());
        assert!(pullback_equivariant(&ops, 0, &smooth_seed(), 1e-8).is_err());
    }

    #[test]
    fn pullback_reports_non_convergence() {
        // a slowly mixing noisy system with a tight tolerance
        let noise = Arc::new(NoiseDensity::bump(64, 0.0, 0.01, 0.0).unwrap());
        let drift = DriftMap::unperturbed(crate::noise::DriftBase::identity(), 64).unwrap();
        let sys = SequenceSystem::new((0, 8), Schedule::Constant(Element::Noisy { drift, noise }), 64)
            .unwrap();
        let seed = trig_grid(64, &[(0, 1.0, 0.0), (1, 0.9, 0.0)]).unwrap();
        assert!(matches!(
            pullback_equivariant(&sys.operators().unwrap(), 4, &seed, 1e-8),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn uniform_noise_uniformises_in_one_step() {
        let noise = Arc::new(NoiseDensity::uniform(N).unwrap());
        let drift = DriftMap::unperturbed((&CircleMap::doubling()).into(), N).unwrap();
        let sys = SequenceSystem::new((0, 4), Schedule::Constant(Element::Noisy { drift, noise }), N)
            .unwrap();
        let ops = sys.operators().unwrap();
        // burn_in = 2 so that the half-length comparison sweep also takes one step
        let fam = pullback_equivariant(&ops, 2, &smooth_seed(), 1e-12).unwrap();
        let one = DensityGrid::constant(N, 1.0).unwrap();
        for (_, mu) in fam.iter() {
            assert!(mu.sup_distance(&one).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn memory_decay_of_doubling_harmonics() {
        let ops = doubling_system((0, 20)).operators().unwrap();
        let v = trig_grid(N, &[(1, 1.0, 0.0)]).unwrap();
        let d = memory_decay(&ops, &v, 0, 3).unwrap();
        assert!(d.rows[0].1 <= 1e-8 && d.rows[0].2 <= 1e-8);

        let v = trig_grid(N, &[(4, 1.0, 0.0)]).unwrap();
        let d = memory_decay(&ops, &v, 0, 4).unwrap();
        assert!(d.rows[1].2 > 0.1, "frequency 4 -> 2 survives two steps");
        assert!(d.rows[2].1 <= 1e-8, "frequency 4 -> 2 -> 1 -> 0 after three steps");

        assert!(memory_decay(&ops, &smooth_seed(), 0, 3).is_err());
    }

    #[test]
    fn doeblin_memory_decay() {
        let noise = Arc::new(NoiseDensity::raised_cosine(N, 0.5, 0.3).unwrap());
        let drift = DriftMap::unperturbed((&CircleMap::doubling()).into(), N).unwrap();
        let sys = SequenceSystem::new((0, 12), Schedule::Constant(Element::Noisy { drift, noise }), N)
            .unwrap();
        let ops = sys.operators().unwrap();
        let v = trig_grid(N, &[(1, 0.6, 0.3), (2, 0.0, 0.4), (5, 0.2, 0.0)]).unwrap();
        let d = memory_decay(&ops, &v, 0, 10).unwrap();
        for &(k, _, l1) in &d.rows {
            assert!(l1 <= 0.7f64.powi(k as i32) * d.initial_l1 * (1.0 + 1e-6));
        }
    }

    #[test]
    fn fitted_rate_recovers_known_geometric_decay() {
        // a damped rotation: kernel operator of the identity drift with a wide bump
        let noise = Arc::new(NoiseDensity::bump(N, 0.0, 0.08, 0.0).unwrap());
        let drift = DriftMap::unperturbed(crate::noise::DriftBase::identity(), N).unwrap();
        let sys = SequenceSystem::new((0, 30), Schedule::Constant(Element::Noisy { drift, noise: noise.clone() }), N)
            .unwrap();
        let ops = sys.operators().unwrap();
        let v = trig_grid(N, &[(1, 1.0, 0.0)]).unwrap();
        let d = memory_decay(&ops, &v, 0, 12).unwrap();
        // convolution multiplies the k = 1 mode by the first Fourier coefficient of q
        let q = noise.density();
        let c1: f64 = q
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v * (2.0 * PI * i as f64 / N as f64).cos())
            .sum::<f64>()
            / N as f64;
        assert!((d.rate - c1).abs() <= 1e-6, "rate {} vs {}", d.rate, c1);
    }

    #[test]
    fn family_respects_uniform_strong_bound() {
        use crate::constants::certify;
        let cert = certify(&CircleMap::doubling(), N).unwrap();
        let near = Element::Deterministic {
            map: CircleMap::new(2, TrigPoly::sin(1, 0.002)).unwrap(),
            kick: KickField::default(),
        };
        let sys = SequenceSystem::new((0, 150), Schedule::Periodic(vec![doubling_element(), near]), N).unwrap();
        let fam = pullback_equivariant(&sys.operators().unwrap(), 60, &smooth_seed(), DEFAULT_PULLBACK_TOL).unwrap();
        assert!(fam.max_w11() > 1.0, "perturbed family is not uniform");
        assert!(fam.max_w11() <= cert.strong_bound() + 0.5);
    }

    #[test]
    fn class_check_flags_far_maps() {
        use crate::constants::certify;
        let cert = certify(&CircleMap::doubling(), 128).unwrap();
        let far = Element::Deterministic {
            map: CircleMap::new(2, TrigPoly::sin(1, 0.05)).unwrap(),
            kick: KickField::default(),
        };
        let sys = SequenceSystem::new((0, 10), Schedule::Periodic(vec![doubling_element(), far]), 128)
            .unwrap()
            .with_reference(CircleMap::doubling());
        assert!(matches!(
            sys.check_class(&cert, true),
            Err(Error::OutsideCertifiedClass { index: 1, .. })
        ));
        assert!(sys.check_class(&cert, false).is_ok());
        assert!(doubling_system((0, 10))
            .with_reference(CircleMap::doubling())
            .check_class(&cert, true)
            .is_ok());
    }
}
