use std::f64::consts::PI;

use serde::Serialize;

use seqresp::constants::{certify, Certificate, DecayBound, InequalityCheck};
use seqresp::noise::{simulate_marginal, DriftMap, Histogram};
use seqresp::response::{
    default_truncation, finite_difference_response, forcing, neumann_response, resolvent_residual, validate,
    ValidationSummary,
};
use seqresp::sequence::{memory_decay, pullback_equivariant, Element, SequenceSystem};
use seqresp::DensityGrid;

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, CliResult};
use crate::output::{gnuplot_lines, OutputDir};

/// Assumed bound on `sup‖g‖_{W¹¹}` when sizing a window before the forcing exists.
const FORCING_GUESS: f64 = 100.0;

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub emit_gnuplot: bool,
    /// Re-run the pullback from a second seed and report the gap.
    pub two_seed: bool,
}

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub out: &'a mut OutputDir,
    pub options: Options,
}

fn uniform_seed(n: usize) -> CliResult<DensityGrid> {
    Ok(DensityGrid::constant(n, 1.0)?)
}

fn alternate_seed(n: usize) -> CliResult<DensityGrid> {
    Ok(DensityGrid::from_fn(n, |x| 1.0 + 0.9 * (2.0 * PI * x).cos())?)
}

#[derive(Serialize)]
struct CertificateFile<'a> {
    certificate: &'a Certificate,
    checks: Vec<InequalityCheck>,
    pass: bool,
}

pub fn certify_cmd(ctx: &mut Context) -> CliResult<String> {
    let reference = ctx.config.reference.build()?;
    let cert = certify(&reference, ctx.config.grid.points)?;
    let checks = cert.verify();
    let pass = cert.all_hold();
    ctx.out.json(
        "certificate.json",
        &CertificateFile {
            certificate: &cert,
            checks,
            pass,
        },
    )?;
    if !pass {
        return Err(CliError::Tolerance("certificate inequalities do not all hold".into()));
    }
    Ok(format!(
        "certified: delta_star = {:.6}, M = {}, rate = {:.6}",
        cert.delta_star, cert.m, cert.elom_rate
    ))
}

/// System, certificate and decay bound shared by the family-based commands.
struct Prepared {
    sys: SequenceSystem,
    cert: Option<Certificate>,
    /// `None` when no bound exists (e.g. noise without a uniform floor).
    bound: Option<DecayBound>,
    burn_in: usize,
}

impl Prepared {
    /// The decay bound, or the error explaining why there is none.
    fn require_bound(&self) -> CliResult<DecayBound> {
        match self.bound {
            Some(b) => Ok(b),
            None => Err(self.sys.decay_bound(self.cert.as_ref()).unwrap_err().into()),
        }
    }
}

fn prepare(config: &ExperimentConfig, depth: impl Fn(Option<&DecayBound>) -> usize) -> CliResult<Prepared> {
    config.check_mode()?;
    let n = config.grid.points;
    let schedule = config.schedule()?;
    let reference = config.reference.build()?;
    let cert = match config.run.mode {
        Mode::Deterministic => Some(certify(&reference, n)?),
        Mode::Noisy => None,
    };
    let probe = SequenceSystem::new((0, 1), schedule.clone(), n)?;
    let bound = probe.decay_bound(cert.as_ref());
    let burn_in = match (config.run.burn_in, &bound) {
        (Some(b), _) => b,
        (None, Ok(bound)) => bound.burn_in(config.run.pullback_tolerance),
        (None, Err(_)) => return Err(bound.unwrap_err().into()),
    };
    let bound = bound.ok();
    let window = config.run.window.unwrap_or_else(|| {
        let hi = (2 * burn_in).max(burn_in + depth(bound.as_ref()));
        (0, hi as i64)
    });
    let sys = SequenceSystem::new(window, schedule, n)?.with_reference(reference);
    if let Some(cert) = &cert {
        sys.check_class(cert, config.run.certified)?;
    }
    Ok(Prepared {
        sys,
        cert,
        bound,
        burn_in,
    })
}

#[derive(Serialize)]
struct FamilyEntry {
    n: i64,
    file: String,
    mass: f64,
    w11_norm: f64,
    residual: f64,
}

#[derive(Serialize)]
struct FamilyManifest {
    window: (i64, i64),
    burn_in: usize,
    convergence_residual: f64,
    equivariance_residual: f64,
    max_w11_norm: f64,
    /// `B/(1−λ₁) + 1 + 0.5` for certified deterministic schedules.
    strong_bound: Option<f64>,
    entries: Vec<FamilyEntry>,
}

#[derive(Serialize)]
struct UniquenessReport {
    seeds: [&'static str; 2],
    l1_gap: f64,
    convergence_residual: f64,
    within_ten_residuals: bool,
}

pub fn equivariant_cmd(ctx: &mut Context) -> CliResult<String> {
    let config = ctx.config;
    let report = config.run.report;
    let p = prepare(config, |_| report)?;
    let ops = p.sys.operators()?;
    let n = config.grid.points;
    let tol = config.run.pullback_tolerance;
    let family = pullback_equivariant(&ops, p.burn_in, &uniform_seed(n)?, tol)?;
    let equivariance = family.equivariance_residual(&ops)?;

    let first = (family.end() - report as i64 + 1).max(family.start());
    let mut entries = Vec::new();
    for (idx, mu) in family.iter().filter(|(idx, _)| *idx >= first) {
        let file = format!("family/mu_{idx}.csv");
        let residual = if idx > family.start() {
            ops.at(idx - 1)?.apply(family.get(idx - 1).unwrap())?.l1_distance(mu)?
        } else {
            0.0
        };
        ctx.out.grid(&file, mu)?;
        entries.push(FamilyEntry {
            n: idx,
            file,
            mass: mu.mass(),
            w11_norm: mu.norm_w11(),
            residual,
        });
    }
    ctx.out.json(
        "family.json",
        &FamilyManifest {
            window: p.sys.window,
            burn_in: p.burn_in,
            convergence_residual: family.convergence_residual,
            equivariance_residual: equivariance,
            max_w11_norm: family.max_w11(),
            strong_bound: p.cert.as_ref().map(|c| c.strong_bound() + 0.5),
            entries,
        },
    )?;
    if ctx.options.two_seed {
        let other = pullback_equivariant(&ops, p.burn_in, &alternate_seed(n)?, tol)?;
        let gap = family.l1_distance(&other)?;
        let scale = family.convergence_residual.max(other.convergence_residual);
        ctx.out.json(
            "uniqueness.json",
            &UniquenessReport {
                seeds: ["1", "1 + 0.9 cos(2 pi x)"],
                l1_gap: gap,
                convergence_residual: scale,
                within_ten_residuals: gap <= 10.0 * scale.max(f64::EPSILON),
            },
        )?;
    }
    if ctx.options.emit_gnuplot {
        let last = format!("family/mu_{}.csv", family.end());
        ctx.out.text(
            "family.gp",
            &gnuplot_lines("equivariant density", "x", "density", &[(&last, "1:2")], false),
        )?;
    }
    Ok(format!(
        "equivariant family on [{}, {}], convergence residual {:.3e}",
        family.start(),
        family.end(),
        family.convergence_residual
    ))
}

#[derive(Serialize)]
struct MemoryManifest {
    start: i64,
    k_max: usize,
    initial_w11: f64,
    initial_l1: f64,
    fitted_rate: f64,
    /// Certified rate for deterministic schedules, `1 − α` for noisy ones.
    bound_rate: Option<f64>,
    file: &'static str,
}

pub fn memory_cmd(ctx: &mut Context) -> CliResult<String> {
    let config = ctx.config;
    let m = &config.memory;
    if m.k_max == 0 {
        return Err(CliError::Config("memory.k_max must be positive".into()));
    }
    if config.run.mode == Mode::Noisy {
        config.check_mode()?;
    }
    let window = (m.start, m.start + m.k_max as i64);
    let sys = SequenceSystem::new(window, config.schedule()?, config.grid.points)?;
    let bound_rate = match config.run.mode {
        Mode::Deterministic => {
            let reference = config.reference.build()?;
            let cert = certify(&reference, config.grid.points)?;
            sys.clone().with_reference(reference).check_class(&cert, config.run.certified)?;
            Some(cert.elom_rate)
        }
        Mode::Noisy => sys.decay_bound(None).ok().map(|b| b.rate),
    };
    let decay = memory_decay(&sys.operators()?, &config.memory_perturbation()?, m.start, m.k_max)?;
    // `{:?}` keeps floats round-trippable
    let rows: Vec<Vec<String>> = decay
        .rows
        .iter()
        .map(|&(k, w11, l1)| vec![k.to_string(), format!("{w11:?}"), format!("{l1:?}"), format!("{:?}", decay.rate)])
        .collect();
    ctx.out
        .table("memory.csv", &["k", "w11_norm", "l1_norm", "fitted_rate"], &rows)?;
    ctx.out.json(
        "memory.json",
        &MemoryManifest {
            start: m.start,
            k_max: m.k_max,
            initial_w11: decay.initial_w11,
            initial_l1: decay.initial_l1,
            fitted_rate: decay.rate,
            bound_rate,
            file: "memory.csv",
        },
    )?;
    if ctx.options.emit_gnuplot {
        ctx.out.text(
            "memory.gp",
            &gnuplot_lines(
                "loss of memory",
                "k",
                "norm",
                &[("memory.csv", "1:2"), ("memory.csv", "1:3")],
                true,
            ),
        )?;
    }
    Ok(format!("fitted decay rate {:.6}", decay.rate))
}

#[derive(Serialize)]
struct EtaEntry {
    n: i64,
    file: String,
    mass: f64,
    w11_norm: f64,
}

#[derive(Serialize)]
struct ResponseManifest<'a> {
    window: (i64, i64),
    burn_in: usize,
    truncation_order: usize,
    tail_bound: f64,
    decay_bound: DecayBound,
    sup_forcing_w11: f64,
    resolvent_residual: f64,
    max_abs_mass: f64,
    entries: Vec<EtaEntry>,
    oracle: Option<&'a ValidationSummary>,
}

pub fn respond_cmd(ctx: &mut Context) -> CliResult<String> {
    let config = ctx.config;
    let r = &config.response;
    let report_len = config.run.report;
    let p = prepare(config, |bound| {
        let k = match (r.truncation, bound) {
            (Some(k), _) => k,
            (None, Some(b)) => b.truncation_order(r.tolerance, FORCING_GUESS),
            (None, None) => 0,
        };
        k + report_len + 1
    })?;
    let bound = p.require_bound()?;
    let ops = p.sys.operators()?;
    let seed = uniform_seed(config.grid.points)?;
    let family = pullback_equivariant(&ops, p.burn_in, &seed, config.run.pullback_tolerance)?;
    let g = forcing(&p.sys, &family)?;
    let k = r
        .truncation
        .unwrap_or_else(|| default_truncation(&bound, r.tolerance, &g));
    let g = g.last(k + report_len);
    let mut report = neumann_response(&ops, &g, k, bound, Some(r.tolerance))?;
    let residual = resolvent_residual(&ops, &report, &g)?;
    let fd = finite_difference_response(&p.sys, &family, &r.eps, &seed, config.run.pullback_tolerance, r.symmetric)?;
    let summary = validate(&report, &fd, r.validation_tolerance)?;
    report.oracle = Some(summary.clone());

    let mut entries = Vec::new();
    for (idx, eta) in report.eta.iter() {
        let file = format!("response/eta_{idx}.csv");
        ctx.out.grid(&file, eta)?;
        entries.push(EtaEntry {
            n: idx,
            file,
            mass: eta.mass(),
            w11_norm: eta.norm_w11(),
        });
    }
    let max_abs_mass = report.eta.max_abs_mass();
    ctx.out.json(
        "response.json",
        &ResponseManifest {
            window: p.sys.window,
            burn_in: p.burn_in,
            truncation_order: k,
            tail_bound: report.tail_bound,
            decay_bound: bound,
            sup_forcing_w11: g.sup_w11(),
            resolvent_residual: residual,
            max_abs_mass,
            entries,
            oracle: report.oracle.as_ref(),
        },
    )?;
    ctx.out.json("validation.json", &summary)?;
    if ctx.options.emit_gnuplot {
        let last = format!("response/eta_{}.csv", report.eta.end());
        ctx.out.text(
            "response.gp",
            &gnuplot_lines("linear response", "x", "eta", &[(&last, "1:2")], false),
        )?;
    }
    if max_abs_mass > 1e-8 {
        return Err(CliError::Tolerance(format!("response mass {max_abs_mass:e} exceeds 1e-8")));
    }
    if !summary.pass {
        return Err(CliError::Tolerance(format!(
            "finite-difference validation failed: D = {:?} (tolerance {})",
            summary.d, summary.tolerance
        )));
    }
    Ok(format!(
        "response with K = {k}, tail bound {:.3e}, D = {:?}",
        report.tail_bound, summary.d
    ))
}

#[derive(Serialize)]
struct SimulationReport {
    samples: usize,
    bins: usize,
    steps: usize,
    seed: u64,
    eps: f64,
    l1_distance: f64,
    histogram: &'static str,
    evolved: &'static str,
}

pub fn simulate_cmd(ctx: &mut Context) -> CliResult<String> {
    let config = ctx.config;
    if config.run.mode != Mode::Noisy {
        return Err(CliError::Config("simulate needs run.mode = \"noisy\"".into()));
    }
    config.check_mode()?;
    let s = &config.simulate;
    if s.bins == 0 || s.samples == 0 {
        return Err(CliError::Config("simulate.bins and simulate.samples must be positive".into()));
    }
    let n = config.grid.points;
    let sys = SequenceSystem::new((0, s.steps.max(1) as i64), config.schedule()?, n)?.with_eps(s.eps);
    let ops = sys.operators()?;
    let evolved = ops.compose(0, s.steps, &uniform_seed(n)?)?;
    let expected = Histogram::from_density(&evolved, s.bins);

    let mut drifts: Vec<DriftMap> = Vec::with_capacity(s.steps);
    for t in 0..s.steps {
        match sys.schedule.element(t as i64)? {
            Element::Noisy { drift, .. } => drifts.push(drift),
            Element::Deterministic { .. } => unreachable!("noisy mode builds noisy elements"),
        }
    }
    let noise = config.noise.as_ref().expect("checked by check_mode").build(n)?;
    let simulated = simulate_marginal(|t| &drifts[t], s.eps, &noise, s.steps, s.samples, config.run.seed, s.bins)?;
    let d = simulated.l1_distance(&expected);
    ctx.out.histogram("histogram.csv", &simulated)?;
    ctx.out.histogram("evolved.csv", &expected)?;
    ctx.out.json(
        "simulate.json",
        &SimulationReport {
            samples: s.samples,
            bins: s.bins,
            steps: s.steps,
            seed: config.run.seed,
            eps: s.eps,
            l1_distance: d,
            histogram: "histogram.csv",
            evolved: "evolved.csv",
        },
    )?;
    if ctx.options.emit_gnuplot {
        ctx.out.text(
            "simulate.gp",
            &gnuplot_lines(
                "Monte Carlo vs operator",
                "x",
                "density",
                &[("histogram.csv", "1:2"), ("evolved.csv", "1:2")],
                false,
            ),
        )?;
    }
    Ok(format!("L1 distance between histogram and evolved density {d:.4}"))
}
