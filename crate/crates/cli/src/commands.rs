use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use esid_core::analysis::{check_degraded, check_more_capable, default_grid_resolution, DEFAULT_DEGRADED_TOL};
use esid_core::bounds::{
    est_upper_bound, lower_bound_cor1, lower_bound_prop1, secret_id_rate, upper_bound_thm1, zero_capacity_check,
    BoundResult, BoundStatus, OptimizerConfig, StealthConstraint, ZeroCapacity,
};
use esid_core::checks::{run_checks_with, Suite};
use esid_core::example::{
    analytic_report, fig2_sweep_at, numeric_cross_check, sweep_svg, write_sweep_csv, RevDegradedScenario,
    ScenarioReport, SweepRow,
};
use esid_core::idsim::{
    build_toy_esid_code, evaluate_id_code_in, lemma1_dalpha_bound, lemma1_mutinf_bound, stealth_of_code, IdCode,
    Lemma1Params, DEFAULT_ETA, MAX_DALPHA_OUTPUTS,
};
use esid_core::measures::{d_alpha, kl};
use esid_core::prob::{bsc, push_forward, Alphabet, Channel, Distribution, WiretapChannel};
use esid_core::{Error, LogBase};
use serde::Serialize;

use crate::io::{
    distribution_on, load_channel, load_eaves, load_json, load_wiretap, parse_vector, write_atomic, write_output,
    Run,
};
use crate::{Common, Failure, Outcome};

fn optimizer(c: &Common, u_size: Option<usize>) -> OptimizerConfig {
    OptimizerConfig {
        restarts: c.restarts,
        tol: c.tol.unwrap_or(1e-9),
        seed: c.seed,
        u_size,
        ..OptimizerConfig::default()
    }
}

#[derive(Args, Serialize)]
pub struct BoundsArgs {
    /// Wiretap channel JSON.
    #[arg(long)]
    channel: PathBuf,
    /// Target eavesdropper law `Q_Z`, inline (`0.5,0.5`) or a JSON file.
    #[arg(long)]
    qz: String,
    /// Use the relaxed constraint `D(P_X W_Z || Q_Z) <= slack` (nats).
    #[arg(long)]
    slack: Option<f64>,
    /// Auxiliary alphabet size; `|X| + 2` by default.
    #[arg(long)]
    u_size: Option<usize>,
    /// Exit with status 1 unless every bound is feasible.
    #[arg(long)]
    require_feasible: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct Ordering {
    prop1_le_cor1: bool,
    cor1_le_thm1: bool,
    cor1_le_secret_id: bool,
}

#[derive(Serialize)]
struct BoundsReport {
    q_z: Distribution,
    results: Vec<BoundResult>,
    zero_capacity: ZeroCapacity,
    ordering: Ordering,
}

pub fn bounds(a: BoundsArgs) -> Outcome {
    let mut run = Run::start("bounds", &a, a.common.seed);
    run.input(&a.channel);
    let w = load_wiretap(&a.channel)?;
    let q_z = distribution_on(w.eaves().output(), &a.qz)?;
    let c = match a.slack {
        Some(s) => StealthConstraint::relaxed(q_z.clone(), s)?,
        None => StealthConstraint::exact(q_z.clone()),
    };
    let cfg = optimizer(&a.common, a.u_size);
    let base = LogBase::from(a.common.base);
    let results = vec![
        lower_bound_prop1(&w, &c, &cfg, base)?,
        lower_bound_cor1(&w, &c, &cfg, base)?,
        upper_bound_thm1(&w, &c, &cfg, base)?,
        est_upper_bound(&w, &c, &cfg, base)?,
        secret_id_rate(&w, &cfg, base)?,
    ];
    let zero_capacity = zero_capacity_check(&w, &c, &cfg)?;
    let v = |i: usize| results[i].value;
    let ordering = Ordering {
        prop1_le_cor1: v(0) <= v(1) + 1e-9,
        cor1_le_thm1: v(1) <= v(2) + 1e-6,
        cor1_le_secret_id: v(1) <= v(4) + 1e-6,
    };
    eprintln!("{:<10} {:>14} {:>14} {:>12}", "bound", format!("value ({})", base.unit()), "status", "residual");
    for r in &results {
        eprintln!(
            "{:<10} {:>14.9} {:>14} {:>12.2e}",
            serde_json::to_value(r.bound).unwrap_or_default().as_str().unwrap_or("?"),
            r.value,
            serde_json::to_value(r.status).unwrap_or_default().as_str().unwrap_or("?"),
            r.stealth_residual
        );
    }
    eprintln!(
        "zero capacity: {:?}; prop1 <= cor1: {}; cor1 <= thm1: {}; cor1 <= secret_id: {}",
        zero_capacity, ordering.prop1_le_cor1, ordering.cor1_le_thm1, ordering.cor1_le_secret_id
    );
    let infeasible: Vec<_> = results
        .iter()
        .filter(|r| r.status == BoundStatus::Infeasible)
        .map(|r| r.bound)
        .collect();
    run.emit(
        BoundsReport {
            q_z,
            results,
            zero_capacity,
            ordering,
        },
        a.common.out.as_deref(),
    )?;
    if a.require_feasible && !infeasible.is_empty() {
        return Err(Failure::Numerical(format!("infeasible bounds: {infeasible:?}")));
    }
    Ok(())
}

#[derive(Args, Serialize)]
pub struct ExampleArgs {
    /// BSC crossover of the prefix, in [0, 1/2].
    #[arg(long)]
    q: f64,
    /// BEC erasure probability, in (1/2, 1].
    #[arg(long, conflicts_with = "eps_critical", required_unless_present = "eps_critical")]
    eps: Option<f64>,
    /// Use the critical erasure probability `1/(2 - H2(q))`.
    #[arg(long)]
    eps_critical: bool,
    /// Number of sweep points over `p_u2` in [0, 1].
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// `P(X_1 = 1)`, held fixed during the sweep.
    #[arg(long, default_value_t = 0.5)]
    p_x1: f64,
    /// Also write the sweep as an SVG polyline chart.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Summary JSON path; stdout when `--out` is set, stderr otherwise.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct ExampleSummary {
    q: f64,
    eps: f64,
    report: ScenarioReport,
    /// Largest difference between closed forms and channel computations.
    cross_check: f64,
}

fn rescale_report(r: ScenarioReport, k: f64) -> ScenarioReport {
    ScenarioReport {
        i_xy: r.i_xy * k,
        i_xz: r.i_xz * k,
        i_uy: r.i_uy * k,
        i_uz: r.i_uz * k,
        gap: r.gap * k,
        est_bound: r.est_bound * k,
        secret_id: r.secret_id * k,
        cor1_lower: r.cor1_lower * k,
        thm1_upper: r.thm1_upper * k,
        ..r
    }
}

pub fn example(a: ExampleArgs) -> Outcome {
    let run = Run::start("example", &a, a.common.seed);
    let scenario = match a.eps {
        Some(eps) => RevDegradedScenario::new(eps, a.q)?,
        None => RevDegradedScenario::critical(a.q)?,
    }
    .with_inputs(a.p_x1, 0.5)?;
    // Closed forms are in bits.
    let k = match a.common.base {
        crate::Base::Bits => 1.0,
        crate::Base::Nats => LN_2,
    };
    let rows: Vec<SweepRow> = fig2_sweep_at(a.q, scenario.eps, a.p_x1, a.grid)?
        .into_iter()
        .map(|r| SweepRow {
            p_u2: r.p_u2,
            i_xy: r.i_xy * k,
            i_xz: r.i_xz * k,
            i_uy: r.i_uy * k,
            i_uz: r.i_uz * k,
        })
        .collect();
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv).map_err(Error::Io)?;
    write_output(a.common.out.as_deref(), &csv)?;
    if let Some(path) = &a.svg {
        write_atomic(path, sweep_svg(&rows).as_bytes())?;
    }
    let summary = ExampleSummary {
        q: a.q,
        eps: scenario.eps,
        report: rescale_report(analytic_report(&scenario), k),
        cross_check: numeric_cross_check(&scenario)? * k,
    };
    match (&a.summary, &a.common.out) {
        (Some(path), _) => run.emit(summary, Some(path))?,
        (None, Some(_)) => run.emit(summary, None)?,
        (None, None) => {
            let doc = serde_json::json!({ "manifest": run.manifest(), "result": summary });
            eprintln!("{}", serde_json::to_string_pretty(&doc).map_err(Error::from)?);
        }
    }
    Ok(())
}

#[derive(Args, Serialize)]
pub struct DegradedArgs {
    /// Wiretap channel JSON.
    #[arg(long)]
    channel: PathBuf,
    #[command(flatten)]
    common: Common,
}

pub fn degraded(a: DegradedArgs) -> Outcome {
    let mut run = Run::start("degraded", &a, a.common.seed);
    run.input(&a.channel);
    let w = load_wiretap(&a.channel)?;
    let verdict = check_degraded(w.legit(), w.eaves(), a.common.tol.unwrap_or(DEFAULT_DEGRADED_TOL))?;
    run.emit(verdict, a.common.out.as_deref())?;
    Ok(())
}

#[derive(Args, Serialize)]
pub struct MoreCapableArgs {
    /// Wiretap channel JSON.
    #[arg(long)]
    channel: PathBuf,
    /// Grid subdivisions per simplex edge; chosen from `|X|` by default.
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    common: Common,
}

pub fn more_capable(a: MoreCapableArgs) -> Outcome {
    let mut run = Run::start("more-capable", &a, a.common.seed);
    run.input(&a.channel);
    let w = load_wiretap(&a.channel)?;
    let grid = a.grid.unwrap_or_else(|| default_grid_resolution(w.input().size()));
    let verdict = check_more_capable(w.legit(), w.eaves(), grid, a.common.restarts, a.common.base.into())?;
    run.emit(verdict, a.common.out.as_deref())?;
    Ok(())
}

#[derive(Args, Serialize)]
pub struct DalphaArgs {
    /// First law, inline or a JSON file.
    #[arg(long)]
    p: String,
    /// Reference law, inline or a JSON file.
    #[arg(long)]
    q: String,
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct DalphaReport {
    d_alpha: f64,
    kl: f64,
    alpha: f64,
    base: LogBase,
}

pub fn dalpha(a: DalphaArgs) -> Outcome {
    let run = Run::start("dalpha", &a, a.common.seed);
    let p = parse_vector(&a.p)?;
    let alphabet = Alphabet::indexed(p.len());
    let p = Distribution::new(alphabet.clone(), p)?;
    let q = distribution_on(&alphabet, &a.q)?;
    let base = LogBase::from(a.common.base);
    let report = DalphaReport {
        d_alpha: d_alpha(&p, &q, a.alpha, base)?,
        kl: kl(&p, &q, base)?.value,
        alpha: a.alpha,
        base,
    };
    run.emit(report, a.common.out.as_deref())?;
    Ok(())
}

#[derive(Subcommand)]
pub enum IdcodeCommand {
    /// Exact error probabilities of a code.
    Eval(IdEvalArgs),
    /// Largest eavesdropper divergence from `Q_Z^n` over the messages.
    Stealth(IdStealthArgs),
    /// Evaluate both forms of the one-shot converse.
    Lemma1(IdLemmaArgs),
    /// Generate a small stealthy toy code.
    Generate(IdGenerateArgs),
}

#[derive(Args, Serialize)]
pub struct IdEvalArgs {
    #[arg(long)]
    code: PathBuf,
    /// Legitimate channel JSON (or a wiretap file).
    #[arg(long)]
    channel: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
pub struct IdStealthArgs {
    #[arg(long)]
    code: PathBuf,
    /// Wiretap file, or the eavesdropper channel itself.
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    qz: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
pub struct IdLemmaArgs {
    #[arg(long)]
    code: PathBuf,
    /// Legitimate channel JSON (or a wiretap file).
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Grid subdivisions for the inner minimization over `Q`.
    #[arg(long, default_value_t = 16)]
    q_grid: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
pub struct IdGenerateArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Wiretap channel JSON; BSC(0.1) with a blind eavesdropper by default.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Target `Q_Z`; the image of the uniform input by default.
    #[arg(long)]
    qz: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn load_code(run: &mut Run, path: &Path) -> Result<IdCode, Failure> {
    run.input(path);
    Ok(load_json(path)?)
}

pub fn idcode(c: IdcodeCommand) -> Outcome {
    match c {
        IdcodeCommand::Eval(a) => {
            let mut run = Run::start("idcode eval", &a, a.common.seed);
            let code = load_code(&mut run, &a.code)?;
            run.input(&a.channel);
            let legit = load_channel(&a.channel)?;
            let metrics = evaluate_id_code_in(&code, &legit, a.common.base.into())?;
            run.emit(metrics, a.common.out.as_deref())?;
        }
        IdcodeCommand::Stealth(a) => {
            let mut run = Run::start("idcode stealth", &a, a.common.seed);
            let code = load_code(&mut run, &a.code)?;
            run.input(&a.channel);
            let eaves = load_eaves(&a.channel)?;
            let q_z = distribution_on(eaves.output(), &a.qz)?;
            let base = LogBase::from(a.common.base);
            let delta = stealth_of_code(&code, &eaves, &q_z, base)?;
            run.emit(serde_json::json!({ "stealth_delta": delta, "base": base }), a.common.out.as_deref())?;
        }
        IdcodeCommand::Lemma1(a) => {
            let mut run = Run::start("idcode lemma1", &a, a.common.seed);
            let code = load_code(&mut run, &a.code)?;
            run.input(&a.channel);
            let legit = load_channel(&a.channel)?;
            let base = LogBase::from(a.common.base);
            let metrics = evaluate_id_code_in(&code, &legit, base)?;
            let params = Lemma1Params::new(metrics.lambda1, metrics.lambda2, a.eta)?;
            let mutinf = lemma1_mutinf_bound(&code, &legit, &params, base)?;
            let outputs = legit.output_size().checked_pow(code.n() as u32).unwrap_or(usize::MAX);
            let dalpha = if outputs <= MAX_DALPHA_OUTPUTS {
                Some(lemma1_dalpha_bound(&code, &legit, &params, a.q_grid, base)?)
            } else {
                eprintln!("note: |Y|^n = {outputs} exceeds {MAX_DALPHA_OUTPUTS}; skipping the D_alpha form");
                None
            };
            run.emit(
                serde_json::json!({
                    "metrics": metrics,
                    "params": params,
                    "mutinf": mutinf,
                    "dalpha": dalpha,
                }),
                a.common.out.as_deref(),
            )?;
        }
        IdcodeCommand::Generate(a) => {
            let mut run = Run::start("idcode generate", &a, a.common.seed);
            let w = match &a.channel {
                Some(path) => {
                    run.input(path);
                    load_wiretap(path)?
                }
                None => {
                    let legit = bsc(0.1)?;
                    let blind = Channel::constant(legit.input().clone(), &Distribution::uniform(Alphabet::binary()));
                    WiretapChannel::new(legit, blind)?
                }
            };
            let q_z = match &a.qz {
                Some(text) => distribution_on(w.eaves().output(), text)?,
                None => push_forward(&Distribution::uniform(w.input().clone()), w.eaves())?,
            };
            let code = build_toy_esid_code(&w, &q_z, a.m, a.n, a.common.seed)?;
            // The code file itself is the artifact; its manifest goes to stderr.
            let mut text = serde_json::to_string_pretty(&code).map_err(Error::from)?;
            text.push('\n');
            write_output(a.common.out.as_deref(), text.as_bytes())?;
            eprintln!("{}", serde_json::to_string(&run.manifest()).map_err(Error::from)?);
        }
    }
    Ok(())
}

#[derive(Args, Serialize)]
pub struct CheckArgs {
    /// One of all, measures, bounds, stealth-chain.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Random instances per property.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[command(flatten)]
    common: Common,
}

pub fn check(a: CheckArgs) -> Outcome {
    let run = Run::start("check", &a, a.common.seed);
    let suite: Suite = a.suite.parse()?;
    let report = run_checks_with(suite, a.count, a.common.seed, &optimizer(&a.common, None))?;
    for p in &report.properties {
        let verdict = match (p.ok(), p.enforced) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "fail (informational)",
        };
        eprintln!("{:<40} {:>5}/{:<5} {verdict}", p.name, p.passed, p.passed + p.failed);
    }
    let passed = report.passed;
    run.emit(report, a.common.out.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Numerical("property suite failed".into()))
    }
}
