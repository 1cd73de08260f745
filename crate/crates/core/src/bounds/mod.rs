//! Capacity bounds as constrained mutual-information maximizations over the
//! stealth polytope `{P_X : P_X W_{Z|X} = Q_Z}`.
//!
//! Every optimizer here is a multi-start local method. Lower bounds are
//! therefore valid witnesses (each reported value is attained by the
//! reported argmax), while the max-form upper bound of [`upper_bound_thm1`]
//! may be under-estimated. Values are computed in nats and converted to the
//! requested base on output.

mod capacity;
mod engine;

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::measures::{kl_nats, LogBase};
use crate::prob::{push_forward_raw, Alphabet, Channel, Distribution, JointDistribution, WiretapChannel};
use crate::simplex::min_affine_residual;

pub use capacity::{blahut_arimoto, CapacityResult};
use engine::{best_feasible, least_violating, Affine, Candidate, Problem, Stealth, Term, Which};

/// Gap tolerance (nats) separating positive from zero capacity.
pub const ZERO_CAPACITY_TOL: f64 = 1e-6;
/// Largest stealth residual accepted for a reported argmax.
pub const STEALTH_TOL: f64 = engine::FEASIBLE_RESIDUAL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StealthMode {
    /// `P_X W_{Z|X} = Q_Z`.
    Exact,
    /// `D(P_X W_{Z|X} || Q_Z) <= slack` (nats).
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StealthConstraint {
    q_z: Distribution,
    mode: StealthMode,
    slack: f64,
}

impl StealthConstraint {
    pub fn exact(q_z: Distribution) -> Self {
        Self {
            q_z,
            mode: StealthMode::Exact,
            slack: 0.0,
        }
    }

    pub fn relaxed(q_z: Distribution, slack: f64) -> Result<Self> {
        if !(slack > 0.0 && slack.is_finite()) {
            return Err(Error::OutOfRange {
                name: "slack",
                value: slack,
                range: "(0, inf)",
            });
        }
        Ok(Self {
            q_z,
            mode: StealthMode::Relaxed,
            slack,
        })
    }

    pub fn q_z(&self) -> &Distribution {
        &self.q_z
    }

    pub fn mode(&self) -> StealthMode {
        self.mode
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    fn engine(&self) -> Stealth {
        match self.mode {
            StealthMode::Exact => Stealth::Exact(self.q_z.mass().to_vec()),
            StealthMode::Relaxed => Stealth::Relaxed {
                q_z: self.q_z.mass().to_vec(),
                slack: self.slack,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Inner iterations per augmented-Lagrangian round.
    pub max_iters: usize,
    pub step_init: f64,
    pub tol: f64,
    pub seed: u64,
    /// Auxiliary alphabet size; `None` means `|X| + 2`.
    pub u_size: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 2000,
            step_init: 0.1,
            tol: 1e-9,
            seed: 0,
            u_size: None,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, inf)",
                })
            }
        };
        positive("step_init", self.step_init)?;
        positive("tol", self.tol)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        if self.u_size == Some(0) {
            return Err(Error::InvalidInput("u_size must be positive".into()));
        }
        Ok(())
    }

    fn u_size_for(&self, inputs: usize) -> usize {
        self.u_size.unwrap_or(inputs + 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Prop1,
    Cor1,
    Thm1,
    Est,
    SecretId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Ok,
    Infeasible,
    ZeroCapacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Argmax {
    Input(Distribution),
    Joint(JointDistribution),
}

impl Argmax {
    /// The input law `P_X` of the argmax.
    pub fn input_law(&self) -> Distribution {
        match self {
            Argmax::Input(p) => p.clone(),
            Argmax::Joint(j) => j.marginal(crate::prob::Side::Right),
        }
    }
}

/// Outcome of one bound evaluation. For statuses other than `ok`, `value`
/// is zero and `argmax` is the least-violating point found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub bound: BoundKind,
    pub value: f64,
    pub base: LogBase,
    pub argmax: Argmax,
    pub stealth_residual: f64,
    pub secrecy_gap: f64,
    pub status: BoundStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroCapacity {
    Zero,
    Positive,
    Inconclusive,
}

fn check_constraint(w: &WiretapChannel, c: &StealthConstraint) -> Result<()> {
    if c.q_z.alphabet() != w.eaves().output() {
        return Err(mismatch("Q_Z is not a law on the eavesdropper output alphabet"));
    }
    Ok(())
}

/// Defect of `P_X` with respect to the stealth constraint: max-abs entry of
/// `P_X W_Z - Q_Z` (exact) or `max(0, D(P_X W_Z || Q_Z) - slack)` in nats
/// (relaxed).
pub fn stealth_polytope_membership(p_x: &Distribution, w_z: &Channel, c: &StealthConstraint) -> Result<f64> {
    if p_x.alphabet() != w_z.input() || c.q_z.alphabet() != w_z.output() {
        return Err(mismatch("stealth membership needs P_X on the input and Q_Z on the output"));
    }
    let pz = push_forward_raw(p_x.mass(), w_z);
    Ok(match c.mode {
        StealthMode::Exact => pz
            .iter()
            .zip(c.q_z.mass())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        StealthMode::Relaxed => match kl_nats(&pz, c.q_z.mass()) {
            Some(d) => (d - c.slack).max(0.0),
            None => f64::INFINITY,
        },
    })
}

/// Smallest achievable stealth defect over all input laws, with a minimizer.
fn stealth_emptiness(w: &WiretapChannel, c: Option<&StealthConstraint>) -> Result<(f64, Vec<f64>)> {
    let eaves = w.eaves();
    let nx = eaves.input_size();
    match c {
        None => Ok((0.0, vec![1.0 / nx as f64; nx])),
        Some(c) if c.mode == StealthMode::Exact => {
            let rows: Vec<&[f64]> = eaves.rows().collect();
            min_affine_residual(&rows, c.q_z.mass())
        }
        Some(c) => {
            // Convex: minimize D(P W_Z || Q_Z) by a single-row run of the engine.
            let problem = Problem {
                legit: w.legit(),
                eaves,
                k: 1,
                stealth: c.engine(),
                objective: Affine::of(vec![(-1.0, Term::KlZ)]),
                constraints: vec![],
                gap: Affine::of(vec![]),
                restore: false,
            };
            let poly = problem.polytope();
            let cfg = OptimizerConfig::default();
            let start = vec![1.0 / nx as f64; nx];
            // The engine's own constraint KL <= slack only reinforces the
            // objective here.
            let end = problem.ascend(start, &poly, &cfg);
            Ok((problem.stealth_residual(&end, &poly), end))
        }
    }
}

struct Outcome {
    best: Option<Candidate>,
    fallback: Candidate,
    k: usize,
}

fn embed_identity(p: &[f64], k: usize) -> Vec<f64> {
    let nx = p.len();
    let mut j = vec![0.0; k * nx];
    for (x, &v) in p.iter().enumerate() {
        j[x * nx + x] = v;
    }
    j
}

fn embed_constant(p: &[f64], k: usize) -> Vec<f64> {
    let mut j = vec![0.0; k * p.len()];
    j[..p.len()].copy_from_slice(p);
    j
}

fn empty_outcome(problem: &Problem<'_>, residual: f64, point: &[f64]) -> Outcome {
    let joint = embed_constant(point, problem.k);
    let poly = problem.polytope();
    let mut fallback = problem.candidate(joint, &poly);
    fallback.stealth_residual = fallback.stealth_residual.max(residual);
    Outcome {
        best: None,
        fallback,
        k: problem.k,
    }
}

fn run(problem: &Problem<'_>, cfg: &OptimizerConfig, warm: &[Vec<f64>], emptiness: &(f64, Vec<f64>)) -> Outcome {
    if emptiness.0 > STEALTH_TOL {
        return empty_outcome(problem, emptiness.0, &emptiness.1);
    }
    let mut warm = warm.to_vec();
    // The minimizer of the stealth defect is a feasible point of the slice.
    warm.push(embed_constant(&emptiness.1, problem.k));
    let cands = problem.search(cfg, &warm);
    Outcome {
        best: best_feasible(&cands).cloned(),
        fallback: least_violating(&cands).cloned().expect("at least one candidate"),
        k: problem.k,
    }
}

fn finish(
    kind: BoundKind,
    outcome: Outcome,
    w: &WiretapChannel,
    base: LogBase,
    ok: BoundStatus,
    failed: BoundStatus,
) -> Result<BoundResult> {
    let (cand, status) = match outcome.best {
        Some(c) => (c, ok),
        None => (outcome.fallback, failed),
    };
    // Exact-mode iterates carry the mass of `Q_Z`, which may be off by the
    // stealth residual; the residual itself is reported separately.
    let total: f64 = cand.joint.iter().sum();
    let joint: Vec<f64> = cand.joint.iter().map(|v| v / total).collect();
    let argmax = if kind == BoundKind::Prop1 {
        Argmax::Input(Distribution::from_computed(w.input().clone(), joint)?)
    } else {
        Argmax::Joint(JointDistribution::from_flat(
            Alphabet::indexed(outcome.k),
            w.input().clone(),
            joint,
        )?)
    };
    let value = if status == BoundStatus::Infeasible { 0.0 } else { cand.value.max(0.0) };
    let value = if status == BoundStatus::ZeroCapacity && cand.stealth_residual > STEALTH_TOL {
        0.0
    } else {
        value
    };
    Ok(BoundResult {
        bound: kind,
        value: base.from_nats(value),
        base,
        argmax,
        stealth_residual: cand.stealth_residual,
        secrecy_gap: base.from_nats(cand.gap),
        status,
    })
}

fn prop1_problem<'a>(w: &'a WiretapChannel, stealth: Stealth) -> Problem<'a> {
    Problem {
        legit: w.legit(),
        eaves: w.eaves(),
        k: 1,
        stealth,
        objective: Affine::of(vec![(1.0, Term::MiX(Which::Legit))]),
        constraints: vec![Affine::x_gap()],
        gap: Affine::x_gap(),
        restore: false,
    }
}

fn prop1_outcome(w: &WiretapChannel, c: Option<&StealthConstraint>, cfg: &OptimizerConfig) -> Result<Outcome> {
    cfg.validate()?;
    let emptiness = stealth_emptiness(w, c)?;
    let problem = prop1_problem(w, c.map_or(Stealth::None, StealthConstraint::engine));
    Ok(run(&problem, cfg, &[], &emptiness))
}

/// `max I(X;Y)` over stealthy `P_X` with `I(X;Y) >= I(X;Z)`.
pub fn lower_bound_prop1(
    w: &WiretapChannel,
    c: &StealthConstraint,
    cfg: &OptimizerConfig,
    base: LogBase,
) -> Result<BoundResult> {
    check_constraint(w, c)?;
    let outcome = prop1_outcome(w, Some(c), cfg)?;
    finish(BoundKind::Prop1, outcome, w, base, BoundStatus::Ok, BoundStatus::Infeasible)
}

fn cor1_outcome(w: &WiretapChannel, c: Option<&StealthConstraint>, cfg: &OptimizerConfig) -> Result<Outcome> {
    cfg.validate()?;
    let nx = w.input().size();
    let k = cfg.u_size_for(nx);
    let emptiness = stealth_emptiness(w, c)?;
    let stealth = c.map_or(Stealth::None, StealthConstraint::engine);
    let mut warm = Vec::new();
    if k >= nx && emptiness.0 <= STEALTH_TOL {
        // U = X recovers the single-letter bound.
        let p1 = run(&prop1_problem(w, stealth.clone()), cfg, &[], &emptiness);
        if let Some(b) = p1.best {
            warm.push(embed_identity(&b.joint, k));
        }
    }
    let problem = Problem {
        legit: w.legit(),
        eaves: w.eaves(),
        k,
        stealth,
        objective: Affine::of(vec![(1.0, Term::MiU(Which::Legit))]),
        constraints: vec![Affine::u_gap()],
        gap: Affine::u_gap(),
        restore: true,
    };
    Ok(run(&problem, cfg, &warm, &emptiness))
}

/// `max I(U;Y)` over stealthy `P_{UX}` with `I(U;Y) >= I(U;Z)`, `|U| = u_size`.
pub fn lower_bound_cor1(
    w: &WiretapChannel,
    c: &StealthConstraint,
    cfg: &OptimizerConfig,
    base: LogBase,
) -> Result<BoundResult> {
    check_constraint(w, c)?;
    let outcome = cor1_outcome(w, Some(c), cfg)?;
    finish(BoundKind::Cor1, outcome, w, base, BoundStatus::Ok, BoundStatus::Infeasible)
}

fn thm1_outcome(w: &WiretapChannel, c: Option<&StealthConstraint>, cfg: &OptimizerConfig) -> Result<Outcome> {
    cfg.validate()?;
    let nx = w.input().size();
    let k = cfg.u_size_for(nx).min(nx + 2);
    let emptiness = stealth_emptiness(w, c)?;
    let stealth = c.map_or(Stealth::None, StealthConstraint::engine);
    let mut warm = Vec::new();
    if emptiness.0 <= STEALTH_TOL {
        // A constant U meets the secrecy constraint with equality, so the
        // concave single-letter maximum is always admissible.
        let concave = Problem {
            legit: w.legit(),
            eaves: w.eaves(),
            k: 1,
            stealth: stealth.clone(),
            objective: Affine::of(vec![(1.0, Term::MiX(Which::Legit))]),
            constraints: vec![],
            gap: Affine::of(vec![]),
            restore: false,
        };
        let start = embed_constant(&emptiness.1, 1);
        let poly = concave.polytope();
        warm.push(embed_constant(&concave.ascend(start, &poly, cfg), k));
    }
    let problem = Problem {
        legit: w.legit(),
        eaves: w.eaves(),
        k,
        stealth,
        objective: Affine::of(vec![(1.0, Term::MiX(Which::Legit))]),
        constraints: vec![Affine::u_gap()],
        gap: Affine::u_gap(),
        restore: true,
    };
    Ok(run(&problem, cfg, &warm, &emptiness))
}

/// `max I(X;Y)` over stealthy `P_{UX}` with `I(U;Y) >= I(U;Z)` and
/// `|U| <= |X| + 2`.
///
/// This is a max-form upper bound evaluated by a local method: the reported
/// value is a lower estimate of the true maximum. Status is `zero_capacity`
/// when the stealth polytope is empty or the maximum does not exceed
/// [`ZERO_CAPACITY_TOL`].
pub fn upper_bound_thm1(
    w: &WiretapChannel,
    c: &StealthConstraint,
    cfg: &OptimizerConfig,
    base: LogBase,
) -> Result<BoundResult> {
    check_constraint(w, c)?;
    let outcome = thm1_outcome(w, Some(c), cfg)?;
    let zero = outcome.best.as_ref().is_none_or(|b| b.value <= ZERO_CAPACITY_TOL);
    let status = if zero { BoundStatus::ZeroCapacity } else { BoundStatus::Ok };
    finish(BoundKind::Thm1, outcome, w, base, status, BoundStatus::ZeroCapacity)
}

/// The verdict, plus the secrecy witness when it is positive.
fn zero_capacity_inner(
    w: &WiretapChannel,
    c: Option<&StealthConstraint>,
    cfg: &OptimizerConfig,
) -> Result<(ZeroCapacity, Option<Candidate>)> {
    if stealth_emptiness(w, c)?.0 > STEALTH_TOL {
        return Ok((ZeroCapacity::Zero, None));
    }
    let cor1 = cor1_outcome(w, c, cfg)?;
    if let Some(b) = cor1.best.filter(|b| b.value > ZERO_CAPACITY_TOL) {
        return Ok((ZeroCapacity::Positive, Some(b)));
    }
    let thm1 = thm1_outcome(w, c, cfg)?;
    if thm1.best.as_ref().is_none_or(|b| b.value <= ZERO_CAPACITY_TOL) {
        return Ok((ZeroCapacity::Zero, None));
    }
    Ok((ZeroCapacity::Inconclusive, None))
}

/// Decides whether the ESID capacity is zero.
///
/// Zero when the stealth polytope is empty or when the upper bound does not
/// exceed [`ZERO_CAPACITY_TOL`]; positive when a stealthy `P_{UX}` with
/// `I(U;Y) >= I(U;Z)` and `I(U;Y) > ZERO_CAPACITY_TOL` is exhibited.
pub fn zero_capacity_check(w: &WiretapChannel, c: &StealthConstraint, cfg: &OptimizerConfig) -> Result<ZeroCapacity> {
    check_constraint(w, c)?;
    Ok(zero_capacity_inner(w, Some(c), cfg)?.0)
}

/// `max I(U;Y) - I(U;Z)` over stealthy `P_{UX}`.
pub fn est_upper_bound(
    w: &WiretapChannel,
    c: &StealthConstraint,
    cfg: &OptimizerConfig,
    base: LogBase,
) -> Result<BoundResult> {
    check_constraint(w, c)?;
    cfg.validate()?;
    let nx = w.input().size();
    let k = cfg.u_size_for(nx);
    let emptiness = stealth_emptiness(w, Some(c))?;
    let problem = Problem {
        legit: w.legit(),
        eaves: w.eaves(),
        k,
        stealth: c.engine(),
        objective: Affine::u_gap(),
        constraints: vec![],
        gap: Affine::u_gap(),
        restore: false,
    };
    let mut warm = Vec::new();
    if k >= nx {
        warm.push(embed_identity(&emptiness.1, k));
    }
    let outcome = run(&problem, cfg, &warm, &emptiness);
    finish(BoundKind::Est, outcome, w, base, BoundStatus::Ok, BoundStatus::Infeasible)
}

/// Identification capacity under secrecy alone: `max_{P_X} I(X;Y)` when
/// some `U` has `I(U;Y) > 0` and `I(U;Y) >= I(U;Z)`, otherwise zero.
///
/// `secrecy_gap` is that of the positivity witness.
pub fn secret_id_rate(w: &WiretapChannel, cfg: &OptimizerConfig, base: LogBase) -> Result<BoundResult> {
    cfg.validate()?;
    let (verdict, witness) = zero_capacity_inner(w, None, cfg)?;
    let cap = blahut_arimoto(w.legit(), 1e-12, 100_000)?;
    let positive = verdict == ZeroCapacity::Positive;
    Ok(BoundResult {
        bound: BoundKind::SecretId,
        value: if positive { base.from_nats(cap.capacity) } else { 0.0 },
        base,
        argmax: Argmax::Input(cap.input),
        stealth_residual: 0.0,
        secrecy_gap: base.from_nats(witness.map_or(0.0, |c| c.gap)),
        status: if positive { BoundStatus::Ok } else { BoundStatus::ZeroCapacity },
    })
}
