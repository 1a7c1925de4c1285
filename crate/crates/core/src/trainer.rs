//! Single-step cut-selection MDP, batch REINFORCE with Adam, and the
//! exhaustive grid-search baseline.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::brute_force_optimum;
use crate::error::{Error, Result};
use crate::family::{simulate_pure_cutting, FamilyParams, GoodCutInterval, SimStatus};
use crate::gomory::gomory_cuts;
use crate::graph::{encode, BipartiteGraph};
use crate::milp::{MilpInstance, Point};
use crate::numfmt::fmt_f64;
use crate::policy::{self, gamma_schedule, GaussianAction, PolicyParams, ACTION_DIM};
use crate::rng;
use crate::scoring::{ScoringWeights, SelectionContext};
use crate::selector::{select_cuts, select_cuts_refill, DEFAULT_PARALLEL_THRESHOLD};
use crate::simplex::{solve_lp, LpStatus, RelaxedModel};

/// Integer assignments the brute-force reference may visit.
pub const REFERENCE_LIMIT: usize = 200_000;
const GAP_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutConfig {
    pub n_rounds: usize,
    pub cuts_per_round: usize,
    pub parallel_threshold: f64,
    pub baseline_weights: ScoringWeights,
    pub incumbent: Option<Point>,
    /// Clamp negative action components to zero before scoring.
    pub clamp_actions: bool,
    /// Re-add parallelism-filtered cuts up to the per-round limit.
    pub refill: bool,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig {
            n_rounds: 50,
            cuts_per_round: 10,
            parallel_threshold: DEFAULT_PARALLEL_THRESHOLD,
            baseline_weights: ScoringWeights::equal(),
            incumbent: None,
            clamp_actions: false,
            refill: false,
        }
    }
}

impl RolloutConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds < 1 || self.cuts_per_round < 1 {
            return Err(Error::OutOfRange("n_rounds and cuts_per_round must be >= 1".into()));
        }
        if !(self.parallel_threshold > 0.0 && self.parallel_threshold <= 1.0) {
            return Err(Error::OutOfRange(format!(
                "parallel_threshold {} not in (0, 1]",
                self.parallel_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutResult {
    pub gap: f64,
    pub bound: f64,
    pub rounds: usize,
    pub cuts_added: usize,
}

/// One instance plus the primal reference its gaps are measured against.
#[derive(Debug, Clone)]
pub struct RolloutEnv {
    inst: MilpInstance,
    cfg: RolloutConfig,
    reference: f64,
    incumbent: Point,
}

impl RolloutEnv {
    /// Uses `cfg.incumbent` as the primal reference, or computes the exact
    /// optimum by enumeration when none is given.
    pub fn new(inst: MilpInstance, cfg: RolloutConfig) -> Result<Self> {
        cfg.validate()?;
        let (reference, incumbent) = match &cfg.incumbent {
            Some(p) => (crate::milp::objective_value(&inst, p)?, p.clone()),
            None => brute_force_optimum(&inst, REFERENCE_LIMIT)?
                .ok_or_else(|| Error::InvalidInstance(format!("{} is infeasible", inst.name())))?,
        };
        Ok(RolloutEnv { inst, cfg, reference, incumbent })
    }

    pub fn instance(&self) -> &MilpInstance {
        &self.inst
    }

    pub fn config(&self) -> &RolloutConfig {
        &self.cfg
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    pub fn gap_of(&self, bound: f64) -> f64 {
        (self.reference - bound) / self.reference.abs().max(GAP_GUARD)
    }

    /// Gap of the plain LP relaxation.
    pub fn root_gap(&self) -> Result<f64> {
        let sol = solve_lp(&RelaxedModel::new(self.inst.clone()));
        if sol.status != LpStatus::Optimal {
            return Err(Error::LpFailure(format!("root LP {:?}", sol.status)));
        }
        Ok(self.gap_of(sol.objective))
    }

    pub fn run(&self, weights: &ScoringWeights) -> Result<RolloutResult> {
        let w = match (*weights, self.cfg.clamp_actions) {
            (ScoringWeights::Scip { l, normalized }, true) => {
                ScoringWeights::Scip { l: l.map(|v| v.max(0.0)), normalized }
            }
            (w, _) => w,
        };
        let mut model = RelaxedModel::new(self.inst.clone());
        let mut rounds = 0;
        let mut added = 0;
        let mut sol = solve_lp(&model);
        for _ in 0..self.cfg.n_rounds {
            check_status(&sol, added)?;
            let cuts = gomory_cuts(&model, &sol)?;
            if cuts.is_empty() {
                break;
            }
            let inc = (self.incumbent.max_dist(&sol.x) > 1e-12).then(|| self.incumbent.clone());
            let ctx = SelectionContext::new(self.inst.objective().to_vec(), sol.x.clone(), inc)?;
            let pick = if self.cfg.refill { select_cuts_refill } else { select_cuts };
            let res = pick(
                &cuts,
                &[],
                self.cfg.cuts_per_round,
                &w,
                &ctx,
                self.inst.vtypes(),
                self.cfg.parallel_threshold,
            )?;
            for c in res.selected {
                model.push_cut(c)?;
                added += 1;
            }
            rounds += 1;
            sol = solve_lp(&model);
        }
        check_status(&sol, added)?;
        Ok(RolloutResult { gap: self.gap_of(sol.objective), bound: sol.objective, rounds, cuts_added: added })
    }
}

fn check_status(sol: &crate::simplex::LpSolution, added: usize) -> Result<()> {
    match sol.status {
        LpStatus::Optimal => Ok(()),
        LpStatus::Infeasible if added > 0 => {
            Err(Error::InvalidCutApplied(format!("LP infeasible after {added} cuts")))
        }
        s => Err(Error::LpFailure(format!("{s:?}"))),
    }
}

/// Final gap of a rollout with the given weights.
pub fn rollout(inst: &MilpInstance, weights: &ScoringWeights, cfg: &RolloutConfig) -> Result<f64> {
    Ok(RolloutEnv::new(inst.clone(), cfg.clone())?.run(weights)?.gap)
}

/// `(baseline - gap) / (|baseline| + 1e-8)`.
pub fn relative_improvement(baseline_gap: f64, gap: f64) -> f64 {
    (baseline_gap - gap) / (baseline_gap.abs() + GAP_GUARD)
}

/// Reward of `action` relative to the baseline weights of `cfg`.
pub fn reward(inst: &MilpInstance, action: &[f64; ACTION_DIM], cfg: &RolloutConfig) -> Result<f64> {
    CutSelectionEnv::new(inst.clone(), cfg.clone())?.reward(action)
}

/// A single-step task the policy can be trained on.
pub trait Environment: Sync {
    fn graph(&self) -> &BipartiteGraph;
    fn reward(&self, action: &[f64; ACTION_DIM]) -> Result<f64>;
}

/// Cut-selection task: the action weights the four scoring measures, the
/// reward is the relative gap improvement over the baseline weights.
#[derive(Debug, Clone)]
pub struct CutSelectionEnv {
    env: RolloutEnv,
    graph: BipartiteGraph,
    baseline_gap: f64,
}

impl CutSelectionEnv {
    pub fn new(inst: MilpInstance, cfg: RolloutConfig) -> Result<Self> {
        let graph = encode(&inst);
        let env = RolloutEnv::new(inst, cfg)?;
        let baseline_gap = env.run(&env.cfg.baseline_weights)?.gap;
        Ok(CutSelectionEnv { env, graph, baseline_gap })
    }

    pub fn baseline_gap(&self) -> f64 {
        self.baseline_gap
    }

    pub fn rollout_env(&self) -> &RolloutEnv {
        &self.env
    }

    pub fn gap(&self, action: &[f64; ACTION_DIM]) -> Result<f64> {
        Ok(self.env.run(&ScoringWeights::raw(*action)?)?.gap)
    }
}

impl Environment for CutSelectionEnv {
    fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    fn reward(&self, action: &[f64; ACTION_DIM]) -> Result<f64> {
        Ok(relative_improvement(self.baseline_gap, self.gap(action)?))
    }
}

/// The `λ` a four-weight action induces on the simple rule:
/// `a3 / (a3 + a4)`, when that lies in `[0, 1]`.
pub fn lambda_projection(a: &[f64; ACTION_DIM]) -> Option<f64> {
    let s = a[2] + a[3];
    if !(s > 0.0) {
        return None;
    }
    let l = a[2] / s;
    (0.0..=1.0).contains(&l).then_some(l)
}

/// Adversarial family task: `+1` when the projected `λ` solves the instance
/// with the good cut, `-1` otherwise.
#[derive(Debug, Clone)]
pub struct AdversarialFamilyEnv {
    params: FamilyParams,
    interval: GoodCutInterval,
    graph: BipartiteGraph,
    max_rounds: usize,
}

impl AdversarialFamilyEnv {
    pub fn new(interval: GoodCutInterval, max_rounds: usize) -> Self {
        let params = interval.params();
        let graph = encode(&crate::family::make_instance(params));
        AdversarialFamilyEnv { params, interval, graph, max_rounds }
    }

    pub fn interval(&self) -> &GoodCutInterval {
        &self.interval
    }

    /// Share of `draws` samples around `mu` (variance `gamma`) whose
    /// projection falls inside the certified interval.
    pub fn hit_rate(&self, mu: [f64; ACTION_DIM], gamma: f64, draws: usize, seed: u64) -> Result<f64> {
        let mut r = rng::seeded(seed);
        let mut hits = 0;
        for _ in 0..draws {
            let a = policy::sample_action_with(mu, gamma, &mut r)?;
            if lambda_projection(&a.sample).is_some_and(|l| self.interval.contains(l)) {
                hits += 1;
            }
        }
        Ok(hits as f64 / draws as f64)
    }
}

impl Environment for AdversarialFamilyEnv {
    fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    fn reward(&self, action: &[f64; ACTION_DIM]) -> Result<f64> {
        let Some(l) = lambda_projection(action) else { return Ok(-1.0) };
        let out = simulate_pure_cutting(self.params, l, self.max_rounds)?;
        Ok(if matches!(out.status, SimStatus::SolvedByGc(_)) { 1.0 } else { -1.0 })
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

pub const DEFAULT_LR: f64 = 5e-4;

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; n], v: vec![0.0; n] }
    }

    /// One descent step on `theta` along the loss gradient `grad`.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for k in 0..theta.len() {
            let g = grad[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let mh = self.m[k] / bc1;
            let vh = self.v[k] / bc2;
            theta[k] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub instance: usize,
    pub action: [f64; ACTION_DIM],
    pub reward: f64,
    pub logprob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchStats {
    pub mean_reward: f64,
    pub mean_logprob: f64,
    pub samples: Vec<TrajectorySample>,
}

/// Loss gradient `-(1/N) Σ r ∇log π(a)` over `n_samples` draws per
/// environment, without updating anything. Samples for environment `e` come
/// from the stream `derive(seed, [e])`. With `center`, each environment's
/// rewards are shifted by their sample mean first.
pub fn reinforce_gradient<E: Environment>(
    theta: &PolicyParams,
    envs: &[E],
    n_samples: usize,
    gamma: f64,
    seed: u64,
    center: bool,
) -> Result<(Vec<f64>, BatchStats)> {
    if envs.is_empty() {
        return Err(Error::Empty("reinforce batch has no instances".into()));
    }
    if n_samples < 1 {
        return Err(Error::OutOfRange("n_samples must be >= 1".into()));
    }
    let mut actions: Vec<(usize, GaussianAction)> = Vec::with_capacity(envs.len() * n_samples);
    let mut mus = Vec::with_capacity(envs.len());
    for (e, env) in envs.iter().enumerate() {
        let mu = policy::forward(env.graph(), theta)?;
        mus.push(mu);
        let mut r = rng::seeded(rng::derive(seed, &[e as u64]));
        for _ in 0..n_samples {
            actions.push((e, policy::sample_action_with(mu, gamma, &mut r)?));
        }
    }
    // rewards are independent; collect keeps the input order
    let rewards = actions
        .par_iter()
        .map(|(e, a)| envs[*e].reward(&a.sample))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(bad) = rewards.iter().find(|r| !r.is_finite()) {
        return Err(Error::SimulationInvariant(format!("non-finite reward {bad}")));
    }

    let total = actions.len() as f64;
    let mut grad = vec![0.0; theta.len()];
    for (e, env) in envs.iter().enumerate() {
        // Σ_s r_s (a_s - mu)/γ, pushed through one backward pass
        let shift = if center {
            rewards[e * n_samples..(e + 1) * n_samples].iter().sum::<f64>() / n_samples as f64
        } else {
            0.0
        };
        let mut dmu = [0.0; ACTION_DIM];
        for ((ei, a), r) in actions.iter().zip(&rewards) {
            if *ei == e {
                let r = r - shift;
                for k in 0..ACTION_DIM {
                    dmu[k] += -r * (a.sample[k] - mus[e][k]) / gamma / total;
                }
            }
        }
        let g = policy::grad_mu(env.graph(), theta, &dmu)?;
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v;
        }
    }
    let samples: Vec<TrajectorySample> = actions
        .iter()
        .zip(&rewards)
        .map(|((e, a), r)| TrajectorySample { instance: *e, action: a.sample, reward: *r, logprob: a.logprob })
        .collect();
    let stats = BatchStats {
        mean_reward: rewards.iter().sum::<f64>() / total,
        mean_logprob: samples.iter().map(|s| s.logprob).sum::<f64>() / total,
        samples,
    };
    Ok((grad, stats))
}

/// One REINFORCE update: gradient over the batch, then one Adam step.
pub fn reinforce_batch<E: Environment>(
    theta: &mut PolicyParams,
    adam: &mut Adam,
    envs: &[E],
    n_samples: usize,
    gamma: f64,
    seed: u64,
    center: bool,
) -> Result<BatchStats> {
    let (grad, stats) = reinforce_gradient(theta, envs, n_samples, gamma, seed, center)?;
    adam.step(theta.as_mut_slice(), &grad);
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_reward: f64,
    pub mean_logprob: f64,
    pub gamma: f64,
    pub wallclock_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub n_samples: usize,
    pub lr: f64,
    pub seed: u64,
    /// Subtract the per-instance mean reward of each batch.
    pub center_rewards: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 500, n_samples: 20, lr: DEFAULT_LR, seed: 0, center_rewards: false }
    }
}

/// Runs `cfg.epochs` REINFORCE updates with the decaying exploration
/// schedule. Epoch `i` samples from `derive(cfg.seed, [i])`.
pub fn train<E: Environment>(
    theta: &mut PolicyParams,
    envs: &[E],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<Vec<EpochLog>> {
    let mut adam = Adam::new(theta.len(), cfg.lr);
    let start = Instant::now();
    let mut logs = Vec::with_capacity(cfg.epochs);
    for i in 0..cfg.epochs {
        let gamma = gamma_schedule(i, cfg.epochs)?;
        let stats = reinforce_batch(
            theta,
            &mut adam,
            envs,
            cfg.n_samples,
            gamma,
            rng::derive(cfg.seed, &[i as u64]),
            cfg.center_rewards,
        )?;
        let log = EpochLog {
            epoch: i,
            mean_reward: stats.mean_reward,
            mean_logprob: stats.mean_logprob,
            gamma,
            wallclock_ms: start.elapsed().as_millis(),
        };
        on_epoch(&log);
        logs.push(log);
    }
    Ok(logs)
}

pub fn write_train_log_csv(path: impl AsRef<Path>, logs: &[EpochLog]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "mean_reward", "mean_logprob", "gamma", "wallclock_ms"])?;
    for l in logs {
        w.write_record([
            l.epoch.to_string(),
            fmt_f64(l.mean_reward),
            fmt_f64(l.mean_logprob),
            fmt_f64(l.gamma),
            l.wallclock_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// All `β ∈ N⁴` with `Σβ = resolution`, in lexicographic order.
pub fn compositions(resolution: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..=resolution {
        for b in 0..=resolution - a {
            for c in 0..=resolution - a - b {
                out.push([a, b, c, resolution - a - b - c]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub weights: [f64; 4],
    pub gap: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub best_weights: [f64; 4],
    pub best_gap: f64,
    pub baseline_gap: f64,
    pub best_improvement: f64,
    pub table: Vec<GridRow>,
}

/// Rolls out every grid point `β/resolution`; the smallest gap wins, the
/// lexicographically first `β` on ties.
pub fn grid_search(env: &RolloutEnv, resolution: usize) -> Result<GridResult> {
    if resolution < 1 {
        return Err(Error::OutOfRange("resolution must be >= 1".into()));
    }
    let baseline_gap = env.run(&env.cfg.baseline_weights)?.gap;
    let grid = compositions(resolution);
    let gaps = grid
        .par_iter()
        .map(|beta| {
            let w = beta.map(|b| b as f64 / resolution as f64);
            Ok((w, env.run(&ScoringWeights::Scip { l: w, normalized: true })?.gap))
        })
        .collect::<Result<Vec<([f64; 4], f64)>>>()?;
    let mut best = 0;
    for (k, g) in gaps.iter().enumerate() {
        if g.1 < gaps[best].1 {
            best = k;
        }
    }
    let table = gaps
        .iter()
        .map(|&(weights, gap)| GridRow { weights, gap, improvement: relative_improvement(baseline_gap, gap) })
        .collect::<Vec<_>>();
    Ok(GridResult {
        best_weights: gaps[best].0,
        best_gap: gaps[best].1,
        baseline_gap,
        best_improvement: relative_improvement(baseline_gap, gaps[best].1),
        table,
    })
}

pub fn write_grid_csv(path: impl AsRef<Path>, rows: &[GridRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["l1", "l2", "l3", "l4", "gap", "improvement"])?;
    for r in rows {
        let mut rec: Vec<String> = r.weights.iter().map(|&v| fmt_f64(v)).collect();
        rec.push(fmt_f64(r.gap));
        rec.push(fmt_f64(r.improvement));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
