//! Greedy cut selection with a parallelism filter.

use serde::Serialize;

use crate::error::Result;
use crate::milp::{Cut, VarType};
use crate::scoring::{parallelism, scip_score, ScoringWeights, SelectionContext};

pub const DEFAULT_PARALLEL_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Forced cuts first, then picks in selection order.
    pub selected: Vec<Cut>,
    /// Number of picks made from the pool.
    pub n_selected: usize,
}

/// Picks up to `max_cuts` cuts from `cuts`.
///
/// Pool cuts at parallelism `>= parallel_threshold` to any forced cut are
/// dropped first. Each round then takes the best-scoring survivor (lowest
/// index on ties) and drops survivors too parallel to it. Scores are computed
/// once, against the single context.
#[allow(clippy::too_many_arguments)]
pub fn select_cuts(
    cuts: &[Cut],
    forced: &[Cut],
    max_cuts: usize,
    w: &ScoringWeights,
    ctx: &SelectionContext,
    vtypes: &[VarType],
    parallel_threshold: f64,
) -> Result<SelectionResult> {
    select_impl(cuts, forced, max_cuts, w, ctx, vtypes, parallel_threshold, false)
}

/// [`select_cuts`] followed by a refill pass: while fewer than `max_cuts`
/// picks were made, the best-scoring cuts removed by the parallelism filter
/// are appended in score order.
#[allow(clippy::too_many_arguments)]
pub fn select_cuts_refill(
    cuts: &[Cut],
    forced: &[Cut],
    max_cuts: usize,
    w: &ScoringWeights,
    ctx: &SelectionContext,
    vtypes: &[VarType],
    parallel_threshold: f64,
) -> Result<SelectionResult> {
    select_impl(cuts, forced, max_cuts, w, ctx, vtypes, parallel_threshold, true)
}

#[allow(clippy::too_many_arguments)]
fn select_impl(
    cuts: &[Cut],
    forced: &[Cut],
    max_cuts: usize,
    w: &ScoringWeights,
    ctx: &SelectionContext,
    vtypes: &[VarType],
    parallel_threshold: f64,
    refill: bool,
) -> Result<SelectionResult> {
    let scores = cuts
        .iter()
        .map(|c| scip_score(w, c, ctx, vtypes))
        .collect::<Result<Vec<f64>>>()?;
    let mut alive = vec![true; cuts.len()];
    for f in forced {
        for (i, c) in cuts.iter().enumerate() {
            if alive[i] && parallelism(c, f)? >= parallel_threshold {
                alive[i] = false;
            }
        }
    }

    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < max_cuts {
        let mut best: Option<usize> = None;
        for i in (0..cuts.len()).filter(|&i| alive[i]) {
            if best.map_or(true, |b| scores[i] > scores[b]) {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        picked.push(b);
        alive[b] = false;
        for i in 0..cuts.len() {
            if alive[i] && parallelism(&cuts[i], &cuts[b])? >= parallel_threshold {
                alive[i] = false;
            }
        }
    }

    if refill && picked.len() < max_cuts {
        let mut rest: Vec<usize> = (0..cuts.len()).filter(|i| !picked.contains(i)).collect();
        // stable sort keeps index order among equal scores
        rest.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
        picked.extend(rest.into_iter().take(max_cuts - picked.len()));
    }

    let mut selected = forced.to_vec();
    selected.extend(picked.iter().map(|&i| cuts[i].clone()));
    Ok(SelectionResult { selected, n_selected: picked.len() })
}
