//! The three-variable family `P(a, d)`, its candidate cuts, the closed-form
//! region where the good cut wins, and a one-cut-per-round simulator.
//!
//! ```text
//! min  x1 - (10+d) x2 - a x3
//! s.t. -x2/2 + 3 x3            <= 0
//!      -x3                     <= 0
//!      -x1/2 + x2/2 - 7/2 x3   <= 0
//!       x1/2 + 3/2 x3          <= 1/2
//!      x1 integer, x2 continuous, x3 binary
//! ```

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::milp::{self, ConsType, Cut, MilpInstance, Point, VarType};
use crate::numfmt;
use crate::scoring::simple_score;
use crate::simplex::{solve_optimal, RelaxedModel};

/// Integrality tolerance used to stop the simulator.
pub const INT_TOL: f64 = 1e-6;
/// Cap on ε̂ halvings in [`construct_adversarial`].
pub const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyParams {
    a: f64,
    d: f64,
}

impl FamilyParams {
    pub fn new(a: f64, d: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::OutOfRange(format!("a = {a} must be finite and >= 0")));
        }
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::OutOfRange(format!("d = {d} not in [0, 1]")));
        }
        Ok(FamilyParams { a, d })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn objective(&self) -> Vec<f64> {
        vec![1.0, -(10.0 + self.d), -self.a]
    }
}

pub fn make_instance(p: FamilyParams) -> MilpInstance {
    let triplets = vec![
        (0, 1, -0.5),
        (0, 2, 3.0),
        (1, 2, -1.0),
        (2, 0, -0.5),
        (2, 1, 0.5),
        (2, 2, -3.5),
        (3, 0, 0.5),
        (3, 2, 1.5),
    ];
    MilpInstance::new(
        format!("P(a={},d={})", p.a, p.d),
        p.objective(),
        triplets,
        vec![0.0, 0.0, 0.0, 0.5],
        vec![f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0],
        vec![f64::INFINITY, f64::INFINITY, 1.0],
        vec![VarType::Integer, VarType::Continuous, VarType::Binary],
        vec![ConsType::Linear; 4],
    )
    .expect("P(a,d) is well formed")
}

pub const VAR_TYPES: [VarType; 3] = [VarType::Integer, VarType::Continuous, VarType::Binary];

/// The integer-feasible points of every `P(a, d)`.
pub fn integer_points() -> Vec<Point> {
    vec![[0.0, 0.0, 0.0].into(), [1.0, 0.0, 0.0].into(), [1.0, 1.0, 0.0].into()]
}

/// The fractional root vertex, LP-optimal for every `(a, d)` in range.
pub fn root_vertex() -> Point {
    [-0.5, 3.0, 0.5].into()
}

/// Integer optimum `(1, 1, 0)` has value `-9 - d`.
pub fn integer_optimum(p: FamilyParams) -> f64 {
    -9.0 - p.d
}

/// Cut depth for round `n >= 1`: `0.1·n/(n+1)`. Strictly increasing with
/// supremum 0.1, and consecutive terms stay distinguishable in f64 far past
/// a thousand rounds.
pub fn epsilon(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::OutOfRange("epsilon index starts at 1".into()));
    }
    Ok(0.1 * n as f64 / (n as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CutKind {
    #[serde(rename = "GC")]
    Gc,
    #[serde(rename = "ISC")]
    Isc,
    #[serde(rename = "OPC")]
    Opc,
}

impl CutKind {
    pub const ALL: [CutKind; 3] = [CutKind::Gc, CutKind::Isc, CutKind::Opc];

    pub fn as_str(self) -> &'static str {
        match self {
            CutKind::Gc => "GC",
            CutKind::Isc => "ISC",
            CutKind::Opc => "OPC",
        }
    }
}

pub fn good_cut() -> Cut {
    Cut::new(vec![-10.0, 10.0, 1.0], 0.0).unwrap()
}

pub fn isc(n: usize) -> Result<Cut> {
    Ok(Cut::new(vec![-1.0, 0.0, 1.0], 1.0 - epsilon(n)?).unwrap())
}

pub fn opc(n: usize) -> Result<Cut> {
    Ok(Cut::new(vec![-1.0, 10.0, 0.0], 30.5 - epsilon(n)?).unwrap())
}

/// The objective-parallel cut that replaces OPC right after an ISC round.
pub fn widened_opc(n_prev: usize) -> Result<Cut> {
    Ok(Cut::new(vec![-1.0, 10.0, 0.0], 30.5 - 31.0 * epsilon(n_prev)?).unwrap())
}

/// Candidates for round `n` in the fixed order `[GC, ISC, OPC]`.
pub fn candidate_cuts(n: usize, last_applied: Option<CutKind>) -> Result<[Cut; 3]> {
    let o = match last_applied {
        Some(CutKind::Isc) if n >= 2 => widened_opc(n - 1)?,
        Some(CutKind::Isc) => return Err(Error::OutOfRange("ISC cannot precede round 1".into())),
        _ => opc(n)?,
    };
    Ok([good_cut(), isc(n)?, o])
}

/// `(isp, obp)` of GC, ISC and OPC; independent of the round.
pub fn cut_measures(p: FamilyParams) -> [(f64, f64); 3] {
    let c = p.objective();
    [good_cut(), isc(1).unwrap(), opc(1).unwrap()].map(|k| {
        (
            crate::scoring::isp(&k, &VAR_TYPES).unwrap(),
            crate::scoring::obp(&k, &c).unwrap(),
        )
    })
}

/// Simple-rule scores of `[GC, ISC, OPC]` at `lambda`.
pub fn candidate_scores(p: FamilyParams, lambda: f64) -> Result<[f64; 3]> {
    let c = p.objective();
    let cands = candidate_cuts(1, None)?;
    let mut out = [0.0; 3];
    for (o, k) in out.iter_mut().zip(&cands) {
        *o = simple_score(lambda, k, &c, &VAR_TYPES)?;
    }
    Ok(out)
}

/// Largest `a` for which some `λ` makes GC score at least as high as both
/// alternatives, as a function of `d`.
pub fn max_a(d: f64) -> f64 {
    let (r2, r101, r201) = (2f64.sqrt(), 101f64.sqrt(), 201f64.sqrt());
    let num = -2680.0 * r101 * d + 2020.0 * r201 * d - 6767.0 * r2 - 27068.0 * r101 + 22220.0 * r201;
    let den = 6767.0 * r2 - 202.0 * r201;
    num / den
}

/// Smallest `λ` at which GC beats OPC (closed form, no range checks).
pub fn lambda_lb(a: f64, d: f64) -> f64 {
    let s = 20301f64.sqrt();
    let l1 = s * (a * a + d * (d + 20.0) + 101.0).sqrt();
    let l2 = 101.0 * a * a + a * (-20.0 * (s - 101.0) * d - 202.0 * (s - 110.0));
    let l3 = 20.0 * d * (-10.0 * (s - 151.0) * d - 211.0 * s + 31411.0) - 22220.0 * s + 3272501.0;
    let l4 = -606.0 * a * a + 12.0 * a * (10.0 * (s - 101.0) * d + 101.0 * (s - 110.0));
    let l5 = 120.0 * d * (10.0 * (s - 151.0) * d + 211.0 * s - 31411.0) + 606.0 * (220.0 * s - 32401.0);
    let l6 = 5555.0 * a * a + 24.0 * a * (10.0 * (s - 101.0) * d + 101.0 * (s - 110.0));
    let l7 = d * ((2400.0 * s - 355633.0) * d + 50640.0 * s - 7403300.0) + 505.0 * (528.0 * s - 76409.0);
    2.0 * (l1 * (l2 + l3).max(0.0).sqrt() + l4 + l5) / (l6 + l7)
}

/// Largest `λ` at which GC beats ISC (closed form, no range checks).
pub fn lambda_ub(a: f64, d: f64) -> f64 {
    let t = 402f64.sqrt();
    let u1 = -(a * a + d * (d + 20.0) + 101.0);
    let u2 = (2.0 * t - 203.0) * a * a
        + a * (20.0 * (t - 2.0) * d + 222.0 * t - 842.0)
        + 20.0 * d * (-10.0 * d + t - 220.0)
        + 220.0 * t
        - 24401.0;
    let u3 = (6.0 * t - 609.0) * a * a
        + 6.0 * a * (10.0 * (t - 2.0) * d + 111.0 * t - 421.0)
        + 60.0 * d * (-10.0 * d + t - 220.0)
        + 660.0 * t
        - 73203.0;
    let u4 = (6.0 * t - 475.0) * a * a
        + 6.0 * a * (10.0 * (t - 2.0) * d + 111.0 * t - 421.0)
        + 2.0 * d * (-233.0 * d + 30.0 * t - 5260.0)
        + 660.0 * t
        - 59669.0;
    (t * (u1 * u2).max(0.0).sqrt() + u3) / u4
}

/// `(λ_lb, λ_ub)` for a point of the good region. When rounding leaves
/// `λ_lb` above `λ_ub` by at most 1e-9 (only at `a ≈ max_a(d)`), both
/// collapse to their midpoint.
pub fn region_bounds(a: f64, d: f64) -> Result<(f64, f64)> {
    let p = FamilyParams::new(a, d)?;
    let ma = max_a(d);
    if p.a > ma + 1e-9 {
        return Err(Error::OutsideGoodRegion { a, d, max_a: ma });
    }
    let (mut lb, mut ub) = (lambda_lb(a, d), lambda_ub(a, d));
    if lb > ub {
        if lb - ub > 1e-9 {
            return Err(Error::SimulationInvariant(format!(
                "closed forms disagree at a={a}, d={d}: lb {lb} > ub {ub}"
            )));
        }
        let mid = 0.5 * (lb + ub);
        lb = mid;
        ub = mid;
    }
    Ok((lb.clamp(0.0, 1.0), ub.clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodCutInterval {
    pub lb: f64,
    pub ub: f64,
    pub a: f64,
    pub d: f64,
}

impl GoodCutInterval {
    pub fn width(&self) -> f64 {
        self.ub - self.lb
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lb + self.ub)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lb <= lambda && lambda <= self.ub
    }

    pub fn params(&self) -> FamilyParams {
        FamilyParams { a: self.a, d: self.d }
    }
}

/// Interval at `a = max_a(d) - eps_hat`.
pub fn good_cut_interval(d: f64, eps_hat: f64) -> Result<GoodCutInterval> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::OutOfRange(format!("d = {d} not in [0, 1]")));
    }
    let ma = max_a(d);
    if !(eps_hat > 0.0 && eps_hat <= ma) {
        return Err(Error::OutOfRange(format!("eps_hat = {eps_hat} not in (0, {ma}]")));
    }
    let a = ma - eps_hat;
    let (lb, ub) = region_bounds(a, d)?;
    if ub - lb <= 0.0 {
        return Err(Error::SimulationInvariant(format!(
            "empty interval at d={d}, eps_hat={eps_hat}"
        )));
    }
    Ok(GoodCutInterval { lb, ub, a, d })
}

/// `λ_ub(max_a(d), d)`: the single λ that works at the tip of the region.
pub fn tip_lambda(d: f64) -> f64 {
    lambda_ub(max_a(d), d)
}

/// Range of tip values reachable for `d` in `[0, 1]`.
pub fn achievable_range() -> (f64, f64) {
    let (x, y) = (tip_lambda(0.0), tip_lambda(1.0));
    (x.min(y), x.max(y))
}

/// Solves `tip_lambda(d) = target` on `[0, 1]` by bisection.
pub fn find_d_for_lambda(target: f64) -> Result<f64> {
    let (t0, t1) = (tip_lambda(0.0), tip_lambda(1.0));
    let (lo, hi) = achievable_range();
    if !(target >= lo && target <= hi) {
        return Err(Error::UnreachableLambda { target, lo, hi });
    }
    if target == t0 {
        return Ok(0.0);
    }
    if target == t1 {
        return Ok(1.0);
    }
    let rising = t1 > t0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let below = tip_lambda(m) < target;
        if below == rising {
            a = m;
        } else {
            b = m;
        }
    }
    let d = if (tip_lambda(a) - target).abs() <= (tip_lambda(b) - target).abs() { a } else { b };
    let resid = (tip_lambda(d) - target).abs();
    if resid > 1e-9 {
        return Err(Error::SimulationInvariant(format!("bisection residual {resid}")));
    }
    Ok(d)
}

/// Validated, sorted, deduplicated copy of a λ grid.
pub fn normalize_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::OutOfRange(format!("grid value {bad} not in [0, 1]")));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Instance and interval for which no member of `grid` selects the good cut.
///
/// Targets the midpoint of the widest overlap between a gap of the grid and
/// the achievable range, then shrinks ε̂ until the interval fits in the gap.
pub fn construct_adversarial(grid: &[f64]) -> Result<(FamilyParams, GoodCutInterval)> {
    let g = normalize_grid(grid)?;
    let (lo, hi) = achievable_range();
    let mut edges = Vec::with_capacity(g.len() + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend(&g);
    edges.push(f64::INFINITY);

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for w in edges.windows(2) {
        let (gl, gh) = (w[0], w[1]);
        let (il, ih) = (gl.max(lo), gh.min(hi));
        // the gap is open, so a one-point overlap at a grid value is useless
        let usable = ih > il || (il == ih && il > gl && ih < gh);
        if usable && best.map_or(true, |b| ih - il > b.3 - b.2) {
            best = Some((gl, gh, il, ih));
        }
    }
    let (gl, gh, il, ih) = best.ok_or(Error::NoUsableGap)?;
    let target = 0.5 * (il + ih);
    let d = find_d_for_lambda(target)?;

    let mut eps_hat = 0.5 * max_a(d);
    for _ in 0..MAX_HALVINGS {
        let iv = good_cut_interval(d, eps_hat)?;
        if iv.lb > gl && iv.ub < gh {
            return Ok((iv.params(), iv));
        }
        eps_hat *= 0.5;
    }
    Err(Error::SimulationInvariant(format!(
        "interval did not fit in gap ({gl}, {gh}) after {MAX_HALVINGS} halvings"
    )))
}

/// Parameters just outside the good region: `a = max_a(d) + eps_tilde`.
pub fn construct_unsolvable(d: f64, eps_tilde: f64) -> Result<FamilyParams> {
    if !(eps_tilde > 0.0 && eps_tilde <= 0.1) {
        return Err(Error::OutOfRange(format!("eps_tilde = {eps_tilde} not in (0, 0.1]")));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::OutOfRange(format!("d = {d} not in [0, 1]")));
    }
    FamilyParams::new(max_a(d) + eps_tilde, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimStatus {
    /// The LP became integral right after the good cut of this round.
    SolvedByGc(usize),
    NotSolved,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub status: SimStatus,
    pub rounds_run: usize,
    pub chosen_types: Vec<CutKind>,
    /// Root LP value followed by the value after each applied cut.
    pub lp_objectives: Vec<f64>,
    pub final_x: Point,
}

impl SimOutcome {
    /// Relative gap of the last LP bound to the integer optimum.
    pub fn final_gap(&self, p: FamilyParams) -> f64 {
        let z = integer_optimum(p);
        (z - self.lp_objectives.last().copied().unwrap_or(f64::NAN)) / z.abs().max(1e-8)
    }
}

/// Pure cutting-plane loop choosing one cut per round by the simple score.
///
/// Each round checks that the chosen cut separates the current LP point and
/// is valid for the integer points; a failure is an error, never a result.
pub fn simulate_pure_cutting(p: FamilyParams, lambda: f64, max_rounds: usize) -> Result<SimOutcome> {
    if max_rounds < 1 {
        return Err(Error::OutOfRange("max_rounds must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("lambda {lambda} not in [0, 1]")));
    }
    let inst = make_instance(p);
    let c = p.objective();
    let ints = integer_points();
    let mut model = RelaxedModel::new(inst.clone());
    let mut sol = solve_optimal(&model)?;
    let mut objs = vec![sol.objective];
    let mut chosen = Vec::new();
    let mut last = None;

    for round in 1..=max_rounds {
        if milp::is_integer_feasible(&inst, &sol.x, INT_TOL)? {
            break;
        }
        let cands = candidate_cuts(round, last)?;
        // strict comparison: GC (index 0) keeps ties
        let mut pick = 0;
        let mut best = simple_score(lambda, &cands[0], &c, &VAR_TYPES)?;
        for (k, cut) in cands.iter().enumerate().skip(1) {
            let s = simple_score(lambda, cut, &c, &VAR_TYPES)?;
            if s > best {
                best = s;
                pick = k;
            }
        }
        let kind = CutKind::ALL[pick];
        let cut = cands[pick].clone();
        if cut.violation(&sol.x) <= 0.0 {
            return Err(Error::SimulationInvariant(format!(
                "round {round}: {} does not separate {:?}",
                kind.as_str(),
                &*sol.x
            )));
        }
        if !milp::cut_is_valid_for(&cut, &ints, 1e-9)? {
            return Err(Error::SimulationInvariant(format!(
                "round {round}: {} cuts off an integer point",
                kind.as_str()
            )));
        }
        model.add_or_tighten(cut)?;
        sol = solve_optimal(&model)?;
        objs.push(sol.objective);
        chosen.push(kind);
        last = Some(kind);
    }

    let rounds_run = chosen.len();
    let integral = milp::is_integer_feasible(&inst, &sol.x, INT_TOL)?;
    let status = match (integral, last) {
        (true, Some(CutKind::Gc)) => {
            if sol.x.max_dist(&[1.0, 1.0, 0.0]) > INT_TOL {
                return Err(Error::SimulationInvariant(format!(
                    "solved at {:?}, expected (1, 1, 0)",
                    &*sol.x
                )));
            }
            SimStatus::SolvedByGc(rounds_run)
        }
        (true, _) => {
            return Err(Error::SimulationInvariant(format!(
                "LP became integral without the good cut after {rounds_run} rounds"
            )))
        }
        (false, _) => SimStatus::NotSolved,
    };
    Ok(SimOutcome { status, rounds_run, chosen_types: chosen, lp_objectives: objs, final_x: sol.x })
}

/// Vertex sets of the relaxation plus one of GC, ISC^n, OPC^n.
#[derive(Debug, Clone, PartialEq)]
pub struct CutVertexSets {
    pub gc: Vec<Point>,
    pub isc: Vec<Point>,
    pub opc: Vec<Point>,
}

pub fn cut_vertex_sets(n: usize) -> Result<CutVertexSets> {
    let e = epsilon(n)?;
    let with = |extra: Vec<[f64; 3]>| {
        let mut v = integer_points();
        v.extend(extra.into_iter().map(Point::from));
        v
    };
    Ok(CutVertexSets {
        gc: with(vec![[61.0 / 91.0, 60.0 / 91.0, 10.0 / 91.0]]),
        isc: with(vec![
            [-0.5 + 3.0 * e / 4.0, 3.0 - 3.0 * e / 2.0, 0.5 - e / 4.0],
            [-0.5 + 3.0 * e / 4.0, 3.0 - e, 0.5 - e / 4.0],
            [-0.5 + e / 2.0, 3.0 - 3.0 * e, 0.5 - e / 2.0],
        ]),
        opc: with(vec![
            [-0.5 + e / 21.0, 3.0 - 2.0 * e / 21.0, 0.5 - e / 63.0],
            [-0.5 + 3.0 * e / 43.0, 3.0 - 4.0 * e / 43.0, 0.5 - e / 43.0],
            [-0.5 + e / 61.0, 3.0 - 6.0 * e / 61.0, 0.5 - e / 61.0],
        ]),
    })
}

/// One line of the theorem report.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremRow {
    pub lambda: f64,
    pub outcome: SimOutcome,
    pub final_gap: f64,
}

impl TheoremRow {
    pub fn status_str(&self) -> String {
        match self.outcome.status {
            SimStatus::SolvedByGc(r) => format!("SolvedByGC({r})"),
            SimStatus::NotSolved => "NotSolved".into(),
        }
    }
}

pub fn write_theorem_csv(path: impl AsRef<Path>, rows: &[TheoremRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lambda", "status", "rounds", "final_gap", "chosen_type_round1"])?;
    for r in rows {
        w.write_record([
            numfmt::fmt_f64(r.lambda),
            r.status_str(),
            r.outcome.rounds_run.to_string(),
            numfmt::fmt_f64(r.final_gap),
            r.outcome.chosen_types.first().map_or("", |k| k.as_str()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCertificate {
    pub d: f64,
    pub a: f64,
    pub lambda_lb: f64,
    pub lambda_ub: f64,
    pub grid: Vec<f64>,
}

impl IntervalCertificate {
    pub fn new(iv: &GoodCutInterval, grid: &[f64]) -> Self {
        IntervalCertificate { d: iv.d, a: iv.a, lambda_lb: iv.lb, lambda_ub: iv.ub, grid: grid.to_vec() }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, numfmt::to_json_string(self)?)?;
        Ok(())
    }
}

/// Full theorem check for one grid: the adversarial instance, a simulation per
/// grid value and one at the interval midpoint (last row).
#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub params: FamilyParams,
    pub interval: GoodCutInterval,
    pub grid: Vec<f64>,
    pub rows: Vec<TheoremRow>,
}

impl TheoremReport {
    /// Problems with the outcome; empty when every grid value fails with a
    /// constant cut type and the midpoint solves with GC in round one.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let Some((mid, grid_rows)) = self.rows.split_last() else {
            return vec!["no rows".into()];
        };
        for r in grid_rows {
            if r.outcome.status != SimStatus::NotSolved {
                out.push(format!("lambda {} was solved: {}", r.lambda, r.status_str()));
            }
            if r.outcome.chosen_types.windows(2).any(|w| w[0] != w[1]) {
                out.push(format!("lambda {} switched cut type", r.lambda));
            }
            if self.interval.contains(r.lambda) {
                out.push(format!("grid value {} lies inside the interval", r.lambda));
            }
        }
        if mid.outcome.status != SimStatus::SolvedByGc(1) {
            out.push(format!("midpoint {} gave {}", mid.lambda, mid.status_str()));
        } else {
            if mid.outcome.final_x.max_dist(&[1.0, 1.0, 0.0]) > 1e-6 {
                out.push(format!("midpoint ended at {:?}", &*mid.outcome.final_x));
            }
            let z = *mid.outcome.lp_objectives.last().unwrap();
            if (z - integer_optimum(self.params)).abs() > 1e-9 {
                out.push(format!("midpoint objective {z}"));
            }
        }
        out
    }
}

pub fn theorem_demo(grid: &[f64], max_rounds: usize) -> Result<TheoremReport> {
    use rayon::prelude::*;
    let grid = normalize_grid(grid)?;
    let (params, interval) = construct_adversarial(&grid)?;
    let mut lambdas = grid.clone();
    lambdas.push(interval.midpoint());
    let rows = lambdas
        .par_iter()
        .map(|&l| {
            let outcome = simulate_pure_cutting(params, l, max_rounds)?;
            let final_gap = outcome.final_gap(params);
            Ok(TheoremRow { lambda: l, outcome, final_gap })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoremReport { params, interval, grid, rows })
}
