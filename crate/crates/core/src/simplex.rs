//! Dense bounded-variable primal simplex for LP relaxations.
//!
//! Variables keep their own bounds (no slack splitting) and free variables
//! sit nonbasic at zero. Phase 1 minimises the sum of artificials; both
//! phases price with Bland's rule, so results are deterministic for identical
//! input. Sized for desk-scale models only: the full tableau is kept dense.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::milp::{self, Cut, MilpInstance, Point};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITER: usize = 50_000;

/// A MILP with integrality dropped plus the cuts applied so far.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedModel {
    inst: MilpInstance,
    cuts: Vec<Cut>,
}

impl RelaxedModel {
    pub fn new(inst: MilpInstance) -> Self {
        RelaxedModel { inst, cuts: Vec::new() }
    }

    pub fn instance(&self) -> &MilpInstance {
        &self.inst
    }

    /// Applied cuts in application order.
    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn n(&self) -> usize {
        self.inst.n()
    }

    pub fn num_rows(&self) -> usize {
        self.inst.m() + self.cuts.len()
    }

    pub fn push_cut(&mut self, cut: Cut) -> Result<()> {
        if cut.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: cut.len() });
        }
        self.cuts.push(cut);
        Ok(())
    }

    pub fn with_cut(mut self, cut: Cut) -> Result<Self> {
        self.push_cut(cut)?;
        Ok(self)
    }

    /// Appends `cut`, unless a cut with bit-identical coefficients is already
    /// present; then only the smaller right-hand side is kept. The polytope
    /// is the same either way.
    pub fn add_or_tighten(&mut self, cut: Cut) -> Result<()> {
        if let Some(pos) = self.cuts.iter().position(|c| c.coeffs() == cut.coeffs()) {
            if cut.rhs() < self.cuts[pos].rhs() {
                self.cuts[pos] = cut;
            }
            return Ok(());
        }
        self.push_cut(cut)
    }

    /// All rows (instance rows first, then cuts) as dense `(coeffs, rhs)`.
    pub fn dense_rows(&self) -> Vec<(Vec<f64>, f64)> {
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .inst
            .dense_rows()
            .into_iter()
            .zip(self.inst.rhs().iter().copied())
            .collect();
        rows.extend(self.cuts.iter().map(|c| (c.coeffs().to_vec(), c.rhs())));
        rows
    }

    /// Whether the slack of `row` is integer on every integer-feasible point:
    /// integer coefficients on integer variables only, and an integer rhs.
    pub(crate) fn slack_is_integral(coeffs: &[f64], rhs: f64, inst: &MilpInstance) -> bool {
        let is_int = |v: f64| (v - v.round()).abs() <= 1e-9;
        is_int(rhs)
            && coeffs.iter().zip(inst.vtypes()).all(|(&a, vt)| {
                a == 0.0 || (vt.is_integer() && is_int(a))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot cap hit; never observed on well-posed desk-scale models.
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

/// Optimal tableau over structural columns `0..n` and slack columns `n..n+R`.
///
/// Each row reads `x_basis[i] + Σ_j rows[i][j]·x_j = const` over nonbasic `j`.
/// Slack `n+i` equals `rhs_i - row_i·x` and is bounded by `[0, inf)`.
#[derive(Debug, Clone)]
pub struct Tableau {
    pub rows: Vec<Vec<f64>>,
    pub basis: Vec<usize>,
    pub status: Vec<VarStatus>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Point,
    pub objective: f64,
    /// Basic variable per row (structural `< n`, slack `n + row`,
    /// artificial `>= n + R` for redundant rows).
    pub basis: Vec<usize>,
    pub tableau: Option<Tableau>,
}

impl LpSolution {
    fn failed(status: LpStatus, n: usize) -> Self {
        LpSolution {
            status,
            x: Point::zeros(n),
            objective: f64::NAN,
            basis: Vec::new(),
            tableau: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Simplex {
    nrows: usize,
    ncols: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<VarStatus>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    val: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    b: Vec<f64>,
    first_slack: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Simplex {
    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.ncols..(i + 1) * self.ncols]
    }

    fn build(model: &RelaxedModel) -> Simplex {
        let n = model.n();
        let rows = model.dense_rows();
        let r = rows.len();
        let inst = model.instance();

        let mut val = Vec::with_capacity(n + r);
        let mut status = Vec::with_capacity(n + r);
        for j in 0..n {
            let (l, u) = (inst.lower()[j], inst.upper()[j]);
            if l.is_finite() {
                val.push(l);
                status.push(VarStatus::AtLower);
            } else if u.is_finite() {
                val.push(u);
                status.push(VarStatus::AtUpper);
            } else {
                val.push(0.0);
                status.push(VarStatus::Free);
            }
        }
        let resid: Vec<f64> = rows
            .iter()
            .map(|(a, b)| b - milp::dot(a, &val[..n]))
            .collect();
        let n_art = resid.iter().filter(|&&r| r < -FEAS_TOL).count();
        let ncols = n + r + n_art;

        let mut t = vec![0.0; r * ncols];
        let mut lo: Vec<f64> = inst.lower().to_vec();
        let mut hi: Vec<f64> = inst.upper().to_vec();
        lo.extend(std::iter::repeat(0.0).take(r + n_art));
        hi.extend(std::iter::repeat(f64::INFINITY).take(r + n_art));
        val.extend(std::iter::repeat(0.0).take(r + n_art));
        status.extend(std::iter::repeat(VarStatus::AtLower).take(r + n_art));
        let mut basis = vec![0; r];
        let mut art = n + r;
        for (i, (a, _)) in rows.iter().enumerate() {
            let row = &mut t[i * ncols..(i + 1) * ncols];
            if resid[i] >= -FEAS_TOL {
                row[..n].copy_from_slice(a);
                row[n + i] = 1.0;
                basis[i] = n + i;
                val[n + i] = resid[i].max(0.0);
                status[n + i] = VarStatus::Basic(i);
            } else {
                for (dst, src) in row[..n].iter_mut().zip(a) {
                    *dst = -src;
                }
                row[n + i] = -1.0;
                row[art] = 1.0;
                basis[i] = art;
                val[art] = -resid[i];
                status[art] = VarStatus::Basic(i);
                art += 1;
            }
        }
        Simplex {
            nrows: r,
            ncols,
            t,
            basis,
            status,
            lo,
            hi,
            val,
            cost: vec![0.0; ncols],
            d: vec![0.0; ncols],
            b: rows.iter().map(|(_, b)| *b).collect(),
            first_slack: n,
        }
    }

    fn first_art(&self) -> usize {
        self.first_slack + self.nrows
    }

    fn recompute_reduced_costs(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.nrows {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &bv in &self.basis {
            self.d[bv] = 0.0;
        }
    }

    /// Recomputes basic values from the slack block, which holds `B^-1`.
    fn recompute_basic_values(&mut self) {
        let s0 = self.first_slack;
        for i in 0..self.nrows {
            let row = self.row(i);
            let mut v: f64 = (0..self.nrows).map(|k| row[s0 + k] * self.b[k]).sum();
            for j in 0..self.ncols {
                if !matches!(self.status[j], VarStatus::Basic(_)) && row[j] != 0.0 {
                    v -= row[j] * self.val[j];
                }
            }
            let bv = self.basis[i];
            self.val[bv] = v;
        }
    }

    fn entering(&self) -> Option<(usize, f64)> {
        (0..self.ncols).find_map(|j| {
            if self.lo[j] == self.hi[j] {
                return None;
            }
            let dj = self.d[j];
            match self.status[j] {
                VarStatus::AtLower if dj < -OPT_TOL => Some((j, 1.0)),
                VarStatus::AtUpper if dj > OPT_TOL => Some((j, -1.0)),
                VarStatus::Free if dj.abs() > OPT_TOL => Some((j, -dj.signum())),
                _ => None,
            }
        })
    }

    fn run(&mut self, iters: &mut usize) -> Outcome {
        self.recompute_reduced_costs();
        loop {
            let Some((q, dir)) = self.entering() else {
                // confirm with fresh reduced costs before declaring optimality
                self.recompute_reduced_costs();
                if self.entering().is_some() {
                    continue;
                }
                return Outcome::Optimal;
            };
            *iters += 1;
            if *iters > MAX_ITER {
                return Outcome::IterationLimit;
            }

            // ratio test; ties go to the smallest basic variable index
            let mut best: Option<(f64, usize, bool)> = None;
            for i in 0..self.nrows {
                let g = -self.t[i * self.ncols + q] * dir;
                if g.abs() <= PIVOT_TOL {
                    continue;
                }
                let bv = self.basis[i];
                let (limit, to_upper) = if g < 0.0 {
                    if !self.lo[bv].is_finite() {
                        continue;
                    }
                    ((self.val[bv] - self.lo[bv]) / -g, false)
                } else {
                    if !self.hi[bv].is_finite() {
                        continue;
                    }
                    ((self.hi[bv] - self.val[bv]) / g, true)
                };
                let limit = limit.max(0.0);
                let better = match best {
                    None => true,
                    Some((bl, bi, _)) => {
                        limit < bl - 1e-12 || (limit <= bl + 1e-12 && bv < self.basis[bi])
                    }
                };
                if better {
                    best = Some((limit, i, to_upper));
                }
            }
            let flip = self.hi[q] - self.lo[q];

            match best {
                None if !flip.is_finite() => return Outcome::Unbounded,
                Some((limit, _, _)) if flip.is_finite() && flip <= limit => self.bound_flip(q, dir, flip),
                None => self.bound_flip(q, dir, flip),
                Some((limit, p, to_upper)) => self.pivot(p, q, dir, limit, to_upper),
            }
        }
    }

    fn move_values(&mut self, q: usize, dir: f64, step: f64) {
        if step == 0.0 {
            return;
        }
        self.val[q] += dir * step;
        for i in 0..self.nrows {
            let tiq = self.t[i * self.ncols + q];
            if tiq != 0.0 {
                let bv = self.basis[i];
                self.val[bv] -= tiq * dir * step;
            }
        }
    }

    fn bound_flip(&mut self, q: usize, dir: f64, step: f64) {
        self.move_values(q, dir, step);
        if dir > 0.0 {
            self.val[q] = self.hi[q];
            self.status[q] = VarStatus::AtUpper;
        } else {
            self.val[q] = self.lo[q];
            self.status[q] = VarStatus::AtLower;
        }
    }

    fn pivot(&mut self, p: usize, q: usize, dir: f64, step: f64, to_upper: bool) {
        self.move_values(q, dir, step);
        let leaving = self.basis[p];
        if to_upper {
            self.val[leaving] = self.hi[leaving];
            self.status[leaving] = VarStatus::AtUpper;
        } else {
            self.val[leaving] = self.lo[leaving];
            self.status[leaving] = VarStatus::AtLower;
        }
        self.exchange(p, q);
    }

    /// Makes `q` basic in row `p` (Gauss-Jordan on the tableau and cost row).
    fn exchange(&mut self, p: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[p * nc + q];
        for v in &mut self.t[p * nc..(p + 1) * nc] {
            *v /= piv;
        }
        self.t[p * nc + q] = 1.0;
        let prow: Vec<f64> = self.t[p * nc..(p + 1) * nc].to_vec();
        for i in 0..self.nrows {
            if i == p {
                continue;
            }
            let f = self.t[i * nc + q];
            if f != 0.0 {
                let row = &mut self.t[i * nc..(i + 1) * nc];
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, pv) in self.d.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.d[q] = 0.0;
        }
        self.basis[p] = q;
        self.status[q] = VarStatus::Basic(p);
    }

    /// Swaps basic artificials for real columns where the row allows it, then
    /// pins every artificial at zero.
    fn retire_artificials(&mut self) {
        let a0 = self.first_art();
        for p in 0..self.nrows {
            if self.basis[p] < a0 {
                continue;
            }
            let q = (0..a0).find(|&j| {
                !matches!(self.status[j], VarStatus::Basic(_)) && self.t[p * self.ncols + j].abs() > 1e-7
            });
            if let Some(q) = q {
                let leaving = self.basis[p];
                self.val[leaving] = 0.0;
                self.status[leaving] = VarStatus::AtLower;
                self.exchange(p, q);
            }
        }
        for j in a0..self.ncols {
            self.hi[j] = 0.0;
            if !matches!(self.status[j], VarStatus::Basic(_)) {
                self.val[j] = 0.0;
                self.status[j] = VarStatus::AtLower;
            }
        }
        self.recompute_basic_values();
    }
}

/// Solves the LP relaxation. Infeasible and unbounded models are reported
/// through [`LpSolution::status`], never as errors.
pub fn solve_lp(model: &RelaxedModel) -> LpSolution {
    let n = model.n();
    let mut s = Simplex::build(model);
    let mut iters = 0;

    let a0 = s.first_art();
    if s.ncols > a0 {
        for j in a0..s.ncols {
            s.cost[j] = 1.0;
        }
        match s.run(&mut iters) {
            Outcome::Optimal => {}
            Outcome::IterationLimit => return LpSolution::failed(LpStatus::IterationLimit, n),
            Outcome::Unbounded => unreachable!("phase 1 objective is bounded below"),
        }
        s.recompute_basic_values();
        let infeas: f64 = (a0..s.ncols).map(|j| s.val[j].max(0.0)).sum();
        let scale = 1.0 + s.b.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        if infeas > 1e-9 * scale {
            return LpSolution::failed(LpStatus::Infeasible, n);
        }
        s.retire_artificials();
        s.cost.iter_mut().for_each(|c| *c = 0.0);
    }

    s.cost[..n].copy_from_slice(model.instance().objective());
    match s.run(&mut iters) {
        Outcome::Optimal => {}
        Outcome::Unbounded => return LpSolution::failed(LpStatus::Unbounded, n),
        Outcome::IterationLimit => return LpSolution::failed(LpStatus::IterationLimit, n),
    }
    s.recompute_basic_values();

    let x = Point::new(s.val[..n].to_vec());
    let objective = milp::dot(model.instance().objective(), &x);
    let width = n + s.nrows;
    let tableau = Tableau {
        rows: (0..s.nrows).map(|i| s.row(i)[..width].to_vec()).collect(),
        basis: s.basis.clone(),
        status: s.status[..width].to_vec(),
        lower: s.lo[..width].to_vec(),
        upper: s.hi[..width].to_vec(),
        values: s.val[..width].to_vec(),
    };
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        basis: s.basis,
        tableau: Some(tableau),
    }
}

/// Largest violation of any row or bound by `x` (0 when feasible).
pub fn max_violation(model: &RelaxedModel, x: &[f64]) -> f64 {
    let inst = model.instance();
    let rows = model
        .dense_rows()
        .into_iter()
        .map(|(a, b)| milp::dot(&a, x) - b)
        .fold(0.0f64, f64::max);
    let bounds = x
        .iter()
        .enumerate()
        .map(|(j, &v)| (inst.lower()[j] - v).max(v - inst.upper()[j]))
        .fold(0.0f64, f64::max);
    rows.max(bounds)
}

/// Solves and insists on optimality; convenience for callers whose models
/// are bounded and feasible by construction.
pub fn solve_optimal(model: &RelaxedModel) -> Result<LpSolution> {
    let sol = solve_lp(model);
    if sol.is_optimal() {
        Ok(sol)
    } else {
        Err(Error::LpFailure(format!("status {:?}", sol.status)))
    }
}
