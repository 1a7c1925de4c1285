//! Seeded synthetic instances and a brute-force exact solver for them.
//!
//! Generators: multi-row integer packing, integer covering, and single-item
//! uncapacitated lot sizing with binary setups. All are small enough for
//! [`brute_force_optimum`], which enumerates the integer variables and solves
//! an LP over the continuous ones for each assignment.

use crate::error::{Error, Result};
use crate::family::{make_instance, FamilyParams};
use crate::milp::{self, ConsType, MilpInstance, Point, VarType};
use crate::rng::{self, int_range, uniform_range};
use crate::simplex::{solve_lp, LpStatus, RelaxedModel};

/// `max p·x  s.t.  W x <= cap,  x_j in {0..u_j}` (as a minimisation).
pub fn packing(n: usize, m: usize, seed: u64) -> MilpInstance {
    let mut r = rng::seeded(seed);
    let upper: Vec<f64> = (0..n).map(|_| int_range(&mut r, 1, 3) as f64).collect();
    let c: Vec<f64> = (0..n).map(|_| -(int_range(&mut r, 1, 20) as f64)).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        let mut full = 0.0;
        for j in 0..n {
            let w = int_range(&mut r, 1, 9) as f64;
            a.push((i, j, w));
            full += w * upper[j];
        }
        b.push((0.4 * full).floor().max(1.0));
    }
    let vtype = upper.iter().map(|&u| if u == 1.0 { VarType::Binary } else { VarType::Integer }).collect();
    MilpInstance::new(
        format!("packing-n{n}-m{m}-s{seed}"),
        c,
        a,
        b,
        vec![0.0; n],
        upper,
        vtype,
        vec![ConsType::Knapsack; m],
    )
    .expect("generated packing instance is valid")
}

/// `min c·x  s.t.  A x >= r,  x_j in {0..u_j}`.
pub fn covering(n: usize, m: usize, seed: u64) -> MilpInstance {
    let mut r = rng::seeded(seed);
    let upper: Vec<f64> = (0..n).map(|_| int_range(&mut r, 1, 3) as f64).collect();
    let c: Vec<f64> = (0..n).map(|_| int_range(&mut r, 1, 10) as f64).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        let mut full = 0.0;
        let forced = int_range(&mut r, 0, n as i64 - 1) as usize;
        for j in 0..n {
            let mut v = int_range(&mut r, 0, 5) as f64;
            if j == forced && v == 0.0 {
                v = 1.0;
            }
            if v != 0.0 {
                a.push((i, j, -v));
                full += v * upper[j];
            }
        }
        let need = int_range(&mut r, 1, (0.5 * full).floor().max(1.0) as i64) as f64;
        b.push(-need);
    }
    MilpInstance::new(
        format!("covering-n{n}-m{m}-s{seed}"),
        c,
        a,
        b,
        vec![0.0; n],
        upper,
        vec![VarType::Integer; n],
        vec![ConsType::Linear; m],
    )
    .expect("generated covering instance is valid")
}

/// Lot sizing over `periods` periods. Variables per period `t`, in order:
/// production `x_t` (continuous), stock `s_t` (continuous), setup `y_t`
/// (binary). Flow balance is split into two rows; `x_t <= M y_t` links setups.
pub fn lot_sizing(periods: usize, seed: u64) -> MilpInstance {
    let mut r = rng::seeded(seed);
    let t_n = periods;
    let demand: Vec<f64> = (0..t_n).map(|_| int_range(&mut r, 2, 9) as f64).collect();
    let total: f64 = demand.iter().sum();
    let (x, s, y) = (|t: usize| 3 * t, |t: usize| 3 * t + 1, |t: usize| 3 * t + 2);
    let mut c = vec![0.0; 3 * t_n];
    for t in 0..t_n {
        c[x(t)] = uniform_range(&mut r, 1.0, 3.0).round();
        c[s(t)] = int_range(&mut r, 1, 3) as f64;
        c[y(t)] = int_range(&mut r, 10, 40) as f64;
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut ctype = Vec::new();
    for t in 0..t_n {
        // s_{t-1} + x_t - s_t = d_t
        let row = b.len();
        for (sign, off) in [(1.0, 0), (-1.0, 1)] {
            let rr = row + off;
            if t > 0 {
                a.push((rr, s(t - 1), sign));
            }
            a.push((rr, x(t), sign));
            a.push((rr, s(t), -sign));
            b.push(sign * demand[t]);
            ctype.push(ConsType::Linear);
        }
        let rr = b.len();
        a.push((rr, x(t), 1.0));
        a.push((rr, y(t), -total));
        b.push(0.0);
        ctype.push(ConsType::Varbound);
    }
    let mut upper = vec![0.0; 3 * t_n];
    let mut vtype = vec![VarType::Continuous; 3 * t_n];
    for t in 0..t_n {
        upper[x(t)] = total;
        upper[s(t)] = total;
        upper[y(t)] = 1.0;
        vtype[y(t)] = VarType::Binary;
    }
    MilpInstance::new(
        format!("lotsizing-T{t_n}-s{seed}"),
        c,
        a,
        b,
        vec![0.0; 3 * t_n],
        upper,
        vtype,
        ctype,
    )
    .expect("generated lot-sizing instance is valid")
}

/// A `P(a, d)` instance with `a` uniform in `[0, 6]` and `d` in `[0, 1]`.
pub fn pad_sample(seed: u64) -> MilpInstance {
    let mut r = rng::seeded(seed);
    let a = uniform_range(&mut r, 0.0, 6.0);
    let d = rng::uniform(&mut r);
    make_instance(FamilyParams::new(a, d).unwrap())
}

/// Mixed corpus cycling through the four generators.
pub fn mixed_corpus(count: usize, seed: u64) -> Vec<MilpInstance> {
    (0..count)
        .map(|k| {
            let s = rng::derive(seed, &[k as u64]);
            match k % 4 {
                0 => packing(8, 4, s),
                1 => covering(6, 4, s),
                2 => lot_sizing(6, s),
                _ => pad_sample(s),
            }
        })
        .collect()
}

/// Integer ranges for every integer variable; infinite bounds are tightened
/// by LP (min and max of the variable over the relaxation).
fn integer_box(inst: &MilpInstance) -> Result<Option<Vec<(usize, i64, i64)>>> {
    let mut out = Vec::new();
    for j in 0..inst.n() {
        if !inst.vtypes()[j].is_integer() {
            continue;
        }
        let mut lo = inst.lower()[j];
        let mut hi = inst.upper()[j];
        for (dir, bound) in [(1.0, &mut lo), (-1.0, &mut hi)] {
            if bound.is_finite() {
                continue;
            }
            let mut c = vec![0.0; inst.n()];
            c[j] = dir;
            let sol = solve_lp(&RelaxedModel::new(inst.with_objective(c)?));
            match sol.status {
                LpStatus::Optimal => *bound = sol.x[j],
                LpStatus::Infeasible => return Ok(None),
                s => return Err(Error::TooLarge(format!("x{j} has no finite range ({s:?})"))),
            }
        }
        out.push((j, (lo - 1e-9).ceil() as i64, (hi + 1e-9).floor() as i64));
    }
    Ok(Some(out))
}

/// Exact optimum by enumeration; `None` when the instance is infeasible.
/// Fails when more than `limit` integer assignments would be visited.
pub fn brute_force_optimum(inst: &MilpInstance, limit: usize) -> Result<Option<(f64, Point)>> {
    let Some(boxes) = integer_box(inst)? else { return Ok(None) };
    let has_cont = inst.vtypes().iter().any(|v| !v.is_integer());
    let count: f64 = boxes.iter().map(|b| (b.2 - b.1 + 1).max(0) as f64).product();
    if count > limit as f64 {
        return Err(Error::TooLarge(format!("{count} integer assignments")));
    }
    if boxes.iter().any(|b| b.1 > b.2) {
        return Ok(None);
    }
    let rows = inst.dense_rows();
    let mut cur: Vec<i64> = boxes.iter().map(|b| b.1).collect();
    let mut best: Option<(f64, Point)> = None;
    loop {
        let candidate = if has_cont {
            let mut lo = inst.lower().to_vec();
            let mut hi = inst.upper().to_vec();
            for (k, &(j, _, _)) in boxes.iter().enumerate() {
                lo[j] = cur[k] as f64;
                hi[j] = cur[k] as f64;
            }
            let sol = solve_lp(&RelaxedModel::new(inst.with_bounds(lo, hi)?));
            match sol.status {
                LpStatus::Optimal => Some((sol.objective, sol.x)),
                LpStatus::Infeasible => None,
                s => return Err(Error::LpFailure(format!("fixed-integer LP {s:?}"))),
            }
        } else {
            let mut x = vec![0.0; inst.n()];
            for (k, &(j, _, _)) in boxes.iter().enumerate() {
                x[j] = cur[k] as f64;
            }
            let ok = rows.iter().zip(inst.rhs()).all(|(a, b)| milp::dot(a, &x) <= b + 1e-9);
            ok.then(|| (milp::dot(inst.objective(), &x), Point::new(x)))
        };
        if let Some((v, x)) = candidate {
            if best.as_ref().map_or(true, |b| v < b.0 - 1e-12) {
                best = Some((v, x));
            }
        }
        let mut k = 0;
        loop {
            if k == boxes.len() {
                return Ok(best);
            }
            if cur[k] < boxes[k].2 {
                cur[k] += 1;
                break;
            }
            cur[k] = boxes[k].1;
            k += 1;
        }
    }
}
