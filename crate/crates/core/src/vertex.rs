//! Brute-force vertex enumeration: every choice of `n` linearly independent
//! active constraints (rows, finite bounds) whose intersection is feasible.
//! Exponential, so only for tiny models; used as an oracle against the simplex.

use crate::error::{Error, Result};
use crate::milp::{self, Point};
use crate::simplex::RelaxedModel;

pub const MAX_VARS: usize = 12;
const MAX_COMBINATIONS: u128 = 20_000_000;
const SINGULAR_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-8;

/// All vertices of the relaxation's feasible region, deduplicated within 1e-8
/// (max-norm), in discovery order.
pub fn vertex_enumerate(model: &RelaxedModel) -> Result<Vec<Point>> {
    let n = model.n();
    if n > MAX_VARS {
        return Err(Error::TooLarge(format!("{n} variables, limit is {MAX_VARS}")));
    }
    let inst = model.instance();
    let mut planes = model.dense_rows();
    for j in 0..n {
        if inst.lower()[j].is_finite() {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            planes.push((e, -inst.lower()[j]));
        }
        if inst.upper()[j].is_finite() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e, inst.upper()[j]));
        }
    }
    let k = planes.len();
    if n == 0 || k < n {
        return Ok(Vec::new());
    }
    if binomial(k, n) > MAX_COMBINATIONS {
        return Err(Error::TooLarge(format!("C({k}, {n}) active sets")));
    }

    let mut out: Vec<Point> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let mut a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let mut b: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(&mut a, &mut b) {
            let feasible = planes
                .iter()
                .all(|(row, rhs)| milp::dot(row, &x) <= rhs + 1e-9 * (1.0 + rhs.abs()));
            if feasible && !out.iter().any(|p| p.max_dist(&x) <= DEDUP_TOL) {
                out.push(Point::new(x));
            }
        }
        if !next_combination(&mut idx, k) {
            break;
        }
    }
    Ok(out)
}

fn binomial(k: usize, n: usize) -> u128 {
    let n = n.min(k - n);
    (0..n).fold(1u128, |acc, i| acc * (k - i) as u128 / (i + 1) as u128)
}

fn next_combination(idx: &mut [usize], k: usize) -> bool {
    let n = idx.len();
    let mut i = n;
    while i > 0 {
        i -= 1;
        if idx[i] < k - n + i {
            idx[i] += 1;
            for j in i + 1..n {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` when (near) singular.
fn solve_square(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < SINGULAR_TOL {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Whether two point lists are equal as sets within `tol` (max-norm).
pub fn same_point_set(a: &[Point], b: &[Point], tol: f64) -> bool {
    a.iter().all(|p| b.iter().any(|q| p.max_dist(q) <= tol))
        && b.iter().all(|q| a.iter().any(|p| p.max_dist(q) <= tol))
}
