//! Gomory cuts read off an optimal tableau.
//!
//! Uses the mixed-integer rounding of a tableau row, which reduces to the
//! classical fractional cut on pure-integer rows and stays valid when the row
//! involves continuous variables or non-integral slacks.

use crate::error::{Error, Result};
use crate::milp::{Cut, Point};
use crate::simplex::{LpSolution, RelaxedModel, VarStatus};

/// Minimum distance from an integer for a basic value to count as fractional.
pub const FRACTIONALITY: f64 = 1e-6;
const ZERO_TOL: f64 = 1e-11;

/// One cut per fractional basic integer variable of `sol`, in row order.
/// Rows that cannot be rounded (a free nonbasic variable in the row) or that
/// yield a numerically useless cut are skipped.
pub fn gomory_cuts(model: &RelaxedModel, sol: &LpSolution) -> Result<Vec<Cut>> {
    let tab = sol
        .tableau
        .as_ref()
        .ok_or_else(|| Error::LpFailure("gomory_cuts needs an optimal tableau".into()))?;
    let inst = model.instance();
    let n = model.n();
    let rows = model.dense_rows();
    let width = n + rows.len();
    let is_int = |v: f64| (v - v.round()).abs() <= 1e-9;

    // integrality of every column of the tableau, as a shifted variable
    let col_int: Vec<bool> = (0..width)
        .map(|j| {
            if j < n {
                inst.vtypes()[j].is_integer()
                    && (!inst.lower()[j].is_finite() || is_int(inst.lower()[j]))
                    && (!inst.upper()[j].is_finite() || is_int(inst.upper()[j]))
            } else {
                let (a, b) = &rows[j - n];
                RelaxedModel::slack_is_integral(a, *b, inst)
            }
        })
        .collect();

    let mut cuts = Vec::new();
    'rows: for (i, row) in tab.rows.iter().enumerate() {
        let bv = tab.basis[i];
        if bv >= n || !inst.vtypes()[bv].is_integer() {
            continue;
        }
        let beta = tab.values[bv];
        let f0 = beta - beta.floor();
        if f0 <= FRACTIONALITY || f0 >= 1.0 - FRACTIONALITY {
            continue;
        }

        // cut in x-space accumulated as  coef·x + konst >= 1
        let mut coef = vec![0.0; n];
        let mut konst = 0.0;
        for (j, &t) in row.iter().enumerate() {
            if j == bv || t.abs() <= ZERO_TOL || tab.lower[j] == tab.upper[j] {
                continue;
            }
            let (abar, shift_lower) = match tab.status[j] {
                VarStatus::Basic(_) => continue,
                VarStatus::AtLower => (t, true),
                VarStatus::AtUpper => (-t, false),
                VarStatus::Free => continue 'rows,
            };
            let pi = if col_int[j] {
                let fj = abar - abar.floor();
                if fj <= f0 {
                    fj / f0
                } else {
                    (1.0 - fj) / (1.0 - f0)
                }
            } else if abar > 0.0 {
                abar / f0
            } else {
                -abar / (1.0 - f0)
            };
            if pi == 0.0 {
                continue;
            }
            // z_j = x_j - l_j  or  z_j = u_j - x_j, with slack x_j = b_k - a_k·x
            let sign = if shift_lower { 1.0 } else { -1.0 };
            let bound = if shift_lower { tab.lower[j] } else { tab.upper[j] };
            konst -= sign * pi * bound;
            if j < n {
                coef[j] += sign * pi;
            } else {
                let (a, b) = &rows[j - n];
                konst += sign * pi * b;
                for (c, aj) in coef.iter_mut().zip(a) {
                    *c -= sign * pi * aj;
                }
            }
        }

        // -coef·x <= konst - 1
        let scale = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale <= ZERO_TOL {
            continue;
        }
        let alpha: Vec<f64> = coef
            .iter()
            .map(|c| {
                let v = -c / scale;
                if v.abs() <= 1e-12 {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let rhs = (konst - 1.0) / scale;
        let Ok(cut) = Cut::new(alpha, rhs) else { continue };
        if cut.violation(&sol.x) > 1e-9 {
            cuts.push(cut);
        }
    }
    Ok(cuts)
}

/// Every integer point in the box `[lower, upper]` (integer coordinates for
/// integer-typed variables only; the model must be pure integer here) that is
/// feasible for the original instance. Used as a brute-force oracle.
pub fn enumerate_integer_points(model: &RelaxedModel, limit: usize) -> Result<Vec<Point>> {
    let inst = model.instance();
    let n = inst.n();
    let mut ranges = Vec::with_capacity(n);
    for j in 0..n {
        let (l, u) = (inst.lower()[j], inst.upper()[j]);
        if !inst.vtypes()[j].is_integer() || !l.is_finite() || !u.is_finite() {
            return Err(Error::InvalidInstance(
                "integer enumeration needs bounded integer variables".into(),
            ));
        }
        ranges.push((l.ceil() as i64, u.floor() as i64));
    }
    let total: f64 = ranges.iter().map(|(l, u)| (u - l + 1).max(0) as f64).product();
    if total > limit as f64 {
        return Err(Error::TooLarge(format!("{total} lattice points")));
    }
    let mut out = Vec::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|(l, u)| l > u) {
        return Ok(out);
    }
    let rows = model.dense_rows();
    loop {
        let x: Vec<f64> = cur.iter().map(|&v| v as f64).collect();
        if rows.iter().all(|(a, b)| crate::milp::dot(a, &x) <= b + 1e-9) {
            out.push(Point::new(x));
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(out);
            }
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0;
            k += 1;
        }
    }
}
