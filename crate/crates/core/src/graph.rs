//! Constraint-variable bipartite encoding of a MILP.
//!
//! Variable features: scaled objective coefficient, lower and upper bound
//! features, and a one-hot variable type. Constraint features: objective
//! parallelism, scaled rhs, and a one-hot constraint type. Edges carry the
//! row-normalised coefficient.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::milp::{ConsType, MilpInstance, VarType};
use crate::numfmt;

pub const NODE_FEATURES: usize = 7;
/// Encoding of an infinite bound (negative for lower bounds).
pub const INF_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    #[serde(rename = "V")]
    pub v: Vec<[f64; NODE_FEATURES]>,
    #[serde(rename = "C")]
    pub c: Vec<[f64; NODE_FEATURES]>,
    /// `(constraint, variable, coefficient)`.
    #[serde(rename = "E")]
    pub e: Vec<(usize, usize, f64)>,
}

impl BipartiteGraph {
    pub fn n_vars(&self) -> usize {
        self.v.len()
    }

    pub fn n_cons(&self) -> usize {
        self.c.len()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(numfmt::to_json_string(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

fn vtype_slot(t: VarType) -> usize {
    match t {
        VarType::Binary => 0,
        VarType::Integer => 1,
        VarType::ImplicitInteger => 2,
        VarType::Continuous => 3,
    }
}

fn ctype_slot(t: ConsType) -> usize {
    match t {
        ConsType::Linear => 0,
        ConsType::Logicor => 1,
        ConsType::Knapsack => 2,
        ConsType::Setppc => 3,
        ConsType::Varbound => 4,
    }
}

pub fn encode(inst: &MilpInstance) -> BipartiteGraph {
    let obj = inst.objective();
    let cmax = obj.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if cmax == 0.0 {
        log::warn!("instance {}: zero objective, parallelism features set to 0", inst.name());
    }
    let bound_scale = inst
        .lower()
        .iter()
        .chain(inst.upper())
        .filter(|v| v.is_finite())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let bound = |v: f64, inf: f64| {
        if v.is_finite() {
            (v / bound_scale).clamp(-1.0, 1.0)
        } else {
            inf
        }
    };

    let v = (0..inst.n())
        .map(|j| {
            let mut f = [0.0; NODE_FEATURES];
            f[0] = if cmax > 0.0 { obj[j] / cmax } else { 0.0 };
            f[1] = bound(inst.lower()[j], -INF_BOUND);
            f[2] = bound(inst.upper()[j], INF_BOUND);
            f[3 + vtype_slot(inst.vtypes()[j])] = 1.0;
            f
        })
        .collect();

    let rows = inst.dense_rows();
    let cnorm = crate::milp::norm2(obj);
    let c = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut f = [0.0; NODE_FEATURES];
            let rnorm = crate::milp::norm2(row);
            if cnorm > 0.0 && rnorm > 0.0 {
                f[0] = (crate::milp::dot(row, obj).abs() / (rnorm * cnorm)).min(1.0);
            }
            let rinf = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let b = inst.rhs()[i];
            let den = b.abs().max(rinf);
            f[1] = if den > 0.0 { b / den } else { 0.0 };
            f[2 + ctype_slot(inst.ctypes()[i])] = 1.0;
            f
        })
        .collect();

    let mut e: Vec<(usize, usize, f64)> = inst
        .triplets()
        .iter()
        .filter(|t| t.2 != 0.0)
        .map(|&(r, col, a)| {
            let rinf = rows[r].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (r, col, a / rinf)
        })
        .collect();
    e.sort_by_key(|t| (t.0, t.1));
    BipartiteGraph { v, c, e }
}
