//! Cut quality measures and the two scoring rules built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{dot, norm2, Cut, Point, VarType};

const NORM_GUARD: f64 = 1e-12;

/// Weights for a scoring rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScoringWeights {
    /// `λ·isp + (1-λ)·obp` with `λ` in `[0, 1]`.
    Simple { lambda: f64 },
    /// `λ1·dcd + λ2·eff + λ3·isp + λ4·obp`. `normalized` weights are a point
    /// of the simplex; raw weights (policy actions) are unconstrained.
    Scip { l: [f64; 4], normalized: bool },
}

impl ScoringWeights {
    pub fn simple(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::OutOfRange(format!("simple lambda {lambda} not in [0, 1]")));
        }
        Ok(ScoringWeights::Simple { lambda })
    }

    pub fn normalized(l: [f64; 4]) -> Result<Self> {
        if l.iter().any(|&v| !(v >= 0.0)) || (l.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!(
                "normalized weights {l:?} must be nonnegative and sum to 1"
            )));
        }
        Ok(ScoringWeights::Scip { l, normalized: true })
    }

    pub fn raw(l: [f64; 4]) -> Result<Self> {
        if l.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange(format!("raw weights {l:?} must be finite")));
        }
        Ok(ScoringWeights::Scip { l, normalized: false })
    }

    /// Equal weights on all four measures.
    pub fn equal() -> Self {
        ScoringWeights::Scip { l: [0.25; 4], normalized: true }
    }

    /// Four-weight form; the simple rule maps to `(0, 0, λ, 1-λ)`.
    pub fn as_array(&self) -> [f64; 4] {
        match *self {
            ScoringWeights::Simple { lambda } => [0.0, 0.0, lambda, 1.0 - lambda],
            ScoringWeights::Scip { l, .. } => l,
        }
    }
}

/// Objective, LP point and optional incumbent for one scoring call.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionContext {
    c: Vec<f64>,
    xlp: Point,
    incumbent: Option<Point>,
}

impl SelectionContext {
    pub fn new(c: Vec<f64>, xlp: Point, incumbent: Option<Point>) -> Result<Self> {
        if xlp.len() != c.len() {
            return Err(Error::DimensionMismatch { expected: c.len(), got: xlp.len() });
        }
        if let Some(inc) = &incumbent {
            if inc.len() != c.len() {
                return Err(Error::DimensionMismatch { expected: c.len(), got: inc.len() });
            }
            if inc.max_dist(&xlp) <= 1e-12 {
                return Err(Error::IncumbentAtLpPoint);
            }
        }
        Ok(SelectionContext { c, xlp, incumbent })
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn xlp(&self) -> &Point {
        &self.xlp
    }

    pub fn incumbent(&self) -> Option<&Point> {
        self.incumbent.as_ref()
    }
}

fn nonzero_norm(v: &[f64]) -> Result<f64> {
    let n = norm2(v);
    if n < NORM_GUARD {
        return Err(Error::ZeroCut);
    }
    Ok(n)
}

/// Share of the cut's nonzero coefficients sitting on integer-typed variables.
pub fn isp(cut: &Cut, vtypes: &[VarType]) -> Result<f64> {
    if vtypes.len() != cut.len() {
        return Err(Error::DimensionMismatch { expected: cut.len(), got: vtypes.len() });
    }
    let mut nz = 0usize;
    let mut int = 0usize;
    for (a, vt) in cut.coeffs().iter().zip(vtypes) {
        if *a != 0.0 {
            nz += 1;
            if vt.is_integer() {
                int += 1;
            }
        }
    }
    if nz == 0 {
        return Err(Error::ZeroCut);
    }
    Ok(int as f64 / nz as f64)
}

/// `|cos|` between the cut normal and the objective.
pub fn obp(cut: &Cut, c: &[f64]) -> Result<f64> {
    if c.len() != cut.len() {
        return Err(Error::DimensionMismatch { expected: cut.len(), got: c.len() });
    }
    let nc = norm2(c);
    if nc < NORM_GUARD {
        return Err(Error::ZeroObjective);
    }
    let na = nonzero_norm(cut.coeffs())?;
    Ok((dot(cut.coeffs(), c).abs() / (na * nc)).min(1.0))
}

/// Signed Euclidean distance from `xlp` to the cut hyperplane; positive when
/// the cut separates `xlp`.
pub fn efficacy(cut: &Cut, xlp: &[f64]) -> Result<f64> {
    let na = nonzero_norm(cut.coeffs())?;
    Ok(cut.violation(xlp) / na)
}

/// Distance from `xlp` to the hyperplane along the unit direction towards
/// `xhat`. The denominator is `|α·y|` without normalising `α`.
pub fn dcd(cut: &Cut, xlp: &[f64], xhat: &[f64]) -> Result<f64> {
    let diff: Vec<f64> = xhat.iter().zip(xlp).map(|(h, l)| h - l).collect();
    let len = norm2(&diff);
    if len < NORM_GUARD {
        return Err(Error::IncumbentAtLpPoint);
    }
    let ay = dot(cut.coeffs(), &diff).abs() / len;
    if ay < NORM_GUARD {
        return Err(Error::ParallelToIncumbent);
    }
    Ok(cut.violation(xlp) / ay)
}

pub fn simple_score(lambda: f64, cut: &Cut, c: &[f64], vtypes: &[VarType]) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("simple lambda {lambda} not in [0, 1]")));
    }
    Ok(lambda * isp(cut, vtypes)? + (1.0 - lambda) * obp(cut, c)?)
}

/// Four-measure score. Without an incumbent, and also when the cut is
/// parallel to the incumbent direction, efficacy stands in for dcd.
/// `Simple` weights delegate to [`simple_score`].
pub fn scip_score(w: &ScoringWeights, cut: &Cut, ctx: &SelectionContext, vtypes: &[VarType]) -> Result<f64> {
    let l = match *w {
        ScoringWeights::Simple { lambda } => return simple_score(lambda, cut, ctx.objective(), vtypes),
        ScoringWeights::Scip { l, .. } => l,
    };
    let eff = efficacy(cut, ctx.xlp())?;
    let cutoff = match ctx.incumbent() {
        None => eff,
        Some(xhat) => match dcd(cut, ctx.xlp(), xhat) {
            Ok(v) => v,
            Err(Error::ParallelToIncumbent) => eff,
            Err(e) => return Err(e),
        },
    };
    Ok(l[0] * cutoff + l[1] * eff + l[2] * isp(cut, vtypes)? + l[3] * obp(cut, ctx.objective())?)
}

/// `|cos|` between two cut normals.
pub fn parallelism(c1: &Cut, c2: &Cut) -> Result<f64> {
    if c1.len() != c2.len() {
        return Err(Error::DimensionMismatch { expected: c1.len(), got: c2.len() });
    }
    let n1 = nonzero_norm(c1.coeffs())?;
    let n2 = nonzero_norm(c2.coeffs())?;
    Ok((dot(c1.coeffs(), c2.coeffs()).abs() / (n1 * n2)).min(1.0))
}
