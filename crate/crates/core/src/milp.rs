//! MILP and cut data model.
//!
//! Every constraint row is stored in `a·x <= b` form; callers negate rows for
//! `>=` and split equalities. Instances are immutable once built.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;

/// Default tolerance for feasibility and integrality checks.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarType {
    Binary,
    Integer,
    ImplicitInteger,
    Continuous,
}

impl VarType {
    /// Membership in the integer index set. Implicit integers count.
    pub fn is_integer(self) -> bool {
        !matches!(self, VarType::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsType {
    Linear,
    Logicor,
    Knapsack,
    Setppc,
    Varbound,
}

/// A dense point in variable space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(x: Vec<f64>) -> Self {
        Point(x)
    }

    pub fn zeros(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Max-norm distance to another point of the same length.
    pub fn max_dist(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(x: Vec<f64>) -> Self {
        Point(x)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(x: [f64; N]) -> Self {
        Point(x.to_vec())
    }
}

/// A linear cut `coeffs·x <= rhs` with at least one nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    coeffs: Vec<f64>,
    rhs: f64,
}

impl Cut {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Result<Self> {
        if coeffs.iter().all(|&a| a == 0.0) {
            return Err(Error::ZeroCut);
        }
        if !rhs.is_finite() || coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::OutOfRange("cut entries must be finite".into()));
        }
        Ok(Cut { coeffs, rhs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `coeffs·x - rhs`; positive iff `x` violates the cut.
    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x) - self.rhs
    }

    /// Same cut multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Cut {
        Cut {
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
            rhs: self.rhs * s,
        }
    }

    /// Same coefficients with a different right-hand side.
    pub fn with_rhs(&self, rhs: f64) -> Cut {
        Cut {
            coeffs: self.coeffs.clone(),
            rhs,
        }
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{a}*x{}", i + 1)?;
            first = false;
        }
        write!(f, " <= {}", self.rhs)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `min c·x  s.t.  A x <= b,  lower <= x <= upper,  x_j integer for integer-typed j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpInstance {
    name: String,
    c: Vec<f64>,
    a: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    vtype: Vec<VarType>,
    ctype: Vec<ConsType>,
}

impl MilpInstance {
    /// Builds and validates an instance. Infinite bounds are `±inf`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        c: Vec<f64>,
        a: Vec<(usize, usize, f64)>,
        b: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        vtype: Vec<VarType>,
        ctype: Vec<ConsType>,
    ) -> Result<Self> {
        let n = c.len();
        let m = b.len();
        for (what, len, want) in [
            ("lower", lower.len(), n),
            ("upper", upper.len(), n),
            ("vtype", vtype.len(), n),
            ("ctype", ctype.len(), m),
        ] {
            if len != want {
                return Err(Error::InvalidInstance(format!(
                    "{what} has length {len}, expected {want}"
                )));
            }
        }
        let mut seen = HashSet::with_capacity(a.len());
        for &(r, col, v) in &a {
            if r >= m || col >= n {
                return Err(Error::InvalidInstance(format!(
                    "triplet ({r}, {col}) outside {m}x{n}"
                )));
            }
            if !seen.insert((r, col)) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate triplet ({r}, {col})"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "non-finite coefficient at ({r}, {col})"
                )));
            }
        }
        if c.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance(
                "objective and rhs must be finite".into(),
            ));
        }
        for i in 0..n {
            if lower[i].is_nan() || upper[i].is_nan() || lower[i] == f64::INFINITY || upper[i] == f64::NEG_INFINITY {
                return Err(Error::InvalidInstance(format!("bad bounds on x{i}")));
            }
            if lower[i] > upper[i] {
                return Err(Error::InvalidInstance(format!(
                    "lower {} > upper {} on x{i}",
                    lower[i], upper[i]
                )));
            }
            if vtype[i] == VarType::Binary && (lower[i] < 0.0 || upper[i] > 1.0) {
                return Err(Error::InvalidInstance(format!(
                    "binary x{i} has bounds [{}, {}]",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(MilpInstance {
            name: name.into(),
            c,
            a,
            b,
            lower,
            upper,
            vtype,
            ctype,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn vtypes(&self) -> &[VarType] {
        &self.vtype
    }

    pub fn ctypes(&self) -> &[ConsType] {
        &self.ctype
    }

    /// Dense copy of the constraint matrix, one `Vec` per row.
    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; self.n()]; self.m()];
        for &(r, c, v) in &self.a {
            rows[r][c] = v;
        }
        rows
    }

    /// Same instance with a different objective.
    pub fn with_objective(&self, c: Vec<f64>) -> Result<Self> {
        check_len(self.n(), c.len())?;
        let mut out = self.clone();
        out.c = c;
        Ok(out)
    }

    /// Same instance with different variable bounds (revalidated).
    pub fn with_bounds(&self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        MilpInstance::new(
            self.name.clone(),
            self.c.clone(),
            self.a.clone(),
            self.b.clone(),
            lower,
            upper,
            self.vtype.clone(),
            self.ctype.clone(),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: InstanceJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(numfmt::to_json_string(&InstanceJson::from(self))?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// On-disk layout; `null` bounds are infinite.
#[derive(Serialize, Deserialize)]
struct InstanceJson {
    name: String,
    n: usize,
    m: usize,
    c: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
    vtype: Vec<VarType>,
    ctype: Vec<ConsType>,
}

impl From<&MilpInstance> for InstanceJson {
    fn from(inst: &MilpInstance) -> Self {
        let fin = |v: f64| v.is_finite().then_some(v);
        InstanceJson {
            name: inst.name.clone(),
            n: inst.n(),
            m: inst.m(),
            c: inst.c.clone(),
            a: inst.a.clone(),
            b: inst.b.clone(),
            lower: inst.lower.iter().map(|&v| fin(v)).collect(),
            upper: inst.upper.iter().map(|&v| fin(v)).collect(),
            vtype: inst.vtype.clone(),
            ctype: inst.ctype.clone(),
        }
    }
}

impl TryFrom<InstanceJson> for MilpInstance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        if raw.c.len() != raw.n || raw.b.len() != raw.m {
            return Err(Error::InvalidInstance(format!(
                "declared n={}, m={} but c has {} and b has {} entries",
                raw.n,
                raw.m,
                raw.c.len(),
                raw.b.len()
            )));
        }
        MilpInstance::new(
            raw.name,
            raw.c,
            raw.a,
            raw.b,
            raw.lower.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect(),
            raw.upper.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
            raw.vtype,
            raw.ctype,
        )
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `c·x`, summed in index order.
pub fn objective_value(inst: &MilpInstance, p: &[f64]) -> Result<f64> {
    check_len(inst.n(), p.len())?;
    Ok(dot(&inst.c, p))
}

/// Whether `p` satisfies every row, every bound and integrality, all within `tol`.
pub fn is_integer_feasible(inst: &MilpInstance, p: &[f64], tol: f64) -> Result<bool> {
    check_len(inst.n(), p.len())?;
    let mut act = vec![0.0; inst.m()];
    for &(r, c, v) in &inst.a {
        act[r] += v * p[c];
    }
    if act.iter().zip(&inst.b).any(|(a, b)| *a > b + tol) {
        return Ok(false);
    }
    for (i, &x) in p.iter().enumerate() {
        if x < inst.lower[i] - tol || x > inst.upper[i] + tol {
            return Ok(false);
        }
        if inst.vtype[i].is_integer() && (x - x.round()).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether no listed point violates `cut` by more than `tol`.
pub fn cut_is_valid_for(cut: &Cut, points: &[Point], tol: f64) -> Result<bool> {
    row_is_valid_for(cut.coeffs(), cut.rhs(), points, tol)
}

/// Row-level form of [`cut_is_valid_for`]; accepts an all-zero row.
pub fn row_is_valid_for(coeffs: &[f64], rhs: f64, points: &[Point], tol: f64) -> Result<bool> {
    for p in points {
        check_len(coeffs.len(), p.len())?;
    }
    Ok(points.iter().all(|p| dot(coeffs, p) <= rhs + tol))
}
