//! Sparse support recovery from `y = A v`.
//!
//! * [`max_correlation_support`]: one-shot thresholding of `|a_j^T y|`.
//! * [`ls_refine`]: least squares on a fixed support,
//!   `(A_S^T A_S)^{-1} A_S^T y`, solved through a QR factorisation.
//! * [`greedy_recover`]: orthogonal matching pursuit for an unknown number
//!   of active users.
//! * [`max_correlation_recover`]: correlation ranking followed by least
//!   squares and pruning of zero coefficients.
//! * [`brute_force_l0`]: exhaustive sparsest-solution search, for tests at
//!   desk scale only.
//!
//! All decoders break ties towards the lowest column index.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::sensing::{dot, SensingMatrix};

/// Relative decoder tolerance on the residual norm.
pub const RELATIVE_TOLERANCE: f64 = 1e-8;
/// Absolute floor for the decoder tolerance.
pub const ABSOLUTE_TOLERANCE: f64 = 1e-12;
/// Largest population accepted by [`brute_force_l0`].
pub const ORACLE_MAX_USERS: usize = 20;
/// Largest support size searched by [`brute_force_l0`].
pub const ORACLE_MAX_SPARSITY: usize = 4;

/// Relative threshold under which a least-squares coefficient is treated as
/// zero by [`max_correlation_recover`].
const PRUNE_RELATIVE: f64 = 1e-9;
/// `|R_ii| / sqrt(r)` below this marks a rank-deficient column set.
const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Ascending column indices.
    pub support: Vec<usize>,
    /// Coefficients aligned with `support`.
    pub values: Vec<f64>,
    /// `||y - A_S values||_2`.
    pub residual: f64,
    /// Residual is within the decoder tolerance.
    pub exact: bool,
}

impl RecoveryResult {
    fn empty(y: &[f64], tol: f64) -> Self {
        let residual = norm(y);
        Self {
            support: Vec::new(),
            values: Vec::new(),
            residual,
            exact: residual <= tol,
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `max(1e-8 ||y||, 1e-12)`.
pub fn default_tolerance(y: &[f64]) -> f64 {
    (RELATIVE_TOLERANCE * norm(y)).max(ABSOLUTE_TOLERANCE)
}

/// Order of column indices by decreasing `|score|`, lowest index first on ties.
fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&i, &j| scores[j].abs().total_cmp(&scores[i].abs()).then(i.cmp(&j)));
    idx
}

/// The `s` columns with the largest `|a_j^T y|`, in ascending index order.
///
/// `s > r` is accepted; least squares on the result is then
/// under-determined and [`ls_refine`] will report it as singular.
pub fn max_correlation_support(y: &[f64], a: &SensingMatrix, s: usize) -> Result<Vec<usize>> {
    if s == 0 || s > a.cols() {
        return Err(invalid(format!(
            "support size {s} must be in 1..={}",
            a.cols()
        )));
    }
    let scores = a.correlate(y)?;
    let mut top: Vec<usize> = ranked(&scores).into_iter().take(s).collect();
    top.sort_unstable();
    Ok(top)
}

/// Least-squares coefficients of `y` on the columns in `support`.
pub fn ls_refine(y: &[f64], a: &SensingMatrix, support: &[usize]) -> Result<Vec<f64>> {
    let r = a.rows();
    if y.len() != r {
        return Err(invalid(format!("measurement length {} != {r}", y.len())));
    }
    if support.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(&j) = support.iter().find(|&&j| j >= a.cols()) {
        return Err(invalid(format!("support index {j} out of range")));
    }
    if support.len() > r {
        return Err(Error::Singular(format!(
            "{} columns but only {r} measurements",
            support.len()
        )));
    }
    let sub = DMatrix::from_fn(r, support.len(), |i, c| a.entry(i, support[c]));
    let qr = sub.qr();
    let rmat = qr.r();
    let floor = RANK_TOLERANCE * (r as f64).sqrt();
    if (0..support.len()).any(|i| rmat[(i, i)].abs() <= floor) {
        return Err(Error::Singular(
            "selected columns are linearly dependent".into(),
        ));
    }
    let rhs = qr.q().transpose() * DVector::from_column_slice(y);
    let x = rmat
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    Ok(x.iter().copied().collect())
}

/// `y - A_S values`.
pub fn residual(y: &[f64], a: &SensingMatrix, support: &[usize], values: &[f64]) -> Vec<f64> {
    let mut res = y.to_vec();
    for (&j, &v) in support.iter().zip(values) {
        for (ri, aij) in res.iter_mut().zip(a.column(j)) {
            *ri -= aij * v;
        }
    }
    res
}

fn sorted_result(
    y: &[f64],
    a: &SensingMatrix,
    mut pairs: Vec<(usize, f64)>,
    tol: f64,
) -> RecoveryResult {
    pairs.sort_unstable_by_key(|p| p.0);
    let (support, values): (Vec<usize>, Vec<f64>) = pairs.into_iter().unzip();
    let res = norm(&residual(y, a, &support, &values));
    RecoveryResult {
        exact: res <= tol,
        residual: res,
        support,
        values,
    }
}

/// Orthogonal matching pursuit.
///
/// Adds the column most correlated with the current residual, re-fits least
/// squares on the accumulated support and stops once the residual norm is
/// within `tol` or `s_max` columns are selected. A column that would make the
/// fit rank deficient is skipped. Columns whose fitted coefficient vanishes
/// are dropped at the end, which undoes early wrong picks once the true
/// columns have all been added.
pub fn greedy_recover(y: &[f64], a: &SensingMatrix, s_max: usize, tol: f64) -> RecoveryResult {
    pursuit(y, a, s_max, tol, false)
}

/// [`greedy_recover`] for vectors known to be non-negative: columns are
/// ranked by signed correlation with the residual, so a column can only
/// enter with the sign the prior allows.
pub fn greedy_recover_nonnegative(
    y: &[f64],
    a: &SensingMatrix,
    s_max: usize,
    tol: f64,
) -> RecoveryResult {
    pursuit(y, a, s_max, tol, true)
}

#[allow(clippy::needless_range_loop)]
fn pursuit(
    y: &[f64],
    a: &SensingMatrix,
    s_max: usize,
    tol: f64,
    nonnegative: bool,
) -> RecoveryResult {
    let mut support: Vec<usize> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut excluded = vec![false; a.cols()];
    let mut res = y.to_vec();
    let mut res_norm = norm(&res);

    while res_norm > tol && support.len() < s_max.min(a.rows()) {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..a.cols() {
            if excluded[j] {
                continue;
            }
            let c = dot(a.column(j), &res);
            let c = if nonnegative { c } else { c.abs() };
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        let Some((j, score)) = best else { break };
        if score <= ABSOLUTE_TOLERANCE {
            break;
        }
        excluded[j] = true;
        support.push(j);
        match ls_refine(y, a, &support) {
            Ok(v) => values = v,
            Err(_) => {
                support.pop();
                continue;
            }
        }
        res = residual(y, a, &support, &values);
        res_norm = norm(&res);
    }

    let (support, values) = prune(y, a, support, values);
    sorted_result(y, a, support.into_iter().zip(values).collect(), tol)
}

/// Drops coefficients that are negligible next to the largest one and
/// re-fits the rest. Leaves the input alone if the re-fit fails.
fn prune(
    y: &[f64],
    a: &SensingMatrix,
    support: Vec<usize>,
    values: Vec<f64>,
) -> (Vec<usize>, Vec<f64>) {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = support
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.abs() > (PRUNE_RELATIVE * scale).max(ABSOLUTE_TOLERANCE))
        .map(|(&j, _)| j)
        .collect();
    if keep.len() == support.len() {
        return (support, values);
    }
    match ls_refine(y, a, &keep) {
        Ok(v) => (keep, v),
        Err(_) => (support, values),
    }
}

/// Correlation ranking, least squares on the top `budget` columns, then the
/// coefficients that least squares drives to zero are dropped and the rest
/// re-fitted.
///
/// With a noiseless measurement whose true support lies inside the
/// candidate set this returns the exact support and values.
pub fn max_correlation_recover(
    y: &[f64],
    a: &SensingMatrix,
    budget: usize,
    tol: f64,
) -> RecoveryResult {
    if norm(y) <= tol {
        return RecoveryResult::empty(y, tol);
    }
    let size = budget.min(a.rows()).min(a.cols()).max(1);
    let Ok(candidates) = max_correlation_support(y, a, size) else {
        return RecoveryResult::empty(y, tol);
    };
    let Ok(values) = ls_refine(y, a, &candidates) else {
        return RecoveryResult {
            values: vec![0.0; candidates.len()],
            support: candidates,
            residual: norm(y),
            exact: false,
        };
    };
    let (keep, values) = prune(y, a, candidates, values);
    sorted_result(y, a, keep.into_iter().zip(values).collect(), tol)
}

/// Largest support [`binary_l0_recover`] searches exhaustively.
pub const BINARY_MAX_WEIGHT: usize = 4;

type Key = Vec<i64>;

/// Integer image of `y`, or `None` if some entry is not (close to) an
/// integer, in which case `y` cannot be a sum of `±1` columns.
fn integer_key(y: &[f64]) -> Option<Key> {
    y.iter()
        .map(|&v| {
            let r = v.round();
            ((v - r).abs() <= 1e-6).then_some(r as i64)
        })
        .collect()
}

fn column_key(a: &SensingMatrix, j: usize) -> Key {
    a.column(j).iter().map(|&v| v as i64).collect()
}

fn minus(y: &[i64], col: &[i64]) -> Key {
    y.iter().zip(col).map(|(a, b)| a - b).collect()
}

/// Sparsest 0/1 vector `v` with `A v = y`, for supports of up to
/// `max_weight.min(BINARY_MAX_WEIGHT)` columns.
///
/// Columns and pairwise column sums are hashed, so each support size costs
/// at most `O(n^2 r)`. Among equally sparse solutions the lexicographically
/// first support is returned. When no binary solution exists within the
/// weight limit, falls back to [`greedy_recover_nonnegative`].
pub fn binary_l0_recover(
    y: &[f64],
    a: &SensingMatrix,
    max_weight: usize,
    tol: f64,
) -> RecoveryResult {
    if norm(y) <= tol {
        return RecoveryResult::empty(y, tol);
    }
    let weight = max_weight.min(BINARY_MAX_WEIGHT);
    let found = integer_key(y).and_then(|target| binary_search(&target, a, weight));
    match found {
        Some(support) => {
            let values = vec![1.0; support.len()];
            sorted_result(y, a, support.into_iter().zip(values).collect(), tol)
        }
        None => greedy_recover_nonnegative(y, a, max_weight, tol),
    }
}

#[allow(clippy::needless_range_loop)]
fn binary_search(target: &Key, a: &SensingMatrix, weight: usize) -> Option<Vec<usize>> {
    let n = a.cols();
    let cols: Vec<Key> = (0..n).map(|j| column_key(a, j)).collect();
    let mut by_column: HashMap<&[i64], Vec<usize>> = HashMap::new();
    for (j, c) in cols.iter().enumerate() {
        by_column.entry(c.as_slice()).or_default().push(j);
    }
    // First index in `hits` greater than `after`.
    let above = |hits: Option<&Vec<usize>>, after: Option<usize>| -> Option<usize> {
        hits?.iter().copied().find(|&j| after.is_none_or(|a| j > a))
    };

    if weight >= 1 {
        if let Some(j) = above(by_column.get(target.as_slice()), None) {
            return Some(vec![j]);
        }
    }
    if weight >= 2 {
        for i in 0..n {
            let rest = minus(target, &cols[i]);
            if let Some(j) = above(by_column.get(rest.as_slice()), Some(i)) {
                return Some(vec![i, j]);
            }
        }
    }
    if weight >= 3 {
        for i in 0..n {
            let r1 = minus(target, &cols[i]);
            for j in i + 1..n {
                let rest = minus(&r1, &cols[j]);
                if let Some(l) = above(by_column.get(rest.as_slice()), Some(j)) {
                    return Some(vec![i, j, l]);
                }
            }
        }
    }
    if weight >= 4 {
        let mut by_pair: HashMap<Key, Vec<(usize, usize)>> = HashMap::new();
        for i in 0..n {
            for j in i + 1..n {
                let sum: Key = cols[i].iter().zip(&cols[j]).map(|(x, y)| x + y).collect();
                by_pair.entry(sum).or_default().push((i, j));
            }
        }
        for i in 0..n {
            let r1 = minus(target, &cols[i]);
            for j in i + 1..n {
                let rest = minus(&r1, &cols[j]);
                let hit = by_pair
                    .get(&rest)
                    .and_then(|pairs| pairs.iter().find(|&&(k, _)| k > j));
                if let Some(&(k, l)) = hit {
                    return Some(vec![i, j, k, l]);
                }
            }
        }
    }
    None
}

/// Exhaustive search for the sparsest support reproducing `y`.
///
/// Supports are tried by increasing size and, within a size, in
/// lexicographic order; the first whose least-squares residual is within
/// `tol` wins. Refuses problems larger than [`ORACLE_MAX_USERS`] users or
/// [`ORACLE_MAX_SPARSITY`] active entries.
pub fn brute_force_l0(
    y: &[f64],
    a: &SensingMatrix,
    s_max: usize,
    tol: f64,
) -> Result<RecoveryResult> {
    if a.cols() > ORACLE_MAX_USERS || s_max > ORACLE_MAX_SPARSITY {
        return Err(Error::OracleRefused(format!(
            "exhaustive search limited to n <= {ORACLE_MAX_USERS}, s <= {ORACLE_MAX_SPARSITY}"
        )));
    }
    if y.len() != a.rows() {
        return Err(invalid(format!(
            "measurement length {} != {}",
            y.len(),
            a.rows()
        )));
    }
    if norm(y) <= tol {
        return Ok(RecoveryResult::empty(y, tol));
    }
    for size in 1..=s_max.min(a.rows()) {
        for support in (0..a.cols()).combinations(size) {
            let Ok(values) = ls_refine(y, a, &support) else {
                continue;
            };
            let res = norm(&residual(y, a, &support, &values));
            if res <= tol {
                return Ok(RecoveryResult {
                    support,
                    values,
                    residual: res,
                    exact: true,
                });
            }
        }
    }
    Ok(RecoveryResult::empty(y, tol))
}
