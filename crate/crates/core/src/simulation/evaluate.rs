//! Plug-in evaluation of adjustment formulas on data.
//!
//! Categorical data use weighted cell frequencies, generic over the weight
//! type so an exact joint law evaluates in rationals. Continuous data use
//! least squares: every conditional expectation is linear, so sums over a
//! role collapse to evaluating the body at the role's mean under the weight.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Div, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact::rational;
use super::{Dataset, Family, Model, SimulationError};
use crate::identification::{Estimand, Expr, Level, Role};
use crate::temporal::TemporalVertex;

type Result<T> = std::result::Result<T, SimulationError>;

/// Row weights: counts, frequencies or exact probabilities.
pub trait Weight:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_value(x: f64) -> Self;
}

impl Weight for f64 {
    fn from_value(x: f64) -> Self {
        x
    }
}

impl Weight for BigRational {
    fn from_value(x: f64) -> Self {
        rational(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    CellFrequencies,
    LeastSquares,
}

impl Estimator {
    pub fn for_model(model: &Model) -> Self {
        match model.family() {
            Family::Linear => Estimator::LeastSquares,
            Family::Tabular => Estimator::CellFrequencies,
        }
    }
}

/// Weighted rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<W> {
    pub columns: Vec<TemporalVertex>,
    pub rows: Vec<Vec<f64>>,
    pub weights: Vec<W>,
}

impl Table<f64> {
    /// One unit-weight row per observation.
    pub fn from_dataset(d: &Dataset) -> Self {
        Self {
            columns: d.columns.clone(),
            rows: d.rows.clone(),
            weights: vec![1.0; d.rows.len()],
        }
    }

    /// Identical rows merged into counts, with the cell of every original row.
    pub fn aggregate(d: &Dataset) -> (Self, Vec<usize>) {
        let mut cells: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut rows = Vec::new();
        let mut weights = Vec::new();
        let mut cell_of = Vec::with_capacity(d.rows.len());
        for r in &d.rows {
            let key: Vec<u64> = r.iter().map(|x| x.to_bits()).collect();
            let k = *cells.entry(key).or_insert_with(|| {
                rows.push(r.clone());
                weights.push(0.0);
                rows.len() - 1
            });
            weights[k] += 1.0;
            cell_of.push(k);
        }
        (
            Self {
                columns: d.columns.clone(),
                rows,
                weights,
            },
            cell_of,
        )
    }
}

impl Table<BigRational> {
    /// An exact joint law as a table over the model's vertices.
    pub fn from_joint(model: &Model, joint: Vec<(Vec<f64>, BigRational)>) -> Self {
        let (rows, weights) = joint.into_iter().unzip();
        Self {
            columns: model.vertices().to_vec(),
            rows,
            weights,
        }
    }
}

struct Columns {
    y: usize,
    x: usize,
    roles: BTreeMap<Role, Vec<usize>>,
}

impl Columns {
    fn new(e: &Estimand, columns: &[TemporalVertex]) -> Result<Self> {
        let find = |v: &TemporalVertex| {
            columns
                .iter()
                .position(|c| c == v)
                .ok_or_else(|| SimulationError::UnknownVariable(v.to_string()))
        };
        let mut roles = BTreeMap::new();
        for r in [Role::Z, Role::A] {
            roles.insert(r, e.role(r).iter().map(find).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self {
            y: find(&e.outcome)?,
            x: find(&e.treatment)?,
            roles,
        })
    }
}

fn level_value(e: &Estimand, level: Level) -> f64 {
    match level {
        Level::Control => e.x,
        Level::Treated => e.x_prime,
    }
}

/// Values bound to each role while evaluating.
type Env = BTreeMap<Role, Vec<f64>>;

fn initial_env(e: &Estimand, free: &BTreeMap<TemporalVertex, f64>) -> Env {
    let mut env = Env::new();
    for r in [Role::Z, Role::A] {
        env.insert(
            r,
            e.role(r).iter().map(|v| free.get(v).copied().unwrap_or(0.0)).collect(),
        );
    }
    env
}

/// Evaluate an estimand on a dataset. `free` binds vertices the formula
/// does not sum over (the held `Z` of a controlled effect); unbound values
/// default to 0.
pub fn evaluate_estimand(
    e: &Estimand,
    data: &Dataset,
    free: &BTreeMap<TemporalVertex, f64>,
    estimator: Estimator,
) -> Result<f64> {
    match estimator {
        Estimator::CellFrequencies => evaluate_cells(e, &Table::aggregate(data).0, free),
        Estimator::LeastSquares => evaluate_least_squares(e, &Table::from_dataset(data), free),
    }
}

/// Weighted cell-frequency evaluation.
pub fn evaluate_cells<W: Weight>(
    e: &Estimand,
    table: &Table<W>,
    free: &BTreeMap<TemporalVertex, f64>,
) -> Result<W> {
    let cells = Cells {
        e,
        table,
        cols: Columns::new(e, &table.columns)?,
    };
    cells.eval(&e.expr, &mut initial_env(e, free))
}

struct Cells<'a, W> {
    e: &'a Estimand,
    table: &'a Table<W>,
    cols: Columns,
}

impl<W: Weight> Cells<'_, W> {
    fn matches(&self, row: &[f64], level: Option<Level>, given: Option<Role>, env: &Env) -> bool {
        if let Some(l) = level {
            if row[self.cols.x] != level_value(self.e, l) {
                return false;
            }
        }
        match given {
            Some(r) => self.cols.roles[&r]
                .iter()
                .zip(&env[&r])
                .all(|(&c, &v)| row[c] == v),
            None => true,
        }
    }

    fn describe(&self, level: Option<Level>, given: Option<Role>, env: &Env) -> String {
        let mut parts = Vec::new();
        if let Some(l) = level {
            parts.push(format!("{}={}", self.e.treatment, level_value(self.e, l)));
        }
        if let Some(r) = given {
            for (v, x) in self.e.role(r).iter().zip(&env[&r]) {
                parts.push(format!("{v}={x}"));
            }
        }
        parts.join(", ")
    }

    fn eval(&self, expr: &Expr, env: &mut Env) -> Result<W> {
        match expr {
            Expr::Expectation { level, given } => {
                let (mut num, mut den) = (W::zero(), W::zero());
                for (row, w) in self.table.rows.iter().zip(&self.table.weights) {
                    if self.matches(row, Some(*level), *given, env) {
                        num = num + w.clone() * W::from_value(row[self.cols.y]);
                        den = den + w.clone();
                    }
                }
                if den.is_zero() {
                    return Err(SimulationError::EmptyCell(self.describe(Some(*level), *given, env)));
                }
                Ok(num / den)
            }
            Expr::Probability { of, level, given } => {
                let (mut num, mut den) = (W::zero(), W::zero());
                for (row, w) in self.table.rows.iter().zip(&self.table.weights) {
                    if self.matches(row, *level, *given, env) {
                        den = den + w.clone();
                        if self.matches(row, None, Some(*of), env) {
                            num = num + w.clone();
                        }
                    }
                }
                if den.is_zero() {
                    return Err(SimulationError::EmptyCell(self.describe(*level, *given, env)));
                }
                Ok(num / den)
            }
            Expr::Sum { over, body, weight } => {
                let cols = &self.cols.roles[over];
                let mut support: Vec<Vec<f64>> = self
                    .table
                    .rows
                    .iter()
                    .zip(&self.table.weights)
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(row, _)| cols.iter().map(|&c| row[c]).collect())
                    .collect();
                support.sort_by(|a, b| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                support.dedup();
                let saved = env.insert(*over, Vec::new());
                let mut acc = W::zero();
                for value in support {
                    env.insert(*over, value);
                    let w = self.eval(weight, env)?;
                    if w.is_zero() {
                        continue;
                    }
                    acc = acc + self.eval(body, env)? * w;
                }
                if let Some(s) = saved {
                    env.insert(*over, s);
                }
                Ok(acc)
            }
            Expr::Difference(a, b) => Ok(self.eval(a, env)? - self.eval(b, env)?),
        }
    }
}

/// Least-squares evaluation.
pub fn evaluate_least_squares(
    e: &Estimand,
    table: &Table<f64>,
    free: &BTreeMap<TemporalVertex, f64>,
) -> Result<f64> {
    let cols = Columns::new(e, &table.columns)?;
    let gram = Gram::new(table, &cols);
    let ls = LeastSquares { e, cols, gram };
    ls.eval(&e.expr, &mut initial_env(e, free))
}

/// Weighted moment matrix of `[1, used columns...]`; every regression among
/// those columns is a solve on a sub-block.
struct Gram {
    /// Table column to position in the moment matrix.
    slot: HashMap<usize, usize>,
    m: DMatrix<f64>,
}

impl Gram {
    fn new(table: &Table<f64>, cols: &Columns) -> Self {
        let mut used: Vec<usize> = vec![cols.y, cols.x];
        used.extend(cols.roles.values().flatten().copied());
        used.sort_unstable();
        used.dedup();
        let slot: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &c)| (c, i + 1)).collect();
        let p = used.len() + 1;
        let mut m = DMatrix::<f64>::zeros(p, p);
        let mut v = vec![0.0; p];
        v[0] = 1.0;
        for (row, &w) in table.rows.iter().zip(&table.weights) {
            if w == 0.0 {
                continue;
            }
            for (i, &c) in used.iter().enumerate() {
                v[i + 1] = row[c];
            }
            for i in 0..p {
                let wi = w * v[i];
                for j in i..p {
                    m[(i, j)] += wi * v[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        Self { slot, m }
    }

    /// Coefficients of each target on `[1, regressors...]`, one column per
    /// target.
    fn regress(&self, targets: &[usize], regressors: &[usize], what: &str) -> Result<DMatrix<f64>> {
        let r: Vec<usize> = std::iter::once(0)
            .chain(regressors.iter().map(|c| self.slot[c]))
            .collect();
        let t: Vec<usize> = targets.iter().map(|c| self.slot[c]).collect();
        let a = DMatrix::from_fn(r.len(), r.len(), |i, j| self.m[(r[i], r[j])]);
        let b = DMatrix::from_fn(r.len(), t.len(), |i, j| self.m[(r[i], t[j])]);
        let chol = a
            .cholesky()
            .ok_or_else(|| SimulationError::Singular(what.to_string()))?;
        Ok(chol.solve(&b))
    }
}

struct LeastSquares<'a> {
    e: &'a Estimand,
    cols: Columns,
    gram: Gram,
}

impl LeastSquares<'_> {
    fn predict(coef: &DMatrix<f64>, point: &[f64]) -> Vec<f64> {
        let x = DVector::from_iterator(point.len() + 1, std::iter::once(1.0).chain(point.iter().copied()));
        (coef.transpose() * x).iter().copied().collect()
    }

    fn eval(&self, expr: &Expr, env: &mut Env) -> Result<f64> {
        match expr {
            Expr::Expectation { level, given } => {
                let mut regressors = vec![self.cols.x];
                let mut point = vec![level_value(self.e, *level)];
                if let Some(r) = given {
                    regressors.extend(&self.cols.roles[r]);
                    point.extend(&env[r]);
                }
                let coef = self.gram.regress(&[self.cols.y], &regressors, &self.e.outcome.to_string())?;
                Ok(Self::predict(&coef, &point)[0])
            }
            Expr::Sum { over, body, weight } => {
                let mean = self.mean(weight, env, *over)?;
                let saved = env.insert(*over, mean);
                let out = self.eval(body, env);
                if let Some(s) = saved {
                    env.insert(*over, s);
                }
                out
            }
            Expr::Difference(a, b) => Ok(self.eval(a, env)? - self.eval(b, env)?),
            Expr::Probability { .. } => Err(SimulationError::Unsupported(
                "a bare probability has no least-squares value".into(),
            )),
        }
    }

    /// Mean of `role` under the distribution `expr` describes.
    fn mean(&self, expr: &Expr, env: &mut Env, role: Role) -> Result<Vec<f64>> {
        match expr {
            Expr::Probability { of, level, given } if *of == role => {
                let targets = &self.cols.roles[of];
                if targets.is_empty() {
                    return Ok(Vec::new());
                }
                let mut regressors = Vec::new();
                let mut point = Vec::new();
                if let Some(l) = level {
                    regressors.push(self.cols.x);
                    point.push(level_value(self.e, *l));
                }
                if let Some(r) = given {
                    regressors.extend(&self.cols.roles[r]);
                    point.extend(&env[r]);
                }
                let coef = self.gram.regress(targets, &regressors, "the adjustment set")?;
                Ok(Self::predict(&coef, &point))
            }
            Expr::Sum { over, body, weight } => {
                let inner = self.mean(weight, env, *over)?;
                let saved = env.insert(*over, inner);
                let out = self.mean(body, env, role);
                if let Some(s) = saved {
                    env.insert(*over, s);
                }
                out
            }
            _ => Err(SimulationError::Unsupported(
                "weights must be distributions over the summed role".into(),
            )),
        }
    }
}

/// Nonparametric bootstrap standard error of the plug-in value. Replicates
/// that hit an empty cell are dropped; fewer than half surviving is an
/// error.
pub fn bootstrap_se(
    e: &Estimand,
    data: &Dataset,
    free: &BTreeMap<TemporalVertex, f64>,
    estimator: Estimator,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    let n = data.len();
    if n == 0 || replicates < 2 {
        return Err(SimulationError::Unsupported(
            "bootstrap needs data and at least two replicates".into(),
        ));
    }
    let (mut table, cell_of) = match estimator {
        Estimator::CellFrequencies => Table::aggregate(data),
        Estimator::LeastSquares => (Table::from_dataset(data), (0..n).collect()),
    };
    let mut estimates = Vec::with_capacity(replicates);
    for r in 0..replicates as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r);
        table.weights.iter_mut().for_each(|w| *w = 0.0);
        for _ in 0..n {
            table.weights[cell_of[rng.random_range(0..n)]] += 1.0;
        }
        let value = match estimator {
            Estimator::CellFrequencies => evaluate_cells(e, &table, free),
            Estimator::LeastSquares => evaluate_least_squares(e, &table, free),
        };
        match value {
            Ok(v) => estimates.push(v),
            Err(SimulationError::EmptyCell(_)) => {}
            Err(err) => return Err(err),
        }
    }
    if estimates.len() * 2 < replicates {
        return Err(SimulationError::Unsupported(format!(
            "only {} of {replicates} bootstrap replicates had every cell populated",
            estimates.len()
        )));
    }
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    Ok((estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt())
}
