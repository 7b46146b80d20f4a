//! Exact rational computation for tabular models: joint laws under
//! intervention, interventional means and counterfactual direct effects.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Family, Model, Node, SimulationError};
use crate::identification::EffectQuery;
use crate::temporal::TemporalVertex;

type Result<T> = std::result::Result<T, SimulationError>;

/// Largest number of joint states or exogenous cells enumerated.
pub const STATE_LIMIT: u128 = 1_000_000;

/// The decimal a float prints as, read exactly: `0.3` becomes `3/10`.
pub fn rational(x: f64) -> BigRational {
    let text = x.to_string();
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    let numer: BigInt = format!("{whole}{frac}").parse().expect("finite value");
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    if negative {
        -r
    } else {
        r
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rows of a table as exact probabilities; the last entry of each row is
/// one minus the others so rows sum to one exactly.
fn exact_rows(table: &[Vec<f64>]) -> Vec<Vec<BigRational>> {
    table
        .iter()
        .map(|row| {
            let mut r: Vec<BigRational> = row[..row.len() - 1].iter().map(|&p| rational(p)).collect();
            let rest = r.iter().fold(BigRational::one(), |acc, p| acc - p);
            r.push(rest);
            r
        })
        .collect()
}

fn require_tabular(model: &Model) -> Result<()> {
    if model.family() != Family::Tabular {
        return Err(SimulationError::Unsupported(
            "exact computation needs a tabular model".into(),
        ));
    }
    Ok(())
}

struct Compiled {
    /// `(parents, exact rows)` per vertex.
    nodes: Vec<(Vec<(Option<usize>, usize)>, Vec<Vec<BigRational>>, usize)>,
}

impl Compiled {
    fn new(model: &Model) -> Self {
        let nodes = model
            .nodes
            .iter()
            .map(|n| match n {
                Node::Tabular {
                    parents,
                    table,
                    card,
                    ..
                } => (parents.clone(), exact_rows(table), *card),
                Node::Linear { .. } => unreachable!("checked tabular"),
            })
            .collect();
        Self { nodes }
    }

    fn row(&self, v: usize, values: &[usize]) -> usize {
        self.nodes[v]
            .0
            .iter()
            .fold(0, |acc, &(p, card)| acc * card + p.map_or(0, |i| values[i]))
    }
}

/// The joint law of all vertices under `do(assignments)` as
/// `(values, probability)` rows with positive probability, values in model
/// vertex order.
pub fn joint(
    model: &Model,
    assignments: &BTreeMap<TemporalVertex, f64>,
) -> Result<Vec<(Vec<f64>, BigRational)>> {
    require_tabular(model)?;
    let fixed = model.interventions(assignments)?;
    let c = Compiled::new(model);
    let states: u128 = (0..c.nodes.len())
        .filter(|&i| fixed[i].is_none())
        .map(|i| c.nodes[i].2 as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX);
    if states > STATE_LIMIT {
        return Err(SimulationError::TooLarge(states, STATE_LIMIT));
    }
    let mut out = Vec::new();
    let mut values = vec![0usize; c.nodes.len()];
    walk(model, &c, &fixed, 0, BigRational::one(), &mut values, &mut out);
    Ok(out)
}

fn walk(
    model: &Model,
    c: &Compiled,
    fixed: &[Option<f64>],
    depth: usize,
    p: BigRational,
    values: &mut Vec<usize>,
    out: &mut Vec<(Vec<f64>, BigRational)>,
) {
    if depth == model.order.len() {
        out.push((values.iter().map(|&v| v as f64).collect(), p));
        return;
    }
    let v = model.order[depth];
    if let Some(x) = fixed[v] {
        values[v] = x as usize;
        walk(model, c, fixed, depth + 1, p, values, out);
        return;
    }
    let row = c.row(v, values);
    for k in 0..c.nodes[v].2 {
        let q = &c.nodes[v].1[row][k];
        if q.is_zero() {
            continue;
        }
        values[v] = k;
        walk(model, c, fixed, depth + 1, &p * q, values, out);
    }
}

/// Exact `E[target | do(assignments)]`.
pub fn interventional_mean(
    model: &Model,
    target: &TemporalVertex,
    assignments: &BTreeMap<TemporalVertex, f64>,
) -> Result<BigRational> {
    let t = model.index_of(target)?;
    Ok(joint(model, assignments)?
        .into_iter()
        .fold(BigRational::zero(), |acc, (vals, p)| {
            acc + p * BigRational::from_integer(BigInt::from(vals[t] as i64))
        }))
}

/// Exact controlled direct effect with `Z` held at `z` (missing entries 0).
pub fn cde(model: &Model, q: &EffectQuery, z: &BTreeMap<TemporalVertex, f64>) -> Result<BigRational> {
    let y = q.outcome_vertex();
    let hi = interventional_mean(model, &y, &model.cde_assignments(q, z, q.x_prime)?)?;
    let lo = interventional_mean(model, &y, &model.cde_assignments(q, z, q.x)?)?;
    Ok(hi - lo)
}

/// Exact natural direct effect by integrating over the exogenous uniforms.
///
/// Each vertex's uniform is cut at every cumulative probability of its
/// table; within a cell every equation returns the same category, so the
/// effect is a finite sum over products of cells weighted by cell widths.
pub fn nde(model: &Model, q: &EffectQuery) -> Result<BigRational> {
    require_tabular(model)?;
    let c = Compiled::new(model);
    let y = model.index_of(&q.outcome_vertex())?;
    let x = model.index_of(&q.treatment_vertex())?;
    model.interventions(&BTreeMap::from([(q.treatment_vertex(), q.x)]))?;
    model.interventions(&BTreeMap::from([(q.treatment_vertex(), q.x_prime)]))?;
    let mediators: Vec<usize> = model
        .mediator_set(q)?
        .iter()
        .map(|v| model.index_of(v))
        .collect::<Result<_>>()?;

    // Per vertex: cell widths and, per cell, the category chosen in each row.
    let mut widths: Vec<Vec<BigRational>> = Vec::new();
    let mut choice: Vec<Vec<Vec<usize>>> = Vec::new();
    for (_, rows, _) in &c.nodes {
        let mut cuts: Vec<BigRational> = vec![BigRational::zero(), BigRational::one()];
        let cumulative: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| {
                let mut acc = BigRational::zero();
                r.iter()
                    .map(|p| {
                        acc += p;
                        acc.clone()
                    })
                    .collect()
            })
            .collect();
        for cum in &cumulative {
            cuts.extend(cum.iter().cloned());
        }
        cuts.sort();
        cuts.dedup();
        let mut w = Vec::new();
        let mut ch = Vec::new();
        for pair in cuts.windows(2) {
            let (lo, hi) = (&pair[0], &pair[1]);
            w.push(hi - lo);
            ch.push(
                cumulative
                    .iter()
                    .map(|cum| {
                        cum.iter()
                            .position(|cp| cp > lo)
                            .unwrap_or(cum.len() - 1)
                    })
                    .collect(),
            );
        }
        widths.push(w);
        choice.push(ch);
    }
    let cells: u128 = widths
        .iter()
        .map(|w| w.len() as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX);
    if cells > STATE_LIMIT {
        return Err(SimulationError::TooLarge(cells, STATE_LIMIT));
    }

    let n = c.nodes.len();
    let solve = |cell: &[usize], fixed: &[Option<usize>]| -> Vec<usize> {
        let mut values = vec![0usize; n];
        for &v in &model.order {
            values[v] = match fixed[v] {
                Some(k) => k,
                None => choice[v][cell[v]][c.row(v, &values)],
            };
        }
        values
    };

    let xv = q.x as usize;
    let xpv = q.x_prime as usize;
    let mut base = vec![None; n];
    base[x] = Some(xv);
    let mut total = BigRational::zero();
    let mut cell = vec![0usize; n];
    loop {
        let weight = cell
            .iter()
            .enumerate()
            .fold(BigRational::one(), |acc, (v, &k)| acc * &widths[v][k]);
        let world = solve(&cell, &base);
        let mut cross = base.clone();
        cross[x] = Some(xpv);
        for &m in &mediators {
            cross[m] = Some(world[m]);
        }
        let diff = solve(&cell, &cross)[y] as i64 - world[y] as i64;
        if diff != 0 {
            total += weight * BigRational::from_integer(BigInt::from(diff));
        }
        // odometer over cells
        let mut i = 0;
        loop {
            if i == n {
                return Ok(total);
            }
            cell[i] += 1;
            if cell[i] < widths[i].len() {
                break;
            }
            cell[i] = 0;
            i += 1;
        }
    }
}

/// `p/q (≈ decimal)` rendering.
pub fn render(r: &BigRational) -> String {
    if r.denom().is_one() {
        return r.numer().to_string();
    }
    let approx = to_f64(r);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{}/{} (≈ {approx:.6})", r.numer().abs(), r.denom())
}
