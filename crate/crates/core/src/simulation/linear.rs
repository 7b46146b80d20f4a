//! Population moments of linear-Gaussian models and refitting a different
//! structure to them.

use nalgebra::{DMatrix, DVector};

use super::{Equation, Family, Model, ModelSpec, NoiseLaw, Override, ParentRef, SimulationError};
use crate::temporal::TemporalVertex;

type Result<T> = std::result::Result<T, SimulationError>;

fn require_linear(model: &Model) -> Result<()> {
    if model.family() != Family::Linear {
        return Err(SimulationError::Unsupported("moments need a linear model".into()));
    }
    Ok(())
}

/// Mean vector and covariance matrix over the model's vertices.
pub fn moments(model: &Model) -> Result<(DVector<f64>, DMatrix<f64>)> {
    require_linear(model)?;
    let n = model.vertices().len();
    let mut b = DMatrix::<f64>::zeros(n, n);
    let mut c = DVector::<f64>::zeros(n);
    let mut omega = DMatrix::<f64>::zeros(n, n);
    for (i, node) in model.nodes.iter().enumerate() {
        if let super::Node::Linear {
            intercept,
            terms,
            sd,
        } = node
        {
            c[i] = *intercept;
            for &(p, coef) in terms {
                b[(i, p)] += coef;
            }
            omega[(i, i)] += sd * sd;
        }
    }
    for g in &model.groups {
        for &(i, li) in &g.members {
            for &(j, lj) in &g.members {
                omega[(i, j)] += li * lj * g.sd * g.sd;
            }
        }
    }
    // Acyclic equations make I - B invertible.
    let inv = (DMatrix::<f64>::identity(n, n) - b)
        .try_inverse()
        .ok_or_else(|| SimulationError::Singular("structural equations".into()))?;
    let mean = &inv * c;
    let cov = &inv * omega * inv.transpose();
    Ok((mean, cov))
}

/// Population least-squares coefficients of `target` on
/// `[1, regressors...]`.
pub fn population_regression(
    model: &Model,
    target: &TemporalVertex,
    regressors: &[TemporalVertex],
) -> Result<Vec<f64>> {
    let (mean, cov) = moments(model)?;
    let t = model.index_of(target)?;
    let r: Vec<usize> = regressors.iter().map(|v| model.index_of(v)).collect::<Result<_>>()?;
    let (beta, _) = regress(&mean, &cov, t, &r)?;
    let intercept = mean[t] - r.iter().zip(&beta).map(|(&i, b)| b * mean[i]).sum::<f64>();
    Ok(std::iter::once(intercept).chain(beta).collect())
}

/// Slopes and residual variance of `t` on `r` under `(mean, cov)`.
fn regress(_mean: &DVector<f64>, cov: &DMatrix<f64>, t: usize, r: &[usize]) -> Result<(Vec<f64>, f64)> {
    if r.is_empty() {
        return Ok((Vec::new(), cov[(t, t)]));
    }
    let srr = DMatrix::from_fn(r.len(), r.len(), |i, j| cov[(r[i], r[j])]);
    let srt = DVector::from_fn(r.len(), |i, _| cov[(r[i], t)]);
    let beta = srr
        .cholesky()
        .ok_or_else(|| SimulationError::Singular("population covariance".into()))?
        .solve(&srt);
    let resid = cov[(t, t)] - srt.dot(&beta);
    Ok((beta.iter().copied().collect(), resid))
}

/// Fit the equations of `template` (its parent sets, not its coefficients)
/// to a mean and covariance over the same vertices. Every vertex gets its
/// own override, so the result need not be stationary.
pub fn refit(template: &ModelSpec, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<Model> {
    if !template.shared_noise.is_empty() {
        return Err(SimulationError::Unsupported(
            "refitting needs independent noise".into(),
        ));
    }
    let skeleton = Model::new(template.clone())?;
    require_linear(&skeleton)?;
    if cov.nrows() != skeleton.vertices().len() {
        return Err(SimulationError::InvalidModel("covariance has the wrong dimension".into()));
    }
    let mut overrides = Vec::new();
    for (i, v) in skeleton.vertices().iter().enumerate() {
        let super::Node::Linear { terms, .. } = &skeleton.nodes[i] else {
            unreachable!("checked linear")
        };
        let parents: Vec<usize> = terms.iter().map(|t| t.0).collect();
        let (beta, resid) = regress(mean, cov, i, &parents)?;
        if !(resid > 0.0) {
            return Err(SimulationError::Singular(v.to_string()));
        }
        let intercept = mean[i] - parents.iter().zip(&beta).map(|(&p, b)| b * mean[p]).sum::<f64>();
        let refs = parents
            .iter()
            .zip(&beta)
            .map(|(&p, &coef)| {
                let pv = &skeleton.vertices()[p];
                ParentRef {
                    series: pv.series.clone(),
                    lag: (v.time - pv.time) as u32,
                    coef: Some(coef),
                }
            })
            .collect();
        overrides.push(Override {
            series: v.series.clone(),
            time: v.time,
            equation: Equation::Linear {
                intercept,
                parents: refs,
                noise: NoiseLaw::Gaussian { sd: resid.sqrt() },
            },
        });
    }
    let mut spec = template.clone();
    spec.overrides = overrides;
    Model::new(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(reversed: bool) -> ModelSpec {
        let (a, b) = if reversed { ("Y", "X") } else { ("X", "Y") };
        serde_json::from_value(serde_json::json!({
            "series": ["X", "Y"], "window": [0, 0], "gamma_max": 0,
            "equations": {
                a: {"type": "linear", "parents": [], "noise": {"law": "gaussian", "sd": 1.0}},
                b: {"type": "linear", "intercept": 1.0, "parents": [{"series": a, "lag": 0, "coef": 2.0}],
                    "noise": {"law": "gaussian", "sd": 0.5}}
            }
        }))
        .unwrap()
    }

    #[test]
    fn moments_of_a_pair() {
        let m = Model::new(spec(false)).unwrap();
        let (mean, cov) = moments(&m).unwrap();
        assert!((mean[1] - 1.0).abs() < 1e-12);
        assert!((cov[(0, 1)] - 2.0).abs() < 1e-12);
        assert!((cov[(1, 1)] - 4.25).abs() < 1e-12);
    }

    #[test]
    fn reversed_refit_preserves_moments() {
        let m = Model::new(spec(false)).unwrap();
        let (mean, cov) = moments(&m).unwrap();
        let r = refit(&spec(true), &mean, &cov).unwrap();
        let (mean2, cov2) = moments(&r).unwrap();
        assert!((mean - mean2).amax() < 1e-12);
        assert!((cov - cov2).amax() < 1e-12);
    }

    #[test]
    fn shared_noise_enters_covariance() {
        let s: ModelSpec = serde_json::from_value(serde_json::json!({
            "series": ["X", "Y"], "window": [0, 0], "gamma_max": 0,
            "equations": {
                "X": {"type": "linear", "parents": []},
                "Y": {"type": "linear", "parents": []}
            },
            "shared_noise": [{"id": "u", "sd": 2.0, "members": [
                {"series": "X"}, {"series": "Y", "loading": 0.5}]}]
        }))
        .unwrap();
        let (_, cov) = moments(&Model::new(s).unwrap()).unwrap();
        assert!((cov[(0, 1)] - 2.0).abs() < 1e-12);
        assert!((cov[(0, 0)] - 5.0).abs() < 1e-12);
    }
}
