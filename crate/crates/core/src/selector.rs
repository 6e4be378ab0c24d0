//! The linear example selector.
//!
//! A candidate's predicted downstream utility is a linear function of its
//! signal vector. Weights come from one of three places: an ordinary
//! least-squares fit against measured transfer accuracies (minimum-norm when
//! the system is underdetermined), the fixed deployment coefficients used by
//! the curriculum loop, or user-supplied values. Selection is a plain argmax
//! with the lowest batch index winning ties.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::min_norm_least_squares;
use crate::signals::SignalVector;

/// Deployment scoring weights for (p_s, var_r, disagreement, level).
pub const DEPLOYMENT_WEIGHTS: [f64; 4] = [0.005, 0.183, -0.075, 0.219];

/// Reference coefficients from the signal-discovery fit, for side-by-side
/// comparison with refits. The matching intercept was never published, so it
/// is zero here and the set is treated as user-supplied rather than fitted.
pub const DISCOVERY_REFERENCE_WEIGHTS: [f64; 4] = [-0.0574, -0.2511, 0.0393, 0.1095];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitError {
    #[error("selector fit needs at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("selector fit is degenerate: no feature varies but targets do")]
    FitDegenerate,
}

/// Where a model's coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Fitted,
    Deployment,
    UserSupplied,
}

/// Linear scorer over a [`SignalVector`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorModel {
    pub w_p: f64,
    pub w_sigma: f64,
    pub w_d: f64,
    pub w_level: f64,
    pub intercept: f64,
    pub source: ModelSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_r2: Option<f64>,
}

impl SelectorModel {
    /// The fixed deployment scorer:
    /// `0.005*p_s + 0.183*var_r - 0.075*d + 0.219*level`.
    pub fn deployment() -> SelectorModel {
        let [w_p, w_sigma, w_d, w_level] = DEPLOYMENT_WEIGHTS;
        SelectorModel {
            w_p,
            w_sigma,
            w_d,
            w_level,
            intercept: 0.0,
            source: ModelSource::Deployment,
            fit_r2: None,
        }
    }

    /// The discovery-fit reference coefficients (intercept unknown, zero).
    pub fn discovery_reference() -> SelectorModel {
        let [w_p, w_sigma, w_d, w_level] = DISCOVERY_REFERENCE_WEIGHTS;
        SelectorModel {
            w_p,
            w_sigma,
            w_d,
            w_level,
            intercept: 0.0,
            source: ModelSource::UserSupplied,
            fit_r2: None,
        }
    }

    pub fn weights(&self) -> [f64; 4] {
        [self.w_p, self.w_sigma, self.w_d, self.w_level]
    }

    /// Predicted downstream transfer for one candidate's signals.
    pub fn predict(&self, s: &SignalVector) -> f64 {
        self.w_p * s.p_s
            + self.w_sigma * s.var_r
            + self.w_d * s.disagreement
            + self.w_level * f64::from(s.level)
            + self.intercept
    }

    /// A deployment-tagged model must carry exactly the deployment weights;
    /// fitted models must carry their diagnostics.
    pub fn validate(&self) -> Result<(), String> {
        let finite = self
            .weights()
            .iter()
            .chain([&self.intercept])
            .all(|w| w.is_finite());
        if !finite {
            return Err("selector weights must be finite".to_string());
        }
        if self.source == ModelSource::Deployment
            && (self.weights() != DEPLOYMENT_WEIGHTS || self.intercept != 0.0)
        {
            return Err("deployment-tagged model has non-deployment weights".to_string());
        }
        if self.source == ModelSource::Fitted && self.fit_r2.is_none() {
            return Err("fitted model is missing fit_r2".to_string());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selector model serializes")
    }

    pub fn from_json(text: &str) -> Result<SelectorModel, String> {
        let model: SelectorModel =
            serde_json::from_str(text).map_err(|e| format!("selector JSON: {e}"))?;
        model.validate()?;
        Ok(model)
    }
}

/// Score under the fixed deployment coefficients.
pub fn deployment_score(s: &SignalVector) -> f64 {
    SelectorModel::deployment().predict(s)
}

/// One observation for fitting: signals plus measured downstream accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub signals: SignalVector,
    pub a_down: f64,
}

fn design_row(s: &SignalVector) -> [f64; 4] {
    [s.p_s, s.var_r, s.disagreement, f64::from(s.level)]
}

struct ColumnFit {
    weights: Vec<f64>,
    intercept: f64,
    r2: f64,
    predictions: Vec<f64>,
}

/// Center the selected columns and targets, solve by minimum-norm least
/// squares, and fold the means back into the intercept.
fn fit_columns(records: &[TransferRecord], columns: &[usize]) -> Result<ColumnFit, FitError> {
    let n = records.len();
    let rows: Vec<[f64; 4]> = records.iter().map(|r| design_row(&r.signals)).collect();
    let targets: Vec<f64> = records.iter().map(|r| r.a_down).collect();
    let target_mean = targets.iter().sum::<f64>() / n as f64;

    let mut col_means = vec![0.0; columns.len()];
    for (slot, &c) in col_means.iter_mut().zip(columns) {
        *slot = rows.iter().map(|r| r[c]).sum::<f64>() / n as f64;
    }
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            columns
                .iter()
                .zip(&col_means)
                .map(|(&c, m)| r[c] - m)
                .collect()
        })
        .collect();
    let centered_targets: Vec<f64> = targets.iter().map(|t| t - target_mean).collect();

    let design_scale: f64 = centered
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0, |m, x| m.max(x.abs()));
    let target_scale: f64 = centered_targets.iter().fold(0.0, |m, x| m.max(x.abs()));
    const CONST_EPS: f64 = 1e-12;
    if design_scale <= CONST_EPS {
        // Nothing varies in the design. With constant targets the
        // intercept-only model is exact; with varying targets no linear
        // model can say anything and the fit is rejected.
        if target_scale <= CONST_EPS {
            return Ok(ColumnFit {
                weights: vec![0.0; columns.len()],
                intercept: target_mean,
                r2: 1.0,
                predictions: vec![target_mean; n],
            });
        }
        return Err(FitError::FitDegenerate);
    }

    let weights = min_norm_least_squares(&centered, &centered_targets);
    let intercept = target_mean
        - weights
            .iter()
            .zip(&col_means)
            .map(|(w, m)| w * m)
            .sum::<f64>();
    let predictions: Vec<f64> = rows
        .iter()
        .map(|r| {
            intercept
                + columns
                    .iter()
                    .zip(&weights)
                    .map(|(&c, w)| r[c] * w)
                    .sum::<f64>()
        })
        .collect();
    let sse: f64 = predictions
        .iter()
        .zip(&targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let sst: f64 = centered_targets.iter().map(|t| t * t).sum();
    let r2 = if sst <= 1e-30 {
        if sse <= 1e-24 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - sse / sst
    };
    Ok(ColumnFit {
        weights,
        intercept,
        r2,
        predictions,
    })
}

/// Ordinary least squares over all four signals; minimum-norm when the
/// centered system is underdetermined, so refits are reproducible and
/// constant features never pick up spurious weight.
pub fn fit_selector(records: &[TransferRecord]) -> Result<SelectorModel, FitError> {
    if records.len() < 2 {
        return Err(FitError::TooFewRecords {
            needed: 2,
            got: records.len(),
        });
    }
    let fit = fit_columns(records, &[0, 1, 2, 3])?;
    Ok(SelectorModel {
        w_p: fit.weights[0],
        w_sigma: fit.weights[1],
        w_d: fit.weights[2],
        w_level: fit.weights[3],
        intercept: fit.intercept,
        source: ModelSource::Fitted,
        fit_r2: Some(fit.r2),
    })
}

/// Predicted transfer under an explicit model (alias for `model.predict`).
pub fn predict_transfer(model: &SelectorModel, s: &SignalVector) -> f64 {
    model.predict(s)
}

/// Index of the highest-scoring candidate; ties break to the lowest index.
/// `None` only for an empty batch.
pub fn select_candidate(batch: &[SignalVector], model: &SelectorModel) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, signals) in batch.iter().enumerate() {
        let score = model.predict(signals);
        match best {
            Some((_, top)) if score <= top => {}
            _ => best = Some((i, score)),
        }
    }
    best.map(|(i, _)| i)
}

/// Which signal a leave-one-out refit removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    SuccessProbability,
    RewardVariance,
    Disagreement,
    Level,
}

pub const ALL_FEATURES: [Feature; 4] = [
    Feature::SuccessProbability,
    Feature::RewardVariance,
    Feature::Disagreement,
    Feature::Level,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDrop {
    pub feature: Feature,
    /// In-sample R-squared of the refit; absent when the refit is degenerate.
    pub r2: Option<f64>,
    /// Spearman rank correlation of refit predictions vs targets.
    pub rank_corr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaveOneOutReport {
    pub full_r2: f64,
    pub full_rank_corr: Option<f64>,
    pub drops: Vec<FeatureDrop>,
}

/// Refit without each signal in turn and report in-sample R-squared and the
/// Spearman rank correlation between refit predictions and targets.
pub fn leave_one_out_contribution(
    records: &[TransferRecord],
) -> Result<LeaveOneOutReport, FitError> {
    if records.len() < 3 {
        return Err(FitError::TooFewRecords {
            needed: 3,
            got: records.len(),
        });
    }
    let targets: Vec<f64> = records.iter().map(|r| r.a_down).collect();
    let full = fit_columns(records, &[0, 1, 2, 3])?;
    let full_rank_corr = spearman(&full.predictions, &targets);
    let mut drops = Vec::with_capacity(4);
    for (drop_idx, feature) in ALL_FEATURES.into_iter().enumerate() {
        let kept: Vec<usize> = (0..4).filter(|&c| c != drop_idx).collect();
        match fit_columns(records, &kept) {
            Ok(fit) => drops.push(FeatureDrop {
                feature,
                r2: Some(fit.r2),
                rank_corr: spearman(&fit.predictions, &targets),
            }),
            Err(_) => drops.push(FeatureDrop {
                feature,
                r2: None,
                rank_corr: None,
            }),
        }
    }
    Ok(LeaveOneOutReport {
        full_r2: full.r2,
        full_rank_corr,
        drops,
    })
}

/// Average ranks (ties share the mean rank), 1-based. Values within a
/// relative 1e-9 of the group's smallest member count as tied, so float
/// noise from an interpolating fit does not split ranks that targets share.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let anchor = values[order[i]];
        let tol = 1e-12 + 1e-9 * anchor.abs();
        let mut j = i;
        while j + 1 < order.len() && (values[order[j + 1]] - anchor).abs() <= tol {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman correlation with average-rank tie handling. `None` when either
/// side has zero rank variance.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}
