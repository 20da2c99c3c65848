//! Evasion/matching metrics over verification outcomes, and the group
//! comparison statistics (Welch's two-sample t-test) used by the bias and
//! adversarial-training studies.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{student_t_sf, NumericsError};
use crate::vendor::VerificationOutcome;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("outcome list is empty")]
    EmptyOutcomes,
    #[error("outcome set mixes anti-deepfake-applicable and inapplicable results")]
    MixedApplicability,
    #[error("each sample needs at least two observations")]
    TooFewSamples,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The four per-stage rates over one outcome set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    /// Requirement (if demanded) plus presentation/quality/coherence checks.
    pub liveness_evasion_rate: f64,
    /// 1.0 by convention when the vendor has no anti-deepfake detection.
    pub anti_deepfake_evasion_rate: f64,
    pub face_matching_rate: f64,
    /// All applicable stages passed simultaneously.
    pub overall_evasion_rate: f64,
    pub anti_deepfake_applicable: bool,
}

impl MetricsReport {
    /// One line of an aligned percent table.
    pub fn to_table_row(&self, label: &str) -> String {
        let anti = if self.anti_deepfake_applicable {
            format!("{:>6.1}%", self.anti_deepfake_evasion_rate * 100.0)
        } else {
            format!("{:>7}", "-")
        };
        format!(
            "{label:<16} {:>6.1}% {anti} {:>6.1}% {:>6.1}%",
            self.liveness_evasion_rate * 100.0,
            self.face_matching_rate * 100.0,
            self.overall_evasion_rate * 100.0,
        )
    }

    pub fn table_header(label: &str) -> String {
        format!(
            "{label:<16} {:>7} {:>7} {:>7} {:>7}",
            "live", "anti", "face", "overall"
        )
    }
}

/// Computes the four rates. `require_requirement` folds the voice/action
/// requirement into the liveness rate (it is vacuously met for image and
/// silence submissions).
pub fn compute_metrics(
    outcomes: &[VerificationOutcome],
    require_requirement: bool,
) -> Result<MetricsReport, AnalysisError> {
    if outcomes.is_empty() {
        return Err(AnalysisError::EmptyOutcomes);
    }
    let applicable = outcomes[0].anti_deepfake_pass.is_some();
    if outcomes
        .iter()
        .any(|o| o.anti_deepfake_pass.is_some() != applicable)
    {
        return Err(AnalysisError::MixedApplicability);
    }
    let n = outcomes.len();
    let liveness_ok =
        |o: &VerificationOutcome| (!require_requirement || o.requirement_met) && o.liveness_pass;
    let anti_ok = |o: &VerificationOutcome| o.anti_deepfake_pass.unwrap_or(true);
    let face_ok = |o: &VerificationOutcome| o.face_match_pass.unwrap_or(false);

    let rate = |pred: &dyn Fn(&VerificationOutcome) -> bool| {
        outcomes.iter().filter(|o| pred(o)).count() as f64 / n as f64
    };
    Ok(MetricsReport {
        n,
        liveness_evasion_rate: rate(&liveness_ok),
        anti_deepfake_evasion_rate: if applicable { rate(&anti_ok) } else { 1.0 },
        face_matching_rate: rate(&face_ok),
        overall_evasion_rate: rate(&|o| liveness_ok(o) && anti_ok(o) && face_ok(o)),
        anti_deepfake_applicable: applicable,
    })
}

/// Welch's unequal-variance two-sample t-test, two-sided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom (real-valued).
    pub dof: f64,
    pub p: f64,
    /// Both samples had zero variance; t and p are defined by convention.
    pub degenerate: bool,
}

pub fn welch_t_test(xs: &[f64], ys: &[f64]) -> Result<WelchTest, AnalysisError> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(AnalysisError::TooFewSamples);
    }
    let nx = xs.len() as f64;
    let ny = ys.len() as f64;
    let mx = xs.iter().sum::<f64>() / nx;
    let my = ys.iter().sum::<f64>() / ny;
    let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / (nx - 1.0);
    let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / (ny - 1.0);
    if vx == 0.0 && vy == 0.0 {
        return Ok(WelchTest {
            t: 0.0,
            dof: nx + ny - 2.0,
            p: if mx == my { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let sx = vx / nx;
    let sy = vy / ny;
    let se2 = sx + sy;
    let t = (mx - my) / se2.sqrt();
    let dof = se2 * se2 / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
    let p = (2.0 * student_t_sf(t.abs(), dof)?).min(1.0);
    Ok(WelchTest {
        t,
        dof,
        p,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub test: WelchTest,
    pub significant_05: bool,
    pub significant_01: bool,
}

impl From<WelchTest> for MetricComparison {
    fn from(test: WelchTest) -> Self {
        MetricComparison {
            significant_05: test.p < 0.05,
            significant_01: test.p < 0.01,
            test,
        }
    }
}

/// Two-group comparison: per-group rates plus t-tests on the per-sample
/// pass indicators of the liveness and anti-deepfake stages. The overall
/// rate carries no test of its own (it is a product of the others).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub labels: [String; 2],
    pub groups: [MetricsReport; 2],
    pub liveness: MetricComparison,
    pub anti_deepfake: Option<MetricComparison>,
}

pub fn compare_groups(
    outcomes_a: &[VerificationOutcome],
    outcomes_b: &[VerificationOutcome],
    label_a: &str,
    label_b: &str,
) -> Result<GroupComparison, AnalysisError> {
    let report_a = compute_metrics(outcomes_a, true)?;
    let report_b = compute_metrics(outcomes_b, true)?;
    let liveness_ind = |os: &[VerificationOutcome]| -> Vec<f64> {
        os.iter()
            .map(|o| f64::from(o.requirement_met && o.liveness_pass))
            .collect()
    };
    let liveness = welch_t_test(&liveness_ind(outcomes_a), &liveness_ind(outcomes_b))?.into();
    let anti_deepfake = if report_a.anti_deepfake_applicable && report_b.anti_deepfake_applicable {
        let ind = |os: &[VerificationOutcome]| -> Vec<f64> {
            os.iter()
                .map(|o| f64::from(o.anti_deepfake_pass == Some(true)))
                .collect()
        };
        Some(welch_t_test(&ind(outcomes_a), &ind(outcomes_b))?.into())
    } else {
        None
    };
    Ok(GroupComparison {
        labels: [label_a.to_string(), label_b.to_string()],
        groups: [report_a, report_b],
        liveness,
        anti_deepfake,
    })
}

impl GroupComparison {
    /// Aligned text block: one row per group, p-values in scientific
    /// notation, rates as percentages.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>7} {:>10} {:>7} {:>10} {:>8}\n",
            "group", "live", "P(live)", "anti", "P(anti)", "overall"
        ));
        for (i, label) in self.labels.iter().enumerate() {
            let g = &self.groups[i];
            let p_live = if i == 0 {
                format!("{:.3e}", self.liveness.test.p)
            } else {
                String::new()
            };
            let (anti_rate, p_anti) = match (&self.anti_deepfake, g.anti_deepfake_applicable) {
                (Some(c), true) => (
                    format!("{:>6.1}%", g.anti_deepfake_evasion_rate * 100.0),
                    if i == 0 {
                        format!("{:.3e}", c.test.p)
                    } else {
                        String::new()
                    },
                ),
                _ => (format!("{:>7}", "-"), String::new()),
            };
            out.push_str(&format!(
                "{:<12} {:>6.1}% {:>10} {anti_rate} {:>10} {:>7.1}%\n",
                label,
                g.liveness_evasion_rate * 100.0,
                p_live,
                p_anti,
                g.overall_evasion_rate * 100.0,
            ));
        }
        out
    }
}
