//! Global failure-budget estimate for a full computation:
//!
//! `p_fail = N_ops · N_logical · [ (p/p_th)^(√N_c/2) + p_s·N_c ]`
//!
//! The first bracket term is the QEC suppression of correctable errors,
//! the second the linear accumulation of silent stabilizer failures.
//! The estimate carries prefactor 1 throughout; outputs are
//! order-of-magnitude figures, not guarantees. The exponent uses
//! √N_c/2 as printed for the surface code; a repetition-code variant
//! with exponent N_c/2 is available as a toggle.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BudgetError {
    #[error("parameter {name} must be at least 1, got {value}")]
    CountTooSmall { name: &'static str, value: f64 },
    #[error("parameter {name} must be in (0, 1], got {value}")]
    BadProbability { name: &'static str, value: f64 },
    #[error("target budget must be in (0, 1], got {0}")]
    BadTarget(f64),
    #[error("code-size range is empty")]
    EmptyRange,
}

/// Which code family sets the QEC suppression exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentForm {
    /// Exponent √N_c / 2.
    Surface,
    /// Exponent N_c / 2.
    Repetition,
}

impl ExponentForm {
    fn exponent(self, n_code: f64) -> f64 {
        match self {
            ExponentForm::Surface => n_code.sqrt() / 2.0,
            ExponentForm::Repetition => n_code / 2.0,
        }
    }
}

/// Inputs of the budget formula.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct BudgetParams {
    /// N_#: number of logical operations in the computation.
    pub n_ops: f64,
    /// N_L: number of logical qubits.
    pub n_logical: f64,
    /// N_c: physical qubits per logical qubit.
    pub n_code: f64,
    /// Physical error probability per qubit per cycle.
    pub p: f64,
    /// Threshold probability.
    pub p_th: f64,
    /// Silent-failure probability per stabilizer per window.
    pub p_s: f64,
}

impl BudgetParams {
    pub fn validate(&self) -> Result<(), BudgetError> {
        for (name, value) in [
            ("n-ops", self.n_ops),
            ("n-logical", self.n_logical),
            ("n-code", self.n_code),
        ] {
            if value < 1.0 || !value.is_finite() {
                return Err(BudgetError::CountTooSmall { name, value });
            }
        }
        for (name, value) in [("p", self.p), ("p-th", self.p_th)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(BudgetError::BadProbability { name, value });
            }
        }
        if !(0.0..=1.0).contains(&self.p_s) {
            return Err(BudgetError::BadProbability {
                name: "p-s",
                value: self.p_s,
            });
        }
        Ok(())
    }
}

/// Budget evaluation broken into its two mechanisms.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BudgetReport {
    /// (p/p_th)^(exponent), before the N_#·N_L prefactor.
    pub qec_term: f64,
    /// p_s·N_c, before the prefactor.
    pub silent_term: f64,
    /// N_#·N_L·(qec_term + silent_term).
    pub p_fail: f64,
    /// log10 of the QEC term, kept exact even when the term itself
    /// underflows to zero.
    pub log10_qec_term: f64,
    /// p_fail above 1: the computation is expected to fail.
    pub exceeded: bool,
    /// p > p_th: the QEC term grows with code size instead of shrinking.
    pub above_threshold: bool,
}

/// Evaluates the failure budget. The QEC power is computed in log space
/// so that deeply suppressed terms report a finite log10 instead of
/// rounding through subnormals.
pub fn failure_budget(params: &BudgetParams, form: ExponentForm) -> Result<BudgetReport, BudgetError> {
    params.validate()?;
    let exponent = form.exponent(params.n_code);
    let log10_qec = exponent * (params.p / params.p_th).log10();
    let qec_term = 10f64.powf(log10_qec);
    let silent_term = params.p_s * params.n_code;
    let p_fail = params.n_ops * params.n_logical * (qec_term + silent_term);
    Ok(BudgetReport {
        qec_term,
        silent_term,
        p_fail,
        log10_qec_term: log10_qec,
        exceeded: p_fail > 1.0,
        above_threshold: params.p > params.p_th,
    })
}

/// Largest admissible silent-failure rate for a target budget.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RequiredPs {
    pub p_s: f64,
    /// False when the QEC term alone already exceeds the target.
    pub feasible: bool,
}

/// Inverts the budget for p_s:
/// `p_s = (target/(N_#·N_L) − qec_term) / N_c`. `params.p_s` is ignored.
pub fn required_ps(
    params: &BudgetParams,
    target: f64,
    form: ExponentForm,
) -> Result<RequiredPs, BudgetError> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(BudgetError::BadTarget(target));
    }
    let report = failure_budget(
        &BudgetParams {
            p_s: 0.0,
            ..*params
        },
        form,
    )?;
    let headroom = target / (params.n_ops * params.n_logical) - report.qec_term;
    if headroom <= 0.0 {
        return Ok(RequiredPs {
            p_s: 0.0,
            feasible: false,
        });
    }
    Ok(RequiredPs {
        p_s: headroom / params.n_code,
        feasible: true,
    })
}

/// Budget curve over a code-size range and its minimiser.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OptimalNc {
    pub best_n_code: u32,
    pub best_p_fail: f64,
    pub curve: Vec<(u32, f64)>,
}

/// Scans integer code sizes and returns the argmin of the budget. With
/// p_s = 0 the budget decreases monotonically (below threshold), so the
/// optimum sits at the top of the range; any p_s > 0 eventually turns
/// the curve around.
pub fn optimal_nc(
    params: &BudgetParams,
    range: std::ops::RangeInclusive<u32>,
    form: ExponentForm,
) -> Result<OptimalNc, BudgetError> {
    if range.is_empty() {
        return Err(BudgetError::EmptyRange);
    }
    let mut curve = Vec::new();
    let mut best: Option<(u32, f64)> = None;
    for n_code in range {
        let report = failure_budget(
            &BudgetParams {
                n_code: f64::from(n_code),
                ..*params
            },
            form,
        )?;
        curve.push((n_code, report.p_fail));
        let better = match best {
            None => true,
            Some((_, b)) => report.p_fail < b,
        };
        if better {
            best = Some((n_code, report.p_fail));
        }
    }
    let (best_n_code, best_p_fail) = best.expect("range checked non-empty");
    Ok(OptimalNc {
        best_n_code,
        best_p_fail,
        curve,
    })
}
