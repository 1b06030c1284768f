//! Batch driver running every checker over a matrix of presets and exponents.

use crate::boundary::{BoundarySpec, Preset};
use crate::ellipticity::{classify, Classification, GridOptions, Sense};
use crate::error::{Error, Result};
use crate::extension::{DiskField, ExtensionOptions};
use crate::norms::{Exponent, NormOptions};
use crate::verify::{
    run_counterexample, run_statement_many, EllipticConstants, StatementId, VerificationReport,
    VerifyOptions,
};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub truncation: usize,
    /// Per-point tail tolerance of the series extension.
    pub tol: f64,
    pub levels: usize,
    /// Angles on the coarsest ellipticity grid.
    pub angular: usize,
    pub seed: u64,
    pub presets: Vec<Preset>,
    pub exponents: Vec<Exponent>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            truncation: ExtensionOptions::default().truncation,
            tol: ExtensionOptions::default().tail_tolerance,
            levels: 12,
            angular: GridOptions::default().base_angles,
            seed: 42,
            presets: Preset::catalogue(),
            exponents: vec![
                Exponent::Finite(1.0),
                Exponent::Finite(1.5),
                Exponent::Finite(2.0),
                Exponent::Finite(3.0),
                Exponent::Infinity,
            ],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.presets.is_empty() {
            return Err(Error::Config("preset list is empty".into()));
        }
        if self.exponents.is_empty() {
            return Err(Error::Config("exponent list is empty".into()));
        }
        if self.truncation == 0
            || self.levels == 0
            || self.angular == 0
            || self.tol.is_nan()
            || self.tol <= 0.0
        {
            return Err(Error::Config(
                "truncation, levels, angular resolution and tolerance must be positive".into(),
            ));
        }
        for p in &self.exponents {
            p.validate()?;
        }
        Ok(())
    }

    pub fn extension_options(&self) -> ExtensionOptions {
        ExtensionOptions {
            truncation: self.truncation,
            tail_tolerance: self.tol,
            ..ExtensionOptions::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            norm: NormOptions {
                levels: self.levels,
                ..NormOptions::default()
            },
            grid: GridOptions {
                levels: self.levels,
                base_angles: self.angular,
            },
            seed: self.seed,
            ..VerifyOptions::default()
        }
    }
}

/// A checker that could not produce a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteError {
    pub statement_id: StatementId,
    pub boundary: String,
    pub p: Option<Exponent>,
    pub error: String,
    pub numerical: bool,
}

/// A (statement, boundary) combination left out, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub statement_id: StatementId,
    pub boundary: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub degraded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub pass: bool,
    pub summary: BTreeMap<StatementId, Summary>,
    pub reports: Vec<VerificationReport>,
    pub errors: Vec<SuiteError>,
    pub skipped: Vec<Skipped>,
}

impl SuiteReport {
    pub fn degraded_count(&self) -> usize {
        self.reports.iter().filter(|r| r.degraded).count()
    }

    /// True when any checker failed for numerical rather than mathematical
    /// reasons.
    pub fn has_numerical_errors(&self) -> bool {
        self.errors.iter().any(|e| e.numerical)
    }
}

/// One checker on one preset over a list of exponents.
struct Job {
    id: StatementId,
    preset: usize,
    ps: Vec<Exponent>,
    constants: EllipticConstants,
}

/// Ellipticity constants for the `thm2` checkers, or the reason to skip.
fn suite_constants(
    field: &DiskField,
    grid: &GridOptions,
) -> std::result::Result<EllipticConstants, String> {
    let report = match classify(field, &[1.0], grid) {
        Ok(r) => r,
        Err(Error::SenseViolation { z, jacobian }) => {
            return Err(format!(
                "not sense-preserving on the grid (J = {jacobian:e} at {z})"
            ))
        }
        Err(e) => return Err(e.to_string()),
    };
    if report.sense != Sense::Preserving {
        return Err("not sense-preserving on the grid".into());
    }
    Ok(match report.classification {
        Some(Classification::Quasiregular { k, .. }) => EllipticConstants {
            k: Some(k),
            kprime: None,
        },
        _ => EllipticConstants {
            k: Some(1.0),
            kprime: None,
        },
    })
}

pub fn run_suite(config: &RunConfig) -> Result<SuiteReport> {
    config.validate()?;
    let opts = config.verify_options();
    let fields: Vec<DiskField> = config
        .presets
        .iter()
        .map(|&p| DiskField::new(BoundarySpec::preset(p), config.extension_options()))
        .collect::<Result<_>>()?;

    let finite: Vec<Exponent> = config
        .exponents
        .iter()
        .copied()
        .filter(|p| !p.is_infinite())
        .collect();
    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    let none = EllipticConstants::default();
    for (i, field) in fields.iter().enumerate() {
        let job = |id, ps: &[Exponent], constants| Job {
            id,
            preset: i,
            ps: ps.to_vec(),
            constants,
        };
        jobs.push(job(StatementId::LemmaFt, &config.exponents, none));
        if !finite.is_empty() {
            jobs.push(job(StatementId::LemmaFr, &finite, none));
            jobs.push(job(StatementId::Thm1Bergman, &finite, none));
        }
        match suite_constants(field, &opts.grid) {
            Ok(constants) => {
                if !finite.is_empty() {
                    jobs.push(job(StatementId::Thm2FiniteP, &finite, constants));
                }
                if config.exponents.iter().any(|p| p.is_infinite()) {
                    jobs.push(job(
                        StatementId::Thm2InfiniteP,
                        &[Exponent::Infinity],
                        constants,
                    ));
                }
            }
            Err(reason) => {
                for id in [StatementId::Thm2FiniteP, StatementId::Thm2InfiniteP] {
                    skipped.push(Skipped {
                        statement_id: id,
                        boundary: field.spec().label(),
                        reason: reason.clone(),
                    });
                }
            }
        }
    }

    let outcomes = crate::par::map(&jobs, |job| {
        run_statement_many(job.id, &fields[job.preset], &job.ps, job.constants, &opts)
    });
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(r) => reports.extend(r),
            Err(e) => errors.push(SuiteError {
                statement_id: job.id,
                boundary: fields[job.preset].spec().label(),
                p: (job.ps.len() == 1).then(|| job.ps[0]),
                numerical: e.is_numerical(),
                error: e.to_string(),
            }),
        }
    }
    match run_counterexample(&opts) {
        Ok(r) => reports.push(r),
        Err(e) => errors.push(SuiteError {
            statement_id: StatementId::Thm1Counterexample,
            boundary: "abs-sin".into(),
            p: Some(Exponent::Infinity),
            numerical: e.is_numerical(),
            error: e.to_string(),
        }),
    }
    // Stable order: by statement, then by job order.
    reports.sort_by_key(|r| r.statement_id);
    errors.sort_by_key(|e| e.statement_id);

    let mut summary: BTreeMap<StatementId, Summary> = BTreeMap::new();
    for r in &reports {
        let s = summary.entry(r.statement_id).or_default();
        s.total += 1;
        if r.pass {
            s.passed += 1;
        } else {
            s.failed += 1;
        }
        if r.degraded {
            s.degraded += 1;
        }
    }
    for e in &errors {
        let s = summary.entry(e.statement_id).or_default();
        s.total += 1;
        s.errors += 1;
    }
    let pass = errors.is_empty() && reports.iter().all(|r| r.pass);
    Ok(SuiteReport {
        config: config.clone(),
        pass,
        summary,
        reports,
        errors,
        skipped,
    })
}
