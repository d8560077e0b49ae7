//! Serializable per-case reports.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constructions::{CaseSidecar, CaseSpec};
use crate::error::Result;
use crate::independence::{
    check_dependence, verdict, CaseContext, DependenceWitness, IndependenceCertificate, RuleSet,
    RuleStats, SigmaProfile, TraceStep, Verdict,
};
use crate::parameters::{ParameterQuadruple, RangeClass};
use crate::series::Tableau;
use crate::ENGINE_VERSION;

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Independent,
    Dependent,
    Unknown,
}

/// The case as it was run: sidecar fields plus the tableau text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseEcho {
    #[serde(flatten)]
    pub sidecar: CaseSidecar,
    pub tableau: String,
}

impl CaseEcho {
    pub fn of(case: &CaseSpec) -> Self {
        Self {
            sidecar: case.sidecar(),
            tableau: case.tableau.to_text(),
        }
    }

    pub fn to_case(&self) -> Result<CaseSpec> {
        CaseSpec::from_parts(Tableau::parse(&self.tableau)?, self.sidecar.clone())
    }
}

/// Settings that influence a report's content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    pub rules: RuleSet,
    pub budget: usize,
    pub terse: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            rules: RuleSet::all(),
            budget: 64,
            terse: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub schema_version: u32,
    pub engine_version: String,
    pub case: CaseEcho,
    pub parameters: ParameterQuadruple,
    pub range: RangeClass,
    pub family_size: usize,
    pub seed: u64,
    pub rules: RuleSet,
    pub verdict: VerdictKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<IndependenceCertificate>,
    /// Number of trace steps dropped by `--terse`.
    #[serde(default)]
    pub trace_omitted: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<DependenceWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<SigmaProfile>,
    pub rule_stats: RuleStats,
    pub timing_ms: f64,
}

impl CaseReport {
    /// Builds the graph, divisor and functions for `case`, then decides it.
    pub fn run(case: &CaseSpec, opts: &RunOptions) -> Result<Self> {
        let start = Instant::now();
        let ctx = CaseContext::new(
            case.params,
            case.tableau.clone(),
            case.long_bridges.as_ref(),
            opts.seed,
        )?;
        let v = verdict(&case.family, &ctx, &opts.rules, opts.budget)?;
        let timing_ms = start.elapsed().as_secs_f64() * 1e3;
        let (kind, certificate, witness, profile) = match v {
            Verdict::Independent(c) => (VerdictKind::Independent, Some(c), None, None),
            Verdict::Dependent(w) => (VerdictKind::Dependent, None, Some(w), None),
            Verdict::Unknown {
                certificate,
                profile,
            } => (VerdictKind::Unknown, Some(certificate), None, Some(profile)),
        };
        let rule_stats = certificate
            .as_ref()
            .map(|c| c.stats.clone())
            .unwrap_or_default();
        let mut report = Self {
            schema_version: SCHEMA_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            case: CaseEcho::of(case),
            parameters: case.params,
            range: case.params.classify_range(),
            family_size: case.family.len(),
            seed: opts.seed,
            rules: opts.rules.clone(),
            verdict: kind,
            certificate,
            trace_omitted: 0,
            witness,
            profile,
            rule_stats,
            timing_ms,
        };
        if opts.terse {
            report.truncate_trace();
        }
        Ok(report)
    }

    /// Keeps only the concluding step of the certificate trace.
    pub fn truncate_trace(&mut self) {
        if let Some(c) = &mut self.certificate {
            let before = c.trace.len();
            c.trace.retain(|s| {
                matches!(
                    s,
                    TraceStep::Contradiction { .. } | TraceStep::Trivial { .. }
                )
            });
            self.trace_omitted += before - c.trace.len();
        }
    }

    /// Same report with the wall-clock field zeroed, for comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            timing_ms: 0.0,
            ..self.clone()
        }
    }

    /// Re-checks an embedded witness against a freshly built context.
    /// Reports without a witness revalidate trivially.
    pub fn revalidate(&self) -> Result<bool> {
        let Some(w) = &self.witness else {
            return Ok(true);
        };
        let case = self.case.to_case()?;
        let ctx = CaseContext::new(
            case.params,
            case.tableau.clone(),
            case.long_bridges.as_ref(),
            self.seed,
        )?;
        check_dependence(&case.family, w, &ctx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::library_case;

    #[test]
    fn canonical_report_roundtrips() {
        let case = library_case("canonical-m3").unwrap();
        let r = CaseReport::run(&case, &RunOptions::default()).unwrap();
        assert_eq!(r.verdict, VerdictKind::Independent);
        assert_eq!(r.family_size, 10);
        let back = CaseReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.case.to_case().unwrap().family, case.family);
        assert!(r.revalidate().unwrap());
    }

    #[test]
    fn same_seed_same_report() {
        let case = library_case("canonical-m4").unwrap();
        let opts = RunOptions {
            seed: 11,
            ..RunOptions::default()
        };
        let a = CaseReport::run(&case, &opts).unwrap().without_timing();
        let b = CaseReport::run(&case, &opts).unwrap().without_timing();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn terse_keeps_conclusion() {
        let case = library_case("canonical-m3").unwrap();
        let full = CaseReport::run(&case, &RunOptions::default()).unwrap();
        let terse = CaseReport::run(
            &case,
            &RunOptions {
                terse: true,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let (f, t) = (full.certificate.unwrap(), terse.certificate.unwrap());
        assert_eq!(t.trace.len(), 1);
        assert_eq!(terse.trace_omitted, f.trace.len() - 1);
        assert_eq!(t.contradiction(), f.contradiction());
    }
}
