//! Certificate emission. A certificate echoes the parsed input, carries the
//! command's results in a deterministic shape, and serializes to stable
//! bytes: struct field order, ordered maps, no floats, no timestamps.

use serde::Serialize;

use jacobel_core::abel::{FiberRecord, PushforwardDescriptor, Stratum};
use jacobel_core::curve::{ModifiedCurve, NodalCurve};
use jacobel_core::selftest::SelftestReport;
use jacobel_core::stability::StabilityReport;
use jacobel_core::twister::{QuasistableTwist, TwisterDifferenceResult};

use crate::document::CurveDocument;

#[derive(Serialize)]
pub struct Certificate<R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<CurveDocument>,
    pub results: R,
    pub summary: String,
}

impl<R: Serialize> Certificate<R> {
    pub fn new(command: &str, input: Option<CurveDocument>, results: R, summary: String) -> Self {
        Certificate {
            tool: "jacobel",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            input,
            results,
            summary,
        }
    }

    pub fn emit(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("serializable certificate");
        text.push('\n');
        text
    }
}

fn component_names(curve: &NodalCurve, members: &[usize]) -> Vec<String> {
    members
        .iter()
        .map(|&k| curve.component(k).name.clone())
        .collect()
}

fn node_names(curve: &NodalCurve, nodes: &[usize]) -> Vec<String> {
    nodes.iter().map(|&n| curve.node(n).name.clone()).collect()
}

#[derive(Serialize)]
pub struct WitnessDto {
    pub subcurve: Vec<String>,
    pub beta: String,
}

#[derive(Serialize)]
pub struct BetaRowDto {
    pub subcurve: Vec<String>,
    pub beta: String,
}

#[derive(Serialize)]
pub struct ReportDto {
    pub verdict: String,
    pub expected_total: i64,
    pub actual_total: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_table: Option<Vec<BetaRowDto>>,
}

pub fn report_dto(curve: &NodalCurve, report: &StabilityReport) -> ReportDto {
    ReportDto {
        verdict: report.verdict.as_str().to_owned(),
        expected_total: report.expected_total,
        actual_total: report.actual_total,
        witness: report.witness.as_ref().map(|w| WitnessDto {
            subcurve: component_names(curve, &w.members),
            beta: w.beta.to_string(),
        }),
        beta_table: report.beta_table.as_ref().map(|rows| {
            rows.iter()
                .map(|(members, beta)| BetaRowDto {
                    subcurve: component_names(curve, members),
                    beta: beta.to_string(),
                })
                .collect()
        }),
    }
}

#[derive(Serialize)]
pub struct ValidateResults {
    pub components: usize,
    pub nodes: usize,
    pub reducible_nodes: usize,
    pub irreducible_nodes: usize,
    pub genus: i64,
    pub polarization_rank: i64,
    pub polarization_degree: i64,
    pub slope: i64,
    pub line_bundle_degree: i64,
    pub expected_line_bundle_degree: i64,
    pub degree_ok: bool,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
pub struct StabilityResults {
    /// The classified multidegree, in component order.
    pub multidegree: Vec<i64>,
    /// True when the class is the document default: the moving class at the
    /// marked component, twisted to quasistability.
    pub default_class: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist_coefficients: Option<Vec<i64>>,
    pub report: ReportDto,
}

#[derive(Serialize)]
pub struct TwistDto {
    pub component: String,
    pub coefficients: Vec<i64>,
    pub twister_multidegree: Vec<i64>,
    pub twisted_class: Vec<i64>,
    pub iterations: u32,
    pub via_fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_agrees: Option<bool>,
}

pub fn twist_dto(
    curve: &NodalCurve,
    component: usize,
    twist: &QuasistableTwist,
    oracle_agrees: Option<bool>,
) -> TwistDto {
    TwistDto {
        component: curve.component(component).name.clone(),
        coefficients: twist.coefficients.clone(),
        twister_multidegree: jacobel_core::twister::twister_multidegree(
            curve,
            &twist.coefficients,
        )
        .degrees()
        .to_vec(),
        twisted_class: twist.twisted.degrees().to_vec(),
        iterations: twist.iterations,
        via_fallback: twist.via_fallback,
        oracle_agrees,
    }
}

#[derive(Serialize)]
pub struct DifferenceDto {
    pub from_component: String,
    pub to_component: String,
    pub intermediate: Vec<i64>,
    pub subcurve: Vec<String>,
    pub source: String,
    pub tie_candidates: u32,
    pub corrected: Vec<i64>,
}

pub fn difference_dto(curve: &NodalCurve, diff: &TwisterDifferenceResult) -> DifferenceDto {
    DifferenceDto {
        from_component: curve.component(diff.i).name.clone(),
        to_component: curve.component(diff.j).name.clone(),
        intermediate: diff.intermediate.degrees().to_vec(),
        subcurve: component_names(curve, &diff.subcurve),
        source: diff.source.as_str().to_owned(),
        tie_candidates: diff.tie_candidates,
        corrected: diff.corrected.degrees().to_vec(),
    }
}

#[derive(Serialize)]
pub struct TwisterResults {
    pub per_component: Vec<TwistDto>,
    pub differences: Vec<DifferenceDto>,
}

#[derive(Serialize)]
pub struct PushforwardDto {
    pub multidegree: Vec<i64>,
    pub noninvertible_nodes: Vec<String>,
    pub total: i64,
    pub canonical: bool,
}

pub fn pushforward_dto(base: &NodalCurve, push: &PushforwardDescriptor) -> PushforwardDto {
    PushforwardDto {
        multidegree: push.degrees.clone(),
        noninvertible_nodes: node_names(base, &push.noninvertible_nodes),
        total: push.total,
        canonical: push.is_canonical(),
    }
}

#[derive(Serialize)]
pub struct RecordDto {
    pub stratum: String,
    pub kind: String,
    pub fiber: String,
    pub fiber_components: Vec<String>,
    pub limit: Vec<i64>,
    pub corrected: Vec<i64>,
    pub admissibility: String,
    pub pushforward: PushforwardDto,
    pub stability: ReportDto,
}

pub fn fiber_label(curve: &NodalCurve, stratum: Stratum) -> &'static str {
    match stratum {
        Stratum::Smooth(_) => "C",
        Stratum::Node(r) => {
            if curve.node(r).is_reducible() {
                "C(1)"
            } else {
                "C_R"
            }
        }
    }
}

pub fn record_dto(curve: &NodalCurve, record: &FiberRecord) -> RecordDto {
    let fiber: &ModifiedCurve = &record.fiber;
    RecordDto {
        stratum: record.stratum_name(),
        kind: match record.stratum {
            Stratum::Smooth(_) => "smooth".to_owned(),
            Stratum::Node(_) => "node".to_owned(),
        },
        fiber: fiber_label(curve, record.stratum).to_owned(),
        fiber_components: fiber
            .curve()
            .components()
            .iter()
            .map(|c| c.name.clone())
            .collect(),
        limit: record.limit.degrees().to_vec(),
        corrected: record.corrected.degrees().to_vec(),
        admissibility: record.admissibility.as_str().to_owned(),
        pushforward: pushforward_dto(curve, &record.pushforward),
        stability: report_dto(fiber.curve(), &record.stability),
    }
}

#[derive(Serialize)]
pub struct SweepDto {
    pub assignments_checked: u64,
    pub identical: bool,
}

#[derive(Serialize)]
pub struct OracleDto {
    pub twists_checked: u64,
    pub agree: bool,
}

#[derive(Serialize)]
pub struct AbelResults {
    pub records: Vec<RecordDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_choices: Option<SweepDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDto>,
}

#[derive(Serialize)]
pub struct EnumerateResults {
    pub total_degree: i64,
    pub twister_classes: i128,
    pub semistable: Vec<Vec<i64>>,
    pub quasistable: Vec<Vec<i64>>,
}

#[derive(Serialize)]
pub struct CriterionDto {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    pub failures: Vec<String>,
}

#[derive(Serialize)]
pub struct SelftestResults {
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionDto>,
}

pub fn selftest_results(report: &SelftestReport) -> SelftestResults {
    SelftestResults {
        seed: report.seed,
        passed: report.passed(),
        criteria: report
            .outcomes
            .iter()
            .map(|o| CriterionDto {
                id: o.id,
                name: o.name.to_owned(),
                passed: o.passed,
                checks: o.checks,
                failures: o.failures.clone(),
            })
            .collect(),
    }
}

/// `name:value` pairs for a multidegree on a curve, for the human tables.
pub fn degree_line(curve: &NodalCurve, degrees: &[i64]) -> String {
    curve
        .components()
        .iter()
        .zip(degrees)
        .map(|(c, d)| format!("{}:{}", c.name, d))
        .collect::<Vec<_>>()
        .join(" ")
}
