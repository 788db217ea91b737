//! Text and structured (JSON) rendering of verdicts.

use blochsep::criteria::{Evidence, Outcome, Verdict};
use blochsep::horn::HornReport;
use serde::Serialize;

pub const REPORT_SCHEMA: &str = "blochsep-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct CriterionJson {
    pub name: &'static str,
    pub outcome: &'static str,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub note: String,
}

#[derive(Debug, Serialize)]
pub struct HornJson {
    pub feasible: bool,
    pub worst_margin: f64,
    pub inequalities: usize,
    pub violated: Vec<String>,
    pub determinant_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub schema: &'static str,
    pub version: u32,
    pub path: String,
    pub dims: [usize; 2],
    pub status: String,
    pub exit_code: i32,
    pub evidence: String,
    pub criteria: Vec<CriterionJson>,
    pub normal_form_iterations: Option<usize>,
    pub normal_form_converged: Option<bool>,
    pub components: Option<usize>,
    pub decomposition_file: Option<String>,
    pub horn: Option<HornJson>,
}

pub fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Violated => "violated",
        Outcome::Satisfied => "satisfied",
        Outcome::Constructed => "constructed",
        Outcome::NotApplicable => "not-applicable",
    }
}

pub fn evidence_line(v: &Verdict) -> String {
    match &v.evidence {
        Evidence::Decomposition(d) => format!("decomposition with {} components", d.len()),
        Evidence::Violation { criterion, margin } => format!("{criterion} violated by {margin:.6e}"),
        Evidence::Undecided { horn: Some(h) } => {
            format!("no criterion decided; uniform-weight Horn check feasible={}", h.feasible)
        }
        Evidence::Undecided { horn: None } => "no criterion decided".to_string(),
    }
}

fn horn_json(h: &HornReport) -> HornJson {
    HornJson {
        feasible: h.feasible,
        worst_margin: h.worst_margin,
        inequalities: h.inequalities,
        violated: h.violated.iter().map(|t| t.to_string()).collect(),
        determinant_gap: h.determinant.gap,
    }
}

pub fn structured(
    path: &str,
    dims: (usize, usize),
    v: &Verdict,
    exit_code: i32,
    decomposition_file: Option<String>,
) -> ReportJson {
    let horn = match &v.evidence {
        Evidence::Undecided { horn: Some(h) } => Some(horn_json(h)),
        _ => None,
    };
    ReportJson {
        schema: REPORT_SCHEMA,
        version: REPORT_VERSION,
        path: path.to_string(),
        dims: [dims.0, dims.1],
        status: v.status.to_string(),
        exit_code,
        evidence: evidence_line(v),
        criteria: v
            .records
            .iter()
            .map(|r| CriterionJson {
                name: r.criterion.name(),
                outcome: outcome_name(r.outcome),
                value: r.value,
                bound: r.bound,
                margin: r.margin,
                note: r.note.clone(),
            })
            .collect(),
        normal_form_iterations: v.normal_form_iterations,
        normal_form_converged: v.normal_form_converged,
        components: v.decomposition().map(|d| d.len()),
        decomposition_file,
        horn,
    }
}

pub fn text(path: &str, dims: (usize, usize), v: &Verdict, decomposition_file: Option<&str>) -> String {
    let mut out = format!("{path}: {} ({}x{})\n", v.status, dims.0, dims.1);
    for r in &v.records {
        out.push_str(&format!(
            "  {:<18} {:<14} value {:>13.6e}  bound {:>13.6e}  margin {:>14.6e}",
            r.criterion.name(),
            outcome_name(r.outcome),
            r.value,
            r.bound,
            r.margin
        ));
        if !r.note.is_empty() {
            out.push_str(&format!("  ({})", r.note));
        }
        out.push('\n');
    }
    if let (Some(it), Some(conv)) = (v.normal_form_iterations, v.normal_form_converged) {
        out.push_str(&format!("  normal form: {} after {it} iterations\n", if conv { "converged" } else { "not converged" }));
    }
    out.push_str(&format!("  evidence: {}\n", evidence_line(v)));
    if let Some(f) = decomposition_file {
        out.push_str(&format!("  decomposition written to {f}\n"));
    }
    out
}
