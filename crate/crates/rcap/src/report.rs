//! CSV emitters for evaluation comparisons and suite grids.

use rcap_core::evaluate::ComparisonRow;
use rcap_core::solver::{SolveError, SuiteRun};

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9}")).unwrap_or_default()
}

/// One line per compared allocation: label, objective (empty when some
/// incidents go unanswered), covered part, and the uncovered count.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("label,objective,covered_objective,uncovered\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.9},{}\n",
            row.label,
            fmt_opt(row.objective),
            row.covered_objective,
            row.uncovered_count,
        ));
    }
    out
}

/// One line per suite run. Failed runs keep their grid position with an
/// error tag so the seed-by-variant table stays rectangular.
pub fn suite_csv(seed: u64, runs: &[Result<SuiteRun, SolveError>]) -> String {
    let mut out = String::from(
        "seed,variant,zones,status,objective,bound,full_resolution_objective,nodes,wall_time_s\n",
    );
    for run in runs {
        match run {
            Ok(run) => {
                let full = run
                    .full_resolution
                    .as_ref()
                    .and_then(|o| o.objective());
                out.push_str(&format!(
                    "{},{},{},{},{},{:.9},{},{},{:.3}\n",
                    seed,
                    run.variant.name(),
                    run.zone_count,
                    run.report.status.name(),
                    fmt_opt(run.report.objective),
                    run.report.bound,
                    fmt_opt(full),
                    run.report.nodes,
                    run.report.wall_time_s,
                ));
            }
            Err(err) => {
                out.push_str(&format!("{seed},,,error:{err:?},,,,,\n"));
            }
        }
    }
    out
}
