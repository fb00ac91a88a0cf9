//! Plain-text and CSV rendering of analysis, training, and evaluation
//! output. Everything here writes to strings so commands stay testable.

use std::fmt::Write as _;

use gtseer_core::checkin::{CorrelationReport, Dataset};
use gtseer_core::metrics::EvalReport;
use gtseer_core::model::HyperParams;
use gtseer_core::trainer::TrainReport;

/// `key=value` lines for the resolved configuration, printed before any
/// command runs so logs capture what actually executed.
pub fn config_echo(hyper: &HyperParams, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").unwrap();
    kv("variant", hyper.variant.to_string());
    kv("dim", hyper.dim.to_string());
    kv("window", hyper.window.to_string());
    kv("negatives", hyper.negatives.to_string());
    kv("candidates", hyper.candidates.to_string());
    kv("alpha", hyper.alpha.to_string());
    kv("beta", hyper.beta.to_string());
    kv("distance_km", hyper.distance_km.to_string());
    kv("epochs", hyper.epochs.to_string());
    kv("seed", hyper.seed.to_string());
    for (k, v) in extra {
        kv(k, v.clone());
    }
    out
}

pub fn dataset_summary(ds: &Dataset) -> String {
    let mut out = String::new();
    writeln!(out, "users={}", ds.n_users()).unwrap();
    writeln!(out, "pois={}", ds.n_pois()).unwrap();
    writeln!(out, "checkins={}", ds.n_checkins()).unwrap();
    writeln!(out, "sequences={}", ds.sequences.len()).unwrap();
    let lens: Vec<usize> = ds.sequences.iter().map(|s| s.pois.len()).collect();
    if !lens.is_empty() {
        let mean = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
        writeln!(out, "mean_sequence_len={mean:.3}").unwrap();
        writeln!(out, "max_sequence_len={}", lens.iter().max().unwrap()).unwrap();
    }
    out
}

pub fn correlation_summary(report: &CorrelationReport) -> String {
    let fmt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.6}"),
        None => "n/a".to_string(),
    };
    let mut out = String::new();
    writeln!(out, "mean_sequence_pair_jaccard={}", fmt(report.mean_sequence_pair)).unwrap();
    writeln!(out, "mean_random_pair_jaccard={}", fmt(report.mean_random_pair)).unwrap();
    writeln!(out, "mean_consecutive_jaccard={}", fmt(report.mean_consecutive)).unwrap();
    writeln!(out, "mean_nonconsecutive_jaccard={}", fmt(report.mean_nonconsecutive)).unwrap();
    out
}

/// Day-by-hour check-in histogram as CSV, Monday first.
pub fn histogram_csv(hist: &[[u64; 24]; 7]) -> String {
    const DAYS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];
    let mut out = String::from("day");
    for h in 0..24 {
        write!(out, ",h{h:02}").unwrap();
    }
    out.push('\n');
    for (d, row) in hist.iter().enumerate() {
        write!(out, "{}", DAYS[d]).unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn train_summary(report: &TrainReport) -> String {
    let mut out = String::new();
    writeln!(out, "epochs_run={}", report.epochs_run).unwrap();
    writeln!(out, "context_updates={}", report.counts.context).unwrap();
    writeln!(out, "negative_updates={}", report.counts.negative).unwrap();
    writeln!(out, "preference_updates={}", report.counts.preference).unwrap();
    writeln!(out, "wall_secs={:.3}", report.wall_secs).unwrap();
    for (i, obj) in report.epoch_objective.iter().enumerate() {
        writeln!(out, "epoch_{}_objective={obj:.6}", i + 1).unwrap();
    }
    out
}

/// `metric,N,value` rows for every requested cutoff.
pub fn eval_csv(report: &EvalReport) -> String {
    let mut out = String::from("metric,N,value\n");
    for (i, &n) in report.ns.iter().enumerate() {
        writeln!(out, "precision,{n},{:.6}", report.precision[i]).unwrap();
    }
    for (i, &n) in report.ns.iter().enumerate() {
        writeln!(out, "recall,{n},{:.6}", report.recall[i]).unwrap();
    }
    writeln!(out, "users_evaluated,,{}", report.users_evaluated).unwrap();
    writeln!(out, "users_skipped,,{}", report.users_skipped).unwrap();
    out
}

/// Side-by-side table for several named evaluation runs sharing the same
/// cutoffs.
pub fn comparison_table(runs: &[(&str, &EvalReport)]) -> String {
    let mut out = String::from("metric,N");
    for (name, _) in runs {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    if runs.is_empty() {
        return out;
    }
    let ns = &runs[0].1.ns;
    for metric in ["precision", "recall"] {
        for (i, &n) in ns.iter().enumerate() {
            write!(out, "{metric},{n}").unwrap();
            for (_, r) in runs {
                let v = if metric == "precision" { r.precision[i] } else { r.recall[i] };
                write!(out, ",{v:.6}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}
