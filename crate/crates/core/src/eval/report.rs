//! Report artifacts: static SVG charts and CSV summaries from training
//! logs and evaluation reports. Output is plain deterministic text.

use super::EvalReport;
use crate::error::DataError;
use crate::grpo::TrainingLog;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders one or more equally-long series as polylines over their
/// index.
pub fn line_chart_svg(title: &str, y_label: &str, series: &[(&str, Vec<f64>)]) -> String {
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for (_, values) in series {
        for v in values {
            min_y = min_y.min(*v);
            max_y = max_y.max(*v);
        }
    }
    if !min_y.is_finite() || !max_y.is_finite() {
        min_y = 0.0;
        max_y = 1.0;
    }
    if (max_y - min_y).abs() < 1e-12 {
        max_y = min_y + 1.0;
    }
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x_of = |i: usize| MARGIN + plot_w * i as f64 / (n.max(2) - 1) as f64;
    let y_of = |v: f64| HEIGHT - MARGIN - plot_h * (v - min_y) / (max_y - min_y);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">step</text>\n",
        WIDTH / 2.0,
        HEIGHT - 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"10\">{}</text>\n",
        MARGIN - 44.0,
        HEIGHT - MARGIN + 4.0,
        fmt(min_y)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"10\">{}</text>\n",
        MARGIN - 44.0,
        MARGIN + 4.0,
        fmt(max_y)
    ));

    for (si, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{},{}", fmt(x_of(i)), fmt(y_of(*v))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            WIDTH - MARGIN - 150.0,
            MARGIN + 16.0 * (si + 1) as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders labeled values in [0, 1] as vertical bars.
pub fn bar_chart_svg(title: &str, bars: &[(String, f64)]) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    ));
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let n = bars.len().max(1);
    let slot_w = (WIDTH - 2.0 * MARGIN) / n as f64;
    for (i, (label, value)) in bars.iter().enumerate() {
        let h = plot_h * value.clamp(0.0, 1.0);
        let x = MARGIN + slot_w * i as f64 + slot_w * 0.15;
        let y = HEIGHT - MARGIN - h;
        let w = slot_w * 0.7;
        let color = PALETTE[i % PALETTE.len()];
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>\n",
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{label}</text>\n",
            fmt(x + w / 2.0),
            HEIGHT - MARGIN + 16.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
            fmt(x + w / 2.0),
            fmt(y - 4.0),
            fmt(*value)
        ));
    }
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    ));
    svg.push_str("</svg>\n");
    svg
}

fn write(path: &Path, content: &str) -> Result<(), DataError> {
    std::fs::write(path, content).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the report artifacts for whatever inputs are present:
/// reward/search-intensity curves and a per-step CSV from a training
/// log, accuracy bars from an evaluation report. Returns the paths
/// written.
pub fn write_report_artifacts(
    out_dir: &Path,
    training_log: Option<&TrainingLog>,
    eval_report: Option<&EvalReport>,
) -> Result<Vec<PathBuf>, DataError> {
    let mut written = Vec::new();

    if let Some(log) = training_log {
        let curves = out_dir.join("training_curves.svg");
        write(
            &curves,
            &line_chart_svg(
                "training reward and search intensity",
                "value",
                &[
                    ("mean reward", log.rewards()),
                    ("search calls per rollout", log.search_rates()),
                ],
            ),
        )?;
        written.push(curves);

        let csv_path = out_dir.join("training_summary.csv");
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| DataError::Io {
            path: csv_path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
        w.write_record(["step", "mean_reward", "search_rate", "kl", "loss", "mean_accuracy"])
            .and_then(|_| {
                for s in &log.steps {
                    w.write_record([
                        s.step.to_string(),
                        s.mean_reward.to_string(),
                        s.search_rate.to_string(),
                        s.kl.to_string(),
                        s.loss.to_string(),
                        s.mean_accuracy.to_string(),
                    ])?;
                }
                w.flush().map_err(csv::Error::from)
            })
            .map_err(|e| DataError::Io {
                path: csv_path.display().to_string(),
                source: std::io::Error::other(e),
            })?;
        written.push(csv_path);
    }

    if let Some(report) = eval_report {
        let mut bars = vec![("overall".to_string(), report.accuracy)];
        bars.extend(
            report
                .per_subset
                .iter()
                .map(|(k, v)| (k.clone(), v.accuracy)),
        );
        let path = out_dir.join("accuracy_bars.svg");
        write(&path, &bar_chart_svg("strict-grader accuracy", &bars))?;
        written.push(path);
    }

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpo::TrainStepLog;
    use std::collections::BTreeMap;

    fn log() -> TrainingLog {
        TrainingLog {
            steps: (0..10)
                .map(|i| TrainStepLog {
                    step: i,
                    mean_reward: i as f64 / 10.0,
                    search_rate: 1.0 + i as f64 / 20.0,
                    kl: 0.01,
                    loss: -0.1,
                    mean_accuracy: i as f64 / 10.0,
                    bonus_paid: 0.0,
                    kl_sampled: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn artifacts_exist_and_are_nonempty() {
        let dir = tempfile::tempdir().unwrap();
        let report = EvalReport {
            accuracy: 0.5,
            avg_search_rounds: 1.5,
            avg_search_queries: 3.0,
            per_subset: BTreeMap::new(),
            n: 4,
            runs: 1,
        };
        let written = write_report_artifacts(dir.path(), Some(&log()), Some(&report)).unwrap();
        assert_eq!(written.len(), 3);
        for path in written {
            let meta = std::fs::metadata(&path).unwrap();
            assert!(meta.len() > 0, "{} empty", path.display());
        }
    }

    #[test]
    fn charts_are_deterministic() {
        let a = line_chart_svg("t", "y", &[("s", vec![0.0, 0.5, 1.0])]);
        let b = line_chart_svg("t", "y", &[("s", vec![0.0, 0.5, 1.0])]);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let svg = line_chart_svg("t", "y", &[("s", vec![0.7; 5])]);
        assert!(!svg.contains("NaN"));
    }
}
