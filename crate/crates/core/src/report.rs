//! Cross-trial summaries and report files.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::metrics::TrialReport;

pub const DEFAULT_BINS: usize = 50;

/// Equal-width histogram over `[lo, hi]`; the top edge falls in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins >= 1 && hi > lo, "need at least one bin and hi > lo");
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    pub fn from_values(lo: f64, hi: f64, bins: usize, values: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Histogram::new(lo, hi, bins);
        values.into_iter().for_each(|v| h.add(v));
        h
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, v: f64) {
        let bins = self.bins();
        let pos = ((v - self.lo) / (self.hi - self.lo) * bins as f64).floor();
        let idx = if pos.is_nan() || pos < 0.0 { 0 } else { (pos as usize).min(bins - 1) };
        self.counts[idx] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.bins(), other.bins());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        let width = (self.hi - self.lo) / self.bins() as f64;
        (0..=self.bins()).map(|i| self.lo + width * i as f64).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 for a single trial.
    pub std: f64,
    pub histogram: Histogram,
}

impl MetricSummary {
    pub fn from_values(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MetricSummary {
            mean,
            std,
            histogram: Histogram::from_values(lo, hi, bins, values.iter().copied()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub voted_coverage: MetricSummary,
    pub aggregated_coverage: MetricSummary,
    pub true_coverage: Option<MetricSummary>,
    /// Histogram spans `[0, classes]`.
    pub inefficiency: MetricSummary,
}

/// Mean, standard deviation and histograms of every metric. Coverage
/// histograms span `[0, 1]`.
pub fn summarize(reports: &[TrialReport], classes: usize, bins: usize) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::EmptySample);
    }
    let pick = |f: fn(&TrialReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    let true_values: Option<Vec<f64>> = reports.iter().map(|r| r.true_coverage).collect();
    Ok(Summary {
        trials: reports.len(),
        voted_coverage: MetricSummary::from_values(&pick(|r| r.voted_coverage), 0.0, 1.0, bins),
        aggregated_coverage: MetricSummary::from_values(&pick(|r| r.aggregated_coverage), 0.0, 1.0, bins),
        true_coverage: true_values.map(|v| MetricSummary::from_values(&v, 0.0, 1.0, bins)),
        inefficiency: MetricSummary::from_values(&pick(|r| r.inefficiency), 0.0, classes.max(1) as f64, bins),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportFormat {
    /// Also write SVG bar charts next to the CSV histograms.
    pub svg: bool,
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Writes `trials.csv`, `summary.txt`, `histograms.csv`, and optionally
/// SVG charts, into `dir`. Returns the written paths.
pub fn emit_report(
    dir: &Path,
    reports: &[TrialReport],
    summary: &Summary,
    p_values: Option<&Histogram>,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::EmptySample);
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("trials.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    writeln!(out, "trial,voted_coverage,aggregated_coverage,true_coverage,inefficiency")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.trial,
            format_float(r.voted_coverage),
            format_float(r.aggregated_coverage),
            opt(r.true_coverage),
            format_float(r.inefficiency)
        )?;
    }
    out.flush()?;
    written.push(path);

    let path = dir.join("summary.txt");
    std::fs::write(&path, summary_text(summary))?;
    written.push(path);

    let mut named: Vec<(&str, &Histogram)> = vec![
        ("voted_coverage", &summary.voted_coverage.histogram),
        ("aggregated_coverage", &summary.aggregated_coverage.histogram),
    ];
    if let Some(t) = &summary.true_coverage {
        named.push(("true_coverage", &t.histogram));
    }
    named.push(("inefficiency", &summary.inefficiency.histogram));
    if let Some(h) = p_values {
        named.push(("p_value", h));
    }
    let path = dir.join("histograms.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    writeln!(out, "metric,bin,lower,upper,count")?;
    for (name, h) in &named {
        let edges = h.edges();
        for (i, count) in h.counts.iter().enumerate() {
            writeln!(out, "{name},{i},{},{},{count}", format_float(edges[i]), format_float(edges[i + 1]))?;
        }
    }
    out.flush()?;
    written.push(path);

    if format.svg {
        for (name, h) in &named {
            let path = dir.join(format!("{name}.svg"));
            std::fs::write(&path, histogram_svg(name, h))?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn summary_text(summary: &Summary) -> String {
    let mut text = format!("trials {}\n", summary.trials);
    let mut line = |name: &str, m: &MetricSummary| {
        writeln!(text, "{name} mean {} std {}", format_float(m.mean), format_float(m.std)).unwrap();
    };
    line("voted_coverage", &summary.voted_coverage);
    line("aggregated_coverage", &summary.aggregated_coverage);
    if let Some(t) = &summary.true_coverage {
        line("true_coverage", t);
    }
    line("inefficiency", &summary.inefficiency);
    text
}

/// A bare-bones bar chart.
pub fn histogram_svg(title: &str, h: &Histogram) -> String {
    let (width, height, pad) = (600.0, 300.0, 30.0);
    let top = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar = (width - 2.0 * pad) / h.bins() as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <text x=\"{pad}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n"
    );
    for (i, &count) in h.counts.iter().enumerate() {
        let bar_height = (height - 2.0 * pad) * count as f64 / top;
        let x = pad + bar * i as f64;
        let y = height - pad - bar_height;
        writeln!(
            svg,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{bar_height:.2}\" fill=\"steelblue\"/>",
            (bar - 1.0).max(0.5)
        )
        .unwrap();
    }
    let base = height - pad;
    writeln!(svg, "<line x1=\"{pad}\" y1=\"{base}\" x2=\"{}\" y2=\"{base}\" stroke=\"black\"/>", width - pad).unwrap();
    writeln!(svg, "<text x=\"{pad}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>", height - 10.0, format_float(h.lo)).unwrap();
    writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        width - pad,
        height - 10.0,
        format_float(h.hi)
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}
