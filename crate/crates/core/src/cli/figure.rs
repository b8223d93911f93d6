//! Faceted line charts rendered as standalone SVG.
//!
//! Layout: one panel per (set, n) with sets as rows and sample sizes as
//! columns; x is the intermediate odds ratio, one coloured series per outcome
//! effect (or per test, for Type-1 error of binary outcomes).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cli::output::SummaryRow;
use crate::scenario::{OutcomeKind, SetTag, EXTREME_OR, EXTREME_SD_MULTIPLE, OUTCOME_SD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bias,
    Coverage,
    Type1,
    EmpSe,
    ModSe,
    Ror,
    Missing,
}

impl Metric {
    pub const ALL: [Metric; 7] =
        [Metric::Bias, Metric::Coverage, Metric::Type1, Metric::EmpSe, Metric::ModSe, Metric::Ror, Metric::Missing];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Bias => "bias",
            Metric::Coverage => "coverage",
            Metric::Type1 => "type1",
            Metric::EmpSe => "emp_se",
            Metric::ModSe => "mod_se",
            Metric::Ror => "ror",
            Metric::Missing => "missing",
        }
    }

    fn reference(self) -> Option<f64> {
        match self {
            Metric::Coverage => Some(0.95),
            Metric::Type1 => Some(0.05),
            Metric::Ror => Some(1.0),
            _ => None,
        }
    }

    fn axis_label(self, kind: OutcomeKind) -> &'static str {
        match (self, kind) {
            (Metric::Bias, OutcomeKind::Continuous) => "Bias of mean difference (g)",
            (Metric::Bias, OutcomeKind::Binary) => "Bias of log odds ratio",
            (Metric::Coverage, _) => "Coverage of 95% CI",
            (Metric::Type1, _) => "Type 1 error (5% level)",
            (Metric::EmpSe, _) => "Empirical SE",
            (Metric::ModSe, _) => "Model SE",
            (Metric::Ror, _) => "Ratio of odds ratios (ROR)",
            (Metric::Missing, OutcomeKind::Continuous) => "Fraction of iterations inestimable",
            (Metric::Missing, OutcomeKind::Binary) => "Fraction of iterations with OR inestimable",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric \"{s}\" (expected one of bias, coverage, type1, emp_se, mod_se, ror, missing)"))
    }
}

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("summaries mix continuous and binary outcomes")]
    MixedKinds,
    #[error("metric {metric} is not computed for {kind} outcomes")]
    MetricUnavailable { metric: &'static str, kind: OutcomeKind },
    #[error("no summaries to plot")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FigureStyle {
    /// Keep the OR 5 / 5 SD grid points.
    pub include_extreme: bool,
}

const PALETTE: [&str; 12] = [
    "#e41a1c", "#4daf4a", "#377eb8", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#999999", "#66c2a5",
    "#e6ab02", "#1b9e77", "#7570b3",
];

const PANEL_W: f64 = 240.0;
const PANEL_H: f64 = 180.0;
const GAP: f64 = 24.0;
const LEFT: f64 = 78.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 56.0;
const LEGEND_W: f64 = 170.0;

fn is_extreme(row: &SummaryRow) -> bool {
    let or = row.or_intermediate;
    let extreme_or = (or - EXTREME_OR).abs() < 1e-9 || (or - 1.0 / EXTREME_OR).abs() < 1e-9;
    let extreme_effect = match row.outcome {
        OutcomeKind::Continuous => (row.effect_outcome.abs() - EXTREME_SD_MULTIPLE * OUTCOME_SD).abs() < 1e-9,
        OutcomeKind::Binary => (row.effect_outcome - EXTREME_OR).abs() < 1e-9,
    };
    extreme_or || extreme_effect
}

/// (series label, y) pairs a row contributes for a metric.
fn row_values(row: &SummaryRow, metric: Metric) -> Vec<(String, f64)> {
    let effect_label = || match row.outcome {
        OutcomeKind::Continuous => format!("{} SD", fmt_num(row.effect_outcome / OUTCOME_SD)),
        OutcomeKind::Binary => format!("OR {}", fmt_num(row.effect_outcome)),
    };
    let one = |v: Option<f64>| v.map(|y| vec![(effect_label(), y)]).unwrap_or_default();
    match metric {
        Metric::Bias => one(row.bias),
        Metric::Coverage => one(row.coverage),
        Metric::EmpSe => one(row.emp_se),
        Metric::ModSe => one(row.mod_se),
        Metric::Ror => one(row.ror),
        Metric::Missing => {
            one(Some((row.iterations - row.n_estimable) as f64 / row.iterations as f64))
        }
        Metric::Type1 => {
            if row.effect_outcome != match row.outcome {
                OutcomeKind::Continuous => 0.0,
                OutcomeKind::Binary => 1.0,
            } {
                return Vec::new();
            }
            [
                ("t-test", row.reject_t),
                ("chi-squared", row.reject_chi2),
                ("adjusted chi-squared", row.reject_chi2_adj),
                ("Fisher's exact", row.reject_fisher),
            ]
            .into_iter()
            .filter_map(|(l, v)| v.map(|y| (l.to_string(), y)))
            .collect()
        }
    }
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6 + 0.0;
    format!("{r}")
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 5);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 { lo.abs() * 0.1 } else { 0.5 };
        lo -= pad;
        hi += pad;
    } else {
        let pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

type Series = BTreeMap<String, Vec<(f64, f64)>>;

/// Renders the chart to an SVG string.
pub fn render_figure(rows: &[SummaryRow], metric: Metric, style: FigureStyle) -> Result<String, FigureError> {
    let kind = rows.first().ok_or(FigureError::Empty)?.outcome;
    if rows.iter().any(|r| r.outcome != kind) {
        return Err(FigureError::MixedKinds);
    }
    if metric == Metric::Ror && kind == OutcomeKind::Continuous {
        return Err(FigureError::MetricUnavailable { metric: metric.as_str(), kind });
    }

    // (set, n) -> series label -> points; series keyed so that effect order
    // follows the numeric effect value.
    let mut panels: BTreeMap<(SetTag, u32), Series> = BTreeMap::new();
    let mut labels: Vec<(f64, String)> = Vec::new();
    let mut sets: Vec<SetTag> = Vec::new();
    let mut sizes: Vec<u32> = Vec::new();
    for row in rows.iter().filter(|r| style.include_extreme || !is_extreme(r)) {
        if !sets.contains(&row.set) {
            sets.push(row.set);
        }
        if !sizes.contains(&row.n) {
            sizes.push(row.n);
        }
        for (i, (label, y)) in row_values(row, metric).into_iter().enumerate() {
            let order = if metric == Metric::Type1 { i as f64 } else { row.effect_outcome };
            if !labels.iter().any(|(_, l)| *l == label) {
                labels.push((order, label.clone()));
            }
            panels.entry((row.set, row.n)).or_default().entry(label).or_default().push((row.or_intermediate, y));
        }
    }
    sets.sort();
    sizes.sort_unstable();
    labels.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    if sets.is_empty() {
        return Err(FigureError::Empty);
    }

    let points = || panels.values().flat_map(|s| s.values().flatten());
    let (x_lo, x_hi) = padded_range(points().map(|p| p.0));
    let (y_lo, y_hi) = padded_range(points().map(|p| p.1).chain(metric.reference()));

    let cols = sizes.len() as f64;
    let rows_n = sets.len() as f64;
    let width = LEFT + cols * PANEL_W + (cols - 1.0) * GAP + LEGEND_W;
    let height = TOP + rows_n * PANEL_H + (rows_n - 1.0) * GAP + BOTTOM;

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">Odds ratio for treatment effect on intermediate</text>"#,
        LEFT + (width - LEFT - LEGEND_W) / 2.0,
        height - 12.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text transform="translate(16,{}) rotate(-90)" text-anchor="middle" font-size="12">{}</text>"#,
        TOP + (height - TOP - BOTTOM) / 2.0,
        escape(metric.axis_label(kind))
    )
    .unwrap();

    let colour = |label: &str| {
        let idx = labels.iter().position(|(_, l)| l == label).unwrap_or(0);
        PALETTE[idx % PALETTE.len()]
    };

    for (ri, set) in sets.iter().enumerate() {
        for (ci, n) in sizes.iter().enumerate() {
            let px = LEFT + ci as f64 * (PANEL_W + GAP);
            let py = TOP + ri as f64 * (PANEL_H + GAP);
            let sx = |x: f64| px + (x - x_lo) / (x_hi - x_lo) * PANEL_W;
            let sy = |y: f64| py + PANEL_H - (y - y_lo) / (y_hi - y_lo) * PANEL_H;
            writeln!(w, r#"<g class="panel" data-set="{set}" data-n="{n}">"#).unwrap();
            writeln!(
                w,
                r##"<rect x="{px}" y="{py}" width="{PANEL_W}" height="{PANEL_H}" fill="#f4f4f4" stroke="#888"/>"##
            )
            .unwrap();
            if ri == 0 {
                writeln!(w, r#"<text x="{}" y="{}" text-anchor="middle">n = {n}</text>"#, px + PANEL_W / 2.0, py - 8.0)
                    .unwrap();
            }
            if ci + 1 == sizes.len() {
                writeln!(
                    w,
                    r#"<text transform="translate({},{}) rotate(90)" text-anchor="middle">{}</text>"#,
                    px + PANEL_W + 10.0,
                    py + PANEL_H / 2.0,
                    match set {
                        SetTag::Set1 => "Set 1",
                        SetTag::Set2 => "Set 2",
                    }
                )
                .unwrap();
            }
            for t in ticks(y_lo, y_hi) {
                let y = sy(t);
                writeln!(w, r##"<line x1="{px}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##, px + PANEL_W).unwrap();
                if ci == 0 {
                    writeln!(w, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px - 4.0, y + 4.0, fmt_num(t))
                        .unwrap();
                }
            }
            if ri + 1 == sets.len() {
                for t in ticks(x_lo, x_hi) {
                    let x = sx(t);
                    writeln!(
                        w,
                        r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
                        py + PANEL_H + 14.0,
                        fmt_num(t)
                    )
                    .unwrap();
                }
            }
            if let Some(r) = metric.reference() {
                let y = sy(r);
                writeln!(
                    w,
                    r#"<line class="reference" data-y="{r}" x1="{px}" y1="{y}" x2="{}" y2="{y}" stroke="black" stroke-dasharray="4 3"/>"#,
                    px + PANEL_W
                )
                .unwrap();
            }
            if let Some(series) = panels.get(&(*set, *n)) {
                for (label, pts) in series {
                    let mut pts = pts.clone();
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let c = colour(label);
                    if pts.len() > 1 {
                        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", sx(x), sy(y))).collect();
                        writeln!(
                            w,
                            r#"<polyline class="series" data-label="{}" fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
                            escape(label),
                            path.join(" ")
                        )
                        .unwrap();
                    }
                    for &(x, y) in &pts {
                        writeln!(w, r#"<circle class="point" cx="{}" cy="{}" r="2" fill="{c}"/>"#, sx(x), sy(y)).unwrap();
                    }
                }
            }
            writeln!(w, "</g>").unwrap();
        }
    }

    let lx = width - LEGEND_W + 12.0;
    writeln!(w, r#"<g class="legend"><text x="{lx}" y="{}">{}</text>"#, TOP - 8.0, legend_title(metric, kind)).unwrap();
    for (i, (_, label)) in labels.iter().enumerate() {
        let y = TOP + 8.0 + i as f64 * 15.0;
        writeln!(
            w,
            r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 9.0,
            colour(label),
            lx + 15.0,
            y,
            escape(label)
        )
        .unwrap();
    }
    writeln!(w, "</g>\n</svg>").unwrap();
    Ok(svg)
}

fn legend_title(metric: Metric, kind: OutcomeKind) -> &'static str {
    match (metric, kind) {
        (Metric::Type1, _) => "Test",
        (_, OutcomeKind::Continuous) => "Effect on outcome",
        (_, OutcomeKind::Binary) => "Effect on outcome (OR)",
    }
}

pub fn emit_figure(rows: &[SummaryRow], metric: Metric, style: FigureStyle, out_path: &Path) -> Result<(), FigureError> {
    let svg = render_figure(rows, metric, style)?;
    fs::write(out_path, svg).map_err(|source| FigureError::Io { path: out_path.display().to_string(), source })
}
