//! Grouped bar charts as standalone SVG 1.1.
//!
//! Groups are typically devices (or device + problem size), bars are
//! variants. Time charts carry the naive time above each group and the
//! speedup over naive above every other bar; utilization charts cap the axis
//! at 1 and mark bars that exceed it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{ReportError, RunRecord, Suite};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartMetric {
    /// Seconds.
    Time,
    /// Bytes per second, drawn in GB/s.
    Bandwidth,
    /// Dimensionless, axis capped at 1.
    Utilization,
}

impl ChartMetric {
    fn axis_label(self) -> &'static str {
        match self {
            ChartMetric::Time => "time, s",
            ChartMetric::Bandwidth => "bandwidth, GB/s",
            ChartMetric::Utilization => "memory bandwidth utilization",
        }
    }

    fn scale(self, v: f64) -> f64 {
        match self {
            ChartMetric::Bandwidth => v / 1e9,
            _ => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: String,
    pub value: f64,
    /// Speedup over the naive variant, printed above the bar.
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarGroup {
    pub label: String,
    /// Naive time in seconds, printed above the group.
    pub naive_time: Option<f64>,
    pub bars: Vec<Bar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub metric: ChartMetric,
    pub groups: Vec<BarGroup>,
}

/// Three significant figures, e.g. `12.3`, `0.00456`, `1230`.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = |v: f64| 2 - v.abs().log10().floor() as i32;
    let d = digits(x);
    let scale = 10f64.powi(d);
    let rounded = (x * scale).round() / scale;
    let d = digits(rounded);
    if d > 0 {
        format!("{:.*}", d as usize, rounded)
    } else {
        format!("{rounded:.0}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

/// Rounds `v` up to 1, 2, 2.5 or 5 times a power of ten.
fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let p = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * p >= v {
            return m * p;
        }
    }
    10.0 * p
}

impl ChartSpec {
    fn validate(&self) -> Result<(), ReportError> {
        if self.groups.is_empty() {
            return Err(ReportError::Render(format!("chart '{}' has no groups", self.title)));
        }
        for g in &self.groups {
            if g.bars.is_empty() {
                return Err(ReportError::Render(format!("group '{}' has no bars", g.label)));
            }
            if let Some(t) = g.naive_time {
                if !t.is_finite() {
                    return Err(ReportError::Render(format!("group '{}': naive time is not finite", g.label)));
                }
            }
            for b in &g.bars {
                if !b.value.is_finite() || b.value < 0.0 {
                    return Err(ReportError::Render(format!(
                        "record '{}' in group '{}': value {} is not a finite non-negative number",
                        b.label, g.label, b.value
                    )));
                }
                if let Some(s) = b.speedup {
                    if !s.is_finite() {
                        return Err(ReportError::Render(format!(
                            "record '{}' in group '{}': speedup is not finite",
                            b.label, g.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn bar_count(&self) -> usize {
        self.groups.iter().map(|g| g.bars.len()).sum()
    }

    /// Time chart for one suite: one group per (device, problem size), bars
    /// in record order, speedups taken from the records.
    pub fn time_chart(title: impl Into<String>, suite: Suite, records: &[RunRecord]) -> Self {
        let mut groups: BTreeMap<String, BarGroup> = BTreeMap::new();
        let mut order = Vec::new();
        for r in records.iter().filter(|r| r.suite == suite) {
            let key = group_key(r);
            let g = groups.entry(key.clone()).or_insert_with(|| {
                order.push(key.clone());
                BarGroup {
                    label: key.clone(),
                    naive_time: None,
                    bars: Vec::new(),
                }
            });
            if r.variant.eq_ignore_ascii_case("naive") {
                g.naive_time = Some(r.best_s);
            }
            g.bars.push(Bar {
                label: r.variant.clone(),
                value: r.best_s,
                speedup: if r.variant.eq_ignore_ascii_case("naive") { None } else { r.speedup },
            });
        }
        ChartSpec {
            title: title.into(),
            metric: ChartMetric::Time,
            groups: order.into_iter().filter_map(|k| groups.remove(&k)).collect(),
        }
    }

    /// STREAM chart: one group per (device, level), one bar per kernel.
    pub fn bandwidth_chart(title: impl Into<String>, records: &[RunRecord]) -> Self {
        let mut groups: Vec<BarGroup> = Vec::new();
        for r in records.iter().filter(|r| r.suite == Suite::Stream) {
            let (Some((kind, level, mode)), Some(bw)) = (r.stream_key(), r.baseline_bps) else {
                continue;
            };
            let label = format!("{} {} ({} thr)", r.device, level, r.threads);
            let suffix = match mode {
                crate::stream::StreamMode::SequentialScaled => "*",
                crate::stream::StreamMode::Threaded => "",
            };
            let bar = Bar {
                label: format!("{kind}{suffix}"),
                value: bw,
                speedup: None,
            };
            match groups.iter_mut().find(|g| g.label == label) {
                Some(g) => g.bars.push(bar),
                None => groups.push(BarGroup {
                    label,
                    naive_time: None,
                    bars: vec![bar],
                }),
            }
        }
        ChartSpec {
            title: title.into(),
            metric: ChartMetric::Bandwidth,
            groups,
        }
    }

    /// Utilization of every record that has one, grouped by suite and size.
    pub fn utilization_chart(title: impl Into<String>, records: &[RunRecord]) -> Self {
        let mut groups: Vec<BarGroup> = Vec::new();
        for r in records.iter().filter(|r| r.suite != Suite::Stream) {
            let Some(u) = r.utilization else { continue };
            let label = format!("{} {}", r.suite, group_key(r));
            let bar = Bar {
                label: r.variant.clone(),
                value: u,
                speedup: None,
            };
            match groups.iter_mut().find(|g| g.label == label) {
                Some(g) => g.bars.push(bar),
                None => groups.push(BarGroup {
                    label,
                    naive_time: None,
                    bars: vec![bar],
                }),
            }
        }
        ChartSpec {
            title: title.into(),
            metric: ChartMetric::Utilization,
            groups,
        }
    }
}

fn group_key(r: &RunRecord) -> String {
    match r.suite {
        Suite::Transpose => format!("{} n={}", r.device, r.n.unwrap_or(0)),
        Suite::Blur => format!(
            "{} {}x{}x{} F={}",
            r.device,
            r.w.unwrap_or(0),
            r.h.unwrap_or(0),
            r.c.unwrap_or(0),
            r.f.unwrap_or(0)
        ),
        Suite::Stream => r.device.clone(),
    }
}

const BAR_W: f64 = 28.0;
const GROUP_GAP: f64 = 36.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 70.0;
const PLOT_H: f64 = 300.0;
const BOTTOM: f64 = 70.0;

pub fn render_chart(spec: &ChartSpec) -> Result<Vec<u8>, ReportError> {
    spec.validate()?;
    let metric = spec.metric;

    // legend: bar labels in first-seen order
    let mut legend: Vec<&str> = Vec::new();
    for g in &spec.groups {
        for b in &g.bars {
            if !legend.contains(&b.label.as_str()) {
                legend.push(&b.label);
            }
        }
    }
    let color = |label: &str| PALETTE[legend.iter().position(|l| *l == label).unwrap_or(0) % PALETTE.len()];

    let y_max = match metric {
        ChartMetric::Utilization => 1.0,
        _ => {
            let max = spec
                .groups
                .iter()
                .flat_map(|g| g.bars.iter())
                .map(|b| metric.scale(b.value))
                .fold(0.0, f64::max);
            nice_ceiling(max * 1.1)
        }
    };
    let plot_w: f64 = spec
        .groups
        .iter()
        .map(|g| g.bars.len() as f64 * BAR_W + GROUP_GAP)
        .sum::<f64>()
        + GROUP_GAP;
    let width = LEFT + plot_w + RIGHT;
    let height = TOP + PLOT_H + BOTTOM;
    let y_of = |v: f64| TOP + PLOT_H - (v.min(y_max) / y_max) * PLOT_H;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15" font-weight="bold">{}</text>"#,
        width / 2.0,
        escape(&spec.title)
    );

    // axes and grid
    for k in 0..=5 {
        let v = y_max * k as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            sig3(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.1}" y1="{TOP:.1}" x2="{LEFT:.1}" y2="{:.1}" stroke="black"/>"#,
        TOP + PLOT_H
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        TOP + PLOT_H,
        LEFT + plot_w,
        TOP + PLOT_H
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        metric.axis_label()
    );

    let mut x = LEFT + GROUP_GAP;
    for g in &spec.groups {
        let group_w = g.bars.len() as f64 * BAR_W;
        let _ = writeln!(s, r#"<g class="group" data-label="{}">"#, escape(&g.label));
        if let Some(t) = g.naive_time {
            let _ = writeln!(
                s,
                r#"<text class="naive-time" x="{:.1}" y="{:.1}" text-anchor="middle" font-weight="bold">{} s</text>"#,
                x + group_w / 2.0,
                TOP - 22.0,
                sig3(t)
            );
        }
        for b in &g.bars {
            let v = metric.scale(b.value);
            let y = y_of(v);
            let h = TOP + PLOT_H - y;
            let overflow = metric == ChartMetric::Utilization && v > 1.0;
            let stroke = if overflow { r##" stroke="#d62728" stroke-width="2""## } else { "" };
            let _ = writeln!(
                s,
                r#"<rect class="bar" x="{x:.1}" y="{y:.1}" width="{:.1}" height="{h:.1}" fill="{}"{stroke}><title>{}: {}</title></rect>"#,
                BAR_W - 4.0,
                color(&b.label),
                escape(&b.label),
                sig3(v)
            );
            let cx = x + (BAR_W - 4.0) / 2.0;
            if overflow {
                let _ = writeln!(
                    s,
                    r##"<text class="overflow" x="{cx:.1}" y="{:.1}" text-anchor="middle" fill="#d62728">&#9650;{}</text>"##,
                    y - 4.0,
                    sig3(v)
                );
            } else if let Some(sp) = b.speedup {
                let _ = writeln!(
                    s,
                    r#"<text class="speedup" x="{cx:.1}" y="{:.1}" text-anchor="middle">{sp:.2}</text>"#,
                    y - 4.0
                );
            } else if metric == ChartMetric::Utilization {
                let _ = writeln!(
                    s,
                    r#"<text class="value" x="{cx:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#,
                    y - 4.0
                );
            }
            x += BAR_W;
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x - group_w / 2.0,
            TOP + PLOT_H + 18.0,
            escape(&g.label)
        );
        let _ = writeln!(s, "</g>");
        x += GROUP_GAP;
    }

    // legend
    let lx = LEFT + plot_w + 16.0;
    for (i, label) in legend.iter().enumerate() {
        let ly = TOP + i as f64 * 18.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{ly:.1}" width="12" height="12" fill="{}"/>"#,
            color(label)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 18.0,
            ly + 10.0,
            escape(label)
        );
    }
    let _ = writeln!(s, "</svg>");
    Ok(s.into_bytes())
}
