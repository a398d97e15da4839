//! SVG deployment maps: RU/ONUs as blue dots, splitters as red squares,
//! COs as purple lozenges, solid black distribution fiber and dashed orange
//! feeder fiber. Candidate sites left unused are drawn hollow.

use std::fmt::Write as _;

use crate::error::PlanError;
use crate::model::{PlanningInstance, Site};
use crate::plan::DeploymentPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Dot,
    Square,
    Lozenge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub ru_marker: Marker,
    pub splitter_marker: Marker,
    pub co_marker: Marker,
    pub distribution_line: LineStyle,
    pub feeder_line: LineStyle,
    /// Pixels per km.
    pub scale: f64,
    pub margin_px: f64,
    pub marker_px: f64,
    pub show_unused: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            ru_marker: Marker::Dot,
            splitter_marker: Marker::Square,
            co_marker: Marker::Lozenge,
            distribution_line: LineStyle::Solid,
            feeder_line: LineStyle::Dashed,
            scale: 60.0,
            margin_px: 40.0,
            marker_px: 7.0,
            show_unused: true,
        }
    }
}

impl RenderStyle {
    pub fn check(&self) -> Result<(), String> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(format!("scale must be positive, got {}", self.scale));
        }
        let m = [self.ru_marker, self.splitter_marker, self.co_marker];
        if m[0] == m[1] || m[1] == m[2] || m[0] == m[2] {
            return Err("marker kinds must be distinct".into());
        }
        Ok(())
    }
}

const RU_COLOR: &str = "#1f4fd8";
const SPLITTER_COLOR: &str = "#d62728";
const CO_COLOR: &str = "#7b2d8e";
const FEEDER_COLOR: &str = "#ff7f0e";
const DISTRIBUTION_COLOR: &str = "#000000";

struct Canvas {
    min_x: f64,
    max_y: f64,
    scale: f64,
    margin: f64,
    width: f64,
    height: f64,
}

impl Canvas {
    fn px(&self, s: &Site) -> (String, String) {
        let x = self.margin + (s.x - self.min_x) * self.scale;
        let y = self.margin + (self.max_y - s.y) * self.scale;
        (fmt(x), fmt(y))
    }
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

fn dash(style: LineStyle) -> &'static str {
    match style {
        LineStyle::Solid => "",
        LineStyle::Dashed => " stroke-dasharray=\"6 4\"",
    }
}

fn marker(out: &mut String, kind: Marker, class: &str, x: &str, y: &str, size: f64, color: &str, filled: bool, id: &str) {
    let fill = if filled { color } else { "none" };
    let h = size / 2.0;
    let xf: f64 = x.parse().unwrap_or(0.0);
    let yf: f64 = y.parse().unwrap_or(0.0);
    let _ = match kind {
        Marker::Dot => writeln!(
            out,
            "    <circle class=\"{class}\" data-id=\"{id}\" cx=\"{x}\" cy=\"{y}\" r=\"{}\" fill=\"{fill}\" stroke=\"{color}\"/>",
            fmt(h * 0.8)
        ),
        Marker::Square => writeln!(
            out,
            "    <rect class=\"{class}\" data-id=\"{id}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\" stroke=\"{color}\"/>",
            fmt(xf - h),
            fmt(yf - h),
            fmt(size),
            fmt(size)
        ),
        Marker::Lozenge => writeln!(
            out,
            "    <polygon class=\"{class}\" data-id=\"{id}\" points=\"{},{} {},{} {},{} {},{}\" fill=\"{fill}\" stroke=\"{color}\"/>",
            x,
            fmt(yf - size),
            fmt(xf + size * 0.7),
            y,
            x,
            fmt(yf + size),
            fmt(xf - size * 0.7),
            y
        ),
    };
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the plan over the candidate sites. Output is a pure function of
/// its inputs.
pub fn render_map(inst: &PlanningInstance, plan: &DeploymentPlan, style: &RenderStyle) -> Result<String, PlanError> {
    let index = plan.resolve(inst)?;
    let all: Vec<&Site> = inst.central_offices.iter().chain(&inst.splitters).chain(&inst.ru_onus).collect();
    let fold = |f: fn(&Site) -> f64, pick: fn(f64, f64) -> f64, init: f64| all.iter().map(|s| f(s)).fold(init, pick);
    let (mut min_x, mut max_x) = (fold(|s| s.x, f64::min, f64::INFINITY), fold(|s| s.x, f64::max, f64::NEG_INFINITY));
    let (mut min_y, mut max_y) = (fold(|s| s.y, f64::min, f64::INFINITY), fold(|s| s.y, f64::max, f64::NEG_INFINITY));
    if all.is_empty() {
        (min_x, max_x, min_y, max_y) = (0.0, 1.0, 0.0, 1.0);
    }
    max_x = max_x.max(min_x + 1.0);
    max_y = max_y.max(min_y + 1.0);
    let legend_h = 70.0;
    let canvas = Canvas {
        min_x,
        max_y,
        scale: style.scale,
        margin: style.margin_px,
        width: (max_x - min_x) * style.scale + 2.0 * style.margin_px,
        height: (max_y - min_y) * style.scale + 2.0 * style.margin_px + legend_h,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">",
        w = fmt(canvas.width),
        h = fmt(canvas.height)
    );
    let _ = writeln!(
        out,
        "  <title>Fronthaul deployment: {} CO, {} splitters, {} RU/ONUs</title>",
        index.open_cos.len(),
        index.open_splitters.len(),
        index.assignment.len()
    );
    let _ = writeln!(out, "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");

    let mut homing = index.homing.clone();
    homing.sort_unstable();
    let mut assignment = index.assignment.clone();
    assignment.sort_unstable_by_key(|&(r, j)| (j, r));
    out.push_str("  <g id=\"feeder\">\n");
    for (j, i) in homing {
        let (a, b) = (&inst.central_offices[i], &inst.splitters[j]);
        let ((x1, y1), (x2, y2)) = (canvas.px(a), canvas.px(b));
        if (&x1, &y1) == (&x2, &y2) {
            continue;
        }
        let _ = writeln!(
            out,
            "    <line class=\"feeder\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"{FEEDER_COLOR}\" stroke-width=\"2\"{}/>",
            dash(style.feeder_line)
        );
    }
    out.push_str("  </g>\n  <g id=\"distribution\">\n");
    for (r, j) in assignment {
        let (a, b) = (&inst.splitters[j], &inst.ru_onus[r]);
        let ((x1, y1), (x2, y2)) = (canvas.px(a), canvas.px(b));
        if (&x1, &y1) == (&x2, &y2) {
            continue;
        }
        let _ = writeln!(
            out,
            "    <line class=\"distribution\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"{DISTRIBUTION_COLOR}\" stroke-width=\"1\"{}/>",
            dash(style.distribution_line)
        );
    }
    out.push_str("  </g>\n  <g id=\"sites\">\n");
    let open_co: std::collections::BTreeSet<usize> = index.open_cos.iter().copied().collect();
    let open_sp: std::collections::BTreeSet<usize> = index.open_splitters.iter().copied().collect();
    let size = style.marker_px;
    for (i, s) in inst.central_offices.iter().enumerate() {
        let open = open_co.contains(&i);
        if open || style.show_unused {
            let (x, y) = canvas.px(s);
            let class = if open { "co" } else { "co unused" };
            marker(&mut out, style.co_marker, class, &x, &y, size, CO_COLOR, open, &escape(&s.id));
        }
    }
    for (j, s) in inst.splitters.iter().enumerate() {
        let open = open_sp.contains(&j);
        if open || style.show_unused {
            let (x, y) = canvas.px(s);
            let class = if open { "splitter" } else { "splitter unused" };
            marker(&mut out, style.splitter_marker, class, &x, &y, size, SPLITTER_COLOR, open, &escape(&s.id));
        }
    }
    for s in &inst.ru_onus {
        let (x, y) = canvas.px(s);
        marker(&mut out, style.ru_marker, "ru", &x, &y, size, RU_COLOR, true, &escape(&s.id));
    }
    out.push_str("  </g>\n");

    // Legend and scale bar under the map.
    let top = canvas.height - legend_h + 10.0;
    let left = style.margin_px;
    out.push_str("  <g id=\"legend\">\n");
    let entries = [
        (style.ru_marker, RU_COLOR, "RU/ONU"),
        (style.splitter_marker, SPLITTER_COLOR, "Splitter"),
        (style.co_marker, CO_COLOR, "Central office"),
    ];
    for (k, (kind, color, label)) in entries.into_iter().enumerate() {
        let x = left + 110.0 * k as f64;
        marker(&mut out, kind, "legend-marker", &fmt(x + 5.0), &fmt(top + 5.0), size, color, true, label);
        let _ = writeln!(out, "    <text x=\"{}\" y=\"{}\">{label}</text>", fmt(x + 16.0), fmt(top + 9.0));
    }
    for (k, (line, color, label)) in [
        (style.distribution_line, DISTRIBUTION_COLOR, "Distribution fiber"),
        (style.feeder_line, FEEDER_COLOR, "Feeder fiber"),
    ]
    .into_iter()
    .enumerate()
    {
        let x = left + 165.0 * k as f64;
        let y = top + 28.0;
        let _ = writeln!(
            out,
            "    <line class=\"legend-line\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"{}/>",
            fmt(x),
            fmt(y),
            fmt(x + 30.0),
            fmt(y),
            dash(line)
        );
        let _ = writeln!(out, "    <text x=\"{}\" y=\"{}\">{label}</text>", fmt(x + 36.0), fmt(y + 4.0));
    }
    out.push_str("  </g>\n");
    let bar_km = scale_bar_km(max_x - min_x);
    let y = top + 50.0;
    let _ = writeln!(out, "  <g id=\"scale-bar\">");
    let _ = writeln!(
        out,
        "    <line class=\"scale-bar\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"2\"/>",
        fmt(left),
        fmt(y),
        fmt(left + bar_km * style.scale),
        fmt(y)
    );
    let _ = writeln!(
        out,
        "    <text x=\"{}\" y=\"{}\">{} km</text>",
        fmt(left + bar_km * style.scale + 6.0),
        fmt(y + 4.0),
        bar_km
    );
    out.push_str("  </g>\n</svg>\n");
    Ok(out)
}

/// Round length (1, 2 or 5 times a power of ten) near a fifth of the width.
fn scale_bar_km(width_km: f64) -> f64 {
    let target = (width_km / 5.0).max(1e-3);
    let base = 10f64.powf(target.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|k| k * base)
        .find(|v| *v >= target)
        .unwrap_or(base * 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study;
    use crate::model::SiteKind;
    use crate::plan::SiteIds;

    fn count(svg: &str, class: &str) -> usize {
        svg.matches(&format!("class=\"{class}\"")).count()
    }

    fn colocated() -> PlanningInstance {
        PlanningInstance {
            central_offices: vec![Site::new(SiteKind::CentralOffice, "co", 1.0, 1.0)],
            splitters: vec![Site::new(SiteKind::Splitter, "sp", 1.0, 1.0)],
            ru_onus: vec![Site::new(SiteKind::RuOnu, "ru", 1.0, 1.0)],
            params: case_study::default_params(),
            costs: case_study::case_study_costs(),
        }
    }

    #[test]
    fn empty_plan_draws_markers_only() {
        let inst = case_study::instance();
        let svg = render_map(&inst, &DeploymentPlan::default(), &RenderStyle::default()).unwrap();
        assert_eq!(count(&svg, "feeder") + count(&svg, "distribution"), 0);
        assert_eq!(count(&svg, "ru"), inst.ru_onus.len());
        assert_eq!(count(&svg, "splitter unused"), inst.splitters.len());
    }

    #[test]
    fn zero_length_links_are_suppressed() {
        let inst = colocated();
        let plan = DeploymentPlan::from_links(&SiteIds::of(&inst), &[(0, 0)], &[(0, 0)]);
        let svg = render_map(&inst, &plan, &RenderStyle::default()).unwrap();
        assert_eq!(count(&svg, "feeder") + count(&svg, "distribution"), 0);
        assert_eq!(count(&svg, "co") + count(&svg, "splitter") + count(&svg, "ru"), 3);
    }

    #[test]
    fn unknown_site_is_rejected() {
        let inst = colocated();
        let mut plan = DeploymentPlan::default();
        plan.open_cos.insert("nowhere".into());
        assert!(render_map(&inst, &plan, &RenderStyle::default()).is_err());
    }

    #[test]
    fn scale_bar_lengths() {
        assert_eq!(scale_bar_km(10.0), 2.0);
        assert_eq!(scale_bar_km(3.0), 1.0);
        assert_eq!(scale_bar_km(40.0), 10.0);
    }

    #[test]
    fn duplicate_markers_are_refused() {
        let style = RenderStyle {
            splitter_marker: Marker::Dot,
            ..RenderStyle::default()
        };
        assert!(style.check().is_err());
        assert!(RenderStyle::default().check().is_ok());
    }
}
