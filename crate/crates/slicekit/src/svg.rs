//! Deterministic SVG rendering: layer previews and break-even cost curves.

use crate::estimator::BreakEvenTable;
use crate::geom::Vec2;
use crate::slicer::Layer;
use crate::toolpath::{MoveKind, ToolMove};
use std::fmt::Write;

fn fmt(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.3}")
}

/// Render one layer: solid region as an even-odd filled path, with the
/// layer's toolpath moves overlaid (extrudes solid, travels dashed).
pub fn layer_svg(layer: &Layer, moves: &[ToolMove], bed: (f64, f64)) -> String {
    let (w, h) = bed;
    // Flip y so bed coordinates render with the origin at the bottom-left.
    let y = |v: f64| h - v;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"640\" height=\"640\">",
        fmt(w),
        fmt(h)
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>",
        fmt(w),
        fmt(h)
    );
    let _ = writeln!(out, "<!-- z = {} -->", fmt(layer.z));

    if !layer.tree.contours.is_empty() {
        let mut d = String::new();
        for contour in &layer.tree.contours {
            for (i, p) in contour.points.iter().enumerate() {
                let cmd = if i == 0 { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{} {} ", fmt(p.x), fmt(y(p.y)));
            }
            d.push_str("Z ");
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"#9ecae1\" fill-rule=\"evenodd\" stroke=\"#3182bd\" stroke-width=\"0.2\"/>",
            d.trim_end()
        );
    }

    for m in moves {
        match m.kind {
            MoveKind::Extrude => {
                let _ = writeln!(
                    out,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#de2d26\" stroke-width=\"{}\"/>",
                    fmt(m.start.x),
                    fmt(y(m.start.y)),
                    fmt(m.end.x),
                    fmt(y(m.end.y)),
                    fmt(m.width.max(0.1))
                );
            }
            MoveKind::Travel => {
                let _ = writeln!(
                    out,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#31a354\" stroke-width=\"0.1\" stroke-dasharray=\"1 1\"/>",
                    fmt(m.start.x),
                    fmt(y(m.start.y)),
                    fmt(m.end.x),
                    fmt(y(m.end.y))
                );
            }
            MoveKind::Retract | MoveKind::Unretract => {}
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Cost comparison chart: flat printing line versus setup-offset
/// traditional line, with the crossover marked when present.
pub fn cost_curve_svg(table: &BreakEvenTable) -> String {
    let (w, h, margin) = (640.0, 480.0, 50.0);
    let max_n = table.rows.last().map_or(1.0, |r| r.units as f64);
    let max_cost = table
        .rows
        .iter()
        .map(|r| r.printing_cost.max(r.traditional_cost))
        .fold(1.0f64, f64::max);
    let sx = |n: f64| margin + (n / max_n) * (w - 2.0 * margin);
    let sy = |c: f64| h - margin - (c / max_cost) * (h - 2.0 * margin);

    let polyline = |points: Vec<Vec2>, color: &str| {
        let pts: Vec<String> = points
            .iter()
            .map(|p| format!("{},{}", fmt(p.x), fmt(p.y)))
            .collect();
        format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            pts.join(" ")
        )
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"640\" height=\"480\">",
        fmt(w),
        fmt(h)
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        fmt(w),
        fmt(h)
    );
    // Axes.
    let _ = writeln!(
        out,
        "<line x1=\"{m}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#000000\"/>",
        m = fmt(margin),
        y0 = fmt(h - margin),
        x1 = fmt(w - margin)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{m}\" y1=\"{y1}\" x2=\"{m}\" y2=\"{y0}\" stroke=\"#000000\"/>",
        m = fmt(margin),
        y1 = fmt(margin),
        y0 = fmt(h - margin)
    );
    out.push_str(&polyline(
        table
            .rows
            .iter()
            .map(|r| Vec2::new(sx(r.units as f64), sy(r.printing_cost)))
            .collect(),
        "#de2d26",
    ));
    out.push_str(&polyline(
        table
            .rows
            .iter()
            .map(|r| Vec2::new(sx(r.units as f64), sy(r.traditional_cost)))
            .collect(),
        "#3182bd",
    ));
    if let Some(n) = table.crossover {
        if let Some(row) = table.rows.iter().find(|r| r.units == n) {
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#000000\"/>",
                fmt(sx(n as f64)),
                fmt(sy(row.printing_cost))
            );
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"12\">break-even n={n}</text>",
                fmt(sx(n as f64) + 6.0),
                fmt(sy(row.printing_cost) - 6.0)
            );
        }
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">units</text>",
        fmt(w / 2.0),
        fmt(h - margin / 3.0)
    );
    out.push_str("</svg>\n");
    out
}
