//! Minimal polyline renderer for flow traces: energy (linear scale) and
//! projected-gradient norm (log scale) against time, no plotting dependency.

use loja_lab::flow::FlowRecord;

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN: f64 = 50.0;

struct Panel {
    title: &'static str,
    points: Vec<(f64, f64)>,
    y_offset: f64,
}

fn polyline(points: &[(f64, f64)], x_range: (f64, f64), y_range: (f64, f64), y_off: f64) -> String {
    let (x0, x1) = x_range;
    let (y0, y1) = y_range;
    let dx = (x1 - x0).max(1e-300);
    let dy = (y1 - y0).max(1e-300);
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            let px = MARGIN + (x - x0) / dx * (WIDTH - 2.0 * MARGIN);
            let py = y_off + PANEL_HEIGHT - MARGIN - (y - y0) / dy * (PANEL_HEIGHT - 2.0 * MARGIN);
            format!("{px:.3},{py:.3}")
        })
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"1.5\" points=\"{}\"/>",
        coords.join(" ")
    )
}

fn render_panel(panel: &Panel) -> String {
    let xs: Vec<f64> = panel.points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = panel.points.iter().map(|p| p.1).collect();
    let x_range = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let y_range = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let mut out = String::new();
    let y0 = panel.y_offset;
    out.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        y0 + MARGIN,
        WIDTH - 2.0 * MARGIN,
        PANEL_HEIGHT - 2.0 * MARGIN
    ));
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{}\" font-size=\"14\" font-family=\"monospace\">{}</text>",
        y0 + MARGIN - 10.0,
        panel.title
    ));
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{}\" font-size=\"11\" font-family=\"monospace\">y: [{:.6e}, {:.6e}]  t: [{:.6e}, {:.6e}]</text>",
        y0 + PANEL_HEIGHT - 8.0,
        y_range.0,
        y_range.1,
        x_range.0,
        x_range.1
    ));
    out.push_str(&polyline(&panel.points, x_range, y_range, panel.y_offset));
    out
}

/// Render the two monitor curves of a trace as a standalone SVG document.
pub fn render_trace_svg(records: &[FlowRecord]) -> String {
    let energy: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.energy)).collect();
    let pgrad: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.pgrad_norm > 0.0)
        .map(|r| (r.t, r.pgrad_norm.log10()))
        .collect();
    let mut panels = vec![Panel {
        title: "energy vs t",
        points: energy,
        y_offset: 0.0,
    }];
    if pgrad.len() >= 2 {
        panels.push(Panel {
            title: "log10 pgrad_norm vs t",
            points: pgrad,
            y_offset: PANEL_HEIGHT,
        });
    }
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\">\n"
    );
    for p in &panels {
        if p.points.len() >= 2 {
            out.push_str(&render_panel(p));
            out.push('\n');
        }
    }
    out.push_str("</svg>\n");
    out
}
