//! Standalone SVG 1.1 emission for plot scenes. Output is deterministic:
//! identical scenes render to identical bytes.

use super::{Layer, Panel, Scene};

const MARGIN_LEFT: f64 = 46.0;
const MARGIN_RIGHT: f64 = 14.0;
const MARGIN_TOP: f64 = 26.0;
const MARGIN_BOTTOM: f64 = 38.0;
const TITLE_HEIGHT: f64 = 30.0;
const FONT: &str = "font-family=\"sans-serif\"";

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn dash(dashed: bool) -> &'static str {
    if dashed {
        " stroke-dasharray=\"5,4\""
    } else {
        ""
    }
}

/// Renders the whole scene as one SVG document.
pub fn render_svg(scene: &Scene) -> String {
    let cols = scene.cols.max(1);
    let rows = scene.panels.len().div_ceil(cols);
    let title_h = if scene.title.is_empty() {
        0.0
    } else {
        TITLE_HEIGHT
    };
    let width = cols as f64 * scene.panel_width;
    let height = title_h + rows as f64 * scene.panel_height;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    );
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        fmt(width),
        fmt(height)
    ));
    if !scene.title.is_empty() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" {FONT} font-size=\"15\" \
             fill=\"#000000\">{}</text>\n",
            fmt(width / 2.0),
            esc(&scene.title)
        ));
    }
    for (i, panel) in scene.panels.iter().enumerate() {
        let x0 = (i % cols) as f64 * scene.panel_width;
        let y0 = title_h + (i / cols) as f64 * scene.panel_height;
        out.push_str(&format!(
            "<g transform=\"translate({},{})\">\n",
            fmt(x0),
            fmt(y0)
        ));
        render_panel(&mut out, panel, scene.panel_width, scene.panel_height);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.width
    }

    fn y(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.y_lo) / (self.y_hi - self.y_lo) * self.height
    }
}

/// Data extents over every cartesian layer, padded; degenerate spans widen
/// symmetrically so the mapping never divides by zero.
fn frame_for(panel: &Panel, panel_w: f64, panel_h: f64) -> Frame {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = vec![0.0];
    for layer in &panel.layers {
        match layer {
            Layer::Histogram { bins, .. } => {
                for b in bins {
                    xs.push(b.lo);
                    xs.push(b.hi);
                    ys.push(b.density);
                }
            }
            Layer::Line { points, .. } => {
                for (x, y) in points {
                    xs.push(*x);
                    ys.push(*y);
                }
            }
            Layer::Band { from, to, .. } => {
                xs.push(*from);
                xs.push(*to);
            }
            Layer::VLine { x, .. } => xs.push(*x),
            Layer::Point { x, y, .. } => {
                xs.push(*x);
                ys.push(*y);
            }
            Layer::PolarBand { .. } | Layer::PolarLine { .. } => {
                debug_assert!(panel.polar, "polar layers only in wheel plots");
            }
        }
    }
    xs.retain(|v| v.is_finite());
    ys.retain(|v| v.is_finite());
    let (mut x_lo, mut x_hi) = min_max(&xs, 0.0, 1.0);
    let (mut y_lo, mut y_hi) = min_max(&ys, 0.0, 1.0);
    let dx = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let dy = if y_hi > y_lo { y_hi - y_lo } else { 1.0 };
    x_lo -= 0.04 * dx;
    x_hi += 0.04 * dx;
    y_lo -= 0.05 * dy;
    y_hi += 0.05 * dy;
    Frame {
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        width: panel_w - MARGIN_LEFT - MARGIN_RIGHT,
        height: panel_h - MARGIN_TOP - MARGIN_BOTTOM,
        x_lo,
        x_hi,
        y_lo,
        y_hi,
    }
}

fn min_max(values: &[f64], fallback_lo: f64, fallback_hi: f64) -> (f64, f64) {
    if values.is_empty() {
        (fallback_lo, fallback_hi)
    } else {
        (
            values.iter().copied().fold(f64::INFINITY, f64::min),
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

fn render_panel(out: &mut String, panel: &Panel, panel_w: f64, panel_h: f64) {
    if !panel.title.is_empty() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"16\" text-anchor=\"middle\" {FONT} font-size=\"12\" \
             fill=\"#000000\">{}</text>\n",
            fmt(panel_w / 2.0),
            esc(&panel.title)
        ));
    }
    if !panel.x_label.is_empty() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {FONT} font-size=\"11\" \
             fill=\"#333333\">{}</text>\n",
            fmt(panel_w / 2.0),
            fmt(panel_h - 6.0),
            esc(&panel.x_label)
        ));
    }
    if panel.polar {
        render_polar(out, panel, panel_w, panel_h);
    } else {
        render_cartesian(out, panel, panel_w, panel_h);
    }
    if !panel.legend.is_empty() {
        let x = panel_w - MARGIN_RIGHT - 96.0;
        for (i, (label, color)) in panel.legend.iter().enumerate() {
            let y = MARGIN_TOP + 6.0 + 15.0 * i as f64;
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
                fmt(x),
                fmt(y)
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"10\" fill=\"#333333\">{}</text>\n",
                fmt(x + 14.0),
                fmt(y + 9.0),
                esc(label)
            ));
        }
    }
}

fn render_cartesian(out: &mut String, panel: &Panel, panel_w: f64, panel_h: f64) {
    let frame = frame_for(panel, panel_w, panel_h);
    let bottom = frame.top + frame.height;
    let mut strip = 0usize;
    for layer in &panel.layers {
        match layer {
            Layer::Band {
                from,
                to,
                color,
                full_height: true,
            } => {
                out.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\" \
                     fill-opacity=\"0.6\"/>\n",
                    fmt(frame.x(*from)),
                    fmt(frame.top),
                    fmt(frame.x(*to) - frame.x(*from)),
                    fmt(frame.height)
                ));
            }
            Layer::Band {
                from,
                to,
                color,
                full_height: false,
            } => {
                let y = bottom - 8.0 - 9.0 * strip as f64;
                strip += 1;
                out.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"6\" fill=\"{color}\"/>\n",
                    fmt(frame.x(*from)),
                    fmt(y),
                    fmt(frame.x(*to) - frame.x(*from))
                ));
            }
            Layer::Histogram { bins, color } => {
                for b in bins {
                    let y = frame.y(b.density);
                    out.push_str(&format!(
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\" \
                         fill-opacity=\"0.75\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n",
                        fmt(frame.x(b.lo)),
                        fmt(y),
                        fmt(frame.x(b.hi) - frame.x(b.lo)),
                        fmt(bottom - y)
                    ));
                }
            }
            Layer::Line {
                points,
                color,
                dashed,
                width,
            } => {
                if points.is_empty() {
                    continue;
                }
                let pts: Vec<String> = points
                    .iter()
                    .filter(|(x, y)| x.is_finite() && y.is_finite())
                    .map(|(x, y)| format!("{},{}", fmt(frame.x(*x)), fmt(frame.y(*y))))
                    .collect();
                out.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                     stroke-width=\"{}\"{}/>\n",
                    pts.join(" "),
                    fmt(*width),
                    dash(*dashed)
                ));
            }
            Layer::VLine { x, color, dashed } => {
                out.push_str(&format!(
                    "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"{color}\" \
                     stroke-width=\"1.5\"{3}/>\n",
                    fmt(frame.x(*x)),
                    fmt(frame.top),
                    fmt(bottom),
                    dash(*dashed)
                ));
            }
            Layer::Point {
                x,
                y,
                color,
                radius,
            } => {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\" \
                     fill-opacity=\"0.8\"/>\n",
                    fmt(frame.x(*x)),
                    fmt(frame.y(*y)),
                    fmt(*radius)
                ));
            }
            Layer::PolarBand { .. } | Layer::PolarLine { .. } => {}
        }
    }
    render_axes(out, &frame, panel);
}

fn render_axes(out: &mut String, frame: &Frame, panel: &Panel) {
    let bottom = frame.top + frame.height;
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\" \
         stroke-width=\"1\"/>\n",
        fmt(frame.left),
        fmt(frame.top),
        fmt(frame.width),
        fmt(frame.height)
    ));
    for i in 0..4 {
        let v = frame.x_lo + (frame.x_hi - frame.x_lo) * i as f64 / 3.0;
        let x = frame.x(v);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#333333\" \
             stroke-width=\"1\"/>\n",
            fmt(x),
            fmt(bottom),
            fmt(bottom + 4.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {FONT} font-size=\"10\" \
             fill=\"#333333\">{}</text>\n",
            fmt(x),
            fmt(bottom + 15.0),
            esc(&crate::diagnostics::compact_stat(v, 2))
        ));
    }
    for v in [frame.y_lo, frame.y_hi] {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" {FONT} font-size=\"10\" \
             fill=\"#333333\">{}</text>\n",
            fmt(frame.left - 4.0),
            fmt(frame.y(v) + 3.0),
            esc(&crate::diagnostics::compact_stat(v, 2))
        ));
    }
    if !panel.y_label.is_empty() {
        let cy = frame.top + frame.height / 2.0;
        out.push_str(&format!(
            "<text x=\"12\" y=\"{}\" text-anchor=\"middle\" {FONT} font-size=\"11\" \
             fill=\"#333333\" transform=\"rotate(-90 12 {})\">{}</text>\n",
            fmt(cy),
            fmt(cy),
            esc(&panel.y_label)
        ));
    }
}

fn render_polar(out: &mut String, panel: &Panel, panel_w: f64, panel_h: f64) {
    let inner_w = panel_w - MARGIN_LEFT - MARGIN_RIGHT;
    let inner_h = panel_h - MARGIN_TOP - MARGIN_BOTTOM;
    let cx = MARGIN_LEFT + inner_w / 2.0;
    let cy = MARGIN_TOP + inner_h / 2.0;
    let radius = inner_w.min(inner_h) / 2.0 / 1.08;
    let px = |theta: f64, r: f64| cx + r * radius * theta.cos();
    let py = |theta: f64, r: f64| cy - r * radius * theta.sin();
    out.push_str(&format!(
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#999999\" \
         stroke-width=\"1\"/>\n",
        fmt(cx),
        fmt(cy),
        fmt(radius)
    ));
    out.push_str(&format!(
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#cccccc\" \
         stroke-width=\"1\" stroke-dasharray=\"3,3\"/>\n",
        fmt(cx),
        fmt(cy),
        fmt(radius / 2.0)
    ));
    out.push_str(&format!(
        "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"#999999\"/>\n",
        fmt(cx),
        fmt(cy)
    ));
    for layer in &panel.layers {
        match layer {
            Layer::PolarBand {
                from,
                span,
                inner,
                outer,
                color,
            } => {
                if *span <= 0.0 {
                    continue;
                }
                let steps = ((span / 0.05).ceil() as usize).max(8);
                let mut pts = Vec::with_capacity(2 * steps + 2);
                for i in 0..=steps {
                    let t = from + span * i as f64 / steps as f64;
                    pts.push(format!("{},{}", fmt(px(t, *outer)), fmt(py(t, *outer))));
                }
                for i in (0..=steps).rev() {
                    let t = from + span * i as f64 / steps as f64;
                    pts.push(format!("{},{}", fmt(px(t, *inner)), fmt(py(t, *inner))));
                }
                out.push_str(&format!(
                    "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.85\" \
                     stroke=\"none\"/>\n",
                    pts.join(" ")
                ));
            }
            Layer::PolarLine {
                angle,
                radius: r,
                color,
                dashed,
            } => {
                out.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" \
                     stroke-width=\"2\"{}/>\n",
                    fmt(cx),
                    fmt(cy),
                    fmt(px(*angle, *r)),
                    fmt(py(*angle, *r)),
                    dash(*dashed)
                ));
            }
            Layer::Point {
                x,
                y,
                color,
                radius: r,
            } => {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\" \
                     fill-opacity=\"0.85\" stroke=\"#555555\" stroke-width=\"0.4\"/>\n",
                    fmt(cx + x * radius),
                    fmt(cy - y * radius),
                    fmt(*r)
                ));
            }
            _ => {}
        }
    }
}
