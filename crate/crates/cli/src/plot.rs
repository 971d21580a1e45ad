//! Minimal self-contained SVG line chart of log10 ‖x(t)‖.
//!
//! States that are exactly zero have no logarithm; they break the polyline
//! and are marked on the time axis instead.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 62.0;
const RIGHT: f64 = 18.0;
const TOP: f64 = 34.0;
const BOTTOM: f64 = 46.0;

/// Renders the squared norms of a trajectory (exact zeros allowed).
pub fn log_norm_svg(norms_sq: &[f64], title: &str) -> String {
    let logs: Vec<Option<f64>> = norms_sq
        .iter()
        .map(|&n| {
            // n is ‖x‖², so log10 ‖x‖ = log10(n) / 2.
            if n > 0.0 && n.is_finite() {
                Some(n.log10() / 2.0)
            } else {
                None
            }
        })
        .collect();

    let t_max = logs.len().saturating_sub(1).max(1) as f64;
    let finite: Vec<f64> = logs.iter().flatten().copied().collect();
    let (mut y_min, mut y_max) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if finite.is_empty() {
        y_min = -1.0;
        y_max = 1.0;
    }
    y_min = y_min.floor();
    y_max = y_max.ceil();
    if y_max - y_min < 1.0 {
        y_max = y_min + 1.0;
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + plot_w * t / t_max;
    let sy = |v: f64| TOP + plot_h * (y_max - v) / (y_max - y_min);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        LEFT + plot_w / 2.0,
        xml_escape(title)
    );

    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{LEFT}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        HEIGHT - BOTTOM,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{:.1}\" stroke=\"black\"/>",
        HEIGHT - BOTTOM
    );

    // y ticks at integer powers of ten, thinned to at most eight labels.
    let y_step = (((y_max - y_min) / 8.0).ceil()).max(1.0);
    let mut v = y_min;
    while v <= y_max + 1e-9 {
        let y = sy(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{LEFT}\" y2=\"{y:.1}\" stroke=\"black\"/>",
            LEFT - 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e{}</text>",
            LEFT - 7.0,
            y + 4.0,
            v as i64
        );
        v += y_step;
    }

    // x ticks.
    let t_step = ((t_max / 10.0).ceil() as usize).max(1);
    let mut t = 0usize;
    while (t as f64) <= t_max + 0.5 {
        let x = sx(t as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{t}</text>",
            HEIGHT - BOTTOM + 17.0
        );
        t += t_step;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">&#x2016;x(t)&#x2016;</text>",
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    // Polyline segments between consecutive nonzero states.
    let mut segment: Vec<(f64, f64)> = Vec::new();
    let flush = |svg: &mut String, seg: &mut Vec<(f64, f64)>| {
        if seg.len() > 1 {
            let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
                pts.join(" ")
            );
        }
        seg.clear();
    };
    for (t, log) in logs.iter().enumerate() {
        match log {
            Some(v) => segment.push((sx(t as f64), sy(*v))),
            None => flush(&mut svg, &mut segment),
        }
    }
    flush(&mut svg, &mut segment);

    for (t, log) in logs.iter().enumerate() {
        let x = sx(t as f64);
        match log {
            Some(v) => {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"#1f77b4\"/>",
                    sy(*v)
                );
            }
            None => {
                // Exact zero: marker on the axis, since log10 0 is off the chart.
                let y = HEIGHT - BOTTOM;
                let _ = writeln!(
                    svg,
                    "<path d=\"M {:.1} {:.1} L {:.1} {:.1} M {:.1} {:.1} L {:.1} {:.1}\" stroke=\"#d62728\" stroke-width=\"1.5\"/>",
                    x - 3.5,
                    y - 3.5,
                    x + 3.5,
                    y + 3.5,
                    x - 3.5,
                    y + 3.5,
                    x + 3.5,
                    y - 3.5
                );
            }
        }
    }
    if logs.iter().any(|l| l.is_none()) {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">&#xd7; state exactly zero</text>",
            WIDTH - RIGHT,
            TOP - 6.0
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
