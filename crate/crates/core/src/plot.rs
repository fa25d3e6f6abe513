//! Deterministic SVG charts: training curves, coverage heatmaps, and
//! side-by-side ablation panels. No display or font dependencies; everything
//! is plain generated markup.

use crate::rollout::CoverageMap;
use crate::train::MetricsRow;
use crate::Result;
use std::fmt::Write as _;
use std::path::Path;

const PALETTE: [&str; 6] = ["#2c7fb8", "#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e"];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

/// Centered moving average with window clamping at the ends.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    if values.is_empty() || window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, x0: f64, y0: f64, w: f64, h: f64) -> Frame {
        let (x_min, x_max) = if x_max > x_min { (x_min, x_max) } else { (0.0, 1.0) };
        let (y_min, y_max) = if y_max > y_min { (y_min, y_max) } else { (0.0, 1.0) };
        Frame { x_min, x_max, y_min, y_max, x0, y0, w, h }
    }

    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.x_min) / (self.x_max - self.x_min) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.y_min) / (self.y_max - self.y_min) * self.h
    }
}

fn axes(svg: &mut String, f: &Frame, x_label: &str, y_label: &str, title: &str) {
    let _ = write!(
        svg,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        f.x0, f.y0, f.w, f.h
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x_min + t * (f.x_max - f.x_min);
        let yv = f.y_min + t * (f.y_max - f.y_min);
        let _ = write!(
            svg,
            concat!(
                r##"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle" fill="#333">{}</text>"##,
                r##"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end" fill="#333">{}</text>"##,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#ccc" stroke-width="0.5"/>"##,
            ),
            f.px(xv),
            f.y0 + f.h + 14.0,
            format_tick(xv),
            f.x0 - 4.0,
            f.py(yv) + 3.0,
            format_tick(yv),
            f.px(xv),
            f.y0,
            f.px(xv),
            f.y0 + f.h,
        );
        let _ = write!(
            svg,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#ccc" stroke-width="0.5"/>"##,
            f.x0,
            f.py(yv),
            f.x0 + f.w,
            f.py(yv),
        );
    }
    let _ = write!(
        svg,
        concat!(
            r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" fill="#000">{}</text>"##,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" fill="#000">{}</text>"##,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" fill="#000" transform="rotate(-90 {:.1} {:.1})">{}</text>"##,
        ),
        f.x0 + f.w / 2.0,
        f.y0 - 10.0,
        xml_escape(title),
        f.x0 + f.w / 2.0,
        f.y0 + f.h + 32.0,
        xml_escape(x_label),
        f.x0 - 44.0,
        f.y0 + f.h / 2.0,
        f.x0 - 44.0,
        f.y0 + f.h / 2.0,
        xml_escape(y_label),
    );
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{:.0}k", v / 1000.0)
    } else if (v - v.round()).abs() < 1e-9 {
        format!("{:.0}", v)
    } else {
        format!("{:.2}", v)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(svg: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str) {
    if xs.is_empty() {
        return;
    }
    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let _ = write!(points, "{:.2},{:.2} ", f.px(*x), f.py(*y));
    }
    let _ = write!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"##,
        points.trim_end(),
        color
    );
}

fn legend(svg: &mut String, f: &Frame, labels: &[String]) {
    for (i, label) in labels.iter().enumerate() {
        let y = f.y0 + 14.0 + i as f64 * 14.0;
        let _ = write!(
            svg,
            concat!(
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="2"/>"##,
                r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="#000">{}</text>"##,
            ),
            f.x0 + 8.0,
            y,
            f.x0 + 28.0,
            y,
            PALETTE[i % PALETTE.len()],
            f.x0 + 32.0,
            y + 3.0,
            xml_escape(label),
        );
    }
}

fn svg_document(body: &str, width: f64, height: f64) -> String {
    format!(
        concat!(
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "##,
            r##"viewBox="0 0 {w} {h}" font-family="sans-serif">"##,
            r##"<rect width="{w}" height="{h}" fill="white"/>{body}</svg>"##
        ),
        w = width,
        h = height,
        body = body
    )
}

/// Success-rate curves (smoothed) over environment steps, one per input run.
pub fn plot_success_curves(
    runs: &[(String, Vec<MetricsRow>)],
    out: &Path,
    window: usize,
) -> Result<()> {
    let mut body = String::new();
    let x_max = runs
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|r| r.env_steps as f64))
        .fold(1.0f64, f64::max);
    let f = Frame::new(
        0.0,
        x_max,
        0.0,
        1.0,
        MARGIN_L,
        MARGIN_T,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B,
    );
    axes(&mut body, &f, "environment steps", "success rate", "Training success rate");
    for (i, (_, rows)) in runs.iter().enumerate() {
        let xs: Vec<f64> = rows.iter().map(|r| r.env_steps as f64).collect();
        let ys = smooth(&rows.iter().map(|r| r.success as f64).collect::<Vec<_>>(), window);
        polyline(&mut body, &f, &xs, &ys, PALETTE[i % PALETTE.len()]);
    }
    legend(&mut body, &f, &runs.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    write_svg(out, &svg_document(&body, WIDTH, HEIGHT))
}

/// Coverage heatmap; cell luminance is monotone in the visit count.
pub fn plot_heatmap(map: &CoverageMap, out: &Path) -> Result<()> {
    let size = 480.0;
    let pad = 40.0;
    let mut body = String::new();
    let max = map.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let scale = size / map.nx.max(map.ny) as f64;
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let c = map.counts[iy * map.nx + ix];
            if c == 0 {
                continue;
            }
            // log-compressed monotone ramp from pale to saturated blue
            let t = ((c as f64).ln_1p() / max.ln_1p()).clamp(0.0, 1.0);
            let r = (235.0 - 190.0 * t) as u8;
            let g = (242.0 - 160.0 * t) as u8;
            let b = 250u8;
            let x = pad + ix as f64 * scale;
            // SVG y grows downward; flip so +y in the world points up.
            let y = pad + (map.ny - 1 - iy) as f64 * scale;
            let _ = write!(
                body,
                r##"<rect x="{x:.1}" y="{y:.1}" width="{s:.2}" height="{s:.2}" fill="rgb({r},{g},{b})"/>"##,
                s = scale + 0.05,
            );
        }
    }
    let _ = write!(
        body,
        r##"<rect x="{pad}" y="{pad}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#444"/>"##,
        w = map.nx as f64 * scale,
        h = map.ny as f64 * scale,
    );
    let _ = write!(
        body,
        r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">end-effector visit heatmap ({} cells visited)</text>"##,
        pad + map.nx as f64 * scale / 2.0,
        pad - 10.0,
        map.unique_cells(),
    );
    write_svg(out, &svg_document(&body, size + 2.0 * pad, size + 2.0 * pad))
}

/// Two stacked panels over the same runs: smoothed success rate and
/// episode collision counts.
pub fn plot_panels(runs: &[(String, Vec<MetricsRow>)], out: &Path, window: usize) -> Result<()> {
    let mut body = String::new();
    let x_max = runs
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|r| r.env_steps as f64))
        .fold(1.0f64, f64::max);
    let c_max = runs
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|r| r.episode_collisions as f64))
        .fold(1.0f64, f64::max);
    let panel_h = (HEIGHT - MARGIN_T - MARGIN_B) / 2.0 - 20.0;
    let top = Frame::new(0.0, x_max, 0.0, 1.0, MARGIN_L, MARGIN_T, WIDTH - MARGIN_L - MARGIN_R, panel_h);
    let bottom = Frame::new(
        0.0,
        x_max,
        0.0,
        c_max,
        MARGIN_L,
        MARGIN_T + panel_h + 40.0,
        WIDTH - MARGIN_L - MARGIN_R,
        panel_h,
    );
    axes(&mut body, &top, "", "success rate", "Success rate");
    axes(&mut body, &bottom, "environment steps", "episode collisions", "Blocked-step collisions (contact proxy)");
    for (i, (_, rows)) in runs.iter().enumerate() {
        let xs: Vec<f64> = rows.iter().map(|r| r.env_steps as f64).collect();
        let succ = smooth(&rows.iter().map(|r| r.success as f64).collect::<Vec<_>>(), window);
        let coll = smooth(
            &rows.iter().map(|r| r.episode_collisions as f64).collect::<Vec<_>>(),
            window,
        );
        polyline(&mut body, &top, &xs, &succ, PALETTE[i % PALETTE.len()]);
        polyline(&mut body, &bottom, &xs, &coll, PALETTE[i % PALETTE.len()]);
    }
    legend(&mut body, &top, &runs.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    write_svg(out, &svg_document(&body, WIDTH, HEIGHT + 40.0))
}

fn write_svg(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: usize, success: u8) -> MetricsRow {
        MetricsRow {
            env_steps: step,
            augmented_steps: step / 2,
            episode_return: 1.0,
            success,
            episode_collisions: step % 7,
            mp_action_fraction: 0.5,
            mean_h: 3.0,
            wall_ms: 1.0,
        }
    }

    #[test]
    fn smoothing_window_averages() {
        let v = vec![0.0, 0.0, 1.0, 1.0, 1.0];
        let s = smooth(&v, 3);
        assert_eq!(s.len(), 5);
        assert!((s[2] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(smooth(&v, 1), v);
    }

    #[test]
    fn empty_metrics_yield_valid_svg() {
        let out = std::env::temp_dir().join("mopa_plot_tests").join("empty.svg");
        plot_success_curves(&[("empty".to_string(), vec![])], &out, 11).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.ends_with("</svg>"));
    }

    #[test]
    fn curves_are_deterministic() {
        let runs = vec![
            ("a".to_string(), (1..50).map(|k| row(k * 100, (k % 2) as u8)).collect()),
            ("b".to_string(), (1..50).map(|k| row(k * 120, 1)).collect()),
        ];
        let out1 = std::env::temp_dir().join("mopa_plot_tests").join("c1.svg");
        let out2 = std::env::temp_dir().join("mopa_plot_tests").join("c2.svg");
        plot_success_curves(&runs, &out1, 11).unwrap();
        plot_success_curves(&runs, &out2, 11).unwrap();
        assert_eq!(
            std::fs::read_to_string(&out1).unwrap(),
            std::fs::read_to_string(&out2).unwrap()
        );
    }

    #[test]
    fn heatmap_colors_monotone_in_count() {
        let mut map = CoverageMap::for_arm(0.44, 0.02);
        map.counts[0] = 1;
        map.counts[1] = 50;
        map.counts[2] = 500;
        let out = std::env::temp_dir().join("mopa_plot_tests").join("heat.svg");
        plot_heatmap(&map, &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        // Extract the red channel of the three cells; must strictly decrease
        // (darker blue = more visits).
        let reds: Vec<u32> = text
            .match_indices("rgb(")
            .map(|(i, _)| {
                let rest = &text[i + 4..];
                rest.split(',').next().unwrap().parse().unwrap()
            })
            .collect();
        assert_eq!(reds.len(), 3);
        assert!(reds[0] > reds[1] && reds[1] > reds[2], "{reds:?}");
    }

    #[test]
    fn panels_render() {
        let runs = vec![("x".to_string(), (1..30).map(|k| row(k * 50, 1)).collect())];
        let out = std::env::temp_dir().join("mopa_plot_tests").join("panels.svg");
        plot_panels(&runs, &out, 11).unwrap();
        assert!(std::fs::read_to_string(&out).unwrap().contains("Blocked-step"));
    }
}
