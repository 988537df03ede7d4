//! Static SVG figures: coverage/signal line charts, precision-recall
//! curves, and class-colored embedding scatters. Output is plain string
//! building with fixed formatting, so identical inputs give identical
//! bytes.

use std::fmt::Write as _;

use crate::class::ReadClass;
use crate::eval::PRCurve;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Class display colors, in canonical class order.
pub const CLASS_COLORS: [&str; 4] = ["red", "green", "blue", "yellow"];

pub fn class_color(c: ReadClass) -> &'static str {
    CLASS_COLORS[c.index()]
}

struct Canvas {
    svg: String,
    x0: f64,
    y0: f64,
    plot_w: f64,
    plot_h: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Canvas {
    fn new(title: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Canvas {
        let mut svg = String::new();
        write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        )
        .unwrap();
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        write!(
            svg,
            "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            escape(title)
        )
        .unwrap();
        Canvas {
            svg,
            x0: MARGIN_LEFT,
            y0: MARGIN_TOP,
            plot_w: WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            plot_h: HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
            x_range,
            y_range,
        }
    }

    fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let f = if hi > lo { (x - lo) / (hi - lo) } else { 0.5 };
        self.x0 + f * self.plot_w
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let f = if hi > lo { (y - lo) / (hi - lo) } else { 0.5 };
        self.y0 + (1.0 - f) * self.plot_h
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x1, y1) = (self.x0, self.y0 + self.plot_h);
        let (x2, y2) = (self.x0 + self.plot_w, self.y0);
        write!(
            self.svg,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n",
            x2
        )
        .unwrap();
        write!(
            self.svg,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x1:.2}\" y2=\"{y2:.2}\" stroke=\"black\"/>\n"
        )
        .unwrap();
        write!(
            self.svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            self.x0 + self.plot_w / 2.0,
            HEIGHT - 12.0,
            escape(x_label)
        )
        .unwrap();
        write!(
            self.svg,
            "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
            self.y0 + self.plot_h / 2.0,
            self.y0 + self.plot_h / 2.0,
            escape(y_label)
        )
        .unwrap();
        for i in 0..=4 {
            let fx = self.x_range.0 + (self.x_range.1 - self.x_range.0) * i as f64 / 4.0;
            let fy = self.y_range.0 + (self.y_range.1 - self.y_range.0) * i as f64 / 4.0;
            write!(
                self.svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.2}</text>\n",
                self.px(fx),
                y1 + 16.0,
                fx
            )
            .unwrap();
            write!(
                self.svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.2}</text>\n",
                x1 - 6.0,
                self.py(fy) + 4.0,
                fy
            )
            .unwrap();
        }
    }

    fn polyline(&mut self, points: impl Iterator<Item = (f64, f64)>, color: &str) {
        let mut path = String::new();
        for (x, y) in points {
            if !path.is_empty() {
                path.push(' ');
            }
            write!(path, "{:.2},{:.2}", self.px(x), self.py(y)).unwrap();
        }
        write!(
            self.svg,
            "<polyline points=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        )
        .unwrap();
    }

    fn circle(&mut self, x: f64, y: f64, color: &str) {
        write!(
            self.svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n",
            self.px(x),
            self.py(y)
        )
        .unwrap();
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        let lx = self.x0 + self.plot_w + 16.0;
        for (i, (label, color)) in entries.iter().enumerate() {
            let ly = self.y0 + 16.0 * (i as f64 + 1.0);
            write!(
                self.svg,
                "<rect class=\"legend\" x=\"{lx:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
                ly - 9.0
            )
            .unwrap();
            write!(
                self.svg,
                "<text x=\"{:.2}\" y=\"{ly:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                lx + 14.0,
                escape(label)
            )
            .unwrap();
        }
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of one or more named series over their index.
pub fn plot_series(title: &str, series: &[(String, String, Vec<f64>)]) -> String {
    let max_len = series.iter().map(|(_, _, v)| v.len()).max().unwrap_or(1);
    let max_y = series
        .iter()
        .flat_map(|(_, _, v)| v.iter().cloned())
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1e-12);
    let mut canvas = Canvas::new(title, (0.0, (max_len.max(2) - 1) as f64), (0.0, max_y));
    canvas.axes("position", "value");
    for (_, color, values) in series {
        canvas.polyline(
            values.iter().enumerate().map(|(i, &v)| (i as f64, v)),
            color,
        );
    }
    let entries: Vec<(&str, &str)> = series
        .iter()
        .map(|(l, c, _)| (l.as_str(), c.as_str()))
        .collect();
    canvas.legend(&entries);
    canvas.finish()
}

/// Precision-recall curves on the unit square.
pub fn plot_pr(title: &str, curves: &[(String, String, PRCurve)]) -> String {
    let mut canvas = Canvas::new(title, (0.0, 1.0), (0.0, 1.0));
    canvas.axes("recall", "precision");
    for (_, color, curve) in curves {
        // ascending recall for a left-to-right trace
        let mut pts: Vec<(f64, f64)> = curve
            .points
            .iter()
            .map(|p| (p.recall, p.precision))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        canvas.polyline(pts.into_iter(), color);
    }
    let entries: Vec<(&str, &str)> = curves
        .iter()
        .map(|(l, c, _)| (l.as_str(), c.as_str()))
        .collect();
    canvas.legend(&entries);
    canvas.finish()
}

/// Class-colored 2-D scatter of an embedding.
pub fn plot_scatter(title: &str, points: &[[f64; 2]], classes: &[ReadClass]) -> String {
    assert_eq!(points.len(), classes.len());
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x_lo = x_lo.min(p[0]);
        x_hi = x_hi.max(p[0]);
        y_lo = y_lo.min(p[1]);
        y_hi = y_hi.max(p[1]);
    }
    if points.is_empty() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad_x = ((x_hi - x_lo) * 0.05).max(1e-9);
    let pad_y = ((y_hi - y_lo) * 0.05).max(1e-9);
    let mut canvas = Canvas::new(
        title,
        (x_lo - pad_x, x_hi + pad_x),
        (y_lo - pad_y, y_hi + pad_y),
    );
    canvas.axes("dim 1", "dim 2");
    for (p, &c) in points.iter().zip(classes) {
        canvas.circle(p[0], p[1], class_color(c));
    }
    let entries: Vec<(&str, &str)> = ReadClass::ALL
        .iter()
        .map(|&c| (c.as_str(), class_color(c)))
        .collect();
    canvas.legend(&entries);
    canvas.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_plot_is_well_formed_and_deterministic() {
        let series = vec![(
            "depth".to_string(),
            "steelblue".to_string(),
            vec![1.0, 4.0, 2.0, 8.0],
        )];
        let a = plot_series("coverage", &series);
        let b = plot_series("coverage", &series);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert!(a.contains("polyline"));
    }

    #[test]
    fn scatter_has_four_legend_entries_with_class_colors() {
        let points = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 0.5], [0.5, 2.0]];
        let classes = vec![
            ReadClass::Chimeric,
            ReadClass::LeftRepeat,
            ReadClass::RightRepeat,
            ReadClass::Regular,
        ];
        let svg = plot_scatter("latents", &points, &classes);
        for color in CLASS_COLORS {
            assert!(svg.contains(&format!("fill=\"{color}\"")), "{color}");
        }
        assert_eq!(svg.matches("class=\"legend\"").count(), 4);
    }

    #[test]
    fn titles_are_escaped() {
        let svg = plot_series("a < b & c", &[]);
        assert!(svg.contains("a &lt; b &amp; c"));
    }
}
