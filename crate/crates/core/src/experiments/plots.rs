//! Static SVG charts. Logarithmic axes are drawn as base-10 logarithms of
//! the data on linear axes.

use plotters::prelude::*;

use crate::{Error, Result};

/// Points `(x, y, std)` of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn plot_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::Format(format!("plotting failed: {e:?}"))
}

fn tr(v: f64, log: bool) -> Option<f64> {
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        v.is_finite().then_some(v)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn label(text: &str, log: bool) -> String {
    if log {
        format!("log10 {text}")
    } else {
        text.to_string()
    }
}

/// Puts a comment right after the opening `<svg …>` tag.
pub fn with_comment(svg: String, comment: &str) -> String {
    let safe = comment.replace("--", "- -");
    match svg.find("<svg").and_then(|s| svg[s..].find('>').map(|e| s + e + 1)) {
        Some(at) => format!("{}\n<!-- {safe} -->{}", &svg[..at], &svg[at..]),
        None => svg,
    }
}

/// Curves with vertical one-std error bars.
pub fn line_chart(title: &str, axes: &Axes, series: &[Series]) -> Result<String> {
    let curves: Vec<(String, Vec<(f64, f64, f64, f64)>)> = series
        .iter()
        .map(|s| {
            let pts = s
                .points
                .iter()
                .filter_map(|&(x, y, e)| {
                    let x = tr(x, axes.log_x)?;
                    let yc = tr(y, axes.log_y)?;
                    let lo = tr(y - e, axes.log_y).unwrap_or(yc).min(yc);
                    let hi = tr(y + e, axes.log_y).unwrap_or(yc).max(yc);
                    Some((x, yc, lo, hi))
                })
                .collect();
            (s.label.clone(), pts)
        })
        .collect();
    let all = curves.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, _, lo, hi) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(lo);
        y1 = y1.max(hi);
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);

    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (640, 440)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(label(&axes.x_label, axes.log_x))
            .y_desc(label(&axes.y_label, axes.log_y))
            .draw()
            .map_err(plot_err)?;
        for (i, (name, pts)) in curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().map(|p| (p.0, p.1)), color.stroke_width(2)))
                .map_err(plot_err)?
                .label(name.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
            chart
                .draw_series(pts.iter().map(|p| Circle::new((p.0, p.1), 3, color.filled())))
                .map_err(plot_err)?;
            chart
                .draw_series(pts.iter().map(|p| ErrorBar::new_vertical(p.0, p.2, p.1, p.3, color.filled(), 6)))
                .map_err(plot_err)?;
        }
        if curves.len() > 1 {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
        }
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

fn ramp(t: f64) -> RGBColor {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    RGBColor(lerp(49.0, 220.0), lerp(54.0, 50.0), lerp(149.0, 32.0))
}

/// Scatter of `(x, y)` points colored from blue (smallest `c`) to red
/// (largest `c`).
pub fn scatter_chart(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64, f64)]) -> Result<String> {
    let fin = |v: &f64| v.is_finite();
    let bounds = |f: fn(&(f64, f64, f64)) -> f64| {
        let vals: Vec<f64> = points.iter().map(f).filter(fin).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let (c0, c1) = bounds(|p| p.2);
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);
    let span = if c1 > c0 { c1 - c0 } else { 1.0 };

    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (560, 480)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc(y_label)
            .draw()
            .map_err(plot_err)?;
        chart
            .draw_series(
                points
                    .iter()
                    .filter(|p| p.0.is_finite() && p.1.is_finite())
                    .map(|p| Circle::new((p.0, p.1), 2, ramp((p.2 - c0) / span).filled())),
            )
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_render() {
        let s = Series {
            label: "a".into(),
            points: vec![(1.0, 2.0, 0.1), (10.0, 0.5, 0.2), (100.0, 0.1, 0.0)],
        };
        let axes = Axes {
            x_label: "n".into(),
            y_label: "error".into(),
            log_x: true,
            log_y: true,
        };
        let svg = line_chart("t", &axes, &[s.clone(), Series { label: "b".into(), ..s }]).unwrap();
        assert!(svg.contains("<svg") && svg.contains("log10 n"));
        let svg = with_comment(svg, "fingerprint abc");
        assert!(svg.contains("<!-- fingerprint abc -->"));
        let pts: Vec<(f64, f64, f64)> = (0..50).map(|i| (i as f64, (i as f64).sin(), i as f64)).collect();
        assert!(scatter_chart("z", "z1", "z2", &pts).unwrap().contains("<circle"));
        assert!(line_chart("empty", &axes, &[]).is_ok());
    }
}
