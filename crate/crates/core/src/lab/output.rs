use super::AggregateTrace;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// 12 significant digits, trailing zeros trimmed; plain notation for
/// moderate exponents, scientific otherwise.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let s = format!("{:.*}", (11 - exp).max(0) as usize, v);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_string(traces: &[AggregateTrace]) -> String {
    let mut s = String::from("t,series,mean,std\n");
    for tr in traces {
        for i in 0..tr.xs.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                format_value(tr.xs[i]),
                tr.series,
                format_value(tr.mean[i]),
                format_value(tr.std[i])
            );
        }
    }
    s
}

pub fn emit_csv(traces: &[AggregateTrace], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(traces)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Inverse of [`csv_string`]; series keep their first-appearance order.
pub fn parse_csv(text: &str) -> Result<Vec<AggregateTrace>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "t,series,mean,std")) => {}
        _ => return Err(Error::Parse { line: 1, msg: "expected header t,series,mean,std".into() }),
    }
    let mut out: Vec<AggregateTrace> = Vec::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse { line: i + 1, msg: format!("malformed row {line:?}") };
        if f.len() != 4 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let (x, m, sd) = (num(f[0])?, num(f[2])?, num(f[3])?);
        let idx = match out.iter().position(|t| t.series == f[1]) {
            Some(j) => j,
            None => {
                out.push(AggregateTrace { series: f[1].to_string(), xs: vec![], mean: vec![], std: vec![] });
                out.len() - 1
            }
        };
        out[idx].xs.push(x);
        out[idx].mean.push(m);
        out[idx].std.push(sd);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const W: f64 = 800.0;
const H: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Indices kept for plotting: uniform stride, last point always included.
pub fn downsample(len: usize) -> Vec<usize> {
    if len <= MAX_POINTS {
        return (0..len).collect();
    }
    let stride = len.div_ceil(MAX_POINTS - 1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    trim_zeros(&s).to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// A line chart: solid mean, dashed mean + std, one legend entry per series.
pub fn render_svg(traces: &[AggregateTrace], style: &PlotStyle) -> Result<String> {
    if traces.is_empty() || traces.iter().all(|t| t.xs.is_empty()) {
        return Err(Error::Domain("nothing to plot".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for t in traces {
        for i in 0..t.xs.len() {
            x0 = x0.min(t.xs[i]);
            x1 = x1.max(t.xs[i]);
            for v in [t.mean[i], t.mean[i] + t.std[i]] {
                if v.is_finite() {
                    y0 = y0.min(v);
                    y1 = y1.max(v);
                }
            }
        }
    }
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        (x0, x1) = (x0 - 1.0, x1 + 1.0);
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { y0.abs() * 0.5 };
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&style.title)
    );
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in nice_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ =
            writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 19.0, tick_label(t));
    }
    for t in nice_ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="rgb(221,221,221)"/>"#,
            LEFT + pw
        );
        let _ =
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(t));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 15.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&style.y_label)
    );
    for (i, t) in traces.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let idx = downsample(t.xs.len());
        let pts = |f: &dyn Fn(usize) -> f64| {
            idx.iter()
                .filter(|j| f(**j).is_finite())
                .map(|j| format!("{:.2},{:.2}", sx(t.xs[*j]), sy(f(*j))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        if t.std.iter().any(|v| *v > 0.0) {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1" stroke-dasharray="4,3" opacity="0.7" points="{}"/>"#,
                pts(&|j| t.mean[j] + t.std[j])
            );
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts(&|j| t.mean[j])
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&t.series));
    }
    let ly = TOP + 10.0 + 18.0 * traces.len() as f64;
    let lx = LEFT + pw + 12.0;
    let _ = writeln!(
        s,
        r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="black" stroke-dasharray="4,3"/>"#,
        lx + 20.0
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">mean + std</text>"#, lx + 26.0, ly + 4.0);
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_plot(traces: &[AggregateTrace], style: &PlotStyle, path: &Path) -> Result<()> {
    let svg = render_svg(traces, style)?;
    std::fs::write(path, svg).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace(name: &str, mean: Vec<f64>) -> AggregateTrace {
        let n = mean.len();
        AggregateTrace { series: name.into(), xs: (1..=n).map(|t| t as f64).collect(), mean, std: vec![0.0; n] }
    }

    fn style() -> PlotStyle {
        PlotStyle { title: "t".into(), x_label: "x".into(), y_label: "y".into() }
    }

    #[test]
    fn formatting() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(3.0), "3");
        assert_eq!(format_value(2000.0), "2000");
        assert_eq!(format_value(0.1), "0.1");
        assert_eq!(format_value(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_value(-2.5e-9), "-2.5e-9");
        assert_eq!(format_value(123_456_789.123_456_78), "123456789.123");
        assert_eq!(format_value(1e20), "1e20");
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(csv_string(&[]), "t,series,mean,std\n");
        let s = csv_string(&[trace("a/b", vec![1.0, 2.5])]);
        assert_eq!(s, "t,series,mean,std\n1,a/b,1,0\n2,a/b,2.5,0\n");
        assert_eq!(s.lines().count(), 3);
        assert!(!s.contains('\r'));
    }

    proptest! {
        #[test]
        fn csv_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let tr = trace("s", vals.clone());
            let back = parse_csv(&csv_string(&[tr])).unwrap();
            for (a, b) in back[0].mean.iter().zip(&vals) {
                prop_assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn svg_shapes() {
        let flat = render_svg(&[trace("c", vec![2.0; 10])], &style()).unwrap();
        let line = flat.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
        let two = render_svg(&[trace("a", vec![1.0, 2.0]), trace("b", vec![2.0, 1.0])], &style()).unwrap();
        assert!(two.contains(">a</text>") && two.contains(">b</text>"));
        assert_eq!(two, render_svg(&[trace("a", vec![1.0, 2.0]), trace("b", vec![2.0, 1.0])], &style()).unwrap());
        assert!(render_svg(&[], &style()).is_err());
    }

    #[test]
    fn downsampling_caps_points() {
        let idx = downsample(100_000);
        assert!(idx.len() <= 2000);
        assert_eq!(*idx.last().unwrap(), 99_999);
        assert_eq!(downsample(5), vec![0, 1, 2, 3, 4]);
    }
}
