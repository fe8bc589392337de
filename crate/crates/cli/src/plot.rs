//! Minimal file plots: line charts and sign rasters, as PNG or SVG.

use std::fmt::Write as _;

use image::{ImageEncoder, Rgb, RgbImage};

use crate::args::PlotFormat;

const W: u32 = 640;
const H: u32 = 480;
const MARGIN: f64 = 48.0;

const PALETTE: [[u8; 3]; 6] = [
    [31, 119, 180],
    [214, 39, 40],
    [44, 160, 44],
    [255, 127, 14],
    [148, 103, 189],
    [23, 190, 207],
];

pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub struct LineChart {
    pub title: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

/// Encoded plot with its file extension.
pub struct PlotFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl LineChart {
    fn tx(&self, v: f64) -> f64 {
        if self.log_x {
            v.log10()
        } else {
            v
        }
    }

    fn ty(&self, v: f64) -> f64 {
        if self.log_y {
            v.log10()
        } else {
            v
        }
    }

    fn points(&self, s: &Series) -> Vec<(f64, f64)> {
        s.x.iter()
            .zip(&s.y)
            .map(|(&a, &b)| (self.tx(a), self.ty(b)))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .collect()
    }

    fn frame(&self) -> Frame {
        let all: Vec<(f64, f64)> = self.series.iter().flat_map(|s| self.points(s)).collect();
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (a, b) in all {
            f.x0 = f.x0.min(a);
            f.x1 = f.x1.max(a);
            f.y0 = f.y0.min(b);
            f.y1 = f.y1.max(b);
        }
        if !f.x0.is_finite() {
            f = Frame {
                x0: 0.0,
                x1: 1.0,
                y0: 0.0,
                y1: 1.0,
            };
        }
        if f.x1 - f.x0 < 1e-12 {
            f.x0 -= 0.5;
            f.x1 += 0.5;
        }
        if f.y1 - f.y0 < 1e-12 {
            f.y0 -= 0.5;
            f.y1 += 0.5;
        }
        f
    }

    fn to_px(f: &Frame, a: f64, b: f64) -> (f64, f64) {
        let px = MARGIN + (a - f.x0) / (f.x1 - f.x0) * (W as f64 - 2.0 * MARGIN);
        let py = H as f64 - MARGIN - (b - f.y0) / (f.y1 - f.y0) * (H as f64 - 2.0 * MARGIN);
        (px, py)
    }

    pub fn render(&self, format: PlotFormat, stem: &str) -> PlotFile {
        match format {
            PlotFormat::Png => PlotFile {
                name: format!("{stem}.png"),
                bytes: self.png(),
            },
            PlotFormat::Svg => PlotFile {
                name: format!("{stem}.svg"),
                bytes: self.svg().into_bytes(),
            },
        }
    }

    fn png(&self) -> Vec<u8> {
        let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
        let f = self.frame();
        let (l, b) = (MARGIN, H as f64 - MARGIN);
        let black = Rgb([0, 0, 0]);
        line(&mut img, (l, b), (W as f64 - MARGIN, b), black);
        line(&mut img, (l, b), (l, MARGIN), black);
        for (i, s) in self.series.iter().enumerate() {
            let c = Rgb(PALETTE[i % PALETTE.len()]);
            let pts: Vec<(f64, f64)> = self.points(s).into_iter().map(|(a, b)| Self::to_px(&f, a, b)).collect();
            for w in pts.windows(2) {
                line(&mut img, w[0], w[1], c);
            }
            for &(x, y) in &pts {
                for dx in -2..=2 {
                    for dy in -2..=2 {
                        put(&mut img, x as i64 + dx, y as i64 + dy, c);
                    }
                }
            }
        }
        encode_png(&img)
    }

    fn svg(&self) -> String {
        let f = self.frame();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
            MARGIN,
            escape(&self.title)
        );
        let b = H as f64 - MARGIN;
        let _ = writeln!(
            s,
            r#"<path d="M{MARGIN} {MARGIN} L{MARGIN} {b} L{} {b}" stroke="black" fill="none"/>"#,
            W as f64 - MARGIN
        );
        let axis = |log: bool, v: f64| if log { format!("1e{v:.2}") } else { format!("{v:.3}") };
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            b + 16.0,
            axis(self.log_x, f.x0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            W as f64 - MARGIN,
            b + 16.0,
            axis(self.log_x, f.x1)
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{b}" font-family="sans-serif" font-size="11">{}</text>"#,
            axis(self.log_y, f.y0)
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{MARGIN}" font-family="sans-serif" font-size="11">{}</text>"#,
            axis(self.log_y, f.y1)
        );
        for (i, ser) in self.series.iter().enumerate() {
            let [r, g, bl] = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = self
                .points(ser)
                .into_iter()
                .map(|(a, b)| {
                    let (x, y) = Self::to_px(&f, a, b);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" stroke="rgb({r},{g},{bl})" fill="none" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="rgb({r},{g},{bl})">{}</text>"#,
                W as f64 - MARGIN - 140.0,
                MARGIN + 16.0 * i as f64,
                escape(&ser.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        put(
            img,
            (a.0 + t * (b.0 - a.0)).round() as i64,
            (a.1 + t * (b.1 - a.1)).round() as i64,
            c,
        );
    }
}

fn encode_png(img: &RgbImage) -> Vec<u8> {
    let mut buf = Vec::new();
    image::codecs::png::PngEncoder::new(&mut buf)
        .write_image(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgb8)
        .expect("png encoding into memory");
    buf
}

/// Sign raster, row 0 at the top: `+` red, `-` blue, zero band white.
pub fn sign_raster(signs: &[i8], width: usize, height: usize, format: PlotFormat, stem: &str) -> PlotFile {
    let color = |s: i8| match s {
        1 => [214, 39, 40],
        -1 => [31, 119, 180],
        _ => [255, 255, 255],
    };
    match format {
        PlotFormat::Png => {
            let mut img = RgbImage::new(width as u32, height as u32);
            for row in 0..height {
                for col in 0..width {
                    img.put_pixel(col as u32, row as u32, Rgb(color(signs[row * width + col])));
                }
            }
            PlotFile {
                name: format!("{stem}.png"),
                bytes: encode_png(&img),
            }
        }
        PlotFormat::Svg => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" shape-rendering="crispEdges">"#
            );
            for row in 0..height {
                let mut col = 0;
                while col < width {
                    let v = signs[row * width + col];
                    let start = col;
                    while col < width && signs[row * width + col] == v {
                        col += 1;
                    }
                    let [r, g, b] = color(v);
                    let _ = writeln!(
                        s,
                        r#"<rect x="{start}" y="{row}" width="{}" height="1" fill="rgb({r},{g},{b})"/>"#,
                        col - start
                    );
                }
            }
            s.push_str("</svg>\n");
            PlotFile {
                name: format!("{stem}.svg"),
                bytes: s.into_bytes(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> LineChart {
        LineChart {
            title: "t".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "a".into(),
                x: vec![0.1, 0.01, 0.001],
                y: vec![10.0, 100.0, 1000.0],
            }],
        }
    }

    #[test]
    fn png_is_deterministic() {
        let a = chart().render(PlotFormat::Png, "fit");
        let b = chart().render(PlotFormat::Png, "fit");
        assert_eq!(a.name, "fit.png");
        assert_eq!(&a.bytes[1..4], b"PNG");
        assert_eq!(a.bytes, b.bytes);
    }

    #[test]
    fn svg_and_raster() {
        let s = String::from_utf8(chart().render(PlotFormat::Svg, "fit").bytes).unwrap();
        assert!(s.starts_with("<svg") && s.contains("polyline"));
        let r = sign_raster(&[1, 0, -1, 1], 2, 2, PlotFormat::Svg, "signs");
        assert!(String::from_utf8(r.bytes).unwrap().matches("<rect").count() == 4);
        let p = sign_raster(&[1, 0, -1, 1], 2, 2, PlotFormat::Png, "signs");
        assert_eq!(p.name, "signs.png");
    }
}
