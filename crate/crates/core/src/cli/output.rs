use std::fmt::Write as _;
use std::io;
use std::path::Path;

use num_complex::Complex64;

use crate::bounds::EnclosureCurves;
use crate::spectrum::{SpectrumArcs, Window};

/// File-name fragment for `h`, e.g. `0.25`.
pub fn h_tag(h: f64) -> String {
    format!("{h}")
}

/// Arc rows followed by two endpoint rows per axis band. Returns the arc ids
/// given to the axis bands.
pub fn spectrum_csv(arcs: &SpectrumArcs, band_edge_delta: &[[f64; 2]]) -> (String, Vec<usize>) {
    let mut s = String::from("h,arc_id,vertex_id,re_z,im_z,re_delta\n");
    let h = arcs.h;
    for (a, arc) in arcs.arcs.iter().enumerate() {
        for (v, p) in arc.iter().enumerate() {
            let _ = writeln!(s, "{h},{a},{v},{},{},{}", p.z.re, p.z.im, p.re_delta);
        }
    }
    let mut ids = Vec::new();
    for (k, (band, deltas)) in arcs.axis_bands.iter().zip(band_edge_delta).enumerate() {
        let id = arcs.arcs.len() + k;
        ids.push(id);
        for v in 0..2 {
            let _ = writeln!(s, "{h},{id},{v},{},0,{}", band[v], deltas[v]);
        }
    }
    (s, ids)
}

pub fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    std::fs::write(path, contents)
}

/// Layered SVG: enclosure boundaries, `Im Δ = 0` contours, arcs, markers.
pub struct SvgPlot<'a> {
    pub window: Window,
    pub title: String,
    pub enclosure: Option<&'a EnclosureCurves>,
    pub contours: &'a [Vec<Complex64>],
    pub arcs: &'a [Vec<Complex64>],
    pub markers: &'a [Complex64],
}

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;

impl SvgPlot<'_> {
    fn scale(&self) -> f64 {
        (WIDTH - 2.0 * MARGIN) / (self.window.re[1] - self.window.re[0])
    }

    fn height(&self) -> f64 {
        (self.window.im[1] - self.window.im[0]) * self.scale() + 2.0 * MARGIN
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        let s = self.scale();
        (
            MARGIN + (z.re - self.window.re[0]) * s,
            MARGIN + (self.window.im[1] - z.im) * s,
        )
    }

    fn path(&self, out: &mut String, line: &[Complex64], style: &str) {
        if line.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (k, &z) in line.iter().enumerate() {
            let (x, y) = self.map(z);
            let _ = write!(d, "{}{x:.2},{y:.2}", if k == 0 { "M" } else { " L" });
        }
        let _ = writeln!(out, r#"    <path d="{d}" {style}/>"#);
    }

    pub fn render(&self) -> String {
        let h = self.height();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{h:.0}" viewBox="0 0 {WIDTH} {h:.0}">"#
        );
        let _ = writeln!(s, "  <title>{}</title>", self.title);
        let _ = writeln!(s, r#"  <rect width="100%" height="100%" fill="white"/>"#);
        let (x0, y0) = self.map(Complex64::new(self.window.re[0], self.window.im[1]));
        let (x1, y1) = self.map(Complex64::new(self.window.re[1], self.window.im[0]));
        let _ = writeln!(
            s,
            r#"  <rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="gray"/>"#,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(s, "  <defs><clipPath id=\"win\"><rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath></defs>", x1 - x0, y1 - y0);

        let _ = writeln!(s, r#"  <g id="enclosure" clip-path="url(#win)">"#);
        if let Some(enc) = self.enclosure {
            for line in &enc.lambda {
                self.path(&mut s, line, r#"fill="none" stroke="black" stroke-dasharray="6,4""#);
            }
            for line in &enc.cross {
                self.path(&mut s, line, r#"fill="none" stroke="gray" stroke-width="0.5""#);
            }
        }
        let _ = writeln!(s, "  </g>");

        let _ = writeln!(s, r#"  <g id="contours" clip-path="url(#win)">"#);
        for line in self.contours {
            self.path(&mut s, line, r#"fill="none" stroke="steelblue" stroke-width="0.6""#);
        }
        let _ = writeln!(s, "  </g>");

        let _ = writeln!(s, r#"  <g id="arcs" clip-path="url(#win)">"#);
        for line in self.arcs {
            self.path(&mut s, line, r#"fill="none" stroke="crimson" stroke-width="2""#);
        }
        let _ = writeln!(s, "  </g>");

        let _ = writeln!(s, r#"  <g id="markers">"#);
        for &z in self.markers {
            if self.window.contains(z, 0.0) {
                let (x, y) = self.map(z);
                let _ = writeln!(s, r#"    <circle cx="{x:.2}" cy="{y:.2}" r="4" fill="black"/>"#);
            }
        }
        let _ = writeln!(s, "  </g>");
        s.push_str("</svg>\n");
        s
    }
}
