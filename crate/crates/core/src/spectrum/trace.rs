//! Spectral arcs as the part of `{Im Δ = 0}` where `Re Δ ∈ [−1, 1]`.
//!
//! The zero set of `Im Δ` is traced by marching squares on the grid and each
//! vertex is then pulled onto the true curve by Newton's method. Grid lines
//! on which `Im Δ` vanishes identically (the real axis for real potentials,
//! for example) defeat sign-change detection; they are found up front,
//! excluded from marching squares, and scanned as one-dimensional intervals.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{DiscriminantField, Window};
use super::roots::{newton, NewtonSettings, Target};
use crate::error::{Error, Result};

pub const DEFAULT_TRACE_TOL: f64 = 1e-6;

const NEWTON_ITERS: usize = 20;
const BISECTION_ITERS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcPoint {
    pub z: Complex64,
    pub re_delta: f64,
    /// Refined onto `Δ = ±1`.
    pub band_edge: bool,
}

/// A contour vertex whose refinement failed or left the band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedVertex {
    pub seed: Complex64,
    pub z: Complex64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumArcs {
    pub h: f64,
    pub window: Window,
    pub cell: (f64, f64),
    pub trace_tol: f64,
    /// Polylines on the spectrum, vertices within `trace_tol` of `Δ ∈ [−1, 1]`.
    pub arcs: Vec<Vec<ArcPoint>>,
    /// Real intervals `[a, b]` of spectrum lying on a degenerate real-axis row.
    pub axis_bands: Vec<[f64; 2]>,
    /// Unfiltered `{Im Δ = 0}` polylines from marching squares.
    pub contours: Vec<Vec<Complex64>>,
    pub flagged: Vec<FlaggedVertex>,
}

impl SpectrumArcs {
    pub fn vertex_count(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty() && self.axis_bands.is_empty()
    }

    /// Arc vertices plus axis-band points spaced at most one cell apart.
    pub fn sample_points(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.arcs.iter().flatten().map(|p| p.z).collect();
        for &[a, b] in &self.axis_bands {
            let n = ((b - a) / self.cell.0).ceil().max(1.0) as usize;
            out.extend((0..=n).map(|k| Complex64::new(a + (b - a) * k as f64 / n as f64, 0.0)));
        }
        out
    }

    /// Polylines covering the spectrum, axis bands included as two-point segments.
    pub fn polylines(&self) -> Vec<Vec<Complex64>> {
        let mut out: Vec<Vec<Complex64>> = self
            .arcs
            .iter()
            .map(|a| a.iter().map(|p| p.z).collect())
            .collect();
        for &[a, b] in &self.axis_bands {
            out.push(vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)]);
        }
        out
    }
}

/// A point where the piecewise-linear `Im Δ` changes sign on a grid edge.
#[derive(Debug, Clone, Copy)]
struct Crossing {
    z: Complex64,
    re_delta: f64,
    on_line: bool,
}

#[derive(Debug, Clone, Copy)]
struct Seed {
    z: Complex64,
    edge: Option<f64>,
}

struct Tracer<'a> {
    field: &'a DiscriminantField,
    tol: f64,
    cell: (f64, f64),
    on_row: Vec<bool>,
    on_col: Vec<bool>,
}

/// Extracts the spectral arcs of `field` with vertex tolerance `trace_tol`.
pub fn trace_spectrum(field: &DiscriminantField, trace_tol: f64) -> Result<SpectrumArcs> {
    if !field.failures.is_empty() {
        return Err(Error::FieldHasFailures(field.failures.len()));
    }
    if !(trace_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trace tolerance must be positive, got {trace_tol}"
        )));
    }
    let (on_row, on_col) = degenerate_lines(field, trace_tol);
    let tracer = Tracer {
        field,
        tol: trace_tol,
        cell: field.cell_size(),
        on_row,
        on_col,
    };
    let chains = tracer.march();

    let mut out = SpectrumArcs {
        h: field.h,
        window: field.window,
        cell: tracer.cell,
        trace_tol,
        arcs: Vec::new(),
        axis_bands: Vec::new(),
        contours: chains
            .iter()
            .map(|c| c.iter().map(|p| p.z).collect())
            .collect(),
        flagged: Vec::new(),
    };
    for chain in &chains {
        for piece in band_pieces(chain) {
            let arc = tracer.refine_piece(&piece, &mut out.flagged);
            if arc.len() >= 2 {
                out.arcs.push(arc);
            }
        }
    }
    tracer.scan_lines(&mut out)?;
    Ok(out)
}

/// Rows and columns on which every node has `Im Δ ≈ 0` while a neighbouring
/// line does not.
fn degenerate_lines(field: &DiscriminantField, tol: f64) -> (Vec<bool>, Vec<bool>) {
    let flat = |d: Complex64| d.im.abs() <= tol * d.norm().max(1.0);
    let flat_row: Vec<bool> = (0..field.ny)
        .map(|j| (0..field.nx).all(|i| flat(field.value(i, j))))
        .collect();
    let flat_col: Vec<bool> = (0..field.nx)
        .map(|i| (0..field.ny).all(|j| flat(field.value(i, j))))
        .collect();
    let isolate = |v: &[bool]| -> Vec<bool> {
        (0..v.len())
            .map(|k| {
                v[k] && ((k > 0 && !v[k - 1]) || (k + 1 < v.len() && !v[k + 1]))
            })
            .collect()
    };
    (isolate(&flat_row), isolate(&flat_col))
}

impl Tracer<'_> {
    fn on_line(&self, i: usize, j: usize) -> bool {
        self.on_row[j] || self.on_col[i]
    }

    /// `Im Δ` with degenerate-line nodes pinned to zero.
    fn g(&self, i: usize, j: usize) -> f64 {
        if self.on_line(i, j) {
            0.0
        } else {
            self.field.value(i, j).im
        }
    }

    fn positive(&self, i: usize, j: usize) -> bool {
        self.g(i, j) >= 0.0
    }

    fn edge_id(&self, i: usize, j: usize, vertical: bool) -> usize {
        2 * (i * self.field.ny + j) + vertical as usize
    }

    fn crossing(&self, id: usize) -> Crossing {
        let node = id / 2;
        let (i, j) = (node / self.field.ny, node % self.field.ny);
        let (i2, j2) = if id % 2 == 1 { (i, j + 1) } else { (i + 1, j) };
        let (ga, gb) = (self.g(i, j), self.g(i2, j2));
        let t = (ga / (ga - gb)).clamp(0.0, 1.0);
        let (za, zb) = (self.field.node(i, j), self.field.node(i2, j2));
        let (ra, rb) = (self.field.value(i, j).re, self.field.value(i2, j2).re);
        Crossing {
            z: za + (zb - za) * t,
            re_delta: ra + (rb - ra) * t,
            on_line: (t == 0.0 && self.on_line(i, j)) || (t == 1.0 && self.on_line(i2, j2)),
        }
    }

    /// Marching squares on `Im Δ`, assembled into chains of crossings.
    fn march(&self) -> Vec<Vec<Crossing>> {
        let (nx, ny) = (self.field.nx, self.field.ny);
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut link = |a: usize, b: usize| {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        };
        for i in 0..nx - 1 {
            for j in 0..ny - 1 {
                // Corners counter-clockwise from bottom-left; edge k joins corner k to k+1.
                let s = [
                    self.positive(i, j),
                    self.positive(i + 1, j),
                    self.positive(i + 1, j + 1),
                    self.positive(i, j + 1),
                ];
                let e = [
                    self.edge_id(i, j, false),
                    self.edge_id(i + 1, j, true),
                    self.edge_id(i, j + 1, false),
                    self.edge_id(i, j, true),
                ];
                let cut: Vec<usize> = (0..4).filter(|&k| s[k] != s[(k + 1) % 4]).collect();
                match cut.len() {
                    2 => link(e[cut[0]], e[cut[1]]),
                    4 => {
                        let centre = 0.25
                            * (self.g(i, j) + self.g(i + 1, j) + self.g(i + 1, j + 1) + self.g(i, j + 1));
                        if (centre >= 0.0) == s[0] {
                            // Corners 0 and 2 connect through the centre; cut off 1 and 3.
                            link(e[0], e[1]);
                            link(e[2], e[3]);
                        } else {
                            link(e[3], e[0]);
                            link(e[1], e[2]);
                        }
                    }
                    _ => {}
                }
            }
        }

        let mut visited = std::collections::BTreeSet::new();
        let mut chains = Vec::new();
        let starts: Vec<usize> = adj
            .iter()
            .filter(|(_, n)| n.len() == 1)
            .map(|(&k, _)| k)
            .chain(adj.keys().copied())
            .collect();
        for start in starts {
            if visited.contains(&start) {
                continue;
            }
            let mut ids = vec![start];
            visited.insert(start);
            let mut cur = start;
            while let Some(&next) = adj[&cur].iter().find(|n| !visited.contains(*n)) {
                visited.insert(next);
                ids.push(next);
                cur = next;
            }
            if ids.len() > 2 && adj[&cur].contains(&start) {
                ids.push(start);
            }
            chains.push(ids.iter().map(|&id| self.crossing(id)).collect());
        }
        chains
    }

    fn settings(&self, tol: f64) -> NewtonSettings {
        let cell = self.cell.0.min(self.cell.1);
        NewtonSettings {
            tol,
            max_iter: NEWTON_ITERS,
            fd_step: cell / 100.0,
            max_step: cell,
        }
    }

    /// Newton refinement of one band piece; failures go to `flagged`.
    fn refine_piece(&self, piece: &[Seed], flagged: &mut Vec<FlaggedVertex>) -> Vec<ArcPoint> {
        let mut arc: Vec<ArcPoint> = Vec::with_capacity(piece.len());
        for seed in piece {
            match self.refine(seed) {
                Ok(p) => {
                    let dup = arc
                        .last()
                        .is_some_and(|q| (q.z - p.z).norm() <= 1e-9 * self.cell.0.min(self.cell.1));
                    if !dup {
                        arc.push(p);
                    }
                }
                Err(reason) => flagged.push(FlaggedVertex {
                    seed: seed.z,
                    z: reason.0,
                    reason: reason.1,
                }),
            }
        }
        arc
    }

    fn refine(&self, seed: &Seed) -> std::result::Result<ArcPoint, (Complex64, String)> {
        let eval = |z: Complex64| self.field.discriminant_at(z);
        let strict = self.settings((1e-2 * self.tol).min(1e-12));
        // At a band edge |ϱ₁| − 1 ≈ √(2|Δ ∓ 1|), so the residual must be tiny.
        let at_edge = self.settings(1e-14);
        let drift_limit = 2.0 * self.cell.0.max(self.cell.1);
        let run = |z0: Complex64, target: Target| -> Option<(Complex64, Complex64)> {
            let s = if matches!(target, Target::Value(_)) { &at_edge } else { &strict };
            let out = newton(&eval, z0, target, s).ok()?;
            let ok = out.delta.im.abs() <= self.tol
                && (out.z - seed.z).norm() <= drift_limit
                && out.z.is_finite();
            ok.then_some((out.z, out.delta))
        };

        let mut edge = seed.edge;
        let mut hit = match edge {
            Some(s) => run(seed.z, Target::Value(Complex64::new(s, 0.0))),
            None => None,
        };
        if hit.is_none() {
            edge = None;
            hit = run(seed.z, Target::RealAxis);
        }
        let Some((mut z, mut d)) = hit else {
            return Err((seed.z, "refinement did not converge".into()));
        };
        if d.re.abs() > 1.0 + self.tol && edge.is_none() {
            // Interpolation put the seed inside the band but the curve is just
            // outside: move it to the nearby band edge instead.
            let s = d.re.signum();
            match run(z, Target::Value(Complex64::new(s, 0.0))) {
                Some((ze, de)) => {
                    z = ze;
                    d = de;
                    edge = Some(s);
                }
                None => return Err((z, format!("Re delta = {} outside the band", d.re))),
            }
        }
        Ok(ArcPoint {
            z,
            re_delta: d.re,
            band_edge: edge.is_some(),
        })
    }

    /// One-dimensional scan of every degenerate row and column.
    fn scan_lines(&self, out: &mut SpectrumArcs) -> Result<()> {
        let (nx, ny) = (self.field.nx, self.field.ny);
        for j in (0..ny).filter(|&j| self.on_row[j]) {
            let nodes: Vec<(usize, usize)> = (0..nx).map(|i| (i, j)).collect();
            let real_axis = self.field.node(0, j).im.abs() <= 1e-12 * self.cell.1;
            for seg in self.scan(&nodes)? {
                if real_axis {
                    out.axis_bands.push([seg[0].z.re, seg[seg.len() - 1].z.re]);
                } else {
                    out.arcs.push(seg);
                }
            }
        }
        for i in (0..nx).filter(|&i| self.on_col[i]) {
            let nodes: Vec<(usize, usize)> = (0..ny).map(|j| (i, j)).collect();
            out.arcs.extend(self.scan(&nodes)?);
        }
        Ok(())
    }

    fn scan(&self, nodes: &[(usize, usize)]) -> Result<Vec<Vec<ArcPoint>>> {
        let inside = |&(i, j): &(usize, usize)| self.field.value(i, j).re.abs() <= 1.0 + self.tol;
        let point = |&(i, j): &(usize, usize)| ArcPoint {
            z: self.field.node(i, j),
            re_delta: self.field.value(i, j).re,
            band_edge: false,
        };
        let min_len = 1e-6 * self.cell.0.min(self.cell.1);
        let mut segs = Vec::new();
        let mut k = 0;
        while k < nodes.len() {
            if !inside(&nodes[k]) {
                k += 1;
                continue;
            }
            let a = k;
            while k + 1 < nodes.len() && inside(&nodes[k + 1]) {
                k += 1;
            }
            let b = k;
            k += 1;

            let mut seg = Vec::with_capacity(b - a + 3);
            if a > 0 {
                seg.push(self.bisect(nodes[a], nodes[a - 1])?);
            }
            seg.extend(nodes[a..=b].iter().map(point));
            if b + 1 < nodes.len() {
                seg.push(self.bisect(nodes[b], nodes[b + 1])?);
            }
            seg.dedup_by(|x, y| (x.z - y.z).norm() <= min_len);
            let span = (seg[seg.len() - 1].z - seg[0].z).norm();
            if seg.len() >= 2 && span > min_len {
                segs.push(seg);
            }
        }
        Ok(segs)
    }

    /// Band edge between an inside node and an outside node on a line.
    fn bisect(&self, inner: (usize, usize), outer: (usize, usize)) -> Result<ArcPoint> {
        let mut zi = self.field.node(inner.0, inner.1);
        let mut di = self.field.value(inner.0, inner.1);
        if di.re.abs() > 1.0 {
            return Ok(ArcPoint {
                z: zi,
                re_delta: di.re,
                band_edge: true,
            });
        }
        let mut zo = self.field.node(outer.0, outer.1);
        for _ in 0..BISECTION_ITERS {
            let mid = (zi + zo) * 0.5;
            let d = self.field.discriminant_at(mid)?;
            if d.re.abs() <= 1.0 {
                zi = mid;
                di = d;
            } else {
                zo = mid;
            }
        }
        Ok(ArcPoint {
            z: zi,
            re_delta: di.re,
            band_edge: true,
        })
    }
}

/// Splits a chain at degenerate-line points, then keeps the stretches with
/// `Re Δ ∈ [−1, 1]`, cutting linearly at `±1` and marking the cuts.
fn band_pieces(chain: &[Crossing]) -> Vec<Vec<Seed>> {
    let mut pieces = Vec::new();
    for run in chain.split(|c| c.on_line) {
        let mut cur: Vec<Seed> = Vec::new();
        for (k, c) in run.iter().enumerate() {
            let inside = c.re_delta.abs() <= 1.0;
            if inside {
                if cur.is_empty() && k > 0 {
                    cur.push(clip(&run[k - 1], c));
                }
                cur.push(Seed { z: c.z, edge: None });
            } else if !cur.is_empty() {
                cur.push(clip(c, &run[k - 1]));
                pieces.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            pieces.push(cur);
        }
    }
    pieces.retain(|p| p.len() >= 2);
    pieces
}

/// Point on the segment from `outside` to `inside` where `Re Δ` hits `±1`.
fn clip(outside: &Crossing, inside: &Crossing) -> Seed {
    let bound = outside.re_delta.signum();
    let t = (bound - inside.re_delta) / (outside.re_delta - inside.re_delta);
    Seed {
        z: inside.z + (outside.z - inside.z) * t,
        edge: Some(bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PeriodicPotential;
    use crate::spectrum::field::discriminant_field;
    use crate::transfer::IntegratorConfig;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(pot: &PeriodicPotential, w: Window, nx: usize, ny: usize) -> DiscriminantField {
        discriminant_field(pot, 1.0, w, nx, ny, &IntegratorConfig::default()).unwrap()
    }

    fn check_vertices(pot: &PeriodicPotential, arcs: &SpectrumArcs) {
        for p in arcs.arcs.iter().flatten() {
            let d = crate::transfer::discriminant(pot, p.z, arcs.h, &Default::default()).unwrap();
            assert!(d.im.abs() <= arcs.trace_tol, "{p:?}: {d}");
            assert!(d.re.abs() <= 1.0 + arcs.trace_tol, "{p:?}: {d}");
        }
    }

    #[test]
    fn free_operator_spectrum_is_the_real_axis() {
        let pot = PeriodicPotential::zero();
        let f = field(&pot, Window::new(-5.0, 5.0, -2.0, 2.0), 21, 9);
        let arcs = trace_spectrum(&f, DEFAULT_TRACE_TOL).unwrap();
        assert_eq!(arcs.axis_bands, vec![[-5.0, 5.0]]);
        check_vertices(&pot, &arcs);
        // Any arc off the axis would be a spurious vertical contour.
        assert!(arcs.arcs.iter().flatten().all(|p| p.z.im.abs() < 1e-6));
    }

    #[test]
    fn sixteen_i_arcs_lie_on_hyperbola() {
        let pot = PeriodicPotential::constant(c(1.0, 0.0), c(0.0, 16.0));
        let f = field(&pot, Window::new(-6.0, 6.0, -5.0, 5.0), 41, 41);
        let arcs = trace_spectrum(&f, DEFAULT_TRACE_TOL).unwrap();
        assert!(!arcs.arcs.is_empty());
        assert!(arcs.axis_bands.is_empty());
        for p in arcs.arcs.iter().flatten() {
            let w = p.z * p.z - c(0.0, 16.0);
            assert!(w.im.abs() < 1e-5 && w.re > -1e-5, "{p:?}");
        }
        check_vertices(&pot, &arcs);
        let bp = c(2.0 * 2f64.sqrt(), 2.0 * 2f64.sqrt());
        let near = arcs.arcs.iter().flatten().map(|p| (p.z - bp).norm()).fold(f64::INFINITY, f64::min);
        assert!(near < 1e-6, "{near}");
    }

    #[test]
    fn focusing_cross_with_degenerate_axes() {
        let pot = PeriodicPotential::constant(c(-1.0, -1.0), c(1.0, -1.0));
        let f = field(&pot, Window::new(-3.0, 3.0, -3.0, 3.0), 25, 25);
        let arcs = trace_spectrum(&f, DEFAULT_TRACE_TOL).unwrap();
        assert_eq!(arcs.axis_bands, vec![[-3.0, 3.0]]);
        let tips: Vec<f64> = arcs
            .arcs
            .iter()
            .filter(|a| a.iter().all(|p| p.z.re.abs() < 1e-9))
            .flat_map(|a| [a[0].z.im, a[a.len() - 1].z.im])
            .collect();
        assert!(tips.iter().any(|t| (t - 2f64.sqrt()).abs() < 1e-6), "{tips:?}");
        assert!(tips.iter().any(|t| (t + 2f64.sqrt()).abs() < 1e-6), "{tips:?}");
        check_vertices(&pot, &arcs);
    }

    #[test]
    fn focusing_cross_off_grid() {
        // Even nx: the imaginary axis falls between columns and is traced as a contour.
        let pot = PeriodicPotential::constant(c(-1.0, -1.0), c(1.0, -1.0));
        let f = field(&pot, Window::new(-3.0, 3.0, -3.0, 3.0), 24, 25);
        let arcs = trace_spectrum(&f, DEFAULT_TRACE_TOL).unwrap();
        let vertical: Vec<&ArcPoint> = arcs.arcs.iter().flatten().filter(|p| p.z.im.abs() > 0.1).collect();
        assert!(!vertical.is_empty());
        assert!(vertical.iter().all(|p| p.z.re.abs() < 1e-6 && p.z.im.abs() <= 2f64.sqrt() + 1e-6));
        check_vertices(&pot, &arcs);
    }

    #[test]
    fn defocusing_bands_on_the_axis() {
        let pot = PeriodicPotential::constant(c(1.0, 1.0), c(1.0, -1.0));
        let f = field(&pot, Window::new(-3.0, 3.0, -1.0, 1.0), 31, 11);
        let arcs = trace_spectrum(&f, DEFAULT_TRACE_TOL).unwrap();
        let r = 2f64.sqrt();
        assert_eq!(arcs.axis_bands.len(), 2);
        assert_eq!(arcs.axis_bands[0][0], -3.0);
        assert!((arcs.axis_bands[0][1] + r).abs() < 1e-9);
        assert!((arcs.axis_bands[1][0] - r).abs() < 1e-9);
        assert_eq!(arcs.axis_bands[1][1], 3.0);
    }

    #[test]
    fn failed_field_is_rejected() {
        let pot = PeriodicPotential::zero();
        let f = discriminant_field(&pot, 1.0, Window::new(-1.0, 1.0, 700.0, 800.0), 8, 8, &Default::default()).unwrap();
        assert!(matches!(trace_spectrum(&f, 1e-6), Err(Error::FieldHasFailures(_))));
    }

    #[test]
    fn clip_interpolates_to_band_edge() {
        let a = Crossing { z: c(0.0, 0.0), re_delta: 0.5, on_line: false };
        let b = Crossing { z: c(1.0, 0.0), re_delta: 1.5, on_line: false };
        let s = clip(&b, &a);
        assert_eq!(s.edge, Some(1.0));
        assert!((s.z - c(0.5, 0.0)).norm() < 1e-15);
        let pieces = band_pieces(&[a, b, a]);
        assert_eq!(pieces.len(), 2);
        assert!(pieces.iter().all(|p| p.len() == 2));
    }
}
