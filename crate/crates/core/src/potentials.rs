//! One-periodic potential pairs `(p, q)`.
//!
//! Three representations are supported: constants, finite Fourier series
//! `Σ cₖ e^{2πikx}`, and uniform samples on `[0, 1)` read back through
//! trigonometric interpolation. The sampled form is converted to its
//! interpolating Fourier series once, at construction, so evaluation and
//! differentiation share one code path and derivatives are exact.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Mat2;

pub const DEFAULT_NORM_SAMPLES: usize = 4096;
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Constant,
    FourierSeries,
    SampledGrid,
}

/// A trigonometric polynomial stored densely from `k_min` upwards.
#[derive(Debug, Clone, PartialEq)]
struct TrigSeries {
    k_min: i64,
    coeffs: Vec<Complex64>,
}

impl TrigSeries {
    fn from_terms(terms: &[(i64, Complex64)]) -> Self {
        if terms.is_empty() {
            return Self {
                k_min: 0,
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        let k_min = terms.iter().map(|t| t.0).min().unwrap_or(0);
        let k_max = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (k_max - k_min + 1) as usize];
        for &(k, c) in terms {
            coeffs[(k - k_min) as usize] += c;
        }
        Self { k_min, coeffs }
    }

    /// Interpolating series of uniform samples. For even `N` the Nyquist
    /// coefficient is split evenly between `±N/2`, which keeps the
    /// interpolant real for real data and exact at the nodes.
    fn from_samples(samples: &[Complex64]) -> Self {
        let n = samples.len();
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let inv_n = 1.0 / n as f64;
        let mut terms = Vec::with_capacity(n + 1);
        for (j, c) in buf.iter().enumerate() {
            let c = c * inv_n;
            if 2 * j < n {
                terms.push((j as i64, c));
            } else if 2 * j == n {
                terms.push((j as i64, c * 0.5));
                terms.push((-(j as i64), c * 0.5));
            } else {
                terms.push((j as i64 - n as i64, c));
            }
        }
        Self::from_terms(&terms)
    }

    fn k_max(&self) -> i64 {
        self.k_min + self.coeffs.len() as i64 - 1
    }

    fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::new(0.0, TAU * (self.k_min + j as i64) as f64))
            .collect();
        Self {
            k_min: self.k_min,
            coeffs,
        }
    }

    fn eval(&self, x: f64) -> Complex64 {
        let x = x.rem_euclid(1.0);
        let w = Complex64::cis(TAU * x);
        let mut power = Complex64::cis(TAU * self.k_min as f64 * x);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.coeffs {
            acc += c * power;
            power *= w;
        }
        acc
    }

    fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    fn max_abs_wavenumber(&self) -> u64 {
        self.k_min.unsigned_abs().max(self.k_max().unsigned_abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Channel {
    Constant(Complex64),
    Trig { series: TrigSeries, deriv: TrigSeries },
}

impl Channel {
    fn trig(series: TrigSeries) -> Self {
        let deriv = series.derivative();
        Channel::Trig { series, deriv }
    }

    fn eval(&self, x: f64) -> Complex64 {
        match self {
            Channel::Constant(c) => *c,
            Channel::Trig { series, .. } => series.eval(x),
        }
    }

    fn eval_deriv(&self, x: f64) -> Complex64 {
        match self {
            Channel::Constant(_) => Complex64::new(0.0, 0.0),
            Channel::Trig { deriv, .. } => deriv.eval(x),
        }
    }

    fn amplitude_bound(&self) -> f64 {
        match self {
            Channel::Constant(c) => c.norm(),
            Channel::Trig { series, .. } => series.abs_sum(),
        }
    }

    fn max_wavenumber(&self) -> u64 {
        match self {
            Channel::Constant(_) => 0,
            Channel::Trig { series, .. } => series.max_abs_wavenumber(),
        }
    }
}

/// A one-periodic pair `(p, q)` defining `Q(x)` and `A(x; z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPotential {
    kind: PotentialKind,
    p: Channel,
    q: Channel,
}

impl PeriodicPotential {
    pub fn constant(p0: Complex64, q0: Complex64) -> Self {
        Self {
            kind: PotentialKind::Constant,
            p: Channel::Constant(p0),
            q: Channel::Constant(q0),
        }
    }

    /// The free operator, `p = q = 0`.
    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Finite Fourier series given as `(k, cₖ)` pairs; repeated wavenumbers add.
    pub fn fourier(p_terms: &[(i64, Complex64)], q_terms: &[(i64, Complex64)]) -> Self {
        Self {
            kind: PotentialKind::FourierSeries,
            p: Channel::trig(TrigSeries::from_terms(p_terms)),
            q: Channel::trig(TrigSeries::from_terms(q_terms)),
        }
    }

    /// Uniform samples `p(j/N)`, `q(j/M)` on `[0, 1)`.
    pub fn sampled(p_samples: &[Complex64], q_samples: &[Complex64]) -> Result<Self> {
        if p_samples.is_empty() || q_samples.is_empty() {
            return Err(Error::EmptyRepresentation);
        }
        Ok(Self {
            kind: PotentialKind::SampledGrid,
            p: Channel::trig(TrigSeries::from_samples(p_samples)),
            q: Channel::trig(TrigSeries::from_samples(q_samples)),
        })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    /// `(p₀, q₀)` for constant potentials.
    pub fn constant_values(&self) -> Option<(Complex64, Complex64)> {
        match (&self.p, &self.q) {
            (Channel::Constant(p), Channel::Constant(q)) => Some((*p, *q)),
            _ => None,
        }
    }

    pub fn eval_pq(&self, x: f64) -> (Complex64, Complex64) {
        (self.p.eval(x), self.q.eval(x))
    }

    pub fn eval_dpq(&self, x: f64) -> (Complex64, Complex64) {
        (self.p.eval_deriv(x), self.q.eval_deriv(x))
    }

    /// `Q(x) = [[0, −i q], [i p, 0]]`.
    pub fn eval_q_matrix(&self, x: f64) -> Mat2 {
        let (p, q) = self.eval_pq(x);
        let i = Complex64::i();
        Mat2::new(Complex64::new(0.0, 0.0), -i * q, i * p, Complex64::new(0.0, 0.0))
    }

    /// `A(x; z) = [[−iz, q(x)], [p(x), iz]]`, the generator of `hΨ′ = AΨ`.
    pub fn eval_a(&self, x: f64, z: Complex64) -> Mat2 {
        let (p, q) = self.eval_pq(x);
        let iz = Complex64::i() * z;
        Mat2::new(-iz, q, p, iz)
    }

    /// Cheap upper bound on `max(‖p‖∞, ‖q‖∞)` (sum of coefficient moduli).
    pub fn amplitude_bound(&self) -> f64 {
        self.p.amplitude_bound().max(self.q.amplitude_bound())
    }

    /// Largest `|k|` present in either channel.
    pub fn max_wavenumber(&self) -> u64 {
        self.p.max_wavenumber().max(self.q.max_wavenumber())
    }

    /// Sup-norms by dense sampling plus local golden-section refinement.
    pub fn sup_norms(&self, n_samples: usize) -> Result<PotentialNorms> {
        if n_samples < 16 {
            return Err(Error::InvalidParameter(format!(
                "sup_norms needs at least 16 samples, got {n_samples}"
            )));
        }
        if let Some((p0, q0)) = self.constant_values() {
            let pq = p0 * q0;
            return Ok(PotentialNorms {
                sup_p: p0.norm(),
                sup_q: q0.norm(),
                sup_dp: 0.0,
                sup_dq: 0.0,
                sup_pq_defect: 2.0 * pq.im.abs(),
                n_samples,
            });
        }
        let sup = |f: &dyn Fn(f64) -> f64| sampled_sup(f, n_samples);
        Ok(PotentialNorms {
            sup_p: sup(&|x| self.p.eval(x).norm()),
            sup_q: sup(&|x| self.q.eval(x).norm()),
            sup_dp: sup(&|x| self.p.eval_deriv(x).norm()),
            sup_dq: sup(&|x| self.q.eval_deriv(x).norm()),
            sup_pq_defect: 2.0 * sup(&|x| (self.p.eval(x) * self.q.eval(x)).im.abs()),
            n_samples,
        })
    }

    /// Real / even / odd / real-product detection at relative tolerance `tol`.
    pub fn detect_symmetries(&self, norms: &PotentialNorms, tol: f64) -> Result<SymmetryFlags> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "symmetry tolerance must be positive, got {tol}"
            )));
        }
        let scale = 1.0 + norms.sup_p * norms.sup_q;
        let n = norms.n_samples.max(16);
        let mut max_im = 0.0f64;
        let mut max_even = 0.0f64;
        let mut max_odd = 0.0f64;
        for j in 0..n {
            let x = j as f64 / n as f64;
            let (p, q) = self.eval_pq(x);
            let (pm, qm) = self.eval_pq(-x);
            max_im = max_im.max(p.im.abs()).max(q.im.abs());
            max_even = max_even.max((p - pm).norm()).max((q - qm).norm());
            max_odd = max_odd.max((p + pm).norm()).max((q + qm).norm());
        }
        let bound = tol * scale;
        Ok(SymmetryFlags {
            is_real: max_im <= bound,
            is_even: max_even <= bound,
            is_odd: max_odd <= bound,
            pq_real: norms.sup_pq_defect <= bound,
            tol,
        })
    }
}

fn sampled_sup(f: &dyn Fn(f64) -> f64, n: usize) -> f64 {
    let values: Vec<f64> = (0..n).map(|j| f(j as f64 / n as f64)).collect();
    let mut best = values.iter().cloned().fold(0.0, f64::max);

    // Refine around the largest few local maxima of the samples.
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&j| {
            let prev = values[(j + n - 1) % n];
            let next = values[(j + 1) % n];
            values[j] >= prev && values[j] >= next
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let dx = 1.0 / n as f64;
    for &j in peaks.iter().take(3) {
        let centre = j as f64 * dx;
        best = best.max(golden_max(f, centre - dx, centre + dx));
    }
    best
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Sup-norms of `p`, `q`, their derivatives, and `‖p̄q̄ − pq‖∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialNorms {
    pub sup_p: f64,
    pub sup_q: f64,
    pub sup_dp: f64,
    pub sup_dq: f64,
    /// `‖p̄q̄ − pq‖∞ = 2 sup |Im(pq)|`.
    pub sup_pq_defect: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryFlags {
    pub is_real: bool,
    pub is_even: bool,
    pub is_odd: bool,
    pub pq_real: bool,
    pub tol: f64,
}

impl SymmetryFlags {
    pub fn any(&self) -> bool {
        self.is_real || self.is_even || self.is_odd
    }
}
