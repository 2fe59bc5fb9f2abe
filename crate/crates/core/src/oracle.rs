//! Independent band-edge solver for `H = -1/2 d^2/dx^2 + V` with an
//! `L`-periodic potential. Periodic and antiperiodic edge states both appear
//! as periodic states on the doubled interval `[0, 2L)`, so one real
//! symmetric eigenproblem in the trigonometric basis of period `2L` covers
//! both band-edge families.

use crate::eigen::{symmetric_eigen, EigenError};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("at least {min} harmonics are required, got {got}")]
    TooFewHarmonics { got: usize, min: usize },
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("potential is not finite at x = {0}")]
    NonFinite(f64),
    #[error("grid size {0} must be a power of two of at least 512")]
    InvalidGrid(usize),
    #[error("at least 256 samples are required for node counting, got {0}")]
    TooFewSamples(usize),
    #[error("near-zero plateau of {len} samples starting at index {start} makes the node count ambiguous")]
    AmbiguousNode { start: usize, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Periodicity {
    /// `psi(x + L) = psi(x)`, edge at `kL = 0`.
    #[serde(rename = "L")]
    Periodic,
    /// `psi(x + L) = -psi(x)`, edge at `kL = pi`.
    #[serde(rename = "2L")]
    Antiperiodic,
    /// Neither within tolerance (a degenerate pair mixed by the solver).
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeState {
    pub energy: f64,
    pub periodicity: Periodicity,
    /// Sign changes per period `L` (half the cyclic count over `2L`).
    pub nodes: usize,
    /// Samples on [`EdgeSpectrum::grid`], unit `L2` norm over `[0, 2L)`.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeSpectrum {
    pub period: f64,
    pub harmonics: usize,
    pub states: Vec<EdgeState>,
    #[serde(skip)]
    pub grid: Vec<f64>,
}

impl EdgeSpectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    /// The state whose energy is closest to `e`.
    pub fn nearest(&self, e: f64) -> Option<&EdgeState> {
        self.states
            .iter()
            .min_by(|a, b| (a.energy - e).abs().total_cmp(&(b.energy - e).abs()))
    }
}

pub const MIN_HARMONICS: usize = 16;

/// Relative tolerance of the periodicity classification.
pub const PERIODICITY_TOL: f64 = 1e-6;

/// Lowest `count` band-edge states using harmonics `m = 1..=M` of the
/// doubled period.
pub fn band_edge_spectrum(
    v: impl Fn(f64) -> f64,
    period: f64,
    harmonics: usize,
    count: usize,
) -> Result<EdgeSpectrum, OracleError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(OracleError::InvalidPeriod(period));
    }
    if harmonics < MIN_HARMONICS {
        return Err(OracleError::TooFewHarmonics {
            got: harmonics,
            min: MIN_HARMONICS,
        });
    }
    let m = harmonics;
    let dim = 2 * m + 1;
    let (a, b) = fourier(&v, period, 4 * dim, 2 * m)?;
    // mean of cos(p theta) V and sin(p theta) V over [0, 2L), theta = pi x / L
    let c = |p: i64| -> f64 {
        let p = p.unsigned_abs() as usize;
        if p == 0 {
            a[0]
        } else {
            0.5 * a[p]
        }
    };
    let s = |p: i64| -> f64 { p.signum() as f64 * 0.5 * b[p.unsigned_abs() as usize] };

    // index 0: constant; 2k-1: cos(k theta); 2k: sin(k theta)
    let mut h = vec![0.0; dim * dim];
    let mut set = |i: usize, j: usize, val: f64| {
        h[i * dim + j] = val;
        h[j * dim + i] = val;
    };
    set(0, 0, a[0]);
    let k2 = |k: usize| 0.5 * (k as f64 * PI / period).powi(2);
    for k in 1..=m {
        let ki = k as i64;
        set(0, 2 * k - 1, 2f64.sqrt() * c(ki));
        set(0, 2 * k, 2f64.sqrt() * s(ki));
        for l in k..=m {
            let li = l as i64;
            let cc = c(ki - li) + c(ki + li);
            let ss = c(ki - li) - c(ki + li);
            let (i_c, i_s, j_c, j_s) = (2 * k - 1, 2 * k, 2 * l - 1, 2 * l);
            set(i_c, j_c, cc + if k == l { k2(k) } else { 0.0 });
            set(i_s, j_s, ss + if k == l { k2(k) } else { 0.0 });
            // cos(k) sin(l) and sin(k) cos(l)
            set(i_c, j_s, s(li + ki) + s(li - ki));
            set(i_s, j_c, s(ki + li) + s(ki - li));
        }
    }

    let eig = symmetric_eigen(&h, dim)?;
    let n_grid = (8 * m).max(1024).next_power_of_two();
    let grid: Vec<f64> = (0..n_grid).map(|j| 2.0 * period * j as f64 / n_grid as f64).collect();
    let mut states = Vec::with_capacity(count.min(dim));
    for k in 0..count.min(dim) {
        let coef = eig.vector(k);
        let samples = synthesize(&coef, &grid, period);
        let periodicity = classify(&samples);
        let nodes = count_nodes(&samples)? / 2;
        states.push(EdgeState {
            energy: eig.values[k],
            periodicity,
            nodes,
            samples,
        });
    }
    Ok(EdgeSpectrum {
        period,
        harmonics,
        states,
        grid,
    })
}

/// Cosine and sine coefficients `V = a0 + sum a_p cos(p theta) + b_p sin(p theta)`
/// for `p <= pmax`, from `n` samples over `[0, 2L)`.
fn fourier(v: &impl Fn(f64) -> f64, period: f64, n: usize, pmax: usize) -> Result<(Vec<f64>, Vec<f64>), OracleError> {
    let mut buf = Vec::with_capacity(n);
    for j in 0..n {
        let x = 2.0 * period * j as f64 / n as f64;
        let y = v(x);
        if !y.is_finite() {
            return Err(OracleError::NonFinite(x));
        }
        buf.push(Complex::new(y, 0.0));
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut a = vec![0.0; pmax + 1];
    let mut b = vec![0.0; pmax + 1];
    a[0] = buf[0].re * scale;
    for p in 1..=pmax {
        a[p] = 2.0 * buf[p].re * scale;
        b[p] = -2.0 * buf[p].im * scale;
    }
    Ok((a, b))
}

fn synthesize(coef: &[f64], grid: &[f64], period: f64) -> Vec<f64> {
    let m = (coef.len() - 1) / 2;
    let norm0 = 1.0 / (2.0 * period).sqrt();
    let norm = 1.0 / period.sqrt();
    grid.iter()
        .map(|&x| {
            let theta = PI * x / period;
            let mut acc = coef[0] * norm0;
            for k in 1..=m {
                let (s, c) = (k as f64 * theta).sin_cos();
                acc += norm * (coef[2 * k - 1] * c + coef[2 * k] * s);
            }
            acc
        })
        .collect()
}

fn classify(samples: &[f64]) -> Periodicity {
    let n = samples.len();
    let half = n / 2;
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut dp, mut dm) = (0.0f64, 0.0f64);
    for j in 0..half {
        dp = dp.max((samples[j + half] - samples[j]).abs());
        dm = dm.max((samples[j + half] + samples[j]).abs());
    }
    if dp <= PERIODICITY_TOL * peak {
        Periodicity::Periodic
    } else if dm <= PERIODICITY_TOL * peak {
        Periodicity::Antiperiodic
    } else {
        Periodicity::Mixed
    }
}

/// Cyclic sign changes in `samples`, which cover one full period. Runs of
/// near-zero samples (`|psi| < 1e-9 max|psi|`) count at most once.
pub fn count_nodes(samples: &[f64]) -> Result<usize, OracleError> {
    let n = samples.len();
    if n < 256 {
        return Err(OracleError::TooFewSamples(n));
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(OracleError::AmbiguousNode { start: 0, len: n });
    }
    let small = |v: f64| v.abs() < 1e-9 * peak;
    let Some(start) = (0..n).find(|&j| !small(samples[j])) else {
        return Err(OracleError::AmbiguousNode { start: 0, len: n });
    };
    let max_plateau = n / 20;
    let mut nodes = 0;
    let mut last = samples[start].signum();
    let mut run = 0;
    for off in 1..=n {
        let j = (start + off) % n;
        let v = samples[j];
        if small(v) {
            run += 1;
            if run > max_plateau {
                return Err(OracleError::AmbiguousNode {
                    start: (j + n + 1 - run) % n,
                    len: run,
                });
            }
            continue;
        }
        run = 0;
        if v.signum() != last {
            nodes += 1;
            last = v.signum();
        }
    }
    Ok(nodes)
}

/// `max |-1/2 psi'' + V psi - E psi| / max|psi|` with `psi''` from
/// trigonometric differentiation. `psi` samples one full period of the
/// state on `[0, 2L)`.
pub fn residual(v: impl Fn(f64) -> f64, psi: &[f64], energy: f64, period: f64) -> Result<f64, OracleError> {
    let n = psi.len();
    if n < 512 || !n.is_power_of_two() {
        return Err(OracleError::InvalidGrid(n));
    }
    let d2 = second_derivative(psi, 2.0 * period);
    let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let x = 2.0 * period * j as f64 / n as f64;
        let vx = v(x);
        if !vx.is_finite() {
            return Err(OracleError::NonFinite(x));
        }
        worst = worst.max((-0.5 * d2[j] + (vx - energy) * psi[j]).abs());
    }
    Ok(worst / peak)
}

/// Spectral second derivative of samples covering one period `span`.
pub fn second_derivative(f: &[f64], span: f64) -> Vec<f64> {
    let n = f.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let w = 2.0 * PI / span;
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        *c *= -(kk * w).powi(2) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Trigonometric interpolant of uniform samples over one period.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    period: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TrigInterpolant {
    /// `samples[j]` is the value at `j * period / n`. The Nyquist term of an
    /// even-length grid is split evenly between `+n/2` and `-n/2`.
    pub fn new(samples: &[f64], period: f64) -> Result<Self, OracleError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(OracleError::InvalidPeriod(period));
        }
        let n = samples.len();
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite(period * j as f64 / n.max(1) as f64));
        }
        if n == 0 {
            return Err(OracleError::InvalidGrid(0));
        }
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let top = n / 2;
        let mut a = vec![0.0; top + 1];
        let mut b = vec![0.0; top + 1];
        a[0] = buf[0].re * scale;
        for k in 1..=top {
            let w = if 2 * k == n { 1.0 } else { 2.0 };
            a[k] = w * buf[k].re * scale;
            b[k] = if 2 * k == n { 0.0 } else { -w * buf[k].im * scale };
        }
        Ok(Self { period, a, b })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let theta = 2.0 * PI * x / self.period;
        let mut acc = self.a[0];
        for k in 1..self.a.len() {
            let (s, c) = (k as f64 * theta).sin_cos();
            acc += self.a[k] * c + self.b[k] * s;
        }
        acc
    }

    /// Values at `n` uniform points over one period.
    pub fn resample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|j| self.eval(self.period * j as f64 / n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn free_particle() {
        let sp = band_edge_spectrum(|_| 0.0, TAU, 32, 5).unwrap();
        let want = [0.0, 0.125, 0.125, 0.5, 0.5];
        for (s, w) in sp.states.iter().zip(want) {
            assert!((s.energy - w).abs() < 1e-12, "{} vs {w}", s.energy);
        }
        assert_eq!(sp.states[0].periodicity, Periodicity::Periodic);
        assert_eq!(sp.states[1].periodicity, Periodicity::Antiperiodic);
        assert_eq!(sp.states[3].periodicity, Periodicity::Periodic);
        assert_eq!(sp.states.iter().map(|s| s.nodes).collect::<Vec<_>>(), [0, 1, 1, 2, 2]);
    }

    #[test]
    fn mathieu_edges_match_perturbation_theory() {
        // V = q cos x on L = 2 pi: lowest edge is -q^2/4 + O(q^4)
        let q = 1e-3;
        let sp = band_edge_spectrum(|x| q * x.cos(), TAU, 32, 3).unwrap();
        assert!((sp.states[0].energy + q * q).abs() < 1e-9, "{}", sp.states[0].energy);
        // antiperiodic pair split by the first-order coupling of e^{+-ix/2}
        let (e1, e2) = (sp.states[1].energy, sp.states[2].energy);
        assert!(((e2 - e1) - q).abs() < 1e-6);
    }

    #[test]
    fn nodes_of_simple_functions() {
        let n = 1000;
        let xs = (0..n).map(|j| TAU * j as f64 / n as f64);
        assert_eq!(count_nodes(&xs.clone().map(f64::sin).collect::<Vec<_>>()).unwrap(), 2);
        let bumps: Vec<f64> = xs.clone().map(|x| (3.0 * x.cos()).exp()).collect();
        assert_eq!(count_nodes(&bumps).unwrap(), 0);
        let flat: Vec<f64> = xs.map(|x| if x < 1.0 { 0.0 } else { (x - 1.0).sin() }).collect();
        assert!(matches!(count_nodes(&flat), Err(OracleError::AmbiguousNode { .. })));
    }

    #[test]
    fn residual_of_exact_state() {
        let n = 1024;
        let l = TAU;
        let psi: Vec<f64> = (0..n).map(|j| (0.5 * 2.0 * l * j as f64 / n as f64).sin()).collect();
        assert!(residual(|_| 0.0, &psi, 0.125, l).unwrap() < 1e-10);
        let r = residual(|_| 0.0, &psi, 0.225, l).unwrap();
        assert!((r - 0.1).abs() < 1e-10);
        assert!(matches!(residual(|_| 0.0, &psi[..1000], 0.125, l), Err(OracleError::InvalidGrid(1000))));
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let sp = band_edge_spectrum(|x| 2.0 * x.cos() + (2.0 * x).sin(), TAU, 24, 6).unwrap();
        let h = 2.0 * TAU / sp.grid.len() as f64;
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = sp.states[i].samples.iter().zip(&sp.states[j].samples).map(|(a, b)| a * b).sum::<f64>() * h;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-9, "{i} {j} {dot}");
            }
        }
    }

    #[test]
    fn interpolant_reproduces_band_limited_signal() {
        let f = |x: f64| 0.3 + (2.0 * x).cos() - 0.5 * (5.0 * x).sin() + 0.25 * (8.0 * x).cos();
        for n in [16, 17, 64] {
            let samples: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
            let ip = TrigInterpolant::new(&samples, TAU).unwrap();
            for x in [0.1, 1.7, 4.4, 6.0] {
                assert!((ip.eval(x) - f(x)).abs() < 1e-12, "n = {n}, x = {x}");
            }
        }
        assert!(matches!(TrigInterpolant::new(&[1.0, f64::NAN], TAU), Err(OracleError::NonFinite(_))));
    }
}
