//! Closed forms for the periodic Razavy-type system generated by
//! `U = 4 eps0 eps1 sin^2 x` with `eps1 = eps0 - 1/2` and period `2 pi`.

use crate::export::GridExport;
use crate::susy::ConstructedSystem;
use serde::Serialize;
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RazavyError {
    #[error("eps0 must be at least 1/2, got {0}")]
    InvalidEps0(f64),
    #[error("denominator of the closed form vanishes at x = {x}")]
    ReferenceDenominatorZero { x: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RazavyParams {
    pub eps0: f64,
    pub eps1: f64,
    /// `sqrt(eps0 eps1)`.
    pub s: f64,
}

impl RazavyParams {
    pub fn new(eps0: f64) -> Result<Self, RazavyError> {
        if !(eps0.is_finite() && eps0 >= 0.5) {
            return Err(RazavyError::InvalidEps0(eps0));
        }
        let eps1 = eps0 - 0.5;
        Ok(Self {
            eps0,
            eps1,
            s: (eps0 * eps1).sqrt(),
        })
    }

    /// Generating function source, in terms of `eps0` and `eps1`.
    pub const GENERATOR: &'static str = "4*eps0*eps1*sin(x)^2";

    pub fn energies(&self) -> [f64; 3] {
        [0.0, self.eps0, self.eps0 + self.eps1]
    }

    pub fn vplus_coefficients(&self) -> VplusCoefficients {
        let (e0, e1, s) = (self.eps0, self.eps1, self.s);
        VplusCoefficients {
            a: [
                16.0 * e0 * e0 * e1 * e1,
                -8.0 * s * e0 * (2.0 - 5.0 * e0 + 2.0 * e0 * e0),
                -12.0 * e0 * (1.0 - 2.0 * e0 - 2.0 * e0 * e0 + 4.0 * e0.powi(3)),
                8.0 * s * (1.0 + 3.0 * e0 - 12.0 * e0 * e0 + 6.0 * e0.powi(3)),
                1.0 + 16.0 * e0 - 48.0 * e0 * e0 * (1.0 - e0 * e0),
                -6.0 * s * (1.0 + 2.0 * e0 - 12.0 * e0 * e0 + 8.0 * e0.powi(3)),
                -8.0 * e1 * e1 * e0 * (3.0 + 2.0 * e0),
                16.0 * e1 * e1 * e0 * s,
            ],
            b: [
                8.0 * e1 * e0.powi(3),
                8.0 * e0 * e0 * s,
                -2.0 * e0 * e0 * (1.0 - 12.0 * e0 + 16.0 * e0 * e0),
                -8.0 * e0 * s * (3.0 * e0 - 1.0),
                e0 * (1.0 + 10.0 * e0 - 48.0 * e0 * e0 * (1.0 - e0)),
                2.0 * s * (1.0 - 8.0 * e0 + 12.0 * e0 * e0),
                -2.0 * e1 * e1 * (-1.0 - 4.0 * e0 + 16.0 * e0 * e0),
                -8.0 * e1 * e1 * s,
                8.0 * e0 * e1.powi(3),
            ],
        }
    }

    pub fn psi_plus_coefficients(&self) -> PsiPlusCoefficients {
        let (e0, e1, s) = (self.eps0, self.eps1, self.s);
        let (r0, r1) = (e0.sqrt(), e1.sqrt());
        PsiPlusCoefficients {
            k: [
                4.0 * SQRT_2 * e0 * e1,
                4.0 * SQRT_2 * s,
                -SQRT_2 * (8.0 * e0 * e1 - 1.0),
                -4.0 * SQRT_2 * s,
                4.0 * SQRT_2 * e0 * e1,
            ],
            // l3 carries a minus sign: with +2 eps1 the quotient does not
            // solve the partner equation
            l: [4.0 * e0 * s, 2.0 * e0, 2.0 * (1.0 - 4.0 * e0) * s, -2.0 * e1, 4.0 * e1 * s],
            m: [
                -4.0 * SQRT_2 * e0 * e1 * (4.0 * e0 - 1.0) * (e1 - s),
                2.0 * SQRT_2 * r0 * (r1 - r0) * (8.0 * e0.powi(3) - 14.0 * e0 * e0 + 7.0 * e0 - 1.0),
                -SQRT_2 * (s - e1) * (1.0 - 4.0 * e0 - 4.0 * e0 * e0 + 16.0 * e0.powi(3)),
                -4.0 * e1 * e1 * SQRT_2 * r0 * (r1 - r0) * (4.0 * e0 - 1.0),
            ],
            n: [2.0 * e0 * s, e0, -2.0 * (e0 + e1) * s, -e1, 2.0 * e1 * s],
        }
    }
}

/// `V+ = ... + sum a_i cos^i x / (2 sum b_i cos^i x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VplusCoefficients {
    pub a: [f64; 8],
    pub b: [f64; 9],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiPlusCoefficients {
    pub k: [f64; 5],
    pub l: [f64; 5],
    pub m: [f64; 4],
    pub n: [f64; 5],
}

fn poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
}

/// `num(t) / den(t)`, dividing out roots shared by numerator and
/// denominator so the quotient stays accurate next to them. `None` at a
/// genuine pole.
fn rational(num: &[f64], den: &[f64], t: f64) -> Option<f64> {
    let d = poly(den, t);
    let scale = den.iter().map(|c| c.abs()).sum::<f64>();
    if d.abs() > 1e-6 * scale || den.len() < 2 {
        return (d != 0.0).then(|| poly(num, t) / d);
    }
    let dd: Vec<f64> = den.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
    let mut r = t;
    for _ in 0..60 {
        let slope = poly(&dd, r);
        if slope == 0.0 {
            break;
        }
        let step = poly(den, r) / slope;
        r -= step;
        if step.abs() <= 1e-16 * r.abs().max(1.0) {
            break;
        }
    }
    let num_scale = num.iter().map(|c| c.abs()).sum::<f64>();
    if poly(num, r).abs() > 1e-8 * num_scale || num.len() < 2 {
        return (d != 0.0).then(|| poly(num, t) / d);
    }
    rational(&deflate(num, r), &deflate(den, r), t)
}

/// Quotient of `p(t) / (t - r)`, remainder dropped.
fn deflate(p: &[f64], r: f64) -> Vec<f64> {
    let n = p.len() - 1;
    let mut q = vec![0.0; n];
    let mut acc = 0.0;
    for k in (1..=n).rev() {
        acc = p[k] + r * acc;
        q[k - 1] = acc;
    }
    q
}

/// `exp(2 s cos^2(x/2))`.
fn envelope(x: f64, p: &RazavyParams) -> f64 {
    (2.0 * p.s * (0.5 * x).cos().powi(2)).exp()
}

pub fn ref_v_minus(x: f64, p: &RazavyParams) -> f64 {
    let ee = p.eps0 * p.eps1;
    p.eps0 - 0.5 + 0.25 * (ee - 6.0 * p.s * x.cos() - ee * (2.0 * x).cos())
}

/// `psi_i-` with unit constant, `which` in `0..3`.
pub fn ref_psi_minus(x: f64, p: &RazavyParams, which: usize) -> f64 {
    let c2 = (0.5 * x).cos().powi(2);
    let g = envelope(x, p);
    match which {
        0 => g * (1.0 + 4.0 * (p.s + p.eps1) * c2),
        1 => g * p.eps0 * x.sin(),
        2 => g * 2.0 * p.eps1 * (1.0 + 4.0 * (p.s - p.eps0) * c2),
        _ => panic!("state index {which} out of range"),
    }
}

pub fn ref_u(x: f64, p: &RazavyParams) -> f64 {
    4.0 * p.eps0 * p.eps1 * x.sin().powi(2)
}

/// `W+ = 2 eps0 (1 + 2 eps1 sin^2 x) sin x / (cos x + 2 s sin^2 x)`.
pub fn ref_w_plus(x: f64, p: &RazavyParams) -> f64 {
    let (sn, cs) = x.sin_cos();
    2.0 * p.eps0 * (1.0 + 2.0 * p.eps1 * sn * sn) * sn / (cs + 2.0 * p.s * sn * sn)
}

/// `W~+ = U / W+ = eps1 (sin 2x + 4 s sin^3 x) / (1 + 2 eps1 sin^2 x)`.
pub fn ref_w_plus_tilde(x: f64, p: &RazavyParams) -> f64 {
    let sn = x.sin();
    p.eps1 * ((2.0 * x).sin() + 4.0 * p.s * sn.powi(3)) / (1.0 + 2.0 * p.eps1 * sn * sn)
}

/// `W0 = -(ln psi0-)'`, `W1 = W+ - W0`, `W2 = W~+ - W1`.
pub fn ref_superpotentials(x: f64, p: &RazavyParams) -> [f64; 3] {
    let sn = x.sin();
    let k = 4.0 * (p.s + p.eps1);
    let w0 = p.s * sn + 0.5 * k * sn / (1.0 + k * (0.5 * x).cos().powi(2));
    let w1 = ref_w_plus(x, p) - w0;
    [w0, w1, ref_w_plus_tilde(x, p) - w1]
}

pub fn ref_v_plus(x: f64, p: &RazavyParams) -> Result<f64, RazavyError> {
    let c = x.cos();
    let co = p.vplus_coefficients();
    let q = rational(&co.a, &co.b, c).ok_or(RazavyError::ReferenceDenominatorZero { x })?;
    let (e0, ee) = (p.eps0, p.eps0 * p.eps1);
    Ok(0.5 * (e0 * e0 + 1.5 * e0 - 1.0 - p.s * c - ee * c * c) + 0.5 * q)
}

/// `psi_n+` with unit constant, `which` in `{1, 2}`.
pub fn ref_psi_plus(x: f64, p: &RazavyParams, which: usize) -> Result<f64, RazavyError> {
    let c = x.cos();
    let co = p.psi_plus_coefficients();
    let g = envelope(x, p);
    let (q, pre) = match which {
        1 => (rational(&co.k, &co.l, c), p.eps0),
        2 => (rational(&co.m, &co.n, c), x.sin()),
        _ => panic!("state index {which} out of range"),
    };
    let q = q.ok_or(RazavyError::ReferenceDenominatorZero { x })?;
    Ok(pre * g * q / 2.0)
}

/// Matches `V-` against `1/2 (-a^2 cos^2 x' - a (2n+1) cos x')` with `n = 1`,
/// `alpha = 1/2` (so `x' = x`): returns `a` and the largest deviation of
/// the difference from its mean on a 1024-point grid.
pub fn turbiner_form_fit(p: &RazavyParams) -> (f64, f64) {
    let a = p.s;
    let turbiner = |x: f64| 0.5 * (-a * a * x.cos().powi(2) - 3.0 * a * x.cos());
    let n = 1024;
    let diffs: Vec<f64> = (0..n)
        .map(|j| {
            let x = std::f64::consts::TAU * j as f64 / n as f64;
            ref_v_minus(x, p) - turbiner(x)
        })
        .collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    (a, diffs.iter().fold(0.0, |m, d| m.max((d - mean).abs())))
}

/// Constants of the published figures: `C0-, C1-, C2-` and `C1+, C2+`.
pub const FIGURE_NORMS_MINUS: [f64; 3] = [0.05, 0.3, 1.3];
pub const FIGURE_NORMS_PLUS: [f64; 2] = [0.2, 0.7];

pub const REFERENCE_COLUMNS: [&str; 11] = [
    "ref_U",
    "ref_V_minus",
    "ref_V_plus",
    "ref_W0",
    "ref_W1",
    "ref_W2",
    "ref_psi0_m",
    "ref_psi1_m",
    "ref_psi2_m",
    "ref_psi1_p",
    "ref_psi2_p",
];

/// Pipeline columns of `sys` next to the closed forms on the same grid.
/// Reference states carry the figure constants; each pipeline state is
/// scaled by the least-squares constant that best matches its reference,
/// and that constant is recorded in the metadata.
pub fn side_by_side(sys: &ConstructedSystem, p: &RazavyParams, grid: usize) -> GridExport {
    let mut ex = GridExport::from_system(sys, RazavyParams::GENERATOR, grid, [1.0; 3], [1.0; 2]);
    let xs = ex.column("x").expect("x column").to_vec();
    let mut refs: Vec<Vec<f64>> = vec![Vec::with_capacity(grid); REFERENCE_COLUMNS.len()];
    for &x in &xs {
        let w = ref_superpotentials(x, p);
        let row = [
            ref_u(x, p),
            ref_v_minus(x, p),
            ref_v_plus(x, p).unwrap_or(f64::NAN),
            w[0],
            w[1],
            w[2],
            FIGURE_NORMS_MINUS[0] * ref_psi_minus(x, p, 0),
            FIGURE_NORMS_MINUS[1] * ref_psi_minus(x, p, 1),
            FIGURE_NORMS_MINUS[2] * ref_psi_minus(x, p, 2),
            ref_psi_plus(x, p, 1).map_or(f64::NAN, |v| FIGURE_NORMS_PLUS[0] * v),
            ref_psi_plus(x, p, 2).map_or(f64::NAN, |v| FIGURE_NORMS_PLUS[1] * v),
        ];
        for (c, v) in refs.iter_mut().zip(row) {
            c.push(v);
        }
    }
    let pairs = [("psi0_m", 6), ("psi1_m", 7), ("psi2_m", 8), ("psi1_p", 9), ("psi2_p", 10)];
    let mut fitted = [1.0; 5];
    for (k, (name, r)) in pairs.into_iter().enumerate() {
        let col = ex.column_mut(name).expect("standard column");
        let c = fit_constant(col, &refs[r]);
        col.iter_mut().for_each(|v| *v *= c);
        fitted[k] = c;
    }
    ex.meta.norms_minus = [fitted[0], fitted[1], fitted[2]];
    ex.meta.norms_plus = [fitted[3], fitted[4]];
    for (name, values) in REFERENCE_COLUMNS.iter().zip(refs) {
        ex.push_column(name, values);
    }
    ex
}

/// `argmin_c sum (c a - b)^2` over the finite pairs.
pub fn fit_constant(a: &[f64], b: &[f64]) -> f64 {
    let (num, den) = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + x * y, d + x * x));
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}
