//! Constants of the local expansions about zeros of `U`, extracted by
//! least-squares fits of direct evaluations on shrinking windows around the
//! zero, next to their closed forms.

use nalgebra::{DMatrix, DVector};
use qesforge_core::susy::DirectChain;
use qesforge_core::{parse, EnergyPair, GeneratingFunction, Jet};
use std::f64::consts::{SQRT_2, TAU};

pub const TOL: f64 = 1e-6;
const DEGREE: usize = 6;
const WINDOWS: [f64; 4] = [0.04, 0.02, 0.01, 0.005];

/// Fitted estimates on each window, smallest last.
#[derive(Debug)]
pub struct Comparison {
    pub label: String,
    pub fitted: Vec<f64>,
    pub expected: f64,
}

impl Comparison {
    pub fn error(&self) -> f64 {
        (self.fitted.last().unwrap() - self.expected).abs() / self.expected.abs().max(1.0)
    }

    /// The last estimate matches and the estimates have settled.
    pub fn ok(&self) -> bool {
        let n = self.fitted.len();
        let spread = (self.fitted[n - 1] - self.fitted[n - 2]).abs() / self.expected.abs().max(1.0);
        self.error() <= TOL && spread <= 1e-4
    }
}

/// Quantities sampled near the zero: `W0..W2`, `V-`, `V+`, the three `H-`
/// prefactors `P_n` and `(P_n' + (W0 - W_n) P_n) / sqrt 2` for `n = 1, 2`.
/// With `psi_n- = P_n exp(-Q_n)`, `Q_n' = W_n`, `Q_n(0) = 0`, the last two
/// are `psi_n+ exp(Q_n)`.
fn sample(gf: &GeneratingFunction, sign: f64, t: f64) -> [f64; 10] {
    let u: Jet<5> = gf.u_jet(t).unwrap();
    let c = DirectChain::new(&u, &gf.eps(), sign).expect("direct evaluation away from the zero");
    let p = c.prefactors();
    let w = c.w.map(|w| w.value());
    let plus = |n: usize| (p[n].derivative().value() + (w[0] - w[n]) * p[n].value()) / SQRT_2;
    [
        w[0],
        w[1],
        w[2],
        c.v_minus().value(),
        c.v_plus().value(),
        p[0].value(),
        p[1].value(),
        p[2].value(),
        plus(1),
        plus(2),
    ]
}

/// Taylor coefficients `[c0, c1]` at `t = 0` from a polynomial fit to
/// samples on `h/4 <= |t| <= h`.
fn fit(gf: &GeneratingFunction, sign: f64, h: f64, which: usize) -> [f64; 2] {
    let n = 48;
    let ts: Vec<f64> = (0..n)
        .map(|k| {
            let r = h * (0.25 + 0.75 * (k / 2) as f64 / (n / 2 - 1) as f64);
            if k % 2 == 0 { r } else { -r }
        })
        .collect();
    let a = DMatrix::from_fn(n, DEGREE + 1, |i, j| (ts[i] / h).powi(j as i32));
    let b = DVector::from_iterator(n, ts.iter().map(|&t| sample(gf, sign, t)[which]));
    let c = a.svd(true, true).solve(&b, 1e-14).unwrap();
    [c[0], c[1] / h]
}

/// Value and slope at the zero of `psi = F exp(-Q)` where `F` is quantity
/// `f` and `Q' = W_n`.
fn psi_taylor(gf: &GeneratingFunction, sign: f64, h: f64, f: usize, n: usize) -> [f64; 2] {
    let [f0, f1] = fit(gf, sign, h, f);
    let w = fit(gf, sign, h, n)[0];
    [f0, f1 - w * f0]
}

struct Collector<'a> {
    gf: &'a GeneratingFunction,
    out: Vec<Comparison>,
}

impl Collector<'_> {
    fn by(&mut self, label: String, expected: f64, estimate: impl Fn(f64) -> f64) {
        let fitted = WINDOWS.iter().map(|&h| estimate(h)).collect();
        self.out.push(Comparison { label, fitted, expected });
    }

    fn value(&mut self, sign: f64, which: usize, expected: f64, label: &str) {
        let gf = self.gf;
        self.by(label.to_string(), expected, |h| fit(gf, sign, h, which)[0]);
    }

    /// `order` 0 is the value of the state at the zero, 1 its slope.
    fn psi(&mut self, sign: f64, f: usize, n: usize, order: usize, expected: f64, label: &str) {
        let gf = self.gf;
        self.by(label.to_string(), expected, |h| psi_taylor(gf, sign, h, f, n)[order]);
    }
}

/// Zero at `x = 0` of `U = u1 x + u2 x^2/2 + u3 x^3/6`.
pub fn first_order(eps0: f64, eps1: f64, u1: f64, u2: f64, u3: f64) -> Vec<Comparison> {
    let src = format!("{u1}*x + {}*x^2 + {}*x^3", u2 / 2.0, u3 / 6.0);
    let gf = GeneratingFunction::new(parse(&src).unwrap(), EnergyPair::new(eps0, eps1).unwrap(), TAU).unwrap();
    let (a, b) = (eps0, eps1);
    let a0p = -(8.0 * a * a * b + u1 * u1 - a * u2) / (2.0 * a * u1);
    let a1m = (u1 * u1 + b * (u2 - 8.0 * a * b)) / (2.0 * b * u1);
    let a0m = -(u2 - 8.0 * a * b) / (2.0 * u1);
    let alm_m = -(64.0 * a * a * b * b + 8.0 * b * u1 * u1 + u2 * u2 - 16.0 * a * (u1 * u1 + b * u2) - 2.0 * u1 * u3)
        / (8.0 * u1 * u1);
    let alm_p = -3.0 * alm_m + 4.0 * a + u3 / (2.0 * u1);
    let alp_p = alm_m + 2.0 * b + (u1 * u1 - 2.0 * a * u2) / (4.0 * a * a);
    let alp_m = alm_p - 2.0 * b;

    // The (+) expansion is the branch whose root has the sign of U'.
    let plus = u1.signum();
    let minus = -plus;
    let mut c = Collector { gf: &gf, out: Vec::new() };
    c.value(plus, 0, a0p, "A0(+)");
    c.value(plus, 1, -a0p, "A1(+)");
    c.value(plus, 2, -a0m, "A2(+)");
    c.value(minus, 0, a0m, "A0(-)");
    c.value(minus, 1, a1m, "A1(-)");
    c.value(minus, 2, -a1m, "A2(-)");
    c.value(plus, 3, alm_p, "alpha-(+)");
    c.value(minus, 3, alm_m, "alpha-(-)");
    c.value(plus, 4, alp_p, "alpha+(+)");
    c.value(minus, 4, alp_m, "alpha+(-)");
    for s in [plus, minus] {
        c.psi(s, 5, 0, 0, 1.0, "psi0-");
        c.psi(s, 7, 2, 0, -2.0 * b, "psi2-");
        c.psi(s, 8, 1, 0, SQRT_2 * a, "psi1+");
    }
    c.psi(plus, 6, 1, 0, 0.0, "psi1-(+) value");
    c.psi(plus, 6, 1, 1, 2.0 * a, "psi1-(+) slope");
    c.psi(minus, 6, 1, 0, u1 / (2.0 * b), "psi1-(-)");
    // psi2+ vanishes together with W~+, i.e. on the (-) branch.
    c.psi(minus, 9, 2, 0, 0.0, "psi2+(-) value");
    c.psi(minus, 9, 2, 1, 2.0 * SQRT_2 * b * (a + b), "psi2+(-) slope");
    c.psi(plus, 9, 2, 0, (a + b) * u1 / (SQRT_2 * a), "psi2+(+)");
    c.out
}

/// Double zero at `x = 0` of `U = 4 eps0 eps1 x^2 + u4 x^4/24 + u5 x^5/120`;
/// `U'' = 8 eps0 eps1` and `U''' = 0` make it regular.
pub fn second_order(eps0: f64, eps1: f64, u4: f64, u5: f64) -> Vec<Comparison> {
    let (a, b) = (eps0, eps1);
    let src = format!("4*eps0*eps1*x^2 + {}*x^4 + {}*x^5", u4 / 24.0, u5 / 120.0);
    let gf = GeneratingFunction::new(parse(&src).unwrap(), EnergyPair::new(a, b).unwrap(), TAU).unwrap();
    let bb = 0.25 * (32.0 * (a - b) + u4 / (2.0 * a * b)).sqrt();
    let base = u4 / (64.0 * a * b);
    let odd = u5 / (320.0 * a * b * bb);
    let mut c = Collector { gf: &gf, out: Vec::new() };
    for (s, sign) in [(1.0, "+"), (-1.0, "-")] {
        c.value(s, 0, s * bb, &format!("B0({sign})"));
        c.value(s, 1, -s * bb, &format!("B1({sign})"));
        c.value(s, 2, s * bb, &format!("B2({sign})"));
        c.value(s, 3, a + base - s * odd, &format!("beta-({sign})"));
        c.value(s, 4, a - 2.0 * b + base + s * odd, &format!("beta+({sign})"));
        c.psi(s, 5, 0, 0, 1.0, "psi0-");
        c.psi(s, 6, 1, 0, 0.0, "psi1- value");
        c.psi(s, 6, 1, 1, 2.0 * a, "psi1- slope");
        c.psi(s, 7, 2, 0, -2.0 * b, "psi2-");
        c.psi(s, 8, 1, 0, SQRT_2 * a, "psi1+");
        c.psi(s, 9, 2, 0, 0.0, "psi2+ value");
        c.psi(s, 9, 2, 1, 2.0 * SQRT_2 * b * (a + b), "psi2+ slope");
    }
    c.out
}

/// The synthetic cases used by the tests.
pub fn all_cases() -> Vec<(String, Vec<Comparison>)> {
    vec![
        ("first-order zero (1, 0.5)".into(), first_order(1.0, 0.5, 0.7, 0.6, -1.2)),
        ("first-order zero (0.8, 1.3), U' < 0".into(), first_order(0.8, 1.3, -1.1, 0.4, 2.5)),
        ("first-order zero (2, 1.5)".into(), first_order(2.0, 1.5, 2.3, -3.0, 0.9)),
        ("second-order zero (1, 0.5)".into(), second_order(1.0, 0.5, 3.0, 2.0)),
        ("second-order zero (1.5, 0.7)".into(), second_order(1.5, 0.7, -4.0, -6.0)),
    ]
}
