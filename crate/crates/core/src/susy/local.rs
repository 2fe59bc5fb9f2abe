//! Laurent expansion of the whole chain about one point.

use super::{EnergyPair, GeneratingFunction, SusyError};
use crate::jet::Jet;
use crate::series::Series;

/// Taylor coefficients of `U` used for local expansions.
const ORDER: usize = 40;
/// Shortest usable expansion after cancellations.
const MIN_TERMS: usize = 10;

/// Series of `W+`, `W~+`, `W0..W2`, `V-`, `V+` and the analytic parts of the
/// three `H-` states about `center`, on the branch whose sign is `sigma` for
/// `t = x - center > 0`.
#[derive(Clone, Debug)]
pub struct LocalChain {
    center: f64,
    sigma: f64,
    s_valuation: i32,
    wp: Series,
    wt: Series,
    w: [Series; 3],
    vm: Series,
    vp: Series,
    /// Integer residues of `W0..W2`.
    n: [i32; 3],
    /// Regular antiderivatives of `W0..W2` vanishing at the center.
    q: [Series; 3],
    /// `prefactor_i * t^(-n_i) * exp(-Q_i)`, analytic at the center.
    g: [Series; 3],
    /// `(G_n' + W0 G_n) / sqrt 2` for `n = 1, 2`: the `H+` states.
    gp: [Series; 2],
}

impl LocalChain {
    /// `symmetric` marks a centre of evenness of `U` (odd Taylor
    /// coefficients are then exactly zero).
    pub fn new(gf: &GeneratingFunction, center: f64, sigma: f64, symmetric: bool) -> Result<Self, SusyError> {
        let eps = gf.eps();
        let fail = |reason: &str| SusyError::PatchFailure {
            x: center,
            reason: reason.to_string(),
        };
        let u = local_u_series(gf, center, symmetric)?;
        if u.is_empty() {
            return Err(fail("generating function vanishes identically"));
        }
        let du = u.derivative();
        let s = discriminant_series(&u, &eps);
        if s.is_empty() {
            return Err(fail("discriminant vanishes to working precision"));
        }
        if s.valuation() % 2 != 0 || s.leading() < 0.0 {
            return Err(SusyError::NegativeDiscriminant {
                x: center,
                value: s.leading(),
            });
        }
        let root = s.sqrt().ok_or_else(|| fail("square root of discriminant"))?.scale(sigma);

        let denom = du.add(&root);
        let wp = u
            .mul(&u.add_scalar(2.0 * eps.eps0))
            .scale(2.0)
            .div(&denom)
            .ok_or_else(|| fail("W+ denominator vanishes identically"))?;
        let wt = denom
            .div(&u.add_scalar(2.0 * eps.eps0).scale(2.0))
            .ok_or_else(|| fail("W~+ denominator vanishes identically"))?;

        let ratio = |f: &Series, e: f64| -> Result<Series, SusyError> {
            f.derivative()
                .add_scalar(-2.0 * e)
                .div(f)
                .ok_or_else(|| fail("superpotential ratio"))
        };
        let r0 = ratio(&wp, eps.eps0)?;
        let r2 = ratio(&wt, eps.eps1)?;
        let w = [
            wp.sub(&r0).scale(0.5),
            wp.add(&r0).scale(0.5),
            wt.add(&r2).scale(0.5),
        ];

        let mut n = [0i32; 3];
        let mut q: [Series; 3] = Default::default();
        const NAMES: [&str; 3] = ["W0", "W1", "W2"];
        for i in 0..3 {
            let (res, reg) = w[i].integrate_split().ok_or(SusyError::UnremovablePole {
                x: center,
                what: NAMES[i],
            })?;
            let k = res.round();
            if (res - k).abs() > 1e-6 * res.abs().max(1.0) {
                return Err(SusyError::UnremovablePole {
                    x: center,
                    what: NAMES[i],
                });
            }
            n[i] = k as i32;
            q[i] = reg;
        }

        let vm = w[0].mul(&w[0]).sub(&w[0].derivative()).scale(0.5);
        let vp = w[0].mul(&w[0]).add(&w[0].derivative()).scale(0.5);
        if vm.valuation() < 0 {
            return Err(SusyError::UnremovablePole { x: center, what: "V-" });
        }

        let one = Series::constant(1.0, ORDER);
        let pref2 = w[0].add(&w[2]).mul(&wt).sub(&wt.derivative());
        let prefs = [one, wp.clone(), pref2];
        let mut g: [Series; 3] = Default::default();
        const PSI: [&str; 3] = ["psi0-", "psi1-", "psi2-"];
        for i in 0..3 {
            let e = q[i].scale(-1.0).exp().ok_or_else(|| fail("exponential of the integral"))?;
            let gi = prefs[i].shift(-n[i]).mul(&e);
            if gi.valuation() < 0 {
                return Err(SusyError::UnremovablePole { x: center, what: PSI[i] });
            }
            g[i] = gi;
        }

        let gp = [1, 2].map(|k| {
            g[k].derivative()
                .add(&w[0].mul(&g[k]))
                .scale(std::f64::consts::FRAC_1_SQRT_2)
        });

        let out = Self {
            center,
            sigma,
            s_valuation: s.valuation(),
            wp,
            wt,
            w,
            vm,
            vp,
            n,
            q,
            g,
            gp,
        };
        let shortest = out
            .w
            .iter()
            .chain(out.g.iter())
            .chain([&out.vm, &out.wp, &out.wt])
            .map(|s| s.len())
            .min()
            .unwrap_or(0);
        if shortest < MIN_TERMS {
            return Err(fail("too few reliable expansion terms"));
        }
        Ok(out)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Valuation of the discriminant at the center.
    pub fn discriminant_valuation(&self) -> i32 {
        self.s_valuation
    }

    pub fn residues(&self) -> [i32; 3] {
        self.n
    }

    pub fn w_series(&self, i: usize) -> &Series {
        &self.w[i]
    }

    pub fn w_plus_series(&self) -> &Series {
        &self.wp
    }

    pub fn w_plus_tilde_series(&self) -> &Series {
        &self.wt
    }

    pub fn v_minus_series(&self) -> &Series {
        &self.vm
    }

    pub fn v_plus_series(&self) -> &Series {
        &self.vp
    }

    fn jet_of(s: &Series, t: f64, x: f64, what: &'static str) -> Result<Jet<3>, SusyError> {
        if s.valuation() < 0 && t == 0.0 {
            return Err(SusyError::Singular { x, what });
        }
        Ok(s.jet_at(t))
    }

    pub fn w_plus_jet(&self, t: f64, x: f64) -> Result<Jet<3>, SusyError> {
        Self::jet_of(&self.wp, t, x, "W+")
    }

    pub fn w_plus_tilde_jet(&self, t: f64, x: f64) -> Result<Jet<3>, SusyError> {
        Self::jet_of(&self.wt, t, x, "W~+")
    }

    pub fn w_jet(&self, i: usize, t: f64, x: f64) -> Result<Jet<3>, SusyError> {
        const NAMES: [&str; 3] = ["W0", "W1", "W2"];
        Self::jet_of(&self.w[i], t, x, NAMES[i])
    }

    pub fn v_minus(&self, t: f64) -> f64 {
        self.vm.eval(t)
    }

    pub fn v_plus(&self, t: f64, x: f64) -> Result<f64, SusyError> {
        if self.vp.valuation() < 0 {
            return Err(SusyError::VplusPole { x });
        }
        Ok(self.vp.eval(t))
    }

    /// Analytic part `G_i(t)` of the `i`-th state and its derivative.
    pub fn psi_analytic(&self, i: usize, t: f64) -> (f64, f64) {
        let j: Jet<2> = self.g[i].jet_at(t);
        (j[0], j[1])
    }

    /// Analytic part of the `H+` state `n` (1 or 2), sharing the constant of
    /// the corresponding `H-` state.
    pub fn psi_plus_analytic(&self, n: usize, t: f64, x: f64) -> Result<f64, SusyError> {
        let s = &self.gp[n - 1];
        if s.valuation() < 0 && t == 0.0 {
            return Err(SusyError::Singular { x, what: "psi+" });
        }
        Ok(s.eval(t))
    }

    /// `log|E|` and sign of `E_i(t) = t^(-n_i) exp(-Q_i(t))`.
    pub fn log_e(&self, i: usize, t: f64) -> (f64, f64) {
        let n = self.n[i];
        let sign = if n % 2 != 0 && t < 0.0 { -1.0 } else { 1.0 };
        (-(n as f64) * t.abs().ln() - self.q[i].eval(t), sign)
    }
}

/// Taylor series of `U` about `center`, cleaned of roundoff at located zeros.
pub(super) fn local_u_series(gf: &GeneratingFunction, center: f64, symmetric: bool) -> Result<Series, SusyError> {
    let jet = gf.u_jet::<ORDER>(center)?;
    let mut u = Series::from_jet(&jet);
    if symmetric {
        u.force_even();
    }
    flush_roundoff_zero(&mut u, gf.period());
    Ok(u)
}

pub(super) fn discriminant_series(u: &Series, eps: &EnergyPair) -> Series {
    let du = u.derivative();
    du.mul(&du).add(
        &u.mul(&u.add_scalar(2.0 * eps.eps0))
            .mul(&u.add_scalar(-2.0 * eps.eps1))
            .scale(4.0),
    )
}

/// Order of the zero of `S` at `x` (`0` if `S(x) != 0`), or `None` if `S`
/// vanishes identically to working precision.
pub fn discriminant_valuation_at(gf: &GeneratingFunction, x: f64, symmetric: bool) -> Result<Option<i32>, SusyError> {
    let s = discriminant_series(&local_u_series(gf, x, symmetric)?, &gf.eps());
    Ok((!s.is_empty()).then(|| s.valuation()))
}

/// Zeroes leading Taylor coefficients of `U` that are pure roundoff at a
/// located zero.
fn flush_roundoff_zero(u: &mut Series, period: f64) {
    if u.valuation() > 0 {
        return;
    }
    let ell = period / std::f64::consts::TAU;
    let scaled: Vec<f64> = (0..8)
        .map(|k| u.coeff(k).abs() * ell.powi(k))
        .collect();
    let scale = scaled.iter().cloned().fold(0.0, f64::max);
    let mut order = 0;
    while order < 4 && scaled[order as usize] <= 1e-11 * scale {
        order += 1;
    }
    if order > 0 {
        u.force_zero_below(order);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    fn razavy(eps0: f64) -> GeneratingFunction {
        let eps = EnergyPair::new(eps0, eps0 - 0.5).unwrap();
        GeneratingFunction::new(parse("4*eps0*eps1*sin(x)^2").unwrap(), eps, 2.0 * PI).unwrap()
    }

    #[test]
    fn second_order_zero_of_razavy() {
        let gf = razavy(1.0);
        let c = LocalChain::new(&gf, PI, 1.0, true).unwrap();
        assert_eq!(c.discriminant_valuation(), 6);
        // W+ = 2 eps0 t + O(t^2), W~+ = 2 eps1 t + O(t^2)
        assert_eq!(c.w_plus_series().valuation(), 1);
        assert!((c.w_plus_series().leading() - 2.0).abs() < 1e-12);
        assert!((c.w_plus_tilde_series().leading() - 1.0).abs() < 1e-12);
        // B = 0 for the Razavy family, so W0 vanishes at the midpoint
        assert!(c.w_series(0).coeff(0).abs() < 1e-12);
        assert_eq!(c.residues(), [0, 0, 0]);
        // psi1- = 2 eps0 t, psi2- = -2 eps1 at the midpoint
        let (g1, d1) = c.psi_analytic(1, 0.0);
        assert!(g1.abs() < 1e-14 && (d1 - 2.0).abs() < 1e-12);
        assert!((c.psi_analytic(2, 0.0).0 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_matches_closed_form_nearby() {
        let gf = razavy(1.0);
        let c = LocalChain::new(&gf, PI, 1.0, true).unwrap();
        let eps = gf.eps();
        for t in [0.05, 0.1, -0.1] {
            let x = PI + t;
            // sign + to the right of pi, - to the left; the series is analytic
            let sign = if t > 0.0 { 1.0 } else { -1.0 };
            let u = gf.u_jet::<7>(x).unwrap();
            let d = super::super::DirectChain::new(&u, &eps, sign).unwrap();
            for i in 0..3 {
                let s = c.w_jet(i, t, x).unwrap();
                assert!((s[0] - d.w[i][0]).abs() < 1e-10, "i={i} t={t}: {} vs {}", s[0], d.w[i][0]);
            }
            assert!((c.v_minus(t) - d.v_minus().value()).abs() < 1e-10);
        }
    }

    #[test]
    fn simple_pole_at_b0_point() {
        // U = 2 eps1 at x = pi/4 for eps0 = 1
        let gf = razavy(1.0);
        let x = PI / 4.0;
        // U' > 0 here; the pole of W+ sits on the branch with sigma U' < 0
        let c = LocalChain::new(&gf, x, -1.0, false).unwrap();
        assert_eq!(c.w_plus_series().valuation(), -1);
        assert!((c.w_plus_series().leading() + 1.0).abs() < 1e-10);
        assert_eq!(c.residues(), [0, -1, 1]);
        assert!(c.v_minus_series().valuation() >= 0);
        let other = LocalChain::new(&gf, x, 1.0, false).unwrap();
        assert_eq!(other.residues(), [0, 0, 0]);
        // regular value 4 eps1 (eps0 + eps1) / U'(b0)
        let du = gf.u_jet::<2>(x).unwrap()[1];
        assert!((other.w_plus_series().coeff(0) - 4.0 * 0.5 * 1.5 / du).abs() < 1e-12);
    }
}
