//! Closed-form evaluation of the chain away from special points.

use super::EnergyPair;
use crate::jet::Jet;

/// `S = U'^2 + 4U(U + 2eps0)(U - 2eps1)` as a jet. The top coefficient is
/// not meaningful (it would need one more derivative of `U`).
pub fn stable_discriminant<const N: usize>(u: &Jet<N>, eps: &EnergyPair) -> Jet<N> {
    let du = u.derivative();
    du * du + 4.0 * *u * (*u + 2.0 * eps.eps0) * (*u - 2.0 * eps.eps1)
}

/// `W+` on branch `sign`, using whichever of the two equivalent forms
/// avoids cancellation:
/// `2U(U + 2eps0)/(U' + s sqrt S)` or `(s sqrt S - U')/(2(U - 2eps1))`.
/// `None` where `S <= 0` or the chosen denominator vanishes.
pub fn w_plus_jet<const N: usize>(u: &Jet<N>, eps: &EnergyPair, sign: f64) -> Option<Jet<N>> {
    let du = u.derivative();
    let root = stable_discriminant(u, eps).checked_sqrt()? * sign;
    if sign * du.value() >= 0.0 {
        (2.0 * *u * (*u + 2.0 * eps.eps0)).checked_div(&(du + root))
    } else {
        (root - du).checked_div(&(2.0 * (*u - 2.0 * eps.eps1)))
    }
}

/// `W~+ = U / W+`, written as
/// `(U' + s sqrt S)/(2(U + 2eps0))` or `-2U(U - 2eps1)/(U' - s sqrt S)`.
pub fn w_plus_tilde_jet<const N: usize>(u: &Jet<N>, eps: &EnergyPair, sign: f64) -> Option<Jet<N>> {
    let du = u.derivative();
    let root = stable_discriminant(u, eps).checked_sqrt()? * sign;
    if sign * du.value() >= 0.0 {
        (du + root).checked_div(&(2.0 * (*u + 2.0 * eps.eps0)))
    } else {
        (-2.0 * *u * (*u - 2.0 * eps.eps1)).checked_div(&(du - root))
    }
}

/// Direct evaluation of every quantity of the chain at one point.
#[derive(Clone, Copy, Debug)]
pub struct DirectChain<const N: usize> {
    pub wp: Jet<N>,
    pub wt: Jet<N>,
    pub w: [Jet<N>; 3],
}

impl<const N: usize> DirectChain<N> {
    pub fn new(u: &Jet<N>, eps: &EnergyPair, sign: f64) -> Option<Self> {
        let wp = w_plus_jet(u, eps, sign)?;
        let wt = w_plus_tilde_jet(u, eps, sign)?;
        let r0 = (wp.derivative() - 2.0 * eps.eps0).checked_div(&wp)?;
        let r2 = (wt.derivative() - 2.0 * eps.eps1).checked_div(&wt)?;
        let w = [(wp - r0) * 0.5, (wp + r0) * 0.5, (wt + r2) * 0.5];
        let out = Self { wp, wt, w };
        out.w.iter().all(|j| j.is_finite()).then_some(out)
    }

    pub fn v_minus(&self) -> Jet<N> {
        let w0 = self.w[0];
        (w0 * w0 - w0.derivative()) * 0.5
    }

    pub fn v_plus(&self) -> Jet<N> {
        let w0 = self.w[0];
        (w0 * w0 + w0.derivative()) * 0.5
    }

    /// Polynomial prefactors of the three `H-` states:
    /// `1`, `W+`, `(W0 + W2) W~+ - W~+'`.
    pub fn prefactors(&self) -> [Jet<N>; 3] {
        [
            Jet::constant(1.0),
            self.wp,
            (self.w[0] + self.w[2]) * self.wt - self.wt.derivative(),
        ]
    }
}
