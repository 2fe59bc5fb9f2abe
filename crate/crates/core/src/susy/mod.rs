//! Supersymmetric construction of a periodic potential with three known
//! band-edge states from a generating function `U(x)`.
//!
//! With `S = U'^2 + 4U(U + 2eps0)(U - 2eps1)` and a per-interval sign `s`,
//!
//! ```text
//! W+  = 2U(U + 2eps0) / (U' + s sqrt(S))      W~+ = U / W+
//! W0  = (W+ - (W+' - 2eps0)/W+) / 2           W1 = (W+ + (W+' - 2eps0)/W+) / 2
//! W2  = (W~+ + (W~+' - 2eps1)/W~+) / 2
//! 2V- = W0^2 - W0'                            2V+ = W0^2 + W0'
//! ```
//!
//! Removable singularities are evaluated from Laurent expansions about each
//! special point (zeros of `U`, `U + 2eps0`, `U - 2eps1` and `S`).

mod branch;
mod direct;
mod local;
mod system;

pub use branch::{BranchMap, SpecialKind, SpecialPoint};
pub use direct::{stable_discriminant, w_plus_jet, w_plus_tilde_jet, DirectChain};
pub use local::{discriminant_valuation_at, LocalChain};
pub use system::{BuildOptions, ConstructedSystem, Patch};

use crate::expr::{EvalError, Expression, Params};
use crate::jet::Jet;
use crate::quadrature::QuadratureError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SusyError {
    #[error("energies must be positive and finite (eps0 = {eps0}, eps1 = {eps1})")]
    InvalidEnergy { eps0: f64, eps1: f64 },
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("discriminant is negative at x = {x} (S = {value:e})")]
    NegativeDiscriminant { x: f64, value: f64 },
    #[error("local expansion failed at x = {x}: {reason}")]
    PatchFailure { x: f64, reason: String },
    #[error("no consistent branch assignment: {reason}")]
    BranchInconsistency { reason: String },
    #[error("pole of {what} at x = {x} cannot be removed")]
    UnremovablePole { x: f64, what: &'static str },
    #[error("V+ has a pole at x = {x} on the active branch")]
    VplusPole { x: f64 },
    #[error("{what} is singular at x = {x}")]
    Singular { x: f64, what: &'static str },
    #[error("series and direct evaluation of {what} disagree at x = {x} ({series} vs {direct})")]
    SeamMismatch {
        x: f64,
        what: &'static str,
        series: f64,
        direct: f64,
    },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Level spacings of the three constructed states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyPair {
    pub eps0: f64,
    pub eps1: f64,
}

impl EnergyPair {
    pub fn new(eps0: f64, eps1: f64) -> Result<Self, SusyError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(eps0) || !ok(eps1) {
            return Err(SusyError::InvalidEnergy { eps0, eps1 });
        }
        Ok(Self { eps0, eps1 })
    }

    /// `[0, eps0, eps0 + eps1]`.
    pub fn energies(&self) -> [f64; 3] {
        [0.0, self.eps0, self.eps0 + self.eps1]
    }
}

/// A generating function `U` together with its energies and period.
#[derive(Clone, Debug)]
pub struct GeneratingFunction {
    expr: Expression,
    eps: EnergyPair,
    period: f64,
    scale: f64,
}

impl GeneratingFunction {
    pub fn new(expr: Expression, eps: EnergyPair, period: f64) -> Result<Self, SusyError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(SusyError::InvalidPeriod(period));
        }
        let mut gf = Self {
            expr,
            eps,
            period,
            scale: 1.0,
        };
        let n = 512;
        gf.scale = (0..n)
            .filter_map(|k| gf.u(k as f64 * period / n as f64).ok())
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        Ok(gf)
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    pub fn eps(&self) -> EnergyPair {
        self.eps
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * self.period
    }

    pub fn params(&self) -> Params {
        Params::new(self.eps.eps0, self.eps.eps1)
    }

    pub fn u_jet<const N: usize>(&self, x: f64) -> Result<Jet<N>, SusyError> {
        Ok(self.expr.eval_jet::<N>(x, &self.params())?)
    }

    pub fn u(&self, x: f64) -> Result<f64, SusyError> {
        Ok(self.expr.eval(x, &self.params())?)
    }

    pub fn discriminant_jet<const N: usize>(&self, x: f64) -> Result<Jet<N>, SusyError> {
        Ok(stable_discriminant(&self.u_jet::<N>(x)?, &self.eps))
    }

    /// `W+` at `x` on branch `sign`, falling back to a local expansion where
    /// the closed form is singular (the sign then refers to `x + 0`).
    pub fn w_plus(&self, x: f64, sign: f64) -> Result<Jet<3>, SusyError> {
        let u = self.u_jet::<4>(x)?;
        if !self.near_singular(&u) {
            if let Some(w) = w_plus_jet(&u, &self.eps, sign).filter(Jet::is_finite) {
                return Ok(w.resize());
            }
        }
        LocalChain::new(self, x, sign, false)?.w_plus_jet(0.0, x)
    }

    /// `W~+` at `x` on branch `sign`, as [`Self::w_plus`].
    pub fn w_plus_tilde(&self, x: f64, sign: f64) -> Result<Jet<3>, SusyError> {
        let u = self.u_jet::<4>(x)?;
        if !self.near_singular(&u) {
            if let Some(w) = w_plus_tilde_jet(&u, &self.eps, sign).filter(Jet::is_finite) {
                return Ok(w.resize());
            }
        }
        LocalChain::new(self, x, sign, false)?.w_plus_tilde_jet(0.0, x)
    }

    /// Maximum of `|U|` on a coarse scan of one period.
    pub fn u_scale(&self) -> f64 {
        self.scale
    }

    /// Magnitude of the individual terms of `S`, for relative tolerances.
    pub fn discriminant_scale(&self) -> f64 {
        let u = self.scale;
        let ell = self.period / std::f64::consts::TAU;
        (u / ell).powi(2) + 4.0 * u * (u + 2.0 * self.eps.eps0) * (u + 2.0 * self.eps.eps1)
    }

    fn near_singular(&self, u: &Jet<4>) -> bool {
        stable_discriminant(u, &self.eps).value() <= 1e-12 * self.discriminant_scale()
    }
}
