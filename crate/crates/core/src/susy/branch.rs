//! Special points of a generating function and the sign map of `sqrt(S)`.

use super::local::{discriminant_series, local_u_series};
use super::{GeneratingFunction, SusyError};
use crate::jet::Jet;
use crate::roots::{cyclic_distance, find_zeros, reduce, Zero, ZeroKind};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialKind {
    /// Centre of the period, `L/2`.
    Midpoint,
    /// Left end of the period, `0`.
    Boundary,
    /// Zero of `U`.
    UZero,
    /// `U = -2 eps0`.
    C0,
    /// `U = 2 eps1`.
    B0,
    /// Zero of the discriminant `S`.
    DiscriminantZero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecialPoint {
    pub x: f64,
    pub kinds: Vec<SpecialKind>,
}

impl SpecialPoint {
    pub fn is(&self, kind: SpecialKind) -> bool {
        self.kinds.contains(&kind)
    }

    /// `U` is even about this point (given an even `U` about the midpoint).
    pub fn symmetric(&self) -> bool {
        self.is(SpecialKind::Midpoint) || self.is(SpecialKind::Boundary)
    }
}

/// Scan density used to locate special points.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Relative threshold below which a negative discriminant is roundoff.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// Locates every special point on `[0, L)`; fails if `S` is negative.
pub fn special_points(gf: &GeneratingFunction, samples: usize) -> Result<Vec<SpecialPoint>, SusyError> {
    let l = gf.period();
    let eps = gf.eps();
    let uscale = gf.u_scale().max(f64::MIN_POSITIVE);
    let shifted = |c: f64| {
        move |x: f64| -> Option<Jet<3>> { gf.u_jet::<3>(x).ok().map(|j| j - c) }
    };

    let mut found: Vec<(f64, SpecialKind)> = vec![(0.0, SpecialKind::Boundary), (gf.midpoint(), SpecialKind::Midpoint)];
    let tagged = |zs: Vec<Zero>, kind| zs.into_iter().map(move |z| (z.x, kind));
    found.extend(tagged(find_zeros(&shifted(0.0), l, samples, 1e-9 * uscale), SpecialKind::UZero));
    let c0 = 2.0 * eps.eps0;
    found.extend(tagged(
        find_zeros(&shifted(-c0), l, samples, 1e-9 * uscale.max(c0)),
        SpecialKind::C0,
    ));
    let b0 = 2.0 * eps.eps1;
    found.extend(tagged(
        find_zeros(&shifted(b0), l, samples, 1e-9 * uscale.max(b0)),
        SpecialKind::B0,
    ));

    let sscale = gf.discriminant_scale();
    let s_of = |x: f64| -> Option<Jet<3>> { gf.discriminant_jet::<4>(x).ok().map(|j| j.resize()) };
    let h = l / samples as f64;
    let (mut worst, mut worst_x) = (f64::INFINITY, 0.0);
    for k in 0..samples {
        let x = k as f64 * h;
        if let Some(v) = s_of(x).map(|j| j.value()) {
            if v < worst {
                worst = v;
                worst_x = x;
            }
        }
    }
    if worst < -DISCRIMINANT_TOL * sscale {
        return Err(SusyError::NegativeDiscriminant { x: worst_x, value: worst });
    }
    let s_zeros = find_zeros(&s_of, l, samples, DISCRIMINANT_TOL * sscale);

    let mut points = merge(found, l, 1e-9 * l);
    for z in s_zeros {
        if z.kind == ZeroKind::Crossing && s_of(z.x).is_some_and(|j| j.value() < -DISCRIMINANT_TOL * sscale) {
            return Err(SusyError::NegativeDiscriminant { x: z.x, value: s_of(z.x).map_or(0.0, |j| j.value()) });
        }
        // high-order zeros refine poorly; attach them to a nearby located point
        match points.iter_mut().find(|p| cyclic_distance(p.x, z.x, l) <= 1e-4 * l) {
            Some(p) => {
                if !p.is(SpecialKind::DiscriminantZero) {
                    p.kinds.push(SpecialKind::DiscriminantZero);
                }
            }
            None => points.push(SpecialPoint {
                x: z.x,
                kinds: vec![SpecialKind::DiscriminantZero],
            }),
        }
    }
    // the symmetry centres are zeros of S whenever U has a double zero there
    for p in points.iter_mut().filter(|p| p.symmetric() && !p.is(SpecialKind::DiscriminantZero)) {
        let s = discriminant_series(&local_u_series(gf, p.x, true)?, &eps);
        if s.valuation() > 0 {
            p.kinds.push(SpecialKind::DiscriminantZero);
        }
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(points)
}

fn merge(mut found: Vec<(f64, SpecialKind)>, period: f64, tol: f64) -> Vec<SpecialPoint> {
    for f in found.iter_mut() {
        f.0 = reduce(f.0, period);
    }
    // exact locations first so that they win the merge
    let mut out: Vec<SpecialPoint> = Vec::new();
    for (x, kind) in found {
        match out.iter_mut().find(|p| cyclic_distance(p.x, x, period) <= tol) {
            Some(p) => {
                if !p.kinds.contains(&kind) {
                    p.kinds.push(kind);
                }
            }
            None => out.push(SpecialPoint { x, kinds: vec![kind] }),
        }
    }
    out
}

/// Piecewise-constant sign of `sqrt(S)` on one period: `signs[i]` holds on
/// `(breakpoints[i], breakpoints[i + 1])`, the last interval wrapping round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchMap {
    pub breakpoints: Vec<f64>,
    pub signs: Vec<f64>,
    period: f64,
}

impl BranchMap {
    /// Locates the zeros of `S` and assigns signs.
    pub fn build(gf: &GeneratingFunction) -> Result<Self, SusyError> {
        let points = special_points(gf, DEFAULT_SAMPLES)?;
        Self::from_points(gf, &points)
    }

    /// Sign switches at each zero of `S` whose valuation is `2 (mod 4)`,
    /// so that `sqrt(S)` follows its analytic continuation. The midpoint
    /// must switch (oddness of `W+`); the interval left of it gets `+`.
    pub fn from_points(gf: &GeneratingFunction, points: &[SpecialPoint]) -> Result<Self, SusyError> {
        let l = gf.period();
        let zeros: Vec<&SpecialPoint> = points.iter().filter(|p| p.is(SpecialKind::DiscriminantZero)).collect();
        let mid = zeros
            .iter()
            .position(|p| p.is(SpecialKind::Midpoint))
            .ok_or_else(|| SusyError::BranchInconsistency {
                reason: format!("the discriminant does not vanish at the midpoint x = {}", gf.midpoint()),
            })?;
        let mut switches = Vec::with_capacity(zeros.len());
        for p in &zeros {
            let s = discriminant_series(&local_u_series(gf, p.x, p.symmetric())?, &gf.eps());
            if s.is_empty() {
                return Err(SusyError::PatchFailure {
                    x: p.x,
                    reason: "discriminant vanishes to working precision".into(),
                });
            }
            if s.valuation() % 2 != 0 || s.leading() < 0.0 {
                return Err(SusyError::NegativeDiscriminant { x: p.x, value: s.leading() });
            }
            switches.push((s.valuation() / 2) % 2 == 1);
        }
        if !switches[mid] {
            return Err(SusyError::BranchInconsistency {
                reason: "W+ must change branch at the midpoint, but the square root of the discriminant is even there"
                    .into(),
            });
        }
        if switches.iter().filter(|s| **s).count() % 2 != 0 {
            return Err(SusyError::BranchInconsistency {
                reason: "odd number of branch switches over one period".into(),
            });
        }
        let k = zeros.len();
        let mut signs = vec![0.0; k];
        let start = (mid + k - 1) % k;
        signs[start] = 1.0;
        for step in 1..k {
            let i = (start + step) % k;
            let prev = signs[(i + k - 1) % k];
            signs[i] = if switches[i] { -prev } else { prev };
        }
        Ok(Self {
            breakpoints: zeros.iter().map(|p| p.x).collect(),
            signs,
            period: l,
        })
    }

    /// Sign in force at `x` (the right-hand limit at a breakpoint).
    pub fn sign_at(&self, x: f64) -> f64 {
        let y = reduce(x, self.period);
        let idx = self.breakpoints.partition_point(|&b| b <= y);
        if idx == 0 {
            *self.signs.last().unwrap_or(&1.0)
        } else {
            self.signs[idx - 1]
        }
    }

    /// The same map with every sign flipped.
    pub fn mirrored(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            signs: self.signs.iter().map(|s| -s).collect(),
            period: self.period,
        }
    }
}
