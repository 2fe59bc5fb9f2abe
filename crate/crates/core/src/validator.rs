//! Admissibility checks for a generating function before construction.

use crate::jet::Jet;
use crate::roots::{find_zeros, reduce};
use crate::susy::{discriminant_valuation_at, ConstructedSystem, GeneratingFunction, SusyError};
use serde::Serialize;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroClass {
    FirstOrder,
    SecondOrderMidpoint,
    /// Double zero away from the midpoint (for instance at the period
    /// boundary of an even `U`); subject to the same curvature condition.
    SecondOrder,
    ForbiddenHigherOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroRecord {
    pub x: f64,
    pub order: u32,
    pub classification: ZeroClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not meaningful because an earlier check failed.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub pass: bool,
    pub zeros: Vec<ZeroRecord>,
    pub parity_defect: f64,
    pub curvature: f64,
    pub curvature_expected: f64,
    pub third_derivative: f64,
    pub min_discriminant: f64,
    pub min_discriminant_at: f64,
    /// `U` stays strictly inside `(-2 eps0, 2 eps1)`. Informational only.
    pub range_ok: bool,
    pub checks: Vec<Check>,
}

impl AdmissibilityReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VplusMode {
    RangeOk,
    BranchSwitchRequired { c0_points: Vec<f64>, b0_points: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidatorOptions {
    pub samples: usize,
    /// Double zeros are accepted where `|U|` falls below this times `max|U|`.
    pub touch_tol: f64,
    /// Jet coefficients `|c_k| l^k` below this times `max|U|` count as zero.
    pub order_tol: f64,
    pub parity_tol: f64,
    pub curvature_tol: f64,
    pub discriminant_tol: f64,
}

impl Default for ValidatorOptions {
    fn default() -> Self {
        Self {
            samples: 4096,
            touch_tol: 1e-9,
            order_tol: 1e-10,
            parity_tol: 1e-9,
            curvature_tol: 1e-8,
            discriminant_tol: 1e-12,
        }
    }
}

const MAX_ORDER: usize = 8;

fn jet_fn(gf: &GeneratingFunction, shift: f64) -> impl Fn(f64) -> Option<Jet<3>> + '_ {
    move |x| gf.u_jet::<3>(x).ok().map(|j| j - shift)
}

/// Zeros of `U` on `[0, L)` with their orders.
pub fn locate_zeros(gf: &GeneratingFunction, opts: &ValidatorOptions) -> Vec<ZeroRecord> {
    let l = gf.period();
    let scale = gf.u_scale();
    if scale == 0.0 {
        return Vec::new();
    }
    let ell = l / TAU;
    let mut out: Vec<ZeroRecord> = Vec::new();
    for z in find_zeros(&jet_fn(gf, 0.0), l, opts.samples, opts.touch_tol * scale) {
        let x = reduce(z.x, l);
        if out.iter().any(|r| crate::roots::cyclic_distance(r.x, x, l) <= 1e-9 * l) {
            continue;
        }
        let order = gf
            .u_jet::<MAX_ORDER>(x)
            .ok()
            .and_then(|j| (1..MAX_ORDER).find(|&k| j[k].abs() * ell.powi(k as i32) >= opts.order_tol * scale))
            .unwrap_or(MAX_ORDER) as u32;
        let at_mid = crate::roots::cyclic_distance(x, gf.midpoint(), l) <= 1e-6 * l;
        let classification = match order {
            1 => ZeroClass::FirstOrder,
            2 if at_mid => ZeroClass::SecondOrderMidpoint,
            2 => ZeroClass::SecondOrder,
            _ => ZeroClass::ForbiddenHigherOrder,
        };
        out.push(ZeroRecord { x, order, classification });
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    out
}

fn check(name: &'static str, ok: bool, location: Option<f64>, detail: String) -> Check {
    Check {
        name,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        location,
        detail,
    }
}

/// Runs every check and reports all of them, including after a failure.
pub fn check_admissibility(gf: &GeneratingFunction, opts: &ValidatorOptions) -> AdmissibilityReport {
    let l = gf.period();
    let xm = gf.midpoint();
    let eps = gf.eps();
    let scale = gf.u_scale().max(f64::MIN_POSITIVE);
    let ell = l / TAU;
    let mut checks = Vec::new();

    let zeros = locate_zeros(gf, opts);
    let mid = zeros.iter().find(|z| z.classification == ZeroClass::SecondOrderMidpoint);
    let mid_any = zeros
        .iter()
        .find(|z| crate::roots::cyclic_distance(z.x, xm, l) <= 1e-6 * l);
    checks.push(check(
        "midpoint_zero",
        mid.is_some(),
        Some(xm),
        match mid_any {
            Some(z) if z.order == 2 => "second-order zero at the midpoint".into(),
            Some(z) => format!("zero of order {} at the midpoint, expected 2", z.order),
            None => format!("U({xm}) does not vanish"),
        },
    ));
    let forbidden: Vec<&ZeroRecord> = zeros
        .iter()
        .filter(|z| z.classification == ZeroClass::ForbiddenHigherOrder)
        .collect();
    checks.push(check(
        "zero_orders",
        forbidden.is_empty(),
        forbidden.first().map(|z| z.x),
        match forbidden.first() {
            Some(z) => format!("zero of order {} at x = {}", z.order, z.x),
            None => format!("{} zeros, none above second order", zeros.len()),
        },
    ));

    let mut parity_defect: f64 = 0.0;
    let mut parity_at = xm;
    let mut eval_failure = None;
    for k in 0..512 {
        let t = (k as f64 + 0.5) / 512.0 * xm;
        match (gf.u(xm + t), gf.u(xm - t)) {
            (Ok(a), Ok(b)) => {
                if (a - b).abs() > parity_defect {
                    parity_defect = (a - b).abs();
                    parity_at = xm + t;
                }
            }
            (Err(e), _) | (_, Err(e)) => eval_failure = Some(e),
        }
    }
    checks.push(check(
        "evaluation",
        eval_failure.is_none(),
        None,
        eval_failure.map_or("U is finite on the probe grid".into(), |e| e.to_string()),
    ));
    checks.push(check(
        "parity",
        parity_defect <= opts.parity_tol * scale,
        Some(parity_at),
        format!("max |U(xm + t) - U(xm - t)| = {parity_defect:e}"),
    ));

    let expected = 8.0 * eps.eps0 * eps.eps1;
    let jm = gf.u_jet::<5>(xm).unwrap_or_else(|_| Jet::constant(f64::NAN));
    let curvature = 2.0 * jm[2];
    let third = 6.0 * jm[3];
    let curv_tol = opts.curvature_tol * expected.max(1.0);
    checks.push(check(
        "curvature",
        (curvature - expected).abs() <= curv_tol,
        Some(xm),
        format!("U''(xm) = {curvature}, required 8 eps0 eps1 = {expected}"),
    ));
    let bad_double = zeros.iter().find(|z| {
        z.classification == ZeroClass::SecondOrder
            && gf
                .u_jet::<3>(z.x)
                .map_or(true, |j| (2.0 * j[2] - expected).abs() > curv_tol)
    });
    checks.push(check(
        "double_zero_curvature",
        bad_double.is_none(),
        bad_double.map(|z| z.x),
        match bad_double {
            Some(z) => format!("double zero at x = {} with U'' != 8 eps0 eps1", z.x),
            None => "every double zero has U'' = 8 eps0 eps1".into(),
        },
    ));
    checks.push(check(
        "third_derivative",
        third.abs() <= opts.curvature_tol * scale / ell.powi(3),
        Some(xm),
        format!("U'''(xm) = {third:e}"),
    ));

    let n = opts.samples.max(8);
    let (mut min_s, mut min_at) = (f64::INFINITY, 0.0);
    for k in 0..n {
        let x = k as f64 * l / n as f64;
        if let Ok(j) = gf.discriminant_jet::<4>(x) {
            if j.value() < min_s {
                min_s = j.value();
                min_at = x;
            }
        }
    }
    checks.push(check(
        "discriminant",
        min_s >= -opts.discriminant_tol * gf.discriminant_scale(),
        Some(min_at),
        format!("min S = {min_s:e}"),
    ));

    // sqrt(S) must change sign at the midpoint, i.e. S vanishes there to
    // order 2 (mod 4); a fourth-order zero gives an even W+ near xm
    let branch = match discriminant_valuation_at(gf, xm, true) {
        Ok(Some(v)) => (v % 4 == 2, format!("S vanishes to order {v} at the midpoint")),
        Ok(None) => (false, "S vanishes identically near the midpoint".into()),
        Err(e) => (false, e.to_string()),
    };
    checks.push(check("midpoint_branch", branch.0, Some(xm), branch.1));

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        if let Ok(v) = gf.u(k as f64 * l / n as f64) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let range_ok = lo > -2.0 * eps.eps0 && hi < 2.0 * eps.eps1;

    let prior_ok = checks.iter().all(|c| c.status == CheckStatus::Pass);
    checks.push(if prior_ok {
        match ConstructedSystem::build(gf) {
            Ok(_) => check("construction", true, None, "branch map and patches built".into()),
            Err(e) => check("construction", false, error_location(&e), e.to_string()),
        }
    } else {
        Check {
            name: "construction",
            status: CheckStatus::Skipped,
            location: None,
            detail: "not attempted after a failed check".into(),
        }
    });

    AdmissibilityReport {
        pass: checks.iter().all(|c| c.status != CheckStatus::Fail),
        zeros,
        parity_defect,
        curvature,
        curvature_expected: expected,
        third_derivative: third,
        min_discriminant: min_s,
        min_discriminant_at: min_at,
        range_ok,
        checks,
    }
}

fn error_location(e: &SusyError) -> Option<f64> {
    match e {
        SusyError::NegativeDiscriminant { x, .. }
        | SusyError::PatchFailure { x, .. }
        | SusyError::UnremovablePole { x, .. }
        | SusyError::VplusPole { x }
        | SusyError::Singular { x, .. }
        | SusyError::SeamMismatch { x, .. } => Some(*x),
        _ => None,
    }
}

/// Whether `V+` is regular on the default branch: `U` strictly inside
/// `(-2 eps0, 2 eps1)`, or else the points where `U = -2 eps0` (poles of
/// `V+` unless the local branch is switched) and `U = 2 eps1`.
pub fn vplus_regularity_mode(gf: &GeneratingFunction, opts: &ValidatorOptions) -> VplusMode {
    let l = gf.period();
    let eps = gf.eps();
    let scale = gf.u_scale().max(f64::MIN_POSITIVE);
    let pts = |shift: f64| -> Vec<f64> {
        let mut v: Vec<f64> = find_zeros(&jet_fn(gf, shift), l, opts.samples, opts.touch_tol * scale.max(shift.abs()))
            .into_iter()
            .map(|z| reduce(z.x, l))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let c0_points = pts(-2.0 * eps.eps0);
    let b0_points = pts(2.0 * eps.eps1);
    let n = opts.samples.max(8);
    let inside = (0..n).all(|k| {
        gf.u(k as f64 * l / n as f64)
            .is_ok_and(|v| v > -2.0 * eps.eps0 && v < 2.0 * eps.eps1)
    });
    if inside && c0_points.is_empty() && b0_points.is_empty() {
        VplusMode::RangeOk
    } else {
        VplusMode::BranchSwitchRequired { c0_points, b0_points }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::susy::EnergyPair;

    fn gf(src: &str, e0: f64, e1: f64, l: f64) -> GeneratingFunction {
        GeneratingFunction::new(parse(src).unwrap(), EnergyPair::new(e0, e1).unwrap(), l).unwrap()
    }

    const RAZAVY: &str = "4*eps0*eps1*sin(x)^2";

    #[test]
    fn razavy_zeros_are_double() {
        let z = locate_zeros(&gf(RAZAVY, 1.0, 0.5, TAU), &ValidatorOptions::default());
        assert_eq!(z.len(), 2);
        assert!(z[0].x.abs() < 1e-9 && z[0].order == 2);
        assert!((z[1].x - std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(z[1].classification, ZeroClass::SecondOrderMidpoint);
    }

    #[test]
    fn constant_has_no_zeros() {
        assert!(locate_zeros(&gf("2", 1.0, 0.5, TAU), &ValidatorOptions::default()).is_empty());
    }

    #[test]
    fn razavy_passes() {
        let r = check_admissibility(&gf(RAZAVY, 1.0, 0.5, TAU), &ValidatorOptions::default());
        assert!(r.pass, "{:#?}", r.failures().collect::<Vec<_>>());
        assert!(r.parity_defect < 1e-12);
        assert!((r.curvature - 4.0).abs() < 1e-12);
        assert!(!r.range_ok);
    }

    #[test]
    fn low_eps0_fails_on_discriminant() {
        let r = check_admissibility(&gf(RAZAVY, 0.4, 0.5, TAU), &ValidatorOptions::default());
        assert!(!r.pass);
        assert_eq!(r.check("discriminant").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn sine_fails_midpoint_rule() {
        let r = check_admissibility(&gf("sin(x)", 1.0, 0.5, TAU), &ValidatorOptions::default());
        assert_eq!(r.check("midpoint_zero").unwrap().status, CheckStatus::Fail);
        assert_eq!(r.check("construction").unwrap().status, CheckStatus::Skipped);
    }

    #[test]
    fn vplus_modes() {
        let o = ValidatorOptions::default();
        match vplus_regularity_mode(&gf(RAZAVY, 1.0, 0.5, TAU), &o) {
            VplusMode::BranchSwitchRequired { c0_points, b0_points } => {
                assert!(c0_points.is_empty());
                assert_eq!(b0_points.len(), 4);
            }
            m => panic!("{m:?}"),
        }
        assert_eq!(vplus_regularity_mode(&gf("0.5 + 0.4*cos(x)", 1.0, 2.0, TAU), &o), VplusMode::RangeOk);
        match vplus_regularity_mode(&gf("-3*sin(x)^2", 1.0, 2.0, TAU), &o) {
            VplusMode::BranchSwitchRequired { c0_points, .. } => assert_eq!(c0_points.len(), 4),
            m => panic!("{m:?}"),
        }
    }
}
