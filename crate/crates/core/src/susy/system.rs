//! The assembled construction: branch map, patched local expansions and the
//! integrated exponents of the three `H-` states.

use super::branch::{special_points, BranchMap, SpecialKind, SpecialPoint, DEFAULT_SAMPLES};
use super::direct::DirectChain;
use super::local::LocalChain;
use super::{EnergyPair, GeneratingFunction, SusyError};
use crate::jet::Jet;
use crate::quadrature::{integrate, QuadratureError};
use crate::roots::{cyclic_distance, reduce};
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct BuildOptions {
    /// Scan density for special points and the discriminant check.
    pub samples: usize,
    /// Largest patch half-width as a fraction of the period.
    pub window_fraction: f64,
    /// Required agreement of series and closed form at patch edges.
    pub seam_tol: f64,
    /// Absolute tolerance of each quadrature piece.
    pub quad_tol: f64,
    /// Stored exponent knots per period.
    pub knots_per_period: usize,
    /// Probe points for the oddness check of `W+`.
    pub probe: usize,
    pub odd_tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            window_fraction: 0.02,
            seam_tol: 1e-8,
            quad_tol: 1e-13,
            knots_per_period: 64,
            probe: 512,
            odd_tol: 1e-8,
        }
    }
}

/// `(log|K|, sign K)` per state.
type Scale = [(f64, f64); 3];

const UNIT: Scale = [(0.0, 1.0); 3];

/// A neighbourhood of a special point evaluated from its local expansion.
#[derive(Clone, Debug)]
pub struct Patch {
    pub center: f64,
    pub half_width: f64,
    pub kinds: Vec<SpecialKind>,
    chain: LocalChain,
    /// State constants for `x >= center` and `x < center`; they differ only
    /// for the patch at `0`, whose halves sit at both ends of the period.
    k_pos: Scale,
    k_neg: Scale,
}

impl Patch {
    pub fn chain(&self) -> &LocalChain {
        &self.chain
    }
}

#[derive(Clone, Debug)]
struct Knot {
    x: f64,
    log_e: [f64; 3],
    sign: [f64; 3],
}

enum Site {
    Patch(usize, f64),
    Regular(f64),
}

#[derive(Clone, Debug)]
pub struct ConstructedSystem {
    gf: GeneratingFunction,
    branch: BranchMap,
    special: Vec<SpecialPoint>,
    patches: Vec<Patch>,
    knots: Vec<Knot>,
    kappa: [f64; 3],
    opts: BuildOptions,
}

impl ConstructedSystem {
    pub fn build(gf: &GeneratingFunction) -> Result<Self, SusyError> {
        Self::build_with(gf, BuildOptions::default())
    }

    pub fn build_with(gf: &GeneratingFunction, opts: BuildOptions) -> Result<Self, SusyError> {
        check_parity(gf)?;
        let special = special_points(gf, opts.samples)?;
        let branch = BranchMap::from_points(gf, &special)?;
        let patches = build_patches(gf, &branch, &special, &opts)?;
        let mut sys = Self {
            gf: gf.clone(),
            branch,
            special,
            patches,
            knots: Vec::new(),
            kappa: [1.0; 3],
            opts,
        };
        sys.check_oddness()?;
        sys.integrate_exponents()?;
        Ok(sys)
    }

    pub fn generating_function(&self) -> &GeneratingFunction {
        &self.gf
    }

    pub fn eps(&self) -> EnergyPair {
        self.gf.eps()
    }

    pub fn period(&self) -> f64 {
        self.gf.period()
    }

    pub fn midpoint(&self) -> f64 {
        self.gf.midpoint()
    }

    /// `E0- = 0`, `E1- = eps0`, `E2- = eps0 + eps1`.
    pub fn energies(&self) -> [f64; 3] {
        self.gf.eps().energies()
    }

    pub fn branch_map(&self) -> &BranchMap {
        &self.branch
    }

    pub fn special_points(&self) -> &[SpecialPoint] {
        &self.special
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn options(&self) -> &BuildOptions {
        &self.opts
    }

    /// `psi_i(x + L) = kappa_i psi_i(x)`.
    pub fn period_multipliers(&self) -> [f64; 3] {
        self.kappa
    }

    /// Whether `x` falls inside a patch window.
    pub fn in_patch(&self, x: f64) -> bool {
        matches!(self.locate(x), Site::Patch(..))
    }

    fn locate(&self, x: f64) -> Site {
        let l = self.period();
        let y = reduce(x, l);
        for (i, p) in self.patches.iter().enumerate() {
            let mut t = y - p.center;
            if t > 0.5 * l {
                t -= l;
            }
            if t.abs() < p.half_width {
                return Site::Patch(i, t);
            }
        }
        Site::Regular(y)
    }

    fn direct<const N: usize>(&self, y: f64) -> Result<DirectChain<N>, SusyError> {
        let u = self.gf.u_jet::<N>(y)?;
        DirectChain::new(&u, &self.gf.eps(), self.branch.sign_at(y)).ok_or(SusyError::Singular {
            x: y,
            what: "closed-form chain",
        })
    }

    pub fn w_plus(&self, x: f64) -> Result<Jet<3>, SusyError> {
        match self.locate(x) {
            Site::Patch(i, t) => self.patches[i].chain.w_plus_jet(t, x),
            Site::Regular(y) => Ok(self.direct::<5>(y)?.wp.resize()),
        }
    }

    pub fn w_plus_tilde(&self, x: f64) -> Result<Jet<3>, SusyError> {
        match self.locate(x) {
            Site::Patch(i, t) => self.patches[i].chain.w_plus_tilde_jet(t, x),
            Site::Regular(y) => Ok(self.direct::<5>(y)?.wt.resize()),
        }
    }

    /// `W0, W1, W2` as jets (value and two derivatives).
    pub fn superpotentials(&self, x: f64) -> Result<[Jet<3>; 3], SusyError> {
        match self.locate(x) {
            Site::Patch(i, t) => {
                let c = &self.patches[i].chain;
                Ok([c.w_jet(0, t, x)?, c.w_jet(1, t, x)?, c.w_jet(2, t, x)?])
            }
            Site::Regular(y) => Ok(self.direct::<5>(y)?.w.map(|j| j.resize())),
        }
    }

    pub fn v_minus(&self, x: f64) -> Result<f64, SusyError> {
        match self.locate(x) {
            Site::Patch(i, t) => Ok(self.patches[i].chain.v_minus(t)),
            Site::Regular(y) => Ok(self.direct::<5>(y)?.v_minus().value()),
        }
    }

    pub fn v_plus(&self, x: f64) -> Result<f64, SusyError> {
        match self.locate(x) {
            Site::Patch(i, t) => self.patches[i].chain.v_plus(t, x),
            Site::Regular(y) => Ok(self.direct::<5>(y)?.v_plus().value()),
        }
    }

    /// `(V-, V+)`.
    pub fn potentials(&self, x: f64) -> Result<(f64, f64), SusyError> {
        Ok((self.v_minus(x)?, self.v_plus(x)?))
    }

    fn split_period(&self, x: f64) -> (f64, i32) {
        let l = self.period();
        let y = reduce(x, l);
        (y, ((x - y) / l).round() as i32)
    }

    /// `log|E_i|` and sign of `E_i = exp(-int_{L/2}^y W_i)` for `y` in one period.
    fn log_e_reduced(&self, y: f64) -> Result<([f64; 3], [f64; 3]), SusyError> {
        match self.locate(y) {
            Site::Patch(i, t) => {
                let p = &self.patches[i];
                let k = if t >= 0.0 { p.k_pos } else { p.k_neg };
                let mut out = ([0.0; 3], [1.0; 3]);
                for s in 0..3 {
                    let (le, sg) = p.chain.log_e(s, t);
                    out.0[s] = k[s].0 + le;
                    out.1[s] = k[s].1 * sg;
                }
                Ok(out)
            }
            Site::Regular(y) => {
                let knot = self.anchor_knot(y);
                let w = self.integrate_w(knot.x, y)?;
                Ok(([0, 1, 2].map(|s| knot.log_e[s] - w[s]), knot.sign))
            }
        }
    }

    fn anchor_knot(&self, y: f64) -> &Knot {
        let k = &self.knots;
        if y >= self.midpoint() {
            let idx = k.partition_point(|kn| kn.x <= y);
            &k[idx.saturating_sub(1)]
        } else {
            let idx = k.partition_point(|kn| kn.x < y);
            &k[idx.min(k.len() - 1)]
        }
    }

    fn integrate_w(&self, a: f64, b: f64) -> Result<[f64; 3], SusyError> {
        if a == b {
            return Ok([0.0; 3]);
        }
        let sign = self.branch.sign_at(0.5 * (a + b));
        let eps = self.gf.eps();
        let f = |x: f64| -> Result<[f64; 3], QuadratureError> {
            let u = self
                .gf
                .u_jet::<3>(x)
                .map_err(|_| QuadratureError::NonFinite(x))?;
            DirectChain::new(&u, &eps, sign)
                .map(|c| c.w.map(|j| j.value()))
                .ok_or(QuadratureError::NonFinite(x))
        };
        Ok(integrate(&f, a, b, self.opts.quad_tol)?)
    }

    /// `int_a^b W_i dx`, with the principal value across simple poles.
    pub fn integrate_superpotential(&self, i: usize, a: f64, b: f64) -> Result<f64, SusyError> {
        if a == b {
            return Ok(0.0);
        }
        let f = |x: f64| -> Result<f64, SusyError> {
            let (y, n) = self.split_period(x);
            let le = self.log_e_reduced(y)?.0[i];
            if !le.is_finite() {
                return Err(SusyError::Singular { x, what: "integral of W" });
            }
            // -log|E| grows by -log|kappa| per period
            Ok(-le - n as f64 * self.kappa[i].abs().ln())
        };
        Ok(f(b)? - f(a)?)
    }

    /// `psi_i-` with unit constants and its derivative.
    pub fn psi_minus_with_derivative(&self, x: f64) -> Result<[(f64, f64); 3], SusyError> {
        let (y, n) = self.split_period(x);
        let per = [0, 1, 2].map(|i| self.kappa[i].powi(n));
        let raw = match self.locate(y) {
            Site::Patch(i, t) => {
                let p = &self.patches[i];
                let k = if t >= 0.0 { p.k_pos } else { p.k_neg };
                [0, 1, 2].map(|s| {
                    let (g, dg) = p.chain.psi_analytic(s, t);
                    let kk = k[s].1 * k[s].0.exp();
                    (kk * g, kk * dg)
                })
            }
            Site::Regular(y) => {
                let d = self.direct::<5>(y)?;
                let (log_e, sign) = self.log_e_reduced(y)?;
                let pref = d.prefactors();
                [0, 1, 2].map(|s| {
                    let e = sign[s] * log_e[s].exp();
                    (pref[s][0] * e, (pref[s][1] - d.w[s][0] * pref[s][0]) * e)
                })
            }
        };
        Ok([0, 1, 2].map(|s| (raw[s].0 * per[s], raw[s].1 * per[s])))
    }

    /// `psi_0-, psi_1-, psi_2-` scaled by `norms`.
    pub fn wavefunctions_minus(&self, x: f64, norms: [f64; 3]) -> Result<[f64; 3], SusyError> {
        let p = self.psi_minus_with_derivative(x)?;
        Ok([0, 1, 2].map(|i| norms[i] * p[i].0))
    }

    /// `psi_n+ = (psi_n-' + W0 psi_n-)/sqrt 2` for `n = 1, 2`, scaled by `norms`.
    pub fn wavefunctions_plus(&self, x: f64, norms: [f64; 2]) -> Result<[f64; 2], SusyError> {
        let (y, n) = self.split_period(x);
        match self.locate(y) {
            Site::Patch(i, t) => {
                let p = &self.patches[i];
                let k = if t >= 0.0 { p.k_pos } else { p.k_neg };
                let mut out = [0.0; 2];
                for s in 1..=2 {
                    let kk = k[s].1 * k[s].0.exp() * self.kappa[s].powi(n);
                    out[s - 1] = norms[s - 1] * kk * p.chain.psi_plus_analytic(s, t, x)?;
                }
                Ok(out)
            }
            Site::Regular(_) => {
                let psi = self.psi_minus_with_derivative(x)?;
                let w0 = self.direct::<5>(y)?.w[0].value();
                Ok([1, 2].map(|s| norms[s - 1] * (psi[s].1 + w0 * psi[s].0) * FRAC_1_SQRT_2))
            }
        }
    }

    fn check_oddness(&self) -> Result<(), SusyError> {
        let xm = self.midpoint();
        let n = self.opts.probe.max(1);
        for k in 0..n {
            let t = (k as f64 + 0.5) / n as f64 * xm;
            let (Ok(a), Ok(b)) = (self.w_plus(xm + t), self.w_plus(xm - t)) else {
                continue;
            };
            // A midpoint uncertain at the level of odd_tol * L moves W+ by
            // about |W+'| odd_tol L, which dominates next to poles.
            let slope = a.derivative().value().abs().max(b.derivative().value().abs());
            let (a, b) = (a.value(), b.value());
            let allowed = self.opts.odd_tol * (a.abs().max(b.abs()).max(1.0) + slope * self.period());
            if (a + b).abs() > allowed {
                return Err(SusyError::BranchInconsistency {
                    reason: format!("W+ is not odd about the midpoint: W+({}) = {a}, W+({}) = {b}", xm + t, xm - t),
                });
            }
        }
        Ok(())
    }

    /// Walks from the midpoint to both ends of the period, storing the
    /// exponents at knots and matching each patch constant at the patch edge
    /// nearer the midpoint.
    fn integrate_exponents(&mut self) -> Result<(), SusyError> {
        let l = self.period();
        let np = self.patches.len();
        let m = self
            .patches
            .iter()
            .position(|p| p.kinds.contains(&SpecialKind::Midpoint))
            .expect("midpoint patch");
        let step = l / self.opts.knots_per_period.max(1) as f64;
        let mut knots = Vec::new();
        let attach = |e: &Scale, k: &Scale| -> Scale { [0, 1, 2].map(|s| (k[s].0 + e[s].0, k[s].1 * e[s].1)) };
        let local = |p: &Patch, t: f64| -> Scale { [0, 1, 2].map(|s| p.chain.log_e(s, t)) };
        let detach = |e: &Scale, loc: &Scale| -> Scale { [0, 1, 2].map(|s| (e[s].0 - loc[s].0, e[s].1 * loc[s].1)) };

        self.patches[m].k_pos = UNIT;
        self.patches[m].k_neg = UNIT;

        for dir in [1.0f64, -1.0] {
            let pm = &self.patches[m];
            let mut x = pm.center + dir * pm.half_width;
            let mut e = attach(&local(pm, dir * pm.half_width), &UNIT);
            knots.push(make_knot(x, &e));
            let order: Vec<usize> = if dir > 0.0 {
                (m + 1..=np).collect()
            } else {
                (0..m).rev().collect()
            };
            for j in order {
                let idx = j % np;
                let (c, h) = {
                    let p = &self.patches[idx];
                    let c = if j == np { l } else { p.center };
                    (c, p.half_width)
                };
                let edge = c - dir * h;
                let pieces = ((edge - x).abs() / step).ceil().max(1.0) as usize;
                let mut a = x;
                for q in 1..=pieces {
                    let b = if q == pieces { edge } else { x + (edge - x) * q as f64 / pieces as f64 };
                    let w = self.integrate_w(a, b)?;
                    for s in 0..3 {
                        e[s].0 -= w[s];
                    }
                    knots.push(make_knot(b, &e));
                    a = b;
                }
                let k = detach(&e, &local(&self.patches[idx], -dir * h));
                let terminal = (dir > 0.0 && j == np) || (dir < 0.0 && idx == 0);
                let p = &mut self.patches[idx];
                if terminal {
                    if dir > 0.0 {
                        p.k_neg = k;
                    } else {
                        p.k_pos = k;
                    }
                    break;
                }
                p.k_pos = k;
                p.k_neg = k;
                x = c + dir * h;
                e = attach(&local(p, dir * h), &k);
                knots.push(make_knot(x, &e));
            }
        }
        knots.sort_by(|a, b| a.x.total_cmp(&b.x));
        self.knots = knots;
        let p0 = &self.patches[0];
        self.kappa = [0, 1, 2].map(|s| p0.k_neg[s].1 * p0.k_pos[s].1 * (p0.k_neg[s].0 - p0.k_pos[s].0).exp());
        Ok(())
    }
}

fn make_knot(x: f64, e: &Scale) -> Knot {
    Knot {
        x,
        log_e: e.map(|v| v.0),
        sign: e.map(|v| v.1),
    }
}

fn check_parity(gf: &GeneratingFunction) -> Result<(), SusyError> {
    let xm = gf.midpoint();
    let tol = 1e-9 * gf.u_scale().max(f64::MIN_POSITIVE);
    for k in 0..512 {
        let t = (k as f64 + 0.5) / 512.0 * xm;
        let d = gf.u(xm + t)? - gf.u(xm - t)?;
        if d.abs() > tol {
            return Err(SusyError::BranchInconsistency {
                reason: format!("U is not even about the midpoint (U({}) - U({}) = {d:e})", xm + t, xm - t),
            });
        }
    }
    Ok(())
}

fn build_patches(
    gf: &GeneratingFunction,
    branch: &BranchMap,
    special: &[SpecialPoint],
    opts: &BuildOptions,
) -> Result<Vec<Patch>, SusyError> {
    let l = gf.period();
    let mut out = Vec::with_capacity(special.len());
    for (i, p) in special.iter().enumerate() {
        let gap = special
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| cyclic_distance(p.x, q.x, l))
            .fold(l, f64::min);
        let h_max = (opts.window_fraction * l).min(0.45 * gap);
        let chain = LocalChain::new(gf, p.x, branch.sign_at(p.x), p.symmetric())?;
        let mut last_err = None;
        let mut chosen = None;
        for f in [1.0, 0.5, 0.25, 0.125, 0.0625] {
            let h = h_max * f;
            match check_seam(gf, branch, &chain, h, opts.seam_tol) {
                Ok(()) => {
                    chosen = Some(h);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        let Some(h) = chosen else {
            return Err(last_err.expect("at least one seam attempt"));
        };
        out.push(Patch {
            center: p.x,
            half_width: h,
            kinds: p.kinds.clone(),
            chain,
            k_pos: UNIT,
            k_neg: UNIT,
        });
    }
    Ok(out)
}

fn check_seam(gf: &GeneratingFunction, branch: &BranchMap, chain: &LocalChain, h: f64, tol: f64) -> Result<(), SusyError> {
    let eps = gf.eps();
    for t in [-h, h] {
        let x = chain.center() + t;
        let u = gf.u_jet::<5>(x)?;
        let d = DirectChain::new(&u, &eps, branch.sign_at(x)).ok_or(SusyError::PatchFailure {
            x,
            reason: "closed form is singular at the patch edge".into(),
        })?;
        let mut pairs: Vec<(&'static str, f64, f64)> = vec![
            ("W+", chain.w_plus_series().eval(t), d.wp.value()),
            ("W~+", chain.w_plus_tilde_series().eval(t), d.wt.value()),
            ("V-", chain.v_minus(t), d.v_minus().value()),
        ];
        for (i, name) in ["W0", "W1", "W2"].into_iter().enumerate() {
            pairs.push((name, chain.w_series(i).eval(t), d.w[i].value()));
        }
        if chain.v_plus_series().valuation() >= 0 {
            pairs.push(("V+", chain.v_plus_series().eval(t), d.v_plus().value()));
        }
        for (what, series, direct) in pairs {
            if !((series - direct).abs() <= tol * direct.abs().max(1.0)) {
                return Err(SusyError::SeamMismatch { x, what, series, direct });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{PI, TAU};

    fn razavy(eps0: f64) -> ConstructedSystem {
        let eps = EnergyPair::new(eps0, eps0 - 0.5).unwrap();
        let gf = GeneratingFunction::new(parse("4*eps0*eps1*sin(x)^2").unwrap(), eps, TAU).unwrap();
        ConstructedSystem::build(&gf).unwrap()
    }

    fn v_ref(x: f64, e0: f64) -> f64 {
        let e1 = e0 - 0.5;
        let s = (e0 * e1).sqrt();
        e0 - 0.5 + 0.25 * (e0 * e1 - 6.0 * s * x.cos() - e0 * e1 * (2.0 * x).cos())
    }

    fn psi_ref(x: f64, e0: f64) -> [f64; 3] {
        let e1 = e0 - 0.5;
        let s = (e0 * e1).sqrt();
        let c2 = (0.5 * x).cos().powi(2);
        let g = (2.0 * s * c2).exp();
        [
            g * (1.0 + 4.0 * (s + e1) * c2),
            g * e0 * x.sin(),
            g * 2.0 * e1 * (1.0 + 4.0 * (s - e0) * c2),
        ]
    }

    #[test]
    fn razavy_potential_matches_closed_form() {
        let sys = razavy(1.0);
        for &(x, v) in &[(0.0, -0.560660171779821), (PI / 2.0, 0.75), (PI, 1.560660171779821)] {
            assert!((sys.v_minus(x).unwrap() - v).abs() < 1e-9, "x={x}");
        }
        for k in 0..=400 {
            let x = k as f64 * TAU / 400.0 + 1e-3;
            let d = (sys.v_minus(x).unwrap() - v_ref(x, 1.0)).abs();
            assert!(d < 1e-8, "x={x}: {d:e}");
        }
    }

    #[test]
    fn razavy_states_match_up_to_a_constant() {
        let sys = razavy(1.0);
        let at = [0.7, 1.3];
        let p0 = sys.wavefunctions_minus(at[0], [1.0; 3]).unwrap();
        let r0 = psi_ref(at[0], 1.0);
        let c = [0, 1, 2].map(|i| r0[i] / p0[i]);
        for k in 0..=300 {
            let x = -1.0 + k as f64 * 9.0 / 300.0;
            let p = sys.wavefunctions_minus(x, c).unwrap();
            let r = psi_ref(x, 1.0);
            for i in 0..3 {
                assert!((p[i] - r[i]).abs() < 1e-8 * r[i].abs().max(1.0), "i={i} x={x}: {} vs {}", p[i], r[i]);
            }
        }
        for m in sys.period_multipliers() {
            assert!((m - 1.0).abs() < 1e-9, "{m}");
        }
    }

    #[test]
    fn superpotential_integrates_to_zero_over_a_period() {
        let sys = razavy(1.0);
        for i in 0..3 {
            let v = sys.integrate_superpotential(i, 0.3, 0.3 + TAU).unwrap();
            assert!(v.abs() < 1e-8, "W{i}: {v:e}");
        }
    }

    #[test]
    fn partner_potential_and_states() {
        let sys = razavy(2.0);
        let e = sys.energies();
        // H+ psi+ = E psi+ checked by finite differences
        for k in 0..40 {
            let x = 0.05 + k as f64 * TAU / 40.0;
            let h = 2.5e-3;
            let f = |y: f64| sys.wavefunctions_plus(y, [1.0, 1.0]).unwrap();
            let [a2, a, b, c, c2] = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| f(x + k * h));
            let vp = sys.v_plus(x).unwrap();
            for n in 0..2 {
                let d2 = (-a2[n] + 16.0 * a[n] - 30.0 * b[n] + 16.0 * c[n] - c2[n]) / (12.0 * h * h);
                let r = -0.5 * d2 + vp * b[n] - e[n + 1] * b[n];
                assert!(r.abs() < 1e-6 * b[n].abs().max(1.0), "n={n} x={x}: {r:e}");
            }
        }
    }

    #[test]
    fn branch_signs_flip_at_the_midpoint() {
        let sys = razavy(1.0);
        assert_eq!(sys.branch_map().sign_at(1.0), 1.0);
        assert_eq!(sys.branch_map().sign_at(4.0), -1.0);
        assert!(sys.in_patch(PI) && sys.in_patch(0.0) && !sys.in_patch(2.0));
    }
}
