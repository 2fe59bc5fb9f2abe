//! Checks a constructed system, or an exported grid, against the band-edge
//! oracle: each known state must appear in the oracle spectrum at its
//! energy, with the node count of the constructed function, and must solve
//! the Schrödinger equation to within the residual tolerance.

use crate::export::{ExportError, GridExport};
use crate::expr::Expression;
use crate::oracle::{self, EdgeSpectrum, OracleError, Periodicity, TrigInterpolant};
use crate::susy::ConstructedSystem;
use serde::Serialize;
use thiserror::Error;

/// Below this many harmonics the oracle is not expected to reach 1e-6.
pub const RECOMMENDED_HARMONICS: usize = 32;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("oracle failed for {partner}: {source}")]
    Oracle {
        partner: &'static str,
        #[source]
        source: OracleError,
    },
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("export has {rows} rows; at least 16 are needed")]
    TooFewRows { rows: usize },
    #[error("export period {0} is not positive and finite")]
    InvalidPeriod(f64),
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub harmonics: usize,
    /// Absolute energy tolerance.
    pub tol: f64,
    /// Samples over `[0, 2L)` for residuals and node counts.
    pub residual_samples: usize,
    pub residual_tol: f64,
    /// Lowest edge states requested from the oracle, per partner.
    pub edge_count: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            harmonics: 64,
            tol: 1e-6,
            residual_samples: 1024,
            residual_tol: 1e-6,
            edge_count: 9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Partner {
    Minus,
    Plus,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateCheck {
    pub state: String,
    pub partner: Partner,
    pub expected_energy: f64,
    /// Nearest oracle eigenvalue.
    pub found_energy: Option<f64>,
    /// Position of that eigenvalue in the sorted edge spectrum.
    pub edge_index: Option<usize>,
    pub periodicity: Option<Periodicity>,
    /// Nodes per period of the constructed function.
    pub expected_nodes: Option<usize>,
    /// Nodes per period of the oracle eigenfunction.
    pub found_nodes: Option<usize>,
    pub residual: Option<f64>,
    pub failures: Vec<String>,
}

impl StateCheck {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// Gap bounded by this edge: 0 below the lowest band, then 1, 2, ...
    pub fn gap(&self) -> Option<usize> {
        self.edge_index.map(|i| (i + 1) / 2)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub harmonics: usize,
    pub tol: f64,
    pub minus: EdgeSpectrum,
    pub plus: EdgeSpectrum,
    pub states: Vec<StateCheck>,
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    pub fn pass(&self) -> bool {
        self.states.iter().all(StateCheck::pass)
    }

    pub fn state(&self, name: &str) -> Option<&StateCheck> {
        self.states.iter().find(|s| s.state == name)
    }
}

/// One known state: its energy and samples over `[0, 2L)` (or the error
/// that prevented sampling it).
struct KnownState {
    name: &'static str,
    energy: f64,
    samples: Result<Vec<f64>, String>,
}

fn check_partner(
    partner: Partner,
    v: &dyn Fn(f64) -> f64,
    spectrum: &EdgeSpectrum,
    states: Vec<KnownState>,
    period: f64,
    opts: &VerifyOptions,
) -> Vec<StateCheck> {
    states
        .into_iter()
        .map(|k| {
            let mut c = StateCheck {
                state: k.name.to_string(),
                partner,
                expected_energy: k.energy,
                found_energy: None,
                edge_index: None,
                periodicity: None,
                expected_nodes: None,
                found_nodes: None,
                residual: None,
                failures: Vec::new(),
            };
            if let Some((i, s)) = spectrum
                .states
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.energy - k.energy).abs().total_cmp(&(b.1.energy - k.energy).abs()))
            {
                c.found_energy = Some(s.energy);
                c.edge_index = Some(i);
                c.periodicity = Some(s.periodicity);
                c.found_nodes = Some(s.nodes);
                let d = (s.energy - k.energy).abs();
                if !(d <= opts.tol) {
                    c.failures.push(format!(
                        "energy mismatch: nearest edge {:.10} differs from {:.10} by {d:.3e}",
                        s.energy, k.energy
                    ));
                }
            } else {
                c.failures.push("oracle returned no states".into());
            }
            match k.samples {
                Ok(psi) => {
                    match oracle::count_nodes(&psi) {
                        Ok(n) => c.expected_nodes = Some(n / 2),
                        Err(e) => c.failures.push(format!("node count of constructed state: {e}")),
                    }
                    if let (Some(a), Some(b)) = (c.expected_nodes, c.found_nodes) {
                        if a != b {
                            c.failures.push(format!("node mismatch: constructed {a}, oracle {b}"));
                        }
                    }
                    match oracle::residual(v, &psi, k.energy, period) {
                        Ok(r) => {
                            c.residual = Some(r);
                            if !(r <= opts.residual_tol) {
                                c.failures.push(format!("residual {r:.3e} exceeds {:.1e}", opts.residual_tol));
                            }
                        }
                        Err(e) => c.failures.push(format!("residual: {e}")),
                    }
                }
                Err(e) => c.failures.push(format!("constructed state unavailable: {e}")),
            }
            c
        })
        .collect()
}

fn spectra(
    v_minus: &dyn Fn(f64) -> f64,
    v_plus: &dyn Fn(f64) -> f64,
    period: f64,
    opts: &VerifyOptions,
) -> Result<(EdgeSpectrum, EdgeSpectrum), VerifyError> {
    let minus = oracle::band_edge_spectrum(v_minus, period, opts.harmonics, opts.edge_count)
        .map_err(|source| VerifyError::Oracle { partner: "V-", source })?;
    let plus = oracle::band_edge_spectrum(v_plus, period, opts.harmonics, opts.edge_count)
        .map_err(|source| VerifyError::Oracle { partner: "V+", source })?;
    Ok((minus, plus))
}

fn warnings(opts: &VerifyOptions) -> Vec<String> {
    let mut w = Vec::new();
    if opts.harmonics < RECOMMENDED_HARMONICS {
        w.push(format!(
            "{} harmonics is below the recommended minimum of {RECOMMENDED_HARMONICS}; energies may not converge to 1e-6",
            opts.harmonics
        ));
    }
    w
}

/// Verifies the five constructed states of `sys`. `perturb(x)` is added to
/// both potentials, which should make a correct system fail.
pub fn verify_system(
    sys: &ConstructedSystem,
    perturb: Option<&Expression>,
    opts: &VerifyOptions,
) -> Result<SpectrumReport, VerifyError> {
    let l = sys.period();
    let params = sys.generating_function().params();
    let extra = |x: f64| perturb.map_or(0.0, |p| p.eval(x, &params).unwrap_or(f64::NAN));
    let v_minus = |x: f64| sys.v_minus(x).unwrap_or(f64::NAN) + extra(x);
    let v_plus = |x: f64| sys.v_plus(x).unwrap_or(f64::NAN) + extra(x);
    let (minus, plus) = spectra(&v_minus, &v_plus, l, opts)?;

    let n = opts.residual_samples;
    let xs: Vec<f64> = (0..n).map(|j| 2.0 * l * j as f64 / n as f64).collect();
    let mut psi_m: [Result<Vec<f64>, String>; 3] = std::array::from_fn(|_| Ok(Vec::with_capacity(n)));
    let mut psi_p: [Result<Vec<f64>, String>; 2] = std::array::from_fn(|_| Ok(Vec::with_capacity(n)));
    for &x in &xs {
        match sys.wavefunctions_minus(x, [1.0; 3]) {
            Ok(p) => psi_m.iter_mut().zip(p).for_each(|(s, v)| {
                if let Ok(s) = s {
                    s.push(v)
                }
            }),
            Err(e) => psi_m.iter_mut().for_each(|s| *s = Err(e.to_string())),
        }
        match sys.wavefunctions_plus(x, [1.0; 2]) {
            Ok(p) => psi_p.iter_mut().zip(p).for_each(|(s, v)| {
                if let Ok(s) = s {
                    s.push(v)
                }
            }),
            Err(e) => psi_p.iter_mut().for_each(|s| *s = Err(e.to_string())),
        }
    }
    let e = sys.energies();
    let [m0, m1, m2] = psi_m;
    let [p1, p2] = psi_p;
    let known_minus = vec![
        KnownState { name: "psi0-", energy: e[0], samples: m0 },
        KnownState { name: "psi1-", energy: e[1], samples: m1 },
        KnownState { name: "psi2-", energy: e[2], samples: m2 },
    ];
    let known_plus = vec![
        KnownState { name: "psi1+", energy: e[1], samples: p1 },
        KnownState { name: "psi2+", energy: e[2], samples: p2 },
    ];
    let mut states = check_partner(Partner::Minus, &v_minus, &minus, known_minus, l, opts);
    states.extend(check_partner(Partner::Plus, &v_plus, &plus, known_plus, l, opts));
    Ok(SpectrumReport {
        harmonics: opts.harmonics,
        tol: opts.tol,
        minus,
        plus,
        states,
        warnings: warnings(opts),
    })
}

/// Verifies an exported grid. Potentials and states are interpolated
/// trigonometrically from the samples on `[0, L)`; each state is continued
/// to `[0, 2L)` as periodic or antiperiodic, whichever solves the equation
/// better.
pub fn verify_export(export: &GridExport, opts: &VerifyOptions) -> Result<SpectrumReport, VerifyError> {
    let l = export.meta.period;
    if !(l.is_finite() && l > 0.0) {
        return Err(VerifyError::InvalidPeriod(l));
    }
    let rows = export.rows();
    if rows < 16 {
        return Err(VerifyError::TooFewRows { rows });
    }
    let interp = |name: &'static str, partner: &'static str| -> Result<TrigInterpolant, VerifyError> {
        TrigInterpolant::new(export.column(name)?, l).map_err(|source| VerifyError::Oracle { partner, source })
    };
    let vm = interp("V_minus", "V-")?;
    let vp = interp("V_plus", "V+")?;
    let v_minus = |x: f64| vm.eval(x);
    let v_plus = |x: f64| vp.eval(x);
    let (minus, plus) = spectra(&v_minus, &v_plus, l, opts)?;

    let n = opts.residual_samples;
    let extend = |name: &str, v: &dyn Fn(f64) -> f64, energy: f64| -> Result<Vec<f64>, String> {
        let col = export.column(name).map_err(|e| e.to_string())?;
        let mut best: Option<(f64, Vec<f64>)> = None;
        for sign in [1.0, -1.0] {
            let doubled: Vec<f64> = col.iter().copied().chain(col.iter().map(|v| sign * v)).collect();
            let ip = TrigInterpolant::new(&doubled, 2.0 * l).map_err(|e| e.to_string())?;
            let psi = ip.resample(n);
            let r = oracle::residual(v, &psi, energy, l).map_err(|e| e.to_string())?;
            if best.as_ref().map_or(true, |(b, _)| r < *b) {
                best = Some((r, psi));
            }
        }
        Ok(best.expect("two candidates").1)
    };
    let e = export.meta.energies;
    let known_minus = vec![
        KnownState { name: "psi0-", energy: e[0], samples: extend("psi0_m", &v_minus, e[0]) },
        KnownState { name: "psi1-", energy: e[1], samples: extend("psi1_m", &v_minus, e[1]) },
        KnownState { name: "psi2-", energy: e[2], samples: extend("psi2_m", &v_minus, e[2]) },
    ];
    let known_plus = vec![
        KnownState { name: "psi1+", energy: e[1], samples: extend("psi1_p", &v_plus, e[1]) },
        KnownState { name: "psi2+", energy: e[2], samples: extend("psi2_p", &v_plus, e[2]) },
    ];
    let mut states = check_partner(Partner::Minus, &v_minus, &minus, known_minus, l, opts);
    states.extend(check_partner(Partner::Plus, &v_plus, &plus, known_plus, l, opts));
    Ok(SpectrumReport {
        harmonics: opts.harmonics,
        tol: opts.tol,
        minus,
        plus,
        states,
        warnings: warnings(opts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::razavy::RazavyParams;
    use crate::{parse, EnergyPair, GeneratingFunction};
    use std::f64::consts::TAU;

    fn razavy(eps0: f64) -> ConstructedSystem {
        let p = RazavyParams::new(eps0).unwrap();
        let gf = GeneratingFunction::new(
            parse(RazavyParams::GENERATOR).unwrap(),
            EnergyPair::new(p.eps0, p.eps1).unwrap(),
            TAU,
        )
        .unwrap();
        ConstructedSystem::build(&gf).unwrap()
    }

    #[test]
    fn razavy_passes() {
        let r = verify_system(&razavy(1.0), None, &VerifyOptions::default()).unwrap();
        for s in &r.states {
            assert!(s.pass(), "{}: {:?}", s.state, s.failures);
        }
        let nodes: Vec<_> = r.states.iter().map(|s| s.found_nodes.unwrap()).collect();
        assert_eq!(nodes, [0, 2, 2, 2, 2]);
        assert_eq!(r.state("psi1-").unwrap().gap(), Some(2));
        assert_eq!(r.state("psi2-").unwrap().gap(), Some(2));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn perturbation_is_detected() {
        let p = parse("0.1*cos(x)").unwrap();
        let r = verify_system(&razavy(1.0), Some(&p), &VerifyOptions::default()).unwrap();
        assert!(!r.pass());
        assert!(r.states[1].failures.iter().any(|f| f.contains("energy mismatch")));
    }

    #[test]
    fn export_round_trip_passes() {
        let sys = razavy(1.0);
        let ex = GridExport::from_system(&sys, RazavyParams::GENERATOR, 256, [1.0; 3], [1.0; 2]);
        let r = verify_export(&ex, &VerifyOptions::default()).unwrap();
        for s in &r.states {
            assert!(s.pass(), "{}: {:?}", s.state, s.failures);
        }
    }

    #[test]
    fn few_harmonics_warn() {
        let opts = VerifyOptions {
            harmonics: 16,
            ..VerifyOptions::default()
        };
        let r = verify_system(&razavy(1.0), None, &opts).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }
}
