//! Tabulated output of a constructed system on a uniform grid.

use crate::susy::ConstructedSystem;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt::Write as _;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const COLUMNS: [&str; 11] = [
    "x", "V_minus", "V_plus", "W0", "W1", "W2", "psi0_m", "psi1_m", "psi2_m", "psi1_p", "psi2_p",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("malformed JSON export: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV export at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("export has no column named {0}")]
    MissingColumn(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportMeta {
    pub generator: String,
    pub eps0: f64,
    pub eps1: f64,
    pub period: f64,
    pub energies: [f64; 3],
    pub norms_minus: [f64; 3],
    pub norms_plus: [f64; 2],
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridExport {
    pub meta: ExportMeta,
    pub columns: Vec<Column>,
}

fn nan_as_null<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.is_finite().then_some(*x)))
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    let v: Vec<Option<f64>> = Vec::deserialize(d)?;
    Ok(v.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
}

/// 17 significant digits; non-finite values print as `NaN`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".into()
    }
}

impl GridExport {
    /// Samples all eleven standard columns at `x_j = j L / grid`. Points
    /// where a quantity is singular are recorded as NaN.
    pub fn from_system(
        sys: &ConstructedSystem,
        generator: &str,
        grid: usize,
        norms_minus: [f64; 3],
        norms_plus: [f64; 2],
    ) -> Self {
        let l = sys.period();
        let eps = sys.eps();
        let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(grid); COLUMNS.len()];
        for j in 0..grid {
            let x = l * j as f64 / grid as f64;
            let w = sys.superpotentials(x).map(|w| w.map(|j| j.value()));
            let pm = sys.wavefunctions_minus(x, norms_minus);
            let pp = sys.wavefunctions_plus(x, norms_plus);
            let row = [
                x,
                sys.v_minus(x).unwrap_or(f64::NAN),
                sys.v_plus(x).unwrap_or(f64::NAN),
                w.as_ref().map_or(f64::NAN, |w| w[0]),
                w.as_ref().map_or(f64::NAN, |w| w[1]),
                w.as_ref().map_or(f64::NAN, |w| w[2]),
                pm.as_ref().map_or(f64::NAN, |p| p[0]),
                pm.as_ref().map_or(f64::NAN, |p| p[1]),
                pm.as_ref().map_or(f64::NAN, |p| p[2]),
                pp.as_ref().map_or(f64::NAN, |p| p[0]),
                pp.as_ref().map_or(f64::NAN, |p| p[1]),
            ];
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
        Self {
            meta: ExportMeta {
                generator: generator.to_string(),
                eps0: eps.eps0,
                eps1: eps.eps1,
                period: l,
                energies: sys.energies(),
                norms_minus,
                norms_plus,
                version: VERSION.to_string(),
            },
            columns: COLUMNS
                .iter()
                .zip(cols)
                .map(|(n, values)| Column {
                    name: n.to_string(),
                    values,
                })
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Result<&[f64], ExportError> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| ExportError::MissingColumn(name.to_string()))
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push(Column {
            name: name.to_string(),
            values,
        });
    }

    pub fn column_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        self.columns.iter_mut().find(|c| c.name == name).map(|c| &mut c.values)
    }

    /// Metadata as `# key = value` lines, then a header row and data rows.
    pub fn to_csv(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        let _ = writeln!(out, "# generator = {}", m.generator);
        let _ = writeln!(out, "# eps0 = {}", format_value(m.eps0));
        let _ = writeln!(out, "# eps1 = {}", format_value(m.eps1));
        let _ = writeln!(out, "# period = {}", format_value(m.period));
        let _ = writeln!(out, "# energies = {}", m.energies.map(format_value).join(" "));
        let _ = writeln!(out, "# norms_minus = {}", m.norms_minus.map(format_value).join(" "));
        let _ = writeln!(out, "# norms_plus = {}", m.norms_plus.map(format_value).join(" "));
        let _ = writeln!(out, "# version = {}", m.version);
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push_str("\r\n");
        for r in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|c| format_value(c.values[r])).collect();
            out.push_str(&row.join(","));
            out.push_str("\r\n");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, ExportError> {
        let mut meta = ExportMeta {
            generator: String::new(),
            eps0: f64::NAN,
            eps1: f64::NAN,
            period: f64::NAN,
            energies: [f64::NAN; 3],
            norms_minus: [1.0; 3],
            norms_plus: [1.0; 2],
            version: String::new(),
        };
        let mut columns: Vec<Column> = Vec::new();
        let err = |line: usize, reason: &str| ExportError::Csv {
            line,
            reason: reason.to_string(),
        };
        let num = |s: &str, line: usize| -> Result<f64, ExportError> {
            s.trim().parse::<f64>().map_err(|_| err(line, &format!("not a number: {s:?}")))
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() {
                continue;
            }
            if let Some(kv) = raw.strip_prefix('#') {
                let Some((k, v)) = kv.split_once('=') else { continue };
                let v = v.trim();
                let nums = || -> Result<Vec<f64>, ExportError> { v.split_whitespace().map(|s| num(s, line)).collect() };
                match k.trim() {
                    "generator" => meta.generator = v.to_string(),
                    "version" => meta.version = v.to_string(),
                    "eps0" => meta.eps0 = num(v, line)?,
                    "eps1" => meta.eps1 = num(v, line)?,
                    "period" => meta.period = num(v, line)?,
                    "energies" => {
                        meta.energies = nums()?.try_into().map_err(|_| err(line, "expected three energies"))?
                    }
                    "norms_minus" => {
                        meta.norms_minus = nums()?.try_into().map_err(|_| err(line, "expected three constants"))?
                    }
                    "norms_plus" => {
                        meta.norms_plus = nums()?.try_into().map_err(|_| err(line, "expected two constants"))?
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            if columns.is_empty() {
                columns = fields
                    .iter()
                    .map(|n| Column {
                        name: n.trim().to_string(),
                        values: Vec::new(),
                    })
                    .collect();
                continue;
            }
            if fields.len() != columns.len() {
                return Err(err(line, &format!("expected {} fields, found {}", columns.len(), fields.len())));
            }
            for (c, f) in columns.iter_mut().zip(fields) {
                c.values.push(num(f, line)?);
            }
        }
        if columns.is_empty() {
            return Err(err(0, "no header row"));
        }
        Ok(Self { meta, columns })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ExportError> {
        Ok(serde_json::from_str(text)?)
    }
}
