//! Truncated Laurent series with tracked valuation and precision.
//!
//! `Series { val, c }` represents `sum_i c[i] t^(val + i)`, known exactly
//! through the power `val + c.len() - 1`. Divisions by series whose leading
//! terms cancel shift the valuation instead of blowing up, which is how the
//! removable singularities of the superpotentials get resolved.

use crate::jet::Jet;

/// Coefficients of a sum smaller than this fraction of the summands'
/// magnitudes are treated as exact cancellations.
const CANCEL_REL: f64 = 1e-10;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    val: i32,
    c: Vec<f64>,
}

impl Series {
    pub fn new(val: i32, c: Vec<f64>) -> Self {
        let mut s = Self { val, c };
        s.strip_leading_zeros();
        s
    }

    pub fn from_jet<const N: usize>(j: &Jet<N>) -> Self {
        Self::new(0, j.coeffs().to_vec())
    }

    pub fn constant(v: f64, len: usize) -> Self {
        let mut c = vec![0.0; len.max(1)];
        c[0] = v;
        Self::new(0, c)
    }

    /// Valuation: power of the first nonzero coefficient.
    pub fn valuation(&self) -> i32 {
        self.val
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Number of known coefficients starting at the valuation.
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Coefficient of `t^power` (zero below the valuation).
    pub fn coeff(&self, power: i32) -> f64 {
        let i = power - self.val;
        if i < 0 {
            0.0
        } else {
            self.c.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    /// Exclusive upper end of the known powers.
    pub fn end(&self) -> i32 {
        self.val + self.c.len() as i32
    }

    pub fn leading(&self) -> f64 {
        self.c.first().copied().unwrap_or(0.0)
    }

    fn strip_leading_zeros(&mut self) {
        let k = self.c.iter().take_while(|v| **v == 0.0).count();
        if k > 0 {
            self.c.drain(..k);
            self.val += k as i32;
        }
    }

    /// Zeroes the coefficients of powers below `order` (a zero of known
    /// multiplicity whose low coefficients are only roundoff).
    pub fn force_zero_below(&mut self, order: i32) {
        for (i, c) in self.c.iter_mut().enumerate() {
            if self.val + (i as i32) < order {
                *c = 0.0;
            }
        }
        self.strip_leading_zeros();
    }

    /// Zeroes all odd powers (expansion of an even function).
    pub fn force_even(&mut self) {
        for (i, c) in self.c.iter_mut().enumerate() {
            if (self.val + i as i32) % 2 != 0 {
                *c = 0.0;
            }
        }
        self.strip_leading_zeros();
    }

    /// Flushes leading coefficients that are negligible against the largest
    /// of the first `window` coefficients.
    pub fn flush_small_leading(&mut self, rel: f64, window: usize) {
        let scale = self.c.iter().take(window).fold(0.0f64, |m, v| m.max(v.abs()));
        let mut k = 0;
        while k < self.c.len().min(window) && self.c[k].abs() <= rel * scale {
            k += 1;
        }
        if k > 0 {
            self.c.drain(..k);
            self.val += k as i32;
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Series, sign: f64) -> Series {
        let val = self.val.min(other.val);
        let end = self.end().min(other.end());
        if end <= val {
            return Series { val: end, c: Vec::new() };
        }
        let c = (val..end)
            .map(|p| {
                let a = self.coeff(p);
                let b = sign * other.coeff(p);
                let s = a + b;
                if s.abs() <= CANCEL_REL * (a.abs() + b.abs()) {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        Series::new(val, c)
    }

    pub fn add_scalar(&self, v: f64) -> Series {
        self.add(&Series { val: 0, c: vec![v] }.padded_to(self.end()))
    }

    fn padded_to(mut self, end: i32) -> Series {
        while self.end() < end {
            self.c.push(0.0);
        }
        self
    }

    pub fn scale(&self, s: f64) -> Series {
        Series {
            val: self.val,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: i32) -> Series {
        Series {
            val: self.val + k,
            c: self.c.clone(),
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.c.len().min(other.c.len());
        let c = (0..n)
            .map(|k| (0..=k).map(|j| self.c[j] * other.c[k - j]).sum())
            .collect();
        Series::new(self.val + other.val, c)
    }

    /// Quotient; `None` when the divisor has no known nonzero coefficient.
    pub fn div(&self, other: &Series) -> Option<Series> {
        let b0 = *other.c.first()?;
        if b0 == 0.0 {
            return None;
        }
        let n = self.c.len().min(other.c.len());
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= other.c[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Some(Series::new(self.val - other.val, q))
    }

    /// Square root of a series with even valuation and positive leading
    /// coefficient, taking the branch `t^(val/2) * sqrt(rest)`.
    pub fn sqrt(&self) -> Option<Series> {
        if self.val % 2 != 0 || !(self.leading() > 0.0) {
            return None;
        }
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = self.c[0].sqrt();
        for k in 1..n {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= b[j] * b[k - j];
            }
            b[k] = acc / (2.0 * b[0]);
        }
        Some(Series::new(self.val / 2, b))
    }

    pub fn derivative(&self) -> Series {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, v)| v * (self.val + i as i32) as f64)
            .collect();
        Series::new(self.val - 1, c)
    }

    /// Residue (coefficient of `1/t`) and the antiderivative of the regular
    /// part vanishing at `t = 0`. `None` for poles of order two or more.
    pub fn integrate_split(&self) -> Option<(f64, Series)> {
        if self.val < -1 {
            return None;
        }
        let residue = self.coeff(-1);
        let start = self.val.max(0);
        let end = self.end();
        if end <= start {
            return Some((residue, Series { val: end.max(1), c: Vec::new() }));
        }
        let c: Vec<f64> = (start..end).map(|p| self.coeff(p) / (p + 1) as f64).collect();
        Some((residue, Series::new(start + 1, c)))
    }

    /// `exp` of a series with nonnegative valuation.
    pub fn exp(&self) -> Option<Series> {
        if self.val < 0 {
            return None;
        }
        let n = (self.end()).max(1) as usize;
        let a: Vec<f64> = (0..n as i32).map(|p| self.coeff(p)).collect();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * a[j] * b[k - j];
            }
            b[k] = acc / k as f64;
        }
        Some(Series::new(0, b))
    }

    pub fn truncate(&self, len: usize) -> Series {
        Series {
            val: self.val,
            c: self.c.iter().take(len).copied().collect(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let poly = self.c.iter().rev().fold(0.0, |acc, &v| acc * t + v);
        if self.val == 0 {
            poly
        } else {
            poly * t.powi(self.val)
        }
    }

    /// Re-expands the series as a Taylor jet about the offset `t`
    /// (`t != 0` when the valuation is negative).
    pub fn jet_at<const M: usize>(&self, t: f64) -> Jet<M> {
        let mut out = [0.0; M];
        for (i, &ci) in self.c.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            let p = self.val + i as i32;
            // coefficient j: C(p, j) t^(p - j)
            let mut binom = 1.0;
            for (j, o) in out.iter_mut().enumerate() {
                if j > 0 {
                    binom *= (p - j as i32 + 1) as f64 / j as f64;
                }
                if binom == 0.0 {
                    break;
                }
                let e = p - j as i32;
                let tp = if e == 0 { 1.0 } else { t.powi(e) };
                *o += ci * binom * tp;
            }
        }
        Jet::from_coeffs(out)
    }
}
