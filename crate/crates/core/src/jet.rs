//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] holds the normalized Taylor coefficients `c[k] = f^(k)(x0) / k!`
//! of a scalar function at some base point. Arithmetic on jets propagates
//! derivatives exactly up to the truncation order, so everything downstream
//! of the generating function gets its derivatives without finite
//! differences.
//!
//! The default width is seven coefficients (derivatives through order 6).
//! Wider jets are used for the local series around removable singularities.

use std::ops::{Add, AddAssign, Div, Index, Mul, MulAssign, Neg, Sub, SubAssign};

/// Default number of coefficients: value plus derivatives through order 6.
pub const JET_WIDTH: usize = 7;

/// Truncated Taylor series with `N` coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize = JET_WIDTH> {
    c: [f64; N],
}

impl<const N: usize> Default for Jet<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> Jet<N> {
    pub fn from_coeffs(c: [f64; N]) -> Self {
        Self { c }
    }

    pub fn zero() -> Self {
        Self { c: [0.0; N] }
    }

    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        if N > 0 {
            c[0] = v;
        }
        Self { c }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        if N > 0 {
            c[0] = x0;
        }
        if N > 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64; N] {
        &self.c
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [f64; N] {
        &mut self.c
    }

    /// `k`-th derivative at the base point, `k! * c[k]`.
    pub fn derivative_value(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    /// Jet of the derivative. The top coefficient is unknown after
    /// differentiation and is set to zero.
    pub fn derivative(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N.saturating_sub(1) {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Self { c }
    }

    /// Jet of the antiderivative taking the value `at_base` at the base point.
    /// The last input coefficient drops off the end.
    pub fn antiderivative(&self, at_base: f64) -> Self {
        let mut c = [0.0; N];
        if N > 0 {
            c[0] = at_base;
        }
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Self { c }
    }

    /// Evaluates the truncated polynomial at offset `t` from the base point.
    pub fn eval_offset(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= s);
        Self { c }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// Quotient. Returns `None` when the divisor's constant term is zero.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.c[0] == 0.0 {
            return None;
        }
        Some(self.div_unchecked(rhs))
    }

    fn div_unchecked(&self, rhs: &Self) -> Self {
        let mut q = [0.0; N];
        let inv = 1.0 / rhs.c[0];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= rhs.c[j] * q[k - j];
            }
            q[k] = acc * inv;
        }
        Self { c: q }
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0).div_unchecked(self)
    }

    /// Square root. `None` unless the constant term is strictly positive.
    pub fn checked_sqrt(&self) -> Option<Self> {
        if !(self.c[0] > 0.0) {
            return None;
        }
        let mut b = [0.0; N];
        b[0] = self.c[0].sqrt();
        let inv = 0.5 / b[0];
        for k in 1..N {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= b[j] * b[k - j];
            }
            b[k] = acc * inv;
        }
        Some(Self { c: b })
    }

    pub fn exp(&self) -> Self {
        let mut b = [0.0; N];
        b[0] = self.c[0].exp();
        for k in 1..N {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * b[k - j];
            }
            b[k] = acc / k as f64;
        }
        Self { c: b }
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        let (s0, c0) = self.c[0].sin_cos();
        s[0] = s0;
        c[0] = c0;
        for k in 1..N {
            let mut as_ = 0.0;
            let mut ac = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                as_ += ja * c[k - j];
                ac -= ja * s[k - j];
            }
            s[k] = as_ / k as f64;
            c[k] = ac / k as f64;
        }
        (Self { c: s }, Self { c })
    }

    /// Simultaneous hyperbolic sine and cosine.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        s[0] = self.c[0].sinh();
        c[0] = self.c[0].cosh();
        for k in 1..N {
            let mut as_ = 0.0;
            let mut ac = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                as_ += ja * c[k - j];
                ac += ja * s[k - j];
            }
            s[k] = as_ / k as f64;
            c[k] = ac / k as f64;
        }
        (Self { c: s }, Self { c })
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// the reciprocal.
    pub fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// Narrows or widens to `M` coefficients (extra coefficients are zero).
    pub fn resize<const M: usize>(&self) -> Jet<M> {
        let mut c = [0.0; M];
        for (dst, src) in c.iter_mut().zip(self.c.iter()) {
            *dst = *src;
        }
        Jet { c }
    }
}

impl<const N: usize> Index<usize> for Jet<N> {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.c[k]
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const N: usize> SubAssign for Jet<N> {
    fn sub_assign(&mut self, rhs: Self) {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [0.0; N];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.c[j] * rhs.c[k - j];
            }
            *o = acc;
        }
        Self { c: out }
    }
}

impl<const N: usize> MulAssign for Jet<N> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

/// IEEE semantics: a zero constant term in the divisor yields non-finite
/// coefficients. Use [`Jet::checked_div`] where that must be reported.
impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.div_unchecked(&rhs)
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.c[0] -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.scale(1.0 / rhs)
    }
}

impl<const N: usize> Mul<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn mul(self, rhs: Jet<N>) -> Jet<N> {
        rhs.scale(self)
    }
}

impl<const N: usize> Add<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn add(self, rhs: Jet<N>) -> Jet<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn sub(self, rhs: Jet<N>) -> Jet<N> {
        -rhs + self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn sine_maclaurin() {
        let (s, c) = Jet::<7>::variable(0.0).sin_cos();
        let want = [0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0, 0.0];
        for k in 0..7 {
            assert!(close(s[k], want[k], 1e-15), "k={k}");
        }
        assert!(close(c[2], -0.5, 1e-15));
        assert!(close(c[4], 1.0 / 24.0, 1e-15));
    }

    #[test]
    fn exp_of_linear() {
        let e = (Jet::<7>::variable(0.3) * 2.0).exp();
        let mut fact = 1.0;
        for k in 0..7 {
            if k > 0 {
                fact *= k as f64;
            }
            let want = (0.6f64).exp() * 2f64.powi(k as i32) / fact;
            assert!(close(e[k], want, 1e-14), "k={k}");
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Jet::<9>::variable(0.7);
        let (s, c) = x.sin_cos();
        let f = s + x * x;
        let g = c + 3.0;
        let q = (f * g) / g;
        for k in 0..9 {
            assert!(close(q[k], f[k], 1e-13), "k={k}");
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let x = Jet::<7>::variable(1.3);
        let f = x * x + 2.0;
        let r = f.checked_sqrt().unwrap();
        let back = r * r;
        for k in 0..7 {
            assert!(close(back[k], f[k], 1e-14));
        }
        assert!(Jet::<7>::constant(-1.0).checked_sqrt().is_none());
        assert!(Jet::<7>::constant(0.0).checked_sqrt().is_none());
    }

    #[test]
    fn powi_negative_and_positive() {
        let x = Jet::<7>::variable(2.0);
        let p = x.powi(3);
        assert!(close(p[0], 8.0, 1e-15));
        assert!(close(p[1], 12.0, 1e-15));
        assert!(close(p[2], 6.0, 1e-15));
        assert!(close(p[3], 1.0, 1e-15));
        assert!(close(p[4], 0.0, 1e-15));
        let m = x.powi(-2);
        // d/dx x^-2 = -2 x^-3
        assert!(close(m[1], -2.0 / 8.0, 1e-15));
    }

    #[test]
    fn derivative_and_antiderivative_are_inverse_below_top() {
        let x = Jet::<7>::variable(0.4);
        let f = x.sin_cos().0 * x.exp();
        let back = f.derivative().antiderivative(f[0]);
        for k in 0..6 {
            assert!(close(back[k], f[k], 1e-14));
        }
    }

    #[test]
    fn hyperbolic_identity() {
        let x = Jet::<7>::variable(-0.8) * 1.5;
        let (s, c) = x.sinh_cosh();
        let one = c * c - s * s;
        assert!(close(one[0], 1.0, 1e-14));
        for k in 1..7 {
            assert!(one[k].abs() < 1e-12);
        }
    }
}
