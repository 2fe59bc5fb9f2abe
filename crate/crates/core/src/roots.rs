//! Zero location on one period: sign-change bisection on a uniform scan plus
//! refinement of touching (even-order) zeros from local minima of `|f|`.

use crate::jet::Jet;

/// Sampled function returning value, first and second Taylor coefficients.
pub trait Sampled {
    fn jet(&self, x: f64) -> Option<Jet<3>>;

    fn value(&self, x: f64) -> Option<f64> {
        self.jet(x).map(|j| j.value())
    }
}

impl<F: Fn(f64) -> Option<Jet<3>>> Sampled for F {
    fn jet(&self, x: f64) -> Option<Jet<3>> {
        self(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroKind {
    /// `f` changes sign.
    Crossing,
    /// `f` touches zero without a sign change.
    Touching,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub x: f64,
    pub kind: ZeroKind,
}

/// Zeros of `f` on `[0, period)`. Touching zeros are accepted where a local
/// minimum of `|f|` on the scan refines to a point with `|f| <= touch_tol`.
pub fn find_zeros(f: &impl Sampled, period: f64, samples: usize, touch_tol: f64) -> Vec<Zero> {
    let n = samples.max(8);
    let h = period / n as f64;
    let xs: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f.value(x).unwrap_or(f64::NAN)).collect();
    let mut out = Vec::new();

    for k in 0..n {
        let (fa, fb) = (vals[k], vals[k + 1]);
        if fa == 0.0 {
            out.push(Zero { x: xs[k], kind: ZeroKind::Crossing });
        } else if fa * fb < 0.0 {
            out.push(Zero {
                x: bisect(f, xs[k], xs[k + 1], fa),
                kind: ZeroKind::Crossing,
            });
        }
    }

    for k in 0..n {
        let prev = vals[(k + n - 1) % n];
        let next = vals[k + 1];
        let cur = vals[k];
        if !(cur.abs() <= prev.abs() && cur.abs() <= next.abs()) || cur == 0.0 {
            continue;
        }
        if cur * prev < 0.0 || cur * next < 0.0 {
            continue;
        }
        if let Some(x) = refine_touching(f, xs[k], h) {
            if f.value(x).is_some_and(|v| v.abs() <= touch_tol) {
                out.push(Zero { x, kind: ZeroKind::Touching });
            }
        }
    }

    let mut out: Vec<Zero> = out
        .into_iter()
        .map(|z| Zero { x: reduce(z.x, period), ..z })
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    dedupe(out, period, 1e-9 * period)
}

fn bisect(f: &impl Sampled, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f.value(m).unwrap_or(f64::NAN);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Newton iteration on `f'` started from a scan minimum, confined to
/// `[x0 - h, x0 + h]`.
fn refine_touching(f: &impl Sampled, x0: f64, h: f64) -> Option<f64> {
    let (lo, hi) = (x0 - h, x0 + h);
    let mut x = x0;
    let mut best = (x0, f.jet(x0)?.value().abs());
    for _ in 0..60 {
        let j = f.jet(x)?;
        let d1 = j[1];
        let d2 = 2.0 * j[2];
        if d1 == 0.0 || d2 == 0.0 {
            break;
        }
        let step = d1 / d2;
        let next = (x - step).clamp(lo, hi);
        if let Some(v) = f.value(next) {
            if v.abs() < best.1 {
                best = (next, v.abs());
            }
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        x = next;
    }
    Some(best.0)
}

/// Reduces `x` into `[0, period)`, snapping values within roundoff of the
/// period back to zero.
pub fn reduce(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if period - r <= 1e-12 * period {
        0.0
    } else {
        r
    }
}

fn dedupe(sorted: Vec<Zero>, period: f64, tol: f64) -> Vec<Zero> {
    let mut out: Vec<Zero> = Vec::with_capacity(sorted.len());
    for z in sorted {
        match out.last_mut() {
            Some(last) if (z.x - last.x).abs() <= tol => {
                if z.kind == ZeroKind::Crossing {
                    last.kind = ZeroKind::Crossing;
                }
            }
            _ => out.push(z),
        }
    }
    if out.len() > 1 {
        let first = out[0].x;
        let last = out[out.len() - 1].x;
        if first + period - last <= tol {
            out.pop();
        }
    }
    out
}

/// Cyclic distance between two points of the circle of length `period`.
pub fn cyclic_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}
