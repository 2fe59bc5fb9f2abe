//! Adaptive Gauss-Kronrod (10/21) quadrature for vector-valued integrands.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature on [{a}, {b}] did not converge (error estimate {estimate:e})")]
    NonConvergence { a: f64, b: f64, estimate: f64 },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_DEPTH: u32 = 40;

/// Integral of `f` over `[a, b]` to absolute tolerance `tol` per component.
pub fn integrate<const D: usize, F>(f: &F, a: f64, b: f64, tol: f64) -> Result<[f64; D], QuadratureError>
where
    F: Fn(f64) -> Result<[f64; D], QuadratureError>,
{
    if a == b {
        return Ok([0.0; D]);
    }
    recurse(f, a, b, tol, 0)
}

fn recurse<const D: usize, F>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<[f64; D], QuadratureError>
where
    F: Fn(f64) -> Result<[f64; D], QuadratureError>,
{
    let (k, err) = gk21(f, a, b)?;
    if err <= tol {
        return Ok(k);
    }
    if depth >= MAX_DEPTH || (b - a).abs() < 1e-14 * (a.abs() + b.abs()).max(1.0) {
        return Err(QuadratureError::NonConvergence { a, b, estimate: err });
    }
    let m = 0.5 * (a + b);
    let l = recurse(f, a, m, 0.5 * tol, depth + 1)?;
    let r = recurse(f, m, b, 0.5 * tol, depth + 1)?;
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = l[i] + r[i];
    }
    Ok(out)
}

fn gk21<const D: usize, F>(f: &F, a: f64, b: f64) -> Result<([f64; D], f64), QuadratureError>
where
    F: Fn(f64) -> Result<[f64; D], QuadratureError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; D];
    let mut gauss = [0.0; D];
    let mut add = |x: f64, wk: f64, wg: f64| -> Result<(), QuadratureError> {
        let v = f(x)?;
        for i in 0..D {
            if !v[i].is_finite() {
                return Err(QuadratureError::NonFinite(x));
            }
            kron[i] += wk * v[i];
            gauss[i] += wg * v[i];
        }
        Ok(())
    };
    add(c, WGK[10], 0.0)?;
    for j in 0..10 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        add(c - h * XGK[j], WGK[j], wg)?;
        add(c + h * XGK[j], WGK[j], wg)?;
    }
    let mut err: f64 = 0.0;
    for i in 0..D {
        kron[i] *= h;
        gauss[i] *= h;
        err = err.max((kron[i] - gauss[i]).abs());
    }
    Ok((kron, err))
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let g = |x: f64| Ok([f(x)]);
    integrate(&g, a, b, tol).map(|v| v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_scalar(|x| 3.0 * x * x - x + 1.0, -1.0, 2.0, 1e-14).unwrap();
        assert!((v - (9.0 - 1.5 + 3.0)).abs() < 1e-13);
    }

    #[test]
    fn periodic_and_peaked() {
        let v = integrate_scalar(|x| 1.0 / (1.0 + 100.0 * x * x), -1.0, 1.0, 1e-13).unwrap();
        let want = 2.0 * (10.0f64).atan() / 10.0;
        assert!((v - want).abs() < 1e-12);
        let v = integrate_scalar(|x| x.sin().exp(), 0.0, std::f64::consts::TAU, 1e-13).unwrap();
        // 2 pi I0(1)
        assert!((v - 7.954_926_521_012_845).abs() < 1e-11);
    }

    #[test]
    fn empty_interval_and_reversed() {
        assert_eq!(integrate_scalar(|x| x, 1.0, 1.0, 1e-12).unwrap(), 0.0);
        let v = integrate_scalar(|x| x, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_integrable_singularity_fails() {
        let r = integrate_scalar(|x| 1.0 / x.abs().sqrt().powi(3), -1.0, 1.0, 1e-10);
        assert!(r.is_err());
    }
}
