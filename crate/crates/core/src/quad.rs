//! Adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! Intervals crossing the origin are split there first, so no panel ever
//! straddles the singular point of a germ.

use std::fmt::Display;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        QuadTolerance {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand failed at {x}: {message}")]
    Integrand { x: f64, message: String },
    #[error("integrand is not finite at {x}")]
    NonFinite { x: f64 },
    #[error("quadrature did not converge: estimate {value} with error {error} after {intervals} intervals")]
    NotConverged {
        value: f64,
        error: f64,
        intervals: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
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

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn sample<F, E>(f: &mut F, x: f64) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: Display,
{
    match f(x) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(QuadError::NonFinite { x }),
        Err(e) => Err(QuadError::Integrand {
            x,
            message: e.to_string(),
        }),
    }
}

fn gk21<F, E>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: Display,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = sample(f, center)?;
    let mut res_k = WGK[10] * f_center;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = sample(f, center - dx)?;
        let f2 = sample(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel {
        a,
        b,
        value: res_k * half,
        error,
    })
}

/// Integrates `f` over `[a, b]` (either orientation) to the requested tolerance.
pub fn integrate<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    tol: QuadTolerance,
) -> Result<Quadrature, QuadError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: Display,
{
    if a < 0.0 && b > 0.0 || a > 0.0 && b < 0.0 {
        let left = adaptive(&mut f, a, 0.0, tol)?;
        let right = adaptive(&mut f, 0.0, b, tol)?;
        return Ok(Quadrature {
            value: left.value + right.value,
            error: left.error + right.error,
        });
    }
    adaptive(&mut f, a, b, tol)
}

fn adaptive<F, E>(f: &mut F, a: f64, b: f64, tol: QuadTolerance) -> Result<Quadrature, QuadError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: Display,
{
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut panels = vec![gk21(f, a, b)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        if panels.len() >= tol.max_intervals {
            return Err(QuadError::NotConverged {
                value,
                error,
                intervals: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let Panel { a: pa, b: pb, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid == pa || mid == pb {
            // Interval exhausted at machine precision: accept what we have.
            return Ok(Quadrature { value, error });
        }
        panels.push(gk21(f, pa, mid)?);
        panels.push(gk21(f, mid, pb)?);
    }
}
