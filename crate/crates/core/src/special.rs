//! Scalar special functions: the standard normal CDF and quantile, and the
//! gamma CDF, survival function and quantile (shape/rate parametrization).

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const MAX_ITER: usize = 200_000;

/// Standard normal CDF, `Phi(x) = erfc(-x / sqrt 2) / 2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x - LN_SQRT_2PI)
}

/// Inverse of [`normal_cdf`] (Wichura's AS 241, about 1e-16 relative).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain {
            name: "probability",
            value: p,
        });
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let q = p - 0.5;
    if libm::fabs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_812_8e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return Ok(num / den);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let x = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_758_8)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -x } else { x })
}

/// `ln(x / a) - (x / a - 1)`, accurate when `x` is close to `a`.
fn log_ratio_minus_linear(x: f64, a: f64) -> f64 {
    let u = (x - a) / a;
    if libm::fabs(u) < 0.5 {
        // ln(1 + u) - u = -u^2/2 + u^3/3 - ...
        let mut term = u;
        let mut sum = 0.0;
        for k in 2..200 {
            term *= -u;
            let add = term / k as f64;
            sum += add;
            if libm::fabs(add) <= 1e-17 * libm::fabs(sum) {
                break;
            }
        }
        sum
    } else {
        let t = x / a;
        libm::log(t) - (t - 1.0)
    }
}

/// `ln Gamma(a) - [(a - 1/2) ln a - a + ln sqrt(2 pi)]` for `a >= 10`.
fn stirling_error(a: f64) -> f64 {
    let inv = 1.0 / a;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0
        - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))))
}

/// `ln(x^a e^{-x} / Gamma(a))`, computed around the saddle point so that
/// large shapes do not lose digits to cancellation.
fn log_gamma_prefactor(a: f64, x: f64) -> f64 {
    if a < 10.0 {
        a * libm::log(x) - x - libm::lgamma(a)
    } else {
        a * log_ratio_minus_linear(x, a) + 0.5 * libm::log(a) - LN_SQRT_2PI - stirling_error(a)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    // P(a, x) = x^a e^{-x} / Gamma(a + 1) * sum_k x^k / ((a + 1) ... (a + k))
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut denom = a;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    libm::exp(log_gamma_prefactor(a, x)) * sum / a
}

fn upper_fraction(a: f64, x: f64) -> f64 {
    // Modified Lentz evaluation of the continued fraction for Q(a, x).
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if libm::fabs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    libm::exp(log_gamma_prefactor(a, x)) * h
}

fn check_shape_rate(shape: f64, rate: f64) -> Result<()> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::Domain {
            name: "shape",
            value: shape,
        });
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Domain {
            name: "rate",
            value: rate,
        });
    }
    Ok(())
}

/// Regularized lower and upper incomplete gamma functions `(P(a, z), Q(a, z))`.
fn incomplete_gamma(a: f64, z: f64) -> (f64, f64) {
    if z <= 0.0 {
        return (0.0, 1.0);
    }
    if z.is_infinite() {
        return (1.0, 0.0);
    }
    if z < a + 1.0 {
        let p = lower_series(a, z);
        (p, 1.0 - p)
    } else {
        let q = upper_fraction(a, z);
        (1.0 - q, q)
    }
}

/// CDF of the gamma distribution with the given shape and rate.
pub fn gamma_cdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    check_shape_rate(shape, rate)?;
    Ok(incomplete_gamma(shape, x * rate).0)
}

/// Survival function `1 - F(x)` of the gamma distribution.
pub fn gamma_sf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    check_shape_rate(shape, rate)?;
    Ok(incomplete_gamma(shape, x * rate).1)
}

/// Quantile of the gamma distribution: the `x` with `F(x) = p`.
pub fn gamma_quantile(p: f64, shape: f64, rate: f64) -> Result<f64> {
    check_shape_rate(shape, rate)?;
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain {
            name: "probability",
            value: p,
        });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let a = shape;
    // Wilson-Hilferty start, with the small-z series limit as a fallback.
    let zq = normal_quantile(p)?;
    let wh = 1.0 - 1.0 / (9.0 * a) + zq / (3.0 * libm::sqrt(a));
    let mut z = a * wh * wh * wh;
    if !(z > 0.0) {
        z = libm::exp((libm::log(p) + libm::lgamma(a + 1.0)) / a);
    }
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let (lower_p, upper_q) = incomplete_gamma(a, z);
        // residual of the increasing function F(z) - p, evaluated in the
        // better-conditioned tail
        let resid = if upper { target - upper_q } else { lower_p - target };
        if resid > 0.0 {
            hi = hi.min(z);
        } else {
            lo = lo.max(z);
        }
        let density = libm::exp(log_gamma_prefactor(a, z)) / z;
        let mut next = z - resid / density;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * z.max(lo) + 1.0 };
        }
        if libm::fabs(next - z) <= 1e-15 * z {
            z = next;
            break;
        }
        z = next;
    }
    Ok(z / rate)
}
