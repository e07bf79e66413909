//! Standard-normal primitives.
//!
//! Everything here is for the standard law `N(0, 1)`. A centered Gaussian of
//! variance `σ²` is handled at call sites as `σ · Y`; `σ² = 0` is the Dirac
//! mass at zero.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{domain, Error, Result};

/// `√(2π)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Smallest positive subnormal double; lower-tail floor for finite arguments.
const TAIL_FLOOR: f64 = 4.940_656_458_412_465_4e-324;

/// A centered normal law `N(0, σ²)`; `variance = 0` is `δ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLaw {
    pub variance: f64,
}

impl GaussianLaw {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "gaussian variance must be finite and nonnegative, got {variance}"
            )));
        }
        Ok(Self { variance })
    }

    pub fn standard() -> Self {
        Self { variance: 1.0 }
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn is_dirac(&self) -> bool {
        self.variance == 0.0
    }

    /// Left-continuous quantile `σ Φ^{-1}(u)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if self.is_dirac() {
            if !(u > 0.0 && u < 1.0) {
                return domain(format!("quantile level must lie in (0,1), got {u}"));
            }
            return Ok(0.0);
        }
        Ok(self.sd() * normal_quantile(u)?)
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal distribution function `Φ(x)`.
///
/// The lower tail never returns exactly zero for a finite argument: below the
/// double-precision range it saturates at the smallest positive subnormal, so
/// `Φ` stays strictly positive and nondecreasing. The upper tail saturates at 1.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).max(TAIL_FLOOR)
    } else {
        1.0 - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Upper tail `H(x) = 1 − Φ(x)`, accurate in relative terms for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    if x > 0.0 {
        if x == f64::INFINITY {
            return 0.0;
        }
        (0.5 * libm::erfc(x * FRAC_1_SQRT_2)).max(TAIL_FLOOR)
    } else {
        1.0 - 0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    }
}

/// Mills ratio `H(x)/φ(x) = √(2π) e^{x²/2} H(x)` for `x ≥ 0`.
///
/// Direct quotient below 5; above, a backward-evaluated continued fraction
/// `1/(x + 1/(x + 2/(x + …)))`, which never forms `e^{x²/2}`.
pub fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 5.0 {
        return normal_sf(x) / normal_pdf(x);
    }
    let mut t = x;
    for k in (1..=400).rev() {
        t = x + k as f64 / t;
    }
    1.0 / t
}

/// Generalized inverse `Φ^{-1}(u)`.
///
/// Acklam's rational approximation followed by two Newton steps on `Φ`, always
/// working in the tail that contains `u` so that `1 − u` is never formed for
/// small `u`.
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("normal quantile needs u in (0,1), got {u}"));
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    if u > 0.5 {
        // 1 - u is exact here (Sterbenz).
        return Ok(-lower_quantile(1.0 - u));
    }
    Ok(lower_quantile(u))
}

fn lower_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let dens = normal_pdf(x);
        if dens == 0.0 {
            break;
        }
        x -= (normal_cdf(x) - u) / dens;
    }
    x
}

/// Superquantile `Q_{1,Y}(u) = u^{-1} ∫₀ᵘ Q_Y(t) dt` of a standard normal,
/// where `Q_Y` is the inverse of `1 − Φ`. Closed form `φ(Q_Y(u)) / u`.
pub fn superquantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return domain(format!("superquantile needs u in (0,1], got {u}"));
    }
    if u == 1.0 {
        return Ok(0.0);
    }
    // Q_Y(u) = -Φ^{-1}(u); φ is even.
    let q = normal_quantile(u)?;
    Ok(normal_pdf(q) / u)
}

/// `√(2π) e^{x²/2} H(x) / (√(2+x²) − x)`, bounded by one (Komatu).
pub fn komatu_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    // 1/(√(2+x²) − x) = (√(2+x²) + x)/2
    mills_ratio(x) * ((2.0 + x * x).sqrt() + x) / 2.0
}

/// `∫ₐᵇ Φ^{-1}(u) du = φ(Φ^{-1}(a)) − φ(Φ^{-1}(b))` for `0 ≤ a ≤ b ≤ 1`.
pub fn quantile_integral(a: f64, b: f64) -> Result<f64> {
    check_unit_interval(a, b)?;
    Ok(pdf_at_level(a)? - pdf_at_level(b)?)
}

/// `∫ₐᵇ Φ^{-1}(u)² du = [Φ(x) − xφ(x)]` between `Φ^{-1}(a)` and `Φ^{-1}(b)`.
pub fn quantile_square_integral(a: f64, b: f64) -> Result<f64> {
    check_unit_interval(a, b)?;
    let xa = level_to_x(a)?;
    let xb = level_to_x(b)?;
    Ok((b - a) - (x_pdf(xb) - x_pdf(xa)))
}

fn check_unit_interval(a: f64, b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return domain(format!("need 0 <= a <= b <= 1, got a={a}, b={b}"));
    }
    Ok(())
}

fn level_to_x(u: f64) -> Result<f64> {
    if u == 0.0 {
        Ok(f64::NEG_INFINITY)
    } else if u == 1.0 {
        Ok(f64::INFINITY)
    } else {
        normal_quantile(u)
    }
}

fn pdf_at_level(u: f64) -> Result<f64> {
    if u == 0.0 || u == 1.0 {
        return Ok(0.0);
    }
    Ok(normal_pdf(normal_quantile(u)?))
}

/// `x φ(x)` with the limits at ±∞ set to zero.
pub(crate) fn x_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x * normal_pdf(x)
    }
}

/// `φ(x)` with `φ(±∞) = 0`.
pub(crate) fn pdf_ext(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        normal_pdf(x)
    }
}
