//! Transport costs through generalized inverses.
//!
//! In one dimension `W_p(μ, ν)^p = ∫₀¹ |F^{-1}(u) − G^{-1}(u)|^p du`. For two
//! discrete laws both quantile functions are step functions and the integral
//! is a finite sum over the merged breakpoints. Against a Gaussian the
//! integral over each step has a closed form in `Φ`, `φ` and the partial
//! Gaussian moments, so no quadrature is ever needed.

use crate::error::{domain, Error, Result};
use crate::gaussian::{normal_cdf, normal_quantile, normal_sf, pdf_ext, GaussianLaw};
use crate::numeric::NeumaierSum;

use super::dist::{Atoms, EmpiricalDist};

/// `W_p` between two empirical laws, exact on the merged grid
/// `{i/m_a} ∪ {j/m_b}` (computed in integer arithmetic).
pub fn wp_empirical(a: &EmpiricalDist, b: &EmpiricalDist, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("W_p needs finite p >= 1, got {p}"));
    }
    let (xa, xb) = (a.samples(), b.samples());
    let (ma, mb) = (xa.len() as u64, xb.len() as u64);
    // breakpoints of a sit at i*mb, of b at j*ma, in units of 1/(ma*mb)
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos = 0u64;
    let mut cost = NeumaierSum::default();
    while i < xa.len() && j < xb.len() {
        let next_a = (i as u64 + 1) * mb;
        let next_b = (j as u64 + 1) * ma;
        let next = next_a.min(next_b);
        let len = (next - pos) as f64;
        let d = (xa[i] - xb[j]).abs();
        if d > 0.0 {
            cost.add(len * pow_abs(d, p));
        }
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    let total = cost.value() / (ma as f64 * mb as f64);
    Ok(total.max(0.0).powf(1.0 / p))
}

/// `W₂²` between two finitely supported laws given as sorted `(value, mass)` atoms.
pub fn w2_sq_discrete(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    wp_pow_discrete(a, b, 2.0)
}

/// `W_p^p` between two finitely supported laws; masses consumed greedily in
/// quantile order.
pub fn wp_pow_discrete(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidDistribution("empty law".into()));
    }
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut cost = NeumaierSum::default();
    loop {
        let w = ra.min(rb);
        let d = (a[i].0 - b[j].0).abs();
        if d > 0.0 && w > 0.0 {
            cost.add(w * pow_abs(d, p));
        }
        ra -= w;
        rb -= w;
        let adv_a = ra <= 0.0;
        let adv_b = rb <= 0.0;
        if adv_a {
            i += 1;
        }
        if adv_b {
            j += 1;
        }
        if i >= a.len() || j >= b.len() {
            break;
        }
        if adv_a {
            ra = a[i].1;
        }
        if adv_b {
            rb = b[j].1;
        }
    }
    Ok(cost.value().max(0.0))
}

/// `W₂(a, N(0, σ²))` via per-interval closed forms.
pub fn w2_empirical_gaussian(a: &EmpiricalDist, sigma2: f64) -> Result<f64> {
    let g = GaussianLaw::new(sigma2)?;
    Ok(gaussian_cost(&a.atoms(), g.sd(), 2)?.sqrt())
}

/// `W₂(d, N(0, σ²))` for any law exposing sorted atoms (lattice or empirical).
pub fn w2_lattice_gaussian(d: &impl Atoms, sigma2: f64) -> Result<f64> {
    Ok(w2_sq_gaussian(d, sigma2)?.sqrt())
}

/// `W₂²(d, N(0, σ²))`.
pub fn w2_sq_gaussian(d: &impl Atoms, sigma2: f64) -> Result<f64> {
    let g = GaussianLaw::new(sigma2)?;
    gaussian_cost(&d.atoms(), g.sd(), 2)
}

/// `∫₀¹ |F^{-1}(u) − σ Φ^{-1}(u)|^p du` for sorted atoms with total mass one.
///
/// Interval endpoints are placed at `Φ^{-1}` of the cumulative masses; levels
/// above one half are taken from suffix sums so that upper-tail breakpoints
/// keep full relative precision.
pub fn gaussian_cost(atoms: &[(f64, f64)], sigma: f64, p: u32) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::InvalidDistribution("empty law".into()));
    }
    if p == 0 {
        return domain("transport exponent must be >= 1");
    }
    if sigma == 0.0 {
        let mut s = NeumaierSum::default();
        for &(x, w) in atoms {
            s.add(w * x.abs().powi(p as i32));
        }
        return Ok(s.value());
    }
    let edges = breakpoints(atoms)?;
    let mut total = NeumaierSum::default();
    for (k, &(x, w)) in atoms.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let piece = abs_moment(edges[k], edges[k + 1], x / sigma, w, p);
        total.add(piece * sigma.powi(p as i32));
    }
    Ok(total.value().max(0.0))
}

/// `z_k = Φ^{-1}(F(x_k−))`, `k = 0..=n`, with `z_0 = −∞` and `z_n = +∞`.
pub(crate) fn breakpoints(atoms: &[(f64, f64)]) -> Result<Vec<f64>> {
    let n = atoms.len();
    let mut lower = Vec::with_capacity(n + 1);
    let mut acc = NeumaierSum::default();
    lower.push(0.0);
    for &(_, w) in atoms {
        acc.add(w);
        lower.push(acc.value());
    }
    let mut upper = vec![0.0; n + 1];
    let mut acc = NeumaierSum::default();
    for k in (0..n).rev() {
        acc.add(atoms[k].1);
        upper[k] = acc.value();
    }
    let total = lower[n];
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("masses sum to {total}, expected 1")));
    }
    let mut z = Vec::with_capacity(n + 1);
    z.push(f64::NEG_INFINITY);
    for k in 1..n {
        let (lo, up) = (lower[k] / total, upper[k] / total);
        let zk = if lo <= 0.0 {
            f64::NEG_INFINITY
        } else if up <= 0.0 {
            f64::INFINITY
        } else if lo <= 0.5 {
            normal_quantile(lo)?
        } else {
            -normal_quantile(up)?
        };
        z.push(zk);
    }
    z.push(f64::INFINITY);
    Ok(z)
}

/// `∫_{lo}^{hi} |x − t|^p φ(x) dx` where `mass = Φ(hi) − Φ(lo)`.
fn abs_moment(lo: f64, hi: f64, t: f64, mass: f64, p: u32) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if p.is_multiple_of(2) {
        return centered_moment(lo, hi, t, mass, p);
    }
    if t <= lo {
        centered_moment(lo, hi, t, mass, p)
    } else if t >= hi {
        -centered_moment(lo, hi, t, mass, p)
    } else {
        let below = gauss_mass(lo, t);
        let above = gauss_mass(t, hi);
        -centered_moment(lo, t, t, below, p) + centered_moment(t, hi, t, above, p)
    }
}

/// `Φ(hi) − Φ(lo)` computed in whichever tail is more accurate.
fn gauss_mass(lo: f64, hi: f64) -> f64 {
    if hi <= 0.0 {
        normal_cdf(hi) - normal_cdf(lo)
    } else if lo >= 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else {
        1.0 - normal_cdf(lo) - normal_sf(hi)
    }
}

/// `J_k = ∫_{lo}^{hi} (x − t)^k φ(x) dx` via
/// `J_k = (k−1) J_{k−2} − t J_{k−1} − [(x−t)^{k−1} φ(x)]_{lo}^{hi}`.
fn centered_moment(lo: f64, hi: f64, t: f64, mass: f64, p: u32) -> f64 {
    let (phi_lo, phi_hi) = (pdf_ext(lo), pdf_ext(hi));
    let bracket = |k: u32| -> f64 {
        // [(x - t)^{k-1} φ(x)] between lo and hi; infinite ends vanish
        let term = |x: f64, phi: f64| if x.is_infinite() { 0.0 } else { (x - t).powi(k as i32 - 1) * phi };
        term(hi, phi_hi) - term(lo, phi_lo)
    };
    let mut j_prev = mass; // J_0
    let mut j_cur = -t * mass - bracket(1); // J_1
    if p == 1 {
        return j_cur;
    }
    for k in 2..=p {
        let next = (k as f64 - 1.0) * j_prev - t * j_cur - bracket(k);
        j_prev = j_cur;
        j_cur = next;
    }
    j_cur
}

#[inline]
fn pow_abs(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}
