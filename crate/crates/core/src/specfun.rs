//! Bessel functions of real nonnegative order for real arguments, plus the
//! integral representation of the modified function used by the wave
//! construction.
//!
//! Evaluation strategy for `J_nu(x)`:
//!
//! * ascending power series for `x < max(12, 2 nu)`, provided the predicted
//!   cancellation stays within tolerance (the rounding error of the
//!   alternating series is `eps * I_nu(x)`, so the series is accepted only
//!   while a cheap overestimate of `ln I_nu(x)` stays small);
//! * the large-argument cosine expansion
//!   `sqrt(2/(pi x)) (cos(w) P - sin(w) Q)`, `w = x - nu pi/2 - pi/4`, for
//!   `x >= max(12, 2 nu)`, truncated at its smallest term;
//! * otherwise backward recurrence seeded above the turning point and
//!   normalized with the Neumann series `(x/2)^mu = sum_k (mu+2k)
//!   Gamma(mu+k)/k! J_{mu+2k}(x)`. This covers large orders near and above
//!   the argument, where neither expansion holds double-precision tolerance.
//!
//! `I_nu(x)` uses the (all-positive, cancellation-free) ascending series below
//! the same crossover and the large-argument expansion above it.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::quad;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecFunError {
    #[error("series for nu={nu}, x={x} did not converge in {max_terms} terms")]
    NonConvergence { nu: f64, x: f64, max_terms: usize },
    #[error("quadrature failure: {reason}")]
    QuadratureFailure { reason: String },
    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },
}

impl From<quad::QuadError> for SpecFunError {
    fn from(e: quad::QuadError) -> Self {
        SpecFunError::QuadratureFailure {
            reason: e.to_string(),
        }
    }
}

/// Truncation control for the power-series and asymptotic branches.
#[derive(Debug, Clone, Copy)]
pub struct SeriesConfig {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            abs_tol: 1e-14,
            max_terms: 200,
        }
    }
}

impl SeriesConfig {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self, SpecFunError> {
        if !(abs_tol > 0.0) || max_terms == 0 {
            return Err(SpecFunError::InvalidArgument {
                reason: format!(
                    "abs_tol must be > 0 and max_terms >= 1, got ({abs_tol}, {max_terms})"
                ),
            });
        }
        Ok(SeriesConfig { abs_tol, max_terms })
    }
}

/// Nonnegative real order. Negative orders are mapped to nonnegative ones by
/// the callers (the wave construction uses absolute-value orders throughout).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, SpecFunError> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(SpecFunError::InvalidArgument {
                reason: format!("order must be finite and nonnegative, got {nu}"),
            });
        }
        Ok(BesselOrder(nu))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos approximation, relative error
/// below 1e-13 on the range used here).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut t = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            t += c / (x + i as f64);
        }
        let w = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * t
    }
}

/// Natural log of Gamma for x > 0; stays finite where `gamma` would overflow.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return gamma(x).ln();
    }
    let x = x - 1.0;
    let mut t = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        t += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * w.ln() - w + t.ln()
}

/// Cheap overestimate of ln I_nu(x), used to predict the cancellation of the
/// alternating J series: its rounding error is about eps * I_nu(x).
fn ln_series_magnitude(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let peak = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0) + x * x / (4.0 * (nu + 1.0));
    peak.min(x)
}

// Largest tolerable ln of the series magnitude: eps * e^12.9 ~ 9e-11.
const SERIES_SAFE_LN: f64 = 12.9;

fn series_j(nu: f64, x: f64, cfg: &SeriesConfig) -> Result<f64, SpecFunError> {
    let half = 0.5 * x;
    let mut term = if nu < 150.0 {
        half.powf(nu) / gamma(nu + 1.0)
    } else {
        let ln_t = nu * half.ln() - ln_gamma(nu + 1.0);
        if ln_t < -745.0 {
            return Ok(0.0);
        }
        ln_t.exp()
    };
    let q = half * half;
    let mut sum = term;
    for k in 0..cfg.max_terms {
        let kf = (k + 1) as f64;
        term *= -q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 0.01 * cfg.abs_tol && k >= 2 {
            return Ok(sum);
        }
    }
    Err(SpecFunError::NonConvergence {
        nu,
        x,
        max_terms: cfg.max_terms,
    })
}

fn series_i(nu: f64, x: f64, cfg: &SeriesConfig) -> Result<f64, SpecFunError> {
    let half = 0.5 * x;
    let mut term = if nu < 150.0 {
        half.powf(nu) / gamma(nu + 1.0)
    } else {
        let ln_t = nu * half.ln() - ln_gamma(nu + 1.0);
        if ln_t < -745.0 {
            return Ok(0.0);
        }
        ln_t.exp()
    };
    let q = half * half;
    let mut sum = term;
    for k in 0..cfg.max_terms {
        let kf = (k + 1) as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term < 1e-3 * cfg.abs_tol.max(f64::EPSILON * sum) && k >= 2 {
            return Ok(sum);
        }
    }
    Err(SpecFunError::NonConvergence {
        nu,
        x,
        max_terms: cfg.max_terms,
    })
}

// The asymptotic expansions are truncated at their smallest term; below this
// floor they are treated as converged even if the formal tolerance is
// tighter.
const ASYMPTOTIC_FLOOR: f64 = 1e-11;

/// Large-argument expansion of J. Returns None when the smallest term exceeds
/// the tolerance (expansion unusable at this order/argument).
fn asymptotic_j(nu: f64, x: f64, cfg: &SeriesConfig) -> Option<f64> {
    let mu4 = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = (mu4 - 1.0) / (8.0 * x);
    let mut term = q;
    let mut min_term = term.abs().max(f64::EPSILON);
    let mut k = 1usize;
    loop {
        let prev = term.abs();
        let odd = (2 * k - 1) as f64;
        term *= (mu4 - (odd + 2.0) * (odd + 2.0)) / (8.0 * x * (k as f64 + 1.0));
        k += 1;
        if term.abs() >= prev || k > cfg.max_terms {
            break;
        }
        min_term = term.abs();
        // terms alternate in blocks of two between P and Q
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if k.is_multiple_of(2) {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 0.01 * cfg.abs_tol.max(ASYMPTOTIC_FLOOR) {
            break;
        }
    }
    let scale = (2.0 / (PI * x)).sqrt();
    if min_term * scale > cfg.abs_tol.max(ASYMPTOTIC_FLOOR) {
        return None;
    }
    let w = x - (0.5 * nu + 0.25) * PI;
    Some(scale * (w.cos() * p - w.sin() * q))
}

fn asymptotic_i(nu: f64, x: f64, cfg: &SeriesConfig) -> Option<f64> {
    let mu4 = 4.0 * nu * nu;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut min_rel = 1.0;
    for k in 1..=cfg.max_terms {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu4 - odd * odd) / (8.0 * x * k as f64);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += if k % 2 == 0 { term } else { -term };
        min_rel = term.abs();
        if term.abs() < 1e-3 * ASYMPTOTIC_FLOOR {
            break;
        }
    }
    // The all-positive series is available at any argument, so the expansion
    // only has to beat it comfortably.
    if min_rel > (0.1 * ASYMPTOTIC_FLOOR).max(cfg.abs_tol) {
        return None;
    }
    if x > 705.0 {
        return None; // e^x overflows
    }
    Some(x.exp() / (2.0 * PI * x).sqrt() * sum)
}

/// Backward (Miller) recurrence normalized with the Neumann series. Computes
/// J at orders `mu + n` for every requested integer offset `n`; `mu` in
/// [0, 1). Stable for every order once the start index clears both the target
/// order and the turning point `n ~ x`.
fn miller_j_offsets(mu: f64, x: f64, offsets: &[usize]) -> Vec<f64> {
    debug_assert!((0.0..1.0).contains(&mu));
    debug_assert!(x > 0.0);
    let max_off = offsets.iter().copied().max().unwrap_or(0);
    let pad = (14.0 * x.cbrt()).ceil() as usize + 20;
    let start = max_off.max(x.ceil() as usize) + pad;

    let mut wanted: Vec<(usize, usize)> = offsets
        .iter()
        .copied()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    wanted.sort_unstable();
    let mut out = vec![0.0; offsets.len()];

    // Neumann-series weights (mu + 2k) Gamma(mu + k)/k!, built by upward
    // recurrence on the ratio g_k = Gamma(mu + k)/k!.
    let gamma_mu1 = gamma(mu + 1.0);
    let n_even = start / 2 + 1;
    let mut weights = vec![0.0; n_even];
    weights[0] = gamma_mu1;
    let mut g = gamma_mu1; // g_1
    for (k, w) in weights.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        *w = (mu + 2.0 * kf) * g;
        g *= (mu + kf) / (kf + 1.0);
    }

    let mut f_next = 0.0_f64; // f_{n+1}
    let mut f_cur = 1e-300_f64; // f_n at n = start
    let mut norm = 0.0_f64;
    let mut widx = wanted.len();

    for n in (0..=start).rev() {
        while widx > 0 && wanted[widx - 1].0 == n {
            widx -= 1;
            out[wanted[widx].1] = f_cur;
        }
        if n % 2 == 0 {
            norm += weights[n / 2] * f_cur;
        }
        if n > 0 {
            let f_prev = 2.0 * (mu + n as f64) / x * f_cur - f_next;
            f_next = f_cur;
            f_cur = f_prev;
            if f_cur.abs() > 1e250 {
                let s = 1e-250;
                f_cur *= s;
                f_next *= s;
                norm *= s;
                for v in out.iter_mut() {
                    *v *= s;
                }
            }
        }
    }
    let scale = (0.5 * x).powf(mu) / norm;
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

fn miller_j(nu: f64, x: f64) -> f64 {
    let n = nu.floor() as usize;
    let mu = nu - n as f64;
    miller_j_offsets(mu, x, &[n])[0]
}

/// Bessel function of the first kind, real order `nu >= 0`, argument `x >= 0`.
pub fn bessel_j(nu: BesselOrder, x: f64, cfg: &SeriesConfig) -> Result<f64, SpecFunError> {
    let nu = nu.get();
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::InvalidArgument {
            reason: format!("argument must be finite and nonnegative, got {x}"),
        });
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let crossover = 12.0_f64.max(2.0 * nu);
    if x < crossover {
        if ln_series_magnitude(nu, x) <= SERIES_SAFE_LN {
            return series_j(nu, x, cfg);
        }
        return Ok(miller_j(nu, x));
    }
    if let Some(v) = asymptotic_j(nu, x, cfg) {
        return Ok(v);
    }
    Ok(miller_j(nu, x))
}

/// Modified Bessel function of the first kind, real order `nu >= 0`,
/// argument `x >= 0`.
pub fn bessel_i(nu: BesselOrder, x: f64, cfg: &SeriesConfig) -> Result<f64, SpecFunError> {
    let nu = nu.get();
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::InvalidArgument {
            reason: format!("argument must be finite and nonnegative, got {x}"),
        });
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x >= 12.0_f64.max(2.0 * nu) {
        if let Some(v) = asymptotic_i(nu, x, cfg) {
            return Ok(v);
        }
    }
    series_i(nu, x, cfg)
}

/// Batched J at a common argument. Orders sharing a fractional part (within
/// 1e-10) are served by a single backward-recurrence chain, which is what
/// makes large partial-wave sums affordable: the orders q(l + beta) form a
/// handful of unit-spaced families whenever q is a small rational.
pub(crate) fn bessel_j_many(orders: &[f64], x: f64) -> Vec<f64> {
    let cfg = SeriesConfig::default();
    let mut out = vec![0.0; orders.len()];
    if x < 12.0 {
        for (i, &nu) in orders.iter().enumerate() {
            out[i] = bessel_j(BesselOrder(nu), x, &cfg).unwrap_or(0.0);
        }
        return out;
    }
    // group by fractional part
    let mut groups: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    'next: for (i, &nu) in orders.iter().enumerate() {
        let n = nu.floor() as usize;
        let mu = nu - n as f64;
        for (mu_rep, members) in groups.iter_mut() {
            if (mu - *mu_rep).abs() < 1e-10 {
                members.push((i, n));
                continue 'next;
            }
        }
        groups.push((mu, vec![(i, n)]));
    }
    for (mu_rep, members) in groups {
        let offs: Vec<usize> = members.iter().map(|&(_, n)| n).collect();
        let vals = miller_j_offsets(mu_rep, x, &offs);
        for (&(i, _), v) in members.iter().zip(vals.iter()) {
            out[i] = *v;
        }
    }
    out
}

/// Integral representation of the modified Bessel function:
///
/// `I_eps(z) = (1/pi) Int_0^pi cos(eps y) e^{z cos y} dy
///             - (sin(pi eps)/pi) Int_0^inf e^{-z cosh y - eps y} dy`
///
/// Evaluated by adaptive quadrature. The infinite integral requires
/// `Re z > 0` (or a vanishing `sin(pi eps)` coefficient); purely oscillatory
/// arguments (`Re z = 0`, `Im z != 0`) are rejected here — the wave
/// construction that needs them supplies its own damped contour.
pub fn bessel_i_integral(eps: f64, z: Complex64, quad_tol: f64) -> Result<Complex64, SpecFunError> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(SpecFunError::InvalidArgument {
            reason: format!("eps must be finite and nonnegative, got {eps}"),
        });
    }
    if !(quad_tol > 0.0) {
        return Err(SpecFunError::InvalidArgument {
            reason: "quad_tol must be positive".into(),
        });
    }

    let finite = quad::integrate(
        |y| ((z * y.cos()).exp()) * (eps * y).cos(),
        0.0,
        PI,
        0.01 * quad_tol,
        0.01 * quad_tol,
        4000,
    )? / PI;

    let sin_pi_eps = (PI * eps).sin();
    if sin_pi_eps.abs() < 1e-14 {
        return Ok(finite);
    }
    if z.norm() == 0.0 {
        // integrand reduces to e^{-eps y}
        return Ok(finite - Complex64::new(sin_pi_eps / (PI * eps), 0.0));
    }
    if z.re <= 0.0 {
        return Err(SpecFunError::QuadratureFailure {
            reason: format!(
                "infinite integral needs Re z > 0 (or integer eps), got z = {z}, eps = {eps}"
            ),
        });
    }

    // Panel-by-panel until the tail is negligible relative to the partial
    // value.
    let mut tail = Complex64::new(0.0, 0.0);
    let mut y0 = 0.0;
    let mut converged = false;
    for _ in 0..80 {
        let y1 = y0 + 1.0;
        let panel = quad::integrate(
            |y| (-(z * y.cosh()) - Complex64::new(eps * y, 0.0)).exp(),
            y0,
            y1,
            0.01 * quad_tol,
            0.01 * quad_tol,
            2000,
        )?;
        tail += panel;
        y0 = y1;
        if panel.norm() <= 0.5 * quad_tol * tail.norm().max(quad_tol) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::QuadratureFailure {
            reason: format!("tail of the infinite integral did not decay (eps={eps}, z={z})"),
        });
    }
    Ok(finite - tail * (sin_pi_eps / PI))
}
