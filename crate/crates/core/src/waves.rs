//! Partial-wave field, closed-form incident and scattered waves, scattering
//! amplitudes and cross sections.
//!
//! The field is the phase-shifted partial-wave sum
//!
//! `phi(r, phi) = sum_l exp(i(r dEta_l + delta_top(l) + |nu_{s,1}| pi/2))
//!                J_{q |nu_{s,q}|}(eta_l r) exp(i (l + 1/2) phi)`
//!
//! whose large-distance behaviour splits into an incident wave (a finite sum
//! of plane-wave images on the cone) and an outgoing scattered wave
//! `sqrt(i/r) f e^{i eta r}`. The closed-form amplitude `f` degenerates at
//! the forward directions `dTheta = +-q pi`, where a separately regularized
//! finite expression applies.
//!
//! The scattered wave is also available as a direct numerical quadrature of
//! its integral representation. The integrand oscillates under a Fresnel
//! factor `exp(-i eta r kappa y^2 / 2)`; the integration contour is rotated
//! to the `e^{i pi/4}` ray, where that factor becomes a real Gaussian. The
//! rotation is legitimate because the integrand's poles sit on the imaginary
//! axis and the arc contribution vanishes.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};
use thiserror::Error;

use crate::model::{
    self, angular_order, channel_wavenumber, min_propagating_l, topological_shift, DerivedParams,
    ModelError, ScatteringParams, Spin,
};
use crate::quad;
use crate::specfun::{self, BesselOrder, SeriesConfig, SpecFunError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WavesError {
    #[error("partial-wave sum truncated while edge terms are still {last_term:.3e} (tol {tol:.3e}); increase l_max")]
    Truncation { last_term: f64, tol: f64 },
    #[error("scattered-wave integrand is singular at dTheta = {delta_theta} (forward direction)")]
    ForwardSingularity { delta_theta: f64 },
    #[error("dTheta = {delta_theta} lies in the guard band around a forward direction; use the forward amplitude")]
    NearForwardSingularity { delta_theta: f64 },
    #[error("domain error: {reason}")]
    DomainError { reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

impl From<quad::QuadError> for WavesError {
    fn from(e: quad::QuadError) -> Self {
        WavesError::SpecFun(SpecFunError::QuadratureFailure {
            reason: e.to_string(),
        })
    }
}

/// Truncation and tolerance knobs for the partial-wave machinery.
#[derive(Debug, Clone, Copy)]
pub struct PartialWaveConfig {
    /// Highest retained channel; the sum runs over l in [-(l_max+1), l_max],
    /// clamped at the evanescent boundary when the frame rotates.
    pub l_max: i64,
    /// Edge-term tolerance for the partial-wave sum, relative to the sum.
    pub series_tol: f64,
    /// Relative tolerance for adaptive quadratures.
    pub quad_tol: f64,
    /// Smallest eta*r at which asymptotic comparisons are meaningful.
    pub asymptotic_min_eta_r: f64,
}

impl Default for PartialWaveConfig {
    fn default() -> Self {
        PartialWaveConfig {
            l_max: 30,
            series_tol: 1e-10,
            quad_tol: 1e-9,
            asymptotic_min_eta_r: 50.0,
        }
    }
}

impl PartialWaveConfig {
    pub fn validate(&self) -> Result<(), WavesError> {
        if self.l_max < 1 || !(self.series_tol > 0.0) || !(self.quad_tol > 0.0) {
            return Err(WavesError::DomainError {
                reason: format!("invalid config: {self:?}"),
            });
        }
        Ok(())
    }
}

/// One point of the wave field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub radius: f64,
    pub azimuth: f64,
    pub value: Complex64,
}

impl FieldSample {
    pub fn new(
        d: &DerivedParams,
        radius: f64,
        azimuth: f64,
        value: Complex64,
    ) -> Result<Self, WavesError> {
        if !(radius > 0.0) || radius >= d.max_radius {
            return Err(WavesError::DomainError {
                reason: format!("radius {radius} outside (0, {})", d.max_radius),
            });
        }
        Ok(FieldSample {
            radius,
            azimuth: azimuth.rem_euclid(2.0 * PI),
            value,
        })
    }
}

/// Which amplitude expression produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Generic,
    Forward,
}

/// Scattering amplitude at one angle, with its differential cross section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeRecord {
    /// Rotation-shifted observation angle dTheta = theta + 2 r omega_eff.
    pub delta_theta: f64,
    pub f: Complex64,
    /// |f|^2.
    pub dsigma: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    /// Observation azimuth phi (theta = phi + pi).
    pub azimuth: f64,
    pub outcome: Result<AmplitudeRecord, WavesError>,
}

/// Amplitude records over a grid of observation azimuths at fixed radius.
#[derive(Debug, Clone)]
pub struct AngularSweep {
    pub radius: f64,
    pub entries: Vec<SweepEntry>,
}

/// Guard band (radians) around the forward directions dTheta = +-q pi where
/// the generic amplitude denominator degenerates.
pub const FORWARD_GUARD_BAND: f64 = 1e-3;

const TWO_PI: f64 = 2.0 * PI;

fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

/// Rotation-shifted observation angle dTheta = theta + 2 r omega_eff.
pub fn shifted_angle(d: &DerivedParams, r: f64, theta: f64) -> f64 {
    theta + 2.0 * r * d.effective_rotation
}

/// Phase factor relating the image/scattered decomposition to the spinor
/// field: exp(i (phi + (1 - s) pi)/2). Fixed by requiring that the q = 1,
/// nonrotating field reduce to the plane wave for both spin projections.
pub fn spinor_prefactor(phi: f64, spin: Spin) -> Complex64 {
    Complex64::from_polar(1.0, 0.5 * (phi + (1.0 - spin.sign()) * PI))
}

/// Regular radial solution A J_{q |nu_{s,q}|}(eta_l r).
pub fn radial_solution(
    p: &ScatteringParams,
    d: &DerivedParams,
    l: i64,
    r: f64,
    amplitude: f64,
) -> Result<f64, WavesError> {
    if !(r > 0.0) {
        return Err(WavesError::DomainError {
            reason: format!("radius must be positive, got {r}"),
        });
    }
    let eta_l = channel_wavenumber(p, d, l)?;
    let order = BesselOrder::new(p.q * angular_order(l, p.spin, p.q).abs())?;
    Ok(amplitude * specfun::bessel_j(order, eta_l * r, &SeriesConfig::default())?)
}

/// Channel phase e^{i(r dEta_l + delta_top(l) + |nu_{s,1}| pi/2)}.
fn channel_phase(
    p: &ScatteringParams,
    d: &DerivedParams,
    l: i64,
    r: f64,
) -> Result<Complex64, ModelError> {
    let shift = r * model::wavenumber_shift(p, d, l)?
        + topological_shift(d, l, p.spin, p.q).value
        + angular_order(l, p.spin, 1.0).abs() * 0.5 * PI;
    Ok(Complex64::from_polar(1.0, shift))
}

/// Truncated partial-wave field at one point.
pub fn partial_wave_field(
    p: &ScatteringParams,
    d: &DerivedParams,
    cfg: &PartialWaveConfig,
    r: f64,
    phi: f64,
) -> Result<Complex64, WavesError> {
    cfg.validate()?;
    if !(r > 0.0) || r >= d.max_radius {
        return Err(WavesError::DomainError {
            reason: format!("radius {r} outside (0, {})", d.max_radius),
        });
    }
    let l_lo = (-(cfg.l_max + 1)).max(min_propagating_l(p));
    let l_hi = cfg.l_max;

    let ls: Vec<i64> = (l_lo..=l_hi).collect();
    let radial: Vec<f64> = if p.varpi == 0.0 {
        let orders: Vec<f64> = ls
            .iter()
            .map(|&l| p.q * angular_order(l, p.spin, p.q).abs())
            .collect();
        specfun::bessel_j_many(&orders, d.wavenumber * r)
    } else {
        let cfg_s = SeriesConfig::default();
        let mut vals = Vec::with_capacity(ls.len());
        for &l in &ls {
            let eta_l = channel_wavenumber(p, d, l)?;
            let order = BesselOrder::new(p.q * angular_order(l, p.spin, p.q).abs())?;
            vals.push(specfun::bessel_j(order, eta_l * r, &cfg_s)?);
        }
        vals
    };

    let mut sum = Complex64::new(0.0, 0.0);
    for (&l, &jr) in ls.iter().zip(radial.iter()) {
        let phase = channel_phase(p, d, l, r)?;
        sum += phase * jr * Complex64::from_polar(1.0, (l as f64 + 0.5) * phi);
    }

    // Edge channels must already be negligible, otherwise the truncation is
    // not trustworthy. The clamped (evanescent) edge is exempt: those
    // channels vanish by themselves.
    let tol = cfg.series_tol * sum.norm().max(1.0);
    let mut edge: f64 = radial.last().map(|v| v.abs()).unwrap_or(0.0);
    if l_lo == -(cfg.l_max + 1) {
        edge = edge.max(radial.first().map(|v| v.abs()).unwrap_or(0.0));
    }
    if edge > tol {
        return Err(WavesError::Truncation {
            last_term: edge,
            tol,
        });
    }
    Ok(sum)
}

/// Plane-wave images retained on the cone: integers n with
/// |theta - 2 pi n| <= q pi, boundary ties at half weight.
pub(crate) fn image_window(theta: f64, q: f64) -> Vec<(i64, f64)> {
    let lo = ((theta - q * PI) / TWO_PI - 1e-9).ceil() as i64;
    let hi = ((theta + q * PI) / TWO_PI + 1e-9).floor() as i64;
    let mut images = Vec::new();
    for n in lo..=hi {
        let u = theta - TWO_PI * n as f64;
        let slack = q * PI - u.abs();
        if slack < -1e-9 * (1.0 + q * PI) {
            continue;
        }
        let w = if slack.abs() <= 1e-9 * (1.0 + q * PI) {
            0.5
        } else {
            1.0
        };
        images.push((n, w));
    }
    images
}

/// Closed-form incident wave: a finite image sum over cone copies of the
/// incoming beam,
///
/// `(e^{i r omega_eff/2}/q) sum_n w_n e^{-i r eta kappa cos((theta - 2 pi n)/q)}
///  e^{-i beta_q (theta - 2 pi n)}`, `theta = phi + pi`.
///
/// Valid in the small-rotation regime; rotation corrections grow with
/// `varpi r^2`, so the form degrades at large radius even for small `varpi`.
pub fn incident_wave(p: &ScatteringParams, d: &DerivedParams, r: f64, phi: f64) -> Complex64 {
    let theta = phi + PI;
    let eta = d.wavenumber;
    let kappa = 1.0 + d.effective_rotation / (2.0 * eta);
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, w) in image_window(theta, p.q) {
        let u = theta - TWO_PI * n as f64;
        let phase = -r * eta * kappa * (u / p.q).cos() - d.order_offset * u;
        sum += w * Complex64::from_polar(1.0, phase);
    }
    Complex64::from_polar(1.0, 0.5 * r * d.effective_rotation) / p.q * sum
}

/// Which expansion of the scattered-wave integrand to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandOrder {
    /// Full hyperbolic integrand; valid away from the forward directions.
    Full,
    /// cosh's expanded to second order; regularizes the forward directions.
    Quadratic,
}

/// Scattered wave by direct quadrature of its integral representation,
///
/// `S_sc = -(e^{i eta r}/(2 pi i)) sum_{j=+-} j e^{i j pi q beta_q}
///         Int_0^inf dy [cosh(q y (1-b)) - cosh(q b y) e^{-i th_j}]
///                    / (e^{z kappa y^2/2} [cosh(q y) - cos th_j])`,
///
/// `th_j = dTheta + j q pi`, `z = -i eta r`. Evaluated on the rotated ray
/// `y = e^{i pi/4} u / sqrt(eta r kappa)` where the Fresnel factor is the
/// Gaussian `e^{-u^2/2}`; truncated at u = 12 (tail below e^{-72}).
pub fn scattered_wave_quadrature(
    p: &ScatteringParams,
    d: &DerivedParams,
    cfg: &PartialWaveConfig,
    r: f64,
    delta_theta: f64,
    order: ExpandOrder,
) -> Result<Complex64, WavesError> {
    if !(r > 0.0) {
        return Err(WavesError::DomainError {
            reason: format!("radius must be positive, got {r}"),
        });
    }
    let eta = d.wavenumber;
    // the rotated contour is scaled by 1/sqrt(eta r); below eta r ~ 1 the
    // hyperbolic factors outrun the Gaussian inside the truncation window
    if eta * r < 1.0 {
        return Err(WavesError::DomainError {
            reason: format!(
                "scattered-wave quadrature needs eta r >= 1, got {}",
                eta * r
            ),
        });
    }
    let beta = d.order_offset;
    let q = p.q;
    let kappa = 1.0 + d.effective_rotation / (2.0 * eta);

    let thetas = [delta_theta + q * PI, delta_theta - q * PI];
    if order == ExpandOrder::Full {
        for th in thetas {
            if wrap_distance(th, 0.0) < FORWARD_GUARD_BAND {
                return Err(WavesError::ForwardSingularity { delta_theta });
            }
        }
    }

    let ray = Complex64::from_polar(1.0, FRAC_PI_4) / (eta * r * kappa).sqrt();
    let integrand = |u: f64| -> Complex64 {
        let y = ray * u;
        let mut g = Complex64::new(0.0, 0.0);
        for (k, th) in thetas.iter().enumerate() {
            let j = if k == 0 { 1.0 } else { -1.0 };
            let e_mth = Complex64::from_polar(1.0, -th);
            let ratio = match order {
                ExpandOrder::Full => {
                    let numer = (q * y * (1.0 - beta)).cosh() - (q * beta * y).cosh() * e_mth;
                    let denom = (q * y).cosh() - th.cos();
                    numer / denom
                }
                ExpandOrder::Quadratic => {
                    let y2 = q * q * y * y * 0.5;
                    let numer =
                        (1.0 - e_mth) + y2 * ((1.0 - beta) * (1.0 - beta) - beta * beta * e_mth);
                    let denom = (1.0 - th.cos()) + y2;
                    numer / denom
                }
            };
            g += j * Complex64::from_polar(1.0, j * PI * q * beta) * ratio;
        }
        g * (-0.5 * u * u).exp()
    };

    let integral = quad::integrate(integrand, 0.0, 12.0, 1e-14, cfg.quad_tol, 6000)?;
    let front = -Complex64::from_polar(1.0, eta * r) / (Complex64::new(0.0, 1.0) * TWO_PI);
    Ok(front * ray * integral)
}

/// Closed-form scattering amplitude (generic directions):
///
/// `f(dTheta) = 2 i cos(S/2) / sqrt(2 pi eta)
///              * sin(w_cs/2) sin(dTheta/2) e^{-i dTheta/2}
///              / (cos w_cs + cos dTheta) * kappa^{-1/2}`.
///
/// `theta` is the scattering angle (phi + pi); the rotation enters through
/// dTheta = theta + 2 r omega_eff and the global kappa factor only.
pub fn amplitude(
    p: &ScatteringParams,
    d: &DerivedParams,
    r: f64,
    theta: f64,
) -> Result<AmplitudeRecord, WavesError> {
    let dtheta = shifted_angle(d, r, theta);
    let q = p.q;
    let near = wrap_distance(dtheta, q * PI).min(wrap_distance(dtheta, -q * PI));
    if near < FORWARD_GUARD_BAND {
        return Err(WavesError::NearForwardSingularity {
            delta_theta: dtheta,
        });
    }
    let eta = d.wavenumber;
    let kappa = 1.0 + d.effective_rotation / (2.0 * eta);
    // cos(S/2) = s exactly
    let spin_factor = p.spin.sign();
    let denom = d.cone_angle.cos() + dtheta.cos();
    let f = Complex64::new(0.0, 2.0 * spin_factor) / (TWO_PI * eta).sqrt()
        * ((0.5 * d.cone_angle).sin() * (0.5 * dtheta).sin())
        * Complex64::from_polar(1.0, -0.5 * dtheta)
        / denom
        / kappa.sqrt();
    Ok(AmplitudeRecord {
        delta_theta: dtheta,
        f,
        dsigma: f.norm_sqr(),
        branch: Branch::Generic,
    })
}

/// Sign selecting which forward direction dTheta = +q pi or -q pi.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardSign {
    Plus,
    Minus,
}

impl ForwardSign {
    fn signum(self) -> f64 {
        match self {
            ForwardSign::Plus => 1.0,
            ForwardSign::Minus => -1.0,
        }
    }
}

/// Regularized finite amplitude at the forward directions dTheta = +-q pi,
///
/// `f = e^{iS/2}/sqrt(2 pi eta) (-(e^{+-i w_cs/2}/2) cot w_cs - sin(w_cs/2)
///      +- i beta_q e^{-+i w_cs/2}) kappa^{-1/2}`,
///
/// defined for q in (1, 2) where sin w_cs != 0.
pub fn forward_amplitude(
    p: &ScatteringParams,
    d: &DerivedParams,
    sign: ForwardSign,
) -> Result<Complex64, WavesError> {
    if !(p.q > 1.0 && p.q < 2.0) {
        return Err(WavesError::DomainError {
            reason: format!("forward amplitude requires q in (1, 2), got q = {}", p.q),
        });
    }
    let sg = sign.signum();
    let w = d.cone_angle;
    let eta = d.wavenumber;
    let kappa = 1.0 + d.effective_rotation / (2.0 * eta);
    // e^{iS/2} = s exactly
    let spin_phase = Complex64::new(p.spin.sign(), 0.0);
    let cot = w.cos() / w.sin();
    let val = -Complex64::from_polar(0.5, sg * 0.5 * w) * cot - (0.5 * w).sin()
        + Complex64::new(0.0, sg * d.order_offset) * Complex64::from_polar(1.0, -sg * 0.5 * w);
    Ok(spin_phase / (TWO_PI * eta).sqrt() * val / kappa.sqrt())
}

/// Truncated partial-wave amplitude sum
/// `(1/sqrt(-2 pi eta)) sum_l (e^{2 i delta_l} - 1) e^{i(l+1/2) theta}`
/// with the topological shifts only. Diagnostic: the partial sums carry
/// delta-distribution content at the image directions and do not converge as
/// l_max grows; the branch sqrt(-1) = +i is fixed by convention.
pub fn partial_wave_amplitude(
    p: &ScatteringParams,
    d: &DerivedParams,
    cfg: &PartialWaveConfig,
    theta: f64,
    rotation_radius: Option<f64>,
) -> Complex64 {
    let l_lo = (-(cfg.l_max + 1)).max(min_propagating_l(p));
    let mut sum = Complex64::new(0.0, 0.0);
    for l in l_lo..=cfg.l_max {
        let mut delta = topological_shift(d, l, p.spin, p.q).value;
        if let Some(r) = rotation_radius {
            // the rotational part enters the channel phase through r dEta_l
            delta += r * model::wavenumber_shift(p, d, l).unwrap_or(0.0);
        }
        let term = (Complex64::from_polar(1.0, 2.0 * delta) - 1.0)
            * Complex64::from_polar(1.0, (l as f64 + 0.5) * theta);
        sum += term;
    }
    // 1/sqrt(-2 pi eta) = -i/sqrt(2 pi eta) with sqrt(-1) = +i
    sum * Complex64::new(0.0, -1.0) / (TWO_PI * d.wavenumber).sqrt()
}

/// Amplitude records over a grid of observation azimuths. Angles inside the
/// forward guard band are routed to the regularized forward expression;
/// per-angle failures are recorded without aborting the sweep.
pub fn cross_section_sweep(
    p: &ScatteringParams,
    d: &DerivedParams,
    _cfg: &PartialWaveConfig,
    azimuths: &[f64],
    r: f64,
) -> AngularSweep {
    let entries = azimuths
        .iter()
        .map(|&phi| {
            let theta = phi + PI;
            let outcome = match amplitude(p, d, r, theta) {
                Ok(rec) => Ok(rec),
                Err(WavesError::NearForwardSingularity { delta_theta }) => {
                    let sign = if wrap_distance(delta_theta, p.q * PI)
                        <= wrap_distance(delta_theta, -p.q * PI)
                    {
                        ForwardSign::Plus
                    } else {
                        ForwardSign::Minus
                    };
                    forward_amplitude(p, d, sign).map(|f| AmplitudeRecord {
                        delta_theta,
                        f,
                        dsigma: f.norm_sqr(),
                        branch: Branch::Forward,
                    })
                }
                Err(e) => Err(e),
            };
            SweepEntry {
                azimuth: phi,
                outcome,
            }
        })
        .collect();
    AngularSweep { radius: r, entries }
}
