//! Physical inputs, derived parameters and the two phase-shift contributions.
//!
//! Natural units (ħ = c = 1) throughout. The background is a cone with
//! deficit parameter `q >= 1` (`q = 1` is flat space), observed from a frame
//! rotating at frequency `varpi` around the defect axis; the rotating frame
//! is only defined for radii below `1/(alpha varpi)`.

use thiserror::Error;

use std::f64::consts::PI;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("channel l={l} is evanescent at this rotation frequency")]
    EvanescentMode { l: i64 },
    #[error("small-frequency regime violated: varpi={varpi} > 0.05 * energy={energy}")]
    RegimeViolation { varpi: f64, energy: f64 },
    #[error("domain error: {reason}")]
    DomainError { reason: String },
}

/// Spin projection along the defect axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn from_int(v: i64) -> Result<Self, ModelError> {
        match v {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            _ => Err(ModelError::InvalidParams {
                reason: format!("spin must be +1 or -1, got {v}"),
            }),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Raw physical inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringParams {
    /// Particle mass, m > 0.
    pub mass: f64,
    /// Kinetic energy, E > 0.
    pub energy: f64,
    /// Frame rotation frequency, varpi >= 0.
    pub varpi: f64,
    /// Deficit parameter q >= 1 (inverse of the cone angle parameter alpha).
    pub q: f64,
    /// Spin projection.
    pub spin: Spin,
}

impl ScatteringParams {
    pub fn new(mass: f64, energy: f64, varpi: f64, q: f64, spin: Spin) -> Result<Self, ModelError> {
        let p = ScatteringParams {
            mass,
            energy,
            varpi,
            q,
            spin,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: String| Err(ModelError::InvalidParams { reason });
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return bad(format!("mass must be positive, got {}", self.mass));
        }
        if !(self.energy > 0.0) || !self.energy.is_finite() {
            return bad(format!("energy must be positive, got {}", self.energy));
        }
        if !(self.varpi >= 0.0) || !self.varpi.is_finite() {
            return bad(format!("varpi must be nonnegative, got {}", self.varpi));
        }
        if !(self.q >= 1.0) || !self.q.is_finite() {
            return bad(format!("q must be >= 1, got {}", self.q));
        }
        Ok(())
    }

    /// True when the rotation is slow enough for the linearized branch
    /// (varpi <= 0.05 E).
    pub fn in_small_rotation_regime(&self) -> bool {
        self.varpi <= 0.05 * self.energy
    }
}

/// Every derived quantity the wave construction needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// eta = sqrt(2 m E).
    pub wavenumber: f64,
    /// alpha = 1/q.
    pub alpha: f64,
    /// omega_eff = sqrt(m/(2E)) varpi; converts rotation into a per-channel
    /// wavenumber shift.
    pub effective_rotation: f64,
    /// beta_q = (q - s)/(2 q), the fractional offset of the angular order.
    pub order_offset: f64,
    /// omega_cs = pi (q - 1), the classical deflection angle of the cone.
    pub cone_angle: f64,
    /// S = pi (1 - s): 0 for spin up, 2 pi for spin down.
    pub spin_phase: f64,
    /// 1/(alpha varpi); infinite when varpi = 0.
    pub max_radius: f64,
}

/// Compute every derived parameter. The identity
/// `q pi beta_q = omega_cs/2 + S/2` holds exactly by construction and is
/// asserted in the tests.
pub fn derive(p: &ScatteringParams) -> Result<DerivedParams, ModelError> {
    p.validate()?;
    let s = p.spin.sign();
    let alpha = 1.0 / p.q;
    let varpi = p.varpi;
    Ok(DerivedParams {
        wavenumber: (2.0 * p.mass * p.energy).sqrt(),
        alpha,
        effective_rotation: (p.mass / (2.0 * p.energy)).sqrt() * varpi,
        order_offset: (p.q - s) / (2.0 * p.q),
        cone_angle: PI * (p.q - 1.0),
        spin_phase: PI * (1.0 - s),
        max_radius: if varpi == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (alpha * varpi)
        },
    })
}

/// Per-channel wavenumber eta_l = sqrt(eta^2 + 2 m varpi (l + 1/2)).
/// Channels with a nonpositive radicand are evanescent and must be truncated
/// by the caller.
pub fn channel_wavenumber(
    p: &ScatteringParams,
    d: &DerivedParams,
    l: i64,
) -> Result<f64, ModelError> {
    let radicand = d.wavenumber * d.wavenumber + 2.0 * p.mass * p.varpi * (l as f64 + 0.5);
    if radicand <= 0.0 {
        return Err(ModelError::EvanescentMode { l });
    }
    Ok(radicand.sqrt())
}

/// Smallest non-evanescent channel index for these parameters.
pub fn min_propagating_l(p: &ScatteringParams) -> i64 {
    if p.varpi == 0.0 {
        return i64::MIN;
    }
    // need l + 1/2 > -E/varpi
    let bound = -p.energy / p.varpi - 0.5;
    (bound.floor() as i64) + 1
}

/// Exact rotational wavenumber shift eta_l - eta.
pub fn wavenumber_shift(
    p: &ScatteringParams,
    d: &DerivedParams,
    l: i64,
) -> Result<f64, ModelError> {
    Ok(channel_wavenumber(p, d, l)? - d.wavenumber)
}

/// Linearized shift omega_eff (l + 1/2), valid in the small-frequency
/// regime; the exact-minus-linear remainder is O((varpi/E)^2).
pub fn wavenumber_shift_linear(
    p: &ScatteringParams,
    d: &DerivedParams,
    l: i64,
) -> Result<f64, ModelError> {
    if !p.in_small_rotation_regime() {
        return Err(ModelError::RegimeViolation {
            varpi: p.varpi,
            energy: p.energy,
        });
    }
    Ok(d.effective_rotation * (l as f64 + 0.5))
}

/// Angular order nu_{s,q} = l + 1/2 - s/(2q) = l + beta_q (signed).
pub fn angular_order(l: i64, spin: Spin, q: f64) -> f64 {
    l as f64 + 0.5 - spin.sign() / (2.0 * q)
}

/// Topological phase shift with its piecewise reduction cross-checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyShift {
    /// (pi/2)(|nu_{s,1}| - q |nu_{s,q}|) — the defining expression.
    pub value: f64,
    /// Whether the sign-resolved piecewise form (-+)(1/2)(l + 1/2) omega_cs
    /// reproduces `value`; the defining expression wins when they differ.
    pub piecewise_agrees: bool,
}

/// Phase shift induced by the conical topology alone. The defining
/// expression is authoritative; the piecewise reduction is evaluated as a
/// diagnostic.
pub fn topological_shift(d: &DerivedParams, l: i64, spin: Spin, q: f64) -> TopologyShift {
    let nu_flat = angular_order(l, spin, 1.0);
    let nu_cone = angular_order(l, spin, q);
    let value = 0.5 * PI * (nu_flat.abs() - q * nu_cone.abs());
    let piecewise = if l >= 0 {
        -0.5 * (l as f64 + 0.5) * d.cone_angle
    } else {
        0.5 * (l as f64 + 0.5) * d.cone_angle
    };
    TopologyShift {
        value,
        piecewise_agrees: (piecewise - value).abs() <= 1e-12 * (1.0 + value.abs()),
    }
}

/// Rotation frequency for which the forward singular direction coincides
/// with a given observation angle, with its a-posteriori domain check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFrequency {
    pub varpi: f64,
    /// Whether r < q/|varpi| holds, i.e. the radius stays inside the
    /// rotating frame's domain at this frequency.
    pub within_domain: bool,
}

/// Rotation frequency for which the forward singular direction coincides
/// with a given observation angle: sqrt(2E/m) (omega_cs - phi)/(2 r).
/// The radius consistency r < q/varpi can only be judged after the value is
/// known; the result carries that check instead of failing on it.
pub fn rotation_frequency_at(
    p: &ScatteringParams,
    d: &DerivedParams,
    phi: f64,
    r: f64,
) -> Result<SpecialFrequency, ModelError> {
    if !(r > 0.0) {
        return Err(ModelError::DomainError {
            reason: format!("radius must be positive, got {r}"),
        });
    }
    let varpi = (2.0 * p.energy / p.mass).sqrt() * (d.cone_angle - phi) / (2.0 * r);
    Ok(SpecialFrequency {
        varpi,
        within_domain: varpi == 0.0 || r < p.q / varpi.abs(),
    })
}

/// Outer radius of the rotating-frame domain; infinite when varpi = 0.
pub fn max_radius(d: &DerivedParams) -> f64 {
    d.max_radius
}
