//! Symmetric Stern-Gerlach arm trajectory and its transfer function.
//!
//! The arms mirror each other; their separation s(t) = x_R(t) − x_L(t)
//! follows the piecewise-constant relative acceleration
//! {+μ, −μ, 0, −μ, +μ} on the intervals
//! [0, t_a], [t_a, 2t_a], [2t_a, 2t_a+t_e], [2t_a+t_e, 3t_a+t_e],
//! [3t_a+t_e, 4t_a+t_e], with μ = Δx/t_a², so the separation plateaus at Δx
//! and closes (s = ṡ = 0) at both ends.  The transfer function is the
//! squared magnitude of its Fourier transform,
//!
//! ```text
//! F(ω) = |∫₀^τ s(t) e^{iωt} dt|²
//!      = 64 Δx² / (ω⁶ t_a⁴) · sin⁴(t_a ω/2) · sin²(ω (2t_a+t_e)/2) .
//! ```
//!
//! The closed form is cross-checked against direct quadrature of the
//! piecewise trajectory by [`transfer_function_numeric`].

use crate::config::InterferometerConfig;
use crate::error::Error;
use crate::Result;
use num_complex::Complex64;

/// One piece of the trajectory: time span and the sign of the relative
/// acceleration (+1, −1 or 0 in units of μ = Δx/t_a²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPhase {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub accel_sign: f64,
}

/// The five phases of the symmetric trajectory.
pub fn phases(config: &InterferometerConfig) -> [TrajectoryPhase; 5] {
    let ta = config.accel_time;
    let te = config.hold_time;
    let signs = [1.0, -1.0, 0.0, -1.0, 1.0];
    let bounds = [
        0.0,
        ta,
        2.0 * ta,
        2.0 * ta + te,
        3.0 * ta + te,
        4.0 * ta + te,
    ];
    std::array::from_fn(|i| TrajectoryPhase {
        index: i,
        start: bounds[i],
        end: bounds[i + 1],
        accel_sign: signs[i],
    })
}

/// Arm separation s(t) = x_R(t) − x_L(t) at time t ∈ [0, τ].
pub fn arm_separation(config: &InterferometerConfig, t: f64) -> Result<f64> {
    config.validate()?;
    let tau = config.total_time();
    if !(t.is_finite() && (0.0..=tau).contains(&t)) {
        return Err(Error::invalid("time must lie in [0, τ]"));
    }
    let ta = config.accel_time;
    let te = config.hold_time;
    let dx = config.max_separation;
    let mu = config.relative_acceleration();
    let s = if t <= ta {
        0.5 * mu * t * t
    } else if t <= 2.0 * ta {
        let r = t - ta;
        0.5 * mu * ta * ta + mu * ta * r - 0.5 * mu * r * r
    } else if t <= 2.0 * ta + te {
        dx
    } else if t <= 3.0 * ta + te {
        let r = t - (2.0 * ta + te);
        dx - 0.5 * mu * r * r
    } else {
        let r = t - (3.0 * ta + te);
        0.5 * mu * ta * ta - mu * ta * r + 0.5 * mu * r * r
    };
    Ok(s)
}

/// Closed-form transfer function (m²·s²).
pub fn transfer_function(config: &InterferometerConfig, omega: f64) -> Result<f64> {
    config.validate()?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid("transfer function requires ω > 0"));
    }
    let ta = config.accel_time;
    let tc = 2.0 * ta + config.hold_time;
    let dx = config.max_separation;
    let tau = config.total_time();
    if omega * tau < 1e-4 {
        // Series around the removable ω → 0 point:
        // F = Δx² tc² (1 − (2 a² + c²) ω²/3 + …), a = t_a/2, c = tc/2.
        let a2 = 0.25 * ta * ta;
        let c2 = 0.25 * tc * tc;
        let w2 = omega * omega;
        return Ok(dx * dx * tc * tc * (1.0 - w2 * (2.0 * a2 + c2) / 3.0));
    }
    let s1 = (0.5 * ta * omega).sin();
    let s2 = (0.5 * tc * omega).sin();
    Ok(64.0 * dx * dx / (omega.powi(6) * ta.powi(4)) * s1.powi(4) * s2 * s2)
}

/// |∫₀^τ s(t) e^{iωt} dt|² by exact integration of the piecewise-quadratic
/// separation against the oscillatory kernel; oracle for [`transfer_function`].
pub fn transfer_function_numeric(config: &InterferometerConfig, omega: f64) -> Result<f64> {
    config.validate()?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid("transfer function requires ω > 0"));
    }
    let ta = config.accel_time;
    let te = config.hold_time;
    let dx = config.max_separation;
    let mu = config.relative_acceleration();

    // ∫ (c₀ + c₁ r + c₂ r²) e^{iω(t₀+r)} dr over r ∈ [0, len].  The by-parts
    // antiderivative cancels catastrophically for ω·len ≪ 1, so slow pieces
    // integrate with Gauss panels instead (the integrand is then smooth).
    let piece = |t0: f64, len: f64, c0: f64, c1: f64, c2: f64| -> Complex64 {
        if len == 0.0 {
            return Complex64::ZERO;
        }
        if omega * len < 4.0 {
            let (nodes, weights) = crate::quad::gauss_legendre(31);
            let half = 0.5 * len;
            let mut acc = Complex64::ZERO;
            for (&x, &w) in nodes.iter().zip(weights) {
                let r = half + half * x;
                let poly = c0 + c1 * r + c2 * r * r;
                acc += Complex64::from_polar(w * poly, omega * (t0 + r));
            }
            return acc * half;
        }
        let iw = Complex64::new(0.0, omega);
        let p = |r: f64| Complex64::new(c0 + c1 * r + c2 * r * r, 0.0);
        let dp = |r: f64| Complex64::new(c1 + 2.0 * c2 * r, 0.0);
        let d2p = Complex64::new(2.0 * c2, 0.0);
        let anti = |r: f64| {
            (Complex64::new(0.0, omega * r)).exp() / iw
                * (p(r) - dp(r) / iw + d2p / (iw * iw))
        };
        Complex64::new(0.0, omega * t0).exp() * (anti(len) - anti(0.0))
    };

    let halfway = 0.5 * mu * ta * ta;
    let b0 = 2.0 * ta + te;
    let b1 = 3.0 * ta + te;
    let total = piece(0.0, ta, 0.0, 0.0, 0.5 * mu)
        + piece(ta, ta, halfway, mu * ta, -0.5 * mu)
        + piece(2.0 * ta, te, dx, 0.0, 0.0)
        + piece(b0, ta, dx, 0.0, -0.5 * mu)
        + piece(b1, ta, halfway, -mu * ta, 0.5 * mu);
    Ok(total.norm_sqr())
}
