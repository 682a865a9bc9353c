//! Modified Bessel functions of the second kind K_ν for ν ∈ {0, ½, 1, 3/2, 2, 5/2},
//! plus the small- and large-argument approximations used by the ensemble
//! averaging.
//!
//! Half-integer orders use the elementary closed forms
//! K_{1/2}(u) = √(π/2u) e^{−u}, K_{3/2} = √(π/2u)(1 + 1/u) e^{−u},
//! K_{5/2} = √(π/2u)(1 + 3/u + 3/u²) e^{−u}.  Integer orders are evaluated
//! from K_ν(u) = ∫₀^∞ e^{−u cosh t} cosh(νt) dt with a trapezoid rule; the
//! integrand decays double-exponentially, so the rule converges geometrically
//! and needs no fitted coefficients.  K₂ follows from the recurrence
//! K₂ = K₀ + (2/u) K₁.  The oscillatory cosine-integral representation is
//! kept in [`integral_oracle`] as an independent (slow) reference path.

use crate::error::Error;
use crate::Result;
use std::f64::consts::PI;

/// Arguments beyond this evaluate to zero in f64; callers get an
/// `underflowed` flag instead of an error.
pub const UNDERFLOW_ARGUMENT: f64 = 700.0;

/// Order ν encoded exactly as 2ν ∈ {0, 1, 2, 3, 4, 5}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder {
    twice_order: u8,
}

impl BesselOrder {
    pub const ZERO: BesselOrder = BesselOrder { twice_order: 0 };
    pub const HALF: BesselOrder = BesselOrder { twice_order: 1 };
    pub const ONE: BesselOrder = BesselOrder { twice_order: 2 };
    pub const THREE_HALVES: BesselOrder = BesselOrder { twice_order: 3 };
    pub const TWO: BesselOrder = BesselOrder { twice_order: 4 };
    pub const FIVE_HALVES: BesselOrder = BesselOrder { twice_order: 5 };

    pub fn new(twice_order: u8) -> Result<Self> {
        if twice_order > 5 {
            return Err(Error::invalid(
                "Bessel order must be one of 0, 1/2, 1, 3/2, 2, 5/2",
            ));
        }
        Ok(Self { twice_order })
    }

    pub fn twice_order(&self) -> u8 {
        self.twice_order
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.twice_order) / 2.0
    }

    pub fn is_half_integer(&self) -> bool {
        self.twice_order % 2 == 1
    }
}

/// A Bessel value together with an underflow marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub value: f64,
    pub underflowed: bool,
}

/// K_ν(u) for the supported orders.
pub fn bessel_k(order: BesselOrder, u: f64) -> Result<BesselEval> {
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::invalid("bessel_k requires u > 0 (K_ν diverges at 0)"));
    }
    if u > UNDERFLOW_ARGUMENT {
        return Ok(BesselEval {
            value: 0.0,
            underflowed: true,
        });
    }
    let value = match order.twice_order {
        0 => k01(u).0,
        1 => half_order_factor(u),
        2 => k01(u).1,
        3 => half_order_factor(u) * (1.0 + 1.0 / u),
        4 => {
            let (k0, k1) = k01(u);
            k0 + 2.0 * k1 / u
        }
        5 => half_order_factor(u) * (1.0 + 3.0 / u + 3.0 / (u * u)),
        _ => unreachable!(),
    };
    Ok(BesselEval {
        value,
        underflowed: false,
    })
}

/// √(π/2u)·e^{−u}, the K_{1/2} closed form and the common half-integer factor.
fn half_order_factor(u: f64) -> f64 {
    (PI / (2.0 * u)).sqrt() * (-u).exp()
}

/// K₀ and K₁ in one pass from the cosh-integral representation.
///
/// Returns e^{−u}·(scaled K₀, scaled K₁) recombined, valid for 0 < u ≤ 700.
pub(crate) fn k01(u: f64) -> (f64, f64) {
    // e^{u} K_ν(u) = ∫₀^∞ e^{−u(cosh t − 1)} cosh(νt) dt
    // Truncate where u(cosh t − 1) > 55 (integrand < 1.3e-24 of peak).
    let t_max = (1.0 + 55.0 / u).acosh();
    let n = 96usize;
    let h = t_max / n as f64;
    let mut s0 = 0.5; // t = 0 endpoint: integrand 1 for both orders
    let mut s1 = 0.5;
    for i in 1..=n {
        let t = h * i as f64;
        let c = t.cosh();
        let w = (-u * (c - 1.0)).exp();
        s0 += w;
        s1 += w * c;
    }
    let e = (-u).exp();
    (s0 * h * e, s1 * h * e)
}

/// Small-argument approximation K_n(u) ≈ (Γ(n)/2)·(2/u)^n for positive
/// integer or half-integer n, valid for 0 < u ≤ √(n+1).
pub fn bessel_k_small(order_n: f64, u: f64) -> Result<f64> {
    if order_n.is_nan() || order_n <= 0.0 || (2.0 * order_n).fract() != 0.0 {
        return Err(Error::invalid(
            "small-argument form needs a positive integer or half-integer order n > 0",
        ));
    }
    if u.is_nan() || u <= 0.0 || u > (order_n + 1.0).sqrt() {
        return Err(Error::invalid(
            "small-argument form is valid only for 0 < u <= sqrt(n+1)",
        ));
    }
    Ok(0.5 * gamma_half_integer(order_n) * (2.0 / u).powf(order_n))
}

/// Large-argument leading term K_ν(u) ≈ e^{−u}·√(π/2u), order independent.
pub fn bessel_k_large(u: f64) -> Result<f64> {
    if u.is_nan() || u < 1.0 {
        return Err(Error::invalid(
            "large-argument form is valid only for u >= 1",
        ));
    }
    if u > UNDERFLOW_ARGUMENT {
        return Ok(0.0);
    }
    Ok(half_order_factor(u))
}

/// Γ(n) for n a positive multiple of 1/2, by recurrence from Γ(1/2) = √π
/// and Γ(1) = 1.
fn gamma_half_integer(n: f64) -> f64 {
    let mut x = if (n * 2.0) as u64 % 2 == 1 { 0.5 } else { 1.0 };
    let mut g = if x == 0.5 { PI.sqrt() } else { 1.0 };
    while x + 0.5 < n + 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Slow reference evaluation through the cosine-integral representation
///
/// ```text
/// K_ν(x) = Γ(ν+1/2)/√π · (2/x)^ν · ∫₀^∞ cos(x s) / (1+s²)^{ν+1/2} ds
/// ```
///
/// integrated per half-period of the cosine with Gauss panels and an Euler
/// transform on the alternating tail.  Only used by tests; the production
/// path never calls this.
pub mod integral_oracle {
    use super::*;
    use crate::quad::gauss_legendre;

    pub fn bessel_k_cos_integral(order: BesselOrder, x: f64) -> Result<f64> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::invalid("oracle requires x > 0"));
        }
        let nu = order.as_f64();
        let s_exp = nu + 0.5;
        let integrand = |s: f64| (x * s).cos() / (1.0 + s * s).powf(s_exp);

        let (nodes, weights) = gauss_legendre(24);
        let panel = |a: f64, b: f64| -> f64 {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            nodes
                .iter()
                .zip(weights)
                .map(|(&t, &w)| w * integrand(mid + half * t))
                .sum::<f64>()
                * half
        };

        // Panels split at zeros of cos(xs): s_k = (k - 1/2) π / x.
        let n_panels = 48;
        let mut terms = Vec::with_capacity(n_panels + 1);
        let mut a = 0.0;
        for k in 1..=n_panels {
            let b = (k as f64 - 0.5) * PI / x;
            terms.push(panel(a, b));
            a = b;
        }
        // Euler transform of the alternating partial sums.
        let mut row: Vec<f64> = {
            let mut acc = 0.0;
            terms
                .iter()
                .map(|t| {
                    acc += t;
                    acc
                })
                .collect()
        };
        while row.len() > 1 {
            row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        let integral = row[0];
        Ok(gamma_half_integer(nu + 0.5) / PI.sqrt() * (2.0 / x).powf(nu) * integral)
    }
}
