//! Two-interferometer entanglement bookkeeping: entangling phases, the
//! dephasing-averaged density matrix, the fixed PPT witness expectation and
//! the detectability verdict.
//!
//! Both qubits carry the same dephasing Γₙ, and the phase noise is treated
//! as Gaussian, E[e^{iδφ}] = e^{−Γₙ/2}.

use crate::config::InterferometerConfig;
use crate::constants::{COULOMB, GRAVITATIONAL, REDUCED_PLANCK};
use crate::error::Error;
use crate::quad::fixed_panel;
use crate::trajectory::{arm_separation, phases};
use crate::Result;
use num_complex::Complex64;

/// Which interaction entangles the two interferometers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Two masses m at trap separation d.
    Gravitational { mass: f64 },
    /// Two trapped charges q₁, q₂ at separation d.
    Coulomb { q1: f64, q2: f64 },
}

/// Static phase φ and entangling phase Δφ for one run of duration τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementPhases {
    pub phi: f64,
    pub delta_phi: f64,
    pub coupling: Coupling,
    pub separation: f64,
}

/// Entangling phases for two parallel interferometers at trap separation d.
///
/// The ↑↓ / ↓↑ branches sit at distance √(d² + Δx(t)²), so
/// Δφ = (1/ħ) ∫₀^τ V(√(d² + Δx²(t)))/V-scale dt − φ with
/// φ = (τ/ħ)·G m²/d (gravitational) or −(τ/ħ)·κ_e q₁q₂/d (Coulomb).
pub fn entangling_phases(
    coupling: Coupling,
    separation: f64,
    config: &InterferometerConfig,
) -> Result<EntanglementPhases> {
    config.validate()?;
    if !(separation.is_finite() && separation > config.max_separation) {
        return Err(Error::invalid(
            "trap separation must exceed the superposition size (d > Δx)",
        ));
    }
    let strength = match coupling {
        Coupling::Gravitational { mass } => {
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::invalid("mass must be positive"));
            }
            GRAVITATIONAL * mass * mass
        }
        Coupling::Coulomb { q1, q2 } => {
            if !(q1.is_finite() && q2.is_finite() && q1 != 0.0 && q2 != 0.0) {
                return Err(Error::invalid("both charges must be nonzero"));
            }
            -COULOMB * q1 * q2
        }
    };
    let tau = config.total_time();
    let phi = tau / REDUCED_PLANCK * strength / separation;
    // ∫₀^τ dt / √(d² + s(t)²), exactly resolvable per trajectory phase.
    let mut integral = 0.0;
    for ph in phases(config) {
        integral += fixed_panel(
            &|t: f64| {
                let s = arm_separation(config, t.clamp(ph.start, ph.end)).unwrap_or(0.0);
                1.0 / separation.hypot(s)
            },
            ph.start,
            ph.end,
            31,
        );
    }
    let delta_phi = strength / REDUCED_PLANCK * integral - phi;
    Ok(EntanglementPhases {
        phi,
        delta_phi,
        coupling,
        separation,
    })
}

/// 4×4 density matrix over the basis {↑↑, ↑↓, ↓↑, ↓↓}.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensityMatrix(pub [[Complex64; 4]; 4]);

impl TwoQubitDensityMatrix {
    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Partial transpose over the second qubit.
    pub fn partial_transpose(&self) -> TwoQubitDensityMatrix {
        let mut out = [[Complex64::ZERO; 4]; 4];
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        // (i1 i2; j1 j2) ← (i1 j2; j1 i2)
                        out[2 * i1 + i2][2 * j1 + j2] = self.0[2 * i1 + j2][2 * j1 + i2];
                    }
                }
            }
        }
        TwoQubitDensityMatrix(out)
    }
}

/// Run-averaged density matrix of the two-qubit state: off-diagonals pick up
/// e^{−Γₙ/2 ± iΔφ}, the outer corners e^{−2Γₙ}, the inner ↑↓/↓↑ block stays 1.
pub fn averaged_density_matrix(delta_phi: f64, gamma_n: f64) -> Result<TwoQubitDensityMatrix> {
    if !(gamma_n.is_finite() && gamma_n >= 0.0) {
        return Err(Error::invalid("dephasing must satisfy Γₙ >= 0"));
    }
    if !delta_phi.is_finite() {
        return Err(Error::invalid("entangling phase must be finite"));
    }
    let e2 = Complex64::new((-2.0 * gamma_n).exp(), 0.0);
    let plus = Complex64::from_polar((-0.5 * gamma_n).exp(), delta_phi);
    let minus = plus.conj();
    let one = Complex64::ONE;
    let m = [
        [one, minus, minus, e2],
        [plus, one, one, plus],
        [plus, one, one, plus],
        [e2, minus, minus, one],
    ];
    let quarter = Complex64::new(0.25, 0.0);
    Ok(TwoQubitDensityMatrix(m.map(|row| row.map(|z| z * quarter))))
}

/// The fixed PPT witness W = ¼ (1⊗1 − σx⊗σx + σz⊗σy + σy⊗σz).
pub fn witness_operator() -> [[Complex64; 4]; 4] {
    let o = Complex64::ONE;
    let i = Complex64::I;
    [
        [o, -i, -i, -o],
        [i, o, -o, i],
        [i, -o, o, i],
        [-o, -i, -i, o],
    ]
    .map(|row| row.map(|c| c * Complex64::new(0.25, 0.0)))
}

/// ⟨W⟩ = ⅛ (1 − e^{−2Γₙ}) − ½ sin|Δφ| e^{−Γₙ/2}.
pub fn witness_expectation(delta_phi: f64, gamma_n: f64) -> Result<f64> {
    if !(gamma_n.is_finite() && gamma_n >= 0.0) {
        return Err(Error::invalid("dephasing must satisfy Γₙ >= 0"));
    }
    Ok(0.125 * (1.0 - (-2.0 * gamma_n).exp())
        - 0.5 * delta_phi.abs().sin() * (-0.5 * gamma_n).exp())
}

/// Tr(Wρ) for an arbitrary 4×4 state.
pub fn witness_expectation_from_matrix(rho: &TwoQubitDensityMatrix) -> f64 {
    let w = witness_operator();
    let mut tr = Complex64::ZERO;
    for (i, w_row) in w.iter().enumerate() {
        for (j, w_ij) in w_row.iter().enumerate() {
            tr += w_ij * rho.0[j][i];
        }
    }
    tr.re
}

/// Detectability verdict for given Δφ and Γₙ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detectability {
    /// True iff ⟨W⟩ < 0 (entanglement certified).
    pub detectable: bool,
    pub witness_value: f64,
    /// Margin of the short-time rule Γₙ < |Δφ|/4, reported as the
    /// approximation it is: |Δφ|/4 − Γₙ.
    pub threshold_margin: f64,
}

/// Entanglement is detectable iff ⟨W⟩ < 0; the |Δφ|/4 rule is reported as a
/// secondary diagnostic only.
pub fn detectable(delta_phi: f64, gamma_n: f64) -> Result<Detectability> {
    let w = witness_expectation(delta_phi, gamma_n)?;
    Ok(Detectability {
        detectable: w < 0.0,
        witness_value: w,
        threshold_margin: delta_phi.abs() / 4.0 - gamma_n,
    })
}
