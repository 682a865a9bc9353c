//! Physical constants (CODATA 2018), SI units throughout.

/// Vacuum permittivity ε₀ (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Reduced Planck constant ħ (J·s).
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

/// Elementary charge e (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Boltzmann constant k_B (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Newtonian gravitational constant G (m³ kg⁻¹ s⁻²).
pub const GRAVITATIONAL: f64 = 6.674_30e-11;

/// Coulomb constant κ_e = 1/(4πε₀) (N·m²/C²).
pub const COULOMB: f64 = 1.0 / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY);

/// Bohr magneton μ_B (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Landé g-factor of the electron.
pub const LANDE_G: f64 = 2.0;

/// One elementary charge times one micrometre, the `e·μm` dipole unit (C·m).
pub const E_MICROMETRE: f64 = ELEMENTARY_CHARGE * 1e-6;

/// Bundled view of the constants, for callers that want them as one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub vacuum_permittivity: f64,
    pub reduced_planck: f64,
    pub elementary_charge: f64,
    pub boltzmann: f64,
    pub gravitational: f64,
    pub coulomb_constant: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            vacuum_permittivity: VACUUM_PERMITTIVITY,
            reduced_planck: REDUCED_PLANCK,
            elementary_charge: ELEMENTARY_CHARGE,
            boltzmann: BOLTZMANN,
            gravitational: GRAVITATIONAL,
            coulomb_constant: COULOMB,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_permittivity_consistent() {
        // κ_e · 4π · ε₀ = 1
        let product = COULOMB * 4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY;
        assert!((product - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e_micrometre_unit() {
        assert!((E_MICROMETRE - 1.602176634e-25).abs() < 1e-37);
    }
}
