//! Input-unit handling: charges accepted in coulomb or multiples of e,
//! dipole moments in C·m or e·μm.  Bare numbers are SI.

use dephasim::constants::{ELEMENTARY_CHARGE, E_MICROMETRE};

/// "3.2e-19" → SI coulomb; "2e", "2 e", "-1.5e" → multiples of the
/// elementary charge.  Magnitude is taken; signs never affect the dephasing.
pub fn parse_charge(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v.abs());
    }
    let stripped = t
        .strip_suffix('e')
        .or_else(|| t.strip_suffix('E'))
        .map(str::trim);
    if let Some(prefix) = stripped {
        if let Ok(v) = prefix.parse::<f64>() {
            return Ok(v.abs() * ELEMENTARY_CHARGE);
        }
        if prefix.is_empty() {
            return Ok(ELEMENTARY_CHARGE);
        }
    }
    Err(format!(
        "cannot parse charge '{s}' (expected coulombs, e.g. 1.6e-19, or multiples of e, e.g. '10e')"
    ))
}

/// "1.6e-26" → SI C·m; "0.1 e.um" (also e*um, eum, e um) → multiples of e·μm.
pub fn parse_dipole(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v.abs());
    }
    for suffix in ["e.um", "e*um", "e um", "eum", "e.µm", "e·um"] {
        if let Some(prefix) = t.strip_suffix(suffix) {
            let prefix = prefix.trim();
            if prefix.is_empty() {
                return Ok(E_MICROMETRE);
            }
            if let Ok(v) = prefix.parse::<f64>() {
                return Ok(v.abs() * E_MICROMETRE);
            }
        }
    }
    Err(format!(
        "cannot parse dipole '{s}' (expected C·m, e.g. 6.17e-30, or e·μm, e.g. '0.1 e.um')"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charges() {
        assert_eq!(parse_charge("1.6e-19").unwrap(), 1.6e-19);
        assert!((parse_charge("1e").unwrap() - ELEMENTARY_CHARGE).abs() < 1e-35);
        assert!((parse_charge("10 e").unwrap() - 10.0 * ELEMENTARY_CHARGE).abs() < 1e-33);
        assert!((parse_charge("-2e").unwrap() - 2.0 * ELEMENTARY_CHARGE).abs() < 1e-34);
        assert!(parse_charge("abc").is_err());
    }

    #[test]
    fn dipoles() {
        assert_eq!(parse_dipole("6.17e-30").unwrap(), 6.17e-30);
        assert!((parse_dipole("0.1 e.um").unwrap() - 0.1 * E_MICROMETRE).abs() < 1e-40);
        assert!((parse_dipole("1 eum").unwrap() - E_MICROMETRE).abs() < 1e-38);
        assert!(parse_dipole("xx").is_err());
    }
}
