//! Physical constants and boundary unit conversions.

use std::f64::consts::PI;

/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 2.997_924_58e8;
/// Magnetic flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;
/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);

pub const FEMTO: f64 = 1e-15;
pub const PICO: f64 = 1e-12;
pub const MICRO: f64 = 1e-6;

/// Ordinary frequency in GHz to angular frequency.
pub fn ghz_to_omega(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz * 1e9
}

/// Angular frequency to ordinary frequency in GHz.
pub fn omega_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}

/// Angular frequency to ordinary frequency in MHz.
pub fn omega_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

/// Ordinary frequency in Hz to angular frequency.
pub fn hz_to_omega(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Energy expressed as a frequency in GHz (E/h) to joules.
pub fn ghz_to_joule(f_ghz: f64) -> f64 {
    PLANCK * f_ghz * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_round_trip() {
        let w = ghz_to_omega(6.74);
        assert!((omega_to_ghz(w) - 6.74).abs() < 1e-14);
        assert!((omega_to_mhz(w) - 6740.0).abs() < 1e-9);
    }
}
