//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Internal convention: every frequency, detuning, coupling and rate is kept
//! in angular units, rad/s (equivalently 1/s for rates). Data tables and
//! configuration files carry `*_thz_over_2pi` keys — values of ω/2π in THz —
//! which are converted on load.

use std::f64::consts::PI;

/// Vacuum permittivity ε₀, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Reduced Planck constant ħ, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum c, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Convert a tabulated ω/2π value in THz into an angular frequency in rad/s.
pub fn thz_over_2pi_to_rad_per_s(value_thz: f64) -> f64 {
    value_thz * 2.0 * PI * 1e12
}

/// Inverse of [`thz_over_2pi_to_rad_per_s`].
pub fn rad_per_s_to_thz_over_2pi(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thz_round_trip() {
        let omega = thz_over_2pi_to_rad_per_s(358.0);
        assert!((omega - 2.249_380_4e15).abs() / omega < 1e-7);
        assert!((rad_per_s_to_thz_over_2pi(omega) - 358.0).abs() < 1e-12);
    }
}
