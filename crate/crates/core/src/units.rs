//! Conversions between ordinary frequencies and the angular units used internally.
//!
//! Everything inside the crate is rad/s and seconds. Frequencies are quoted
//! as ω/2π at the edges (configs, presets, CLI output).

use std::f64::consts::TAU;

pub fn ghz(f: f64) -> f64 {
    TAU * f * 1e9
}

pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

pub fn khz(f: f64) -> f64 {
    TAU * f * 1e3
}

pub fn to_ghz(w: f64) -> f64 {
    w / (TAU * 1e9)
}

pub fn to_mhz(w: f64) -> f64 {
    w / (TAU * 1e6)
}

pub fn to_khz(w: f64) -> f64 {
    w / (TAU * 1e3)
}

pub fn us(t: f64) -> f64 {
    t * 1e-6
}

pub fn ms(t: f64) -> f64 {
    t * 1e-3
}

pub fn to_us(t: f64) -> f64 {
    t * 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        assert!((to_ghz(ghz(4.09)) - 4.09).abs() < 1e-15);
        assert!((to_mhz(mhz(53.6)) - 53.6).abs() < 1e-12);
        assert!((to_khz(khz(7.2)) - 7.2).abs() < 1e-12);
        assert!((to_us(us(36.9)) - 36.9).abs() < 1e-12);
    }
}
