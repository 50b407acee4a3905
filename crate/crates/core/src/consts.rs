//! Physical constants and reference material data.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Yb⁺ ²S₁/₂ ↔ ²P₁/₂ transition wavelength, m.
pub const YB_WAVELENGTH: f64 = 369.5e-9;

/// Yb⁺ ²P₁/₂ half-linewidth γ in rad/s (γ/2π = 10 MHz; the spontaneous
/// decay rate is 2γ).
pub const YB_GAMMA: f64 = 2.0 * PI * 10.0e6;

/// Refractive index of fused silica from the Malitson (1965) three-term
/// Sellmeier fit. `wavelength` in metres; valid from 0.21 µm to 3.7 µm.
pub fn fused_silica_index(wavelength: f64) -> f64 {
    const B: [f64; 3] = [0.696_166_3, 0.407_942_6, 0.897_479_4];
    const C: [f64; 3] = [0.068_404_3, 0.116_241_4, 9.896_161];
    let l2 = (wavelength * 1e6).powi(2);
    let sum: f64 = B.iter().zip(C).map(|(b, c)| b * l2 / (l2 - c * c)).sum();
    (1.0 + sum).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fused_silica_near_uv_and_visible() {
        // catalogue values: 1.4585 at 587.6 nm (nd), ~1.474 at 369.5 nm
        assert!((fused_silica_index(587.6e-9) - 1.4585).abs() < 2e-4);
        let n = fused_silica_index(YB_WAVELENGTH);
        assert!((n - 1.4745).abs() < 1e-3, "n = {n}");
    }
}
