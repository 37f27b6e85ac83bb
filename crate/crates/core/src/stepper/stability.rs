use num_complex::Complex64;

use crate::error::{PdcpError, Result};

use super::Method;

/// Stability function `R(z)` of the underlying Runge–Kutta method:
///
/// * θ-method: `(1 + (1-θ) z) / (1 - θ z)`
/// * DIRK: `(1 + (1-2θ) z + (1/2 - 2θ + θ²) z²) / (1 - θ z)²`
/// * Lobatto IIIC: `1 / (1 - z + z²/2)`
pub fn stability_function(method: Method, z: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let (num, den) = match method {
        Method::ThetaP(t) => (one + (1.0 - t) * z, one - t * z),
        Method::DirkP(t) => {
            let d = one - t * z;
            (one + (1.0 - 2.0 * t) * z + (0.5 - 2.0 * t + t * t) * z * z, d * d)
        }
        Method::LobattoP => (one, one - z + 0.5 * z * z),
    };
    if den.norm() == 0.0 || !den.is_finite() {
        return Err(PdcpError::Pole(format!("{z}")));
    }
    Ok(num / den)
}
