/// Active-set penalty diagonal: `large` where `y_l < u0_l` (strict), else 0.
pub fn penalty_diag(y: &[f64], u0: &[f64], large: f64) -> Vec<f64> {
    debug_assert_eq!(y.len(), u0.len());
    y.iter().zip(u0).map(|(a, b)| if a < b { large } else { 0.0 }).collect()
}

/// `max_l |y_l - y_prev_l| / max(1, |y_l|)`.
pub fn penalty_displacement(y: &[f64], y_prev: &[f64]) -> f64 {
    y.iter()
        .zip(y_prev)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max)
}
