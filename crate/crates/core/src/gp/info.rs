/// Realized information gain `1/2 sum_t sum_l ln(1 + sigma^2_{t-1} / rho^2)`
/// from the posterior variances at the chosen points, each taken before
/// that point was added. Each entry of `trace` holds one round's
/// per-component variances.
pub fn info_gain(trace: &[Vec<f64>], noise_var: f64) -> f64 {
    info_gain_curve(trace, noise_var).last().copied().unwrap_or(0.0)
}

/// Running partial sums of [`info_gain`], one per round.
pub fn info_gain_curve(trace: &[Vec<f64>], noise_var: f64) -> Vec<f64> {
    let mut total = 0.0;
    trace
        .iter()
        .map(|vars| {
            total += vars.iter().map(|v| info_increment(*v, noise_var)).sum::<f64>();
            total
        })
        .collect()
}

#[inline]
pub fn info_increment(var: f64, noise_var: f64) -> f64 {
    0.5 * (var.max(0.0) / noise_var).ln_1p()
}
