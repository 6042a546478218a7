//! Finite-difference gradient checking.

/// Step used by [`finite_difference_check`].
pub const FD_STEP: f64 = 1e-5;

/// Central-difference estimate of the gradient of `loss` at `params`.
pub fn numeric_gradient<F>(loss: F, params: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + FD_STEP;
            let up = loss(&p);
            p[i] = orig - FD_STEP;
            let down = loss(&p);
            p[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Relative error `|a - n| / max(|a|, |n|, 1e-8)`; exactly 0 when both are 0.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Largest relative error between `analytic` and central differences of
/// `loss` over all parameters.
pub fn finite_difference_check<F>(loss: F, analytic: &[f64], params: &[f64]) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(analytic.len(), params.len(), "gradient and parameter lengths differ");
    numeric_gradient(loss, params)
        .iter()
        .zip(analytic)
        .map(|(n, a)| relative_error(*a, *n))
        .fold(0.0, f64::max)
}
