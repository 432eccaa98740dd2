use rand::seq::index::sample;
use rand::Rng;

/// Largest relative discrepancy between `analytic` and central differences
/// of `loss` around `params`, over up to `max_coords` random coordinates.
///
/// Relative error is `|a - n| / max(|a|, |n|, 1e-5)`. The floor keeps
/// gradients too small for central differences to resolve from dominating.
pub fn finite_diff_check<R, F>(params: &[f64], analytic: &[f64], mut loss: F, h: f64, max_coords: usize, rng: &mut R) -> f64
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(params.len(), analytic.len(), "gradient length mismatch");
    let n = params.len();
    let coords: Vec<usize> = if max_coords >= n { (0..n).collect() } else { sample(rng, n, max_coords).into_vec() };
    let mut probe = params.to_vec();
    let mut worst = 0.0f64;
    for i in coords {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = loss(&probe);
        probe[i] = orig - h;
        let down = loss(&probe);
        probe[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-5);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}
