use ndarray::{Array2, ArrayView2};
use rand::Rng;

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 − rate)`.
pub fn dropout_mask(shape: (usize, usize), rate: f64, rng: &mut impl Rng) -> Array2<f64> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
    if rate == 0.0 {
        return Array2::ones(shape);
    }
    let keep = 1.0 / (1.0 - rate);
    Array2::from_shape_simple_fn(shape, || if rng.random::<f64>() < rate { 0.0 } else { keep })
}

/// Applies dropout when training; identity otherwise. The mask is returned so
/// the backward pass can reuse it.
pub fn dropout_apply(
    x: ArrayView2<'_, f64>,
    rate: f64,
    rng: &mut impl Rng,
    training: bool,
) -> (Array2<f64>, Option<Array2<f64>>) {
    if !training || rate == 0.0 {
        return (x.to_owned(), None);
    }
    let mask = dropout_mask(x.dim(), rate, rng);
    (&x * &mask, Some(mask))
}
