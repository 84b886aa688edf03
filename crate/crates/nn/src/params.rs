/// Flat access to every parameter tensor of a layer or model, in a fixed
/// order. Gradients use the same type as the parameters they belong to, so
/// the optimizer and the gradient checker only need this view.
pub trait Params {
    fn param_slices(&self) -> Vec<&[f64]>;
    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;
    fn shapes(&self) -> Vec<Vec<usize>>;

    fn num_params(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    /// Copy of `self` with every parameter set to zero.
    fn zeroed(&self) -> Self
    where
        Self: Clone,
    {
        let mut z = self.clone();
        for s in z.param_slices_mut() {
            s.fill(0.0);
        }
        z
    }

    fn all_finite(&self) -> bool {
        self.param_slices()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// `self += alpha * other`, tensor by tensor.
    fn add_scaled(&mut self, other: &Self, alpha: f64) {
        for (dst, src) in self.param_slices_mut().into_iter().zip(other.param_slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += alpha * s;
            }
        }
    }
}

pub(crate) fn slice_of<D: ndarray::Dimension>(a: &ndarray::Array<f64, D>) -> &[f64] {
    a.as_slice().expect("parameters are stored contiguously")
}

pub(crate) fn slice_of_mut<D: ndarray::Dimension>(a: &mut ndarray::Array<f64, D>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are stored contiguously")
}
