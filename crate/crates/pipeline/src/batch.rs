use ndarray::{Array2, Array3, Axis};

/// Stacks `(T, F)` sequences into a time-major `(T, B, F)` batch.
pub(crate) fn stack_time_major(seqs: &[&Array2<f64>]) -> Array3<f64> {
    let (t, f) = seqs.first().map_or((0, 0), |s| s.dim());
    let mut out = Array3::zeros((t, seqs.len(), f));
    for (b, s) in seqs.iter().enumerate() {
        out.index_axis_mut(Axis(1), b).assign(s);
    }
    out
}
