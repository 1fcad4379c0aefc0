use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Orthogonal weight matrix of shape `rows × cols`, row-major, scaled by `gain`.
///
/// A Gaussian matrix with the larger dimension as its row count is reduced by
/// QR; the signs of R's diagonal are folded back into Q so the result is
/// uniformly distributed over the orthogonal group.
pub fn orthogonal_init<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    assert!(rows >= 1 && cols >= 1, "orthogonal_init needs a non-empty shape");
    let (tall, short) = (rows.max(cols), rows.min(cols));
    let a = DMatrix::<f64>::from_fn(tall, short, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..short {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let q = if rows < cols { q.transpose() } else { q };
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(gain * q[(i, j)]);
        }
    }
    out
}
