//! Thin wrappers over rustfft for trigonometric sums on uniform grids.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Values `Σ_n c_n e^{i n θ_j}` at `θ_j = 2πj/m`, `j = 0..m`.
///
/// Frequencies are folded modulo `m`, which is exact at the grid points for
/// any bandwidth.
pub fn synthesize<I>(terms: I, m: usize) -> Vec<Complex64>
where
    I: IntoIterator<Item = (i64, Complex64)>,
{
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let mm = m as i64;
    for (n, c) in terms {
        buf[n.rem_euclid(mm) as usize] += c;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m).process(&mut buf));
    buf
}

/// Same as [`synthesize`] with a pre-folded buffer of length `m`.
pub fn synthesize_folded(mut buf: Vec<Complex64>) -> Vec<Complex64> {
    let m = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m).process(&mut buf));
    buf
}

/// Discrete Fourier coefficients `(1/m) Σ_j v_j e^{-2πi jk/m}`, `k = 0..m`.
pub fn analyze(values: &[Complex64]) -> Vec<Complex64> {
    let m = values.len();
    let mut buf = values.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m).process(&mut buf));
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Signed frequency of DFT bin `k` for length `m` (Nyquist maps to `+m/2`).
pub fn signed_frequency(k: usize, m: usize) -> i64 {
    if k <= m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}
