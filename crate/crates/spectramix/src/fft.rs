//! Unitary 1-D FFT on power-of-two lengths, backed by cached rustfft plans.
//! Forward convention: X_k = N^{-1/2} sum_j x_j e^{-2 pi i jk/N}.

use crate::{Error, Result, C64};
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FftDirection {
    Forward,
    Inverse,
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)>> =
        OnceLock::new();
    let cell = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cell.lock().unwrap();
    let (planner, cache) = &mut *guard;
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// Unnormalized in-place transform for internal hot loops. The caller owns the
/// 1/N bookkeeping. Panics on non-power-of-two lengths.
pub(crate) fn fft_raw(values: &mut [C64], forward: bool) {
    let n = values.len();
    assert!(n.is_power_of_two(), "fft length {n} not a power of two");
    let fft = plan(n, forward);
    thread_local! {
        static SCRATCH: std::cell::RefCell<Vec<C64>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    SCRATCH.with(|s| {
        let mut scratch = s.borrow_mut();
        scratch.resize(fft.get_inplace_scratch_len(), C64::new(0.0, 0.0));
        fft.process_with_scratch(values, &mut scratch);
    });
}

/// Unitary in-place transform; `inverse(forward(x)) = x` to machine precision.
pub fn fft_1d(values: &mut [C64], direction: FftDirection) -> Result<()> {
    let n = values.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Contract(format!("fft length {n} must be a nonzero power of two")));
    }
    fft_raw(values, direction == FftDirection::Forward);
    let scale = 1.0 / (n as f64).sqrt();
    for v in values {
        *v *= scale;
    }
    Ok(())
}
