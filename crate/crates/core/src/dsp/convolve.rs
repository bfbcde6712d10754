use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Below this many multiply-adds the direct sum is used.
const DIRECT_LIMIT: usize = 1 << 16;

/// Full linear convolution, `len(a) + len(b) - 1` samples.
///
/// Leading and trailing zeros of either operand are stripped before the
/// product is formed, so output samples that are structurally zero stay
/// exactly zero even on the FFT path.
pub fn convolve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySignal);
    }
    let out_len = a.len() + b.len() - 1;
    let mut out = vec![0.0; out_len];
    let (Some((a0, a)), Some((b0, b))) = (trim(a), trim(b)) else {
        return Ok(out);
    };
    let part = if a.len().saturating_mul(b.len()) <= DIRECT_LIMIT {
        direct(a, b)
    } else {
        fft_convolve(a, b)
    };
    out[a0 + b0..a0 + b0 + part.len()].copy_from_slice(&part);
    Ok(out)
}

fn trim(x: &[f64]) -> Option<(usize, &[f64])> {
    let first = x.iter().position(|v| *v != 0.0)?;
    let last = x.iter().rposition(|v| *v != 0.0)?;
    Some((first, &x[first..=last]))
}

pub(crate) fn direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(n, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(n, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Shifts `x` right by `delay` samples, growing the buffer.
pub fn delay_signal(x: &[f64], delay: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + delay];
    out[delay..].copy_from_slice(x);
    out
}
