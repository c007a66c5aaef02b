//! Minimal DFT kernels shared by the spectral metrics and the denoising
//! filters. Forward convention: X_v = sum_k x_k exp(-j 2 pi v k / N).
//!
//! Power-of-two lengths go through an iterative radix-2 transform; other
//! lengths fall back to the direct O(N^2) sum, which is plenty at the path
//! lengths this crate works with.

use num_complex::Complex64;
use std::f64::consts::PI;

fn bit_reverse_permute(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
}

/// In-place radix-2 transform. `sign` is -1 for the forward DFT and +1 for
/// the (unnormalized) inverse. Length must be a power of two.
fn fft_radix2(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n < 2 {
        return;
    }
    bit_reverse_permute(buf);
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

/// Direct O(N^2) transform for arbitrary lengths.
fn dft_direct(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (v, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, x) in input.iter().enumerate() {
            let ang = sign * 2.0 * PI * (v as f64) * (k as f64) / n as f64;
            acc += x * Complex64::new(ang.cos(), ang.sin());
        }
        *slot = acc;
    }
    out
}

/// Forward DFT of a complex sequence.
pub(crate) fn forward(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    if n.is_power_of_two() {
        let mut buf = input.to_vec();
        fft_radix2(&mut buf, -1.0);
        buf
    } else {
        dft_direct(input, -1.0)
    }
}

/// Inverse DFT, normalized by 1/N.
pub(crate) fn inverse(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out = if n.is_power_of_two() {
        let mut buf = input.to_vec();
        fft_radix2(&mut buf, 1.0);
        buf
    } else {
        dft_direct(input, 1.0)
    };
    let scale = 1.0 / n as f64;
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Forward DFT of a real sequence.
pub(crate) fn forward_real(input: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&buf)
}
