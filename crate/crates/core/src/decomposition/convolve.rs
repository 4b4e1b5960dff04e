use num_complex::Complex64;
use rustfft::FftPlanner;

/// Signals up to this length are convolved directly.
pub const DIRECT_LIMIT: usize = 1 << 14;

/// Discrete convolution `out[i] = dt·Σ_k kernel[k]·signal[i + center − k]`,
/// zero outside `signal`; output has the length of `signal`.
pub fn convolve(signal: &[Complex64], kernel: &[Complex64], center: usize, dt: f64) -> Vec<Complex64> {
    if signal.len() <= DIRECT_LIMIT {
        convolve_direct(signal, kernel, center, dt)
    } else {
        convolve_fft(signal, kernel, center, dt)
    }
}

pub fn convolve_direct(signal: &[Complex64], kernel: &[Complex64], center: usize, dt: f64) -> Vec<Complex64> {
    let n = signal.len() as isize;
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, kv) in kernel.iter().enumerate() {
                let j = i + center as isize - k as isize;
                if j >= 0 && j < n {
                    acc += kv * signal[j as usize];
                }
            }
            acc * dt
        })
        .collect()
}

pub fn convolve_fft(signal: &[Complex64], kernel: &[Complex64], center: usize, dt: f64) -> Vec<Complex64> {
    let full = signal.len() + kernel.len() - 1;
    let size = full.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    a[..signal.len()].copy_from_slice(signal);
    b[..kernel.len()].copy_from_slice(kernel);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let norm = dt / size as f64;
    (0..signal.len()).map(|i| a[i + center] * norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_and_fft_agree() {
        let sig: Vec<Complex64> = (0..300).map(|i| Complex64::new((i as f64 * 0.1).sin(), (i as f64 * 0.03).cos())).collect();
        let ker: Vec<Complex64> = (0..41).map(|k| Complex64::new((-((k as f64 - 20.0) / 6.0).powi(2)).exp(), 0.0)).collect();
        let a = convolve_direct(&sig, &ker, 20, 0.1);
        let b = convolve_fft(&sig, &ker, 20, 0.1);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{}", err);
    }

    #[test]
    fn delta_kernel_is_identity() {
        let sig: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let ker = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert_eq!(convolve_direct(&sig, &ker, 1, 1.0), sig);
    }
}
