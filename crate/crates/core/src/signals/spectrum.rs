use rustfft::{num_complex::Complex64, FftPlanner};

use super::GridSpec;
use crate::numerics::{ensure_finite_vec, Signal};
use crate::{Error, Result};

/// Fraction of the energy of `x` at angular frequencies `|w| <= omega_c`
/// (radians per second). The samples are zero-padded to at least eight times
/// their length so that frequency bins are fine enough to resolve the cutoff.
pub fn energy_fraction_below(x: &Signal, omega_c: f64, grid: &GridSpec) -> Result<f64> {
    energy_fraction_below_with(x, omega_c, grid, (8 * x.len()).next_power_of_two())
}

/// [`energy_fraction_below`] with an explicit transform length `fft_len`,
/// which must be at least the signal length. With `fft_len == x.len()` and
/// `omega_c == 0` this is the energy of the mean alone.
pub fn energy_fraction_below_with(x: &Signal, omega_c: f64, grid: &GridSpec, fft_len: usize) -> Result<f64> {
    grid.validate()?;
    if x.len() != grid.len() {
        return Err(Error::GridMismatch {
            expected: grid.len(),
            got: x.len(),
        });
    }
    ensure_finite_vec(x)?;
    if omega_c.is_nan() || omega_c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cutoff {omega_c} must be nonnegative"
        )));
    }
    if fft_len < x.len() {
        return Err(Error::InvalidArgument(format!(
            "transform length {fft_len} is shorter than the signal ({})",
            x.len()
        )));
    }
    let n = fft_len;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (slot, &v) in buf.iter_mut().zip(x.iter()) {
        slot.re = v;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // Parseval: sum |X_k|^2 = n sum |x_i|^2, so the ratio needs no rescaling
    let bin = std::f64::consts::TAU / (n as f64 * grid.step());
    let (mut below, mut total) = (0.0, 0.0);
    for (k, c) in buf.iter().enumerate() {
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let e = c.norm_sqr();
        total += e;
        if (signed * bin).abs() <= omega_c * (1.0 + 1e-12) {
            below += e;
        }
    }
    if total == 0.0 {
        return Err(Error::ZeroSubspace);
    }
    Ok(below / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::gaussian_signal;

    #[test]
    fn nyquist_cutoff_keeps_everything() {
        let g = GridSpec::new(-4.0, 4.0, 16, 1.0).unwrap();
        let x = Signal::from_fn(g.len(), |i, _| ((i * 7919) % 13) as f64 - 6.0);
        let f = energy_fraction_below(&x, std::f64::consts::TAU * g.nyquist(), &g).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_cutoff_keeps_the_mean() {
        let g = GridSpec::new(-4.0, 4.0, 16, 1.0).unwrap();
        let n = g.len();
        let x = Signal::from_fn(n, |i, _| 2.0 + (i as f64).sin());
        let mean = x.sum() / n as f64;
        let expect = mean * mean * n as f64 / x.norm_squared();
        let f = energy_fraction_below_with(&x, 0.0, &g, n).unwrap();
        assert!((f - expect).abs() < 1e-12);
        let padded = energy_fraction_below(&x, 0.0, &g).unwrap();
        assert!(padded < f);
    }

    #[test]
    fn gaussian_energy_below_pi() {
        let g = GridSpec::new(-8.0, 8.0, 64, 1.0).unwrap();
        let x = gaussian_signal(0.09, &g).unwrap();
        let f = energy_fraction_below(&x, std::f64::consts::PI, &g).unwrap();
        assert!((f - 0.94).abs() < 0.01, "{f}");
        // closed form: erf(pi sqrt(2 sigma))
        let exact = statrs::function::erf::erf(std::f64::consts::PI * 0.18f64.sqrt());
        assert!((f - exact).abs() < 2e-3, "{f} vs {exact}");
    }

    #[test]
    fn length_must_match() {
        let g = GridSpec::new(-1.0, 1.0, 8, 1.0).unwrap();
        let x = Signal::zeros(3);
        assert!(matches!(
            energy_fraction_below(&x, 1.0, &g),
            Err(Error::GridMismatch { .. })
        ));
        let y = Signal::zeros(g.len());
        assert!(energy_fraction_below_with(&y, 1.0, &g, 4).is_err());
    }
}
