use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::Serialize;
use statrs::function::erf::erfc;

use super::{GridSpec, Window};
use crate::numerics::Signal;
use crate::{Error, Result};

/// Generator samples at offsets `-origin..taps.len() - origin` grid steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    taps: Vec<f64>,
    origin: usize,
    step: f64,
}

impl Kernel {
    pub fn new(taps: Vec<f64>, origin: usize, step: f64) -> Result<Self> {
        if origin >= taps.len() {
            return Err(Error::InvalidArgument(format!(
                "kernel origin {origin} outside {} taps",
                taps.len()
            )));
        }
        Ok(Self { taps, origin, step })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Offsets in grid steps of the first and last tap.
    pub fn extent(&self) -> (isize, isize) {
        let lo = -(self.origin as isize);
        (lo, lo + self.taps.len() as isize - 1)
    }

    /// Value at `offset` grid steps from the center, zero outside the taps.
    pub fn at(&self, offset: isize) -> f64 {
        let j = offset + self.origin as isize;
        if j < 0 {
            return 0.0;
        }
        self.taps.get(j as usize).copied().unwrap_or(0.0)
    }

    /// Riemann sum of the taps.
    pub fn integral(&self) -> f64 {
        self.taps.iter().sum::<f64>() * self.step
    }
}

/// Discrete convolution `a * b` scaled by `scale`, origins added.
fn convolve(a: &Kernel, b: &Kernel, scale: f64) -> Kernel {
    let mut out = vec![0.0; a.taps.len() + b.taps.len() - 1];
    for (i, &x) in a.taps.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.taps.iter().enumerate() {
            out[i + j] += x * y * scale;
        }
    }
    Kernel {
        taps: out,
        origin: a.origin + b.origin,
        step: a.step,
    }
}

fn check_taps_fit(needed: usize, grid: &GridSpec, what: &str) -> Result<()> {
    if needed > grid.len() {
        return Err(Error::GridTooNarrow(format!(
            "{what} needs {needed} samples, grid has {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Fraction of `|x|^2` outside `[t_min, t_max]` for a Gaussian whose squared
/// magnitude has variance `sigma`.
fn gaussian_tail(sigma: f64, t_min: f64, t_max: f64) -> f64 {
    let s = (2.0 * sigma).sqrt();
    0.5 * erfc(t_max / s) + 0.5 * erfc(-t_min / s)
}

fn gaussian_value(sigma: f64, t: f64) -> f64 {
    use std::f64::consts::PI;
    (2.0 * PI * sigma).powf(-0.25) * (-t * t / (4.0 * sigma)).exp()
}

/// Unit-energy Gaussian `(2 pi sigma)^(-1/4) exp(-t^2 / (4 sigma))`, so that
/// `|x|^2` is a normal density with variance `sigma`.
pub fn gaussian_signal(sigma: f64, grid: &GridSpec) -> Result<Signal> {
    grid.validate()?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let tail = gaussian_tail(sigma, grid.t_min, grid.t_max);
    if tail >= 1e-8 {
        return Err(Error::GridTooNarrow(format!(
            "Gaussian with sigma {sigma} loses {tail:.2e} of its energy outside [{}, {}]",
            grid.t_min, grid.t_max
        )));
    }
    Ok(Signal::from_iterator(
        grid.len(),
        grid.times().into_iter().map(|t| gaussian_value(sigma, t)),
    ))
}

/// The Gaussian of [`gaussian_signal`] as a generator, truncated where the
/// tail energy drops below `1e-12`.
pub fn gaussian_kernel(sigma: f64, grid: &GridSpec) -> Result<Kernel> {
    let dt = grid.step();
    let mut half = 1usize;
    while gaussian_tail(sigma, -(half as f64) * dt, half as f64 * dt) >= 1e-12 {
        half *= 2;
    }
    check_taps_fit(2 * half + 1, grid, "Gaussian generator")?;
    let taps = (-(half as isize)..=half as isize)
        .map(|i| gaussian_value(sigma, i as f64 * dt))
        .collect();
    Kernel::new(taps, half, dt)
}

/// Centered B-spline of order 0 to 3 on the grid, dilated by the period so
/// that its integral is `T`.
///
/// Order 0 is the box on `[-T/2, T/2)`. Higher orders are discrete
/// convolutions scaled by `step / T`. Odd orders are recentered by a whole
/// number of steps; order 2 uses one box with half-weight edges so it stays
/// symmetric.
pub fn bspline(order: u32, grid: &GridSpec) -> Result<Kernel> {
    grid.validate()?;
    if order > 3 {
        return Err(Error::UnsupportedOrder(order));
    }
    let m = grid.samples_per_period;
    let dt = grid.step();
    let scale = dt / grid.period;

    // offsets -m/2 .. m - m/2 - 1 cover [-T/2, T/2)
    let half_open = Kernel::new(vec![1.0; m], m / 2, dt)?;
    if order == 0 {
        return Ok(half_open);
    }
    // an (order + 1)-fold product of even-length boxes is centered half a step off
    if order == 2 && m.is_multiple_of(2) {
        let hat = recentered(convolve(&half_open, &half_open, scale));
        let mut edge = vec![1.0; m + 1];
        edge[0] = 0.5;
        edge[m] = 0.5;
        let symmetric_box = Kernel::new(edge, m / 2, dt)?;
        return Ok(convolve(&hat, &symmetric_box, scale));
    }
    let mut k = half_open.clone();
    for _ in 0..order {
        k = convolve(&k, &half_open, scale);
    }
    Ok(recentered(k))
}

/// Moves the origin to the middle tap of an odd-length symmetric kernel.
fn recentered(k: Kernel) -> Kernel {
    let mid = (k.taps.len() - 1) / 2;
    Kernel { origin: mid, ..k }
}

/// Closed-form centered cardinal B-spline of order 0 to 3 at `u` periods.
pub fn bspline_value(order: u32, u: f64) -> f64 {
    let a = u.abs();
    match order {
        0 => {
            if (-0.5..0.5).contains(&u) {
                1.0
            } else {
                0.0
            }
        }
        1 => (1.0 - a).max(0.0),
        2 => {
            if a < 0.5 {
                0.75 - a * a
            } else if a < 1.5 {
                0.5 * (1.5 - a).powi(2)
            } else {
                0.0
            }
        }
        3 => {
            if a < 1.0 {
                2.0 / 3.0 - a * a + 0.5 * a * a * a
            } else if a < 2.0 {
                (2.0 - a).powi(3) / 6.0
            } else {
                0.0
            }
        }
        _ => f64::NAN,
    }
}

/// Magnitude response summary of a low-pass generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterResponse {
    /// Peak-to-trough magnitude variation over `|f| <= 0.9 cutoff`, in dB.
    pub passband_ripple_db: f64,
    /// `-20 log10` of the peak magnitude over `|f| >= 1.1 cutoff`; `None` when
    /// that band lies above Nyquist.
    pub stopband_attenuation_db: Option<f64>,
    /// `sum(taps) * step / T` before normalization.
    pub raw_dc_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lowpass {
    pub kernel: Kernel,
    pub response: FilterResponse,
}

/// Zero-phase windowed sinc approximating `T * 2 fc * sinc(2 fc t)`, with
/// `2 * half_support + 1` taps, normalized to unit DC gain.
pub fn lowpass_generator(
    cutoff: f64,
    half_support: usize,
    window: Window,
    grid: &GridSpec,
) -> Result<Lowpass> {
    grid.validate()?;
    if !(cutoff.is_finite() && cutoff > 0.0 && cutoff <= grid.nyquist() * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} outside (0, {}]",
            grid.nyquist()
        )));
    }
    check_taps_fit(2 * half_support + 1, grid, "low-pass generator")?;
    let dt = grid.step();
    // cycles per sample, at most 1/2
    let fc = (cutoff * dt).min(0.5);
    let h = half_support as isize;
    let mut taps: Vec<f64> = (-h..=h)
        .map(|i| {
            let x = 2.0 * fc * i as f64;
            let sinc = if i == 0 {
                1.0
            } else {
                (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
            };
            grid.period / dt * 2.0 * fc * sinc * window.weight(i, half_support)
        })
        .collect();
    // exact symmetry regardless of rounding in sin
    for i in 0..half_support {
        taps[2 * half_support - i] = taps[i];
    }
    let raw_dc_gain = taps.iter().sum::<f64>() * dt / grid.period;
    for t in &mut taps {
        *t /= raw_dc_gain;
    }
    let kernel = Kernel::new(taps, half_support, dt)?;
    let response = filter_response(&kernel, cutoff, grid, raw_dc_gain);
    Ok(Lowpass { kernel, response })
}

fn filter_response(k: &Kernel, cutoff: f64, grid: &GridSpec, raw_dc_gain: f64) -> FilterResponse {
    let n = (4 * k.taps.len()).max(4096).next_power_of_two();
    let gain = k.step / grid.period;
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    for (slot, &t) in buf.iter_mut().zip(&k.taps) {
        *slot = Complex64::new(t * gain, 0.0);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * k.step);
    let (mut pmax, mut pmin, mut smax) = (0.0f64, f64::INFINITY, None::<f64>);
    for (j, h) in buf.iter().take(n / 2 + 1).enumerate() {
        let f = j as f64 * df;
        let mag = h.norm();
        if f <= 0.9 * cutoff {
            pmax = pmax.max(mag);
            pmin = pmin.min(mag);
        } else if f >= 1.1 * cutoff {
            smax = Some(smax.map_or(mag, |s| s.max(mag)));
        }
    }
    FilterResponse {
        passband_ripple_db: 20.0 * (pmax / pmin).log10(),
        stopband_attenuation_db: smax.map(|s| -20.0 * s.max(f64::MIN_POSITIVE).log10()),
        raw_dc_gain,
    }
}

/// A seeded, unit-energy test signal with energy well above the sampling
/// rate: random tones up to three times the Nyquist rate of the sampling
/// period, under a raised-cosine envelope that vanishes at the grid edges.
pub fn synthetic_wideband(seed: u64, grid: &GridSpec) -> Result<Signal> {
    grid.validate()?;
    use std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tones: Vec<(f64, f64, f64)> = (0..24)
        .map(|_| {
            let amp = rng.random_range(0.2..1.0);
            let freq = rng.random_range(0.0..3.0 * PI / grid.period);
            let phase = rng.random_range(0.0..2.0 * PI);
            (amp, freq, phase)
        })
        .collect();
    let (t0, span) = (grid.t_min, grid.t_max - grid.t_min);
    let mut x = Signal::from_iterator(
        grid.len(),
        grid.times().into_iter().map(|t| {
            let u = (t - t0) / span;
            let envelope = 0.5 - 0.5 * (2.0 * PI * u).cos();
            envelope * tones.iter().map(|&(a, f, p)| a * (f * t + p).cos()).sum::<f64>()
        }),
    );
    let norm = grid.ip().norm(&x);
    if norm == 0.0 {
        return Err(Error::ZeroSubspace);
    }
    x /= norm;
    Ok(x)
}
