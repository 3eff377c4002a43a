//! Uniform time grids, generators sampled on them, and shift-invariant frames.

mod generators;
mod io;
mod shift;
mod spectrum;

use serde::{Deserialize, Serialize};

use crate::numerics::GridInnerProduct;
use crate::{Error, Result};

pub use generators::{
    bspline, bspline_value, gaussian_kernel, gaussian_signal, lowpass_generator, synthetic_wideband,
    FilterResponse, Kernel, Lowpass,
};
pub use io::{
    read_signal, read_signal_binary, read_signal_text, write_signal_binary, write_signal_text, StoredSignal,
};
pub use rustfft::num_complex::Complex64;
pub use shift::{
    shift_indices, shift_invariant_angle_cos, shift_invariant_frame, ShiftPolicy, SpectralAngle, SpectralGrid,
};
pub use spectrum::{energy_fraction_below, energy_fraction_below_with};

/// A uniform grid `t_i = t_min + i * step` covering `[t_min, t_max]`, with
/// `step = period / samples_per_period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub samples_per_period: usize,
    /// Sampling period `T` in seconds.
    pub period: f64,
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, samples_per_period: usize, period: f64) -> Result<Self> {
        let g = Self {
            t_min,
            t_max,
            samples_per_period,
            period,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min < self.t_max) {
            return bad(format!(
                "grid needs t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            ));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if self.samples_per_period < 8 {
            return bad(format!(
                "samples_per_period must be at least 8, got {}",
                self.samples_per_period
            ));
        }
        let steps = (self.t_max - self.t_min) / self.step();
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad(format!("step {} does not divide the span evenly", self.step()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.period / self.samples_per_period as f64
    }

    pub fn len(&self) -> usize {
        ((self.t_max - self.t_min) / self.step()).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.step()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    /// Inner product weighted by the grid step.
    pub fn ip(&self) -> GridInnerProduct {
        GridInnerProduct::new(self.step()).expect("validated grid has a positive step")
    }

    /// Highest representable frequency, in cycles per second.
    pub fn nyquist(&self) -> f64 {
        0.5 / self.step()
    }

    /// Index of `t` on the grid, if `t` is within rounding of a grid point.
    pub fn index_of(&self, t: f64) -> Option<isize> {
        let pos = (t - self.t_min) / self.step();
        let r = pos.round();
        ((pos - r).abs() < 1e-6).then_some(r as isize)
    }
}

/// Taper applied to truncated sinc taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
    Hamming,
    Blackman,
}

impl Window {
    /// Weight at offset `i` of a window spanning `-half..=half`.
    pub fn weight(self, i: isize, half: usize) -> f64 {
        // x in [-1, 1]; the window stays positive at the outermost taps
        let x = i as f64 / (half as f64 + 1.0);
        let c = (std::f64::consts::PI * x).cos();
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 0.5 + 0.5 * c,
            Window::Hamming => 0.54 + 0.46 * c,
            Window::Blackman => 0.42 + 0.5 * c + 0.08 * (2.0 * std::f64::consts::PI * x).cos(),
        }
    }
}

/// A generator function, sampled on a grid by [`GeneratorSpec::kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Unit-energy Gaussian whose squared magnitude has variance `sigma` (s^2).
    Gaussian { sigma: f64 },
    /// Centered B-spline of the given order, dilated to the sampling period.
    Bspline { order: u32 },
    /// Windowed sinc with `cutoff` in cycles per second and `half_support`
    /// taps on each side of the center.
    Lowpass {
        cutoff: f64,
        half_support: usize,
        #[serde(default)]
        window: Window,
    },
}

impl GeneratorSpec {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        match *self {
            GeneratorSpec::Gaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => Err(
                Error::InvalidArgument(format!("sigma must be positive, got {sigma}")),
            ),
            GeneratorSpec::Bspline { order } if order > 3 => Err(Error::UnsupportedOrder(order)),
            GeneratorSpec::Lowpass { cutoff, .. }
                if !(cutoff.is_finite() && cutoff > 0.0 && cutoff <= grid.nyquist() * (1.0 + 1e-12)) =>
            {
                Err(Error::InvalidArgument(format!(
                    "cutoff {cutoff} outside (0, {}] (grid Nyquist)",
                    grid.nyquist()
                )))
            }
            _ => Ok(()),
        }
    }

    /// Samples of the generator centered at `t = 0`.
    pub fn kernel(&self, grid: &GridSpec) -> Result<Kernel> {
        self.validate(grid)?;
        match *self {
            GeneratorSpec::Gaussian { sigma } => gaussian_kernel(sigma, grid),
            GeneratorSpec::Bspline { order } => bspline(order, grid),
            GeneratorSpec::Lowpass {
                cutoff,
                half_support,
                window,
            } => Ok(lowpass_generator(cutoff, half_support, window, grid)?.kernel),
        }
    }

    /// Continuous-time Fourier transform up to a constant factor, as a
    /// function of frequency in radians per sampling period. Windowed sinc
    /// generators are treated as ideal low-pass filters.
    pub fn spectrum(&self, period: f64) -> impl Fn(f64) -> f64 + Clone + Send + Sync + 'static {
        let spec = *self;
        move |w: f64| match spec {
            GeneratorSpec::Gaussian { sigma } => (-sigma * w * w / (period * period)).exp(),
            GeneratorSpec::Bspline { order } => {
                let h = 0.5 * w;
                let s = if h == 0.0 { 1.0 } else { h.sin() / h };
                s.powi(order as i32 + 1)
            }
            GeneratorSpec::Lowpass { cutoff, .. } => {
                let edge = 2.0 * std::f64::consts::PI * cutoff * period;
                if w.abs() <= edge * (1.0 + 1e-12) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
