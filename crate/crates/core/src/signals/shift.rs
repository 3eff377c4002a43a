use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridSpec, Kernel};
use crate::gsrp::Frame;
use crate::numerics::DenseMatrix;
use crate::{Error, Result};

/// Which integer shifts `n T` of a generator become frame columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPolicy {
    /// Every shift with a nonzero sample on the grid.
    #[default]
    Support,
    /// Shifts whose center `n T` lies on the grid.
    Centers,
}

/// Grid index of `t = 0`, which need not lie inside the grid but must be
/// a whole number of steps from `t_min`.
fn zero_index(grid: &GridSpec) -> Result<isize> {
    let pos = -grid.t_min / grid.step();
    if (pos - pos.round()).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "t_min {} is not a multiple of the grid step {}",
            grid.t_min,
            grid.step()
        )));
    }
    Ok(pos.round() as isize)
}

/// Shifts `n` selected by `policy`, in increasing order.
pub fn shift_indices(kernel: &Kernel, grid: &GridSpec, policy: ShiftPolicy) -> Result<Vec<i64>> {
    grid.validate()?;
    let z = zero_index(grid)?;
    let m = grid.samples_per_period as isize;
    let last = grid.len() as isize - 1;
    let (lo, hi) = match policy {
        ShiftPolicy::Centers => (
            (-z).div_euclid(m) + isize::from((-z).rem_euclid(m) != 0),
            (last - z).div_euclid(m),
        ),
        ShiftPolicy::Support => {
            let (klo, khi) = kernel.extent();
            // column n covers grid indices z + n m + [klo, khi]
            let lo = (-z - khi).div_euclid(m) - 1;
            let hi = (last - z - klo).div_euclid(m) + 1;
            (lo, hi)
        }
    };
    let shifts: Vec<i64> = (lo..=hi)
        .filter(|&n| match policy {
            ShiftPolicy::Centers => true,
            ShiftPolicy::Support => {
                let c = z + n * m;
                let (klo, khi) = kernel.extent();
                let first = (c + klo).max(0);
                let end = (c + khi).min(last);
                (first..=end).any(|i| kernel.at(i - c) != 0.0)
            }
        })
        .map(|n| n as i64)
        .collect();
    if shifts.is_empty() {
        return Err(Error::GridTooNarrow(
            "no generator shift intersects the grid".into(),
        ));
    }
    Ok(shifts)
}

/// Frame whose columns are the generator shifted by `n T`, truncated at the
/// grid edges.
pub fn shift_invariant_frame(kernel: &Kernel, grid: &GridSpec, policy: ShiftPolicy) -> Result<Frame> {
    if (kernel.step() - grid.step()).abs() > 1e-12 * grid.step() {
        return Err(Error::InvalidArgument(format!(
            "kernel step {} differs from grid step {}",
            kernel.step(),
            grid.step()
        )));
    }
    let shifts = shift_indices(kernel, grid, policy)?;
    let z = zero_index(grid)?;
    let m = grid.samples_per_period as isize;
    let n = grid.len();
    let mut synthesis = DenseMatrix::zeros(n, shifts.len());
    for (col, &s) in shifts.iter().enumerate() {
        let c = z + s as isize * m;
        let (klo, khi) = kernel.extent();
        for i in (c + klo).max(0)..=(c + khi).min(n as isize - 1) {
            synthesis[(i as usize, col)] = kernel.at(i - c);
        }
    }
    Frame::new(synthesis, grid.ip())
}

/// Frequency sampling for [`shift_invariant_angle_cos`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralGrid {
    /// Uniform points on `[0, 2 pi)`.
    pub points: usize,
    /// Alias terms `|n| <= n_alias` in the periodized sums.
    pub n_alias: i64,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        Self {
            points: 8192,
            n_alias: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralAngle {
    pub cos: f64,
    /// Frequency (radians per period) where the infimum was attained.
    pub omega: f64,
    /// Frequencies skipped because a periodized energy vanished there.
    pub skipped: usize,
}

/// Cosine of the angle between two shift-invariant spaces from their
/// generator spectra (frequency in radians per period):
/// `cos^2 = inf_w |sum s*(w + 2 pi n) a(w + 2 pi n)|^2 / (sum |s|^2 sum |a|^2)`.
pub fn shift_invariant_angle_cos<S, A>(s_hat: S, a_hat: A, grid: SpectralGrid) -> Result<SpectralAngle>
where
    S: Fn(f64) -> Complex64,
    A: Fn(f64) -> Complex64,
{
    use std::f64::consts::TAU;
    if grid.points < 4096 || grid.n_alias < 1 {
        return Err(Error::InvalidArgument(format!(
            "spectral grid needs at least 4096 points and one alias term, got {grid:?}"
        )));
    }
    let mut samples = Vec::with_capacity(grid.points);
    let mut peak = 0.0f64;
    for j in 0..grid.points {
        let w = TAU * j as f64 / grid.points as f64;
        let (mut cross, mut es, mut ea) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for n in -grid.n_alias..=grid.n_alias {
            let v = w + TAU * n as f64;
            let (s, a) = (s_hat(v), a_hat(v));
            cross += s.conj() * a;
            es += s.norm_sqr();
            ea += a.norm_sqr();
        }
        peak = peak.max(es).max(ea);
        samples.push((w, cross.norm_sqr(), es, ea));
    }
    let floor = 1e-12 * peak;
    let mut best: Option<(f64, f64)> = None;
    let mut skipped = 0;
    for (w, num, es, ea) in samples {
        if es <= floor || ea <= floor {
            skipped += 1;
            continue;
        }
        let c2 = num / (es * ea);
        if best.is_none_or(|(b, _)| c2 < b) {
            best = Some((c2, w));
        }
    }
    let (c2, omega) = best.ok_or(Error::DegenerateSpectrum)?;
    Ok(SpectralAngle {
        cos: c2.clamp(0.0, 1.0).sqrt(),
        omega,
        skipped,
    })
}
