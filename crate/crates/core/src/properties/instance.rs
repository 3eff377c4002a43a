use rand::Rng;
use rand_distr::StandardNormal;

use crate::gsrp::Frame;
use crate::numerics::{direct_sum_ratio, DenseMatrix, GridInnerProduct, Signal, DIRECT_SUM_THRESHOLD};

/// A random `(S, W, A)` triple on a small grid with `dim S = dim A`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub ip: GridInnerProduct,
    pub n: usize,
    pub s: Frame,
    pub w: Frame,
    pub a: Frame,
}

/// Shape constraints for [`random_instance`].
#[derive(Debug, Clone, Copy, Default)]
pub struct InstanceShape {
    /// Force `dim W = dim S` and `W (+) S^perp = H`.
    pub square_w: bool,
    /// Force `W` inside `S`.
    pub w_inside_s: bool,
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> Signal {
    Signal::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// `dim` independent columns, sometimes followed by redundant combinations.
pub fn random_frame_matrix<R: Rng>(rng: &mut R, n: usize, dim: usize) -> DenseMatrix {
    let base = gaussian_matrix(rng, n, dim);
    if rng.random_bool(0.3) {
        let extra = rng.random_range(1..=2);
        let mix = gaussian_matrix(rng, dim, extra);
        let mut m = DenseMatrix::zeros(n, dim + extra);
        m.columns_mut(0, dim).copy_from(&base);
        m.columns_mut(dim, extra).copy_from(&(&base * mix));
        m
    } else {
        base
    }
}

fn frame<R: Rng>(rng: &mut R, n: usize, dim: usize, ip: GridInnerProduct) -> Frame {
    loop {
        if let Ok(f) = Frame::new(random_frame_matrix(rng, n, dim), ip) {
            if f.rank() == dim {
                return f;
            }
        }
    }
}

fn direct_sum_ok(range: &Frame, sampling: &Frame) -> bool {
    direct_sum_ratio(range.basis(), sampling.basis()).is_ok_and(|r| r >= DIRECT_SUM_THRESHOLD)
}

/// Grid size 6..=12, step in `[0.05, 2]`, `dim S = dim A < n`, and
/// `A (+) S^perp = H`.
pub fn random_instance<R: Rng>(rng: &mut R, shape: InstanceShape) -> Instance {
    loop {
        let n = rng.random_range(6..=12);
        let ip = GridInnerProduct::new(rng.random_range(0.05..2.0)).expect("positive step");
        let k = rng.random_range(1..n);
        let s = frame(rng, n, k, ip);
        let a = frame(rng, n, k, ip);
        if !direct_sum_ok(&a, &s) {
            continue;
        }
        let w = if shape.w_inside_s {
            let kw = rng.random_range(1..=k);
            let coeffs = gaussian_matrix(rng, s.len(), kw);
            match Frame::new(s.synthesis() * coeffs, ip) {
                Ok(w) if w.rank() == kw => w,
                _ => continue,
            }
        } else if shape.square_w {
            frame(rng, n, k, ip)
        } else {
            let kw = rng.random_range(1..n);
            frame(rng, n, kw, ip)
        };
        if shape.square_w && !direct_sum_ok(&w, &s) {
            continue;
        }
        return Instance { ip, n, s, w, a };
    }
}

impl Instance {
    pub fn random_signal<R: Rng>(&self, rng: &mut R) -> Signal {
        gaussian_vector(rng, self.n)
    }

    /// Random element of `span(A)`.
    pub fn random_prior_signal<R: Rng>(&self, rng: &mut R) -> Signal {
        self.a.synthesis() * gaussian_vector(rng, self.a.len())
    }
}
