use super::subspace::{orthogonal_complement, SubspaceBasis};
use super::{singular_values, DenseMatrix};
use crate::error::{Error, Result};

/// A subspace given either by its own basis or as the orthogonal complement
/// of one. Complements are never materialized unless no shortcut applies.
#[derive(Debug, Clone, Copy)]
pub enum SubspaceRef<'a> {
    Span(&'a SubspaceBasis),
    Complement(&'a SubspaceBasis),
}

impl<'a> SubspaceRef<'a> {
    fn basis(&self) -> &'a SubspaceBasis {
        match *self {
            SubspaceRef::Span(b) | SubspaceRef::Complement(b) => b,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SubspaceRef::Span(b) => b.dim(),
            SubspaceRef::Complement(b) => b.ambient_dim() - b.dim(),
        }
    }
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `(smallest, largest)` singular value of `m`, with `smallest = 0` when the
/// matrix has more columns than rows.
fn extreme_singular_values(m: &DenseMatrix) -> Result<(f64, f64)> {
    let s = singular_values(m)?;
    if s.is_empty() {
        return Ok((0.0, 0.0));
    }
    let smin = if m.ncols() > m.nrows() {
        0.0
    } else {
        s[s.len() - 1]
    };
    Ok((smin, s[0]))
}

/// Cross-Gram `<q2_j, q1_i>` and the weighted residual `sqrt(w) (I - P_2) Q1`,
/// whose singular values are the cosines and sines of the principal angles.
fn cross_terms(v1: &SubspaceBasis, v2: &SubspaceBasis) -> (DenseMatrix, DenseMatrix) {
    let ip = v1.ip();
    let g = ip.gram(v2.basis(), v1.basis());
    let resid = (v1.basis() - v2.basis() * &g) * ip.weight().sqrt();
    (g, resid)
}

fn span_span(v1: &SubspaceBasis, v2: &SubspaceBasis) -> Result<(f64, f64)> {
    let (g, resid) = cross_terms(v1, v2);
    let cos = if v1.dim() > v2.dim() {
        0.0
    } else {
        extreme_singular_values(&g)?.0
    };
    let sin = extreme_singular_values(&resid)?.1;
    Ok((clamp_unit(cos), clamp_unit(sin)))
}

/// `(V1, V2^perp)`: `P_{V2^perp} x` is the residual, `P_{V2} x` the Gram part.
fn span_complement(v1: &SubspaceBasis, v2: &SubspaceBasis) -> Result<(f64, f64)> {
    if v2.is_empty() {
        return Ok((1.0, 0.0));
    }
    let (g, resid) = cross_terms(v1, v2);
    let cos = extreme_singular_values(&resid)?.0;
    let sin = extreme_singular_values(&g)?.1;
    Ok((clamp_unit(cos), clamp_unit(sin)))
}

fn reject_empty(r: SubspaceRef<'_>) -> Result<()> {
    if r.dim() == 0 {
        Err(Error::ZeroSubspace)
    } else {
        Ok(())
    }
}

/// Cosine and sine of the maximal principal angle from `v1` to `v2`:
/// `cos = inf ||P_{v2} x|| / ||x||` and `sin = sup ||P_{v2^perp} x|| / ||x||`
/// over nonzero `x` in `v1`.
pub fn angle_cos_sin(v1: SubspaceRef<'_>, v2: SubspaceRef<'_>) -> Result<(f64, f64)> {
    v1.basis().check_same_space(v2.basis())?;
    reject_empty(v1)?;
    reject_empty(v2)?;
    let n = v1.basis().ambient_dim();
    match (v1, v2) {
        (SubspaceRef::Span(a), SubspaceRef::Span(b)) => span_span(a, b),
        (SubspaceRef::Span(a), SubspaceRef::Complement(b)) => span_complement(a, b),
        (SubspaceRef::Complement(a), SubspaceRef::Complement(b)) => {
            // (A^perp, B^perp) = (B, A)
            span_span(b, a)
        }
        (SubspaceRef::Complement(a), SubspaceRef::Span(b)) => {
            if a.dim() + b.dim() < n {
                // A^perp is larger than B and meets B^perp nontrivially.
                Ok((0.0, 1.0))
            } else {
                let a_perp = orthogonal_complement(a, n)?;
                span_span(&a_perp, b)
            }
        }
    }
}

/// `cos(v1, v2)`; zero whenever `dim v1 > dim v2`.
pub fn angle_cos(v1: &SubspaceBasis, v2: &SubspaceBasis) -> Result<f64> {
    angle_cos_sin(SubspaceRef::Span(v1), SubspaceRef::Span(v2)).map(|(c, _)| c)
}

/// `sin(v1, v2)`, computed from the residual so small angles keep full
/// relative accuracy.
pub fn angle_sin(v1: &SubspaceBasis, v2: &SubspaceBasis) -> Result<f64> {
    angle_cos_sin(SubspaceRef::Span(v1), SubspaceRef::Span(v2)).map(|(_, s)| s)
}
