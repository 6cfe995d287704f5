//! Analytic equivalence of Core Caddy programs.
//!
//! Both sides are brought into a canonical form: affine transforms are pushed
//! down to the leaves as accumulated matrices (sound because every affine map
//! used here is invertible), each primitive becomes its unit form under a
//! scale, Union and Intersection chains flatten into multisets, and
//! Difference stays ordered. The forms are then compared entry by entry
//! within a tolerance.

use std::cmp::Ordering;

use thiserror::Error;

use super::{AffineKind, AffineMatrix, BinopKind, Expr, PrimKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error("scale component {0} is degenerate (below the tolerance)")]
    DegenerateScale(f64),
    #[error("not a Core Caddy expression: {0}")]
    NotCore(String),
    #[error("rotation by {0} degrees is not representable in this scalar type")]
    InexactRotation(f64),
    #[error("non-finite literal {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalCsg<T> {
    Leaf { kind: PrimKind, matrix: AffineMatrix<T> },
    Union(Vec<CanonicalCsg<T>>),
    Intersection(Vec<CanonicalCsg<T>>),
    Difference(Box<CanonicalCsg<T>>, Box<CanonicalCsg<T>>),
}

fn scalar<T: Scalar>(v: f64) -> Result<T, EquivError> {
    T::from_literal(v).ok_or(EquivError::NonFinite(v))
}

fn literal3<T: Scalar>(e: &Expr) -> Result<[T; 3], EquivError> {
    match e.as_literal_vec().as_deref() {
        Some(&[x, y, z]) => Ok([scalar(x)?, scalar(y)?, scalar(z)?]),
        _ => Err(EquivError::NotCore(format!("expected a literal 3-vector, found {e}"))),
    }
}

fn prim_params(kind: PrimKind, p: &Expr) -> Result<Vec<f64>, EquivError> {
    let params = match p {
        Expr::Num(v) => vec![*v],
        _ => p.as_literal_vec().unwrap_or_default(),
    };
    if params.len() != kind.param_len() {
        return Err(EquivError::NotCore(format!("malformed {} parameters {p}", kind.name())));
    }
    Ok(params)
}

struct Canonicalizer<'a, T> {
    eps: &'a T,
}

impl<T: Scalar> Canonicalizer<'_, T> {
    fn affine(&self, kind: AffineKind, params: &Expr) -> Result<AffineMatrix<T>, EquivError> {
        let v = literal3::<T>(params)?;
        match kind {
            AffineKind::Translate => Ok(AffineMatrix::translation(v)),
            AffineKind::Scale => {
                for s in &v {
                    if s.is_zero() || s.abs() < *self.eps {
                        return Err(EquivError::DegenerateScale(s.to_real()));
                    }
                }
                Ok(AffineMatrix::scaling(v))
            }
            AffineKind::Rotate => {
                let angles = v.clone();
                AffineMatrix::rotation_degrees(v).ok_or_else(|| {
                    let bad = angles.iter().find(|a| a.sin_cos_degrees().is_none()).unwrap_or(&angles[0]);
                    EquivError::InexactRotation(bad.to_real())
                })
            }
            AffineKind::TranslateSpherical => Err(EquivError::NotCore("TranslateSpherical".into())),
        }
    }

    fn go(&self, e: &Expr, m: &AffineMatrix<T>) -> Result<CanonicalCsg<T>, EquivError> {
        match e {
            Expr::Prim(kind, p) => {
                let s = kind.scale_of(&prim_params(*kind, p)?);
                let unit = AffineMatrix::scaling([scalar(s[0])?, scalar(s[1])?, scalar(s[2])?]);
                Ok(CanonicalCsg::Leaf { kind: *kind, matrix: m * &unit })
            }
            Expr::Affine(kind, p, c) => {
                let a = self.affine(*kind, p)?;
                self.go(c, &(m * &a))
            }
            Expr::Binop(kind, a, b) => {
                let a = self.go(a, m)?;
                let b = self.go(b, m)?;
                Ok(match kind {
                    BinopKind::Difference => CanonicalCsg::Difference(Box::new(a), Box::new(b)),
                    BinopKind::Union => CanonicalCsg::Union(splice(a, b, |c| match c {
                        CanonicalCsg::Union(xs) => Ok(xs),
                        other => Err(other),
                    })),
                    BinopKind::Intersection => CanonicalCsg::Intersection(splice(a, b, |c| match c {
                        CanonicalCsg::Intersection(xs) => Ok(xs),
                        other => Err(other),
                    })),
                })
            }
            other => Err(EquivError::NotCore(other.to_op().0.to_string())),
        }
    }
}

fn splice<T: Scalar>(
    a: CanonicalCsg<T>,
    b: CanonicalCsg<T>,
    same: impl Fn(CanonicalCsg<T>) -> Result<Vec<CanonicalCsg<T>>, CanonicalCsg<T>>,
) -> Vec<CanonicalCsg<T>> {
    let mut out = Vec::new();
    for x in [a, b] {
        match same(x) {
            Ok(xs) => out.extend(xs),
            Err(x) => out.push(x),
        }
    }
    out.sort_by(|x, y| x.sort_key().partial_cmp(&y.sort_key()).unwrap_or(Ordering::Equal));
    out
}

impl<T: Scalar> CanonicalCsg<T> {
    /// Ordering key: variant tag, primitive kind and matrix entries rounded to
    /// six decimals.
    fn sort_key(&self) -> Vec<f64> {
        match self {
            CanonicalCsg::Leaf { kind, matrix } => {
                let mut k = vec![0.0, *kind as u8 as f64];
                k.extend(matrix.entries().map(|v| (v.to_real() * 1e6).round() / 1e6));
                k
            }
            CanonicalCsg::Union(xs) | CanonicalCsg::Intersection(xs) => {
                let tag = if matches!(self, CanonicalCsg::Union(_)) { 1.0 } else { 2.0 };
                let mut k = vec![tag, xs.len() as f64];
                xs.iter().for_each(|x| k.extend(x.sort_key()));
                k
            }
            CanonicalCsg::Difference(a, b) => {
                let mut k = vec![3.0];
                k.extend(a.sort_key());
                k.extend(b.sort_key());
                k
            }
        }
    }

    /// Structural comparison with per-entry tolerance; multisets are matched
    /// greedily in key order.
    pub fn approx_eq(&self, other: &Self, eps: &T) -> bool {
        match (self, other) {
            (CanonicalCsg::Leaf { kind: k1, matrix: m1 }, CanonicalCsg::Leaf { kind: k2, matrix: m2 }) => {
                k1 == k2 && m1.approx_eq(m2, eps)
            }
            (CanonicalCsg::Union(xs), CanonicalCsg::Union(ys))
            | (CanonicalCsg::Intersection(xs), CanonicalCsg::Intersection(ys)) => {
                if xs.len() != ys.len() {
                    return false;
                }
                let mut used = vec![false; ys.len()];
                xs.iter().all(|x| {
                    let hit = ys.iter().enumerate().position(|(j, y)| !used[j] && x.approx_eq(y, eps));
                    hit.map(|j| used[j] = true).is_some()
                })
            }
            (CanonicalCsg::Difference(a1, b1), CanonicalCsg::Difference(a2, b2)) => {
                a1.approx_eq(a2, eps) && b1.approx_eq(b2, eps)
            }
            _ => false,
        }
    }

    /// Number of primitive leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            CanonicalCsg::Leaf { .. } => 1,
            CanonicalCsg::Union(xs) | CanonicalCsg::Intersection(xs) => xs.iter().map(Self::leaf_count).sum(),
            CanonicalCsg::Difference(a, b) => a.leaf_count() + b.leaf_count(),
        }
    }
}

/// Canonical form of a Core Caddy expression. Scales with a component whose
/// magnitude is below `eps` (or exactly zero) are rejected.
pub fn canonicalize<T: Scalar>(e: &Expr, eps: &T) -> Result<CanonicalCsg<T>, EquivError> {
    Canonicalizer { eps }.go(e, &AffineMatrix::identity())
}

/// Equivalence in an arbitrary scalar type; with exact rationals and
/// `eps = 0` the comparison is exact.
pub fn semantic_equiv_in<T: Scalar>(a: &Expr, b: &Expr, eps: &T) -> Result<bool, EquivError> {
    let ca = canonicalize(a, eps)?;
    let cb = canonicalize(b, eps)?;
    Ok(ca.approx_eq(&cb, eps))
}

/// Equivalence of two Core Caddy programs in double precision.
pub fn semantic_equiv(a: &Expr, b: &Expr, eps: f64) -> Result<bool, EquivError> {
    semantic_equiv_in::<f64>(a, b, &eps)
}
