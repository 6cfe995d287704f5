//! Arithmetic solvers that turn lists of literal vectors into closed forms,
//! plus the list partitioner used to split heterogeneous lists.

mod fit;
mod partition;

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::Float;

pub use fit::{fit_degree, fit_lowest, Poly};
pub use partition::{partition_list, primitive_fingerprint, Grouping};

use crate::lang::{to_spherical, ArithOp, Binding, Expr, Permutation};
use crate::scalar::round_sig;

/// Name of the loop variable introduced by the solvers.
pub const INDEX_VAR: &str = "i";

/// Smallest list the solvers will attempt; shorter lists never get cheaper.
pub const MIN_SOLVE_LEN: usize = 3;

/// `c2*i*i + c1*i + c0` with zero terms omitted, unit coefficients elided
/// and negative trailing terms written as subtractions.
pub fn poly_expr(coeffs: [f64; 3], var: &str) -> Expr {
    let i = || Expr::var(var);
    let monomial = |power: usize, c: f64| -> Expr {
        let base = match power {
            0 => return Expr::Num(c),
            1 => i(),
            _ => Expr::arith(ArithOp::Mul, i(), i()),
        };
        if c == 1.0 {
            return base;
        }
        match base {
            Expr::Arith(ArithOp::Mul, a, b) => Expr::arith(ArithOp::Mul, Expr::arith(ArithOp::Mul, Expr::Num(c), *a), *b),
            base => Expr::arith(ArithOp::Mul, Expr::Num(c), base),
        }
    };
    let mut out: Option<Expr> = None;
    for power in [2, 1, 0] {
        let c = round_sig(coeffs[power]);
        if c == 0.0 {
            continue;
        }
        out = Some(match out {
            None => monomial(power, c),
            Some(acc) if c < 0.0 => Expr::arith(ArithOp::Sub, acc, monomial(power, -c)),
            Some(acc) => Expr::arith(ArithOp::Add, acc, monomial(power, c)),
        });
    }
    out.unwrap_or(Expr::Num(0.0))
}

fn vector_expr(components: Vec<Expr>) -> Option<Expr> {
    let mut it = components.into_iter();
    match (it.next(), it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None, None) => Some(Expr::vec2(a, b)),
        (Some(a), Some(b), Some(c), None) => Some(Expr::vec3(a, b, c)),
        _ => None,
    }
}

fn to_f64<T: Float>(x: T) -> f64 {
    x.to_f64().expect("float converts to f64")
}

/// Fits every coordinate of `points` (all of dimension 2 or 3) with a
/// polynomial in the index, returning `Tabulate (i n) [f_x, f_y, ...]`.
/// Declines for fewer than three points, for mixed dimensions, and when some
/// coordinate has no fit within `eps`.
pub fn solve_list<T: Float>(points: &[Vec<T>], eps: T) -> Option<Expr> {
    let n = points.len();
    let dim = points.first()?.len();
    if n < MIN_SOLVE_LEN || !(2..=3).contains(&dim) || points.iter().any(|p| p.len() != dim) {
        return None;
    }
    let mut components = Vec::with_capacity(dim);
    for axis in 0..dim {
        let ys: Vec<T> = points.iter().map(|p| p[axis]).collect();
        let poly = fit_lowest(&ys, eps)?;
        components.push(poly_expr(poly.coeffs.map(to_f64), INDEX_VAR));
    }
    let body = vector_expr(components)?;
    Some(Expr::tabulate(vec![Binding::new(INDEX_VAR, u32::try_from(n).ok()?)], body))
}

type PointOrder<T> = fn(&[T], &[T]) -> std::cmp::Ordering;

/// Orderings tried by [`solve_list_sorted`], in order.
fn sort_keys<T: Float>() -> [PointOrder<T>; 5] {
    fn cmp<T: Float>(a: T, b: T) -> std::cmp::Ordering {
        a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
    }
    fn at<T: Float>(p: &[T], k: usize) -> T {
        p.get(k).copied().unwrap_or_else(T::zero)
    }
    [
        |a, b| cmp(at(a, 0), at(b, 0)).then(cmp(at(a, 1), at(b, 1))).then(cmp(at(a, 2), at(b, 2))),
        |a, b| cmp(at(a, 2), at(b, 2)).then(cmp(at(a, 1), at(b, 1))).then(cmp(at(a, 0), at(b, 0))),
        |a, b| cmp(at(a, 0), at(b, 0)),
        |a, b| cmp(at(a, 1), at(b, 1)),
        |a, b| cmp(at(a, 2), at(b, 2)),
    ]
}

/// Finds a gather permutation `p` under which the sorted points have a
/// closed form: `Sort p points = Tabulate ...`. Tries lexicographic (x,y,z),
/// lexicographic (z,y,x), then each single axis, with stable sorting.
/// Identity orders are skipped, since [`solve_list`] already covers them.
pub fn solve_list_sorted<T: Float>(points: &[Vec<T>], eps: T) -> Option<(Permutation, Expr)> {
    let mut tried: Vec<Vec<usize>> = Vec::new();
    for key in sort_keys::<T>() {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| key(&points[a], &points[b]));
        if order.iter().enumerate().all(|(k, &i)| k == i) || tried.contains(&order) {
            continue;
        }
        let sorted: Vec<Vec<T>> = order.iter().map(|&i| points[i].clone()).collect();
        if let Some(e) = solve_list(&sorted, eps) {
            return Some((Permutation::new(order).expect("sort order is a permutation"), e));
        }
        tried.push(order);
    }
    None
}

/// Expresses 3-D points as `Unspherical n center L` where `L` is a closed
/// form (possibly behind an `Unsort`) of their spherical coordinates about
/// `center`. Candidate centers are the origin, then the centroid. Declines
/// for coincident points.
pub fn solve_spherical<T: Float>(points: &[Vec<T>], eps: T) -> Option<Expr> {
    let n = points.len();
    if n < MIN_SOLVE_LEN || points.iter().any(|p| p.len() != 3) {
        return None;
    }
    let pts: Vec<[f64; 3]> = points.iter().map(|p| [to_f64(p[0]), to_f64(p[1]), to_f64(p[2])]).collect();
    // Coincident points have no angles to fit; they are a `Repeat`.
    if pts.iter().all(|p| (0..3).all(|k| (p[k] - pts[0][k]).abs() <= to_f64(eps))) {
        return None;
    }
    let mut centroid = [0.0; 3];
    for p in &pts {
        for k in 0..3 {
            centroid[k] += p[k] / n as f64;
        }
    }
    // Snap float noise (e.g. the 1e-16 left over from summing sines).
    let centroid = centroid.map(|c| if (c - c.round()).abs() < 1e-9 { c.round() + 0.0 } else { round_sig(c) });
    let eps = to_f64(eps);
    for center in [[0.0; 3], centroid] {
        let rel: Vec<[f64; 3]> = pts.iter().map(|p| [p[0] - center[0], p[1] - center[1], p[2] - center[2]]).collect();
        if rel.iter().all(|r| r.iter().all(|&x| x.abs() <= eps)) {
            continue;
        }
        let sph: Vec<Vec<f64>> = rel.iter().map(|r| to_spherical(*r).to_vec()).collect();
        let inner = solve_list(&sph, eps)
            .or_else(|| solve_list_sorted(&sph, eps).map(|(p, e)| Expr::Unsort(p, Box::new(e))));
        if let Some(inner) = inner {
            let c = Expr::v3(center[0], center[1], center[2]);
            return Some(Expr::Unspherical(u32::try_from(n).ok()?, Box::new(c), Box::new(inner)));
        }
    }
    None
}

/// Which solver a cached result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Plain,
    Sorted,
    Spherical,
}

/// A solver and the exact bits of its input vectors.
type CacheKey = (SolverKind, Vec<u64>);

/// Memoises solver outcomes by the exact bits of the input vectors, so that
/// repeated searches over an unchanged list do no numeric work.
#[derive(Debug, Default)]
pub struct SolverCache {
    entries: Mutex<HashMap<CacheKey, Option<Expr>>>,
}

impl SolverCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs the solver of the given kind, or returns its cached result.
    /// Sorted results are returned as `Unsort p (Tabulate ...)`.
    pub fn solve(&self, kind: SolverKind, points: &[Vec<f64>], eps: f64) -> Option<Expr> {
        let mut key_bits: Vec<u64> = Vec::with_capacity(points.len() * 4);
        for p in points {
            key_bits.push(p.len() as u64);
            key_bits.extend(p.iter().map(|x| x.to_bits()));
        }
        let key = (kind, key_bits);
        if let Some(hit) = self.entries.lock().expect("solver cache poisoned").get(&key) {
            return hit.clone();
        }
        let result = match kind {
            SolverKind::Plain => solve_list(points, eps),
            SolverKind::Sorted => solve_list_sorted(points, eps).map(|(p, e)| Expr::Unsort(p, Box::new(e))),
            SolverKind::Spherical => solve_spherical(points, eps),
        };
        self.entries.lock().expect("solver cache poisoned").insert(key, result.clone());
        result
    }
}
