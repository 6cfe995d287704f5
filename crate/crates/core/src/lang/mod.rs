//! The Caddy language family.
//!
//! Core Caddy is flat CSG: primitives, affine transforms and set operations.
//! Caddy adds list operators (`List`, `Concat`, `Fold`, `Tabulate`, `Map2`,
//! `Repeat`) and variables bound by `Tabulate`. Extended Caddy further adds
//! the inverse transformations (`Sort`/`Unsort`, `Part`/`Unpart`,
//! `Spherical`/`Unspherical`), which only ever live inside the e-graph and are
//! never extracted.

mod cost;
mod equiv;
mod eval;
mod geometry;
mod syntax;

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::round_sig;

pub use cost::{cost, Cost};
pub use equiv::{canonicalize, semantic_equiv, semantic_equiv_in, CanonicalCsg, EquivError};
pub use eval::{eval_to_core, free_vars, substitute, to_cartesian, to_spherical, EvalError};
pub use geometry::AffineMatrix;
pub use syntax::{parse, pretty, print, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    /// Applies the operator; `None` on division by zero.
    pub fn apply(self, a: f64, b: f64) -> Option<f64> {
        let v = match self {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => {
                if b == 0.0 {
                    return None;
                }
                a / b
            }
        };
        Some(round_sig(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AffineKind {
    Translate,
    Rotate,
    Scale,
    TranslateSpherical,
}

impl AffineKind {
    pub const ALL: [AffineKind; 4] = [
        AffineKind::Translate,
        AffineKind::Rotate,
        AffineKind::Scale,
        AffineKind::TranslateSpherical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AffineKind::Translate => "Translate",
            AffineKind::Rotate => "Rotate",
            AffineKind::Scale => "Scale",
            AffineKind::TranslateSpherical => "TranslateSpherical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinopKind {
    Union,
    Difference,
    Intersection,
}

impl BinopKind {
    pub const ALL: [BinopKind; 3] = [BinopKind::Union, BinopKind::Difference, BinopKind::Intersection];

    pub fn name(self) -> &'static str {
        match self {
            BinopKind::Union => "Union",
            BinopKind::Difference => "Difference",
            BinopKind::Intersection => "Intersection",
        }
    }

    /// Union and Intersection are associative and commutative.
    pub fn is_ac(self) -> bool {
        !matches!(self, BinopKind::Difference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrimKind {
    Cuboid,
    Sphere,
    Cylinder,
    HexPrism,
}

impl PrimKind {
    pub const ALL: [PrimKind; 4] = [PrimKind::Cuboid, PrimKind::Sphere, PrimKind::Cylinder, PrimKind::HexPrism];

    pub fn name(self) -> &'static str {
        match self {
            PrimKind::Cuboid => "Cuboid",
            PrimKind::Sphere => "Sphere",
            PrimKind::Cylinder => "Cylinder",
            PrimKind::HexPrism => "HexPrism",
        }
    }

    /// Number of numeric parameters: 3 for a cuboid, 1 for a sphere, 2
    /// (height, radius) otherwise.
    pub fn param_len(self) -> usize {
        match self {
            PrimKind::Cuboid => 3,
            PrimKind::Sphere => 1,
            PrimKind::Cylinder | PrimKind::HexPrism => 2,
        }
    }

    /// Per-axis scale that maps the unit primitive onto one with `params`.
    pub fn scale_of(self, params: &[f64]) -> [f64; 3] {
        match self {
            PrimKind::Cuboid => [params[0], params[1], params[2]],
            PrimKind::Sphere => [params[0]; 3],
            PrimKind::Cylinder | PrimKind::HexPrism => [params[1], params[1], params[0]],
        }
    }
}

/// A `Tabulate` loop variable and its (positive) bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Binding {
    pub var: String,
    pub bound: u32,
}

impl Binding {
    pub fn new(var: impl Into<String>, bound: u32) -> Self {
        Binding { var: var.into(), bound }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("permutation {0:?} is not a bijection on 0..{len}", len = .0.len())]
    NotAPermutation(Vec<usize>),
    #[error("partitioning must consist of positive lengths, got {0:?}")]
    EmptyPart(Vec<usize>),
}

/// A zero-based gather sequence: `Sort p l` yields `l[p[0]], l[p[1]], ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(indices: Vec<usize>) -> Result<Self, IndexError> {
        let mut seen = vec![false; indices.len()];
        for &i in &indices {
            if i >= seen.len() || seen[i] {
                return Err(IndexError::NotAPermutation(indices));
            }
            seen[i] = true;
        }
        Ok(Permutation(indices))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &i)| k == i)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (k, &i) in self.0.iter().enumerate() {
            inv[i] = k;
        }
        Permutation(inv)
    }

    /// `out[k] = items[p[k]]`.
    pub fn gather<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.0.iter().map(|&i| items[i].clone()).collect()
    }

    /// Inverse of [`gather`](Self::gather): `out[p[k]] = items[k]`.
    pub fn scatter<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.inverse().gather(items)
    }
}

/// Sublist lengths; all positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partitioning(Vec<usize>);

impl Partitioning {
    pub fn new(lengths: Vec<usize>) -> Result<Self, IndexError> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(IndexError::EmptyPart(lengths));
        }
        Ok(Partitioning(lengths))
    }

    pub fn lengths(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Start offset of each sublist.
    pub fn offsets(&self) -> Vec<usize> {
        self.0
            .iter()
            .scan(0, |acc, &l| {
                let start = *acc;
                *acc += l;
                Some(start)
            })
            .collect()
    }

    pub fn split<T: Clone>(&self, items: &[T]) -> Option<Vec<Vec<T>>> {
        if items.len() != self.total() {
            return None;
        }
        Some(
            self.offsets()
                .into_iter()
                .zip(&self.0)
                .map(|(start, &len)| items[start..start + len].to_vec())
                .collect(),
        )
    }
}

/// Tree-form Caddy, Core Caddy, and Extended Caddy.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Vec2(Box<[Expr; 2]>),
    Vec3(Box<[Expr; 3]>),
    /// A primitive applied to its parameter (a Vec3 for cuboids, a number for
    /// spheres, a Vec2 `[height, radius]` for cylinders and hex prisms).
    Prim(PrimKind, Box<Expr>),
    Affine(AffineKind, Box<Expr>, Box<Expr>),
    Binop(BinopKind, Box<Expr>, Box<Expr>),
    Fold(BinopKind, Box<Expr>),
    List(Vec<Expr>),
    Concat(Vec<Expr>),
    Tabulate(Vec<Binding>, Box<Expr>),
    Map2(AffineKind, Box<Expr>, Box<Expr>),
    Repeat(u32, Box<Expr>),
    Sort(Permutation, Box<Expr>),
    Unsort(Permutation, Box<Expr>),
    Part(Partitioning, Box<Expr>),
    Unpart(Partitioning, Vec<Expr>),
    Spherical(u32, Box<Expr>, Box<Expr>),
    Unspherical(u32, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Expr {
        Expr::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn vec2(a: Expr, b: Expr) -> Expr {
        Expr::Vec2(Box::new([a, b]))
    }

    pub fn vec3(a: Expr, b: Expr, c: Expr) -> Expr {
        Expr::Vec3(Box::new([a, b, c]))
    }

    /// A literal vector.
    pub fn v3(x: f64, y: f64, z: f64) -> Expr {
        Expr::vec3(Expr::Num(x), Expr::Num(y), Expr::Num(z))
    }

    pub fn v2(a: f64, b: f64) -> Expr {
        Expr::vec2(Expr::Num(a), Expr::Num(b))
    }

    pub fn prim(kind: PrimKind, param: Expr) -> Expr {
        Expr::Prim(kind, Box::new(param))
    }

    pub fn cuboid(x: f64, y: f64, z: f64) -> Expr {
        Expr::prim(PrimKind::Cuboid, Expr::v3(x, y, z))
    }

    pub fn sphere(r: f64) -> Expr {
        Expr::prim(PrimKind::Sphere, Expr::Num(r))
    }

    pub fn cylinder(h: f64, r: f64) -> Expr {
        Expr::prim(PrimKind::Cylinder, Expr::v2(h, r))
    }

    pub fn affine(kind: AffineKind, params: Expr, child: Expr) -> Expr {
        Expr::Affine(kind, Box::new(params), Box::new(child))
    }

    pub fn binop(kind: BinopKind, a: Expr, b: Expr) -> Expr {
        Expr::Binop(kind, Box::new(a), Box::new(b))
    }

    pub fn fold(kind: BinopKind, list: Expr) -> Expr {
        Expr::Fold(kind, Box::new(list))
    }

    pub fn tabulate(bindings: Vec<Binding>, body: Expr) -> Expr {
        Expr::Tabulate(bindings, Box::new(body))
    }

    pub fn map2(kind: AffineKind, params: Expr, cads: Expr) -> Expr {
        Expr::Map2(kind, Box::new(params), Box::new(cads))
    }

    pub fn repeat(n: u32, item: Expr) -> Expr {
        Expr::Repeat(n, Box::new(item))
    }

    /// Left-associated chain `(op (op a b) c) ...`; `None` for an empty input.
    pub fn chain(kind: BinopKind, items: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        items.into_iter().reduce(|acc, e| Expr::binop(kind, acc, e))
    }

    /// Splits the expression into its operator and children, in the order the
    /// e-graph stores them.
    pub fn to_op(&self) -> (Op, Vec<&Expr>) {
        use Expr::*;
        match self {
            Num(v) => (Op::Num(crate::lang::Num::new(*v)), vec![]),
            Var(name) => (Op::Var(name.clone()), vec![]),
            Arith(op, a, b) => (Op::Arith(*op), vec![a, b]),
            Vec2(v) => (Op::Vec2, v.iter().collect()),
            Vec3(v) => (Op::Vec3, v.iter().collect()),
            Prim(k, p) => (Op::Prim(*k), vec![p]),
            Affine(k, p, c) => (Op::Affine(*k), vec![p, c]),
            Binop(k, a, b) => (Op::Binop(*k), vec![a, b]),
            Fold(k, l) => (Op::Fold(*k), vec![l]),
            List(xs) => (Op::List, xs.iter().collect()),
            Concat(xs) => (Op::Concat, xs.iter().collect()),
            Tabulate(bs, body) => (Op::Tabulate(bs.clone()), vec![body]),
            Map2(k, p, c) => (Op::Map2(*k), vec![p, c]),
            Repeat(n, x) => (Op::Repeat(*n), vec![x]),
            Sort(p, l) => (Op::Sort(p.clone()), vec![l]),
            Unsort(p, l) => (Op::Unsort(p.clone()), vec![l]),
            Part(p, l) => (Op::Part(p.clone()), vec![l]),
            Unpart(p, ls) => (Op::Unpart(p.clone()), ls.iter().collect()),
            Spherical(n, c, l) => (Op::Spherical(*n), vec![c, l]),
            Unspherical(n, c, l) => (Op::Unspherical(*n), vec![c, l]),
        }
    }

    /// Inverse of [`to_op`](Self::to_op). Panics on an arity mismatch, which
    /// would be a bug in the caller.
    pub fn from_op(op: Op, children: Vec<Expr>) -> Expr {
        let mut it = children.into_iter();
        let mut next = || Box::new(it.next().expect("operator arity"));
        match op {
            Op::Num(n) => Expr::Num(n.get()),
            Op::Var(name) => Expr::Var(name),
            Op::Arith(o) => Expr::Arith(o, next(), next()),
            Op::Vec2 => Expr::Vec2(Box::new([*next(), *next()])),
            Op::Vec3 => Expr::Vec3(Box::new([*next(), *next(), *next()])),
            Op::Prim(k) => Expr::Prim(k, next()),
            Op::Affine(k) => Expr::Affine(k, next(), next()),
            Op::Binop(k) => Expr::Binop(k, next(), next()),
            Op::Fold(k) => Expr::Fold(k, next()),
            Op::Tabulate(bs) => Expr::Tabulate(bs, next()),
            Op::Map2(k) => Expr::Map2(k, next(), next()),
            Op::Repeat(n) => Expr::Repeat(n, next()),
            Op::Sort(p) => Expr::Sort(p, next()),
            Op::Unsort(p) => Expr::Unsort(p, next()),
            Op::Part(p) => Expr::Part(p, next()),
            Op::Spherical(n) => Expr::Spherical(n, next(), next()),
            Op::Unspherical(n) => Expr::Unspherical(n, next(), next()),
            Op::List => Expr::List(it.collect()),
            Op::Concat => Expr::Concat(it.collect()),
            Op::Unpart(p) => Expr::Unpart(p, it.collect()),
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        self.to_op().1
    }

    /// True for the flat CSG fragment: numbers, vectors, primitives,
    /// Translate/Rotate/Scale, and binary set operations.
    pub fn is_core(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Vec2(v) => v.iter().all(|c| matches!(c, Expr::Num(_))),
            Expr::Vec3(v) => v.iter().all(|c| matches!(c, Expr::Num(_))),
            Expr::Prim(_, p) => p.is_core(),
            Expr::Affine(k, p, c) => *k != AffineKind::TranslateSpherical && p.is_core() && c.is_core(),
            Expr::Binop(_, a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    pub fn contains_inverse(&self) -> bool {
        self.to_op().0.is_inverse() || self.children().into_iter().any(Expr::contains_inverse)
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Components of a literal Vec2/Vec3.
    pub fn as_literal_vec(&self) -> Option<Vec<f64>> {
        match self {
            Expr::Vec2(v) => v.iter().map(Expr::as_num).collect(),
            Expr::Vec3(v) => v.iter().map(Expr::as_num).collect(),
            _ => None,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// A numeric literal as stored in the e-graph: rounded to 12 significant
/// digits so that equal values hashcons together.
#[derive(Debug, Clone, Copy)]
pub struct Num(f64);

impl Num {
    pub fn new(v: f64) -> Num {
        Num(round_sig(v))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Num {}

impl Hash for Num {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Num {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// An operator with its non-child payload; the node label of both `Expr`
/// trees and e-graph nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Num(Num),
    Var(String),
    Arith(ArithOp),
    Vec2,
    Vec3,
    Prim(PrimKind),
    Affine(AffineKind),
    Binop(BinopKind),
    Fold(BinopKind),
    List,
    Concat,
    Tabulate(Vec<Binding>),
    Map2(AffineKind),
    Repeat(u32),
    Sort(Permutation),
    Unsort(Permutation),
    Part(Partitioning),
    Unpart(Partitioning),
    Spherical(u32),
    Unspherical(u32),
}

/// Coarse value category of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Num,
    Vector,
    Cad,
    List,
}

impl Op {
    pub fn num(v: f64) -> Op {
        Op::Num(Num::new(v))
    }

    /// Extended-Caddy inverse transformation forms.
    pub fn is_inverse(&self) -> bool {
        matches!(
            self,
            Op::Sort(_) | Op::Unsort(_) | Op::Part(_) | Op::Unpart(_) | Op::Spherical(_) | Op::Unspherical(_)
        )
    }

    pub fn is_variadic(&self) -> bool {
        matches!(self, Op::List | Op::Concat | Op::Unpart(_))
    }

    pub fn category(&self) -> Category {
        match self {
            Op::Num(_) | Op::Var(_) | Op::Arith(_) => Category::Num,
            Op::Vec2 | Op::Vec3 => Category::Vector,
            Op::Prim(_) | Op::Affine(_) | Op::Binop(_) | Op::Fold(_) => Category::Cad,
            _ => Category::List,
        }
    }

    /// Same constructor, ignoring payload.
    pub fn same_shape(&self, other: &Op) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    pub fn affine_kind(&self) -> Option<AffineKind> {
        match self {
            Op::Affine(k) | Op::Map2(k) => Some(*k),
            _ => None,
        }
    }

    pub fn binop_kind(&self) -> Option<BinopKind> {
        match self {
            Op::Binop(k) | Op::Fold(k) => Some(*k),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Op::Num(n) => Some(n.get()),
            _ => None,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        match self {
            Op::Num(n) => write!(f, "{}", n.get()),
            Op::Var(v) => f.write_str(v),
            Op::Arith(o) => f.write_str(o.symbol()),
            Op::Vec2 => f.write_str("Vec2"),
            Op::Vec3 => f.write_str("Vec3"),
            Op::Prim(k) => f.write_str(k.name()),
            Op::Affine(k) => f.write_str(k.name()),
            Op::Binop(k) => f.write_str(k.name()),
            Op::Fold(k) => write!(f, "Fold {}", k.name()),
            Op::List => f.write_str("List"),
            Op::Concat => f.write_str("Concat"),
            Op::Tabulate(bs) => {
                f.write_str("Tabulate")?;
                for b in bs {
                    write!(f, " ({} {})", b.var, b.bound)?;
                }
                Ok(())
            }
            Op::Map2(k) => write!(f, "Map2 {}", k.name()),
            Op::Repeat(n) => write!(f, "Repeat {n}"),
            Op::Sort(p) => write!(f, "Sort ({})", join(p.indices())),
            Op::Unsort(p) => write!(f, "Unsort ({})", join(p.indices())),
            Op::Part(p) => write!(f, "Part ({})", join(p.lengths())),
            Op::Unpart(p) => write!(f, "Unpart ({})", join(p.lengths())),
            Op::Spherical(n) => write!(f, "Spherical {n}"),
            Op::Unspherical(n) => write!(f, "Unspherical {n}"),
        }
    }
}
