//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here reuses the library's geometry, canonical forms or
//! union-find: the point-membership oracle has its own rotation matrices,
//! the congruence oracle is a naive fixpoint, and the extraction oracle
//! enumerates every choice of node per class.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use csg_shrink::egraph::{EGraph, ENode, Id};
use csg_shrink::lang::{eval_to_core, semantic_equiv, AffineKind, ArithOp, BinopKind, Cost, Expr, Op, PrimKind};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// The ship's wheel, flat and obfuscated, and its structured form.

pub const SPOKE: &str = "(Translate [1, -0.5, 0] (Cuboid [10, 1, 1]))";

pub fn wheel_flat() -> String {
    let spokes: Vec<String> = (0..6).map(|k| format!("(Rotate [0, 0, {}] {SPOKE})", 60 * k)).collect();
    format!("(Union (Cylinder [1, 5]) (Union {}))", spokes.join(" "))
}

pub fn wheel_obfuscated() -> String {
    [
        "(Union",
        &format!("(Rotate [0, 0, 120] {SPOKE})"),
        "(Scale [10, 1, 1] (Translate [0.1, -0.5, 0] (Cuboid [1, 1, 1])))",
        &format!("(Rotate [0, 0, 300] {SPOKE})"),
        "(Scale [5, 5, 1] (Cylinder [1, 1]))",
        "(Translate [-1, 0.5, 0] (Scale [-1, -1, 1] (Cuboid [10, 1, 1])))",
        &format!("(Rotate [0, 0, 240] {SPOKE})"),
        &format!("(Rotate [0, 0, 60] {SPOKE}))"),
    ]
    .join(" ")
}

pub const WHEEL_STRUCTURED: &str =
    "(Union (Cylinder [1, 5]) (Fold Union (Tabulate (i 6) (Rotate [0, 0, 60*i] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1]))))))";

/// True when `e` has the wheel's structured shape: a cylinder unioned with a
/// fold over `Tabulate (x 6)` of a spoke rotated by `60*x` about z, in
/// either argument order and with any bound-variable name.
pub fn is_wheel_shaped(e: &Expr) -> bool {
    let Expr::Binop(BinopKind::Union, a, b) = e else { return false };
    let (cyl, fold) = match (&**a, &**b) {
        (c @ Expr::Prim(..), f) | (f, c @ Expr::Prim(..)) => (c, f),
        _ => return false,
    };
    if cyl != &csg_shrink::lang::parse("(Cylinder [1, 5])").unwrap() {
        return false;
    }
    let Expr::Fold(BinopKind::Union, tab) = fold else { return false };
    let Expr::Tabulate(bindings, body) = &**tab else { return false };
    let [binding] = bindings.as_slice() else { return false };
    if binding.bound != 6 {
        return false;
    }
    let Expr::Affine(AffineKind::Rotate, params, spoke) = &**body else { return false };
    let Expr::Vec3(ps) = &**params else { return false };
    let var = Expr::var(binding.var.clone());
    let z_ok = ps[2] == Expr::arith(ArithOp::Mul, Expr::Num(60.0), var.clone())
        || ps[2] == Expr::arith(ArithOp::Mul, var, Expr::Num(60.0));
    ps[0] == Expr::Num(0.0) && ps[1] == Expr::Num(0.0) && z_ok && **spoke == csg_shrink::lang::parse(SPOKE).unwrap()
}

// ---------------------------------------------------------------------------
// Point-membership oracle over Core Caddy.

type V3 = [f64; 3];

fn lit3(e: &Expr) -> V3 {
    let v = e.as_literal_vec().expect("literal vector");
    [v[0], v[1], *v.get(2).unwrap_or(&0.0)]
}

fn rot_x(a: f64) -> [[f64; 3]; 3] {
    let (s, c) = a.to_radians().sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

fn rot_y(a: f64) -> [[f64; 3]; 3] {
    let (s, c) = a.to_radians().sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn rot_z(a: f64) -> [[f64; 3]; 3] {
    let (s, c) = a.to_radians().sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn mat_mul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| (0..3).map(|k| a[r][k] * b[k][c]).sum()))
}

fn apply(m: [[f64; 3]; 3], p: V3) -> V3 {
    std::array::from_fn(|r| (0..3).map(|k| m[r][k] * p[k]).sum())
}

fn rotation(angles: V3) -> [[f64; 3]; 3] {
    mat_mul(mat_mul(rot_z(angles[2]), rot_y(angles[1])), rot_x(angles[0]))
}

fn transpose(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[c][r]))
}

fn in_prim(kind: PrimKind, param: &Expr, p: V3) -> bool {
    let [x, y, z] = p;
    match kind {
        PrimKind::Cuboid => {
            let d = lit3(param);
            (0..3).all(|k| p[k] >= d[k].min(0.0) && p[k] <= d[k].max(0.0))
        }
        PrimKind::Sphere => {
            let r = param.as_num().expect("radius");
            x * x + y * y + z * z <= r * r
        }
        PrimKind::Cylinder => {
            let [h, r, _] = lit3(param);
            x * x + y * y <= r * r && z >= 0.0 && z <= h
        }
        PrimKind::HexPrism => {
            let [h, r, _] = lit3(param);
            let s3 = 3f64.sqrt();
            y.abs() <= r * s3 / 2.0 && s3 * x.abs() + y.abs() <= s3 * r && z >= 0.0 && z <= h
        }
    }
}

/// Whether point `p` lies in the solid denoted by Core Caddy `e`.
pub fn contains(e: &Expr, p: V3) -> bool {
    match e {
        Expr::Prim(kind, param) => in_prim(*kind, param, p),
        Expr::Affine(kind, params, child) => {
            let v = lit3(params);
            let q = match kind {
                AffineKind::Translate => [p[0] - v[0], p[1] - v[1], p[2] - v[2]],
                AffineKind::Scale => [p[0] / v[0], p[1] / v[1], p[2] / v[2]],
                AffineKind::Rotate => apply(transpose(rotation(v)), p),
                AffineKind::TranslateSpherical => {
                    let [r, phi, theta] = v;
                    let (sp, cp) = phi.to_radians().sin_cos();
                    let (st, ct) = theta.to_radians().sin_cos();
                    [p[0] - r * st * cp, p[1] - r * st * sp, p[2] - r * ct]
                }
            };
            contains(child, q)
        }
        Expr::Binop(kind, a, b) => {
            let (ia, ib) = (contains(a, p), contains(b, p));
            match kind {
                BinopKind::Union => ia || ib,
                BinopKind::Difference => ia && !ib,
                BinopKind::Intersection => ia && ib,
            }
        }
        other => panic!("not Core Caddy: {other:?}"),
    }
}

/// Axis-aligned box `(lo, hi)` enclosing the solid.
pub fn bounds(e: &Expr) -> (V3, V3) {
    match e {
        Expr::Prim(kind, param) => match kind {
            PrimKind::Cuboid => {
                let d = lit3(param);
                (d.map(|x| x.min(0.0)), d.map(|x| x.max(0.0)))
            }
            PrimKind::Sphere => {
                let r = param.as_num().unwrap().abs();
                ([-r; 3], [r; 3])
            }
            PrimKind::Cylinder | PrimKind::HexPrism => {
                let [h, r, _] = lit3(param);
                ([-r, -r, h.min(0.0)], [r, r, h.max(0.0)])
            }
        },
        Expr::Affine(kind, params, child) => {
            let v = lit3(params);
            let (lo, hi) = bounds(child);
            let corners = (0..8).map(|m| [if m & 1 == 0 { lo[0] } else { hi[0] }, if m & 2 == 0 { lo[1] } else { hi[1] }, if m & 4 == 0 { lo[2] } else { hi[2] }]);
            let moved: Vec<V3> = corners
                .map(|c| match kind {
                    AffineKind::Translate => [c[0] + v[0], c[1] + v[1], c[2] + v[2]],
                    AffineKind::Scale => [c[0] * v[0], c[1] * v[1], c[2] * v[2]],
                    AffineKind::Rotate => apply(rotation(v), c),
                    AffineKind::TranslateSpherical => {
                        let [r, phi, theta] = v;
                        let (sp, cp) = phi.to_radians().sin_cos();
                        let (st, ct) = theta.to_radians().sin_cos();
                        [c[0] + r * st * cp, c[1] + r * st * sp, c[2] + r * ct]
                    }
                })
                .collect();
            let lo = std::array::from_fn(|k| moved.iter().map(|m| m[k]).fold(f64::INFINITY, f64::min));
            let hi = std::array::from_fn(|k| moved.iter().map(|m| m[k]).fold(f64::NEG_INFINITY, f64::max));
            (lo, hi)
        }
        Expr::Binop(_, a, b) => {
            let ((la, ha), (lb, hb)) = (bounds(a), bounds(b));
            (std::array::from_fn(|k| la[k].min(lb[k])), std::array::from_fn(|k| ha[k].max(hb[k])))
        }
        other => panic!("not Core Caddy: {other:?}"),
    }
}

/// Number of points, out of a stratified 20³ sample of the joint bounding
/// box (one random point per cell), where the two solids disagree.
pub fn membership_disagreements(a: &Expr, b: &Expr, seed: u64) -> usize {
    let ((la, ha), (lb, hb)) = (bounds(a), bounds(b));
    let lo: V3 = std::array::from_fn(|k| la[k].min(lb[k]) - 0.5);
    let hi: V3 = std::array::from_fn(|k| ha[k].max(hb[k]) + 0.5);
    let mut rng = rng(seed);
    const N: usize = 20;
    let mut bad = 0;
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let cell = [i, j, k];
                let p: V3 = std::array::from_fn(|d| {
                    let t = (cell[d] as f64 + rng.gen::<f64>()) / N as f64;
                    lo[d] + t * (hi[d] - lo[d])
                });
                if contains(a, p) != contains(b, p) {
                    bad += 1;
                }
            }
        }
    }
    bad
}

// ---------------------------------------------------------------------------
// Value comparison across categories.

/// Structural comparison of evaluated values: numbers and vector literals
/// within `eps`, lists elementwise, solids by `semantic_equiv`.
pub fn core_values_equiv(a: &Expr, b: &Expr, eps: f64) -> bool {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => (x - y).abs() <= eps,
        (Expr::List(xs), Expr::List(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| core_values_equiv(x, y, eps)),
        (Expr::Vec2(_) | Expr::Vec3(_), _) => match (a.as_literal_vec(), b.as_literal_vec()) {
            (Some(u), Some(v)) => u.len() == v.len() && u.iter().zip(&v).all(|(x, y)| (x - y).abs() <= eps),
            _ => false,
        },
        _ => semantic_equiv(a, b, eps).unwrap_or(false),
    }
}

/// Evaluates both closed expressions and compares the results.
pub fn values_equiv(a: &Expr, b: &Expr, eps: f64) -> Result<bool, String> {
    let ea = eval_to_core(a).map_err(|e| format!("before: {e}"))?;
    let eb = eval_to_core(b).map_err(|e| format!("after: {e}"))?;
    Ok(core_values_equiv(&ea, &eb, eps))
}

// ---------------------------------------------------------------------------
// Naive congruence closure.

/// A flat term graph: node `k` has an operator and children that are
/// indices of earlier nodes.
#[derive(Debug, Clone, Default)]
pub struct TermGraph {
    pub nodes: Vec<(Op, Vec<usize>)>,
}

impl TermGraph {
    /// Equivalence classes (as a label per node) generated by `merges`
    /// and closed under congruence, by recomputing to a fixpoint.
    pub fn congruence(&self, merges: &[(usize, usize)]) -> Vec<usize> {
        let n = self.nodes.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn relabel(label: &mut [usize], a: usize, b: usize) {
            let (from, to) = (label[a].max(label[b]), label[a].min(label[b]));
            if from != to {
                label.iter_mut().filter(|l| **l == from).for_each(|l| *l = to);
            }
        }
        for &(a, b) in merges {
            relabel(&mut label, a, b);
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in i + 1..n {
                    if label[i] == label[j] {
                        continue;
                    }
                    let ((oi, ci), (oj, cj)) = (&self.nodes[i], &self.nodes[j]);
                    if oi == oj && ci.len() == cj.len() && ci.iter().zip(cj).all(|(&x, &y)| label[x] == label[y]) {
                        relabel(&mut label, i, j);
                        changed = true;
                    }
                }
            }
            if !changed {
                return label;
            }
        }
    }

    /// Adds every node to `g`, returning the id of each.
    pub fn load(&self, g: &mut EGraph) -> Vec<Id> {
        let mut ids = Vec::with_capacity(self.nodes.len());
        for (op, children) in &self.nodes {
            let node = ENode::new(op.clone(), children.iter().map(|&c| ids[c]).collect());
            ids.push(g.add(node));
        }
        ids
    }
}

/// A random term graph over a small signature: leaves `a`..`d`, binary
/// `+` and `*`, and unary negation spelled as `0 - x`.
pub fn random_term_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> TermGraph {
    let mut t = TermGraph::default();
    let leaves = ["a", "b", "c", "d"];
    let count = rng.gen_range(4..=max_nodes);
    for _ in 0..count {
        let k = t.nodes.len();
        if k < 2 || rng.gen_bool(0.25) {
            t.nodes.push((Op::Var(leaves.choose(rng).unwrap().to_string()), vec![]));
        } else {
            let op = if rng.gen_bool(0.5) { ArithOp::Add } else { ArithOp::Mul };
            t.nodes.push((Op::Arith(op), vec![rng.gen_range(0..k), rng.gen_range(0..k)]));
        }
    }
    t
}

// ---------------------------------------------------------------------------
// Exhaustive extraction.

/// Minimum tree cost at `root` over every assignment of one node to each
/// class, where a node costs `weight(op)` plus its children. Returns `None`
/// when no assignment yields a finite (acyclic) tree.
pub fn min_cost_by_enumeration(g: &EGraph, root: Id, weight: &dyn Fn(&Op) -> u64) -> Option<u64> {
    let classes: Vec<Id> = g.class_ids().collect();
    let index: HashMap<Id, usize> = classes.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let options: Vec<Vec<&ENode>> = classes.iter().map(|&c| g.nodes(c).collect()).collect();
    let mut choice = vec![0usize; classes.len()];
    let mut best: Option<u64> = None;

    fn tree_cost(
        g: &EGraph,
        class: usize,
        index: &HashMap<Id, usize>,
        options: &[Vec<&ENode>],
        choice: &[usize],
        on_path: &mut Vec<bool>,
        weight: &dyn Fn(&Op) -> u64,
    ) -> Option<u64> {
        if on_path[class] {
            return None;
        }
        on_path[class] = true;
        let node = options[class][choice[class]];
        let mut total = weight(&node.op);
        for &c in &node.children {
            let Some(sub) = tree_cost(g, index[&g.find(c)], index, options, choice, on_path, weight) else {
                on_path[class] = false;
                return None;
            };
            total += sub;
        }
        on_path[class] = false;
        Some(total)
    }

    loop {
        let mut on_path = vec![false; classes.len()];
        if let Some(c) = tree_cost(g, index[&g.find(root)], &index, &options, &choice, &mut on_path, weight) {
            best = Some(best.map_or(c, |b| b.min(c)));
        }
        // Odometer increment over the per-class choices.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return best;
            }
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Number of joint choices [`min_cost_by_enumeration`] walks through.
pub fn assignment_count(g: &EGraph) -> u128 {
    g.class_ids().map(|c| g.nodes(c).count() as u128).product()
}

pub fn cost_value(c: Cost) -> Option<u64> {
    c.value()
}

// ---------------------------------------------------------------------------
// Random programs.

fn small_num(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo..=hi) as f64
}

pub fn random_prim(rng: &mut ChaCha8Rng) -> Expr {
    let kind = rng.gen_range(0..4);
    let mut size = || rng.gen_range(1..=200) as f64 / 8.0;
    match kind {
        0 => Expr::cuboid(size(), size(), size()),
        1 => Expr::sphere(size()),
        2 => Expr::cylinder(size(), size()),
        _ => Expr::prim(PrimKind::HexPrism, Expr::v2(size(), size())),
    }
}

pub fn random_affine_params(rng: &mut ChaCha8Rng, kind: AffineKind) -> Expr {
    match kind {
        AffineKind::Translate => Expr::v3(small_num(rng, -5, 5), small_num(rng, -5, 5), small_num(rng, -5, 5)),
        AffineKind::Scale => {
            let mut s = || {
                let v = small_num(rng, 1, 4) / 2.0;
                if rng.gen_bool(0.2) {
                    -v
                } else {
                    v
                }
            };
            Expr::v3(s(), s(), s())
        }
        AffineKind::Rotate => Expr::v3(15.0 * small_num(rng, -6, 6), 15.0 * small_num(rng, -6, 6), 15.0 * small_num(rng, -12, 12)),
        AffineKind::TranslateSpherical => Expr::v3(small_num(rng, 0, 5), 30.0 * small_num(rng, 0, 11), 30.0 * small_num(rng, 0, 6)),
    }
}

/// A random Core Caddy program of bounded depth. Half turns about z and
/// xy-mirrors are over-represented, since they are special to the rules.
pub fn random_core(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_prim(rng);
    }
    match rng.gen_range(0..10) {
        0 => Expr::affine(AffineKind::Rotate, Expr::v3(0.0, 0.0, 180.0), random_core(rng, depth - 1)),
        1 => Expr::affine(AffineKind::Scale, Expr::v3(-1.0, -1.0, 1.0), random_core(rng, depth - 1)),
        2..=5 => {
            let kind = *[AffineKind::Translate, AffineKind::Scale, AffineKind::Rotate].choose(rng).unwrap();
            let params = random_affine_params(rng, kind);
            Expr::affine(kind, params, random_core(rng, depth - 1))
        }
        _ => {
            let kind = *BinopKind::ALL.choose(rng).unwrap();
            Expr::binop(kind, random_core(rng, depth - 1), random_core(rng, depth - 1))
        }
    }
}

/// Replaces some numeric literals by closed arithmetic with the same value.
pub fn with_arithmetic(rng: &mut ChaCha8Rng, e: &Expr) -> Expr {
    match e {
        Expr::Num(v) if rng.gen_bool(0.3) => {
            let k = rng.gen_range(1..=4) as f64;
            match rng.gen_range(0..3) {
                0 => Expr::arith(ArithOp::Add, Expr::Num(v - k), Expr::Num(k)),
                1 => Expr::arith(ArithOp::Sub, Expr::Num(v + k), Expr::Num(k)),
                _ => Expr::arith(ArithOp::Mul, Expr::Num(v / 2.0), Expr::Num(2.0)),
            }
        }
        other => {
            let (op, children) = other.to_op();
            if children.is_empty() {
                return other.clone();
            }
            Expr::from_op(op, children.into_iter().map(|c| with_arithmetic(rng, c)).collect())
        }
    }
}

fn random_list(rng: &mut ChaCha8Rng, n: usize) -> Vec<Expr> {
    (0..n).map(|_| random_core(rng, 2)).collect()
}

fn random_params(rng: &mut ChaCha8Rng, kind: AffineKind, n: usize) -> Vec<Expr> {
    (0..n).map(|_| random_affine_params(rng, kind)).collect()
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> csg_shrink::lang::Permutation {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    csg_shrink::lang::Permutation::new(p).unwrap()
}

/// A random closed Extended Caddy program built around the list operators
/// and inverse transformations that flat inputs reach only rarely.
pub fn random_extended(rng: &mut ChaCha8Rng) -> Expr {
    use csg_shrink::lang::Partitioning;
    let n = rng.gen_range(2..=5);
    let kind = *[AffineKind::Translate, AffineKind::Scale, AffineKind::Rotate].choose(rng).unwrap();
    let binop = *BinopKind::ALL.choose(rng).unwrap();
    let ac = *[BinopKind::Union, BinopKind::Intersection].choose(rng).unwrap();
    let b = Box::new;
    match rng.gen_range(0..8) {
        0 => Expr::fold(binop, Expr::List(random_list(rng, 1))),
        1 => {
            let inner = Expr::fold(ac, Expr::List(random_list(rng, n)));
            let mut items = random_list(rng, n);
            items.insert(rng.gen_range(0..=n), inner);
            Expr::fold(ac, Expr::List(items))
        }
        2 => {
            let p = random_perm(rng, n);
            let list = Expr::repeat(n as u32, random_core(rng, 2));
            let cads = Expr::List(random_list(rng, n));
            Expr::map2(kind, Expr::Unsort(p.clone(), b(Expr::Sort(p, b(Expr::List(random_params(rng, kind, n)))))), if rng.gen_bool(0.5) { list } else { cads })
        }
        3 => {
            let p = random_perm(rng, n);
            let inner = Expr::Sort(p.clone(), b(Expr::Unsort(p.clone(), b(Expr::List(random_list(rng, n))))));
            let rep = Expr::Unsort(p, b(Expr::repeat(n as u32, random_core(rng, 2))));
            Expr::fold(ac, Expr::Concat(vec![inner, rep]))
        }
        4 | 5 => {
            let lengths: Vec<usize> = (0..rng.gen_range(2..=3)).map(|_| rng.gen_range(1..=3)).collect();
            let q = Partitioning::new(lengths.clone()).unwrap();
            let total = q.total();
            let parts_params = lengths.iter().map(|&l| Expr::List(random_params(rng, kind, l))).collect();
            let parts_cads = lengths.iter().map(|&l| Expr::List(random_list(rng, l))).collect();
            let other_cads =
                if rng.gen_bool(0.5) { Expr::repeat(total as u32, random_core(rng, 2)) } else { Expr::List(random_list(rng, total)) };
            let other_params = Expr::List(random_params(rng, kind, total));
            let m = if rng.gen_bool(0.5) {
                Expr::map2(kind, Expr::Unpart(q, parts_params), other_cads)
            } else {
                Expr::map2(kind, other_params, Expr::Unpart(q, parts_cads))
            };
            Expr::fold(binop, m)
        }
        6 => {
            let center = random_affine_params(rng, AffineKind::Translate);
            let sph = Expr::List(random_params(rng, AffineKind::TranslateSpherical, n));
            let ps = Expr::Unspherical(n as u32, b(center), b(Expr::Spherical(n as u32, b(Expr::v3(0.0, 0.0, 0.0)), b(sph))));
            Expr::fold(ac, Expr::map2(AffineKind::Translate, ps, Expr::repeat(n as u32, random_core(rng, 1))))
        }
        _ => {
            let e = random_core(rng, 3);
            with_arithmetic(rng, &e)
        }
    }
}

/// `n` copies of a part translated to equally spaced points of a circle
/// about a random center in the xy-plane, optionally shuffled.
pub fn random_radial(rng: &mut ChaCha8Rng) -> Expr {
    let n = rng.gen_range(3..=8);
    let part = random_core(rng, 1);
    let center = [small_num(rng, -5, 5), small_num(rng, -5, 5), small_num(rng, -3, 3)];
    let radius = small_num(rng, 1, 12);
    let start = 15.0 * small_num(rng, 0, 5);
    let step = 360.0 / n as f64;
    let mut items: Vec<Expr> = (0..n)
        .map(|k| {
            let (sin, cos) = (start + step * k as f64).to_radians().sin_cos();
            let at = Expr::v3(center[0] + radius * cos, center[1] + radius * sin, center[2]);
            Expr::affine(AffineKind::Translate, at, part.clone())
        })
        .collect();
    if rng.gen_bool(0.5) {
        items.shuffle(rng);
    }
    Expr::chain(BinopKind::Union, items).unwrap()
}

/// A random flat program with a regular pattern: `n` copies of a random
/// part placed by degree ≤ 2 polynomials in the index, optionally shuffled,
/// combined by `kind`, next to an unrelated part.
pub fn random_pattern(rng: &mut ChaCha8Rng) -> Expr {
    let n = rng.gen_range(3..=7);
    let part = random_core(rng, 1);
    let kind = *[AffineKind::Translate, AffineKind::Rotate, AffineKind::Scale].choose(rng).unwrap();
    let coeffs: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| small_num(rng, -3, 3)));
    let mut items: Vec<Expr> = (0..n)
        .map(|i| {
            let i = i as f64;
            let v: [f64; 3] = std::array::from_fn(|k| match kind {
                AffineKind::Rotate => 15.0 * (coeffs[k][0] + coeffs[k][1] * i),
                AffineKind::Scale => 1.0 + coeffs[k][0].abs() + coeffs[k][1].abs() * i,
                _ => coeffs[k][0] + coeffs[k][1] * i + coeffs[k][2] * i * i,
            });
            Expr::affine(kind, Expr::v3(v[0], v[1], v[2]), part.clone())
        })
        .collect();
    if rng.gen_bool(0.5) {
        items.shuffle(rng);
    }
    if rng.gen_bool(0.5) {
        let at = rng.gen_range(0..=items.len());
        items.insert(at, random_prim(rng));
    }
    let chain_kind = if rng.gen_bool(0.8) { BinopKind::Union } else { BinopKind::Intersection };
    let chain = Expr::chain(chain_kind, items).unwrap();
    if rng.gen_bool(0.3) {
        Expr::binop(BinopKind::Difference, random_prim(rng), chain)
    } else {
        chain
    }
}

// ---------------------------------------------------------------------------
// Rule soundness harness.

use std::collections::{BTreeMap, HashSet};

use csg_shrink::egraph::{run_saturation, Extractor, Limits, Rewrite, Term};
use csg_shrink::lang::{free_vars, print};

/// Per-rule tallies of checked instantiations, and a description of each
/// failed one.
#[derive(Debug, Default)]
pub struct SoundnessReport {
    pub checked: BTreeMap<String, usize>,
    pub failures: Vec<String>,
}

impl SoundnessReport {
    pub fn least_checked(&self) -> Option<(&str, usize)> {
        self.checked.iter().map(|(k, &v)| (k.as_str(), v)).min_by_key(|&(_, v)| v)
    }
}

fn term_expr(t: &Term, ex: &Extractor) -> Option<Expr> {
    match t {
        Term::Class(id) => ex.extract(*id).ok(),
        Term::Node(op, children) => {
            Some(Expr::from_op(op.clone(), children.iter().map(|c| term_expr(c, ex)).collect::<Option<Vec<_>>>()?))
        }
    }
}

/// Saturates each seed one iteration at a time; before every iteration,
/// each rule match whose class has a closed representative is checked by
/// evaluating the representative and the rewritten term and comparing the
/// values at `eps`. Representatives are extracted with unit node costs,
/// so inverse forms are allowed. Distinct `(before, after)` pairs count
/// once; rules that already reached `target` are skipped.
pub fn check_rule_soundness(
    rules: &[Rewrite],
    seeds: impl IntoIterator<Item = Expr>,
    target: usize,
    eps: f64,
) -> SoundnessReport {
    let mut report = SoundnessReport::default();
    let mut seen: HashSet<(usize, String, String)> = HashSet::new();
    for r in rules {
        report.checked.insert(r.name.clone(), 0);
    }
    let limits = Limits { max_iters: 1, max_nodes: 5_000, max_seconds: 5.0 };
    for seed in seeds {
        if report.checked.values().all(|&c| c >= target) {
            break;
        }
        let mut g = EGraph::new();
        g.add_expr(&seed);
        for _ in 0..6 {
            let ex = Extractor::with_cost(&g, |_| Cost::new(1));
            for (k, rule) in rules.iter().enumerate() {
                if report.checked[&rule.name] >= target {
                    continue;
                }
                for (id, subst) in g.search(&rule.lhs) {
                    let Ok(before) = ex.extract(id) else { continue };
                    if !free_vars(&before).is_empty() {
                        continue;
                    }
                    for term in rule.apply(&g, id, &subst) {
                        let Some(after) = term_expr(&term, &ex) else { continue };
                        if !free_vars(&after).is_empty() {
                            continue;
                        }
                        let key = (k, print(&before), print(&after));
                        if !seen.insert(key) {
                            continue;
                        }
                        match values_equiv(&before, &after, eps) {
                            Ok(true) => *report.checked.get_mut(&rule.name).unwrap() += 1,
                            Ok(false) => report.failures.push(format!("{}: {} => {}", rule.name, print(&before), print(&after))),
                            Err(e) => report.failures.push(format!("{}: {e}: {} => {}", rule.name, print(&before), print(&after))),
                        }
                    }
                }
            }
            let sat = run_saturation(&mut g, rules, &limits);
            if sat.stop_reason != csg_shrink::egraph::StopReason::IterLimit {
                break;
            }
        }
    }
    report
}

/// Seed programs for the soundness harness: the bundled corpus (flat and
/// perturbed), the wheel, then an endless stream of random patterns and
/// random programs.
pub fn soundness_seeds(seed: u64) -> impl Iterator<Item = Expr> {
    let mut fixed: Vec<Expr> = corpus("flat").into_iter().chain(corpus("perturbed")).map(|(_, e)| e).collect();
    fixed.push(csg_shrink::lang::parse(&wheel_flat()).unwrap());
    fixed.push(csg_shrink::lang::parse(&wheel_obfuscated()).unwrap());
    let mut r = rng(seed);
    fixed.into_iter().chain(std::iter::from_fn(move || {
        Some(match r.gen_range(0..12) {
            10 => random_radial(&mut r),
            11 => Expr::fold(BinopKind::Difference, Expr::List(vec![random_core(&mut r, 3)])),
            0..=5 => {
                let p = random_pattern(&mut r);
                let s = r.gen();
                csg_shrink::pipeline::perturb(&p, s, &csg_shrink::pipeline::PerturbOptions::all(0.0))
            }
            6 => random_core(&mut r, 4),
            _ => random_extended(&mut r),
        })
    }))
}

/// The bundled corpus directory of this crate.
pub fn corpus_dir(kind: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(kind)
}

/// `(file name, program)` for each `.csexp` file of a corpus form, sorted.
pub fn corpus(kind: &str) -> Vec<(String, Expr)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir(kind))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csexp"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, csg_shrink::pipeline::load(&p).unwrap())
        })
        .collect()
}
