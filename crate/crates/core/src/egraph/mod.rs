//! A congruence-closed e-graph over Extended Caddy operators.
//!
//! Merges are deferred: `merge` only unions the two classes and queues the
//! parents of the absorbed class; `rebuild` restores the hashcons and
//! congruence invariants. Nothing here iterates a hash map, so two runs over
//! the same input perform identical operations in identical order.

mod extract;
mod pattern;
mod rewrite;

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

pub use extract::{ExtractError, Extractor};
pub use pattern::{PatOp, Pattern, Subst};
pub use rewrite::{run_saturation, Applier, Limits, Rewrite, SaturationReport, StopReason, Term};

use crate::lang::{Category, Expr, Num, Op};

const SNAP_TOLERANCE: f64 = 1e-10;

/// Handle of an e-class; resolve through [`EGraph::find`] before comparing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(u32);

impl Id {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Id {
    fn from(i: usize) -> Id {
        Id(u32::try_from(i).expect("e-class id overflow"))
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ENode {
    pub op: Op,
    pub children: Vec<Id>,
}

impl ENode {
    pub fn new(op: Op, children: Vec<Id>) -> Self {
        ENode { op, children }
    }

    pub fn leaf(op: Op) -> Self {
        ENode { op, children: Vec::new() }
    }
}

impl fmt::Display for ENode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.op)?;
        if !self.children.is_empty() {
            f.write_char('(')?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_char(')')?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct EClass {
    /// Canonical nodes (after rebuild) in insertion order, each with the stamp
    /// of its first insertion.
    nodes: Vec<(u64, ENode)>,
    parents: Vec<(ENode, Id)>,
    category: Category,
}

#[derive(Debug, Clone, Default)]
pub struct EGraph {
    union_find: Vec<u32>,
    classes: Vec<Option<EClass>>,
    memo: HashMap<ENode, Id>,
    pending: Vec<(ENode, Id)>,
    touched: Vec<Id>,
    stamp: u64,
    unions: u64,
    /// Every numeric literal ever added, for [`EGraph::snap_num`].
    numbers: BTreeSet<Num>,
}

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&self, id: Id) -> Id {
        let mut i = id.0;
        while self.union_find[i as usize] != i {
            i = self.union_find[i as usize];
        }
        Id(i)
    }

    fn find_mut(&mut self, id: Id) -> Id {
        let root = self.find(id);
        let mut i = id.0;
        while self.union_find[i as usize] != root.0 {
            let next = self.union_find[i as usize];
            self.union_find[i as usize] = root.0;
            i = next;
        }
        root
    }

    pub fn canonicalize(&self, node: &ENode) -> ENode {
        ENode { op: node.op.clone(), children: node.children.iter().map(|&c| self.find(c)).collect() }
    }

    /// The class holding a node congruent to `node`, if any.
    pub fn lookup(&self, node: &ENode) -> Option<Id> {
        self.memo.get(&self.canonicalize(node)).map(|&id| self.find(id))
    }

    /// The class representing `e`, if every subterm is already present.
    pub fn lookup_expr(&self, e: &Expr) -> Option<Id> {
        let (op, children) = e.to_op();
        let children = children.into_iter().map(|c| self.lookup_expr(c)).collect::<Option<Vec<_>>>()?;
        self.lookup(&ENode::new(op, children))
    }

    pub fn add(&mut self, node: ENode) -> Id {
        let node = self.canonicalize(&node);
        if let Some(&id) = self.memo.get(&node) {
            return self.find(id);
        }
        let id = Id::from(self.classes.len());
        self.union_find.push(id.0);
        for &child in &node.children {
            let class = self.classes[child.index()].as_mut().expect("canonical child");
            class.parents.push((node.clone(), id));
        }
        self.stamp += 1;
        let category = node.op.category();
        self.classes.push(Some(EClass { nodes: vec![(self.stamp, node.clone())], parents: Vec::new(), category }));
        if let Op::Num(n) = node.op {
            self.numbers.insert(n);
        }
        self.memo.insert(node, id);
        id
    }

    /// The literal already in the graph closest to `v` if it lies within a
    /// relative distance of `1e-10` (absolute near zero), else `v` itself.
    /// Rules that compute constants snap them so that the rounding noise of
    /// different rewrite paths lands on one literal instead of minting a new
    /// one per path.
    pub fn snap_num(&self, v: f64) -> f64 {
        let tol = SNAP_TOLERANCE * v.abs().max(1.0);
        let key = Num::new(v);
        let below = self.numbers.range(..=key).next_back();
        let above = self.numbers.range(key..).next();
        [below, above]
            .into_iter()
            .flatten()
            .map(|n| n.get())
            .filter(|&n| (n - v).abs() <= tol)
            .min_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()))
            .unwrap_or(v)
    }

    pub fn add_expr(&mut self, e: &Expr) -> Id {
        let (op, children) = e.to_op();
        let children = children.into_iter().map(|c| self.add_expr(c)).collect();
        self.add(ENode::new(op, children))
    }

    /// Unions two classes and returns the new root (the smaller id).
    /// Congruence is restored by the next [`rebuild`](Self::rebuild).
    pub fn merge(&mut self, a: Id, b: Id) -> Id {
        let (a, b) = (self.find_mut(a), self.find_mut(b));
        if a == b {
            return a;
        }
        let (root, other) = if a < b { (a, b) } else { (b, a) };
        self.unions += 1;
        self.union_find[other.index()] = root.0;
        let absorbed = self.classes[other.index()].take().expect("live class");
        self.pending.extend(absorbed.parents.iter().cloned());
        let class = self.classes[root.index()].as_mut().expect("live class");
        debug_assert_eq!(class.category, absorbed.category, "merging {root} and {other} across categories");
        class.nodes.extend(absorbed.nodes);
        class.parents.extend(absorbed.parents);
        self.touched.push(root);
        root
    }

    /// Restores the hashcons and congruence invariants. Returns the number
    /// of merges performed while repairing.
    pub fn rebuild(&mut self) -> usize {
        let mut repairs = 0;
        while !self.pending.is_empty() {
            let todo = std::mem::take(&mut self.pending);
            for (node, class) in todo {
                let node = self.canonicalize(&node);
                let class = self.find(class);
                self.touched.push(class);
                match self.memo.insert(node, class) {
                    Some(prev) if self.find(prev) != class => {
                        self.merge(prev, class);
                        repairs += 1;
                    }
                    _ => {}
                }
            }
        }
        let mut touched = std::mem::take(&mut self.touched);
        touched.iter_mut().for_each(|id| *id = self.find(*id));
        touched.sort_unstable();
        touched.dedup();
        for id in touched {
            self.normalize_class(id);
        }
        repairs
    }

    fn normalize_class(&mut self, id: Id) {
        let mut class = self.classes[id.index()].take().expect("live class");
        let mut nodes: Vec<(u64, ENode)> = class.nodes.into_iter().map(|(s, n)| (s, self.canonicalize(&n))).collect();
        nodes.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        nodes.dedup_by(|later, earlier| later.1 == earlier.1);
        nodes.sort_by_key(|(s, _)| *s);
        class.nodes = nodes;
        let mut parents: Vec<(ENode, Id)> =
            class.parents.into_iter().map(|(n, p)| (self.canonicalize(&n), self.find(p))).collect();
        parents.sort();
        parents.dedup();
        class.parents = parents;
        self.classes[id.index()] = Some(class);
    }

    fn class(&self, id: Id) -> &EClass {
        self.classes[self.find(id).index()].as_ref().expect("live class")
    }

    /// Canonical class ids in increasing order.
    pub fn class_ids(&self) -> impl Iterator<Item = Id> + '_ {
        self.classes.iter().enumerate().filter(|(_, c)| c.is_some()).map(|(i, _)| Id::from(i))
    }

    /// Nodes of a class in insertion order.
    pub fn nodes(&self, id: Id) -> impl Iterator<Item = &ENode> {
        self.class(id).nodes.iter().map(|(_, n)| n)
    }

    /// Nodes with their insertion stamps.
    pub fn stamped_nodes(&self, id: Id) -> &[(u64, ENode)] {
        &self.class(id).nodes
    }

    /// Nodes using class `id` as a child, with the classes that hold them.
    pub fn parents(&self, id: Id) -> impl Iterator<Item = (&ENode, Id)> {
        self.class(id).parents.iter().map(|(n, p)| (n, self.find(*p)))
    }

    pub fn category(&self, id: Id) -> Category {
        self.class(id).category
    }

    pub fn number_of_classes(&self) -> usize {
        self.classes.iter().filter(|c| c.is_some()).count()
    }

    pub fn total_size(&self) -> usize {
        self.classes.iter().flatten().map(|c| c.nodes.len()).sum()
    }

    /// Number of successful unions so far.
    pub fn union_count(&self) -> u64 {
        self.unions
    }

    pub fn is_clean(&self) -> bool {
        self.pending.is_empty() && self.touched.is_empty()
    }

    /// The numeric literal a class is known to equal.
    pub fn num_const(&self, id: Id) -> Option<f64> {
        self.nodes(id).find_map(|n| n.op.as_num())
    }

    /// Components of a literal Vec2/Vec3 in the class.
    pub fn vec_const(&self, id: Id) -> Option<Vec<f64>> {
        self.nodes(id)
            .filter(|n| matches!(n.op, Op::Vec2 | Op::Vec3))
            .find_map(|n| n.children.iter().map(|&c| self.num_const(c)).collect())
    }

    /// Children of the earliest `List` node in the class.
    pub fn list_children(&self, id: Id) -> Option<&[Id]> {
        self.nodes(id).find(|n| n.op == Op::List).map(|n| n.children.as_slice())
    }

    /// True when some `List` node has this class as a direct child.
    pub fn is_list_element(&self, id: Id) -> bool {
        self.parents(id).any(|(n, _)| n.op == Op::List)
    }

    /// Checks the hashcons and congruence invariants by a full scan; returns
    /// a description of the first violation.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen: HashMap<ENode, Id> = HashMap::new();
        for id in self.class_ids() {
            for node in self.nodes(id) {
                let canon = self.canonicalize(node);
                if &canon != node {
                    return Err(format!("{id}: node {node} is not canonical"));
                }
                if let Some(other) = seen.insert(canon.clone(), id) {
                    if other != id {
                        return Err(format!("{node} appears in both {other} and {id}"));
                    }
                }
                if self.memo.get(&canon).map(|&c| self.find(c)) != Some(id) {
                    return Err(format!("hashcons entry for {node} does not point at {id}"));
                }
            }
        }
        Ok(())
    }

    /// One line per class, `cN: node node ...`, in id order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.class_ids() {
            write!(out, "{id}:").unwrap();
            for node in self.nodes(id) {
                write!(out, " {node}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, ArithOp};

    #[test]
    fn snap_reuses_nearby_literals_only() {
        let mut g = EGraph::new();
        g.add_expr(&parse("[3.00000703567, 0, 1000]").unwrap());
        assert_eq!(g.snap_num(3.00000703567 + 1e-11), 3.00000703567);
        assert_eq!(g.snap_num(3.00000703667), 3.00000703667);
        assert_eq!(g.snap_num(1e-12), 0.0);
        assert_eq!(g.snap_num(1000.0 + 5e-8), 1000.0);
        assert_eq!(g.snap_num(-1.0), -1.0);
    }

    fn var(g: &mut EGraph, name: &str) -> Id {
        g.add(ENode::leaf(Op::Var(name.into())))
    }

    #[test]
    fn hashconsing_is_idempotent() {
        let mut g = EGraph::new();
        let e = parse("(Sphere 1)").unwrap();
        let a = g.add_expr(&e);
        let b = g.add_expr(&e);
        assert_eq!(a, b);
        assert_eq!(g.number_of_classes(), 2);
    }

    #[test]
    fn merging_children_makes_parents_congruent() {
        let mut g = EGraph::new();
        let (x, y, z) = (var(&mut g, "x"), var(&mut g, "y"), var(&mut g, "z"));
        let xy = g.add(ENode::new(Op::Arith(ArithOp::Add), vec![x, y]));
        let xz = g.add(ENode::new(Op::Arith(ArithOp::Add), vec![x, z]));
        assert_ne!(g.find(xy), g.find(xz));
        g.merge(y, z);
        g.rebuild();
        assert_eq!(g.find(xy), g.find(xz));
        assert_eq!(g.add(ENode::new(Op::Arith(ArithOp::Add), vec![x, z])), g.find(xy));
        g.audit().unwrap();
    }

    #[test]
    fn self_merge_is_a_no_op() {
        let mut g = EGraph::new();
        let x = var(&mut g, "x");
        let before = g.dump();
        assert_eq!(g.merge(x, x), x);
        g.rebuild();
        assert_eq!(g.dump(), before);
        assert_eq!(g.union_count(), 0);
    }

    #[test]
    fn congruence_propagates_through_chains() {
        // f^5(a) and f^5(b) collapse level by level once a = b.
        let mut g = EGraph::new();
        let (mut a, mut b) = (var(&mut g, "a"), var(&mut g, "b"));
        let (a0, b0) = (a, b);
        for _ in 0..5 {
            a = g.add(ENode::new(Op::Fold(crate::lang::BinopKind::Union), vec![a]));
            b = g.add(ENode::new(Op::Fold(crate::lang::BinopKind::Union), vec![b]));
        }
        g.merge(a0, b0);
        g.rebuild();
        assert_eq!(g.find(a), g.find(b));
        assert_eq!(g.number_of_classes(), 6);
        g.audit().unwrap();
    }

    #[test]
    fn dump_lists_classes_in_order() {
        let mut g = EGraph::new();
        g.add_expr(&parse("(Sphere 2)").unwrap());
        assert_eq!(g.dump(), "c0: 2\nc1: Sphere(c0)\n");
    }

    #[test]
    fn constants_are_visible() {
        let mut g = EGraph::new();
        let v = g.add_expr(&parse("[1, 2, 3]").unwrap());
        assert_eq!(g.vec_const(v), Some(vec![1.0, 2.0, 3.0]));
        let l = g.add_expr(&parse("(List (Sphere 1) (Sphere 2))").unwrap());
        let kids = g.list_children(l).unwrap().to_vec();
        assert!(g.is_list_element(kids[0]));
        assert!(!g.is_list_element(l));
    }
}
