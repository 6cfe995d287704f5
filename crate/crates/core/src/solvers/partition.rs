use crate::egraph::{EGraph, Id};
use crate::lang::{Category, Op, Partitioning, Permutation, PrimKind};

/// How a heterogeneous list splits into groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grouping {
    /// The groups are already contiguous: `Unpart` with these lengths.
    Contiguous(Partitioning),
    /// Gathering the items by this permutation makes the groups contiguous.
    Reorder(Permutation),
}

/// Bit set of the primitive kinds reachable from a class through the
/// earliest-inserted node of each class on the way. Earliest nodes always
/// point at classes created before them, so the walk terminates.
pub fn primitive_fingerprint(g: &EGraph, id: Id) -> u8 {
    let mut bits = 0u8;
    let mut stack = vec![g.find(id)];
    let mut seen = Vec::new();
    while let Some(c) = stack.pop() {
        if seen.contains(&c) {
            continue;
        }
        seen.push(c);
        let Some((_, node)) = g.stamped_nodes(c).first() else { continue };
        if let Op::Prim(k) = node.op {
            bits |= 1 << PrimKind::ALL.iter().position(|&p| p == k).expect("known primitive");
        }
        stack.extend(node.children.iter().map(|&ch| g.find(ch)).filter(|&ch| g.category(ch) == Category::Cad));
    }
    bits
}

/// The affine kinds met along the earliest-inserted nodes of a class, ending
/// with the first non-affine operator. Unlike the affine signature this does
/// not change as rewrites add nodes to the class.
pub fn skeleton(g: &EGraph, id: Id) -> Vec<Op> {
    let mut ops = Vec::new();
    let mut cur = g.find(id);
    while let Some((_, node)) = g.stamped_nodes(cur).first() {
        ops.push(node.op.clone());
        match node.op {
            Op::Affine(_) => cur = g.find(node.children[1]),
            _ => break,
        }
    }
    ops
}

/// Groups keys by first appearance; a key splits usefully when it yields at
/// least two groups and some group has more than one member.
fn groups_by<K: PartialEq>(keys: &[K]) -> Option<Vec<Vec<usize>>> {
    let mut groups: Vec<(&K, Vec<usize>)> = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(i),
            None => groups.push((k, vec![i])),
        }
    }
    let useful = groups.len() >= 2 && groups.iter().any(|(_, m)| m.len() > 1);
    useful.then(|| groups.into_iter().map(|(_, m)| m).collect())
}

/// Splits a list of CAD classes into groups of similar items, keyed first by
/// primitive fingerprint, then by [`skeleton`], then by class identity;
/// the first key producing a useful split wins. Groups are ordered by size
/// (ascending, then by first appearance) and keep their items in list order.
/// Declines for homogeneous lists.
pub fn partition_list(g: &EGraph, items: &[Id]) -> Option<Grouping> {
    if items.len() < 3 || items.iter().any(|&c| g.category(c) != Category::Cad) {
        return None;
    }
    let fingerprints: Vec<u8> = items.iter().map(|&c| primitive_fingerprint(g, c)).collect();
    let mut groups = groups_by(&fingerprints)
        .or_else(|| groups_by(&items.iter().map(|&c| skeleton(g, c)).collect::<Vec<_>>()))
        .or_else(|| groups_by(&items.iter().map(|&c| g.find(c)).collect::<Vec<_>>()))?;
    groups.sort_by_key(|m| m.len());
    let order: Vec<usize> = groups.iter().flatten().copied().collect();
    if order.iter().enumerate().all(|(k, &i)| k == i) {
        let lengths = groups.iter().map(Vec::len).collect();
        Some(Grouping::Contiguous(Partitioning::new(lengths).expect("groups are nonempty")))
    } else {
        Some(Grouping::Reorder(Permutation::new(order).expect("groups cover every item once")))
    }
}
