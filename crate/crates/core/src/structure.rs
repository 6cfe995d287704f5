//! The structure finder: turns a list of transformed CAD items into candidate
//! `Map2` forms, one per consistent choice of affine node in every item.
//!
//! An item's *affine signature* counts the affine nodes of each kind in its
//! e-class. Items with the same signature form a group. For every affine
//! kind present in all groups, each group picks one of its nodes of that
//! kind (the `j`-th in insertion order, the same `j` for every member), and
//! the picks yield `Map2 kind (List params...) (List children...)`.

use crate::egraph::{EGraph, Id, Term};
use crate::lang::{AffineKind, Category, Op};

/// Upper bound on the candidate `Map2` forms emitted per affine kind.
pub const MAX_COMBINATIONS: usize = 8;

/// Number of affine nodes of each kind in a class, indexed like
/// [`AffineKind::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct AffineSignature([usize; 4]);

impl AffineSignature {
    pub fn count(&self, kind: AffineKind) -> usize {
        self.0[slot(kind)]
    }
}

fn slot(kind: AffineKind) -> usize {
    AffineKind::ALL.iter().position(|&k| k == kind).expect("known affine kind")
}

pub fn affine_signature(g: &EGraph, id: Id) -> AffineSignature {
    let mut counts = [0; 4];
    for node in g.nodes(id) {
        if let Op::Affine(k) = node.op {
            counts[slot(k)] += 1;
        }
    }
    AffineSignature(counts)
}

/// The `j`-th affine node of `kind` in class `id`, as `(params, child)`.
fn nth_affine(g: &EGraph, id: Id, kind: AffineKind, j: usize) -> Option<(Id, Id)> {
    g.nodes(id).filter(|n| n.op == Op::Affine(kind)).nth(j).map(|n| (n.children[0], n.children[1]))
}

/// Whether `params` is the literal identity for `kind`.
fn is_identity(g: &EGraph, kind: AffineKind, params: Id) -> bool {
    let identity = match kind {
        AffineKind::Scale => [1.0; 3],
        _ => [0.0; 3],
    };
    g.vec_const(params).is_some_and(|v| v == identity)
}

/// Index vectors `c` with `c[k] < bounds[k]`, ordered by their sum and then
/// lexicographically, truncated to `limit` entries.
pub fn combinations(bounds: &[usize], limit: usize) -> Vec<Vec<usize>> {
    fn with_sum(bounds: &[usize], sum: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let Some((&first, rest)) = bounds.split_first() else {
            if sum == 0 {
                out.push(prefix.clone());
            }
            return;
        };
        let rest_max: usize = rest.iter().map(|b| b - 1).sum();
        for v in 0..first.min(sum + 1) {
            if sum - v > rest_max {
                continue;
            }
            prefix.push(v);
            with_sum(rest, sum - v, prefix, out, limit);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if bounds.contains(&0) {
        return out;
    }
    let max_sum: usize = bounds.iter().map(|b| b - 1).sum();
    for sum in 0..=max_sum {
        with_sum(bounds, sum, &mut Vec::new(), &mut out, limit);
        if out.len() >= limit {
            break;
        }
    }
    out
}

/// Candidate `Map2` forms equal to the list of `items`: for each affine kind
/// shared by every signature group, up to [`MAX_COMBINATIONS`] choices of
/// node per group. Requires at least two items, all CAD-valued.
pub fn find_map2s(g: &EGraph, items: &[Id]) -> Vec<Term> {
    if items.len() < 2 || items.iter().any(|&c| g.category(c) != Category::Cad) {
        return Vec::new();
    }
    let signatures: Vec<AffineSignature> = items.iter().map(|&c| affine_signature(g, c)).collect();
    let mut groups: Vec<AffineSignature> = Vec::new();
    for s in &signatures {
        if !groups.contains(s) {
            groups.push(*s);
        }
    }
    let group_of: Vec<usize> = signatures.iter().map(|s| groups.iter().position(|x| x == s).unwrap()).collect();

    let mut out = Vec::new();
    for kind in AffineKind::ALL {
        let bounds: Vec<usize> = groups.iter().map(|s| s.count(kind)).collect();
        for choice in combinations(&bounds, MAX_COMBINATIONS) {
            let picks: Option<Vec<(Id, Id)>> =
                items.iter().zip(&group_of).map(|(&c, &grp)| nth_affine(g, c, kind, choice[grp])).collect();
            let Some(picks) = picks else { continue };
            let params = picks.iter().map(|&(p, _)| Term::Class(p)).collect();
            let cads = picks.iter().map(|&(_, c)| Term::Class(c)).collect();
            out.push(Term::node(Op::Map2(kind), vec![Term::node(Op::List, params), Term::node(Op::List, cads)]));
        }
    }
    out
}

/// Whether a candidate from [`find_map2s`] picks the identity for every
/// item. Such a `Map2` typically just re-expresses the list in terms of
/// itself, so the rewrite rule drops it.
pub fn is_identity_map2(g: &EGraph, candidate: &Term) -> bool {
    let Term::Node(Op::Map2(kind), children) = candidate else { return false };
    let Some(Term::Node(Op::List, params)) = children.first() else { return false };
    params.iter().all(|p| matches!(p, Term::Class(id) if is_identity(g, *kind, *id)))
}
