use super::any_list;
use crate::egraph::{Pattern, Rewrite, Term};
use crate::lang::{BinopKind, Op, Partitioning, Permutation};

pub fn rules() -> Vec<Rewrite> {
    let mut rules = vec![unsort_over_unpart()];
    for kind in [BinopKind::Union, BinopKind::Intersection] {
        rules.push(fold_unpart_split(kind));
        rules.push(fold_flatten(kind));
    }
    rules.extend(BinopKind::ALL.map(fold_singleton));
    rules.extend(BinopKind::ALL.map(fold_pair));
    rules
}

fn unpart_pattern() -> Pattern {
    Pattern::bind("q", Op::Unpart(Partitioning::new(vec![1]).unwrap()), vec![]).with_rest("parts")
}

/// Lifts an `Unsort` out of one sublist of an `Unpart`:
/// `(Unpart q l1 .. (Unsort p m) .. ln) ⇝ (Unsort p' (Unpart q l1 .. m .. ln))`
/// where `p'` applies `p` within that sublist's block and fixes the rest.
fn unsort_over_unpart() -> Rewrite {
    Rewrite::new("unsort-over-unpart", unpart_pattern(), |g, _, s| {
        let Some(Op::Unpart(q)) = s.op("q") else { return vec![] };
        let parts = s.rest("parts").unwrap();
        let mut out = Vec::new();
        for ((k, &part), offset) in parts.iter().enumerate().zip(q.offsets()) {
            for node in g.nodes(part) {
                let Op::Unsort(p) = &node.op else { continue };
                if p.len() != q.lengths()[k] {
                    continue;
                }
                let mut lifted: Vec<usize> = (0..q.total()).collect();
                for (j, &pj) in p.indices().iter().enumerate() {
                    lifted[offset + j] = offset + pj;
                }
                let lifted = Permutation::new(lifted).expect("block permutation");
                let mut kids: Vec<Term> = parts.iter().map(|&c| Term::Class(c)).collect();
                kids[k] = Term::Class(node.children[0]);
                out.push(Term::node(Op::Unsort(lifted), vec![Term::node(Op::Unpart(q.clone()), kids)]));
            }
        }
        out
    })
}

/// `(Fold op (Unpart q l1 .. ln)) ⇝ (Fold op (List (Fold op l1) .. (Fold op ln)))`
/// for associative, commutative `op`.
fn fold_unpart_split(kind: BinopKind) -> Rewrite {
    let name = format!("fold-unpart-split-{}", kind.name().to_lowercase());
    let lhs = Pattern::node(Op::Fold(kind), vec![unpart_pattern()]);
    Rewrite::new(name, lhs, move |_, _, s| {
        let folds = s
            .rest("parts")
            .unwrap()
            .iter()
            .map(|&l| Term::node(Op::Fold(kind), vec![Term::Class(l)]))
            .collect();
        vec![Term::node(Op::Fold(kind), vec![Term::node(Op::List, folds)])]
    })
}

/// Splices nested folds of the same associative, commutative kind:
/// `(Fold op (List a (Fold op (List b c)) d)) ⇝ (Fold op (List a b c d))`.
fn fold_flatten(kind: BinopKind) -> Rewrite {
    let name = format!("fold-flatten-{}", kind.name().to_lowercase());
    let lhs = Pattern::node(Op::Fold(kind), vec![any_list()]);
    Rewrite::new(name, lhs, move |g, _, s| {
        let mut spliced = Vec::new();
        let mut changed = false;
        for &item in s.rest("items").unwrap() {
            let inner = g
                .nodes(item)
                .filter(|n| n.op == Op::Fold(kind))
                .find_map(|n| g.list_children(n.children[0]).filter(|kids| !kids.contains(&g.find(item))));
            match inner {
                Some(kids) => {
                    spliced.extend(kids.iter().copied());
                    changed = true;
                }
                None => spliced.push(item),
            }
        }
        if !changed {
            return vec![];
        }
        vec![Term::node(Op::Fold(kind), vec![Term::node(Op::List, spliced.into_iter().map(Term::Class).collect())])]
    })
}

/// `(Fold op (List x)) ⇝ x`.
fn fold_singleton(kind: BinopKind) -> Rewrite {
    let name = format!("fold-singleton-{}", kind.name().to_lowercase());
    let lhs = Pattern::node(Op::Fold(kind), vec![Pattern::node(Op::List, vec![Pattern::var("x")])]);
    Rewrite::syntactic(name, lhs, Pattern::var("x"))
}

/// `(Fold op (List a b)) ⇝ (op a b)`.
fn fold_pair(kind: BinopKind) -> Rewrite {
    let name = format!("fold-pair-{}", kind.name().to_lowercase());
    let lhs = Pattern::node(Op::Fold(kind), vec![Pattern::node(Op::List, vec![Pattern::var("a"), Pattern::var("b")])]);
    let rhs = Pattern::node(Op::Binop(kind), vec![Pattern::var("a"), Pattern::var("b")]);
    Rewrite::syntactic(name, lhs, rhs)
}
