use super::any_list;
use crate::egraph::{EGraph, Id, Pattern, Rewrite, Subst, Term};
use crate::lang::{AffineKind, BinopKind, Op, Partitioning, Permutation};
use crate::solvers::{partition_list, Grouping};

pub fn rules() -> Vec<Rewrite> {
    let mut rules = vec![map2_unsort_params(), map2_unsort_cads(), sort_apply(), sort_repeat(), unsort_repeat()];
    rules.extend([BinopKind::Union, BinopKind::Intersection].map(unsort_under_fold));
    rules.extend([unsort_sort_cancel(), sort_unsort_cancel()]);
    rules.extend([map2_unpart(true), map2_unpart(false), unpart_to_concat()]);
    rules.push(unspherical_translate());
    rules.push(partition());
    rules
}

fn perm(s: &Subst, name: &str) -> Option<Permutation> {
    match s.op(name)? {
        Op::Sort(p) | Op::Unsort(p) => Some(p.clone()),
        _ => None,
    }
}

fn unsort_of(name: &str, var: &str) -> Pattern {
    Pattern::bind(name, Op::Unsort(Permutation::identity(0)), vec![Pattern::var(var)])
}

fn sort_of(name: &str, child: Pattern) -> Pattern {
    Pattern::bind(name, Op::Sort(Permutation::identity(0)), vec![child])
}

fn map2(kind: AffineKind, params: Term, cads: Term) -> Term {
    Term::node(Op::Map2(kind), vec![params, cads])
}

fn sort(p: &Permutation, child: Term) -> Term {
    Term::node(Op::Sort(p.clone()), vec![child])
}

fn unsort(p: &Permutation, child: Term) -> Term {
    Term::node(Op::Unsort(p.clone()), vec![child])
}

/// `(Map2 k (Unsort p l) c) ⇝ (Unsort p (Map2 k l (Sort p c)))`.
fn map2_unsort_params() -> Rewrite {
    let lhs = Pattern::bind("k", Op::Map2(AffineKind::Translate), vec![unsort_of("u", "l"), Pattern::var("c")]);
    Rewrite::new("map2-unsort-params", lhs, |_, _, s| {
        let (Some(p), Some(k)) = (perm(s, "u"), s.op("k").and_then(Op::affine_kind)) else { return vec![] };
        vec![unsort(&p, map2(k, Term::Class(s["l"]), sort(&p, Term::Class(s["c"]))))]
    })
}

/// `(Map2 k l (Unsort p c)) ⇝ (Unsort p (Map2 k (Sort p l) c))`.
fn map2_unsort_cads() -> Rewrite {
    let lhs = Pattern::bind("k", Op::Map2(AffineKind::Translate), vec![Pattern::var("l"), unsort_of("u", "c")]);
    Rewrite::new("map2-unsort-cads", lhs, |_, _, s| {
        let (Some(p), Some(k)) = (perm(s, "u"), s.op("k").and_then(Op::affine_kind)) else { return vec![] };
        vec![unsort(&p, map2(k, sort(&p, Term::Class(s["l"])), Term::Class(s["c"])))]
    })
}

/// `(Sort p (List x0 ... xn)) ⇝ (List x_p0 ... x_pn)`.
fn sort_apply() -> Rewrite {
    Rewrite::new("sort-apply", sort_of("s", any_list()), |_, _, s| {
        let (Some(p), Some(items)) = (perm(s, "s"), s.rest("items")) else { return vec![] };
        if p.len() != items.len() {
            return vec![];
        }
        vec![Term::node(Op::List, p.gather(items).into_iter().map(Term::Class).collect())]
    })
}

fn repeat_len(g: &EGraph, id: Id) -> Option<u32> {
    g.nodes(id).find_map(|n| match n.op {
        Op::Repeat(n) => Some(n),
        _ => None,
    })
}

/// `(Sort p (Repeat n x)) ⇝ (Repeat n x)`.
fn sort_repeat() -> Rewrite {
    Rewrite::new("sort-repeat", sort_of("s", Pattern::var("r")), |g, _, s| {
        reorder_of_repeat(g, s, "s")
    })
}

/// `(Unsort p (Repeat n x)) ⇝ (Repeat n x)`.
fn unsort_repeat() -> Rewrite {
    Rewrite::new("unsort-repeat", unsort_of("s", "r"), |g, _, s| reorder_of_repeat(g, s, "s"))
}

fn reorder_of_repeat(g: &EGraph, s: &Subst, name: &str) -> Vec<Term> {
    match (perm(s, name), repeat_len(g, s["r"])) {
        (Some(p), Some(n)) if p.len() == n as usize => vec![Term::Class(s["r"])],
        _ => vec![],
    }
}

/// `(Fold op (Unsort p l)) ⇝ (Fold op l)` for commutative `op`.
fn unsort_under_fold(kind: BinopKind) -> Rewrite {
    let name = format!("unsort-under-fold-{}", kind.name().to_lowercase());
    let lhs = Pattern::node(Op::Fold(kind), vec![unsort_of("u", "l")]);
    Rewrite::new(name, lhs, move |_, _, s| vec![Term::node(Op::Fold(kind), vec![Term::Class(s["l"])])])
}

fn unsort_sort_cancel() -> Rewrite {
    let lhs = Pattern::bind("u", Op::Unsort(Permutation::identity(0)), vec![sort_of("s", Pattern::var("x"))]);
    Rewrite::new("unsort-sort-cancel", lhs, |_, _, s| match (perm(s, "u"), perm(s, "s")) {
        (Some(a), Some(b)) if a == b => vec![Term::Class(s["x"])],
        _ => vec![],
    })
}

fn sort_unsort_cancel() -> Rewrite {
    Rewrite::new("sort-unsort-cancel", sort_of("s", unsort_of("u", "x")), |_, _, s| {
        match (perm(s, "u"), perm(s, "s")) {
            (Some(a), Some(b)) if a == b => vec![Term::Class(s["x"])],
            _ => vec![],
        }
    })
}

/// Concrete sublists of a list-valued class, cut by `lengths`, when the
/// class has a `List` or `Repeat` form.
fn slices(g: &EGraph, id: Id, parts: &Partitioning) -> Option<Vec<Term>> {
    if let Some(items) = g.list_children(id) {
        let pieces = parts.split(items)?;
        return Some(pieces.into_iter().map(|p| Term::node(Op::List, p.into_iter().map(Term::Class).collect())).collect());
    }
    let n = repeat_len(g, id)?;
    if n as usize != parts.total() {
        return None;
    }
    let x = g.nodes(id).find(|n| matches!(n.op, Op::Repeat(_)))?.children[0];
    Some(parts.lengths().iter().map(|&l| Term::node(Op::Repeat(l as u32), vec![Term::Class(x)])).collect())
}

/// `(Map2 k a (Unpart q c1 .. cn)) ⇝ (Unpart q (Map2 k a1 c1) .. (Map2 k an cn))`
/// where `a1 .. an` are the matching concrete slices of `a`; and the mirror
/// rule with the `Unpart` on the parameter side.
fn map2_unpart(cads_side: bool) -> Rewrite {
    let unpart = Pattern::bind("q", Op::Unpart(Partitioning::new(vec![1]).unwrap()), vec![]).with_rest("parts");
    let children = if cads_side { vec![Pattern::var("other"), unpart] } else { vec![unpart, Pattern::var("other")] };
    let name = if cads_side { "map2-unpart-cads" } else { "map2-unpart-params" };
    let lhs = Pattern::bind("k", Op::Map2(AffineKind::Translate), children);
    Rewrite::new(name, lhs, move |g, _, s| {
        let (Some(Op::Unpart(q)), Some(k)) = (s.op("q"), s.op("k").and_then(Op::affine_kind)) else { return vec![] };
        let parts = s.rest("parts").unwrap();
        let Some(others) = slices(g, s["other"], q) else { return vec![] };
        let mapped = others
            .into_iter()
            .zip(parts)
            .map(|(o, &p)| if cads_side { map2(k, o, Term::Class(p)) } else { map2(k, Term::Class(p), o) })
            .collect();
        vec![Term::node(Op::Unpart(q.clone()), mapped)]
    })
}

/// `(Unpart q l1 .. ln) ⇝ (Concat l1 .. ln)`.
fn unpart_to_concat() -> Rewrite {
    let lhs = Pattern::bind("q", Op::Unpart(Partitioning::new(vec![1]).unwrap()), vec![]).with_rest("parts");
    Rewrite::new("unpart-to-concat", lhs, |_, _, s| {
        vec![Term::node(Op::Concat, s.rest("parts").unwrap().iter().map(|&c| Term::Class(c)).collect())]
    })
}

/// `(Map2 Translate (Unspherical n ctr ps) cs)
///   ⇝ (Map2 Translate (Repeat n ctr) (Map2 TranslateSpherical ps cs))`.
fn unspherical_translate() -> Rewrite {
    let lhs = Pattern::node(
        Op::Map2(AffineKind::Translate),
        vec![Pattern::bind("n", Op::Unspherical(1), vec![Pattern::var("ctr"), Pattern::var("ps")]), Pattern::var("cs")],
    );
    Rewrite::new("unspherical-translate", lhs, |_, _, s| {
        let Some(Op::Unspherical(n)) = s.op("n") else { return vec![] };
        let centers = Term::node(Op::Repeat(*n), vec![Term::Class(s["ctr"])]);
        let around = map2(AffineKind::TranslateSpherical, Term::Class(s["ps"]), Term::Class(s["cs"]));
        vec![map2(AffineKind::Translate, centers, around)]
    })
}

/// Splits a heterogeneous list of CAD items: contiguous groups become
/// `(Unpart q (List g1..) (List g2..) ..)`; scattered groups are first
/// gathered, `(Unsort p (List gathered..))`. Only lists folded by some
/// `Fold` are split, since that is where regrouping can be eliminated.
fn partition() -> Rewrite {
    Rewrite::new("partition", any_list(), |g, id, s| {
        if !g.parents(id).any(|(n, _)| matches!(n.op, Op::Fold(_))) {
            return vec![];
        }
        let items = s.rest("items").unwrap();
        match partition_list(g, items) {
            Some(Grouping::Contiguous(q)) => {
                let lists = q
                    .split(items)
                    .expect("partition covers the list")
                    .into_iter()
                    .map(|grp| Term::node(Op::List, grp.into_iter().map(Term::Class).collect()))
                    .collect();
                vec![Term::node(Op::Unpart(q), lists)]
            }
            Some(Grouping::Reorder(p)) => {
                let gathered = Term::node(Op::List, p.gather(items).into_iter().map(Term::Class).collect());
                vec![unsort(&p, gathered)]
            }
            None => vec![],
        }
    })
}
