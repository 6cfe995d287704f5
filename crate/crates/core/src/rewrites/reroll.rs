use std::sync::Arc;

use super::{any_list, may_mention, RuleConfig};
use crate::egraph::{EGraph, Id, Pattern, Rewrite, Subst, Term};
use crate::lang::{free_vars, AffineKind, BinopKind, Binding, Category, Expr, Op};
use crate::solvers::{SolverCache, SolverKind};
use crate::structure::{find_map2s, is_identity_map2};

pub fn rules(config: &RuleConfig, cache: &Arc<SolverCache>) -> Vec<Rewrite> {
    let mut rules: Vec<Rewrite> = BinopKind::ALL.into_iter().map(binop_fold).collect();
    rules.push(repeat());
    rules.push(repeat_over_map2());
    rules.extend(tabulate_over_map2());
    rules.push(Rewrite::new("structure-finder", any_list(), |g, _, s| {
        let mut found = find_map2s(g, s.rest("items").unwrap());
        found.retain(|t| !is_identity_map2(g, t));
        found
    }));
    rules.push(list_solver("list-solve", SolverKind::Plain, config.solver_eps, cache));
    if config.inverse {
        rules.push(list_solver("list-solve-sorted", SolverKind::Sorted, config.solver_eps, cache));
        rules.push(list_solver("list-solve-spherical", SolverKind::Spherical, config.solver_eps, cache));
    }
    rules
}

/// The earliest `kind` node of a class, as `(left, right)`.
fn binop_children(g: &EGraph, id: Id, kind: BinopKind) -> Option<(Id, Id)> {
    g.nodes(id).find(|n| n.op == Op::Binop(kind)).map(|n| (n.children[0], n.children[1]))
}

/// `(op (op (op a b) c) d) ⇝ (Fold op (List a b c d))`, applied only at the
/// top of a maximal left spine (the class is not itself the left operand of
/// another `op`) and following the earliest `op` node of each class.
fn binop_fold(kind: BinopKind) -> Rewrite {
    let name = format!("binop-fold-{}", kind.name().to_lowercase());
    let lhs = Pattern::node(Op::Binop(kind), vec![Pattern::var("a"), Pattern::var("b")]);
    Rewrite::new(name, lhs, move |g, id, s| {
        if g.parents(id).any(|(n, _)| n.op == Op::Binop(kind) && g.find(n.children[0]) == id) {
            return vec![];
        }
        let mut items = vec![s["b"]];
        let mut seen = vec![id];
        let mut cur = g.find(s["a"]);
        while let Some((left, right)) = binop_children(g, cur, kind).filter(|_| !seen.contains(&cur)) {
            seen.push(cur);
            items.push(right);
            cur = g.find(left);
        }
        items.push(cur);
        items.reverse();
        let list = Term::node(Op::List, items.into_iter().map(Term::Class).collect());
        vec![Term::node(Op::Fold(kind), vec![list])]
    })
}

/// `(List x x ... x) ⇝ (Repeat n x)` for two or more copies.
fn repeat() -> Rewrite {
    Rewrite::new("repeat", any_list(), |g, _, s| {
        let items = s.rest("items").unwrap();
        let first = items[0];
        if items.len() < 2 || items.iter().any(|&c| g.find(c) != g.find(first)) {
            return vec![];
        }
        vec![Term::node(Op::Repeat(items.len() as u32), vec![Term::Class(first)])]
    })
}

fn repeat_count(s: &Subst, name: &str) -> Option<u32> {
    match s.op(name)? {
        Op::Repeat(n) => Some(*n),
        _ => None,
    }
}

fn tabulate_bindings<'a>(s: &'a Subst, name: &str) -> Option<&'a [Binding]> {
    match s.op(name)? {
        Op::Tabulate(bs) => Some(bs),
        _ => None,
    }
}

fn map2_kind(s: &Subst) -> Option<AffineKind> {
    s.op("k").and_then(Op::affine_kind)
}

fn map2_of(left: Pattern, right: Pattern) -> Pattern {
    Pattern::bind("k", Op::Map2(AffineKind::Translate), vec![left, right])
}

fn repeat_of(name: &str, var: &str) -> Pattern {
    Pattern::bind(name, Op::Repeat(1), vec![Pattern::var(var)])
}

fn tabulate_of(name: &str, var: &str) -> Pattern {
    Pattern::bind(name, Op::Tabulate(vec![]), vec![Pattern::var(var)])
}

fn affine(kind: AffineKind, p: Id, c: Id) -> Term {
    Term::node(Op::Affine(kind), vec![Term::Class(p), Term::Class(c)])
}

/// `(Map2 k (Repeat n p) (Repeat n c)) ⇝ (Repeat n (k p c))`.
fn repeat_over_map2() -> Rewrite {
    let lhs = map2_of(repeat_of("r1", "p"), repeat_of("r2", "c"));
    Rewrite::new("repeat-over-map2", lhs, |_, _, s| {
        let (Some(n), Some(m), Some(k)) = (repeat_count(s, "r1"), repeat_count(s, "r2"), map2_kind(s)) else {
            return vec![];
        };
        if n != m {
            return vec![];
        }
        vec![Term::node(Op::Repeat(n), vec![affine(k, s["p"], s["c"])])]
    })
}

fn product(bs: &[Binding]) -> u64 {
    bs.iter().map(|b| u64::from(b.bound)).product()
}

fn bound_vars(bs: &[Binding]) -> Vec<&str> {
    bs.iter().map(|b| b.var.as_str()).collect()
}

/// Pushes `Map2` into a `Tabulate` body:
///
/// * `(Map2 k (Tabulate bs p) (Tabulate bs c)) ⇝ (Tabulate bs (k p c))`
/// * `(Map2 k (Tabulate bs p) (Repeat n c)) ⇝ (Tabulate bs (k p c))`
/// * `(Map2 k (Repeat n p) (Tabulate bs c)) ⇝ (Tabulate bs (k p c))`
///
/// where `n` is the product of the bounds of `bs` and the repeated item does
/// not mention the bound variables.
fn tabulate_over_map2() -> Vec<Rewrite> {
    let both = Rewrite::new("tabulate-over-map2", map2_of(tabulate_of("t1", "p"), tabulate_of("t2", "c")), |_, _, s| {
        match (tabulate_bindings(s, "t1"), tabulate_bindings(s, "t2"), map2_kind(s)) {
            (Some(a), Some(b), Some(k)) if a == b => {
                vec![Term::node(Op::Tabulate(a.to_vec()), vec![affine(k, s["p"], s["c"])])]
            }
            _ => vec![],
        }
    });
    let fixed = |g: &EGraph, s: &Subst, bs: &[Binding], repeated: &str| {
        let n = repeat_count(s, "r").map(u64::from);
        n == Some(product(bs)) && !may_mention(g, s[repeated], &bound_vars(bs))
    };
    let left = Rewrite::new(
        "tabulate-over-map2-repeat-cads",
        map2_of(tabulate_of("t", "p"), repeat_of("r", "c")),
        move |g, _, s| match (tabulate_bindings(s, "t"), map2_kind(s)) {
            (Some(bs), Some(k)) if fixed(g, s, bs, "c") => {
                vec![Term::node(Op::Tabulate(bs.to_vec()), vec![affine(k, s["p"], s["c"])])]
            }
            _ => vec![],
        },
    );
    let right = Rewrite::new(
        "tabulate-over-map2-repeat-params",
        map2_of(repeat_of("r", "p"), tabulate_of("t", "c")),
        move |g, _, s| match (tabulate_bindings(s, "t"), map2_kind(s)) {
            (Some(bs), Some(k)) if fixed(g, s, bs, "p") => {
                vec![Term::node(Op::Tabulate(bs.to_vec()), vec![affine(k, s["p"], s["c"])])]
            }
            _ => vec![],
        },
    );
    vec![both, left, right]
}

/// Solves lists of literal vectors. Lists of one repeated class, and fits
/// that come out constant, are left to [`repeat`]. The solvers form a
/// ladder (plain, sorted, spherical); each fires only when all earlier ones
/// find nothing.
fn list_solver(name: &str, kind: SolverKind, eps: f64, cache: &Arc<SolverCache>) -> Rewrite {
    let cache = Arc::clone(cache);
    Rewrite::new(name, any_list(), move |g, _, s| {
        let items = s.rest("items").unwrap();
        let repeated = items.iter().all(|&c| g.find(c) == g.find(items[0]));
        if repeated || items.iter().any(|&c| g.category(c) != Category::Vector) {
            return vec![];
        }
        let Some(points) = items.iter().map(|&c| g.vec_const(c)).collect::<Option<Vec<_>>>() else {
            return vec![];
        };
        let earlier: &[SolverKind] = match kind {
            SolverKind::Plain => &[],
            SolverKind::Sorted => &[SolverKind::Plain],
            SolverKind::Spherical => &[SolverKind::Plain, SolverKind::Sorted],
        };
        if earlier.iter().any(|&k| cache.solve(k, &points, eps).is_some()) {
            return vec![];
        }
        match cache.solve(kind, &points, eps) {
            Some(e) if !is_constant_tabulate(&e) => vec![Term::from_expr(&e)],
            _ => vec![],
        }
    })
}

/// A fit whose body ignores the index. Merging it with a near-constant list
/// would equate every reordering of that list, so it is left to `repeat`.
fn is_constant_tabulate(e: &Expr) -> bool {
    matches!(e, Expr::Tabulate(_, body) if free_vars(body).is_empty())
}
