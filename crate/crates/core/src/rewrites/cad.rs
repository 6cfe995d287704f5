use super::{pat, vec3_const};
use crate::egraph::{EGraph, Id, Rewrite, Subst, Term};
use crate::lang::{AffineKind, Category, Op};
use crate::scalar::round_sig;

pub fn rules() -> Vec<Rewrite> {
    let mut rules = vec![
        Rewrite::syntactic("half-turn-to-mirror", pat("(Rotate [0, 0, 180] ?c)"), pat("(Scale [-1, -1, 1] ?c)")),
        Rewrite::syntactic("mirror-to-half-turn", pat("(Scale [-1, -1, 1] ?c)"), pat("(Rotate [0, 0, 180] ?c)")),
        Rewrite::syntactic("rotate-identity-elim", pat("(Rotate [0, 0, 0] ?c)"), pat("?c")),
        Rewrite::syntactic("translate-identity-elim", pat("(Translate [0, 0, 0] ?c)"), pat("?c")),
        Rewrite::syntactic("scale-identity-elim", pat("(Scale [1, 1, 1] ?c)"), pat("?c")),
    ];
    rules.extend(identity_intro());
    rules.extend([scale_translate_interchange(), translate_scale_interchange(), scale_combine(), translate_combine()]);
    rules.extend(unit_primitives());
    rules
}

/// `c ⇝ (k identity c)` for each affine kind, restricted to CAD list
/// elements that lack a `k` node while some sibling in the same list has
/// one, so that lists mixing bare and transformed items still present a
/// common affine kind to the structure finder.
fn identity_intro() -> Vec<Rewrite> {
    [(AffineKind::Rotate, [0.0; 3]), (AffineKind::Translate, [0.0; 3]), (AffineKind::Scale, [1.0; 3])]
        .into_iter()
        .map(|(kind, identity)| {
            let name = format!("{}-identity-intro", kind.name().to_lowercase());
            Rewrite::new(name, pat("?c"), move |g, id, _| {
                let has_kind = |c: Id| g.nodes(c).any(|n| n.op == Op::Affine(kind));
                if g.category(id) != Category::Cad || has_kind(id) {
                    return vec![];
                }
                let sibling_has = g
                    .parents(id)
                    .filter(|(n, _)| n.op == Op::List)
                    .any(|(n, _)| n.children.iter().any(|&c| has_kind(c)));
                if !sibling_has {
                    return vec![];
                }
                vec![Term::node(Op::Affine(kind), vec![Term::vec3(identity), Term::Class(id)])]
            })
        })
        .collect()
}

fn consts(g: &EGraph, s: &Subst, a: &str, b: &str) -> Option<([f64; 3], [f64; 3])> {
    Some((vec3_const(g, s[a])?, vec3_const(g, s[b])?))
}

/// Componentwise `f`, rounded and snapped onto nearby literals already in
/// the graph.
fn zip3(g: &EGraph, a: [f64; 3], b: [f64; 3], f: impl Fn(f64, f64) -> f64) -> [f64; 3] {
    let r = |x, y| g.snap_num(round_sig(f(x, y)));
    [r(a[0], b[0]), r(a[1], b[1]), r(a[2], b[2])]
}

fn affine(kind: AffineKind, v: [f64; 3], child: Term) -> Term {
    Term::node(Op::Affine(kind), vec![Term::vec3(v), child])
}

/// `(Scale s (Translate t c)) ⇝ (Translate s·t (Scale s c))`.
fn scale_translate_interchange() -> Rewrite {
    Rewrite::new("scale-translate-interchange", pat("(Scale ?s (Translate ?t ?c))"), |g, _, s| {
        let Some((sv, tv)) = consts(g, s, "s", "t") else { return vec![] };
        let inner = Term::node(Op::Affine(AffineKind::Scale), vec![Term::Class(s["s"]), Term::Class(s["c"])]);
        vec![affine(AffineKind::Translate, zip3(g, sv, tv, |a, b| a * b), inner)]
    })
}

/// `(Translate t (Scale s c)) ⇝ (Scale s (Translate t/s c))` for nonzero `s`.
fn translate_scale_interchange() -> Rewrite {
    Rewrite::new("translate-scale-interchange", pat("(Translate ?t (Scale ?s ?c))"), |g, _, s| {
        let Some((sv, tv)) = consts(g, s, "s", "t") else { return vec![] };
        if sv.contains(&0.0) {
            return vec![];
        }
        let inner = affine(AffineKind::Translate, zip3(g, tv, sv, |t, s| t / s), Term::Class(s["c"]));
        vec![Term::node(Op::Affine(AffineKind::Scale), vec![Term::Class(s["s"]), inner])]
    })
}

/// `(Scale a (Scale b c)) ⇝ (Scale a·b c)`; the splitting direction is
/// omitted because it has no bound.
fn scale_combine() -> Rewrite {
    Rewrite::new("scale-combine", pat("(Scale ?a (Scale ?b ?c))"), |g, _, s| {
        let Some((a, b)) = consts(g, s, "a", "b") else { return vec![] };
        vec![affine(AffineKind::Scale, zip3(g, a, b, |x, y| x * y), Term::Class(s["c"]))]
    })
}

/// `(Translate a (Translate b c)) ⇝ (Translate a+b c)`.
fn translate_combine() -> Rewrite {
    Rewrite::new("translate-combine", pat("(Translate ?a (Translate ?b ?c))"), |g, _, s| {
        let Some((a, b)) = consts(g, s, "a", "b") else { return vec![] };
        vec![affine(AffineKind::Translate, zip3(g, a, b, |x, y| x + y), Term::Class(s["c"]))]
    })
}

/// Guard: every named variable is a positive literal, and not all are one.
fn positive_non_unit(vars: &'static [&'static str]) -> impl Fn(&EGraph, Id, &Subst) -> bool {
    move |g, _, s| {
        let vals: Option<Vec<f64>> = vars.iter().map(|v| g.num_const(s[v])).collect();
        vals.is_some_and(|vals| vals.iter().all(|&x| x > 0.0) && vals.iter().any(|&x| x != 1.0))
    }
}

/// Primitives and scaled unit primitives, in both directions, for positive
/// parameters.
fn unit_primitives() -> Vec<Rewrite> {
    let pairs: [(&str, &str, &str, &'static [&'static str]); 4] = [
        ("cuboid", "(Cuboid [?x, ?y, ?z])", "(Scale [?x, ?y, ?z] (Cuboid [1, 1, 1]))", &["x", "y", "z"]),
        ("sphere", "(Sphere ?r)", "(Scale [?r, ?r, ?r] (Sphere 1))", &["r"]),
        ("cylinder", "(Cylinder [?h, ?r])", "(Scale [?r, ?r, ?h] (Cylinder [1, 1]))", &["h", "r"]),
        ("hexprism", "(HexPrism [?h, ?r])", "(Scale [?r, ?r, ?h] (HexPrism [1, 1]))", &["h", "r"]),
    ];
    pairs
        .into_iter()
        .flat_map(|(name, prim, unit, vars)| {
            [
                Rewrite::guarded(format!("{name}-to-unit"), pat(prim), pat(unit), positive_non_unit(vars)),
                Rewrite::guarded(format!("unit-to-{name}"), pat(unit), pat(prim), positive_non_unit(vars)),
            ]
        })
        .collect()
}
