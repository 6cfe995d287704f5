use crate::egraph::{Pattern, Rewrite, Term};
use crate::lang::{ArithOp, Op};

/// `(op a b) ⇝ value` when both operands are literals.
pub fn rules() -> Vec<Rewrite> {
    let lhs = Pattern::bind("op", Op::Arith(ArithOp::Add), vec![Pattern::var("a"), Pattern::var("b")]);
    vec![Rewrite::new("constant-fold", lhs, |g, _, s| {
        let Some(Op::Arith(op)) = s.op("op") else { return vec![] };
        match (g.num_const(s["a"]), g.num_const(s["b"])) {
            (Some(a), Some(b)) => op.apply(a, b).map(Term::num).into_iter().collect(),
            _ => vec![],
        }
    })]
}
