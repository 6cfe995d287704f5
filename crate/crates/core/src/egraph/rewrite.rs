use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EGraph, ENode, Id, PatOp, Pattern, Subst};
use crate::lang::{Expr, Op};

/// A right-hand side: an expression whose leaves may be existing classes.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Class(Id),
    Node(Op, Vec<Term>),
}

impl Term {
    pub fn node(op: Op, children: Vec<Term>) -> Term {
        Term::Node(op, children)
    }

    pub fn leaf(op: Op) -> Term {
        Term::Node(op, Vec::new())
    }

    pub fn num(v: f64) -> Term {
        Term::leaf(Op::num(v))
    }

    pub fn vec3(v: [f64; 3]) -> Term {
        Term::node(Op::Vec3, v.iter().map(|&x| Term::num(x)).collect())
    }

    pub fn from_expr(e: &Expr) -> Term {
        let (op, children) = e.to_op();
        Term::Node(op, children.into_iter().map(Term::from_expr).collect())
    }
}

impl From<Id> for Term {
    fn from(id: Id) -> Term {
        Term::Class(id)
    }
}

impl EGraph {
    pub fn add_term(&mut self, t: &Term) -> Id {
        match t {
            Term::Class(id) => self.find(*id),
            Term::Node(op, children) => {
                let children = children.iter().map(|c| self.add_term(c)).collect();
                self.add(ENode::new(op.clone(), children))
            }
        }
    }
}

impl Pattern {
    /// Builds the term this pattern denotes under `subst`. Panics on unbound
    /// variables, which indicates a malformed rule.
    pub fn instantiate(&self, subst: &Subst) -> Term {
        match self {
            Pattern::Var(v) => Term::Class(subst[v.as_str()]),
            Pattern::Node { op, children, rest } => {
                let op = match op {
                    PatOp::Exact(op) => op.clone(),
                    PatOp::Bind(name, _) => subst.op(name).cloned().unwrap_or_else(|| panic!("?{name} is unbound")),
                };
                let mut kids: Vec<Term> = children.iter().map(|c| c.instantiate(subst)).collect();
                if let Some(r) = rest {
                    kids.extend(subst.rest(r).expect("rest variable bound").iter().map(|&id| Term::Class(id)));
                }
                Term::Node(op, kids)
            }
        }
    }
}

/// Computes replacement terms for a match; an empty result declines.
pub type Applier = Arc<dyn Fn(&EGraph, Id, &Subst) -> Vec<Term> + Send + Sync>;

#[derive(Clone)]
pub struct Rewrite {
    pub name: String,
    pub lhs: Pattern,
    applier: Applier,
}

impl fmt::Debug for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rewrite").field("name", &self.name).field("lhs", &self.lhs.to_string()).finish()
    }
}

impl Rewrite {
    pub fn new(
        name: impl Into<String>,
        lhs: Pattern,
        applier: impl Fn(&EGraph, Id, &Subst) -> Vec<Term> + Send + Sync + 'static,
    ) -> Self {
        Rewrite { name: name.into(), lhs, applier: Arc::new(applier) }
    }

    /// A purely syntactic rule `lhs ⇝ rhs`.
    pub fn syntactic(name: impl Into<String>, lhs: Pattern, rhs: Pattern) -> Self {
        Self::new(name, lhs, move |_, _, s| vec![rhs.instantiate(s)])
    }

    /// A syntactic rule that fires only when `guard` accepts the match.
    pub fn guarded(
        name: impl Into<String>,
        lhs: Pattern,
        rhs: Pattern,
        guard: impl Fn(&EGraph, Id, &Subst) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, lhs, move |g, id, s| if guard(g, id, s) { vec![rhs.instantiate(s)] } else { vec![] })
    }

    pub fn apply(&self, g: &EGraph, id: Id, subst: &Subst) -> Vec<Term> {
        (self.applier)(g, id, subst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Saturated,
    IterLimit,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_iters: usize,
    pub max_nodes: usize,
    pub max_seconds: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_iters: 30, max_nodes: 100_000, max_seconds: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub classes: usize,
    pub nodes: usize,
    pub seconds: f64,
    /// Per rule, in rule order: how many produced terms were merged in.
    pub applications: Vec<(String, usize)>,
}

fn fingerprint(g: &EGraph) -> (usize, usize, u64) {
    (g.number_of_classes(), g.total_size(), g.union_count())
}

/// Equality saturation: each iteration searches every rule against the
/// frozen graph (in parallel), then adds and merges all results, then
/// rebuilds. Stops when an iteration leaves the graph unchanged or a limit
/// trips.
pub fn run_saturation(g: &mut EGraph, rules: &[Rewrite], limits: &Limits) -> SaturationReport {
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(limits.max_seconds.max(0.0));
    let mut applications = vec![0usize; rules.len()];
    g.rebuild();
    let mut iterations = 0;
    let stop_reason = loop {
        if iterations >= limits.max_iters {
            break StopReason::IterLimit;
        }
        iterations += 1;
        let before = fingerprint(g);
        let frozen: &EGraph = g;
        let found: Vec<Vec<(Id, Vec<Term>)>> = rules
            .par_iter()
            .map(|rule| {
                if Instant::now() > deadline {
                    return Vec::new();
                }
                frozen
                    .search(&rule.lhs)
                    .into_iter()
                    .map(|(id, s)| (id, rule.apply(frozen, id, &s)))
                    .filter(|(_, terms)| !terms.is_empty())
                    .collect()
            })
            .collect();
        let mut over_nodes = false;
        'apply: for (count, matches) in applications.iter_mut().zip(found) {
            for (id, terms) in matches {
                for t in terms {
                    let new = g.add_term(&t);
                    g.merge(id, new);
                    *count += 1;
                }
                if g.total_size() > limits.max_nodes {
                    over_nodes = true;
                    break 'apply;
                }
            }
        }
        g.rebuild();
        if over_nodes || g.total_size() > limits.max_nodes {
            break StopReason::NodeLimit;
        }
        if Instant::now() > deadline {
            break StopReason::TimeLimit;
        }
        if fingerprint(g) == before {
            break StopReason::Saturated;
        }
    };
    SaturationReport {
        iterations,
        stop_reason,
        classes: g.number_of_classes(),
        nodes: g.total_size(),
        seconds: start.elapsed().as_secs_f64(),
        applications: rules.iter().map(|r| r.name.clone()).zip(applications).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    #[test]
    fn empty_rule_set_saturates_immediately() {
        let mut g = EGraph::new();
        g.add_expr(&parse("(Union (Sphere 1) (Cuboid [1, 2, 3]))").unwrap());
        let before = g.dump();
        let report = run_saturation(&mut g, &[], &Limits::default());
        assert_eq!(report.iterations, 1);
        assert_eq!(report.stop_reason, StopReason::Saturated);
        assert_eq!(g.dump(), before);
    }

    #[test]
    fn syntactic_rule_adds_equivalent_form() {
        let mut g = EGraph::new();
        let root = g.add_expr(&parse("(Union (Sphere 1) (Sphere 2))").unwrap());
        let comm = Rewrite::syntactic(
            "union-comm",
            Pattern::parse("(Union ?a ?b)").unwrap(),
            Pattern::parse("(Union ?b ?a)").unwrap(),
        );
        let report = run_saturation(&mut g, &[comm], &Limits::default());
        assert_eq!(report.stop_reason, StopReason::Saturated);
        assert_eq!(g.lookup_expr(&parse("(Union (Sphere 2) (Sphere 1))").unwrap()), Some(g.find(root)));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut g = EGraph::new();
        g.add_expr(&parse("(Sphere 1)").unwrap());
        // Every sphere spawns a bigger one, so this never saturates.
        let grow = Rewrite::new("grow", Pattern::parse("(Sphere ?r)").unwrap(), |g, id, s| {
            let r = g.num_const(s["r"]).unwrap();
            vec![Term::node(
                Op::Binop(crate::lang::BinopKind::Union),
                vec![Term::Class(id), Term::node(Op::Prim(crate::lang::PrimKind::Sphere), vec![Term::num(r + 1.0)])],
            )]
        });
        let limits = Limits { max_iters: 3, ..Limits::default() };
        let report = run_saturation(&mut g, &[grow], &limits);
        assert_eq!(report.iterations, 3);
        assert_eq!(report.stop_reason, StopReason::IterLimit);
    }
}
