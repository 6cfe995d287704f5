//! The rewrite rules, in five groups:
//!
//! * **reroll** — folding binary chains into `Fold`, `Repeat`, the structure
//!   finder, the arithmetic solvers, and pushing `Map2` into `Repeat` and
//!   `Tabulate` bodies;
//! * **cad identities** — semantics-preserving CSG identities that expose
//!   hidden regularity (half-turns as mirror scales, identity affines,
//!   scale/translate interchange, unit primitives);
//! * **inverse** — rules that introduce and eliminate `Sort`/`Unsort`,
//!   `Part`/`Unpart` and `Unspherical`;
//! * **bridge** — glue between lists and folds (flattening, splitting,
//!   lifting `Unsort` through `Unpart`);
//! * **numeric** — constant folding.
//!
//! Every rule is an equivalence under list evaluation; see `docs/rules.md`
//! for the catalogue.

mod bridge;
mod cad;
mod inverse;
mod numeric;
mod reroll;

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::egraph::{EGraph, Id, Pattern, Rewrite};
use crate::lang::Op;
use crate::solvers::SolverCache;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleGroup {
    Reroll,
    CadIdentities,
    Inverse,
    Bridge,
    Numeric,
}

impl RuleGroup {
    pub const ALL: [RuleGroup; 5] =
        [RuleGroup::Numeric, RuleGroup::Reroll, RuleGroup::Bridge, RuleGroup::CadIdentities, RuleGroup::Inverse];

    pub fn name(self) -> &'static str {
        match self {
            RuleGroup::Reroll => "reroll",
            RuleGroup::CadIdentities => "cad_identities",
            RuleGroup::Inverse => "inverse",
            RuleGroup::Bridge => "bridge",
            RuleGroup::Numeric => "numeric",
        }
    }
}

/// Which rule groups are active, and the solver tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleConfig {
    pub cad_identities: bool,
    pub inverse: bool,
    pub solver_eps: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig { cad_identities: true, inverse: true, solver_eps: 1e-3 }
    }
}

/// The rules of one group. Solver-backed rules share `cache`.
pub fn group_rules(group: RuleGroup, config: &RuleConfig, cache: &Arc<SolverCache>) -> Vec<Rewrite> {
    match group {
        RuleGroup::Reroll => reroll::rules(config, cache),
        RuleGroup::CadIdentities => cad::rules(),
        RuleGroup::Inverse => inverse::rules(),
        RuleGroup::Bridge => bridge::rules(),
        RuleGroup::Numeric => numeric::rules(),
    }
}

/// All enabled rules: numeric, reroll and bridge always; CAD identities and
/// inverse rules as configured.
pub fn rules(config: &RuleConfig) -> Vec<Rewrite> {
    let cache = Arc::new(SolverCache::new());
    RuleGroup::ALL
        .into_iter()
        .filter(|g| match g {
            RuleGroup::CadIdentities => config.cad_identities,
            RuleGroup::Inverse => config.inverse,
            _ => true,
        })
        .flat_map(|g| group_rules(g, config, &cache))
        .collect()
}

pub(crate) fn pat(text: &str) -> Pattern {
    Pattern::parse(text).unwrap_or_else(|e| panic!("bad rule pattern {text:?}: {e}"))
}

/// `(List ?items...)`.
pub(crate) fn any_list() -> Pattern {
    Pattern::node(Op::List, vec![]).with_rest("items")
}

pub(crate) fn vec3_const(g: &EGraph, id: Id) -> Option<[f64; 3]> {
    let v = g.vec_const(id)?;
    <[f64; 3]>::try_from(v).ok()
}

/// Conservatively decides whether class `id` may contain a free occurrence
/// of one of `vars`: true if any node reachable from it (through any node of
/// any class) is one of those variables.
pub(crate) fn may_mention(g: &EGraph, id: Id, vars: &[&str]) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack = vec![g.find(id)];
    while let Some(c) = stack.pop() {
        if !seen.insert(c) {
            continue;
        }
        for node in g.nodes(c) {
            if let Op::Var(v) = &node.op {
                if vars.contains(&v.as_str()) {
                    return true;
                }
            }
            stack.extend(node.children.iter().map(|&ch| g.find(ch)));
        }
    }
    false
}
