use std::fmt;

use super::{EGraph, ENode, Id};
use crate::lang::{parse, Expr, Op, ParseError};

/// Operator position of a pattern node.
#[derive(Debug, Clone, PartialEq)]
pub enum PatOp {
    /// Matches exactly this operator, payload included.
    Exact(Op),
    /// Matches any operator of the template's constructor and binds it, so
    /// that e.g. `(?aff ?p ?c)` can match every affine kind.
    Bind(String, Op),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    /// `?x`: binds (or must agree with) an e-class.
    Var(String),
    /// An operator applied to child patterns; `rest` binds any further
    /// children of a variadic node.
    Node { op: PatOp, children: Vec<Pattern>, rest: Option<String> },
}

impl Pattern {
    pub fn var(name: &str) -> Pattern {
        Pattern::Var(name.trim_start_matches('?').to_string())
    }

    pub fn node(op: Op, children: Vec<Pattern>) -> Pattern {
        Pattern::Node { op: PatOp::Exact(op), children, rest: None }
    }

    pub fn bind(name: &str, template: Op, children: Vec<Pattern>) -> Pattern {
        Pattern::Node { op: PatOp::Bind(name.trim_start_matches('?').to_string(), template), children, rest: None }
    }

    /// Lets a variadic node match extra trailing children, bound as a list.
    pub fn with_rest(self, name: &str) -> Pattern {
        match self {
            Pattern::Node { op, children, .. } => {
                Pattern::Node { op, children, rest: Some(name.trim_start_matches('?').to_string()) }
            }
            var => var,
        }
    }

    /// Parses a pattern in expression syntax where identifiers starting with
    /// `?` are pattern variables, e.g. `(Scale ?v (Translate ?w ?c))`.
    pub fn parse(text: &str) -> Result<Pattern, ParseError> {
        Ok(Self::from_expr(&parse(text)?))
    }

    pub fn from_expr(e: &Expr) -> Pattern {
        if let Expr::Var(name) = e {
            if name.starts_with('?') {
                return Pattern::var(name);
            }
        }
        let (op, children) = e.to_op();
        Pattern::node(op, children.into_iter().map(Pattern::from_expr).collect())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "?{v}"),
            Pattern::Node { op, children, rest } => {
                let leaf = children.is_empty() && rest.is_none();
                if !leaf {
                    f.write_str("(")?;
                }
                match op {
                    PatOp::Exact(op) => write!(f, "{op}")?,
                    PatOp::Bind(name, _) => write!(f, "?{name}")?,
                }
                for c in children {
                    write!(f, " {c}")?;
                }
                if let Some(r) = rest {
                    write!(f, " ?{r}...")?;
                }
                if !leaf {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// Bindings produced by a match.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Subst {
    classes: Vec<(String, Id)>,
    ops: Vec<(String, Op)>,
    rests: Vec<(String, Vec<Id>)>,
}

impl Subst {
    pub fn get(&self, name: &str) -> Option<Id> {
        self.classes.iter().find(|(n, _)| n == name).map(|(_, id)| *id)
    }

    pub fn op(&self, name: &str) -> Option<&Op> {
        self.ops.iter().find(|(n, _)| n == name).map(|(_, op)| op)
    }

    pub fn rest(&self, name: &str) -> Option<&[Id]> {
        self.rests.iter().find(|(n, _)| n == name).map(|(_, ids)| ids.as_slice())
    }

    pub fn insert(&mut self, name: &str, id: Id) {
        self.classes.push((name.to_string(), id));
    }
}

impl std::ops::Index<&str> for Subst {
    type Output = Id;

    fn index(&self, name: &str) -> &Id {
        self.classes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, id)| id)
            .unwrap_or_else(|| panic!("pattern variable ?{name} is unbound"))
    }
}

impl EGraph {
    /// All `(class, substitution)` pairs where the class represents an
    /// instance of the pattern, in class order.
    pub fn search(&self, pat: &Pattern) -> Vec<(Id, Subst)> {
        self.class_ids().flat_map(|id| self.search_class(pat, id).into_iter().map(move |s| (id, s))).collect()
    }

    /// Distinct substitutions under which class `id` matches the pattern.
    pub fn search_class(&self, pat: &Pattern, id: Id) -> Vec<Subst> {
        let mut out = Vec::new();
        self.match_class(pat, id, Subst::default(), &mut out);
        let mut unique: Vec<Subst> = Vec::with_capacity(out.len());
        for s in out {
            if !unique.contains(&s) {
                unique.push(s);
            }
        }
        unique
    }

    fn match_class(&self, pat: &Pattern, id: Id, subst: Subst, out: &mut Vec<Subst>) {
        let id = self.find(id);
        match pat {
            Pattern::Var(v) => match subst.get(v) {
                Some(bound) if self.find(bound) != id => {}
                Some(_) => out.push(subst),
                None => {
                    let mut s = subst;
                    s.insert(v, id);
                    out.push(s);
                }
            },
            Pattern::Node { .. } => {
                for node in self.nodes(id) {
                    self.match_node(pat, node, subst.clone(), out);
                }
            }
        }
    }

    fn match_node(&self, pat: &Pattern, node: &ENode, mut subst: Subst, out: &mut Vec<Subst>) {
        let Pattern::Node { op, children, rest } = pat else {
            unreachable!("variables match classes, not nodes")
        };
        match op {
            PatOp::Exact(o) => {
                if *o != node.op {
                    return;
                }
            }
            PatOp::Bind(name, template) => {
                if !template.same_shape(&node.op) {
                    return;
                }
                match subst.op(name) {
                    Some(bound) if *bound != node.op => return,
                    Some(_) => {}
                    None => subst.ops.push((name.clone(), node.op.clone())),
                }
            }
        }
        let arity_ok = match rest {
            None => node.children.len() == children.len(),
            Some(_) => node.children.len() >= children.len(),
        };
        if !arity_ok {
            return;
        }
        let mut partial = vec![subst];
        for (p, &c) in children.iter().zip(&node.children) {
            let mut next = Vec::new();
            for s in partial {
                self.match_class(p, c, s, &mut next);
            }
            if next.is_empty() {
                return;
            }
            partial = next;
        }
        for mut s in partial {
            if let Some(r) = rest {
                let tail: Vec<Id> = node.children[children.len()..].iter().map(|&c| self.find(c)).collect();
                match s.rest(r) {
                    Some(bound) if bound != tail.as_slice() => continue,
                    Some(_) => {}
                    None => s.rests.push((r.clone(), tail)),
                }
            }
            out.push(s);
        }
    }
}
