use thiserror::Error;

use super::{EGraph, ENode, Id};
use crate::lang::{Cost, Expr, Op};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("class {0} has no finite-cost representation")]
    NoFiniteExtraction(Id),
}

/// Minimal-cost representatives, computed by a bottom-up fixpoint. A class
/// only receives a cost through a node whose children all have one, so
/// self-referential nodes never look cheap.
pub struct Extractor<'a> {
    graph: &'a EGraph,
    best: Vec<Option<(Cost, usize)>>,
}

/// Size-based node cost: one per node, infinite for inverse forms.
pub fn node_size(op: &Op) -> Cost {
    if op.is_inverse() {
        Cost::INFINITE
    } else {
        Cost::new(1)
    }
}

impl<'a> Extractor<'a> {
    pub fn new(graph: &'a EGraph) -> Self {
        Self::with_cost(graph, node_size)
    }

    /// Total cost of a node is `node_cost(op)` plus its children's costs.
    pub fn with_cost(graph: &'a EGraph, node_cost: impl Fn(&Op) -> Cost) -> Self {
        let mut best: Vec<Option<(Cost, usize)>> = vec![None; graph.classes.len()];
        let node_total = |best: &[Option<(Cost, usize)>], node: &ENode| -> Option<Cost> {
            let own = node_cost(&node.op);
            if !own.is_finite() {
                return None;
            }
            let mut total = own;
            for &c in &node.children {
                total = total + best[graph.find(c).index()]?.0;
            }
            total.is_finite().then_some(total)
        };
        loop {
            let mut changed = false;
            for id in graph.class_ids() {
                for (i, node) in graph.nodes(id).enumerate() {
                    let Some(c) = node_total(&best, node) else { continue };
                    let slot = &mut best[id.index()];
                    if slot.is_none_or(|(old, _)| c < old) {
                        *slot = Some((c, i));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Extractor { graph, best }
    }

    pub fn cost(&self, id: Id) -> Cost {
        self.best[self.graph.find(id).index()].map_or(Cost::INFINITE, |(c, _)| c)
    }

    pub fn best_node(&self, id: Id) -> Option<&'a ENode> {
        let id = self.graph.find(id);
        let (_, i) = self.best[id.index()]?;
        self.graph.nodes(id).nth(i)
    }

    pub fn extract(&self, id: Id) -> Result<Expr, ExtractError> {
        let node = self.best_node(id).ok_or(ExtractError::NoFiniteExtraction(self.graph.find(id)))?;
        let children = node.children.iter().map(|&c| self.extract(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(Expr::from_op(node.op.clone(), children))
    }
}

impl EGraph {
    /// The smallest program represented by `root`.
    pub fn extract(&self, root: Id) -> Result<Expr, ExtractError> {
        Extractor::new(self).extract(root)
    }
}
