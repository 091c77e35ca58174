//! Structural checks on a network: conservation of fast molecules,
//! irreducibility of the fast dynamics at a slow state, and the boundary
//! behaviour of the rates.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::{FastStateSpace, MultiScaleNetwork, ReactionClass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationViolation {
    pub reaction: usize,
    pub fast_jump_sum: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub pass: bool,
    pub violations: Vec<ConservationViolation>,
}

pub fn check_conservation(net: &MultiScaleNetwork) -> ConservationReport {
    let violations: Vec<_> = net
        .conservation_violations()
        .into_iter()
        .map(|i| ConservationViolation { reaction: i, fast_jump_sum: net.reactions()[i].fast_jump_sum() })
        .collect();
    ConservationReport { pass: violations.is_empty(), violations }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrreducibilityReport {
    pub pass: bool,
    pub x: Vec<f64>,
    /// Strongly connected components as sorted state indices, ordered by
    /// their smallest member.
    pub components: Vec<Vec<usize>>,
    pub violations: Vec<String>,
}

/// Positive off-diagonal entries of the fast transition matrix at `x`:
/// `(from, to, rate)` summed over coupled and fast-only reactions.
pub fn fast_transitions(net: &MultiScaleNetwork, fss: &FastStateSpace, x: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for from in 0..fss.len() {
        let y = fss.state(from);
        for r in net.reactions().iter().filter(|r| r.class().moves_fast()) {
            let Some(to) = fss.shifted(from, &r.gamma_y) else { continue };
            let rate = r.rate.eval(x, y);
            if rate > 0.0 {
                out.push((from, to, rate));
            }
        }
    }
    out
}

pub fn check_irreducibility(net: &MultiScaleNetwork, x: &[f64], fss: &FastStateSpace) -> IrreducibilityReport {
    let mut graph = DiGraph::<(), ()>::with_capacity(fss.len(), 0);
    let nodes: Vec<_> = (0..fss.len()).map(|_| graph.add_node(())).collect();
    for (from, to, _) in fast_transitions(net, fss, x) {
        graph.update_edge(nodes[from], nodes[to], ());
    }
    let mut components: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    components.sort();
    let pass = components.len() == 1;
    let violations = if pass {
        Vec::new()
    } else {
        vec![format!("fast transition graph has {} strongly connected components", components.len())]
    };
    IrreducibilityReport { pass, x: x.to_vec(), components, violations }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductFormEntry {
    pub reaction: usize,
    pub pass: bool,
    /// Slow indices `i` with `gamma_x[i] < 0` where the rate does not vanish at `x_i = 0`.
    pub failing_indices: Vec<usize>,
    pub single_monomial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductFormReport {
    pub pass: bool,
    pub reactions: Vec<ProductFormEntry>,
    pub violations: Vec<usize>,
}

/// Checks that a reaction consuming slow species `i` has a rate that vanishes
/// on the face `x_i = 0`. Monotonicity of the factorization is not decided
/// here and stays a manual obligation.
pub fn check_product_form(net: &MultiScaleNetwork) -> ProductFormReport {
    let reactions: Vec<ProductFormEntry> = net
        .reactions()
        .iter()
        .enumerate()
        .map(|(idx, r)| {
            let failing_indices: Vec<usize> = r
                .gamma_x
                .iter()
                .enumerate()
                .filter(|&(i, &g)| g < 0 && !r.rate.vanishes_at_zero(i))
                .map(|(i, _)| i)
                .collect();
            ProductFormEntry {
                reaction: idx,
                pass: failing_indices.is_empty(),
                failing_indices,
                single_monomial: r.rate.monomials().len() == 1,
            }
        })
        .collect();
    let violations: Vec<usize> = reactions.iter().filter(|e| !e.pass).map(|e| e.reaction).collect();
    ProductFormReport { pass: violations.is_empty(), reactions, violations }
}

/// Reaction indices per class, in reaction order.
pub fn partition_by_class(net: &MultiScaleNetwork) -> [Vec<usize>; 3] {
    let mut out: [Vec<usize>; 3] = Default::default();
    for (i, r) in net.reactions().iter().enumerate() {
        let slot = match r.class() {
            ReactionClass::SlowOnly => 0,
            ReactionClass::Coupled => 1,
            ReactionClass::FastOnly => 2,
        };
        out[slot].push(i);
    }
    out
}
