//! Graph cohomology on fragments of the fundamental cell.
//!
//! One-chains are antisymmetric edge functions; a chain is trivial exactly
//! when every loop sum vanishes, and for the quasimomentum chains
//! `psi_theta(u, v) = <offset(u, v), theta>` triviality for all theta reduces
//! to an exact integer statement: every basis cycle has total offset zero.
//! That integer form is what the flat-path criterion evaluates, so no
//! floating-point tolerance enters the topological verdict.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::lattice::{
    level_sets, CellOffset, Fragment, LevelSet, PeriodicGraph, Potential, Theta, VertexId,
};

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("vertex loop must start and end at the same vertex")]
    LoopNotClosed,
    #[error("vertices {u} and {v} are not adjacent in the fragment")]
    EdgeNotPresent { u: VertexId, v: VertexId },
    #[error(
        "chain is not a gradient: cycle through edge ({u}, {v}) has loop sum {loop_sum:.6e}"
    )]
    NontrivialClass {
        u: VertexId,
        v: VertexId,
        loop_sum: f64,
        cycle: Cycle,
    },
}

/// Antisymmetric edge function on a fragment, stored as one value per
/// canonical edge; the reversed orientation is the negation.
#[derive(Clone, Debug, PartialEq)]
pub struct OneChain {
    values: Vec<f64>,
}

impl OneChain {
    pub fn zero(frag: &Fragment) -> Self {
        OneChain {
            values: vec![0.0; frag.num_edges()],
        }
    }

    pub fn from_values(frag: &Fragment, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), frag.num_edges());
        OneChain { values }
    }

    /// The gradient chain of a vertex function: `value(u, v) = phi(v) - phi(u)`.
    pub fn gradient(frag: &Fragment, phi: &GaugePotential) -> Self {
        let values = frag
            .edges()
            .iter()
            .map(|e| phi.value(e.v) - phi.value(e.u))
            .collect();
        OneChain { values }
    }

    /// Chain value along edge `edge`, traversed forward or backward.
    pub fn value(&self, edge: usize, forward: bool) -> f64 {
        if forward {
            self.values[edge]
        } else {
            -self.values[edge]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Quasimomentum chain `psi_theta(u, v) = <offset(u, v), theta>`.
pub fn chain_psi_theta(frag: &Fragment, theta: &Theta) -> OneChain {
    let values = frag
        .edges()
        .iter()
        .map(|e| e.offset.dot(theta))
        .collect();
    OneChain { values }
}

/// Real vertex function on a fragment, used as the phase of a diagonal gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePotential {
    vertices: Vec<VertexId>,
    values: Vec<f64>,
}

impl GaugePotential {
    pub fn new(frag: &Fragment, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), frag.num_vertices());
        GaugePotential {
            vertices: frag.vertices().to_vec(),
            values,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: VertexId) -> f64 {
        let pos = self
            .vertices
            .binary_search(&v)
            .expect("vertex in gauge domain");
        self.values[pos]
    }

    pub fn get(&self, v: VertexId) -> Option<f64> {
        self.vertices.binary_search(&v).ok().map(|p| self.values[p])
    }
}

/// A vertex loop `(v_0, ..., v_l)` with `v_0 = v_l`, together with the edge
/// steps it takes and its total offset, the sum of oriented edge offsets
/// around the loop.
#[derive(Clone, Debug)]
pub struct Cycle {
    pub vertices: Vec<VertexId>,
    /// (edge index in the fragment, traversed forward?)
    pub steps: Vec<(usize, bool)>,
    pub total_offset: CellOffset,
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, " -> ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, " with offset {}", self.total_offset)
    }
}

/// Fundamental cycles of a fragment over a deterministic spanning forest.
#[derive(Clone, Debug)]
pub struct CycleBasis {
    pub cycles: Vec<Cycle>,
    pub beta0: usize,
    pub beta1: usize,
    forest: SpanningForest,
}

impl CycleBasis {
    /// Parent of `v` in the spanning forest, `None` for roots.
    pub fn forest_parent(&self, v: VertexId) -> Option<VertexId> {
        let frag_pos = self.forest.positions.binary_search(&v).ok()?;
        self.forest.parent[frag_pos].map(|(p, _, _)| self.forest.positions[p])
    }

    /// One root per connected component.
    pub fn roots(&self) -> Vec<VertexId> {
        self.forest
            .roots
            .iter()
            .map(|&p| self.forest.positions[p])
            .collect()
    }
}

#[derive(Clone, Debug)]
struct SpanningForest {
    /// fragment vertex ids, sorted (mirrors `Fragment::vertices`)
    positions: Vec<VertexId>,
    /// per vertex position: (parent position, edge index, parent-to-child forward?)
    parent: Vec<Option<(usize, usize, bool)>>,
    roots: Vec<usize>,
    /// offset picked up along the forest path root -> vertex
    offset_from_root: Vec<CellOffset>,
    /// vertex positions in breadth-first discovery order
    order: Vec<usize>,
    tree_edge: Vec<bool>,
}

/// Breadth-first spanning forest rooted at the lowest-index vertex of each
/// component, visiting neighbors in canonical edge order.
fn spanning_forest(frag: &Fragment) -> SpanningForest {
    let n = frag.num_vertices();
    let d = frag.dim();
    let mut parent = vec![None; n];
    let mut visited = vec![false; n];
    let mut offset_from_root = vec![CellOffset::zeros(d); n];
    let mut roots = Vec::new();
    let mut order = Vec::with_capacity(n);
    let mut tree_edge = vec![false; frag.num_edges()];

    for start in 0..n {
        if visited[start] {
            continue;
        }
        roots.push(start);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            order.push(p);
            for &(nbr, edge, forward) in frag.neighbors(p) {
                if visited[nbr] {
                    continue;
                }
                visited[nbr] = true;
                parent[nbr] = Some((p, edge, forward));
                offset_from_root[nbr] =
                    offset_from_root[p].add(&frag.oriented_offset(edge, forward));
                tree_edge[edge] = true;
                queue.push_back(nbr);
            }
        }
    }

    SpanningForest {
        positions: frag.vertices().to_vec(),
        parent,
        roots,
        offset_from_root,
        order,
        tree_edge,
    }
}

impl SpanningForest {
    /// Positions along the forest path from `p` up to its root, inclusive.
    fn path_to_root(&self, mut p: usize) -> Vec<usize> {
        let mut path = vec![p];
        while let Some((parent, _, _)) = self.parent[p] {
            path.push(parent);
            p = parent;
        }
        path
    }
}

/// (number of connected components, number of independent cycles).
pub fn betti_numbers(frag: &Fragment) -> (usize, usize) {
    let forest = spanning_forest(frag);
    let beta0 = forest.roots.len();
    let beta1 = frag.num_edges() + beta0 - frag.num_vertices();
    (beta0, beta1)
}

/// Fundamental cycle basis: one cycle per non-forest edge, its loop running
/// through the forest path between the edge's endpoints. Total offsets are
/// computed in exact integer arithmetic.
pub fn cycle_basis(frag: &Fragment) -> CycleBasis {
    let forest = spanning_forest(frag);
    let beta0 = forest.roots.len();
    let beta1 = frag.num_edges() + beta0 - frag.num_vertices();

    let mut cycles = Vec::with_capacity(beta1);
    for (edge, e) in frag.edges().iter().enumerate() {
        if forest.tree_edge[edge] {
            continue;
        }
        cycles.push(fundamental_cycle(frag, &forest, edge));
        debug_assert_eq!(
            cycles.last().unwrap().total_offset,
            e.offset
                .add(&forest.offset_from_root[frag.position(e.u).unwrap()])
                .add(
                    &forest.offset_from_root[frag.position(e.v).unwrap()].negated()
                ),
        );
    }
    debug_assert_eq!(cycles.len(), beta1);

    CycleBasis {
        cycles,
        beta0,
        beta1,
        forest,
    }
}

/// The loop `u -> v -> (forest path back to u)` for the non-forest edge
/// `(u, v)`, with offsets accumulated step by step.
fn fundamental_cycle(frag: &Fragment, forest: &SpanningForest, edge: usize) -> Cycle {
    let e = &frag.edges()[edge];
    let pu = frag.position(e.u).unwrap();
    let pv = frag.position(e.v).unwrap();

    // forest paths to the common ancestor
    let up_u = forest.path_to_root(pu);
    let up_v = forest.path_to_root(pv);
    let mut iu = up_u.len();
    let mut iv = up_v.len();
    while iu > 0 && iv > 0 && up_u[iu - 1] == up_v[iv - 1] {
        iu -= 1;
        iv -= 1;
    }
    // up_u[..=iu] runs u -> ancestor, up_v[..=iv] runs v -> ancestor
    let mut vertices = vec![e.u, e.v];
    let mut steps = vec![(edge, true)];
    let mut total = e.offset.clone();

    // climb from v to the ancestor
    for w in 0..iv {
        let child = up_v[w];
        let (parent, tree_edge, fwd) = forest.parent[child].unwrap();
        vertices.push(forest.positions[parent]);
        steps.push((tree_edge, !fwd));
        total = total.add(&frag.oriented_offset(tree_edge, !fwd));
    }
    // descend from the ancestor back to u
    for w in (0..iu).rev() {
        let child = up_u[w];
        let (_, tree_edge, fwd) = forest.parent[child].unwrap();
        vertices.push(forest.positions[child]);
        steps.push((tree_edge, fwd));
        total = total.add(&frag.oriented_offset(tree_edge, fwd));
    }

    debug_assert_eq!(vertices.first(), vertices.last());
    Cycle {
        vertices,
        steps,
        total_offset: total,
    }
}

/// Sum of chain values along a vertex loop. Errors if consecutive vertices
/// are not adjacent in the fragment or the loop is not closed.
pub fn loop_sum(
    frag: &Fragment,
    psi: &OneChain,
    vertices: &[VertexId],
) -> Result<f64, CohomologyError> {
    if vertices.len() >= 2 && vertices.first() != vertices.last() {
        return Err(CohomologyError::LoopNotClosed);
    }
    let mut sum = 0.0;
    for pair in vertices.windows(2) {
        let (edge, forward) = frag
            .edge_between(pair[0], pair[1])
            .ok_or(CohomologyError::EdgeNotPresent {
                u: pair[0],
                v: pair[1],
            })?;
        sum += psi.value(edge, forward);
    }
    Ok(sum)
}

fn cycle_chain_sum(psi: &OneChain, cycle: &Cycle) -> f64 {
    cycle
        .steps
        .iter()
        .map(|&(edge, forward)| psi.value(edge, forward))
        .sum()
}

/// Whether every quasimomentum chain restricted to this fragment is a
/// gradient, i.e. every basis cycle has total offset zero. When not, the
/// witness is a loop whose total offset is nonzero, hence a loop that winds
/// around the torus.
pub fn is_h1_trivial(frag: &Fragment) -> (bool, Option<Cycle>) {
    let basis = cycle_basis(frag);
    match basis
        .cycles
        .into_iter()
        .find(|c| !c.total_offset.is_zero())
    {
        Some(witness) => (false, Some(witness)),
        None => (true, None),
    }
}

/// Breadth-first search on the lifted subgraph, offsets confined to
/// `[-radius, radius]` per axis: returns true when some lift `(v, n)` with
/// `n != 0` is reachable from `(v, 0)`. Reaching a translate of the start
/// certifies an infinite path, since the walk repeats by periodicity.
pub fn brute_force_lift_oracle(g: &PeriodicGraph, keep: &[VertexId], radius: i64) -> bool {
    assert!(radius >= 1);
    let frag = g.induced_subgraph(keep);
    lift_oracle_on_fragment(&frag, radius)
}

pub(crate) fn lift_oracle_on_fragment(frag: &Fragment, radius: i64) -> bool {
    use std::collections::HashSet;
    let within = |offset: &[i64]| offset.iter().all(|&c| c.abs() <= radius);
    for start in 0..frag.num_vertices() {
        let mut seen: HashSet<(usize, Vec<i64>)> = HashSet::new();
        let origin = vec![0i64; frag.dim()];
        seen.insert((start, origin.clone()));
        let mut queue = VecDeque::from([(start, origin)]);
        while let Some((p, cell)) = queue.pop_front() {
            for &(nbr, edge, forward) in frag.neighbors(p) {
                let step = frag.oriented_offset(edge, forward);
                let next: Vec<i64> = cell
                    .iter()
                    .zip(step.components())
                    .map(|(a, b)| a + b)
                    .collect();
                if !within(&next) {
                    continue;
                }
                if nbr == start && next.iter().any(|&c| c != 0) {
                    return true;
                }
                if seen.insert((nbr, next.clone())) {
                    queue.push_back((nbr, next));
                }
            }
        }
    }
    false
}

pub const DEFAULT_CHAIN_TOL: f64 = 1e-10;

/// Solve `gradient(phi) = psi` with `phi = 0` on one root per component.
/// The forest fixes phi uniquely; each non-forest edge is then checked for
/// consistency, and the first failure is returned with its fundamental cycle
/// and loop sum.
pub fn solve_gauge(frag: &Fragment, psi: &OneChain) -> Result<GaugePotential, CohomologyError> {
    solve_gauge_with_tol(frag, psi, DEFAULT_CHAIN_TOL)
}

pub fn solve_gauge_with_tol(
    frag: &Fragment,
    psi: &OneChain,
    tol: f64,
) -> Result<GaugePotential, CohomologyError> {
    let forest = spanning_forest(frag);
    let mut values = vec![0.0; frag.num_vertices()];
    for &p in &forest.order {
        if let Some((parent, edge, forward)) = forest.parent[p] {
            values[p] = values[parent] + psi.value(edge, forward);
        }
    }
    for (edge, e) in frag.edges().iter().enumerate() {
        if forest.tree_edge[edge] {
            continue;
        }
        let pu = frag.position(e.u).unwrap();
        let pv = frag.position(e.v).unwrap();
        let residual = psi.value(edge, true) - (values[pv] - values[pu]);
        if residual.abs() > tol {
            let cycle = fundamental_cycle(frag, &forest, edge);
            let loop_sum = cycle_chain_sum(psi, &cycle);
            return Err(CohomologyError::NontrivialClass {
                u: e.u,
                v: e.v,
                loop_sum,
                cycle,
            });
        }
    }
    Ok(GaugePotential {
        vertices: frag.vertices().to_vec(),
        values,
    })
}

/// Criterion result for a single level set.
#[derive(Clone, Debug)]
pub struct LevelSetReport {
    pub value: f64,
    pub vertices: Vec<VertexId>,
    pub beta0: usize,
    pub beta1: usize,
    pub h1_trivial: bool,
    pub witness: Option<Cycle>,
}

/// Per-level-set criterion results plus the overall large-coupling verdict:
/// the spectrum measure collapses exactly when every level set is trivial.
#[derive(Clone, Debug)]
pub struct FlatPathReport {
    pub tolerance: f64,
    pub levels: Vec<LevelSetReport>,
}

impl FlatPathReport {
    pub fn predicts_decay(&self) -> bool {
        self.levels.iter().all(|l| l.h1_trivial)
    }
}

impl fmt::Display for FlatPathReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "flat-path criterion over {} level set(s), value tolerance {:e}",
            self.levels.len(),
            self.tolerance
        )?;
        for l in &self.levels {
            write!(
                f,
                "  a = {:.11e}: {} vertex(es), beta0 = {}, beta1 = {}, ",
                l.value,
                l.vertices.len(),
                l.beta0,
                l.beta1
            )?;
            match (&l.h1_trivial, &l.witness) {
                (true, _) => writeln!(f, "trivial")?,
                (false, Some(w)) => writeln!(f, "nontrivial; witness {w}")?,
                (false, None) => writeln!(f, "nontrivial")?,
            }
        }
        if self.predicts_decay() {
            writeln!(f, "prediction: spectrum measure -> 0 at large coupling")
        } else {
            writeln!(
                f,
                "prediction: spectrum measure stays bounded below at large coupling"
            )
        }
    }
}

/// Run the criterion on every level set of the potential.
pub fn flat_path_report(g: &PeriodicGraph, q: &Potential, tol: f64) -> FlatPathReport {
    let levels = level_sets(g, q, tol)
        .into_iter()
        .map(|set| level_set_report(g, &set))
        .collect();
    FlatPathReport {
        tolerance: tol,
        levels,
    }
}

pub fn level_set_report(g: &PeriodicGraph, set: &LevelSet) -> LevelSetReport {
    let frag = g.induced_subgraph(&set.vertices);
    let (beta0, beta1) = betti_numbers(&frag);
    let (h1_trivial, witness) = is_h1_trivial(&frag);
    LevelSetReport {
        value: set.value,
        vertices: set.vertices.clone(),
        beta0,
        beta1,
        h1_trivial,
        witness,
    }
}
