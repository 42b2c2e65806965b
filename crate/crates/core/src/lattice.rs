//! ℤᵈ-periodic graphs through their quotient data.
//!
//! A periodic graph is stored as its fundamental cell: `nu` vertices plus a
//! set of quotient edges `u ~ v + offset`, where the integer offset records
//! which translate of `v` the edge reaches. Spectra depend only on this
//! combinatorial data, so vertex positions are never stored.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Index of a vertex in the fundamental cell, in `[0, nu)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Integer lattice translation, one component per spatial axis.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CellOffset(Vec<i64>);

impl CellOffset {
    pub fn new(components: Vec<i64>) -> Self {
        CellOffset(components)
    }

    pub fn zeros(d: usize) -> Self {
        CellOffset(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn negated(&self) -> Self {
        CellOffset(self.0.iter().map(|&c| -c).collect())
    }

    pub fn add(&self, rhs: &CellOffset) -> Self {
        debug_assert_eq!(self.dim(), rhs.dim());
        CellOffset(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }

    /// Inner product with a quasimomentum, `sum_j offset_j * theta_j`.
    pub fn dot(&self, theta: &Theta) -> f64 {
        debug_assert_eq!(self.dim(), theta.dim());
        self.0
            .iter()
            .zip(theta.components())
            .map(|(&n, &t)| n as f64 * t)
            .sum()
    }
}

impl fmt::Display for CellOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A point of the d-torus, components reduced to `[0, 1)`.
#[derive(Clone, PartialEq, Debug)]
pub struct Theta(Vec<f64>);

impl Theta {
    pub fn new(components: Vec<f64>) -> Self {
        Theta(
            components
                .into_iter()
                .map(|t| {
                    let r = t.rem_euclid(1.0);
                    // rem_euclid can return exactly 1.0 for tiny negative inputs
                    if r >= 1.0 {
                        0.0
                    } else {
                        r
                    }
                })
                .collect(),
        )
    }

    pub fn zero(d: usize) -> Self {
        Theta(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// One quotient edge `u ~ v + offset`.
///
/// Edges are stored once per unordered pair in canonical orientation: the
/// lower vertex id first, and for self-pairs the lexicographically smaller of
/// the two opposite offsets. The reversed edge `(v, u, -offset)` is implied,
/// which makes the offset map antisymmetric by construction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct QuotientEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub offset: CellOffset,
}

impl QuotientEdge {
    pub fn canonical(u: VertexId, v: VertexId, offset: CellOffset) -> Self {
        if u.0 > v.0 {
            QuotientEdge {
                u: v,
                v: u,
                offset: offset.negated(),
            }
        } else if u == v {
            let neg = offset.negated();
            let offset = if neg < offset { neg } else { offset };
            QuotientEdge { u, v, offset }
        } else {
            QuotientEdge { u, v, offset }
        }
    }

    pub fn is_self_pair(&self) -> bool {
        self.u == self.v
    }
}

impl fmt::Display for QuotientEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.u, self.v, self.offset)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    EmptyCell,
    #[error("spatial dimension must be at least 1")]
    ZeroDimension,
    #[error("edge #{edge} ({u}, {v}): vertex index out of range (cell has {num_vertices} vertices)")]
    VertexOutOfRange {
        edge: usize,
        u: u32,
        v: u32,
        num_vertices: u32,
    },
    #[error("edge #{edge} ({u}, {v}): offset has {got} components, expected {expected}")]
    OffsetDimension {
        edge: usize,
        u: u32,
        v: u32,
        expected: usize,
        got: usize,
    },
    #[error("refinement factors must have one entry >= 1 per axis")]
    BadFactors,
    #[error("no refinement factors up to {cap} per axis make the graph admissible")]
    RefinementBoundExceeded { cap: usize },
    #[error("potential has {got} values, expected {expected}")]
    PotentialLength { expected: usize, got: usize },
    #[error("potential value at vertex {vertex} is not finite")]
    NonFinitePotential { vertex: u32 },
    #[error("hypercubic cell dims must all be >= 1")]
    BadCellDims,
}

/// ℤᵈ-periodic graph given by its fundamental cell.
///
/// The type itself admits self-pairs and parallel offsets so that raw input
/// can be represented, inspected with [`PeriodicGraph::validate`], and then
/// repaired by [`refine_period`]. Operators are only assembled for admissible
/// graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicGraph {
    d: usize,
    num_vertices: u32,
    edges: Vec<QuotientEdge>,
}

impl PeriodicGraph {
    /// Build a graph from raw edges `(u, v, offset)` in either orientation.
    /// Edges are canonicalized, sorted, and deduplicated.
    pub fn new(
        d: usize,
        num_vertices: u32,
        edges: impl IntoIterator<Item = (u32, u32, Vec<i64>)>,
    ) -> Result<Self, GraphError> {
        if d == 0 {
            return Err(GraphError::ZeroDimension);
        }
        if num_vertices == 0 {
            return Err(GraphError::EmptyCell);
        }
        let mut canonical = Vec::new();
        for (i, (u, v, offset)) in edges.into_iter().enumerate() {
            if u >= num_vertices || v >= num_vertices {
                return Err(GraphError::VertexOutOfRange {
                    edge: i,
                    u,
                    v,
                    num_vertices,
                });
            }
            if offset.len() != d {
                return Err(GraphError::OffsetDimension {
                    edge: i,
                    u,
                    v,
                    expected: d,
                    got: offset.len(),
                });
            }
            canonical.push(QuotientEdge::canonical(
                VertexId(u),
                VertexId(v),
                CellOffset::new(offset),
            ));
        }
        canonical.sort();
        canonical.dedup();
        Ok(PeriodicGraph {
            d,
            num_vertices,
            edges: canonical,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices as usize
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.num_vertices).map(VertexId)
    }

    /// Canonical edge list, sorted; one entry per unordered edge.
    pub fn edges(&self) -> &[QuotientEdge] {
        &self.edges
    }

    /// Number of neighbors of any lift of `v` in the full graph.
    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .map(|e| (e.u == v) as usize + (e.v == v) as usize)
            .sum()
    }

    pub fn max_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Check the admissibility rules: no self-pairs and at most one offset
    /// per unordered vertex pair. An empty report means the graph is
    /// admissible. Reversed-edge presence holds by construction and is listed
    /// only when a future non-canonical source could violate it.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut per_pair: BTreeMap<(VertexId, VertexId), Vec<CellOffset>> = BTreeMap::new();
        for e in &self.edges {
            if e.is_self_pair() {
                violations.push(Violation::SelfLoop(e.clone()));
            }
            per_pair
                .entry((e.u, e.v))
                .or_default()
                .push(e.offset.clone());
        }
        for ((u, v), offsets) in per_pair {
            if offsets.len() > 1 {
                violations.push(Violation::MultipleOffsets { u, v, offsets });
            }
        }
        ValidationReport { violations }
    }

    pub fn is_admissible(&self) -> bool {
        self.validate().violations.is_empty()
    }

    /// Induced subgraph on `keep`: exactly the quotient edges with both
    /// endpoints inside the subset, offsets preserved, vertex ids unchanged.
    pub fn induced_subgraph(&self, keep: &[VertexId]) -> Fragment {
        let mut vertices: Vec<VertexId> = keep.to_vec();
        vertices.sort();
        vertices.dedup();
        let edges = self
            .edges
            .iter()
            .filter(|e| {
                vertices.binary_search(&e.u).is_ok() && vertices.binary_search(&e.v).is_ok()
            })
            .cloned()
            .collect();
        Fragment::build(self.d, vertices, edges)
    }

    /// The whole fundamental cell as a fragment.
    pub fn as_fragment(&self) -> Fragment {
        let vertices: Vec<VertexId> = self.vertices().collect();
        Fragment::build(self.d, vertices, self.edges.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// An oriented edge whose reverse is missing. Canonical storage implies
    /// the reverse of every edge, so [`PeriodicGraph::new`] never produces
    /// this; the variant completes the report vocabulary.
    MissingReverse(QuotientEdge),
    /// Edge with both endpoints on the same cell vertex (`u ~ u + n`).
    SelfLoop(QuotientEdge),
    /// An unordered vertex pair carrying two or more distinct offsets.
    MultipleOffsets {
        u: VertexId,
        v: VertexId,
        offsets: Vec<CellOffset>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingReverse(e) => write!(f, "missing reversed edge for {e}"),
            Violation::SelfLoop(e) => write!(f, "self-loop {e}"),
            Violation::MultipleOffsets { u, v, offsets } => {
                write!(f, "pair ({u}, {v}) carries {} offsets:", offsets.len())?;
                for o in offsets {
                    write!(f, " {o}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "admissible: no violations")
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  {v}")?;
            }
            Ok(())
        }
    }
}

/// Real potential on the fundamental cell; periodicity is structural.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    values: Vec<f64>,
}

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self, GraphError> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(GraphError::NonFinitePotential { vertex: i as u32 });
            }
        }
        Ok(Potential { values })
    }

    pub fn constant(num_vertices: usize, value: f64) -> Self {
        Potential {
            values: vec![value; num_vertices],
        }
    }

    /// Like [`Potential::new`] but also checks the length against the graph.
    pub fn for_graph(g: &PeriodicGraph, values: Vec<f64>) -> Result<Self, GraphError> {
        if values.len() != g.num_vertices() {
            return Err(GraphError::PotentialLength {
                expected: g.num_vertices(),
                got: values.len(),
            });
        }
        Potential::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Distinct values, ascending, by exact comparison.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vals = self.values.clone();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    /// Smallest nonzero difference between distinct values, if any.
    pub fn min_gap(&self) -> Option<f64> {
        let vals = self.distinct_values();
        vals.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }
}

/// Vertices of the cell whose potential value clusters around `value`.
#[derive(Clone, Debug)]
pub struct LevelSet {
    pub value: f64,
    pub vertices: Vec<VertexId>,
    pub tolerance: f64,
}

/// Partition the cell vertices by potential value, merging values whose
/// consecutive gaps are at most `tol` (transitive closure of the relation
/// `|Q(u) - Q(v)| <= tol`). With `tol = 0` this is exact value grouping.
/// Level sets are returned in ascending order of representative value.
pub fn level_sets(g: &PeriodicGraph, q: &Potential, tol: f64) -> Vec<LevelSet> {
    assert_eq!(
        q.len(),
        g.num_vertices(),
        "potential length must match the cell"
    );
    assert!(tol >= 0.0, "tolerance must be nonnegative");
    let mut order: Vec<VertexId> = g.vertices().collect();
    order.sort_by(|a, b| {
        q.value(*a)
            .total_cmp(&q.value(*b))
            .then(a.0.cmp(&b.0))
    });
    let mut sets: Vec<LevelSet> = Vec::new();
    let mut current: Vec<VertexId> = Vec::new();
    for v in order {
        if let Some(&last) = current.last() {
            if q.value(v) - q.value(last) > tol {
                sets.push(close_level_set(std::mem::take(&mut current), q, tol));
            }
        }
        current.push(v);
    }
    if !current.is_empty() {
        sets.push(close_level_set(current, q, tol));
    }
    sets
}

fn close_level_set(mut members: Vec<VertexId>, q: &Potential, tol: f64) -> LevelSet {
    let lo = q.value(members[0]);
    let hi = q.value(*members.last().unwrap());
    members.sort();
    LevelSet {
        // midpoint of the cluster range; the exact common value when tol = 0
        value: 0.5 * (lo + hi),
        vertices: members,
        tolerance: tol,
    }
}

/// Pass to the sublattice `factors ∘ ℤᵈ`: the new cell has one copy of every
/// old vertex per residue class, edge offsets are recomputed by carrying the
/// residue arithmetic, and the potential is copied per residue. The operator
/// is unchanged, so spectra agree with the original model.
///
/// New vertex `(v, r)` gets index `flatten(r) * nu + v` with row-major
/// residue flattening.
pub fn refine_period(
    g: &PeriodicGraph,
    q: Option<&Potential>,
    factors: &[usize],
) -> Result<(PeriodicGraph, Option<Potential>), GraphError> {
    if factors.len() != g.dim() || factors.iter().any(|&f| f == 0) {
        return Err(GraphError::BadFactors);
    }
    if let Some(q) = q {
        if q.len() != g.num_vertices() {
            return Err(GraphError::PotentialLength {
                expected: g.num_vertices(),
                got: q.len(),
            });
        }
    }
    let nu = g.num_vertices() as u32;
    let copies: usize = factors.iter().product();
    let new_index = |vertex: u32, residue: &[i64]| -> u32 {
        let mut flat: usize = 0;
        for (r, f) in residue.iter().zip(factors) {
            flat = flat * f + *r as usize;
        }
        (flat as u32) * nu + vertex
    };

    let mut raw_edges = Vec::with_capacity(g.edges().len() * copies);
    let mut residue = vec![0i64; g.dim()];
    loop {
        for e in g.edges() {
            // residue arithmetic: r + offset = r' + factors ∘ carry
            let mut target = Vec::with_capacity(g.dim());
            let mut carry = Vec::with_capacity(g.dim());
            for ((r, o), f) in residue.iter().zip(e.offset.components()).zip(factors) {
                let f = *f as i64;
                let s = r + o;
                target.push(s.rem_euclid(f));
                carry.push(s.div_euclid(f));
            }
            raw_edges.push((new_index(e.u.0, &residue), new_index(e.v.0, &target), carry));
        }
        // advance the residue multi-index, last axis fastest
        let mut axis = g.dim();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            residue[axis] += 1;
            if (residue[axis] as usize) < factors[axis] {
                break;
            }
            residue[axis] = 0;
        }
        if residue.iter().all(|&r| r == 0) {
            break;
        }
    }

    let refined = PeriodicGraph::new(g.dim(), nu * copies as u32, raw_edges)?;
    let refined_q = q.map(|q| {
        let mut values = Vec::with_capacity(q.len() * copies);
        for _ in 0..copies {
            values.extend_from_slice(q.values());
        }
        Potential { values }
    });
    Ok((refined, refined_q))
}

pub const DEFAULT_REFINEMENT_CAP: usize = 8;

/// Smallest refinement factors (no admissible choice is strictly smaller
/// componentwise) that make the graph satisfy the admissibility rules.
/// Candidates are searched in ascending product order up to `cap` per axis.
pub fn minimal_assumption_refinement(g: &PeriodicGraph) -> Result<Vec<usize>, GraphError> {
    minimal_assumption_refinement_capped(g, DEFAULT_REFINEMENT_CAP)
}

pub fn minimal_assumption_refinement_capped(
    g: &PeriodicGraph,
    cap: usize,
) -> Result<Vec<usize>, GraphError> {
    let d = g.dim();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut factors = vec![1usize; d];
    loop {
        candidates.push(factors.clone());
        let mut axis = d;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            factors[axis] += 1;
            if factors[axis] <= cap {
                break;
            }
            factors[axis] = 1;
        }
        if factors.iter().all(|&f| f == 1) {
            break;
        }
    }
    candidates.sort_by_key(|f| (f.iter().product::<usize>(), f.clone()));
    for f in candidates {
        let (refined, _) = refine_period(g, None, &f)?;
        if refined.is_admissible() {
            return Ok(f);
        }
    }
    Err(GraphError::RefinementBoundExceeded { cap })
}

/// Induced subgraph of a fundamental cell. Vertices keep their ids from the
/// parent graph; adjacency lists follow canonical edge order so that
/// traversals are deterministic.
#[derive(Clone, Debug)]
pub struct Fragment {
    d: usize,
    vertices: Vec<VertexId>,
    edges: Vec<QuotientEdge>,
    /// per vertex position: (neighbor position, edge index, forward?)
    adjacency: Vec<Vec<(usize, usize, bool)>>,
}

impl Fragment {
    pub(crate) fn build(d: usize, vertices: Vec<VertexId>, mut edges: Vec<QuotientEdge>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        edges.sort();
        edges.dedup();
        let pos = |v: VertexId| vertices.binary_search(&v).expect("edge endpoint in vertex set");
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            let pu = pos(e.u);
            let pv = pos(e.v);
            adjacency[pu].push((pv, i, true));
            if pu != pv {
                adjacency[pv].push((pu, i, false));
            }
        }
        Fragment {
            d,
            vertices,
            edges,
            adjacency,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[QuotientEdge] {
        &self.edges
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn vertex_at(&self, position: usize) -> VertexId {
        self.vertices[position]
    }

    /// Incident edges of the vertex at `position`, in canonical edge order.
    pub fn neighbors(&self, position: usize) -> &[(usize, usize, bool)] {
        &self.adjacency[position]
    }

    /// The unique edge joining `u` and `v`, as (edge index, traverses
    /// forward). `None` if the vertices are not adjacent in the fragment.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<(usize, bool)> {
        let pu = self.position(u)?;
        let pv = self.position(v)?;
        self.adjacency[pu]
            .iter()
            .find(|(n, _, _)| *n == pv)
            .map(|&(_, e, fwd)| (e, fwd))
    }

    /// Offset picked up when traversing edge `edge` in the given direction.
    pub fn oriented_offset(&self, edge: usize, forward: bool) -> CellOffset {
        let o = &self.edges[edge].offset;
        if forward {
            o.clone()
        } else {
            o.negated()
        }
    }

    /// Restrict further to a subset of this fragment's vertices.
    pub fn restrict(&self, keep: &[VertexId]) -> Fragment {
        let mut vertices: Vec<VertexId> = keep
            .iter()
            .copied()
            .filter(|v| self.position(*v).is_some())
            .collect();
        vertices.sort();
        vertices.dedup();
        let edges = self
            .edges
            .iter()
            .filter(|e| {
                vertices.binary_search(&e.u).is_ok() && vertices.binary_search(&e.v).is_ok()
            })
            .cloned()
            .collect();
        Fragment::build(self.d, vertices, edges)
    }
}

/// A generated lattice model: admissible graph, optional potential, the
/// refinement factors that were applied, and the final hypercubic cell
/// dimensions when the generator is grid-based.
#[derive(Clone, Debug)]
pub struct GeneratedLattice {
    pub graph: PeriodicGraph,
    pub potential: Option<Potential>,
    pub refinement: Vec<usize>,
    pub dims: Vec<usize>,
}

/// Edge list of the hypercubic lattice ℤᵈ modeled on the row-major cell
/// `dims[0] x ... x dims[d-1]`.
pub(crate) fn hypercubic_edges(dims: &[usize]) -> Vec<(u32, u32, Vec<i64>)> {
    let d = dims.len();
    let total: usize = dims.iter().product();
    let flatten = |point: &[usize]| -> u32 {
        let mut idx = 0usize;
        for (x, n) in point.iter().zip(dims) {
            idx = idx * n + x;
        }
        idx as u32
    };
    let mut edges = Vec::with_capacity(total * d);
    let mut point = vec![0usize; d];
    for _ in 0..total {
        for axis in 0..d {
            let mut nbr = point.clone();
            let mut offset = vec![0i64; d];
            nbr[axis] += 1;
            if nbr[axis] == dims[axis] {
                nbr[axis] = 0;
                offset[axis] = 1;
            }
            edges.push((flatten(&point), flatten(&nbr), offset));
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            point[axis] += 1;
            if point[axis] < dims[axis] {
                break;
            }
            point[axis] = 0;
        }
    }
    edges
}

/// Hypercubic lattice ℤᵈ with an initial cell of size `cell` (per axis) and
/// optional potential values on that cell in row-major order. Axes are
/// enlarged to the smallest multiple of the cell that is admissible (length
/// at least 3), and the potential is extended periodically.
///
/// Vertices of the result are the row-major points of the final cell, so the
/// layout is recognizable by [`crate::sweep::separable_lower_bound`].
pub fn gen_hypercubic(
    d: usize,
    cell: &[usize],
    values: Option<&[f64]>,
) -> Result<GeneratedLattice, GraphError> {
    if d == 0 {
        return Err(GraphError::ZeroDimension);
    }
    if cell.len() != d || cell.iter().any(|&c| c == 0) {
        return Err(GraphError::BadCellDims);
    }
    let cell_total: usize = cell.iter().product();
    if let Some(values) = values {
        if values.len() != cell_total {
            return Err(GraphError::PotentialLength {
                expected: cell_total,
                got: values.len(),
            });
        }
    }
    // smallest factor per axis making the torus cycle length at least 3,
    // which rules out both self-pairs (length 1) and doubled pairs (length 2)
    let refinement: Vec<usize> = cell
        .iter()
        .map(|&c| if c >= 3 { 1 } else { 3usize.div_ceil(c) })
        .collect();
    let dims: Vec<usize> = cell.iter().zip(&refinement).map(|(c, f)| c * f).collect();
    let total: usize = dims.iter().product();
    let graph = PeriodicGraph::new(d, total as u32, hypercubic_edges(&dims))?;
    debug_assert!(graph.is_admissible());

    let potential = match values {
        None => None,
        Some(values) => {
            let mut q = vec![0.0; total];
            let mut point = vec![0usize; d];
            for slot in q.iter_mut() {
                let mut cell_idx = 0usize;
                for (x, c) in point.iter().zip(cell) {
                    cell_idx = cell_idx * c + (x % c);
                }
                *slot = values[cell_idx];
                let mut axis = d;
                loop {
                    if axis == 0 {
                        break;
                    }
                    axis -= 1;
                    point[axis] += 1;
                    if point[axis] < dims[axis] {
                        break;
                    }
                    point[axis] = 0;
                }
            }
            Some(Potential::new(q)?)
        }
    };

    Ok(GeneratedLattice {
        graph,
        potential,
        refinement,
        dims,
    })
}

/// Stripe model on ℤᵈ: potential `Q(x) = values[x_1 mod values.len()]`,
/// constant along every other axis.
pub fn gen_stripe(d: usize, values: &[f64]) -> Result<GeneratedLattice, GraphError> {
    if values.is_empty() {
        return Err(GraphError::BadCellDims);
    }
    let mut cell = vec![1usize; d];
    cell[0] = values.len();
    gen_hypercubic(d, &cell, Some(values))
}
