//! Tree-cotree gauging on the identified control mesh.
//!
//! Edge DoFs of the 1-form space are split into a tree set `T` (fixed to
//! zero) and a cotree set `C` (unknowns). The spanning tree is grown by BFS
//! in phases over region-labelled edges:
//!
//! * single domain and independent subdomain: `ΓD`, `ΓN` (the interface
//!   counts as Neumann), then everything else;
//! * dependent subdomain: `Γint`, `ΓD`, `ΓN`, then everything else, after
//!   which every interface edge returns to the cotree.
//!
//! Whenever the search reaches an unvisited vertex of the first-phase region
//! it floods that region component first, so that several Dirichlet
//! components end up joined through interior paths. Nontrivial relative
//! cohomology is handled by [`enrich_cohomology`], which moves a minimal set
//! of cotree edges chosen from a null basis of the reduced operator.

use crate::error::{Error, Result};
use crate::geometry::{ControlMesh, Flags, Role};
use crate::spaces::{DiscreteSpace, SplineComplex};
use crate::sparse::CsrMatrix;
use faer::Mat;
use std::collections::VecDeque;
use std::io::Write;

/// Region label of a vertex or edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Dirichlet,
    Neumann,
    Interface,
    Interior,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Dirichlet => "dirichlet",
            Region::Neumann => "neumann",
            Region::Interface => "interface",
            Region::Interior => "interior",
        }
    }
}

/// Which of the two tree algorithms labels the regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeAlgorithm {
    /// Dirichlet first; the interface is treated as Neumann.
    DirichletFirst,
    /// Interface first, interface edges restored to the cotree afterwards.
    InterfaceFirst,
}

impl TreeAlgorithm {
    /// Label of an entity with the given flags (priority rules per algorithm).
    pub fn label(self, f: Flags) -> Region {
        match self {
            TreeAlgorithm::DirichletFirst => {
                if f.dirichlet {
                    Region::Dirichlet
                } else if f.interface || f.neumann {
                    Region::Neumann
                } else {
                    Region::Interior
                }
            }
            TreeAlgorithm::InterfaceFirst => {
                if f.interface {
                    Region::Interface
                } else if f.dirichlet {
                    Region::Dirichlet
                } else if f.neumann {
                    Region::Neumann
                } else {
                    Region::Interior
                }
            }
        }
    }

    fn phases(self) -> &'static [Region] {
        match self {
            TreeAlgorithm::DirichletFirst => &[Region::Dirichlet, Region::Neumann],
            TreeAlgorithm::InterfaceFirst => {
                &[Region::Interface, Region::Dirichlet, Region::Neumann]
            }
        }
    }

    fn anchor(self) -> Region {
        self.phases()[0]
    }
}

/// Neighbour visiting order of the BFS; two orders give two distinct valid
/// trees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NeighborOrder {
    #[default]
    Ascending,
    Descending,
}

/// Vertices and edges of the identified control mesh with region flags and
/// edge DoF numbers.
#[derive(Clone, Debug)]
pub struct ControlGraph {
    pub edges: Vec<(usize, usize)>,
    pub vertex_flags: Vec<Flags>,
    pub edge_flags: Vec<Flags>,
    pub vertex_role: Vec<Role>,
    pub edge_role: Vec<Role>,
    /// Free 1-form DoF of each edge, `None` when constrained.
    pub edge_dof: Vec<Option<usize>>,
    /// Per vertex: `(neighbour, edge)` sorted by neighbour then edge.
    pub adjacency: Vec<Vec<(usize, usize)>>,
}

impl ControlGraph {
    pub fn num_vertices(&self) -> usize {
        self.vertex_flags.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

/// Graph of the identified control mesh of `complex` with DoFs of `space1`.
pub fn build_graph(complex: &SplineComplex, space1: &DiscreteSpace) -> ControlGraph {
    graph_from_mesh(complex.mesh(), space1)
}

/// [`build_graph`] from a mesh directly.
pub fn graph_from_mesh(mesh: &ControlMesh, space1: &DiscreteSpace) -> ControlGraph {
    let nv = mesh.num(0);
    let edges: Vec<(usize, usize)> = (0..mesh.num(1)).map(|e| mesh.edge_vertices(e)).collect();
    let mut adjacency = vec![Vec::new(); nv];
    for (e, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    ControlGraph {
        vertex_flags: (0..nv).map(|v| mesh.flags(0, v)).collect(),
        edge_flags: (0..edges.len()).map(|e| mesh.flags(1, e)).collect(),
        vertex_role: (0..nv).map(|v| mesh.role(0, v)).collect(),
        edge_role: (0..edges.len()).map(|e| mesh.role(1, e)).collect(),
        edge_dof: (0..edges.len()).map(|e| space1.dof(e)).collect(),
        edges,
        adjacency,
    }
}

/// Tree/cotree split of the free edge DoFs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaugePartition {
    /// Gauged DoFs (fixed to zero), ascending.
    pub tree: Vec<usize>,
    /// Remaining unknowns, ascending.
    pub cotree: Vec<usize>,
    /// All spanning-tree edges (global edge ids, constrained ones included).
    pub tree_edges: Vec<usize>,
    /// DoFs moved from the cotree to the tree by cohomology enrichment.
    pub enrichment: Vec<usize>,
    pub report: GaugeReport,
}

/// Counts collected while growing the trees.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaugeReport {
    /// Tree edges added per phase label, in phase order.
    pub phase_edges: Vec<(Region, usize)>,
    /// Number of BFS roots (connected pieces started from scratch).
    pub roots: usize,
    /// Interface edges removed from the tree by the interface-first rule.
    pub interface_tree_edges: usize,
    pub vertices: usize,
}

impl GaugeReport {
    fn add(&mut self, r: Region, n: usize) {
        match self.phase_edges.iter_mut().find(|(x, _)| *x == r) {
            Some((_, c)) => *c += n,
            None => self.phase_edges.push((r, n)),
        }
    }
}

struct Grower<'a> {
    g: &'a ControlGraph,
    alg: TreeAlgorithm,
    order: NeighborOrder,
    in_set: Vec<bool>,
    visited: Vec<bool>,
    visit_order: Vec<usize>,
    tree: Vec<usize>,
    report: GaugeReport,
}

impl Grower<'_> {
    fn neighbours(&self, v: usize) -> Vec<(usize, usize)> {
        let mut n = self.g.adjacency[v].clone();
        if self.order == NeighborOrder::Descending {
            n.reverse();
        }
        n
    }

    fn visit(&mut self, v: usize) {
        self.visited[v] = true;
        self.visit_order.push(v);
    }

    /// BFS from `seeds` over edges accepted by `allowed`; unvisited anchor
    /// vertices reached on the way are flooded through anchor edges first.
    fn bfs(&mut self, seeds: Vec<usize>, allowed: &dyn Fn(Region) -> bool, label: Region) {
        let anchor = self.alg.anchor();
        let mut queue: VecDeque<usize> = seeds.into();
        while let Some(v) = queue.pop_front() {
            for (w, e) in self.neighbours(v) {
                if !self.in_set[w] || self.visited[w] {
                    continue;
                }
                let el = self.alg.label(self.g.edge_flags[e]);
                if !allowed(el) {
                    continue;
                }
                self.visit(w);
                self.tree.push(e);
                self.report
                    .add(if label == Region::Interior { el } else { label }, 1);
                if label != anchor && self.alg.label(self.g.vertex_flags[w]) == anchor {
                    self.flood(w);
                }
                queue.push_back(w);
            }
        }
    }

    fn flood(&mut self, v: usize) {
        let anchor = self.alg.anchor();
        self.bfs(vec![v], &|r| r == anchor, anchor);
    }

    fn grow(&mut self) {
        let anchor = self.alg.anchor();
        loop {
            let Some(root) = (0..self.in_set.len())
                .filter(|&v| self.in_set[v] && !self.visited[v])
                .min_by_key(|&v| (self.alg.label(self.g.vertex_flags[v]) != anchor, v))
            else {
                break;
            };
            self.report.roots += 1;
            self.visit(root);
            if self.alg.label(self.g.vertex_flags[root]) == anchor {
                self.flood(root);
            }
            for &phase in &self.alg.phases()[1..] {
                let seeds = self.visit_order.clone();
                self.bfs(seeds, &|r| r == phase, phase);
            }
            let seeds = self.visit_order.clone();
            self.bfs(seeds, &|r| r != anchor, Region::Interior);
        }
    }
}

fn grow_tree(
    g: &ControlGraph,
    alg: TreeAlgorithm,
    order: NeighborOrder,
    in_set: Vec<bool>,
) -> (Vec<usize>, GaugeReport) {
    let n = g.num_vertices();
    let mut gr = Grower {
        g,
        alg,
        order,
        report: GaugeReport {
            vertices: in_set.iter().filter(|&&b| b).count(),
            ..Default::default()
        },
        in_set,
        visited: vec![false; n],
        visit_order: Vec::new(),
        tree: Vec::new(),
    };
    gr.grow();
    (gr.tree, gr.report)
}

fn partition_from(
    g: &ControlGraph,
    edge_in_set: impl Fn(usize) -> bool,
    tree_edges: &[usize],
    drop_interface: bool,
) -> (Vec<usize>, Vec<usize>, usize) {
    let mut is_tree = vec![false; g.num_edges()];
    let mut removed = 0;
    for &e in tree_edges {
        if drop_interface && g.edge_flags[e].interface {
            removed += 1;
        } else {
            is_tree[e] = true;
        }
    }
    let mut tree = Vec::new();
    let mut cotree = Vec::new();
    for e in 0..g.num_edges() {
        if !edge_in_set(e) {
            continue;
        }
        if let Some(d) = g.edge_dof[e] {
            if is_tree[e] {
                tree.push(d);
            } else {
                cotree.push(d);
            }
        }
    }
    tree.sort_unstable();
    cotree.sort_unstable();
    (tree, cotree, removed)
}

/// Algorithm 1 on the whole graph (interface treated as Neumann).
pub fn spanning_tree(g: &ControlGraph, order: NeighborOrder) -> GaugePartition {
    let (tree_edges, report) = grow_tree(
        g,
        TreeAlgorithm::DirichletFirst,
        order,
        vec![true; g.num_vertices()],
    );
    let (tree, cotree, _) = partition_from(g, |_| true, &tree_edges, false);
    GaugePartition {
        tree,
        cotree,
        tree_edges,
        enrichment: Vec::new(),
        report,
    }
}

/// Algorithm 2 on the whole graph: interface-first tree, then all interface
/// edges returned to the cotree.
pub fn dependent_tree(g: &ControlGraph, order: NeighborOrder) -> GaugePartition {
    let (tree_edges, mut report) = grow_tree(
        g,
        TreeAlgorithm::InterfaceFirst,
        order,
        vec![true; g.num_vertices()],
    );
    let (tree, cotree, removed) = partition_from(g, |_| true, &tree_edges, true);
    report.interface_tree_edges = removed;
    GaugePartition {
        tree,
        cotree,
        tree_edges,
        enrichment: Vec::new(),
        report,
    }
}

/// Interface-first on a dependent subdomain that touches an interface.
pub fn algorithm_for(g: &ControlGraph, role: Role) -> TreeAlgorithm {
    let touches =
        (0..g.num_vertices()).any(|v| g.vertex_role[v] == role && g.vertex_flags[v].interface);
    if role == Role::Dependent && touches {
        TreeAlgorithm::InterfaceFirst
    } else {
        TreeAlgorithm::DirichletFirst
    }
}

/// Tree per subdomain: interface-first on the dependent side when it has an
/// interface, Dirichlet-first elsewhere.
pub fn gauge_partition(g: &ControlGraph, order: NeighborOrder) -> GaugePartition {
    let mut out = GaugePartition::default();
    for role in [Role::Dependent, Role::Independent] {
        let in_set: Vec<bool> = g.vertex_role.iter().map(|&r| r == role).collect();
        if !in_set.contains(&true) {
            continue;
        }
        let alg = algorithm_for(g, role);
        let (tree_edges, report) = grow_tree(g, alg, order, in_set);
        let (tree, cotree, removed) = partition_from(
            g,
            |e| g.edge_role[e] == role,
            &tree_edges,
            alg == TreeAlgorithm::InterfaceFirst,
        );
        out.tree.extend(tree);
        out.cotree.extend(cotree);
        out.tree_edges.extend(tree_edges);
        out.report.roots += report.roots;
        out.report.vertices += report.vertices;
        out.report.interface_tree_edges += removed;
        for (r, n) in report.phase_edges {
            out.report.add(r, n);
        }
    }
    out.tree.sort_unstable();
    out.cotree.sort_unstable();
    out
}

/// Moves cotree edges to the tree until the reduced operator is nonsingular.
///
/// `null_basis(cotree)` returns a basis (columns) of the null space of the
/// operator restricted to `cotree` (rows follow `cotree`). Edges are picked
/// by pivoted elimination on that basis so that the chosen rows form a
/// nonsingular block; the number added equals the null-space dimension.
pub fn enrich_cohomology(
    partition: &GaugePartition,
    null_basis: impl Fn(&[usize]) -> Result<Mat<f64>>,
) -> Result<GaugePartition> {
    let mut out = partition.clone();
    let n = null_basis(&out.cotree)?;
    if n.ncols() == 0 {
        return Ok(out);
    }
    if n.nrows() != out.cotree.len() {
        return Err(Error::Gauge(
            "null basis has the wrong number of rows".into(),
        ));
    }
    let mut a = n.clone();
    let mut chosen = Vec::new();
    let mut used = vec![false; a.nrows()];
    for c in 0..a.ncols() {
        // pivot: largest entry in column c among unused rows
        let (mut best, mut row) = (0.0, usize::MAX);
        for r in 0..a.nrows() {
            if !used[r] && a[(r, c)].abs() > best {
                best = a[(r, c)].abs();
                row = r;
            }
        }
        if row == usize::MAX || best < 1e-12 {
            return Err(Error::Gauge("degenerate null basis".into()));
        }
        used[row] = true;
        chosen.push(row);
        for c2 in c + 1..a.ncols() {
            let f = a[(row, c2)] / a[(row, c)];
            for r in 0..a.nrows() {
                let v = a[(r, c)];
                a[(r, c2)] -= f * v;
            }
        }
    }
    let moved: Vec<usize> = chosen.iter().map(|&r| out.cotree[r]).collect();
    out.cotree.retain(|d| !moved.contains(d));
    out.tree.extend(&moved);
    out.tree.sort_unstable();
    out.enrichment.extend(moved);
    Ok(out)
}

/// Gauged system restricted to the cotree.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Cotree position → free DoF.
    pub expander: Vec<usize>,
    pub dim: usize,
}

impl ReducedSystem {
    /// Full free-DoF vector with tree entries zero.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, &d) in self.expander.iter().enumerate() {
            out[d] = x[i];
        }
        out
    }

    /// Cotree entries of a full free-DoF vector.
    pub fn reduce(&self, full: &[f64]) -> Vec<f64> {
        self.expander.iter().map(|&d| full[d]).collect()
    }
}

/// `K_CC`, `j_C` and the cotree expander (`a_T = 0`).
pub fn gauge_reduce(matrix: &CsrMatrix, rhs: &[f64], partition: &GaugePartition) -> ReducedSystem {
    let c = &partition.cotree;
    ReducedSystem {
        matrix: matrix.select(c, c),
        rhs: c.iter().map(|&d| rhs[d]).collect(),
        expander: c.clone(),
        dim: matrix.nrows(),
    }
}

/// Writes the tree as CSV: `patch,direction,i0,i1,i2,region,set`.
pub fn write_tree_csv(
    out: &mut impl Write,
    mesh: &ControlMesh,
    g: &ControlGraph,
    partition: &GaugePartition,
) -> Result<()> {
    writeln!(out, "patch,direction,i0,i1,i2,region,set")?;
    let tree: std::collections::HashSet<usize> = partition.tree.iter().copied().collect();
    for e in 0..g.num_edges() {
        let r = mesh.representative(1, e);
        let set = match g.edge_dof[e] {
            None => "constrained",
            Some(d) if tree.contains(&d) => "tree",
            Some(_) => "cotree",
        };
        let alg = algorithm_for(g, g.edge_role[e]);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.patch,
            r.comp,
            r.index[0],
            r.index[1],
            r.index[2],
            alg.label(g.edge_flags[e]).name(),
            set
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Discretization;

    #[test]
    fn tree_spans_single_cube() {
        let c = SplineComplex::builtin("cube", &Discretization::new(2, 2)).unwrap();
        let s1 = DiscreteSpace::with_constraint(c.mesh(), 1, |_, _| false);
        let g = build_graph(&c, &s1);
        let p = spanning_tree(&g, NeighborOrder::Ascending);
        assert_eq!(p.tree_edges.len(), g.num_vertices() - 1);
        assert_eq!(p.report.roots, 1);
        assert_eq!(p.tree.len() + p.cotree.len(), s1.dim());
    }

    #[test]
    fn enrichment_picks_pivot_rows() {
        let part = GaugePartition {
            cotree: vec![3, 5, 7],
            ..Default::default()
        };
        let out = enrich_cohomology(&part, |_| Ok(Mat::from_fn(3, 1, |r, _| [0.0, 2.0, 1.0][r])))
            .unwrap();
        assert_eq!(out.enrichment, vec![5]);
        assert_eq!(out.cotree, vec![3, 7]);
    }
}
