//! Edge-set structures (matchings, linear forests, fault sets) and
//! path/cycle witnesses with validation.
//!
//! Witness types validate on construction; `validate_cycle` is the
//! independent checker used to accept every constructed cycle, and it never
//! looks at how a cycle was produced.

use std::collections::HashMap;
use std::fmt;

use crate::cube::{Cube, Edge, Vertex};
use crate::error::{Error, Result};

/// True when no two edges share a vertex.
pub fn is_matching(edges: &[Edge]) -> bool {
    let mut seen = std::collections::HashSet::new();
    for e in edges {
        if !seen.insert(e.lo()) || !seen.insert(e.hi()) {
            return false;
        }
    }
    true
}

/// True when every vertex has degree at most 2 and the edge set is acyclic,
/// i.e. the induced subgraph is a disjoint union of paths.
pub fn is_linear_forest(edges: &[Edge]) -> bool {
    let mut degree: HashMap<Vertex, u32> = HashMap::new();
    for e in edges {
        for v in e.endpoints() {
            let d = degree.entry(v).or_insert(0);
            *d += 1;
            if *d > 2 {
                return false;
            }
        }
    }
    // Acyclicity by union-find over the touched vertices.
    let verts: Vec<Vertex> = degree.keys().copied().collect();
    let index: HashMap<Vertex, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in edges {
        let a = find(&mut parent, index[&e.lo()]);
        let b = find(&mut parent, index[&e.hi()]);
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// A set of pairwise vertex-disjoint edges, stored sorted.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn empty() -> Matching {
        Matching { edges: Vec::new() }
    }

    pub fn try_new(mut edges: Vec<Edge>) -> Result<Matching> {
        edges.sort();
        edges.dedup();
        if !is_matching(&edges) {
            return Err(Error::InvalidInstance(
                "edge set is not a matching: two edges share a vertex".into(),
            ));
        }
        Ok(Matching { edges })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn covers(&self, v: Vertex) -> bool {
        self.edges.iter().any(|e| e.touches(v))
    }

    /// The edge at `v`, if the matching covers it.
    pub fn edge_at(&self, v: Vertex) -> Option<Edge> {
        self.edges.iter().copied().find(|e| e.touches(v))
    }

    pub fn is_perfect(&self, cube: Cube) -> bool {
        self.edges.len() * 2 == cube.vertex_count()
    }

    /// Removes one edge, returning the smaller matching.
    pub fn without(&self, e: Edge) -> Matching {
        Matching {
            edges: self.edges.iter().copied().filter(|&x| x != e).collect(),
        }
    }

    pub fn with(&self, e: Edge) -> Result<Matching> {
        let mut edges = self.edges.clone();
        edges.push(e);
        Matching::try_new(edges)
    }
}

/// A set of faulty (unusable) edges. No structural constraint of its own;
/// instances pair it with a matching disjoint from it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FaultSet {
    edges: Vec<Edge>,
}

impl FaultSet {
    pub fn empty() -> FaultSet {
        FaultSet { edges: Vec::new() }
    }

    pub fn new(mut edges: Vec<Edge>) -> FaultSet {
        edges.sort();
        edges.dedup();
        FaultSet { edges }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn without(&self, e: Edge) -> FaultSet {
        FaultSet {
            edges: self.edges.iter().copied().filter(|&x| x != e).collect(),
        }
    }

    pub fn with(&self, e: Edge) -> FaultSet {
        let mut edges = self.edges.clone();
        edges.push(e);
        FaultSet::new(edges)
    }
}

/// Checks that `(M, F)` is a legal instance: edges inside the cube and
/// `M` disjoint from `F`.
pub fn check_instance(cube: Cube, m: &Matching, f: &FaultSet) -> Result<()> {
    for &e in m.edges().iter().chain(f.edges()) {
        cube.check_edge(e)?;
    }
    for &e in m.edges() {
        if f.contains(e) {
            return Err(Error::InvalidInstance(format!(
                "matching edge {e} is also declared faulty"
            )));
        }
    }
    Ok(())
}

/// An edge set inducing a disjoint union of paths.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearForest {
    edges: Vec<Edge>,
}

impl LinearForest {
    pub fn try_new(mut edges: Vec<Edge>) -> Result<LinearForest> {
        edges.sort();
        edges.dedup();
        if !is_linear_forest(&edges) {
            return Err(Error::precondition(
                "edge set does not induce a linear forest",
            ));
        }
        Ok(LinearForest { edges })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl From<Matching> for LinearForest {
    fn from(m: Matching) -> LinearForest {
        LinearForest { edges: m.edges }
    }
}

/// A simple path: consecutive vertices adjacent, no repeats.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Path {
    seq: Vec<Vertex>,
}

impl Path {
    pub fn try_new(cube: Cube, seq: Vec<Vertex>) -> Result<Path> {
        if seq.is_empty() {
            return Err(Error::invalid("empty path"));
        }
        let mut seen = std::collections::HashSet::new();
        for &v in &seq {
            cube.check_vertex(v)?;
            if !seen.insert(v) {
                return Err(Error::invalid(format!("path repeats vertex {v}")));
            }
        }
        for w in seq.windows(2) {
            if cube.hamming_distance(w[0], w[1]) != 1 {
                return Err(Error::invalid(format!(
                    "path vertices {} and {} are not adjacent",
                    w[0], w[1]
                )));
            }
        }
        Ok(Path { seq })
    }

    pub fn seq(&self) -> &[Vertex] {
        &self.seq
    }

    pub fn first(&self) -> Vertex {
        self.seq[0]
    }

    pub fn last(&self) -> Vertex {
        *self.seq.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.seq
            .windows(2)
            .map(|w| Edge::new(w[0], w[1]).unwrap())
            .collect()
    }

    pub fn reversed(&self) -> Path {
        let mut seq = self.seq.clone();
        seq.reverse();
        Path { seq }
    }
}

/// A Hamiltonian path of `Q_n`: a simple path visiting every vertex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HamPath {
    cube: Cube,
    path: Path,
}

impl HamPath {
    pub fn try_new(cube: Cube, seq: Vec<Vertex>) -> Result<HamPath> {
        if seq.len() != cube.vertex_count() {
            return Err(Error::invalid(format!(
                "path covers {} of {} vertices",
                seq.len(),
                cube.vertex_count()
            )));
        }
        Ok(HamPath {
            cube,
            path: Path::try_new(cube, seq)?,
        })
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn seq(&self) -> &[Vertex] {
        self.path.seq()
    }

    pub fn first(&self) -> Vertex {
        self.path.first()
    }

    pub fn last(&self) -> Vertex {
        self.path.last()
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.path.edges()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges().contains(&e)
    }

    pub fn as_path(&self) -> &Path {
        &self.path
    }
}

/// A Hamiltonian cycle of `Q_n`, normalized so that the minimum vertex comes
/// first and the second vertex is the smaller of its two neighbors. The
/// normalization makes equality and serialized output deterministic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HamCycle {
    cube: Cube,
    seq: Vec<Vertex>,
}

fn normalize_cycle(seq: &mut Vec<Vertex>) {
    let min_pos = seq
        .iter()
        .enumerate()
        .min_by_key(|&(_, v)| v)
        .map(|(i, _)| i)
        .unwrap();
    seq.rotate_left(min_pos);
    if seq.len() > 2 && seq[seq.len() - 1] < seq[1] {
        seq[1..].reverse();
    }
}

impl HamCycle {
    pub fn try_new(cube: Cube, mut seq: Vec<Vertex>) -> Result<HamCycle> {
        if cube.n() < 2 {
            return Err(Error::precondition("Q_1 has no cycle"));
        }
        if seq.len() != cube.vertex_count() {
            return Err(Error::invalid(format!(
                "cycle covers {} of {} vertices",
                seq.len(),
                cube.vertex_count()
            )));
        }
        let path = Path::try_new(cube, seq.clone())?;
        let first = path.first();
        let last = path.last();
        if cube.hamming_distance(first, last) != 1 {
            return Err(Error::invalid(format!(
                "cycle does not close: {last} and {first} are not adjacent"
            )));
        }
        normalize_cycle(&mut seq);
        Ok(HamCycle { cube, seq })
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn seq(&self) -> &[Vertex] {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The cycle's edge set, including the closing edge.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .seq
            .windows(2)
            .map(|w| Edge::new(w[0], w[1]).unwrap())
            .collect();
        out.push(Edge::new(self.seq[self.seq.len() - 1], self.seq[0]).unwrap());
        out
    }

    pub fn edge_set(&self) -> std::collections::BTreeSet<Edge> {
        self.edges().into_iter().collect()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        let pos: HashMap<Vertex, usize> =
            self.seq.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        match (pos.get(&e.lo()), pos.get(&e.hi())) {
            (Some(&a), Some(&b)) => {
                let n = self.seq.len();
                (a + 1) % n == b || (b + 1) % n == a
            }
            _ => false,
        }
    }

    /// The two cycle neighbors of `v`, in traversal order around `v`.
    pub fn neighbors_of(&self, v: Vertex) -> [Vertex; 2] {
        let i = self.seq.iter().position(|&x| x == v).expect("vertex on cycle");
        let n = self.seq.len();
        [self.seq[(i + n - 1) % n], self.seq[(i + 1) % n]]
    }
}

impl fmt::Display for HamCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})",
            self.seq.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        )
    }
}

/// Two vertex-disjoint paths whose vertex sets partition `V(Q_n)`.
#[derive(Clone, Debug)]
pub struct SpanningPathPair {
    pub p1: Path,
    pub p2: Path,
}

impl SpanningPathPair {
    pub fn try_new(cube: Cube, p1: Path, p2: Path) -> Result<SpanningPathPair> {
        if p1.len() + p2.len() != cube.vertex_count() {
            return Err(Error::invalid("paths do not cover the cube"));
        }
        let mut seen = std::collections::HashSet::new();
        for &v in p1.seq().iter().chain(p2.seq()) {
            if !seen.insert(v) {
                return Err(Error::invalid(format!("paths overlap at {v}")));
            }
        }
        Ok(SpanningPathPair { p1, p2 })
    }
}

/// Outcome of checking a vertex sequence as a Hamiltonian cycle witness for
/// an instance `(Q_n, M, F)`. The four parts are reported independently.
#[derive(Clone, Debug)]
pub struct CycleVerdict {
    pub adjacency_ok: bool,
    pub coverage_ok: bool,
    pub matching_contained: bool,
    pub faults_avoided: bool,
    pub problems: Vec<String>,
}

impl CycleVerdict {
    pub fn pass(&self) -> bool {
        self.adjacency_ok && self.coverage_ok && self.matching_contained && self.faults_avoided
    }
}

impl fmt::Display for CycleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "(a) adjacency          {}", mark(self.adjacency_ok))?;
        writeln!(f, "(b) coverage           {}", mark(self.coverage_ok))?;
        writeln!(f, "(c) matching contained {}", mark(self.matching_contained))?;
        writeln!(f, "(d) faults avoided     {}", mark(self.faults_avoided))?;
        for p in &self.problems {
            writeln!(f, "    - {p}")?;
        }
        Ok(())
    }
}

/// Checks a raw vertex sequence against an instance. Accepts any sequence,
/// valid or not, and reports each failing part; it does not care how the
/// sequence was produced.
pub fn validate_cycle(cube: Cube, seq: &[Vertex], m: &Matching, f: &FaultSet) -> CycleVerdict {
    let mut verdict = CycleVerdict {
        adjacency_ok: true,
        coverage_ok: true,
        matching_contained: true,
        faults_avoided: true,
        problems: Vec::new(),
    };

    // (b) every vertex exactly once
    let mut count = vec![0u32; cube.vertex_count()];
    let mut in_range = true;
    for &v in seq {
        if cube.contains(v) {
            count[v.index()] += 1;
        } else {
            in_range = false;
            verdict.problems.push(format!("vertex {v} outside Q_{}", cube.n()));
        }
    }
    if !in_range || seq.len() != cube.vertex_count() || count.iter().any(|&c| c != 1) {
        verdict.coverage_ok = false;
        if seq.len() != cube.vertex_count() {
            verdict
                .problems
                .push(format!("{} of {} vertices listed", seq.len(), cube.vertex_count()));
        } else if count.iter().any(|&c| c > 1) {
            verdict.problems.push("a vertex repeats".into());
        }
    }

    // (a) cyclically consecutive vertices adjacent
    let mut cycle_edges: Vec<Edge> = Vec::with_capacity(seq.len());
    if seq.len() >= 3 {
        for i in 0..seq.len() {
            let a = seq[i];
            let b = seq[(i + 1) % seq.len()];
            match Edge::new(a, b) {
                Ok(e) => cycle_edges.push(e),
                Err(_) => {
                    verdict.adjacency_ok = false;
                    verdict.problems.push(format!("{a} and {b} are not adjacent"));
                }
            }
        }
    } else {
        verdict.adjacency_ok = false;
        verdict.problems.push("fewer than three vertices".into());
    }
    cycle_edges.sort();

    // (c) M contained in the cycle edges
    for &e in m.edges() {
        if cycle_edges.binary_search(&e).is_err() {
            verdict.matching_contained = false;
            verdict.problems.push(format!("matching edge {e} not on the cycle"));
        }
    }

    // (d) no faulty edge used
    for &e in f.edges() {
        if cycle_edges.binary_search(&e).is_ok() {
            verdict.faults_avoided = false;
            verdict.problems.push(format!("faulty edge {e} used by the cycle"));
        }
    }

    verdict
}

/// Reconstructs a Hamiltonian cycle from an unordered edge set: every vertex
/// must have degree exactly 2, and walking the edges must close a single
/// cycle covering all of `Q_n`. This is the assembly step of every cycle
/// surgery; a failure means the surgery pattern was violated.
pub fn cycle_from_edges(cube: Cube, edges: &[Edge]) -> Result<HamCycle> {
    let nv = cube.vertex_count();
    if edges.len() != nv {
        return Err(Error::precondition(format!(
            "cycle surgery produced {} edges for {} vertices",
            edges.len(),
            nv
        )));
    }
    let mut adj: Vec<[u32; 2]> = vec![[u32::MAX; 2]; nv];
    for e in edges {
        cube.check_edge(*e)?;
        for (v, w) in [(e.lo(), e.hi()), (e.hi(), e.lo())] {
            let slots = &mut adj[v.index()];
            if slots[0] == u32::MAX {
                slots[0] = w.0;
            } else if slots[1] == u32::MAX {
                slots[1] = w.0;
            } else {
                return Err(Error::precondition(format!(
                    "cycle surgery gives vertex {v} degree more than 2"
                )));
            }
        }
    }
    if adj.iter().any(|s| s[1] == u32::MAX) {
        return Err(Error::precondition(
            "cycle surgery leaves a vertex with degree below 2",
        ));
    }
    let mut seq = Vec::with_capacity(nv);
    let mut prev = u32::MAX;
    let mut at = 0u32;
    loop {
        seq.push(Vertex(at));
        let [a, b] = adj[at as usize];
        let next = if a != prev { a } else { b };
        prev = at;
        at = next;
        if at == 0 {
            break;
        }
        if seq.len() > nv {
            return Err(Error::precondition(
                "cycle surgery produced more than one component",
            ));
        }
    }
    if seq.len() != nv {
        return Err(Error::precondition(
            "cycle surgery produced more than one component",
        ));
    }
    HamCycle::try_new(cube, seq)
}
