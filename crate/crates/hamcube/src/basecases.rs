//! Induction bases in dimensions 2 through 5: small-cube cycle extension,
//! dimension selection for the 5-cube, and the catalog of exceptional
//! configurations, every member re-derived by exhaustive search rather than
//! transcribed.

use std::sync::OnceLock;

use crate::constructor::{assemble_halves, merge_cycles, Trace};
use crate::cube::{canonicalize, split_instance, Cube, Edge, InstanceClass, Vertex};
use crate::error::{Error, Result};
use crate::primitives::{
    self, cycle_avoiding_faults_through_edge, cycle_through_forest, path_through_edge,
    spanning_two_paths,
};
use crate::structures::{
    check_instance, FaultSet, HamCycle, LinearForest, Matching,
};
use crate::verify::{enumerate_instances, oracle, OracleVerdict};

/// A constructed cycle, or the verdict that the instance is the one
/// exceptional shape admitting none.
#[derive(Clone, Debug)]
pub enum FaultyOutcome {
    Cycle(HamCycle),
    CaseA,
}

impl FaultyOutcome {
    pub fn cycle(self) -> Option<HamCycle> {
        match self {
            FaultyOutcome::Cycle(c) => Some(c),
            FaultyOutcome::CaseA => None,
        }
    }
}

/// The exceptional configurations: the two 3-cube classes at sizes
/// `(|M|, |F|) = (2, 1)` and the single 4-cube class at `(4, 1)`, each
/// certified infeasible by exhaustive search during construction.
#[derive(Clone, Debug)]
pub struct ExceptionCatalog {
    pub q3_classes: Vec<InstanceClass>,
    pub q4_class: InstanceClass,
}

impl ExceptionCatalog {
    /// One canonical instance per line, deterministic order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.q3_classes {
            out.push_str(&format!("{c}\n"));
        }
        out.push_str(&format!("{}\n", self.q4_class));
        out
    }
}

static CATALOG: OnceLock<std::result::Result<ExceptionCatalog, String>> = OnceLock::new();

/// Builds (or fetches) the exception catalog: sweeps both parameter cells
/// up to isomorphism, runs the exhaustive oracle on every class, and keeps
/// exactly the infeasible ones. Counts other than (2, 1) are an error.
pub fn exception_catalog() -> Result<&'static ExceptionCatalog> {
    let built = CATALOG.get_or_init(|| build_exception_catalog().map_err(|e| e.to_string()));
    match built {
        Ok(cat) => Ok(cat),
        Err(msg) => Err(Error::CatalogMismatch(msg.clone())),
    }
}

fn infeasible_classes(cube: Cube, m_size: usize, f_size: usize) -> Result<Vec<InstanceClass>> {
    let mut out = Vec::new();
    for (m, f) in enumerate_instances(cube, m_size, f_size, true)? {
        match oracle(cube, &m, &f)? {
            OracleVerdict::Infeasible => out.push(InstanceClass {
                cube,
                matching: m,
                faults: f,
            }),
            OracleVerdict::Feasible(_) => {}
            OracleVerdict::Unknown { .. } => {
                return Err(Error::internal("oracle must be exhaustive here"))
            }
        }
    }
    out.sort();
    Ok(out)
}

fn build_exception_catalog() -> Result<ExceptionCatalog> {
    let q3 = Cube::new(3)?;
    let q4 = Cube::new(4)?;
    let q3_classes = infeasible_classes(q3, 2, 1)?;
    if q3_classes.len() != 2 {
        return Err(Error::CatalogMismatch(format!(
            "expected 2 infeasible classes in Q_3 at (2,1), found {}",
            q3_classes.len()
        )));
    }
    let q4_classes = infeasible_classes(q4, 4, 1)?;
    if q4_classes.len() != 1 {
        return Err(Error::CatalogMismatch(format!(
            "expected 1 infeasible class in Q_4 at (4,1), found {}",
            q4_classes.len()
        )));
    }
    let q4_class = q4_classes.into_iter().next().unwrap();
    // The exceptional 4-cube shape lives inside a single dimension class.
    let dims: std::collections::BTreeSet<u32> = q4_class
        .matching
        .edges()
        .iter()
        .chain(q4_class.faults.edges())
        .map(|e| e.dim())
        .collect();
    if dims.len() != 1 {
        return Err(Error::CatalogMismatch(format!(
            "exceptional 4-cube class spans dimension classes {dims:?}"
        )));
    }
    Ok(ExceptionCatalog { q3_classes, q4_class })
}

/// Whether `(Q_4, M, F)` is the exceptional 4-cube shape, up to isomorphism.
pub fn is_case_a(m: &Matching, f: &FaultSet) -> Result<bool> {
    if m.len() != 4 || f.len() != 1 {
        return Ok(false);
    }
    let q4 = Cube::new(4)?;
    let catalog = exception_catalog()?;
    Ok(canonicalize(q4, m, f)? == catalog.q4_class)
}

/// Whether `(Q_3, M, F)` is one of the two exceptional 3-cube shapes.
pub fn is_q3_exception(m: &Matching, f: &FaultSet) -> Result<bool> {
    if m.len() != 2 || f.len() != 1 {
        return Ok(false);
    }
    let q3 = Cube::new(3)?;
    let catalog = exception_catalog()?;
    let class = canonicalize(q3, m, f)?;
    Ok(catalog.q3_classes.contains(&class))
}

/// Hamiltonian path of `Q_3` between odd-distance endpoints passing through
/// a matching that leaves the first endpoint uncovered.
pub fn q3_path_through_matching(u: Vertex, v: Vertex, m: &Matching) -> Result<crate::structures::HamPath> {
    let q3 = Cube::new(3)?;
    q3.check_vertex(u)?;
    q3.check_vertex(v)?;
    for &e in m.edges() {
        q3.check_edge(e)?;
    }
    if m.covers(u) {
        return Err(Error::precondition(format!(
            "endpoint {u} is covered by the matching"
        )));
    }
    if q3.hamming_distance(u, v) % 2 == 0 {
        return Err(Error::precondition("endpoints must be an odd distance apart"));
    }
    let seq = primitives::raw_path_excluding(
        q3,
        u,
        v,
        m.edges().to_vec(),
        Vec::new(),
        Vec::new(),
        &format!("3-cube path {u}..{v} through {} matching edges", m.len()),
    )?;
    crate::structures::HamPath::try_new(q3, seq)
}

/// Extends any matching of `Q_n`, `n in {2, 3, 4}`, to a Hamiltonian cycle.
pub fn base_cycle_small(cube: Cube, m: &Matching) -> Result<HamCycle> {
    let mut trace = Trace::new();
    base_cycle_small_traced(cube, m, &mut trace)
}

/// As `base_cycle_small`, recording the route taken.
pub fn base_cycle_small_traced(cube: Cube, m: &Matching, trace: &mut Trace) -> Result<HamCycle> {
    if !(2..=4).contains(&cube.n()) {
        return Err(Error::precondition("base construction covers n = 2, 3, 4"));
    }
    for &e in m.edges() {
        cube.check_edge(e)?;
    }
    if m.is_perfect(cube) {
        trace.push("base:perfect");
        return primitives::complementary_perfect_matching(cube, m);
    }
    if cube.n() <= 3 {
        // Non-perfect matchings here fit the 2n-3 forest bound.
        trace.push("base:forest");
        return cycle_through_forest(cube, &LinearForest::from(m.clone()));
    }
    trace.push("base:split4");
    // Pick a dimension crossed by at most one matching edge.
    let j = (0..4)
        .find(|&j| m.edges().iter().filter(|e| e.dim() == j).count() <= 1)
        .ok_or_else(|| Error::internal("seven edges cannot fill all four dimension classes"))?;
    let parts = split_instance(cube, j, m, &FaultSet::empty())?;
    // Keep the recursing side away from a perfect half so the path side
    // has an uncovered vertex to enter through.
    let (m0, m1, side0) = if parts.m1.is_perfect(parts.split.sub()) {
        (parts.m1.clone(), parts.m0.clone(), 1u32)
    } else {
        (parts.m0.clone(), parts.m1.clone(), 0u32)
    };
    let split = parts.split;
    let sub = split.sub();
    let c0 = base_cycle_small_traced(sub, &m0, trace)?;

    let (u, v) = if let Some(&cross) = parts.m_cross.first() {
        // The crossing matching edge pins the entry vertex; either cycle
        // neighbor works since the matching leaves it uncovered here.
        let u = split.project(cross.lo());
        let [a, b] = c0.neighbors_of(u);
        (u, a.min(b))
    } else {
        // Pick a cycle edge whose chosen endpoint lifts to an uncovered
        // vertex of the path side.
        let mut found = None;
        'scan: for e in cycle_edges_in_order(&c0) {
            if m0.contains(e) {
                continue;
            }
            for (a, b) in [(e.lo(), e.hi()), (e.hi(), e.lo())] {
                if !m1.covers(a) {
                    found = Some((a, b));
                    break 'scan;
                }
            }
        }
        found.ok_or_else(|| Error::internal("no entry edge with an uncovered lift"))?
    };
    let path = q3_path_through_matching(u, v, &m1)?;
    let uv = Edge::new(u, v)?;
    let side0_edges: Vec<Edge> = c0.edges().into_iter().filter(|&e| e != uv).collect();
    assemble_halves(split, side0, &side0_edges, &path.edges(), &[u, v])
}

/// Cycle edges in normalized traversal order (deterministic scans).
pub(crate) fn cycle_edges_in_order(c: &HamCycle) -> Vec<Edge> {
    c.edges()
}

/// Outcome of asking for a cycle through a size-3 matching plus one more
/// edge in `Q_3`.
#[derive(Clone, Debug)]
pub enum MatchingPlusEdge {
    Cycle(HamCycle),
    Exceptional,
}

/// Cycle of `Q_3` through `M ∪ {e}` for a size-3 matching and an extra
/// edge, or the exceptional verdict. Per matching class at most one edge
/// class is exceptional, and exactly one pair class overall.
pub fn q3_matching_plus_edge(m: &Matching, e: Edge) -> Result<MatchingPlusEdge> {
    let q3 = Cube::new(3)?;
    if m.len() != 3 {
        return Err(Error::precondition("the matching must have three edges"));
    }
    if m.contains(e) {
        return Err(Error::precondition("the extra edge already lies in the matching"));
    }
    q3.check_edge(e)?;
    for &me in m.edges() {
        q3.check_edge(me)?;
    }
    let mut required = m.edges().to_vec();
    required.push(e);
    debug_assert!(crate::structures::is_linear_forest(&required));
    match primitives::try_cycle(q3, required, Vec::new())? {
        Some(c) => Ok(MatchingPlusEdge::Cycle(c)),
        None => Ok(MatchingPlusEdge::Exceptional),
    }
}

/// Cycle of `Q_4` through `M` avoiding `F` within the base bounds
/// (`1 <= |M| <= 6`, `|F| <= 3 - ceil(|M|/2)`), or the exceptional
/// verdict exactly on the cataloged shape. Follows the dimension-split
/// case analysis; `q4_base_direct` is the differential-testing alternative
/// that asks the solver outright.
pub fn q4_base(m: &Matching, f: &FaultSet) -> Result<FaultyOutcome> {
    let mut trace = Trace::new();
    q4_base_traced(m, f, &mut trace)
}

pub fn q4_base_traced(m: &Matching, f: &FaultSet, trace: &mut Trace) -> Result<FaultyOutcome> {
    let q4 = Cube::new(4)?;
    check_instance(q4, m, f)?;
    if m.is_empty() || m.len() > 6 {
        return Err(Error::precondition("matching size outside 1..=6"));
    }
    let bound = 3 - (m.len() as i64 + 1) / 2;
    if f.len() as i64 > bound {
        return Err(Error::precondition(format!(
            "{} faults exceed the base bound {bound}",
            f.len()
        )));
    }

    if f.is_empty() {
        trace.push("q4:no-faults");
        return Ok(FaultyOutcome::Cycle(base_cycle_small_traced(q4, m, trace)?));
    }
    match (m.len(), f.len()) {
        (1, _) => {
            trace.push("q4:single-edge");
            let c = cycle_avoiding_faults_through_edge(q4, m.edges()[0], f)?;
            Ok(FaultyOutcome::Cycle(c))
        }
        (2, 1) | (3, 1) => {
            trace.push("q4:forest-faults");
            let c = primitives::cycle_through_forest_avoiding_faults(
                q4,
                &LinearForest::from(m.clone()),
                f,
            )?;
            Ok(FaultyOutcome::Cycle(c))
        }
        (2, 2) => {
            trace.push("q4:two-two");
            Ok(FaultyOutcome::Cycle(two_matching_two_faults(q4, m, f)?))
        }
        (4, 1) => {
            if let Some(j) = (0..4).find(|&j| m.edges().iter().all(|e| e.dim() != j)) {
                trace.push("q4:m4-split-empty");
                four_matching_one_fault_empty_dim(q4, m, f, j, trace)
            } else {
                trace.push("q4:m4-split-ones");
                Ok(FaultyOutcome::Cycle(four_matching_one_fault_all_ones(q4, m, f)?))
            }
        }
        _ => Err(Error::internal("dispatch fell through the size table")),
    }
}

/// Differential-testing alternative: the solver answers the same question
/// directly, with no case analysis.
pub fn q4_base_direct(m: &Matching, f: &FaultSet) -> Result<FaultyOutcome> {
    let q4 = Cube::new(4)?;
    check_instance(q4, m, f)?;
    match primitives::try_cycle(q4, m.edges().to_vec(), f.edges().to_vec())? {
        Some(c) => Ok(FaultyOutcome::Cycle(c)),
        None => {
            if is_case_a(m, f)? {
                Ok(FaultyOutcome::CaseA)
            } else {
                Err(Error::internal(
                    "solver found a non-cataloged infeasible base instance",
                ))
            }
        }
    }
}

/// `|M| = 4` with some dimension class empty of matching edges: split there
/// and stitch the halves, falling to direct search only in the one
/// configuration whose resolution the analysis leaves to inspection.
fn four_matching_one_fault_empty_dim(
    q4: Cube,
    m: &Matching,
    f: &FaultSet,
    _hint: u32,
    trace: &mut Trace,
) -> Result<FaultyOutcome> {
    // Among empty dimensions prefer a split whose bigger side has at most
    // three edges; one always exists.
    let empties: Vec<u32> = (0..4)
        .filter(|&j| m.edges().iter().all(|e| e.dim() != j))
        .collect();
    let j = empties
        .iter()
        .copied()
        .min_by_key(|&j| {
            let on0 = m
                .edges()
                .iter()
                .filter(|e| e.lo().bit(j) == 0)
                .count();
            (on0.max(4 - on0), j)
        })
        .unwrap();
    let parts = split_instance(q4, j, m, f)?;
    let split = parts.split;
    let sub = split.sub();
    let fault = f.edges()[0];

    // Orient so side 0 carries at least as many matching edges.
    let (m0, m1, f0, f1, side0) = if parts.m0.len() >= parts.m1.len() {
        (parts.m0, parts.m1, parts.f0, parts.f1, 0u32)
    } else {
        (parts.m1, parts.m0, parts.f1, parts.f0, 1u32)
    };
    if m0.len() > 3 {
        return Err(Error::internal("no balanced empty-dimension split"));
    }

    if m0.len() == 3 {
        let xy = m1.edges()[0];
        let in_c0_side = !f0.is_empty();
        if in_c0_side {
            trace.push("q4:m4:c31-f0");
            let fs = f0.edges()[0];
            let c0 = cycle_through_forest(sub, &LinearForest::from(m0.clone()))?;
            let (uv, through) = if !c0.contains_edge(fs) {
                let uv = cycle_edges_in_order(&c0)
                    .into_iter()
                    .find(|&e| !m0.contains(e) && e != xy)
                    .ok_or_else(|| Error::internal("no spare cycle edge"))?;
                (uv, true)
            } else if fs != xy {
                (fs, true)
            } else {
                // The faulty edge sits on the cycle and mirrors the far
                // matching edge: reroute with a pinned spanning pair.
                let uv = cycle_edges_in_order(&c0)
                    .into_iter()
                    .find(|&e| !m0.contains(e) && sub.edge_distance(e, fs) == 1)
                    .ok_or_else(|| Error::internal("no adjacent spare edge"))?;
                let pair = spanning_two_paths(sub, xy.lo(), xy.hi(), uv.lo(), uv.hi(), true)?;
                let side0_edges: Vec<Edge> = c0
                    .edges()
                    .into_iter()
                    .filter(|&e| e != fs && e != uv)
                    .collect();
                let mut side1_edges = pair.p1.edges();
                side1_edges.extend(pair.p2.edges());
                let cross = [xy.lo(), xy.hi(), uv.lo(), uv.hi()];
                let cyc = assemble_halves(split, side0, &side0_edges, &side1_edges, &cross)?;
                return Ok(FaultyOutcome::Cycle(cyc));
            };
            debug_assert!(through);
            let p = path_through_edge(sub, uv.lo(), uv.hi(), xy)?;
            let side0_edges: Vec<Edge> =
                c0.edges().into_iter().filter(|&e| e != uv).collect();
            let cyc =
                assemble_halves(split, side0, &side0_edges, &p.edges(), &[uv.lo(), uv.hi()])?;
            return Ok(FaultyOutcome::Cycle(cyc));
        }
        trace.push("q4:m4:c31-f1");
        // Fault crosses or lies in the path side: one fault at most there.
        let c1 = cycle_avoiding_faults_through_edge(sub, xy, &f1)?;
        let crossing_block: Option<Vertex> = if fault.dim() == j {
            Some(split.project(fault.lo()))
        } else {
            None
        };
        for uv in cycle_edges_in_order(&c1) {
            if uv == xy || m0.contains(uv) {
                continue;
            }
            if let Some(w) = crossing_block {
                if uv.touches(w) {
                    continue;
                }
            }
            if let MatchingPlusEdge::Cycle(c0) = q3_matching_plus_edge(&m0, uv)? {
                let side0_edges: Vec<Edge> =
                    c0.edges().into_iter().filter(|&e| e != uv).collect();
                let side1_edges: Vec<Edge> =
                    c1.edges().into_iter().filter(|&e| e != uv).collect();
                let cyc = assemble_halves(
                    split,
                    side0,
                    &side0_edges,
                    &side1_edges,
                    &[uv.lo(), uv.hi()],
                )?;
                return Ok(FaultyOutcome::Cycle(cyc));
            }
        }
        return Err(Error::internal("no transferable edge on the far cycle"));
    }

    // Balanced split: two matching edges each side.
    debug_assert_eq!(m0.len(), 2);
    debug_assert_eq!(m1.len(), 2);
    // Arrange the fault on the crossing class or the cycle side.
    let (m0, m1, f0, side0) = if f1.is_empty() {
        (m0, m1, f0, side0)
    } else {
        (m1, m0, f1, 1 - side0)
    };

    if fault.dim() == j {
        trace.push("q4:m4:c22-cross");
        let w = split.project(fault.lo());
        let c0 = cycle_through_forest(sub, &LinearForest::from(m0.clone()))?;
        let uv = cycle_edges_in_order(&c0)
            .into_iter()
            .find(|&e| !m0.contains(e) && !m1.contains(e) && !e.touches(w))
            .ok_or_else(|| Error::internal("no crossing-safe spare edge"))?;
        let forest = LinearForest::try_new({
            let mut es = m1.edges().to_vec();
            es.push(uv);
            es
        })?;
        let c1 = cycle_through_forest(sub, &forest)?;
        return Ok(FaultyOutcome::Cycle(merge_cycles(
            split, side0, &c0, &c1, uv,
        )?));
    }

    let f_sub = f0.edges()[0];
    if !is_q3_exception(&m0, &f0)? {
        trace.push("q4:m4:c22-regular");
        let c0 = primitives::try_cycle(sub, m0.edges().to_vec(), f0.edges().to_vec())?
            .ok_or_else(|| Error::internal("non-exceptional 3-cube instance must be feasible"))?;
        let uv = cycle_edges_in_order(&c0)
            .into_iter()
            .find(|&e| !m0.contains(e) && !m1.contains(e))
            .ok_or_else(|| Error::internal("no transferable edge"))?;
        let forest = LinearForest::try_new({
            let mut es = m1.edges().to_vec();
            es.push(uv);
            es
        })?;
        let c1 = cycle_through_forest(sub, &forest)?;
        return Ok(FaultyOutcome::Cycle(merge_cycles(
            split, side0, &c0, &c1, uv,
        )?));
    }
    if !m1.contains(f_sub) {
        trace.push("q4:m4:c22-reroute");
        // Route the cycle through the faulty edge, then drop it while
        // stitching; its mirror is free in the far matching.
        let forest0 = LinearForest::try_new({
            let mut es = m0.edges().to_vec();
            es.push(f_sub);
            es
        })?;
        let c0 = cycle_through_forest(sub, &forest0)?;
        let forest1 = LinearForest::try_new({
            let mut es = m1.edges().to_vec();
            es.push(f_sub);
            es
        })?;
        let c1 = cycle_through_forest(sub, &forest1)?;
        return Ok(FaultyOutcome::Cycle(merge_cycles(
            split, side0, &c0, &c1, f_sub,
        )?));
    }
    // Exceptional 3-cube half whose faulty edge mirrors a far matching
    // edge: resolved by inspection in the analysis; re-derive by search.
    trace.push("q4:m4:c22-search");
    match primitives::try_cycle(q4, m.edges().to_vec(), f.edges().to_vec())? {
        Some(c) => Ok(FaultyOutcome::Cycle(c)),
        None => {
            if is_case_a(m, f)? {
                Ok(FaultyOutcome::CaseA)
            } else {
                Err(Error::internal(
                    "infeasible base instance missing from the catalog",
                ))
            }
        }
    }
}

/// `|M| = 4` with one matching edge in every dimension class: split along
/// the fault's dimension, covering both the fault and one matching edge.
fn four_matching_one_fault_all_ones(q4: Cube, m: &Matching, f: &FaultSet) -> Result<HamCycle> {
    let fault = f.edges()[0];
    let j = fault.dim();
    debug_assert_eq!(m.edges().iter().filter(|e| e.dim() == j).count(), 1);
    let parts = split_instance(q4, j, m, f)?;
    let split = parts.split;
    let sub = split.sub();
    let cross = parts.m_cross[0];
    let w = split.project(fault.lo());
    let (m0, m1, side0) = if parts.m0.len() >= parts.m1.len() {
        (parts.m0, parts.m1, 0u32)
    } else {
        (parts.m1, parts.m0, 1u32)
    };
    let u = split.project(cross.lo());
    let c0 = cycle_through_forest(sub, &LinearForest::from(m0.clone()))?;
    let [a, b] = c0.neighbors_of(u);
    let v = [a.min(b), a.max(b)]
        .into_iter()
        .find(|&v| v != w)
        .ok_or_else(|| Error::internal("both cycle neighbors blocked by the fault"))?;
    let uv = Edge::new(u, v)?;
    let forest = LinearForest::try_new({
        let mut es = m1.edges().to_vec();
        es.push(uv);
        es
    })?;
    let c1 = cycle_through_forest(sub, &forest)?;
    merge_cycles(split, side0, &c0, &c1, uv)
}

/// Two matching edges, two faults: separate the matching edges into
/// different halves and stitch around the faults.
fn two_matching_two_faults(q4: Cube, m: &Matching, f: &FaultSet) -> Result<HamCycle> {
    let e = m.edges()[0];
    let h = m.edges()[1];
    let j = crate::cube::separate_disjoint_edges(q4, e, h)?;
    let parts = split_instance(q4, j, m, f)?;
    let split = parts.split;
    let sub = split.sub();

    // Relabel so side A carries at least as many faults as side B.
    let (m_a, m_b, f_a, f_b, side_a) = if parts.f0.len() >= parts.f1.len() {
        (parts.m0, parts.m1, parts.f0, parts.f1, 0u32)
    } else {
        (parts.m1, parts.m0, parts.f1, parts.f0, 1u32)
    };
    let e_a = m_a.edges()[0];
    let e_b = m_b.edges()[0];
    let crossing_blocks: Vec<Vertex> = parts
        .f_cross
        .iter()
        .map(|g| split.project(g.lo()))
        .collect();

    if f_b.is_empty() {
        if f_a.len() <= 1 {
            let c_a = cycle_avoiding_faults_through_edge(sub, e_a, &f_a)?;
            let uv = cycle_edges_in_order(&c_a)
                .into_iter()
                .find(|&uv| {
                    uv != e_a && uv != e_b && !crossing_blocks.iter().any(|&w| uv.touches(w))
                })
                .ok_or_else(|| Error::internal("no fault-free transfer edge"))?;
            let p = path_through_edge(sub, uv.lo(), uv.hi(), e_b)?;
            let side_a_edges: Vec<Edge> =
                c_a.edges().into_iter().filter(|&x| x != uv).collect();
            return assemble_halves(split, side_a, &side_a_edges, &p.edges(), &[uv.lo(), uv.hi()]);
        }
        // Both faults in side A: avoid one, route over (then drop) the
        // other if it shows up on the cycle.
        let (f_keep, f_avoid) = {
            let c0 = f_a.edges()[0];
            let c1 = f_a.edges()[1];
            if c0 != e_b {
                (c0, c1)
            } else {
                (c1, c0)
            }
        };
        debug_assert_ne!(f_keep, e_b);
        let c_a = cycle_avoiding_faults_through_edge(sub, e_a, &FaultSet::new(vec![f_avoid]))?;
        let uv = if c_a.contains_edge(f_keep) {
            f_keep
        } else {
            cycle_edges_in_order(&c_a)
                .into_iter()
                .find(|&uv| uv != e_a && uv != e_b && uv != f_keep)
                .ok_or_else(|| Error::internal("no transfer edge off the kept fault"))?
        };
        let p = path_through_edge(sub, uv.lo(), uv.hi(), e_b)?;
        let side_a_edges: Vec<Edge> = c_a.edges().into_iter().filter(|&x| x != uv).collect();
        return assemble_halves(split, side_a, &side_a_edges, &p.edges(), &[uv.lo(), uv.hi()]);
    }

    // One fault in each half, none crossing.
    let c_a = cycle_avoiding_faults_through_edge(sub, e_a, &f_a)?;
    let c_b = cycle_avoiding_faults_through_edge(sub, e_b, &f_b)?;
    let uv = cycle_edges_in_order(&c_a)
        .into_iter()
        .find(|&uv| uv != e_a && uv != e_b && c_b.contains_edge(uv))
        .ok_or_else(|| Error::internal("the two cycles share no droppable edge"))?;
    merge_cycles(split, side_a, &c_a, &c_b, uv)
}

/// Picks a split dimension for a 5-cube fault instance: at most one touched
/// crossing edge and neither half the exceptional 4-cube shape. Follows the
/// selection priority: direct pick when the faults vanish or the matching
/// is small, the two-stage fallback at `|M| = 4`, and a scan over the
/// surviving dimensions for `|M| in {5, 6}`.
pub fn q5_choose_dimension(m: &Matching, f: &FaultSet) -> Result<u32> {
    let q5 = Cube::new(5)?;
    check_instance(q5, m, f)?;
    if m.is_empty() || m.len() > 8 {
        return Err(Error::precondition("matching size outside 1..=8"));
    }
    if f.len() as i64 > 4 - (m.len() as i64 + 1) / 2 {
        return Err(Error::precondition("fault set exceeds the bound"));
    }

    let touched = |j: u32| {
        m.edges()
            .iter()
            .chain(f.edges())
            .filter(|e| e.dim() == j)
            .count()
    };
    let clean = |j: u32| -> Result<bool> {
        let parts = split_instance(q5, j, m, f)?;
        Ok(!is_case_a(&parts.m0, &parts.f0)? && !is_case_a(&parts.m1, &parts.f1)?)
    };

    if f.is_empty() || m.len() <= 3 {
        // Nothing can be the exceptional shape: no faults in a half, or
        // fewer than four matching edges anywhere.
        let j = (0..5)
            .find(|&j| touched(j) <= 1)
            .ok_or_else(|| Error::internal("pigeonhole: some class is barely touched"))?;
        debug_assert!(clean(j)?);
        return Ok(j);
    }

    if m.len() == 4 {
        let j = (0..5)
            .find(|&j| touched(j) <= 1)
            .ok_or_else(|| Error::internal("pigeonhole at |M| = 4"))?;
        if clean(j)? {
            return Ok(j);
        }
        // Fallback: a dimension avoiding the matching entirely and cutting
        // it into two pairs; halves with two edges are never exceptional.
        let j0 = (0..5)
            .find(|&j0| {
                if m.edges().iter().any(|e| e.dim() == j0) {
                    return false;
                }
                if f.edges().iter().filter(|e| e.dim() == j0).count() > 1 {
                    return false;
                }
                let on0 = m.edges().iter().filter(|e| e.lo().bit(j0) == 0).count();
                on0 == 2
            })
            .ok_or_else(|| Error::internal("no balanced fallback dimension at |M| = 4"))?;
        debug_assert!(clean(j0)?);
        return Ok(j0);
    }

    // 5 <= |M| <= 6 and a single fault: scan the surviving dimensions.
    for j in 0..5 {
        if touched(j) <= 1 && clean(j)? {
            return Ok(j);
        }
    }
    Err(Error::internal(
        "no clean dimension despite the selection guarantee",
    ))
}

/// Orbit counts of `(M, u)` pairs in `Q_3` with `u` uncovered, per matching
/// size. Size three is the interesting datum; the smaller sizes reduce to
/// it by extension.
pub fn q3_matching_vertex_classes() -> Result<Vec<usize>> {
    let q3 = Cube::new(3)?;
    let group = crate::cube::AutGroup::get(q3)?;
    let mut counts = Vec::new();
    for size in 0..=3usize {
        let mut classes = std::collections::BTreeSet::new();
        for m in crate::verify::enumerate_matchings(q3, size) {
            for u in q3.vertices() {
                if m.covers(u) {
                    continue;
                }
                let canon = (0..group.len())
                    .map(|i| {
                        (
                            group.apply_edges_sorted(i, m.edges()),
                            group.apply_vertex(i, u),
                        )
                    })
                    .min()
                    .unwrap();
                classes.insert(canon);
            }
        }
        counts.push(classes.len());
    }
    Ok(counts)
}
