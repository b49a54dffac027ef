//! Independent brute-force oracle, isomorphism-reduced instance
//! enumeration, and whole-range sweep reports.
//!
//! The oracle shares no code with the construction path: it is a plain
//! recursive enumeration over the adjacency structure with only the two
//! obviously-sound rules (skip forbidden edges, leave a vertex along its
//! unused prescribed edges). At `n <= 4` it runs to exhaustion, so its
//! infeasible verdicts are certificates.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructor::{self, FaultyOutcome, Trace};
use crate::cube::{canonicalize, AutGroup, Cube, Edge, Vertex};
use crate::error::{Error, Result};
use crate::structures::{check_instance, validate_cycle, FaultSet, HamCycle, Matching};

/// Node cap for oracle runs above the exhaustive range.
pub const ORACLE_DEFAULT_LIMIT: u64 = 200_000_000;

/// Largest dimension at which the oracle exhausts the search space and may
/// certify infeasibility.
pub const ORACLE_EXHAUSTIVE_N: u32 = 4;

#[derive(Clone, Debug)]
pub enum OracleVerdict {
    Feasible(HamCycle),
    Infeasible,
    /// Budget ran out before exhaustion; never reported at `n <= 4`.
    Unknown { explored: u64 },
}

impl OracleVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OracleVerdict::Feasible(_))
    }
}

struct Naive {
    n: u32,
    nv: usize,
    forb: Vec<u32>,
    req: Vec<u32>,
    used: Vec<u32>,
    visited: Vec<bool>,
    seq: Vec<Vertex>,
    nodes: u64,
    limit: Option<u64>,
}

impl Naive {
    fn pending(&self, v: usize) -> u32 {
        self.req[v] & !self.used[v]
    }

    fn dfs(&mut self, head: usize) -> std::result::Result<bool, ()> {
        if self.seq.len() == self.nv {
            // Close back to vertex 0.
            let diff = head;
            if diff == 0 || !diff.is_power_of_two() {
                return Ok(false);
            }
            let d = diff.trailing_zeros();
            if self.forb[head] & (1 << d) != 0 {
                return Ok(false);
            }
            for v in [head, 0usize] {
                let p = self.pending(v);
                if p.count_ones() >= 2 || (p.count_ones() == 1 && p & (1 << d) == 0) {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let at_start = self.seq.len() == 1;
        let pending = self.pending(head);
        let allowed = if at_start { 2 } else { 1 };
        if pending.count_ones() > allowed {
            return Ok(false);
        }
        // Leaving a vertex must consume its prescribed edges; the start
        // vertex keeps one for the closing edge.
        let dims = if !at_start && pending != 0 {
            pending
        } else {
            (1u32 << self.n) - 1
        };
        let mut rest = dims;
        while rest != 0 {
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            if self.forb[head] & (1 << i) != 0 {
                continue;
            }
            let w = head ^ (1usize << i);
            if self.visited[w] {
                continue;
            }
            self.nodes += 1;
            if let Some(limit) = self.limit {
                if self.nodes > limit {
                    return Err(());
                }
            }
            self.visited[w] = true;
            self.seq.push(Vertex(w as u32));
            self.used[head] |= 1 << i;
            self.used[w] |= 1 << i;
            let found = self.dfs(w);
            self.used[head] &= !(1 << i);
            self.used[w] &= !(1 << i);
            match found {
                Ok(true) => return Ok(true),
                Ok(false) => {
                    self.seq.pop();
                    self.visited[w] = false;
                }
                Err(()) => return Err(()),
            }
        }
        Ok(false)
    }
}

/// Ground-truth feasibility of "Hamiltonian cycle containing `M` avoiding
/// `F`" by plain exhaustive search; certified at `n <= 4`, budgeted above.
pub fn oracle(cube: Cube, m: &Matching, f: &FaultSet) -> Result<OracleVerdict> {
    oracle_budgeted(cube, m, f, default_oracle_limit(cube))
}

fn default_oracle_limit(cube: Cube) -> Option<u64> {
    if cube.n() <= ORACLE_EXHAUSTIVE_N {
        None
    } else {
        Some(ORACLE_DEFAULT_LIMIT)
    }
}

pub fn oracle_budgeted(
    cube: Cube,
    m: &Matching,
    f: &FaultSet,
    limit: Option<u64>,
) -> Result<OracleVerdict> {
    if cube.n() < 2 {
        return Err(Error::precondition("cycles need n >= 2"));
    }
    check_instance(cube, m, f)?;
    let nv = cube.vertex_count();
    let mut forb = vec![0u32; nv];
    for &e in f.edges() {
        forb[e.lo().index()] |= 1 << e.dim();
        forb[e.hi().index()] |= 1 << e.dim();
    }
    let mut req = vec![0u32; nv];
    for &e in m.edges() {
        req[e.lo().index()] |= 1 << e.dim();
        req[e.hi().index()] |= 1 << e.dim();
    }
    let mut naive = Naive {
        n: cube.n(),
        nv,
        forb,
        req,
        used: vec![0u32; nv],
        visited: {
            let mut v = vec![false; nv];
            v[0] = true;
            v
        },
        seq: vec![Vertex(0)],
        nodes: 0,
        limit,
    };
    match naive.dfs(0) {
        Ok(true) => Ok(OracleVerdict::Feasible(HamCycle::try_new(
            cube,
            naive.seq.clone(),
        )?)),
        Ok(false) => Ok(OracleVerdict::Infeasible),
        Err(()) => Ok(OracleVerdict::Unknown {
            explored: naive.nodes,
        }),
    }
}

/// All matchings of the given size, raw (not reduced by isomorphism),
/// enumerated deterministically.
pub fn enumerate_matchings(cube: Cube, size: usize) -> Vec<Matching> {
    let edges = cube.edges();
    let mut out = Vec::new();
    let mut chosen: Vec<Edge> = Vec::with_capacity(size);
    fn rec(
        edges: &[Edge],
        start: usize,
        size: usize,
        chosen: &mut Vec<Edge>,
        out: &mut Vec<Matching>,
    ) {
        if chosen.len() == size {
            out.push(Matching::try_new(chosen.clone()).unwrap());
            return;
        }
        for i in start..edges.len() {
            if chosen.iter().all(|&c| c.is_disjoint(edges[i])) {
                chosen.push(edges[i]);
                rec(edges, i + 1, size, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(&edges, 0, size, &mut chosen, &mut out);
    out
}

/// One canonical representative per matching class of the given size.
pub fn enumerate_matching_classes(cube: Cube, size: usize) -> Result<Vec<Matching>> {
    let all = enumerate_matchings(cube, size);
    let mut classes: BTreeSet<Matching> = BTreeSet::new();
    for m in all {
        classes.insert(canonicalize(cube, &m, &FaultSet::empty())?.matching);
    }
    Ok(classes.into_iter().collect())
}

fn fault_subsets(candidates: &[Edge], size: usize) -> Vec<Vec<Edge>> {
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(size);
    fn rec(
        cands: &[Edge],
        start: usize,
        size: usize,
        chosen: &mut Vec<Edge>,
        out: &mut Vec<Vec<Edge>>,
    ) {
        if chosen.len() == size {
            out.push(chosen.clone());
            return;
        }
        for i in start..cands.len() {
            chosen.push(cands[i]);
            rec(cands, i + 1, size, chosen, out);
            chosen.pop();
        }
    }
    rec(candidates, 0, size, &mut chosen, &mut out);
    out
}

/// Instances `(M, F)` with the given sizes. With `up_to_iso`, exactly one
/// representative per class: canonical matchings first, then fault sets
/// reduced under the matching's stabilizer, which together canonicalize
/// the pair. Raw enumeration otherwise.
pub fn enumerate_instances(
    cube: Cube,
    m_size: usize,
    f_size: usize,
    up_to_iso: bool,
) -> Result<Vec<(Matching, FaultSet)>> {
    let mut out = Vec::new();
    if !up_to_iso {
        for m in enumerate_matchings(cube, m_size) {
            let candidates: Vec<Edge> = cube
                .edges()
                .into_iter()
                .filter(|e| !m.contains(*e))
                .collect();
            for f in fault_subsets(&candidates, f_size) {
                out.push((m.clone(), FaultSet::new(f)));
            }
        }
        return Ok(out);
    }
    let group = AutGroup::get(cube)?;
    for m in enumerate_matching_classes(cube, m_size)? {
        if f_size == 0 {
            out.push((m, FaultSet::empty()));
            continue;
        }
        let stab = group.stabilizer_of(m.edges());
        let candidates: Vec<Edge> = cube
            .edges()
            .into_iter()
            .filter(|e| !m.contains(*e))
            .collect();
        for f in fault_subsets(&candidates, f_size) {
            // Keep the subset only if it is its own orbit minimum under the
            // stabilizer; that yields one representative per pair class.
            let mut is_min = true;
            for &g in &stab {
                if group.apply_edges_sorted(g, &f) < f {
                    is_min = false;
                    break;
                }
            }
            if is_min {
                out.push((m.clone(), FaultSet::new(f)));
            }
        }
    }
    Ok(out)
}

/// Orbit size of an instance under the automorphism group, via the
/// orbit-stabilizer identity.
pub fn orbit_size(cube: Cube, m: &Matching, f: &FaultSet) -> Result<usize> {
    let group = AutGroup::get(cube)?;
    let stab = (0..group.len())
        .filter(|&i| {
            group.apply_edges_sorted(i, m.edges()) == m.edges()
                && group.apply_edges_sorted(i, f.edges()) == f.edges()
        })
        .count();
    Ok(group.len() / stab)
}

/// Seeded random matching of the requested size (retry-based greedy; the
/// sizes used stay well below the maximum matching).
pub fn random_matching(cube: Cube, size: usize, rng: &mut StdRng) -> Matching {
    let edges = cube.edges();
    loop {
        let mut pool = edges.clone();
        pool.shuffle(rng);
        let mut chosen: Vec<Edge> = Vec::with_capacity(size);
        for e in pool {
            if chosen.len() == size {
                break;
            }
            if chosen.iter().all(|&c| c.is_disjoint(e)) {
                chosen.push(e);
            }
        }
        if chosen.len() == size {
            return Matching::try_new(chosen).unwrap();
        }
    }
}

/// Seeded random fault set of the requested size, disjoint from `M`.
pub fn random_faults(cube: Cube, m: &Matching, size: usize, rng: &mut StdRng) -> FaultSet {
    let mut candidates: Vec<Edge> = cube
        .edges()
        .into_iter()
        .filter(|e| !m.contains(*e))
        .collect();
    candidates.shuffle(rng);
    candidates.truncate(size);
    FaultSet::new(candidates)
}

/// Which theorem a sweep exercises: plain matching extension, or the
/// fault-tolerant form.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Theorem {
    MatchingOnly,
    Faulty,
}

/// Upper fault bound for a legal faulty instance.
pub fn fault_bound(n: u32, m_size: usize) -> i64 {
    n as i64 - 1 - ((m_size as i64) + 1) / 2
}

/// One `(|M|, |F|)` cell of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub m_size: usize,
    pub f_size: usize,
    pub tested: usize,
    pub successes: usize,
    pub exceptional: usize,
    pub oracle_confirmed_infeasible: usize,
    pub disagreements: usize,
}

/// Aggregated result of sweeping the constructor over instance cells and
/// cross-checking against the oracle.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub theorem: Theorem,
    pub n: u32,
    pub exhaustive: bool,
    pub seed: u64,
    pub sample_per_cell: usize,
    pub cells: Vec<CellReport>,
    pub labels: BTreeSet<String>,
    pub elapsed_ms: u128,
}

impl SweepReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.disagreements == 0)
    }

    pub fn total_tested(&self) -> usize {
        self.cells.iter().map(|c| c.tested).sum()
    }

    pub fn total_exceptional(&self) -> usize {
        self.cells.iter().map(|c| c.exceptional).sum()
    }

    /// One line per cell, stable ordering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let th = match self.theorem {
            Theorem::MatchingOnly => 1,
            Theorem::Faulty => 2,
        };
        for c in &self.cells {
            out.push_str(&format!(
                "theorem={} n={} m={} f={} tested={} ok={} exceptional={} oracle_infeasible={} disagreements={}\n",
                th,
                self.n,
                c.m_size,
                c.f_size,
                c.tested,
                c.successes,
                c.exceptional,
                c.oracle_confirmed_infeasible,
                c.disagreements
            ));
        }
        out.push_str(&format!(
            "summary theorem={} n={} exhaustive={} seed={} tested={} exceptional={} pass={} elapsed_ms={}\n",
            th,
            self.n,
            self.exhaustive,
            self.seed,
            self.total_tested(),
            self.total_exceptional(),
            self.pass(),
            self.elapsed_ms
        ));
        out
    }
}

/// Outcome of one instance inside a sweep.
enum RunOutcome {
    Success(BTreeSet<String>),
    Exceptional { oracle_confirmed: bool },
    Disagreement(String),
}

fn run_one(cube: Cube, m: &Matching, f: &FaultSet, theorem: Theorem) -> RunOutcome {
    let mut trace = Trace::new();
    let result = match theorem {
        Theorem::MatchingOnly => {
            constructor::extend_matching_traced(cube, m, &mut trace).map(FaultyOutcome::Cycle)
        }
        Theorem::Faulty => constructor::extend_matching_faulty_traced(cube, m, f, &mut trace),
    };
    match result {
        Ok(FaultyOutcome::Cycle(c)) => {
            let verdict = validate_cycle(cube, c.seq(), m, f);
            if verdict.pass() {
                RunOutcome::Success(trace.labels().clone())
            } else {
                RunOutcome::Disagreement(format!("invalid cycle for ({m:?}, {f:?}): {verdict}"))
            }
        }
        Ok(FaultyOutcome::CaseA) => {
            // The constructor refuses exactly the known exceptional shape;
            // the oracle must certify it infeasible.
            match oracle(cube, m, f) {
                Ok(OracleVerdict::Infeasible) => RunOutcome::Exceptional { oracle_confirmed: true },
                Ok(OracleVerdict::Feasible(_)) => RunOutcome::Disagreement(format!(
                    "constructor reported the exceptional shape but the oracle found a cycle: {m:?} {f:?}"
                )),
                Ok(OracleVerdict::Unknown { .. }) => {
                    RunOutcome::Exceptional { oracle_confirmed: false }
                }
                Err(e) => RunOutcome::Disagreement(format!("oracle error: {e}")),
            }
        }
        Err(e) => RunOutcome::Disagreement(format!("constructor failed on ({m:?}, {f:?}): {e}")),
    }
}

/// Sweeps the constructor over every legal cell at dimension `n`:
/// exhaustively over canonical classes for `n <= 4`, seeded samples above.
/// Any constructor failure not certified infeasible by the oracle, and any
/// invalid output, counts as a disagreement (a build-stopping defect).
pub fn sweep(
    theorem: Theorem,
    cube: Cube,
    cells: &[(usize, usize)],
    sample_per_cell: usize,
    seed: u64,
) -> Result<SweepReport> {
    let start = Instant::now();
    let exhaustive = cube.n() <= 4;
    let mut cell_reports = Vec::new();
    let mut labels = BTreeSet::new();
    for &(m_size, f_size) in cells {
        check_cell(theorem, cube, m_size, f_size)?;
        let instances: Vec<(Matching, FaultSet)> = if exhaustive {
            enumerate_instances(cube, m_size, f_size, true)?
        } else {
            let mut rng = StdRng::seed_from_u64(
                seed ^ (m_size as u64) << 32 ^ (f_size as u64) << 48 ^ cube.n() as u64,
            );
            (0..sample_per_cell)
                .map(|_| {
                    let m = random_matching(cube, m_size, &mut rng);
                    let f = random_faults(cube, &m, f_size, &mut rng);
                    (m, f)
                })
                .collect()
        };
        let outcomes: Vec<RunOutcome> = instances
            .par_iter()
            .map(|(m, f)| run_one(cube, m, f, theorem))
            .collect();
        let mut report = CellReport {
            m_size,
            f_size,
            tested: instances.len(),
            successes: 0,
            exceptional: 0,
            oracle_confirmed_infeasible: 0,
            disagreements: 0,
        };
        for outcome in outcomes {
            match outcome {
                RunOutcome::Success(ls) => {
                    report.successes += 1;
                    labels.extend(ls);
                }
                RunOutcome::Exceptional { oracle_confirmed } => {
                    report.exceptional += 1;
                    if oracle_confirmed {
                        report.oracle_confirmed_infeasible += 1;
                    }
                }
                RunOutcome::Disagreement(msg) => {
                    report.disagreements += 1;
                    eprintln!("sweep disagreement: {msg}");
                }
            }
        }
        cell_reports.push(report);
    }
    Ok(SweepReport {
        theorem,
        n: cube.n(),
        exhaustive,
        seed,
        sample_per_cell,
        cells: cell_reports,
        labels,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Every legal `(|M|, |F|)` cell for the theorem at dimension `n`. Sizes
/// are additionally capped by the maximum matching of `Q_n`.
pub fn legal_cells(theorem: Theorem, n: u32) -> Vec<(usize, usize)> {
    let max_matching = 1usize << (n - 1);
    match theorem {
        Theorem::MatchingOnly => (0..=((2 * n - 1) as usize).min(max_matching))
            .map(|m| (m, 0))
            .collect(),
        Theorem::Faulty => {
            let mut cells = Vec::new();
            for m in 1..=((2 * n - 2) as usize).min(max_matching) {
                let fmax = fault_bound(n, m);
                for f in 0..=fmax.max(0) {
                    cells.push((m, f as usize));
                }
            }
            cells
        }
    }
}

fn check_cell(theorem: Theorem, cube: Cube, m_size: usize, f_size: usize) -> Result<()> {
    let n = cube.n();
    match theorem {
        Theorem::MatchingOnly => {
            if n < 2 || m_size > (2 * n - 1) as usize || f_size != 0 {
                return Err(Error::invalid(format!(
                    "cell (m={m_size}, f={f_size}) outside matching-extension bounds at n={n}"
                )));
            }
        }
        Theorem::Faulty => {
            if n < 4 || m_size < 1 || m_size > (2 * n - 2) as usize {
                return Err(Error::invalid(format!(
                    "cell m={m_size} outside fault-tolerant bounds at n={n}"
                )));
            }
            if (f_size as i64) > fault_bound(n, m_size) {
                return Err(Error::invalid(format!(
                    "cell (m={m_size}, f={f_size}) exceeds the fault bound at n={n}"
                )));
            }
        }
    }
    // Matchings of the requested size must exist at all.
    if m_size * 2 > cube.vertex_count() {
        return Err(Error::invalid(format!(
            "no matching of size {m_size} fits in Q_{n}"
        )));
    }
    Ok(())
}
