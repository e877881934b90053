//! Directed feedback graphs over arms.
//!
//! Pulling an arm reveals the rewards of all its out-neighbors. Every arm is
//! its own out-neighbor; constructors add missing self-loops.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arms::ArmSubset;
use crate::error::{Error, Result};

/// Largest graph for which [`FeedbackGraph::independence_number_exact`] runs.
pub const MAX_EXACT_INDEPENDENCE_ARMS: usize = 26;
/// Largest target for which [`FeedbackGraph::dominating_number_exact`] runs.
pub const MAX_EXACT_DOMINATING_TARGET: usize = 20;

/// Immutable directed graph on `[0, K)` with mandatory self-loops.
///
/// Out-neighbor lists are stored sorted, so restricted-subgraph degrees are
/// computed by sorted intersection instead of materializing subgraphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackGraph {
    adjacency: Vec<Vec<usize>>,
}

/// On-disk graph description: `{"K": int, "edges": [[from, to], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(rename = "K")]
    pub num_arms: usize,
    pub edges: Vec<[usize; 2]>,
}

impl FeedbackGraph {
    /// Builds a graph from directed edges, adding every self-loop.
    pub fn new<I>(num_arms: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if num_arms == 0 {
            return Err(Error::InvalidGraph("graph needs at least one arm".into()));
        }
        let mut adjacency: Vec<Vec<usize>> = (0..num_arms).map(|a| vec![a]).collect();
        for (from, to) in edges {
            if from >= num_arms || to >= num_arms {
                return Err(Error::InvalidGraph(format!(
                    "edge ({from}, {to}) out of range for {num_arms} arms"
                )));
            }
            adjacency[from].push(to);
        }
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self { adjacency })
    }

    /// Semi-bandit feedback: each arm observes only itself.
    pub fn self_loops_only(num_arms: usize) -> Result<Self> {
        Self::new(num_arms, std::iter::empty())
    }

    /// Full-information feedback.
    pub fn complete(num_arms: usize) -> Result<Self> {
        Self::new(
            num_arms,
            (0..num_arms).flat_map(|a| (0..num_arms).map(move |b| (a, b))),
        )
    }

    /// `center` observes every arm; the others observe only themselves.
    pub fn star(num_arms: usize, center: usize) -> Result<Self> {
        Self::new(num_arms, (0..num_arms).map(|b| (center, b)))
    }

    /// Each block is a clique; there are no edges between blocks.
    pub fn disjoint_cliques(num_arms: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let edges = blocks
            .iter()
            .flat_map(|block| {
                block
                    .iter()
                    .flat_map(move |&a| block.iter().map(move |&b| (a, b)))
            })
            .collect::<Vec<_>>();
        Self::new(num_arms, edges)
    }

    /// Partitions `[0, K)` into consecutive cliques of the given sizes.
    pub fn consecutive_cliques(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let blocks: Vec<Vec<usize>> = sizes
            .iter()
            .map(|&len| {
                let block = (start..start + len).collect();
                start += len;
                block
            })
            .collect();
        Self::disjoint_cliques(start, &blocks)
    }

    /// Loads a graph, reporting whether self-loops had to be added.
    pub fn from_file_spec(spec: &GraphFile) -> Result<(Self, bool)> {
        let graph = Self::new(spec.num_arms, spec.edges.iter().map(|e| (e[0], e[1])))?;
        let mut has_loop = vec![false; spec.num_arms];
        for e in &spec.edges {
            if e[0] == e[1] && e[0] < spec.num_arms {
                has_loop[e[0]] = true;
            }
        }
        Ok((graph, has_loop.iter().any(|l| !l)))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let spec: GraphFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        let (graph, added) = Self::from_file_spec(&spec)?;
        if added {
            log::warn!("{}: self-loops missing, added automatically", path.display());
        }
        Ok(graph)
    }

    /// Edge list including self-loops.
    pub fn to_file_spec(&self) -> GraphFile {
        GraphFile {
            num_arms: self.num_arms(),
            edges: self
                .adjacency
                .iter()
                .enumerate()
                .flat_map(|(a, row)| row.iter().map(move |&b| [a, b]))
                .collect(),
        }
    }

    pub fn num_arms(&self) -> usize {
        self.adjacency.len()
    }

    /// Out-neighbors of one arm, sorted, including the arm itself.
    pub fn out(&self, arm: usize) -> &[usize] {
        &self.adjacency[arm]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacency[from].binary_search(&to).is_ok()
    }

    /// Number of directed edges, not counting self-loops.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|row| row.len() - 1).sum()
    }

    /// `N_out(U)`, the union of out-neighborhoods.
    pub fn out_neighbors(&self, arms: &ArmSubset) -> Result<ArmSubset> {
        arms.validate(self.num_arms())?;
        Ok(arms.iter().flat_map(|a| self.out(a).iter().copied()).collect())
    }

    /// `|N_out(arm) ∩ candidates|`.
    pub fn out_degree_within(&self, arm: usize, candidates: &ArmSubset) -> usize {
        sorted_intersection_len(self.out(arm), candidates.as_slice())
    }

    /// The candidate with the largest out-degree in the subgraph restricted to
    /// `candidates`; ties go to the smallest index.
    pub fn greedy_explore_pick(&self, candidates: &ArmSubset) -> Result<usize> {
        candidates.validate(self.num_arms())?;
        let mut best: Option<(usize, usize)> = None;
        for a in candidates.iter() {
            let degree = self.out_degree_within(a, candidates);
            if best.is_none_or(|(_, d)| degree > d) {
                best = Some((a, degree));
            }
        }
        best.map(|(a, _)| a)
            .ok_or_else(|| Error::Precondition("greedy pick from an empty candidate set".into()))
    }

    /// Greedy dominating set of the subgraph on `target`.
    ///
    /// Each step takes the target arm whose out-neighborhood covers the most
    /// still-uncovered target arms (ties to the smallest index). This is the
    /// greedy set-cover rule, so the result is within `1 + ln|target|` of the
    /// dominating number.
    pub fn greedy_dominating_cover(&self, target: &ArmSubset) -> Result<Vec<usize>> {
        target.validate(self.num_arms())?;
        if target.is_empty() {
            return Err(Error::Precondition("dominating cover of an empty target".into()));
        }
        let mut uncovered = target.clone();
        let mut cover = Vec::new();
        while !uncovered.is_empty() {
            let (pick, gain) = target
                .iter()
                .map(|a| (a, self.out_degree_within(a, &uncovered)))
                .fold((usize::MAX, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
            debug_assert!(gain > 0, "self-loops guarantee progress");
            for &b in self.out(pick) {
                uncovered.remove(b);
            }
            cover.push(pick);
        }
        Ok(cover)
    }

    fn undirected_masks(&self) -> Vec<u64> {
        let k = self.num_arms();
        let mut masks = vec![0u64; k];
        for (a, row) in self.adjacency.iter().enumerate() {
            for &b in row {
                if a != b {
                    masks[a] |= 1 << b;
                    masks[b] |= 1 << a;
                }
            }
        }
        masks
    }

    /// Size of the largest arm set with no edge (in either direction) between
    /// distinct members. Exhaustive; limited to 26 arms.
    pub fn independence_number_exact(&self) -> Result<usize> {
        let k = self.num_arms();
        if k > MAX_EXACT_INDEPENDENCE_ARMS {
            return Err(Error::Capability(format!(
                "exact independence number limited to {MAX_EXACT_INDEPENDENCE_ARMS} arms (got {k}); \
                 use independence_number_greedy for a lower bound"
            )));
        }
        let masks = self.undirected_masks();
        Ok(max_independent(full_mask(k), &masks))
    }

    /// Lower bound on the independence number from min-degree greedy.
    pub fn independence_number_greedy(&self) -> usize {
        let k = self.num_arms();
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (a, row) in self.adjacency.iter().enumerate() {
            for &b in row {
                if a != b {
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
        }
        let mut alive = vec![true; k];
        let mut size = 0;
        loop {
            let pick = (0..k)
                .filter(|&a| alive[a])
                .min_by_key(|&a| neighbors[a].iter().filter(|&&b| alive[b]).count());
            let Some(a) = pick else { break };
            size += 1;
            alive[a] = false;
            for &b in &neighbors[a] {
                alive[b] = false;
            }
        }
        size
    }

    /// Smallest number of target arms whose out-neighborhoods cover `target`.
    /// Exhaustive; limited to targets of 20 arms.
    pub fn dominating_number_exact(&self, target: &ArmSubset) -> Result<usize> {
        target.validate(self.num_arms())?;
        let m = target.len();
        if m == 0 {
            return Err(Error::Precondition("dominating number of an empty target".into()));
        }
        if m > MAX_EXACT_DOMINATING_TARGET {
            return Err(Error::Capability(format!(
                "exact dominating number limited to targets of {MAX_EXACT_DOMINATING_TARGET} arms (got {m}); \
                 use greedy_dominating_cover for an upper bound"
            )));
        }
        let cover_masks: Vec<u64> = target
            .iter()
            .map(|a| {
                target
                    .iter()
                    .enumerate()
                    .filter(|&(_, b)| self.has_edge(a, b))
                    .fold(0u64, |acc, (i, _)| acc | (1 << i))
            })
            .collect();
        let goal = full_mask(m);
        for size in 1..=m {
            let found = k_subsets(m, size).any(|subset| {
                let mut covered = 0u64;
                let mut rest = subset;
                while rest != 0 {
                    covered |= cover_masks[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                covered == goal
            });
            if found {
                return Ok(size);
            }
        }
        Err(Error::Internal("self-loops make the full target a cover".into()))
    }

    /// Graph summary with exact numbers where the search budget allows.
    pub fn stats(&self) -> GraphStats {
        let full = ArmSubset::full(self.num_arms());
        let alpha = match self.independence_number_exact() {
            Ok(v) => Estimate { value: v, exact: true },
            Err(_) => Estimate { value: self.independence_number_greedy(), exact: false },
        };
        let domination = match self.dominating_number_exact(&full) {
            Ok(v) => Estimate { value: v, exact: true },
            Err(_) => Estimate {
                value: self.greedy_dominating_cover(&full).map(|c| c.len()).unwrap_or(0),
                exact: false,
            },
        };
        GraphStats {
            num_arms: self.num_arms(),
            edge_count: self.edge_count(),
            independence_number: alpha,
            dominating_number: domination,
        }
    }
}

/// A graph quantity that is exact or, beyond the search budget, a greedy bound
/// (lower bound for the independence number, upper bound for domination).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Estimate {
    pub value: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub num_arms: usize,
    pub edge_count: usize,
    pub independence_number: Estimate,
    pub dominating_number: Estimate,
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn max_independent(mask: u64, neighbors: &[u64]) -> usize {
    if mask == 0 {
        return 0;
    }
    // Vertices of degree <= 1 belong to some maximum independent set.
    let mut rest = mask;
    let mut branch = 0;
    let mut branch_degree = 0;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let degree = (neighbors[v] & mask).count_ones();
        if degree <= 1 {
            return 1 + max_independent(mask & !(1 << v) & !neighbors[v], neighbors);
        }
        if degree > branch_degree {
            branch = v;
            branch_degree = degree;
        }
    }
    let without = max_independent(mask & !(1 << branch), neighbors);
    let with = 1 + max_independent(mask & !(1 << branch) & !neighbors[branch], neighbors);
    without.max(with)
}

/// All `size`-element subsets of `{0..n}` as bitmasks (Gosper's hack).
pub(crate) fn k_subsets(n: usize, size: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let first = (1u64 << size) - 1;
    std::iter::successors(Some(first), move |&x| {
        let c = x & x.wrapping_neg();
        let r = x + c;
        let next = (((r ^ x) >> 2) / c) | r;
        (next < limit).then_some(next)
    })
    .take_while(move |&x| x < limit)
}
