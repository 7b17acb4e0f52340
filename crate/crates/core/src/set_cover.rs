//! Minimum-cardinality set cover: greedy and exact branch-and-bound.
//!
//! The exact solver removes duplicate and dominated subsets, then runs a
//! depth-first search that branches on the uncovered element with the fewest
//! candidate subsets. Nodes are bounded with a subgradient-optimized Lagrangian
//! relaxation; its reduced costs also ban subsets that cannot appear in an
//! improving cover. Any Lagrangian value is a valid lower bound, so the bound
//! stays sound even though the multipliers are floating point; a small margin
//! absorbs rounding before taking the ceiling.

use std::time::{Duration, Instant};

use crate::bits::BitSet;
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(600);

const EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverInstance {
    universe_size: usize,
    subsets: Vec<Vec<usize>>,
}

impl CoverInstance {
    pub fn new(universe_size: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &subsets {
            if let Some(&e) = s.iter().find(|&&e| e >= universe_size) {
                return Err(Error::Invalid(format!("element {e} outside universe of {universe_size}")));
            }
        }
        let subsets = subsets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        Ok(CoverInstance { universe_size, subsets })
    }

    pub fn from_bitsets(universe_size: usize, sets: &[BitSet]) -> Result<Self> {
        CoverInstance::new(universe_size, sets.iter().map(|s| s.iter().collect()).collect())
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    fn bitsets(&self) -> Vec<BitSet> {
        self.subsets.iter().map(|s| BitSet::from_indices(self.universe_size, s.iter().copied())).collect()
    }

    fn check_feasible(&self) -> Result<()> {
        let mut seen = vec![false; self.universe_size];
        for s in &self.subsets {
            for &e in s {
                seen[e] = true;
            }
        }
        match seen.iter().position(|&b| !b) {
            Some(e) => Err(Error::InfeasibleCover(e)),
            None => Ok(()),
        }
    }

    pub fn is_cover(&self, chosen: &[usize]) -> bool {
        let mut seen = vec![false; self.universe_size];
        for &j in chosen {
            for &e in &self.subsets[j] {
                seen[e] = true;
            }
        }
        seen.iter().all(|&b| b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSolution {
    /// Indices into the instance's subsets, ascending.
    pub chosen: Vec<usize>,
    pub optimal: bool,
    /// Proven lower bound on the optimum.
    pub lower_bound: usize,
    pub nodes: u64,
    pub wall_time: Duration,
    pub budget: Option<Duration>,
}

impl CoverSolution {
    pub fn size(&self) -> usize {
        self.chosen.len()
    }
}

/// Largest-remaining-subset greedy with lowest-index tie-break.
pub fn solve_greedy(inst: &CoverInstance) -> Result<CoverSolution> {
    let start = Instant::now();
    inst.check_feasible()?;
    let sets = inst.bitsets();
    let mut uncovered = BitSet::full(inst.universe_size);
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let mut best = (0, usize::MAX);
        for (j, s) in sets.iter().enumerate() {
            let gain = s.and_count(&uncovered);
            if gain > best.0 {
                best = (gain, j);
            }
        }
        chosen.push(best.1);
        uncovered.difference_with(&sets[best.1]);
    }
    chosen.sort_unstable();
    Ok(CoverSolution {
        chosen,
        optimal: false,
        lower_bound: usize::from(inst.universe_size > 0),
        nodes: 0,
        wall_time: start.elapsed(),
        budget: None,
    })
}

/// Exact minimum cover; on budget exhaustion the incumbent is returned with `optimal = false`.
pub fn solve_exact(inst: &CoverInstance, budget: Duration) -> Result<CoverSolution> {
    let start = Instant::now();
    inst.check_feasible()?;
    if inst.universe_size == 0 {
        return Ok(CoverSolution {
            chosen: Vec::new(),
            optimal: true,
            lower_bound: 0,
            nodes: 0,
            wall_time: start.elapsed(),
            budget: Some(budget),
        });
    }
    let greedy = solve_greedy(inst)?;
    let sets = inst.bitsets();
    let keep = undominated(&sets);
    let mut bb = BranchAndBound::new(inst.universe_size, keep.iter().map(|&j| sets[j].clone()).collect(), start, budget);
    bb.best = greedy.chosen.iter().map(|&j| map_to_kept(&sets, &keep, j)).collect();
    bb.best.sort_unstable();
    bb.best.dedup();
    let complete = bb.run();
    let mut chosen: Vec<usize> = bb.best.iter().map(|&t| keep[t]).collect();
    chosen.sort_unstable();
    debug_assert!(inst.is_cover(&chosen));
    let lower_bound = if complete { chosen.len() } else { bb.root_bound.min(chosen.len()) };
    Ok(CoverSolution {
        chosen,
        optimal: complete,
        lower_bound,
        nodes: bb.nodes,
        wall_time: start.elapsed(),
        budget: Some(budget),
    })
}

/// Indices of subsets that are neither empty nor contained in another subset
/// (ties between equal subsets keep the lowest index).
fn undominated(sets: &[BitSet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sets.len()).filter(|&j| !sets[j].is_empty()).collect();
    let counts: Vec<usize> = sets.iter().map(BitSet::count).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for j in order {
        if !kept.iter().any(|&k| sets[j].is_subset(&sets[k])) {
            kept.push(j);
        }
    }
    kept.sort_unstable();
    kept
}

fn map_to_kept(sets: &[BitSet], keep: &[usize], j: usize) -> usize {
    keep.iter()
        .position(|&k| k == j)
        .or_else(|| keep.iter().position(|&k| sets[j].is_subset(&sets[k])))
        .expect("dominated subset has a dominator")
}

struct BranchAndBound {
    n_elems: usize,
    cols: Vec<BitSet>,
    elem_cols: Vec<Vec<usize>>,
    best: Vec<usize>,
    nodes: u64,
    root_bound: usize,
    start: Instant,
    budget: Duration,
    timed_out: bool,
}

struct Relaxation {
    bound: f64,
    u: Vec<f64>,
    rc: Vec<f64>,
}

impl BranchAndBound {
    fn new(n_elems: usize, cols: Vec<BitSet>, start: Instant, budget: Duration) -> Self {
        let mut elem_cols = vec![Vec::new(); n_elems];
        for (j, c) in cols.iter().enumerate() {
            for e in c.iter() {
                elem_cols[e].push(j);
            }
        }
        BranchAndBound {
            n_elems,
            cols,
            elem_cols,
            best: Vec::new(),
            nodes: 0,
            root_bound: 0,
            start,
            budget,
            timed_out: false,
        }
    }

    fn run(&mut self) -> bool {
        let covered = BitSet::new(self.n_elems);
        let allowed = BitSet::full(self.cols.len());
        let u: Vec<f64> = (0..self.n_elems).map(|e| 1.0 / self.elem_cols[e].len() as f64).collect();
        let mut chosen = Vec::new();
        self.node(&mut chosen, &covered, allowed, u, true);
        !self.timed_out
    }

    /// Subgradient optimization of the Lagrangian dual on the residual instance.
    fn relax(&mut self, uncovered: &[usize], allowed: &BitSet, mut u: Vec<f64>, iters: usize, target: f64, depth: usize) -> Relaxation {
        let mut best = Relaxation { bound: f64::NEG_INFINITY, u: u.clone(), rc: Vec::new() };
        let mut lambda = 2.0;
        let mut stall = 0;
        let mut rc = vec![0.0; self.cols.len()];
        let mut g = vec![0.0; self.n_elems];
        for it in 0..iters {
            for j in allowed.iter() {
                rc[j] = 1.0;
            }
            let mut bound = 0.0;
            for &e in uncovered {
                bound += u[e];
                for &j in &self.elem_cols[e] {
                    rc[j] -= u[e];
                }
            }
            for j in allowed.iter() {
                if rc[j] < 0.0 {
                    bound += rc[j];
                }
            }
            if bound > best.bound + 1e-9 {
                best.bound = bound;
                best.u.clone_from(&u);
                best.rc = allowed.iter().map(|j| rc[j]).collect();
                stall = 0;
            } else {
                stall += 1;
                if stall >= 5 {
                    lambda *= 0.5;
                    stall = 0;
                }
            }
            if (bound - EPS).ceil() >= target || it + 1 == iters || lambda < 1e-4 {
                break;
            }
            if depth == 0 && it % 10 == 9 {
                self.lagrangian_heuristic(uncovered, allowed, &rc);
            }
            let mut norm = 0.0;
            for &e in uncovered {
                let cover = self.elem_cols[e].iter().filter(|&&j| allowed.contains(j) && rc[j] < 0.0).count();
                g[e] = 1.0 - cover as f64;
                norm += g[e] * g[e];
            }
            if norm == 0.0 {
                break;
            }
            let step = lambda * (target - bound).max(0.05) / norm;
            for &e in uncovered {
                u[e] = (u[e] + step * g[e]).max(0.0);
            }
        }
        best
    }

    /// Greedy completion on Lagrangian reduced costs, used to improve the incumbent at the root.
    fn lagrangian_heuristic(&mut self, uncovered: &[usize], allowed: &BitSet, rc: &[f64]) {
        let mut left = BitSet::from_indices(self.n_elems, uncovered.iter().copied());
        let mut pick = Vec::new();
        while !left.is_empty() {
            let mut best: Option<(f64, usize)> = None;
            for j in allowed.iter() {
                let gain = self.cols[j].and_count(&left);
                if gain == 0 {
                    continue;
                }
                let score = (rc[j].max(0.0) + 1e-3) / gain as f64;
                if best.is_none_or(|(s, _)| score < s) {
                    best = Some((score, j));
                }
            }
            let Some((_, j)) = best else { return };
            pick.push(j);
            left.difference_with(&self.cols[j]);
        }
        // Only called at the root, where `uncovered` is the whole universe.
        let pick = prune_redundant(&self.cols, pick, self.n_elems);
        if pick.len() < self.best.len() {
            self.best = pick;
        }
    }

    fn node(&mut self, chosen: &mut Vec<usize>, covered: &BitSet, mut allowed: BitSet, u: Vec<f64>, root: bool) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(64) && self.start.elapsed() > self.budget {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        let uncovered: Vec<usize> = (0..self.n_elems).filter(|&e| !covered.contains(e)).collect();
        if uncovered.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
                self.best.sort_unstable();
            }
            return;
        }
        if chosen.len() + 1 >= self.best.len() {
            return;
        }
        // Columns that add nothing are irrelevant below this node.
        let useful: Vec<usize> = allowed.iter().filter(|&j| !self.cols[j].is_subset(covered)).collect();
        allowed = BitSet::from_indices(self.cols.len(), useful);

        let target = (self.best.len() - chosen.len()) as f64;
        let iters = if root { 400 } else { 40 };
        let rel = self.relax(&uncovered, &allowed, u, iters, target, chosen.len());
        let lb = (rel.bound - EPS).ceil().max(1.0) as usize;
        if root {
            self.root_bound = lb;
        }
        if chosen.len() + lb >= self.best.len() {
            return;
        }
        // Reduced-cost fixing: forcing column j raises the bound by rc_j.
        let slack = (self.best.len() - chosen.len()) as f64 - 1.0;
        let mut rc_of = vec![0.0; self.cols.len()];
        for (t, j) in allowed.clone().iter().enumerate() {
            rc_of[j] = rel.rc[t];
            if rel.rc[t] > 0.0 && rel.bound + rel.rc[t] > slack + EPS {
                allowed.remove(j);
            }
        }

        let Some(&e) = uncovered.iter().min_by_key(|&&e| {
            self.elem_cols[e].iter().filter(|&&j| allowed.contains(j)).count()
        }) else {
            return;
        };
        let mut branch: Vec<usize> = self.elem_cols[e].iter().copied().filter(|&j| allowed.contains(j)).collect();
        branch.sort_by(|&a, &b| {
            rc_of[a].partial_cmp(&rc_of[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        for j in branch {
            if chosen.len() + 1 >= self.best.len() {
                break;
            }
            let mut cov = covered.clone();
            cov.union_with(&self.cols[j]);
            chosen.push(j);
            self.node(chosen, &cov, allowed.clone(), rel.u.clone(), false);
            chosen.pop();
            allowed.remove(j);
            if self.timed_out {
                return;
            }
        }
    }
}

fn prune_redundant(cols: &[BitSet], mut pick: Vec<usize>, n: usize) -> Vec<usize> {
    let mut i = pick.len();
    while i > 0 {
        i -= 1;
        let mut cov = BitSet::new(n);
        for (t, &j) in pick.iter().enumerate() {
            if t != i {
                cov.union_with(&cols[j]);
            }
        }
        if cov.count() == n {
            pick.remove(i);
        }
    }
    pick.sort_unstable();
    pick
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn figure_instance() -> CoverInstance {
        // Elements 1..7 shifted to 0..6.
        let sets = vec![vec![1, 2], vec![1, 2, 3], vec![2, 3, 5], vec![4, 5], vec![6], vec![6, 7]];
        CoverInstance::new(7, sets.into_iter().map(|s| s.into_iter().map(|e| e - 1).collect()).collect()).unwrap()
    }

    pub(crate) fn brute_force(inst: &CoverInstance) -> Option<usize> {
        let n = inst.subsets().len();
        (0u32..1 << n)
            .filter(|&m| {
                let chosen: Vec<usize> = (0..n).filter(|&j| m >> j & 1 == 1).collect();
                inst.is_cover(&chosen)
            })
            .map(|m| m.count_ones() as usize)
            .min()
    }

    #[test]
    fn figure_instance_exact() {
        let inst = figure_instance();
        let s = solve_exact(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(s.chosen, vec![1, 3, 5]);
        assert!(s.optimal);
        let g = solve_greedy(&inst).unwrap();
        assert!(inst.is_cover(&g.chosen));
        assert!(g.size() >= 3);
    }

    #[test]
    fn trivial_instances() {
        let empty = CoverInstance::new(0, vec![]).unwrap();
        assert!(solve_greedy(&empty).unwrap().chosen.is_empty());
        assert!(solve_exact(&empty, DEFAULT_BUDGET).unwrap().chosen.is_empty());
        let singles = CoverInstance::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(solve_greedy(&singles).unwrap().chosen, vec![0, 1, 2]);
        let whole = CoverInstance::new(4, vec![vec![0, 1], vec![0, 1, 2, 3], vec![3]]).unwrap();
        assert_eq!(solve_exact(&whole, DEFAULT_BUDGET).unwrap().chosen, vec![1]);
        let gap = CoverInstance::new(3, vec![vec![0, 1]]).unwrap();
        assert!(matches!(solve_exact(&gap, DEFAULT_BUDGET), Err(Error::InfeasibleCover(2))));
        assert!(CoverInstance::new(2, vec![vec![2]]).is_err());
    }

    #[test]
    fn random_instances_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let universe = rng.gen_range(1..25);
            let n = rng.gen_range(1..=14);
            let mut subsets: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..universe).filter(|_| rng.gen_bool(0.3)).collect())
                .collect();
            subsets.push((0..universe).filter(|_| rng.gen_bool(0.5)).collect());
            let inst = CoverInstance::new(universe, subsets).unwrap();
            match brute_force(&inst) {
                None => assert!(solve_exact(&inst, DEFAULT_BUDGET).is_err()),
                Some(opt) => {
                    let s = solve_exact(&inst, DEFAULT_BUDGET).unwrap();
                    assert!(s.optimal);
                    assert!(inst.is_cover(&s.chosen));
                    assert_eq!(s.size(), opt);
                    assert!(s.size() <= solve_greedy(&inst).unwrap().size());
                }
            }
        }
    }

    #[test]
    fn dominated_and_duplicate_subsets_dropped() {
        let sets: Vec<BitSet> = [vec![0, 1], vec![0, 1], vec![0], vec![2]]
            .into_iter()
            .map(|s| BitSet::from_indices(3, s))
            .collect();
        assert_eq!(undominated(&sets), vec![0, 3]);
    }
}
