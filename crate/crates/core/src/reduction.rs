//! Reducing an inequality set to a small subset that still cuts off every
//! impossible transition.
//!
//! All methods reduce to set cover over the removal matrix (rows are candidate
//! inequalities, columns are impossible points). They differ in how the
//! candidate rows are produced and how the cover is chosen.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::polytope::{convex_hull_hrep, footprint_bits, InequalitySet, LinearInequality};
use crate::sbox::TransitionSet;
use crate::set_cover::{solve_exact, CoverInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Greedy,
    RandomGreedy,
    Exact,
    SubsetAddition,
    RandomSubset,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::RandomGreedy => "random-greedy",
            Method::Exact => "exact",
            Method::SubsetAddition => "subset-add",
            Method::RandomSubset => "random-subset",
        }
    }

    pub const ALL: [Method; 5] =
        [Method::Greedy, Method::RandomGreedy, Method::Exact, Method::SubsetAddition, Method::RandomSubset];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown reduction method {s:?}")))
    }
}

/// Acceptance rule for a summed inequality in subset addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GoodType {
    /// Removes more impossible points than the weakest summand.
    Type1,
    /// Removes at least as many impossible points as the strongest summand.
    Type2,
}

impl GoodType {
    fn accepts(self, removed: usize, parts: &[usize]) -> bool {
        match self {
            GoodType::Type1 => removed > parts.iter().copied().min().unwrap_or(0),
            GoodType::Type2 => removed >= parts.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub chosen: InequalitySet,
    pub removed_count: usize,
    pub method: Method,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    /// False when an exact cover stopped on its budget.
    pub optimal: bool,
    /// Number of candidate inequalities handed to the final cover.
    pub candidates: usize,
    pub wall_time: Duration,
}

impl ReductionResult {
    pub fn size(&self) -> usize {
        self.chosen.len()
    }

    /// Inequality file with a metadata header. Wall time is left out so that
    /// repeated runs produce identical bytes.
    pub fn to_text(&self) -> String {
        let mut header = vec![("method", self.method.to_string()), ("size", self.size().to_string())];
        if let Some(k) = self.k {
            header.push(("k", k.to_string()));
        }
        if let Some(seed) = self.seed {
            header.push(("seed", seed.to_string()));
        }
        header.push(("optimal", self.optimal.to_string()));
        header.push(("candidates", self.candidates.to_string()));
        self.chosen.to_text(&header)
    }
}

/// Footprint of each inequality over the impossible points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovalMatrix {
    rows: Vec<BitSet>,
    cols: usize,
}

impl RemovalMatrix {
    pub fn build(ineqs: &InequalitySet, impossible: &[u32]) -> Self {
        RemovalMatrix {
            rows: ineqs.iter().map(|q| footprint_bits(q, impossible)).collect(),
            cols: impossible.len(),
        }
    }

    pub fn rows(&self) -> &[BitSet] {
        &self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].contains(col)
    }

    fn check_coverage(&self) -> Result<()> {
        let mut all = BitSet::new(self.cols);
        for r in &self.rows {
            all.union_with(r);
        }
        match self.cols - all.count() {
            0 => Ok(()),
            gap => Err(Error::CoverageGap(gap)),
        }
    }
}

fn pick(ineqs: &InequalitySet, idx: &[usize]) -> InequalitySet {
    InequalitySet::from_items(ineqs.dim(), idx.iter().map(|&i| ineqs.items()[i].clone()))
        .expect("subset of a valid set")
}

fn greedy_run(m: &RemovalMatrix, rng: Option<&mut ChaCha8Rng>) -> Vec<usize> {
    let mut left = BitSet::full(m.cols);
    let mut chosen = Vec::new();
    let mut rng = rng;
    let mut ties = Vec::new();
    while !left.is_empty() {
        let mut best = 0;
        ties.clear();
        for (i, r) in m.rows.iter().enumerate() {
            let gain = r.and_count(&left);
            if gain > best {
                best = gain;
                ties.clear();
            }
            if gain == best && gain > 0 {
                ties.push(i);
            }
        }
        let i = match rng.as_deref_mut() {
            Some(rng) => ties[rng.gen_range(0..ties.len())],
            None => ties[0],
        };
        chosen.push(i);
        left.difference_with(&m.rows[i]);
    }
    chosen
}

/// Greedy maximum-removal selection with lowest-index tie-break.
pub fn greedy_reduce(hull: &InequalitySet, impossible: &[u32]) -> Result<ReductionResult> {
    let start = Instant::now();
    let m = RemovalMatrix::build(hull, impossible);
    m.check_coverage()?;
    let chosen = greedy_run(&m, None);
    Ok(ReductionResult {
        chosen: pick(hull, &chosen),
        removed_count: impossible.len(),
        method: Method::Greedy,
        seed: None,
        k: None,
        optimal: false,
        candidates: hull.len(),
        wall_time: start.elapsed(),
    })
}

/// Best of `runs` greedy passes with uniformly random tie-breaks.
///
/// Run `i` draws from its own generator seeded by `(seed, i)`, so the result
/// does not depend on how runs are spread over threads.
pub fn greedy_random_reduce(hull: &InequalitySet, impossible: &[u32], runs: usize, seed: u64) -> Result<ReductionResult> {
    if runs == 0 {
        return Err(Error::Invalid("runs must be at least 1".into()));
    }
    let start = Instant::now();
    let m = RemovalMatrix::build(hull, impossible);
    m.check_coverage()?;
    let best = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(seed, run as u64);
            (greedy_run(&m, Some(&mut rng)), run)
        })
        .min_by_key(|(c, run)| (c.len(), *run))
        .map(|(c, _)| c)
        .unwrap_or_default();
    Ok(ReductionResult {
        chosen: pick(hull, &best),
        removed_count: impossible.len(),
        method: Method::RandomGreedy,
        seed: Some(seed),
        k: None,
        optimal: false,
        candidates: hull.len(),
        wall_time: start.elapsed(),
    })
}

/// Every random-greedy run's selection, in run order (same streams as [`greedy_random_reduce`]).
pub fn greedy_random_runs(hull: &InequalitySet, impossible: &[u32], runs: usize, seed: u64) -> Result<Vec<InequalitySet>> {
    let m = RemovalMatrix::build(hull, impossible);
    m.check_coverage()?;
    Ok((0..runs)
        .into_par_iter()
        .map(|run| pick(hull, &greedy_run(&m, Some(&mut run_rng(seed, run as u64)))))
        .collect())
}

fn run_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Minimum subset of `ineqs` covering all impossible points, solved exactly.
pub fn exact_reduce(ineqs: &InequalitySet, impossible: &[u32], budget: Duration) -> Result<ReductionResult> {
    let start = Instant::now();
    let m = RemovalMatrix::build(ineqs, impossible);
    m.check_coverage()?;
    let (chosen, optimal) = exact_cover(&m, budget)?;
    Ok(ReductionResult {
        chosen: pick(ineqs, &chosen),
        removed_count: impossible.len(),
        method: Method::Exact,
        seed: None,
        k: None,
        optimal,
        candidates: ineqs.len(),
        wall_time: start.elapsed(),
    })
}

/// Set cover over distinct footprints; each footprint is represented by its first row.
fn exact_cover(m: &RemovalMatrix, budget: Duration) -> Result<(Vec<usize>, bool)> {
    let mut first: HashMap<&BitSet, usize> = HashMap::new();
    let mut reps = Vec::new();
    for (i, r) in m.rows.iter().enumerate() {
        if !r.is_empty() && !first.contains_key(r) {
            first.insert(r, i);
            reps.push(i);
        }
    }
    let sets: Vec<BitSet> = reps.iter().map(|&i| m.rows[i].clone()).collect();
    let inst = CoverInstance::from_bitsets(m.cols, &sets)?;
    let sol = solve_exact(&inst, budget)?;
    Ok((sol.chosen.iter().map(|&t| reps[t]).collect(), sol.optimal))
}

/// Calls `f` on every k-combination of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Summed inequalities kept by subset addition, sorted canonically.
pub fn subset_addition_candidates(hull: &InequalitySet, points: &TransitionSet, k: usize, good_type: GoodType) -> Result<Vec<LinearInequality>> {
    if !(2..=4).contains(&k) {
        return Err(Error::Invalid(format!("k = {k} outside 2..=4")));
    }
    let impossible = points.impossible();
    // Slack of every facet on every impossible point; a sum removes a point iff its summed slack is negative.
    let slack: Vec<Vec<i32>> =
        hull.iter().map(|q| impossible.iter().map(|&c| q.eval_code(c) as i32).collect()).collect();
    let removed: Vec<usize> = slack.iter().map(|s| s.iter().filter(|&&v| v < 0).count()).collect();
    let origin = points.join(0, 0);
    let per_point: Vec<Vec<LinearInequality>> = points
        .possible()
        .par_iter()
        .filter(|&&p| p != origin)
        .map(|&p| {
            let through: Vec<usize> = (0..hull.len()).filter(|&i| hull.items()[i].eval_code(p) == 0).collect();
            let mut found = HashSet::new();
            let mut acc = vec![0i32; impossible.len()];
            let mut parts = vec![0usize; k];
            for_each_combination(through.len(), k, |c| {
                acc.copy_from_slice(&slack[through[c[0]]]);
                for &t in &c[1..] {
                    for (a, &s) in acc.iter_mut().zip(&slack[through[t]]) {
                        *a += s;
                    }
                }
                let count = acc.iter().filter(|&&v| v < 0).count();
                for (slot, &t) in parts.iter_mut().zip(c) {
                    *slot = removed[through[t]];
                }
                if good_type.accepts(count, &parts) {
                    let h = LinearInequality::sum(c.iter().map(|&t| &hull.items()[through[t]])).expect("k >= 2");
                    found.insert(h);
                }
            });
            found.into_iter().collect()
        })
        .collect();
    let mut all: Vec<LinearInequality> = per_point.into_iter().flatten().collect();
    all.sort();
    all.dedup();
    Ok(all)
}

/// Hull facets followed by the good k-sums, then an exact minimum cover.
pub fn subset_addition_reduce(points: &TransitionSet, k: usize, good_type: GoodType, budget: Duration) -> Result<ReductionResult> {
    let start = Instant::now();
    let hull = convex_hull_hrep(points.possible(), points.dim())?.inequalities();
    let cands = subset_addition_candidates(&hull, points, k, good_type)?;
    let mut result = cover_extended(&hull, cands, points, budget)?;
    result.method = Method::SubsetAddition;
    result.k = Some(k);
    result.wall_time = start.elapsed();
    Ok(result)
}

fn cover_extended(hull: &InequalitySet, extra: Vec<LinearInequality>, points: &TransitionSet, budget: Duration) -> Result<ReductionResult> {
    let all = InequalitySet::from_items(hull.dim(), hull.iter().cloned().chain(extra))?;
    exact_reduce(&all, points.impossible(), budget)
}

/// Baseline: one random k-subset of incident facets per possible point, kept
/// only when its sum removes an impossible point none of its summands remove.
pub fn random_subset_reduce(points: &TransitionSet, k: usize, seed: u64, budget: Duration) -> Result<ReductionResult> {
    if !(2..=4).contains(&k) {
        return Err(Error::Invalid(format!("k = {k} outside 2..=4")));
    }
    let start = Instant::now();
    let hull = convex_hull_hrep(points.possible(), points.dim())?.inequalities();
    let impossible = points.impossible();
    let foot: Vec<BitSet> = hull.iter().map(|q| footprint_bits(q, impossible)).collect();
    let origin = points.join(0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extra = Vec::new();
    for &p in points.possible().iter().filter(|&&p| p != origin) {
        let through: Vec<usize> = (0..hull.len()).filter(|&i| hull.items()[i].eval_code(p) == 0).collect();
        if through.len() < k {
            continue;
        }
        let subset: Vec<usize> = through.choose_multiple(&mut rng, k).copied().collect();
        let h = LinearInequality::sum(subset.iter().map(|&i| &hull.items()[i])).expect("k >= 2");
        let mut union = BitSet::new(impossible.len());
        for &i in &subset {
            union.union_with(&foot[i]);
        }
        if !footprint_bits(&h, impossible).is_subset(&union) {
            extra.push(h);
        }
    }
    let mut result = cover_extended(&hull, extra, points, budget)?;
    result.method = Method::RandomSubset;
    result.k = Some(k);
    result.seed = Some(seed);
    result.wall_time = start.elapsed();
    Ok(result)
}

/// Inequality violated by exactly the point `pattern`:
/// `sum((-1)^p_i * v_i) >= 1 - |p|`.
pub fn conditional_inequality(pattern: &[u8]) -> LinearInequality {
    let coeffs: Vec<i64> = pattern.iter().map(|&b| if b & 1 == 1 { -1 } else { 1 }).collect();
    let weight = pattern.iter().filter(|&&b| b & 1 == 1).count() as i64;
    LinearInequality::new(coeffs, 1 - weight)
}

/// True iff the 0/1 solutions of `chosen` are exactly the possible transitions.
pub fn verify_exact_model(chosen: &InequalitySet, points: &TransitionSet) -> bool {
    chosen.dim() == points.dim()
        && (0..1u32 << points.dim()).all(|c| chosen.satisfied_by(c) == points.is_possible(c))
}

/// Dispatches on [`Method`] starting from the raw hull.
pub struct ReduceOptions {
    pub method: Method,
    pub k: usize,
    pub good_type: GoodType,
    pub runs: usize,
    pub seed: u64,
    pub budget: Duration,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            method: Method::Greedy,
            k: 3,
            good_type: GoodType::Type1,
            runs: 500,
            seed: 0,
            budget: crate::set_cover::DEFAULT_BUDGET,
        }
    }
}

pub fn reduce(points: &TransitionSet, opts: &ReduceOptions) -> Result<ReductionResult> {
    let hull = || convex_hull_hrep(points.possible(), points.dim()).map(|h| h.inequalities());
    let start = Instant::now();
    let mut r = match opts.method {
        Method::Greedy => greedy_reduce(&hull()?, points.impossible())?,
        Method::RandomGreedy => greedy_random_reduce(&hull()?, points.impossible(), opts.runs, opts.seed)?,
        Method::Exact => exact_reduce(&hull()?, points.impossible(), opts.budget)?,
        Method::SubsetAddition => subset_addition_reduce(points, opts.k, opts.good_type, opts.budget)?,
        Method::RandomSubset => random_subset_reduce(points, opts.k, opts.seed, opts.budget)?,
    };
    r.wall_time = start.elapsed();
    Ok(r)
}
