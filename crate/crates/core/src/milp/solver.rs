//! Exact solver for models with binary and bounded-integer variables.
//!
//! Integer variables are expanded into binary digits, so every constraint
//! becomes a pseudo-Boolean constraint `sum(c_i * l_i) >= d` over literals with
//! positive coefficients. The search is depth-first with unit propagation over
//! those constraints (slack counters), clauses (two watched literals) and the
//! parity constraints implied by equalities. Conflicts are analysed to the
//! first unique implication point and the resulting clause is learned, which
//! is what lets infeasibility proofs finish on cipher-sized models. Branching
//! follows variable activity with saved phases; the first phase tried is 0.
//!
//! Optimization is a descending sequence of feasibility solves: each improved
//! solution tightens the objective constraint until none is left.
//!
//! When the model has an objective, a linear relaxation is also checked during
//! the search (bounded dual simplex in floating point). An infeasible relaxation
//! yields multipliers that are rounded to integers; the combined constraint is
//! re-evaluated exactly and only a genuinely violated one becomes a learned
//! clause, so the relaxation can prune but never cut off a solution.
//!
//! Before search, equalities and XOR patterns recovered from clauses are
//! Gauss-Jordan eliminated at the root. Any variable the linear part fixes on
//! its own is assigned immediately.
//!
//! Every assignment returned is re-checked against the original model with
//! exact integer arithmetic.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use super::model::{MilpModel, Sense, VarId, VarKind};
use super::simplex::{DualSimplex, LpOutcome};
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(1800);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Optimal objective proven, or a feasible point found when there is no objective.
    Optimal,
    /// Budget ran out while holding an incumbent.
    FeasibleBudget,
    Infeasible,
    /// Kept for interface completeness; all variables are bounded, so it is never produced.
    UnboundedGuard,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleBudget => "feasible_budget",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::UnboundedGuard => "unbounded_guard",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective_value: Option<i64>,
    /// One value per model variable, indexed by `VarId`.
    pub assignment: Option<Vec<i64>>,
    /// Branching decisions taken.
    pub nodes: u64,
    pub conflicts: u64,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn value(&self, v: VarId) -> Option<i64> {
        self.assignment.as_ref().map(|a| a[v.0])
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub budget: Duration,
    pub conflict_limit: Option<u64>,
    /// Stop at the first feasible point even if an objective is present.
    pub first_solution: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: DEFAULT_BUDGET, conflict_limit: None, first_solution: false }
    }
}

pub fn solve(model: &MilpModel, budget: Duration) -> Result<SolveResult> {
    solve_with(model, &SolveOptions { budget, ..Default::default() })
}

pub fn solve_with(model: &MilpModel, opts: &SolveOptions) -> Result<SolveResult> {
    let mut s = Solver::new(model)?;
    s.optimize(opts)
}

/// `log2` bound on a characteristic's probability: `mdp_log2 * active`.
pub fn probability_bound(mdp_log2: i64, active: i64) -> Result<i64> {
    if active < 0 {
        return Err(Error::Invalid("active count must be non-negative".into()));
    }
    mdp_log2.checked_mul(active).ok_or(Error::Overflow)
}

type Lit = u32;

#[inline]
fn mk_lit(var: u32, negated: bool) -> Lit {
    var << 1 | negated as u32
}

#[inline]
fn lit_var(l: Lit) -> usize {
    (l >> 1) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reason {
    Decision,
    Clause(u32),
    Pb(u32),
    Xor(u32),
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
}

struct Pb {
    /// Sorted by decreasing coefficient.
    lits: Vec<Lit>,
    coefs: Vec<i64>,
    degree: i64,
    total: i64,
    /// Sum of coefficients of non-false literals minus the degree.
    slack: i64,
}

struct Xor {
    vars: Vec<u32>,
    rhs: bool,
    unassigned: u32,
    parity: bool,
}

/// Normalized `sum(c * lit) >= degree` before it is classified.
struct PbRow {
    terms: Vec<(Lit, i64)>,
    degree: i64,
}

enum Encoded {
    Binary(u32),
    /// `lo + sum(2^k * bit_k)`.
    Digits { lo: i64, bits: Vec<u32> },
}

/// A guard literal that activates an at-least-one clause in incremental use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guard(u32);

pub struct Solver {
    n_model_vars: usize,
    encoding: Vec<Encoded>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail_pos: Vec<u32>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    pbs: Vec<Pb>,
    pb_occ: Vec<Vec<(u32, i64)>>,
    xors: Vec<Xor>,
    xor_occ: Vec<Vec<u32>>,
    heap: VarHeap,
    var_inc: f64,
    unsat: bool,
    objective: Option<ObjectiveRow>,
    learnts: usize,
    max_learnts: f64,
    conflicts: u64,
    decisions: u64,
    model: MilpModel,
    lp: LpState,
}

/// Relaxation bookkeeping. Rows are in variable space: `sum(a_j * z_j) >= b`.
#[derive(Default)]
struct LpState {
    enabled: bool,
    rows: Vec<(Vec<(u32, i64)>, i64)>,
    cost: Vec<f64>,
    simplex: Option<DualSimplex>,
    /// Rows in the current simplex, objective row last when present.
    snapshot: Vec<(Vec<(u32, i64)>, i64)>,
    objective_row: Option<usize>,
    vars: usize,
    tick: u64,
    period: u64,
    misses: u32,
    calls: u64,
    cuts: u64,
}

enum LpCheck {
    Nothing,
    Conflict(Reason),
    Unsat,
}

/// Cap on `rows * columns` of the dense relaxation tableau.
const LP_MAX_CELLS: usize = 400_000;

struct ObjectiveRow {
    pb: u32,
    constant: i64,
    /// Sum of objective weights; the objective is `constant + total - (sum of true negated weights)`.
    total: i64,
}

enum Outcome {
    Sat,
    Unsat,
    Unknown,
}

impl Solver {
    pub fn new(model: &MilpModel) -> Result<Self> {
        let mut s = Solver {
            n_model_vars: model.num_vars(),
            encoding: Vec::new(),
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail_pos: Vec::new(),
            phase: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            clauses: Vec::new(),
            watches: Vec::new(),
            pbs: Vec::new(),
            pb_occ: Vec::new(),
            xors: Vec::new(),
            xor_occ: Vec::new(),
            heap: VarHeap::default(),
            var_inc: 1.0,
            unsat: false,
            objective: None,
            learnts: 0,
            max_learnts: 0.0,
            conflicts: 0,
            decisions: 0,
            model: model.clone(),
            lp: LpState { period: 1, ..LpState::default() },
        };
        for v in model.variables() {
            let enc = match v.kind {
                VarKind::Binary => Encoded::Binary(s.new_var()),
                VarKind::Integer { lo, hi } => {
                    let range = (hi - lo) as u64;
                    let nbits = 64 - range.leading_zeros();
                    let bits: Vec<u32> = (0..nbits).map(|_| s.new_var()).collect();
                    Encoded::Digits { lo, bits }
                }
            };
            s.encoding.push(enc);
        }
        // Digit ranges that are not a full power of two need an upper bound.
        for v in model.variables() {
            if let VarKind::Integer { lo, hi } = v.kind {
                let range = hi - lo;
                let id = model.var(&v.name).expect("indexed");
                if let Encoded::Digits { bits, .. } = &s.encoding[id.0] {
                    let full = (1i64 << bits.len()) - 1;
                    if range < full {
                        let terms: Vec<(Lit, i64)> = bits.iter().enumerate().map(|(k, &b)| (mk_lit(b, false), -(1i64 << k))).collect();
                        s.add_row(terms, -range);
                    }
                }
            }
        }
        let mut xor_rows = Vec::new();
        for c in model.constraints() {
            let (terms, constant) = s.expand(&c.terms);
            let rhs = c.rhs - constant;
            match c.sense {
                Sense::Ge => s.add_row(terms, rhs),
                Sense::Le => s.add_row(terms.iter().map(|&(l, a)| (l, -a)).collect(), -rhs),
                Sense::Eq => {
                    s.add_row(terms.clone(), rhs);
                    s.add_row(terms.iter().map(|&(l, a)| (l, -a)).collect(), -rhs);
                    // Odd coefficients determine the parity of the left side.
                    let odd: Vec<u32> = terms.iter().filter(|(_, a)| a % 2 != 0).map(|&(l, _)| lit_var(l) as u32).collect();
                    let parity = rhs.rem_euclid(2) == 1;
                    if odd.len() >= 2 {
                        xor_rows.push((odd.clone(), parity));
                        s.add_xor(odd, parity);
                    } else if odd.is_empty() && parity {
                        s.unsat = true;
                    }
                }
            }
            if s.unsat {
                break;
            }
        }
        if let Some(obj) = model.objective() {
            let (terms, constant) = s.expand(obj);
            // objective <= bound  <=>  sum(w * not l) >= total - (bound - constant), with w > 0.
            let mut lits = Vec::new();
            let mut total = 0;
            let mut constant = constant;
            for (l, a) in terms {
                if a > 0 {
                    lits.push((l ^ 1, a));
                    total += a;
                } else {
                    constant += a;
                    lits.push((l, -a));
                    total += -a;
                }
            }
            let mut cost = vec![0.0; s.assign.len()];
            for &(l, a) in &lits {
                // lits hold the complements of the objective literals.
                let v = lit_var(l);
                cost[v] += if l & 1 == 1 { a as f64 } else { -(a as f64) };
            }
            let pb = s.add_pb_raw(lits, i64::MIN / 4);
            s.objective = Some(ObjectiveRow { pb, constant, total });
            s.lp.cost = cost;
            s.lp.enabled = true;
        }
        s.max_learnts = (s.clauses.len() as f64 / 3.0).max(4000.0);
        if !s.unsat && s.propagate().is_some() {
            s.unsat = true;
        }
        if !s.unsat {
            s.recover_xors(&mut xor_rows);
            s.gauss_units(&xor_rows);
        }
        Ok(s)
    }

    fn new_var(&mut self) -> u32 {
        let v = self.assign.len() as u32;
        self.assign.push(-1);
        self.level.push(0);
        self.reason.push(Reason::Decision);
        self.trail_pos.push(0);
        self.phase.push(false);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.pb_occ.push(Vec::new());
        self.pb_occ.push(Vec::new());
        self.xor_occ.push(Vec::new());
        self.heap.insert(v, &self.activity);
        v
    }

    /// Literal terms and constant offset of a linear expression over model variables.
    fn expand(&self, terms: &[(VarId, i64)]) -> (Vec<(Lit, i64)>, i64) {
        let mut out = Vec::new();
        let mut constant = 0;
        for &(v, a) in terms {
            match &self.encoding[v.0] {
                Encoded::Binary(b) => out.push((mk_lit(*b, false), a)),
                Encoded::Digits { lo, bits } => {
                    constant += a * lo;
                    for (k, &b) in bits.iter().enumerate() {
                        out.push((mk_lit(b, false), a << k));
                    }
                }
            }
        }
        (out, constant)
    }

    /// Adds `sum(a * l) >= rhs` for arbitrary signed `a`.
    fn add_row(&mut self, terms: Vec<(Lit, i64)>, rhs: i64) {
        let mut degree = rhs;
        let mut pos = Vec::with_capacity(terms.len());
        for (l, a) in terms {
            if a > 0 {
                pos.push((l, a));
            } else if a < 0 {
                // a*l = a + |a| * not l
                degree -= a;
                pos.push((l ^ 1, -a));
            }
        }
        self.add_normalized(PbRow { terms: pos, degree });
    }

    fn add_normalized(&mut self, row: PbRow) {
        if self.unsat {
            return;
        }
        let PbRow { mut terms, degree } = row;
        // Fold literals fixed at the root.
        let mut degree = degree;
        terms.retain(|&(l, a)| match self.value(l) {
            1 => {
                degree -= a;
                false
            }
            0 => false,
            _ => true,
        });
        if degree <= 0 {
            return;
        }
        let total: i64 = terms.iter().map(|&(_, a)| a).sum();
        if total < degree {
            self.unsat = true;
            return;
        }
        for t in terms.iter_mut() {
            t.1 = t.1.min(degree);
        }
        if terms.iter().all(|&(_, a)| a >= degree) {
            let lits: Vec<Lit> = terms.into_iter().map(|(l, _)| l).collect();
            self.add_clause(lits, false);
        } else {
            self.add_pb_raw(terms, degree);
        }
    }

    fn add_pb_raw(&mut self, mut terms: Vec<(Lit, i64)>, degree: i64) -> u32 {
        if degree > i64::MIN / 8 {
            self.record_lp_row(&terms, degree);
        }
        terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let idx = self.pbs.len() as u32;
        let total: i64 = terms.iter().map(|&(_, a)| a).sum();
        let mut slack = total - degree;
        for &(l, a) in &terms {
            self.pb_occ[l as usize].push((idx, a));
            if self.value(l) == 0 {
                slack -= a;
            }
        }
        self.pbs.push(Pb {
            lits: terms.iter().map(|&(l, _)| l).collect(),
            coefs: terms.iter().map(|&(_, a)| a).collect(),
            degree,
            total,
            slack,
        });
        if slack < 0 {
            self.unsat = true;
        } else if self.decision_level() == 0 {
            if let Some(_c) = self.check_pb(idx) {
                self.unsat = true;
            }
        }
        idx
    }

    fn add_clause(&mut self, mut lits: Vec<Lit>, learnt: bool) -> Option<u32> {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return None;
        }
        // Only called at the root: literals fixed there are simplified away.
        debug_assert_eq!(self.decision_level(), 0);
        if lits.iter().any(|&l| self.value(l) == 1) {
            return None;
        }
        lits.retain(|&l| self.value(l) != 0);
        match lits.len() {
            0 => {
                self.unsat = true;
                None
            }
            1 => {
                match self.value(lits[0]) {
                    0 => self.unsat = true,
                    -1 => self.enqueue(lits[0], Reason::Decision),
                    _ => {}
                }
                None
            }
            _ => {
                if !learnt {
                    let terms: Vec<(Lit, i64)> = lits.iter().map(|&l| (l, 1)).collect();
                    self.record_lp_row(&terms, 1);
                }
                let cr = self.clauses.len() as u32;
                self.watches[lits[0] as usize].push(cr);
                self.watches[lits[1] as usize].push(cr);
                self.clauses.push(Clause { lits, learnt, deleted: false, lbd: 0 });
                Some(cr)
            }
        }
    }

    /// `sum(c * l) >= degree` over literals, rewritten over variables.
    fn record_lp_row(&mut self, terms: &[(Lit, i64)], degree: i64) {
        let (row, rhs) = var_space(terms.iter().copied(), degree);
        self.lp.rows.push((row, rhs));
    }

    fn add_xor(&mut self, vars: Vec<u32>, rhs: bool) {
        let idx = self.xors.len() as u32;
        let mut x = Xor { vars, rhs, unassigned: 0, parity: false };
        for &v in &x.vars {
            self.xor_occ[v as usize].push(idx);
            match self.assign[v as usize] {
                -1 => x.unassigned += 1,
                a => x.parity ^= a == 1,
            }
        }
        self.xors.push(x);
        if self.check_xor(idx).is_some() {
            self.unsat = true;
        }
    }

    /// Collects XOR constraints hidden in complete families of clauses.
    fn recover_xors(&mut self, rows: &mut Vec<(Vec<u32>, bool)>) {
        let mut groups: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
        for c in &self.clauses {
            let n = c.lits.len();
            if (3..=9).contains(&n) {
                let vars: Vec<u32> = c.lits.iter().map(|&l| lit_var(l) as u32).collect();
                // The clause excludes the assignment making every literal false.
                let mut excluded = 0u32;
                for (i, &l) in c.lits.iter().enumerate() {
                    if l & 1 == 1 {
                        excluded |= 1 << i;
                    }
                }
                groups.entry(vars).or_default().push(excluded);
            }
        }
        let mut keys: Vec<Vec<u32>> = groups.keys().cloned().collect();
        keys.sort();
        for vars in keys {
            let mut ex = groups.remove(&vars).unwrap_or_default();
            ex.sort_unstable();
            ex.dedup();
            let n = vars.len();
            if ex.len() != 1 << (n - 1) {
                continue;
            }
            let p = ex[0].count_ones() % 2;
            if ex.iter().all(|e| e.count_ones() % 2 == p) {
                // Excluded points have parity p, so the XOR of the vars is 1 - p.
                rows.push((vars, p == 0));
            }
        }
    }

    /// Gauss-Jordan elimination of all parity rows at the root; single-variable rows become units.
    fn gauss_units(&mut self, rows: &[(Vec<u32>, bool)]) {
        if rows.is_empty() {
            return;
        }
        for _round in 0..4 {
            let mut col_of: HashMap<u32, usize> = HashMap::new();
            let mut cols: Vec<u32> = Vec::new();
            for (vars, _) in rows {
                for &v in vars {
                    if self.assign[v as usize] < 0 && !col_of.contains_key(&v) {
                        col_of.insert(v, cols.len());
                        cols.push(v);
                    }
                }
            }
            let words = cols.len().div_ceil(64).max(1);
            let mut pivots: Vec<(usize, Vec<u64>, bool)> = Vec::new();
            for (vars, rhs) in rows {
                let mut bits = vec![0u64; words];
                let mut r = *rhs;
                for &v in vars {
                    match self.assign[v as usize] {
                        -1 => {
                            let c = col_of[&v];
                            bits[c / 64] ^= 1 << (c % 64);
                        }
                        a => r ^= a == 1,
                    }
                }
                for (p, row, prhs) in &pivots {
                    if bits[p / 64] >> (p % 64) & 1 == 1 {
                        for (b, &x) in bits.iter_mut().zip(row) {
                            *b ^= x;
                        }
                        r ^= prhs;
                    }
                }
                let Some(p) = first_bit(&bits) else {
                    if r {
                        self.unsat = true;
                        return;
                    }
                    continue;
                };
                for (_, row, prhs) in pivots.iter_mut() {
                    if row[p / 64] >> (p % 64) & 1 == 1 {
                        for (b, &x) in row.iter_mut().zip(&bits) {
                            *b ^= x;
                        }
                        *prhs ^= r;
                    }
                }
                pivots.push((p, bits, r));
            }
            let mut units = Vec::new();
            for (p, row, r) in &pivots {
                if row.iter().map(|w| w.count_ones()).sum::<u32>() == 1 {
                    units.push(mk_lit(cols[*p], !*r));
                }
            }
            if units.is_empty() {
                return;
            }
            for l in units {
                match self.value(l) {
                    0 => {
                        self.unsat = true;
                        return;
                    }
                    -1 => self.enqueue(l, Reason::Decision),
                    _ => {}
                }
            }
            if self.propagate().is_some() {
                self.unsat = true;
                return;
            }
        }
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let a = self.assign[lit_var(l)];
        if a < 0 {
            -1
        } else {
            a ^ (l & 1) as i8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Reason) {
        let v = lit_var(l);
        let val = (l & 1 == 0) as i8;
        self.assign[v] = val;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
        let f = (l ^ 1) as usize;
        for i in 0..self.pb_occ[f].len() {
            let (c, a) = self.pb_occ[f][i];
            self.pbs[c as usize].slack -= a;
        }
        for i in 0..self.xor_occ[v].len() {
            let x = self.xor_occ[v][i] as usize;
            self.xors[x].unassigned -= 1;
            self.xors[x].parity ^= val == 1;
        }
    }

    fn backtrack(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        while self.trail.len() > lim {
            let l = self.trail.pop().expect("non-empty trail");
            let v = lit_var(l);
            let f = (l ^ 1) as usize;
            for i in 0..self.pb_occ[f].len() {
                let (c, a) = self.pb_occ[f][i];
                self.pbs[c as usize].slack += a;
            }
            let val = self.assign[v] == 1;
            for i in 0..self.xor_occ[v].len() {
                let x = self.xor_occ[v][i] as usize;
                self.xors[x].unassigned += 1;
                self.xors[x].parity ^= val;
            }
            self.phase[v] = val;
            self.assign[v] = -1;
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.qhead.min(self.trail.len());
    }

    fn check_pb(&mut self, c: u32) -> Option<Reason> {
        let pb = &self.pbs[c as usize];
        let slack = pb.slack;
        if slack < 0 {
            return Some(Reason::Pb(c));
        }
        if pb.coefs.first().is_none_or(|&a| a <= slack) {
            return None;
        }
        let mut t = 0;
        loop {
            let pb = &self.pbs[c as usize];
            if t >= pb.lits.len() || pb.coefs[t] <= slack {
                return None;
            }
            let l = pb.lits[t];
            if self.value(l) == -1 {
                self.enqueue(l, Reason::Pb(c));
            }
            t += 1;
        }
    }

    fn check_xor(&mut self, x: u32) -> Option<Reason> {
        let xr = &self.xors[x as usize];
        match xr.unassigned {
            0 if xr.parity != xr.rhs => Some(Reason::Xor(x)),
            1 => {
                let v = *xr.vars.iter().find(|&&v| self.assign[v as usize] < 0).expect("one unassigned");
                let want = xr.rhs ^ xr.parity;
                self.enqueue(mk_lit(v, !want), Reason::Xor(x));
                None
            }
            _ => None,
        }
    }

    fn propagate(&mut self) -> Option<Reason> {
        while self.qhead < self.trail.len() {
            let l = self.trail[self.qhead];
            self.qhead += 1;
            let f = l ^ 1;
            if let Some(c) = self.propagate_clauses(f) {
                return Some(c);
            }
            for i in 0..self.pb_occ[f as usize].len() {
                let c = self.pb_occ[f as usize][i].0;
                if let Some(r) = self.check_pb(c) {
                    return Some(r);
                }
            }
            let v = lit_var(l);
            for i in 0..self.xor_occ[v].len() {
                let x = self.xor_occ[v][i];
                if let Some(r) = self.check_xor(x) {
                    return Some(r);
                }
            }
        }
        None
    }

    fn propagate_clauses(&mut self, f: Lit) -> Option<Reason> {
        let mut ws = std::mem::take(&mut self.watches[f as usize]);
        let mut i = 0;
        let mut j = 0;
        let mut conflict = None;
        while i < ws.len() {
            let cr = ws[i];
            i += 1;
            let c = &mut self.clauses[cr as usize];
            if c.deleted {
                continue;
            }
            if c.lits[0] == f {
                c.lits.swap(0, 1);
            }
            let first = c.lits[0];
            let a = self.assign[lit_var(first)];
            if a >= 0 && (a ^ (first & 1) as i8) == 1 {
                ws[j] = cr;
                j += 1;
                continue;
            }
            let mut moved = false;
            for k in 2..c.lits.len() {
                let l = c.lits[k];
                let a = self.assign[lit_var(l)];
                if a < 0 || (a ^ (l & 1) as i8) == 1 {
                    c.lits.swap(1, k);
                    let nl = c.lits[1];
                    self.watches[nl as usize].push(cr);
                    moved = true;
                    break;
                }
            }
            if moved {
                continue;
            }
            ws[j] = cr;
            j += 1;
            match self.value(first) {
                0 => {
                    conflict = Some(Reason::Clause(cr));
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                }
                -1 => self.enqueue(first, Reason::Clause(cr)),
                _ => {}
            }
        }
        ws.truncate(j);
        self.watches[f as usize] = ws;
        conflict
    }

    /// False literals that, together with `p` (if given), form a clause implied by `r`.
    fn explain(&self, r: Reason, p: Option<Lit>, out: &mut Vec<Lit>) {
        out.clear();
        let limit = p.map_or(u32::MAX, |p| self.trail_pos[lit_var(p)]);
        let before = |l: Lit| self.value(l) == 0 && self.trail_pos[lit_var(l)] < limit;
        match r {
            Reason::Decision => {}
            Reason::Clause(cr) => {
                out.extend(self.clauses[cr as usize].lits.iter().copied().filter(|&l| Some(l) != p));
            }
            Reason::Pb(c) => {
                let pb = &self.pbs[c as usize];
                let own = p.map_or(0, |p| {
                    pb.lits.iter().position(|&l| l == p).map_or(0, |t| pb.coefs[t])
                });
                // Need removed weight > total - degree - own.
                let need = pb.total - pb.degree - own;
                let mut acc = 0;
                for (t, &l) in pb.lits.iter().enumerate() {
                    if acc > need {
                        break;
                    }
                    if before(l) {
                        acc += pb.coefs[t];
                        out.push(l);
                    }
                }
                debug_assert!(acc > need);
            }
            Reason::Xor(x) => {
                for &v in &self.xors[x as usize].vars {
                    if p.is_some_and(|p| lit_var(p) == v as usize) {
                        continue;
                    }
                    let a = self.assign[v as usize];
                    debug_assert!(a >= 0);
                    // The false literal for var v under its current value.
                    out.push(mk_lit(v, a == 1));
                }
            }
        }
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.update(v as u32, &self.activity);
    }

    fn analyze(&mut self, conflict: Reason) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut counter = 0;
        let mut idx = self.trail.len();
        let mut buf = Vec::new();
        let mut reason = conflict;
        let mut p: Option<Lit> = None;
        let cur = self.decision_level();
        loop {
            self.explain(reason, p, &mut buf);
            for &q in &buf {
                let v = lit_var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= cur {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[lit_var(self.trail[idx])] {
                    break;
                }
            }
            let pl = self.trail[idx];
            self.seen[lit_var(pl)] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = pl ^ 1;
                break;
            }
            p = Some(pl);
            reason = self.reason[lit_var(pl)];
        }
        // Drop literals whose reasons are already covered by the clause.
        let mut keep = vec![learnt[0]];
        for &q in &learnt[1..] {
            let v = lit_var(q);
            let r = self.reason[v];
            let redundant = r != Reason::Decision && {
                self.explain(r, Some(q ^ 1), &mut buf);
                buf.iter().all(|&x| self.seen[lit_var(x)] || self.level[lit_var(x)] == 0)
            };
            if !redundant {
                keep.push(q);
            }
        }
        for &q in &learnt[1..] {
            self.seen[lit_var(q)] = false;
        }
        let mut learnt = keep;
        let bt = if learnt.len() == 1 {
            0
        } else {
            let (mut best, mut lvl) = (1, self.level[lit_var(learnt[1])]);
            for (i, &q) in learnt.iter().enumerate().skip(2) {
                let l = self.level[lit_var(q)];
                if l > lvl {
                    best = i;
                    lvl = l;
                }
            }
            learnt.swap(1, best);
            lvl
        };
        self.var_inc *= 1.0 / 0.95;
        (learnt, bt)
    }

    fn lbd(&self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|&l| self.level[lit_var(l)]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn reduce_db(&mut self) {
        let mut cand: Vec<(u32, u32)> = Vec::new();
        for (i, c) in self.clauses.iter().enumerate() {
            if !c.learnt || c.deleted || c.lbd <= 2 {
                continue;
            }
            let first = c.lits[0];
            let locked = self.value(first) == 1 && self.reason[lit_var(first)] == Reason::Clause(i as u32);
            if !locked {
                cand.push((c.lbd, i as u32));
            }
        }
        cand.sort_by(|a, b| b.cmp(a));
        for &(_, i) in cand.iter().take(cand.len() / 2) {
            self.clauses[i as usize].deleted = true;
            self.clauses[i as usize].lits = Vec::new();
            self.learnts -= 1;
        }
        self.max_learnts *= 1.1;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assign[v as usize] < 0 {
                return Some(mk_lit(v, !self.phase[v as usize]));
            }
        }
        None
    }

    fn search(&mut self, assumptions: &[Lit], deadline: Instant, conflict_limit: Option<u64>) -> Outcome {
        if self.unsat {
            return Outcome::Unsat;
        }
        let mut restart_idx = 1;
        let mut restart_left = luby(restart_idx) * 100;
        loop {
            let conflict = match self.propagate() {
                Some(c) => Some(c),
                None => match self.lp_check() {
                    LpCheck::Nothing => None,
                    LpCheck::Conflict(c) => Some(c),
                    LpCheck::Unsat => {
                        self.unsat = true;
                        return Outcome::Unsat;
                    }
                },
            };
            if let Some(conflict) = conflict {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return Outcome::Unsat;
                }
                let (learnt, bt) = self.analyze(conflict);
                self.backtrack(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], Reason::Decision);
                } else {
                    let lbd = self.lbd(&learnt);
                    let first = learnt[0];
                    let cr = self.clauses.len() as u32;
                    self.watches[learnt[0] as usize].push(cr);
                    self.watches[learnt[1] as usize].push(cr);
                    self.clauses.push(Clause { lits: learnt, learnt: true, deleted: false, lbd });
                    self.learnts += 1;
                    self.enqueue(first, Reason::Clause(cr));
                }
                restart_left -= 1;
                if self.conflicts.is_multiple_of(256) && Instant::now() > deadline {
                    return Outcome::Unknown;
                }
                if conflict_limit.is_some_and(|n| self.conflicts >= n) {
                    return Outcome::Unknown;
                }
                continue;
            }
            if restart_left <= 0 {
                restart_idx += 1;
                restart_left = luby(restart_idx) * 100;
                self.backtrack(0);
                continue;
            }
            if self.learnts as f64 > self.max_learnts {
                self.reduce_db();
            }
            let lvl = self.decision_level() as usize;
            let next = if lvl < assumptions.len() {
                let a = assumptions[lvl];
                match self.value(a) {
                    0 => return Outcome::Unsat,
                    1 => {
                        self.trail_lim.push(self.trail.len());
                        continue;
                    }
                    _ => a,
                }
            } else {
                self.decisions += 1;
                if self.decisions.is_multiple_of(1024) && Instant::now() > deadline {
                    return Outcome::Unknown;
                }
                match self.pick_branch() {
                    Some(l) => l,
                    None => return Outcome::Sat,
                }
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, Reason::Decision);
        }
    }

    fn extract(&self) -> Vec<i64> {
        self.encoding
            .iter()
            .map(|e| match e {
                Encoded::Binary(b) => i64::from(self.assign[*b as usize] == 1),
                Encoded::Digits { lo, bits } => {
                    lo + bits
                        .iter()
                        .enumerate()
                        .map(|(k, &b)| if self.assign[b as usize] == 1 { 1i64 << k } else { 0 })
                        .sum::<i64>()
                }
            })
            .collect()
    }

    fn checked_assignment(&self) -> Result<Vec<i64>> {
        let values = self.extract();
        debug_assert_eq!(values.len(), self.n_model_vars);
        match self.model.first_violation(&values) {
            None => Ok(values),
            Some(msg) => Err(Error::Model(format!("internal: solver assignment fails re-check: {msg}"))),
        }
    }

    /// Tightens the objective row to `objective <= bound`; false if that is trivially impossible.
    fn restrict_objective(&mut self, bound: i64) -> bool {
        let Some(obj) = &self.objective else { return true };
        let pb = obj.pb;
        let new_degree = obj.total - (bound - obj.constant);
        self.backtrack(0);
        let p = &mut self.pbs[pb as usize];
        let delta = new_degree - p.degree;
        p.degree = new_degree;
        p.slack -= delta;
        match (self.lp.objective_row, self.lp.simplex.as_mut()) {
            (Some(i), Some(lp)) => {
                let rhs = self.lp.snapshot[i].1 + delta;
                self.lp.snapshot[i].1 = rhs;
                lp.set_rhs(i, rhs as f64);
            }
            _ => self.lp.simplex = None,
        }
        if p.slack < 0 {
            self.unsat = true;
            return false;
        }
        if self.check_pb(pb).is_some() || self.propagate().is_some() {
            self.unsat = true;
            return false;
        }
        true
    }

    /// Full solve: feasibility, or minimization when the model has an objective.
    pub fn optimize(&mut self, opts: &SolveOptions) -> Result<SolveResult> {
        let start = Instant::now();
        let deadline = start + opts.budget;
        let mut best: Option<(i64, Vec<i64>)> = None;
        let status = loop {
            match self.search(&[], deadline, opts.conflict_limit) {
                Outcome::Sat => {
                    let values = self.checked_assignment()?;
                    let obj = self.model.objective_value(&values);
                    match obj {
                        Some(v) if !opts.first_solution => {
                            best = Some((v, values));
                            if !self.restrict_objective(v - 1) {
                                break SolveStatus::Optimal;
                            }
                        }
                        _ => {
                            best = Some((obj.unwrap_or(0), values));
                            break SolveStatus::Optimal;
                        }
                    }
                }
                Outcome::Unsat => {
                    break if best.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible };
                }
                Outcome::Unknown => {
                    if best.is_none() {
                        return Err(Error::Indeterminate { nodes: self.decisions });
                    }
                    break SolveStatus::FeasibleBudget;
                }
            }
        };
        let has_obj = self.model.objective().is_some();
        Ok(SolveResult {
            status,
            objective_value: best.as_ref().filter(|_| has_obj).map(|(v, _)| *v),
            assignment: best.map(|(_, a)| a),
            nodes: self.decisions,
            conflicts: self.conflicts,
            wall_time: start.elapsed(),
        })
    }

    fn build_lp(&mut self) {
        let n = self.assign.len();
        let mut snapshot = self.lp.rows.clone();
        self.lp.objective_row = None;
        if let Some(obj) = &self.objective {
            let pb = &self.pbs[obj.pb as usize];
            if pb.degree > i64::MIN / 8 {
                let terms = pb.lits.iter().copied().zip(pb.coefs.iter().copied());
                self.lp.objective_row = Some(snapshot.len());
                snapshot.push(var_space(terms, pb.degree));
            }
        }
        if snapshot.len() * (snapshot.len() + n) > LP_MAX_CELLS {
            self.lp.enabled = false;
            return;
        }
        let rows = snapshot.iter().map(|(r, _)| r.iter().map(|&(v, a)| (v as usize, a as f64)).collect()).collect();
        let b = snapshot.iter().map(|&(_, b)| b as f64).collect();
        let mut cost = self.lp.cost.clone();
        cost.resize(n, 0.0);
        self.lp.simplex = Some(DualSimplex::new(n, rows, b, cost));
        self.lp.snapshot = snapshot;
        self.lp.vars = n;
    }

    /// Runs the relaxation at the current node; a violated certificate becomes a conflict clause.
    fn lp_check(&mut self) -> LpCheck {
        if !self.lp.enabled {
            return LpCheck::Nothing;
        }
        self.lp.tick += 1;
        if !self.lp.tick.is_multiple_of(self.lp.period) {
            return LpCheck::Nothing;
        }
        if self.lp.simplex.is_none() || self.lp.vars != self.assign.len() {
            self.build_lp();
            if !self.lp.enabled {
                return LpCheck::Nothing;
            }
        }
        self.lp.calls += 1;
        let lp = self.lp.simplex.as_mut().expect("built");
        for (v, &a) in self.assign.iter().enumerate() {
            match a {
                -1 => lp.set_bounds(v, 0.0, 1.0),
                a => lp.set_bounds(v, f64::from(a), f64::from(a)),
            }
        }
        let (m, _) = lp.size();
        let outcome = lp.solve((4 * m + 100).min(2000));
        let clause = match outcome {
            LpOutcome::Infeasible(y) => [1.0, -1.0].iter().find_map(|&sign| self.lp_certificate(&y, sign)),
            LpOutcome::Feasible | LpOutcome::Unknown => None,
        };
        let Some(mut lits) = clause else {
            self.lp.misses += 1;
            if self.lp.misses >= 16 {
                self.lp.misses = 0;
                self.lp.period = (self.lp.period * 2).min(64);
            }
            return LpCheck::Nothing;
        };
        self.lp.cuts += 1;
        self.lp.misses = 0;
        self.lp.period = (self.lp.period / 2).max(1);
        if lits.is_empty() {
            return LpCheck::Unsat;
        }
        lits.sort_by_key(|&l| std::cmp::Reverse(self.level[lit_var(l)]));
        let top = self.level[lit_var(lits[0])];
        self.backtrack(top);
        let lbd = self.lbd(&lits);
        let cr = self.clauses.len() as u32;
        if lits.len() >= 2 {
            self.watches[lits[0] as usize].push(cr);
            self.watches[lits[1] as usize].push(cr);
        }
        self.clauses.push(Clause { lits, learnt: true, deleted: false, lbd });
        self.learnts += 1;
        LpCheck::Conflict(Reason::Clause(cr))
    }

    /// Integer combination of the relaxation rows with multipliers `max(0, sign * y)`.
    /// Returns the false literals of a weakened, still violated combination.
    fn lp_certificate(&self, y: &[f64], sign: f64) -> Option<Vec<Lit>> {
        let top = y.iter().map(|&v| sign * v).fold(0.0, f64::max);
        if top <= 0.0 {
            return None;
        }
        let n = self.assign.len();
        let mut coef = vec![0i128; n];
        let mut rhs: i128 = 0;
        for (i, &yi) in y.iter().enumerate() {
            let lambda = ((sign * yi).max(0.0) / top * f64::from(1u32 << 24)).round() as i128;
            if lambda == 0 {
                continue;
            }
            let (row, b) = &self.lp.snapshot[i];
            for &(v, a) in row {
                coef[v as usize] += lambda * i128::from(a);
            }
            rhs += lambda * i128::from(*b);
        }
        // Literal form: weight of each literal and the degree, then weaken away non-false ones.
        let mut degree = rhs;
        let mut falses: Vec<(i128, Lit)> = Vec::new();
        let mut reachable: i128 = 0;
        for (v, &c) in coef.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let lit = if c > 0 { mk_lit(v as u32, false) } else { mk_lit(v as u32, true) };
            if c < 0 {
                degree -= c;
            }
            let w = c.abs();
            match self.value(lit) {
                0 => {
                    if self.level[v] > 0 {
                        falses.push((w, lit));
                    }
                }
                _ => reachable += w,
            }
        }
        let mut deficit = degree - reachable;
        if deficit <= 0 {
            return None;
        }
        falses.sort_unstable();
        let mut keep = Vec::new();
        for (w, l) in falses {
            if w < deficit {
                deficit -= w;
            } else {
                keep.push(l);
            }
        }
        Some(keep)
    }

    fn model_lit(&self, v: VarId, value: bool) -> Result<Lit> {
        match self.encoding.get(v.0) {
            Some(Encoded::Binary(b)) => Ok(mk_lit(*b, !value)),
            Some(_) => Err(Error::Model(format!("{} is not binary", self.model.variable(v).name))),
            None => Err(Error::Model(format!("unknown variable index {}", v.0))),
        }
    }

    /// Adds the clause `guard -> (v_1 or .. or v_n)` over binary model variables.
    pub fn add_guarded_at_least_one(&mut self, vars: &[VarId]) -> Result<Guard> {
        self.backtrack(0);
        let g = self.new_var();
        let mut lits = vec![mk_lit(g, true)];
        for &v in vars {
            lits.push(self.model_lit(v, true)?);
        }
        self.add_clause(lits, false);
        Ok(Guard(g))
    }

    /// Feasibility under temporary fixings and active guards. Learned clauses are kept between calls.
    pub fn solve_assuming(&mut self, fixed: &[(VarId, bool)], guards: &[Guard], budget: Duration) -> Result<SolveResult> {
        let start = Instant::now();
        let mut assumptions = Vec::with_capacity(fixed.len() + guards.len());
        for &(v, b) in fixed {
            assumptions.push(self.model_lit(v, b)?);
        }
        assumptions.extend(guards.iter().map(|g| mk_lit(g.0, false)));
        self.backtrack(0);
        let d0 = self.decisions;
        let c0 = self.conflicts;
        let outcome = self.search(&assumptions, start + budget, None);
        let (status, assignment) = match outcome {
            Outcome::Sat => (SolveStatus::Optimal, Some(self.checked_assignment()?)),
            Outcome::Unsat => (SolveStatus::Infeasible, None),
            Outcome::Unknown => return Err(Error::Indeterminate { nodes: self.decisions - d0 }),
        };
        self.backtrack(0);
        Ok(SolveResult {
            status,
            objective_value: None,
            assignment,
            nodes: self.decisions - d0,
            conflicts: self.conflicts - c0,
            wall_time: start.elapsed(),
        })
    }
}

/// Rewrites `sum(c * l) >= degree` over literals as `(terms over variables, rhs)`.
fn var_space(terms: impl Iterator<Item = (Lit, i64)>, degree: i64) -> (Vec<(u32, i64)>, i64) {
    let mut rhs = degree;
    let mut out = Vec::new();
    for (l, c) in terms {
        if l & 1 == 1 {
            // c * (1 - z)
            rhs -= c;
            out.push((lit_var(l) as u32, -c));
        } else {
            out.push((lit_var(l) as u32, c));
        }
    }
    (out, rhs)
}

fn first_bit(bits: &[u64]) -> Option<usize> {
    bits.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
}

fn luby(mut i: u64) -> i64 {
    // Position i (1-based) of the sequence 1 1 2 1 1 2 4 ...
    loop {
        let mut k = 1;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

/// Max-heap of variables keyed by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.pos.len() <= v as usize {
            self.pos.resize(v as usize + 1, -1);
        }
        if self.pos[v as usize] >= 0 {
            return;
        }
        self.pos[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn update(&mut self, v: u32, act: &[f64]) {
        if let Some(&p) = self.pos.get(v as usize) {
            if p >= 0 {
                self.up(p as usize, act);
            }
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn better(a: u32, b: u32, act: &[f64]) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(self.heap[i], self.heap[parent], act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut best = i;
            if l < self.heap.len() && Self::better(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && Self::better(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                return;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = i as i32;
        self.pos[self.heap[j] as usize] = j as i32;
    }
}
