//! Differential and impossible-differential search over unrolled models.
//!
//! Impossible-differential tasks fix one non-zero input word and one non-zero
//! output word (all other words zero) and ask whether the model is feasible.
//! Tasks are split into contiguous chunks; each chunk runs on its own
//! incremental solver so clauses learned on one pattern help the next.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linear::XorStyle;
use crate::milp::{solve, Guard, MilpModel, Sense, SolveStatus, Solver, VarId};
use crate::modelgen::{generate_model, ModelOptions, TrailResult, UnrolledModel};
use crate::spec::{CipherSpec, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attack {
    Differential,
    Impossible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Granularity {
    /// Any non-zero input word against any non-zero output word.
    Fuzzy,
    /// The same non-zero value on the input and the output word.
    Equal,
    /// Every pair of non-zero values.
    Targeted,
}

impl Attack {
    pub fn as_str(self) -> &'static str {
        match self {
            Attack::Differential => "differential",
            Attack::Impossible => "impossible",
        }
    }
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Fuzzy => "fuzzy",
            Granularity::Equal => "equal",
            Granularity::Targeted => "targeted",
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attack {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "differential" => Ok(Attack::Differential),
            "impossible" => Ok(Attack::Impossible),
            _ => Err(Error::Invalid(format!("unknown attack {s:?}"))),
        }
    }
}

impl FromStr for Granularity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fuzzy" => Ok(Granularity::Fuzzy),
            "equal" => Ok(Granularity::Equal),
            "targeted" => Ok(Granularity::Targeted),
            _ => Err(Error::Invalid(format!("unknown granularity {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchQuery {
    pub spec: CipherSpec,
    pub rounds: usize,
    pub attack: Attack,
    pub granularity: Option<Granularity>,
    pub seed: u64,
    /// Per solve.
    pub budget: Duration,
    pub jobs: usize,
    pub xor_style: XorStyle,
    /// Random concretizations re-solved for every fuzzy entry found impossible.
    pub spot_checks: usize,
}

impl SearchQuery {
    pub fn differential(spec: CipherSpec, rounds: usize) -> Self {
        SearchQuery {
            spec,
            rounds,
            attack: Attack::Differential,
            granularity: None,
            seed: 0,
            budget: crate::milp::solver::DEFAULT_BUDGET,
            jobs: 1,
            xor_style: XorStyle::default(),
            spot_checks: 0,
        }
    }

    pub fn impossible(spec: CipherSpec, rounds: usize, granularity: Granularity) -> Self {
        SearchQuery { attack: Attack::Impossible, granularity: Some(granularity), ..Self::differential(spec, rounds) }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.attack, self.granularity) {
            (Attack::Differential, Some(g)) => Err(Error::Invalid(format!("granularity {g} only applies to impossible-differential search"))),
            (Attack::Impossible, None) => Err(Error::Invalid("impossible-differential search needs a granularity".into())),
            _ if self.rounds == 0 => Err(Error::Invalid("rounds must be at least 1".into())),
            _ if self.jobs == 0 => Err(Error::Invalid("jobs must be at least 1".into())),
            _ => Ok(()),
        }
    }

    fn model(&self) -> Result<UnrolledModel> {
        generate_model(&self.spec, self.rounds, &ModelOptions { xor_style: self.xor_style, ..ModelOptions::default() })
    }
}

/// Minimum number of active SBoxes with a decoded witness trail.
pub fn search_differential(q: &SearchQuery) -> Result<TrailResult> {
    q.validate()?;
    if q.attack != Attack::Differential {
        return Err(Error::Invalid("search_differential needs attack = differential".into()));
    }
    let u = q.model()?;
    let r = solve(&u.model, q.budget)?;
    if r.status == SolveStatus::Infeasible {
        return Err(Error::Invalid(format!("{} has no non-zero trail over {} rounds", q.spec.name, q.rounds)));
    }
    u.decode_assignment(&r)
}

/// One input word and one output word; `None` values are non-zero wildcards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub in_word: usize,
    pub out_word: usize,
    pub in_value: Option<u32>,
    pub out_value: Option<u32>,
}

impl Pattern {
    fn render(words: usize, word_bits: usize, active: usize, value: Option<u32>, wildcard: char) -> String {
        let chars = word_bits.div_ceil(4);
        let mut out = String::with_capacity(words * chars);
        for w in 0..words {
            match (w == active, value) {
                (false, _) => out.extend(std::iter::repeat_n('0', chars)),
                (true, None) => out.extend(std::iter::repeat_n(wildcard, chars)),
                (true, Some(v)) => out.push_str(&format!("{v:0chars$x}")),
            }
        }
        out
    }

    pub fn in_hex(&self, words: usize, word_bits: usize) -> String {
        Self::render(words, word_bits, self.in_word, self.in_value, '*')
    }

    pub fn out_hex(&self, words: usize, word_bits: usize) -> String {
        Self::render(words, word_bits, self.out_word, self.out_value, '-')
    }

    pub fn wildcards(&self) -> u32 {
        u32::from(self.in_value.is_none()) + u32::from(self.out_value.is_none())
    }
}

/// All single-word patterns of a granularity in deterministic order.
pub fn enumerate_patterns(spec: &CipherSpec, granularity: Granularity) -> Result<Vec<Pattern>> {
    let words = spec.words();
    if spec.mode == Mode::Word && granularity != Granularity::Fuzzy {
        return Err(Error::Invalid("word-mode specs only carry word activity; use fuzzy granularity".into()));
    }
    if spec.word_bits > 16 {
        return Err(Error::Invalid(format!("word size {} too large to enumerate values", spec.word_bits)));
    }
    let vmax = (1u32 << spec.word_bits) - 1;
    let mut out = Vec::new();
    for i in 0..words {
        for j in 0..words {
            match granularity {
                Granularity::Fuzzy => out.push(Pattern { in_word: i, out_word: j, in_value: None, out_value: None }),
                Granularity::Equal => {
                    out.extend((1..=vmax).map(|v| Pattern { in_word: i, out_word: j, in_value: Some(v), out_value: Some(v) }));
                }
                Granularity::Targeted => {
                    for a in 1..=vmax {
                        out.extend((1..=vmax).map(|b| Pattern { in_word: i, out_word: j, in_value: Some(a), out_value: Some(b) }));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Impossible,
    Possible,
    /// Budget ran out; never counted as impossible.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpossibleEntry {
    pub pattern: Pattern,
    pub in_hex: String,
    pub out_hex: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpossibleReport {
    pub cipher: String,
    pub rounds: usize,
    pub granularity: Granularity,
    pub word_bits: usize,
    /// One entry per task, in pattern order.
    pub entries: Vec<ImpossibleEntry>,
    pub spot_checked: usize,
}

impl ImpossibleReport {
    pub fn proved(&self) -> impl Iterator<Item = &ImpossibleEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Impossible)
    }

    pub fn unresolved(&self) -> impl Iterator<Item = &ImpossibleEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Unresolved)
    }

    pub fn total_count(&self) -> usize {
        self.proved().count()
    }

    /// Number of concrete value pairs covered by the proved entries.
    pub fn concretizations(&self) -> u64 {
        let values = (1u64 << self.word_bits) - 1;
        self.proved().map(|e| values.pow(e.pattern.wildcards())).sum()
    }

    pub fn to_table(&self) -> String {
        let width = self.entries.first().map_or(16, |e| e.in_hex.len()).max("Input Difference".len());
        let mut out = format!(
            "{} rounds={} granularity={}: {} impossible of {} ({} concrete pairs)\n",
            self.cipher,
            self.rounds,
            self.granularity,
            self.total_count(),
            self.entries.len(),
            self.concretizations()
        );
        out.push_str(&format!("{:<width$}  {:<width$}\n", "Input Difference", "Output Difference"));
        for e in self.proved() {
            out.push_str(&format!("{:<width$}  {:<width$}\n", e.in_hex, e.out_hex));
        }
        let unresolved: Vec<&ImpossibleEntry> = self.unresolved().collect();
        if !unresolved.is_empty() {
            out.push_str(&format!("unresolved ({}):\n", unresolved.len()));
            for e in unresolved {
                out.push_str(&format!("{:<width$}  {:<width$}\n", e.in_hex, e.out_hex));
            }
        }
        out
    }

    /// `in_hex<TAB>out_hex<TAB>proved` for every resolved task.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            if e.verdict != Verdict::Unresolved {
                out.push_str(&format!("{}\t{}\t{}\n", e.in_hex, e.out_hex, e.verdict == Verdict::Impossible));
            }
        }
        out
    }
}

/// Incremental solver over one unrolled model with a guard per word for "non-zero".
struct PatternSolver<'a> {
    u: &'a UnrolledModel,
    solver: Solver,
    in_guards: Vec<Guard>,
    out_guards: Vec<Guard>,
    word_bits: usize,
}

impl<'a> PatternSolver<'a> {
    fn new(u: &'a UnrolledModel) -> Result<Self> {
        let mut solver = Solver::new(&u.model)?;
        let per = if u.spec.mode == Mode::Bit { u.spec.word_bits } else { 1 };
        let words = u.spec.words();
        let mut in_guards = Vec::with_capacity(words);
        let mut out_guards = Vec::with_capacity(words);
        for w in 0..words {
            in_guards.push(solver.add_guarded_at_least_one(&u.input_vars[w * per..(w + 1) * per])?);
            out_guards.push(solver.add_guarded_at_least_one(&u.output_vars[w * per..(w + 1) * per])?);
        }
        Ok(PatternSolver { u, solver, in_guards, out_guards, word_bits: per })
    }

    fn fix_side(&self, vars: &[VarId], word: usize, value: Option<u32>, fixed: &mut Vec<(VarId, bool)>) {
        let per = self.word_bits;
        for (w, chunk) in vars.chunks(per).enumerate() {
            if w == word {
                if let Some(v) = value {
                    for (k, &var) in chunk.iter().enumerate() {
                        fixed.push((var, v >> (per - 1 - k) & 1 == 1));
                    }
                }
            } else {
                fixed.extend(chunk.iter().map(|&var| (var, false)));
            }
        }
    }

    fn verdict(&mut self, p: &Pattern, budget: Duration) -> Result<Verdict> {
        let mut fixed = Vec::new();
        self.fix_side(&self.u.input_vars, p.in_word, p.in_value, &mut fixed);
        self.fix_side(&self.u.output_vars, p.out_word, p.out_value, &mut fixed);
        let mut guards = Vec::new();
        if p.in_value.is_none() {
            guards.push(self.in_guards[p.in_word]);
        }
        if p.out_value.is_none() {
            guards.push(self.out_guards[p.out_word]);
        }
        match self.solver.solve_assuming(&fixed, &guards, budget) {
            Ok(r) if r.status == SolveStatus::Infeasible => Ok(Verdict::Impossible),
            Ok(_) => Ok(Verdict::Possible),
            Err(Error::Indeterminate { .. }) => Ok(Verdict::Unresolved),
            Err(e) => Err(e),
        }
    }
}

fn run_chunk(u: &UnrolledModel, chunk: &[Pattern], q: &SearchQuery, chunk_index: usize) -> Result<(Vec<Verdict>, usize)> {
    let mut ps = PatternSolver::new(u)?;
    let mut rng = ChaCha8Rng::seed_from_u64(q.seed ^ (chunk_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let vmax = (1u32 << q.spec.word_bits) - 1;
    let mut verdicts = Vec::with_capacity(chunk.len());
    let mut checked = 0;
    for p in chunk {
        let v = ps.verdict(p, q.budget)?;
        if v == Verdict::Impossible && p.wildcards() > 0 && q.spec.mode == Mode::Bit {
            for _ in 0..q.spot_checks {
                let concrete = Pattern {
                    in_value: Some(p.in_value.unwrap_or_else(|| rng.gen_range(1..=vmax))),
                    out_value: Some(p.out_value.unwrap_or_else(|| rng.gen_range(1..=vmax))),
                    ..*p
                };
                if ps.verdict(&concrete, q.budget)? == Verdict::Possible {
                    return Err(Error::Invalid(format!(
                        "inconsistent search: {:?} proved impossible but concretization {:?} is feasible",
                        p, concrete
                    )));
                }
                checked += 1;
            }
        }
        verdicts.push(v);
    }
    Ok((verdicts, checked))
}

/// Solves every pattern of the query's granularity; the report does not depend on `jobs`.
pub fn search_impossible(q: &SearchQuery) -> Result<ImpossibleReport> {
    q.validate()?;
    let granularity = q.granularity.ok_or_else(|| Error::Invalid("missing granularity".into()))?;
    let patterns = enumerate_patterns(&q.spec, granularity)?;
    search_patterns(q, &patterns)
}

/// Like [`search_impossible`] on an explicit task list.
pub fn search_patterns(q: &SearchQuery, patterns: &[Pattern]) -> Result<ImpossibleReport> {
    q.validate()?;
    let granularity = q.granularity.ok_or_else(|| Error::Invalid("missing granularity".into()))?;
    let u = q.model()?;
    let chunks = (q.jobs * 4).min(patterns.len()).max(1);
    let size = patterns.len().div_ceil(chunks).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(q.jobs).build().map_err(|e| Error::Invalid(e.to_string()))?;
    let results: Vec<Result<(Vec<Verdict>, usize)>> =
        pool.install(|| patterns.par_chunks(size).enumerate().map(|(k, c)| run_chunk(&u, c, q, k)).collect());
    let words = q.spec.words();
    let wb = if q.spec.mode == Mode::Bit { q.spec.word_bits } else { 4 };
    let mut entries = Vec::with_capacity(patterns.len());
    let mut spot_checked = 0;
    let mut it = patterns.iter();
    for r in results {
        let (verdicts, checked) = r?;
        spot_checked += checked;
        for v in verdicts {
            let p = it.next().expect("one verdict per pattern");
            entries.push(ImpossibleEntry { pattern: *p, in_hex: p.in_hex(words, wb), out_hex: p.out_hex(words, wb), verdict: v });
        }
    }
    Ok(ImpossibleReport {
        cipher: q.spec.name.clone(),
        rounds: q.rounds,
        granularity,
        word_bits: if q.spec.mode == Mode::Bit { q.spec.word_bits } else { 1 },
        entries,
        spot_checked,
    })
}

/// Stand-alone feasibility model of one pattern (blank objective), for export to external solvers.
pub fn pattern_model(u: &UnrolledModel, p: &Pattern) -> Result<MilpModel> {
    let per = if u.spec.mode == Mode::Bit { u.spec.word_bits } else { 1 };
    let mut m = u.model.clone();
    m.clear_objective();
    for (vars, word, value) in [(&u.input_vars, p.in_word, p.in_value), (&u.output_vars, p.out_word, p.out_value)] {
        for (w, chunk) in vars.chunks(per).enumerate() {
            match (w == word, value) {
                (true, None) => {
                    m.add_constraint(chunk.iter().map(|&v| (v, 1)), Sense::Ge, 1)?;
                }
                (true, Some(val)) => {
                    for (k, &v) in chunk.iter().enumerate() {
                        m.add_constraint([(v, 1)], Sense::Eq, i64::from(val >> (per - 1 - k) & 1))?;
                    }
                }
                (false, _) => {
                    for &v in chunk {
                        m.add_constraint([(v, 1)], Sense::Eq, 0)?;
                    }
                }
            }
        }
    }
    Ok(m)
}

/// A replay-checked trail realizing the pattern, or `None` when it is impossible.
pub fn pattern_witness(u: &UnrolledModel, p: &Pattern, budget: Duration) -> Result<Option<TrailResult>> {
    let r = solve(&pattern_model(u, p)?, budget)?;
    if r.status == SolveStatus::Infeasible {
        return Ok(None);
    }
    u.decode_assignment(&r).map(Some)
}

/// Reverses the bit order of a hex state (bit `i` becomes bit `n - 1 - i`).
/// Wildcard characters stay wildcards at the mirrored position.
pub fn mirror_hex(hex: &str) -> String {
    hex.chars()
        .rev()
        .map(|c| match c.to_digit(16) {
            Some(v) => char::from_digit((v as u8).reverse_bits() as u32 >> 4, 16).expect("nibble"),
            None => c,
        })
        .collect()
}
