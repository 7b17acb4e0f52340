//! Unrolling a [`CipherSpec`] into a MILP model for differential trail search.
//!
//! Bit mode: one binary per difference bit, SBoxes modeled by exact inequality
//! sets plus an activity variable per SBox instance, permutations compiled to
//! variable aliasing and linear layers to XOR gates. Word mode: one binary per
//! word (zero / non-zero), word XORs and branch-number constraints.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linear::{add_xor, word_xor_model, BinaryMatrix, XorGate, XorStyle};
use crate::milp::{MilpModel, Sense, SolveResult, SolveStatus, VarId};
use crate::polytope::{convex_hull_hrep, InequalitySet};
use crate::reduction::greedy_reduce;
use crate::sbox::{Ddt, SBoxTable};
use crate::spec::{CipherSpec, Combine, Layer, Mode};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModelOptions {
    pub xor_style: XorStyle,
    /// Adds `sum(y) >= A` and `A >= y_k` per SBox (non-zero in iff non-zero out).
    /// Redundant for bijective SBoxes with exact inequality sets.
    pub sbox_extras: bool,
}

/// One SBox application in the unrolled model (bit mode: bit variables MSB first,
/// word mode: the single word variable on each side).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SboxInstance {
    pub round: usize,
    pub sbox: Option<String>,
    pub inputs: Vec<VarId>,
    pub outputs: Vec<VarId>,
    pub activity: VarId,
}

#[derive(Clone, Debug)]
pub struct UnrolledModel {
    pub model: MilpModel,
    pub spec: CipherSpec,
    pub rounds: usize,
    pub input_vars: Vec<VarId>,
    pub output_vars: Vec<VarId>,
    pub activity_vars: Vec<VarId>,
    /// Variable index range created while unrolling each round.
    pub round_boundaries: Vec<Range<usize>>,
    /// State before each round and after the last; `None` is a known-zero position.
    pub round_states: Vec<Vec<Option<VarId>>>,
    pub sboxes: Vec<SboxInstance>,
}

/// Greedy-reduced, verified-exact inequality set for every SBox the spec references.
pub fn default_sbox_inequalities(spec: &CipherSpec) -> Result<BTreeMap<String, InequalitySet>> {
    let mut out = BTreeMap::new();
    for name in spec.sboxes.keys() {
        let table = spec.sbox_table(name).ok_or_else(|| Error::Spec(format!("unresolved sbox {name}")))?;
        out.insert(name.clone(), sbox_inequalities(table)?);
    }
    Ok(out)
}

pub fn sbox_inequalities(table: &SBoxTable) -> Result<InequalitySet> {
    let points = table.ddt().transitions();
    let hull = convex_hull_hrep(points.possible(), points.dim())?;
    Ok(greedy_reduce(&hull.inequalities(), points.impossible())?.chosen)
}

struct Builder<'a> {
    spec: &'a CipherSpec,
    model: MilpModel,
    zeros: usize,
    sboxes: Vec<SboxInstance>,
}

impl Builder<'_> {
    fn var(&mut self, name: String) -> Result<VarId> {
        self.model.add_binary(&name)
    }

    /// A variable for a position, creating a zero-fixed one for known-zero positions.
    fn materialize(&mut self, v: Option<VarId>) -> Result<VarId> {
        match v {
            Some(v) => Ok(v),
            None => {
                let z = self.var(format!("zero{}", self.zeros))?;
                self.zeros += 1;
                self.model.add_constraint([(z, 1)], Sense::Eq, 0)?;
                Ok(z)
            }
        }
    }

    /// XOR of the given terms: known zero, an alias, or a fresh output variable.
    fn xor(&mut self, terms: Vec<VarId>, name: String, mode: Mode, style: XorStyle) -> Result<Option<VarId>> {
        let mut t = terms;
        t.sort_unstable();
        let mut reduced: Vec<VarId> = Vec::new();
        for v in t {
            if mode == Mode::Bit && reduced.last() == Some(&v) {
                reduced.pop();
            } else if reduced.last() != Some(&v) {
                reduced.push(v);
            }
        }
        match reduced.len() {
            0 => Ok(None),
            1 => Ok(Some(reduced[0])),
            _ => {
                let out = self.var(name.clone())?;
                match mode {
                    Mode::Bit => add_xor(&XorGate::new(reduced, out)?, style, &mut self.model)?,
                    Mode::Word => self.word_xor(&reduced, out, &name)?,
                }
                Ok(Some(out))
            }
        }
    }

    /// Chains two-input word XORs through intermediate variables.
    fn word_xor(&mut self, terms: &[VarId], out: VarId, name: &str) -> Result<()> {
        let mut acc = terms[0];
        for (k, &t) in terms[1..].iter().enumerate() {
            let y = if k + 2 == terms.len() { out } else { self.var(format!("{name}_t{k}"))? };
            word_xor_model(acc, t, y, &format!("{name}_d{k}"), &mut self.model)?;
            if self.spec.word_bits == 1 {
                self.model.add_constraint([(acc, 1), (t, 1), (y, 1)], Sense::Le, 2)?;
            }
            acc = y;
        }
        Ok(())
    }

    fn round(&mut self, r: usize, state: &mut [Option<VarId>], sbox_ineqs: &BTreeMap<String, InequalitySet>, opts: &ModelOptions) -> Result<()> {
        let spec = self.spec;
        for (l, layer) in spec.round_layers(r)?.iter().enumerate() {
            let old = state.to_vec();
            match layer {
                Layer::Sbox { sbox, groups, targets, combine } => {
                    for (j, group) in groups.iter().enumerate() {
                        let inputs = group.iter().map(|&p| self.materialize(old[p])).collect::<Result<Vec<_>>>()?;
                        let n = self.sboxes.len();
                        let (outputs, activity) = match spec.mode {
                            Mode::Bit => {
                                let name = sbox.as_deref().expect("validated");
                                let ineqs = sbox_ineqs.get(name).ok_or_else(|| Error::Spec(format!("no inequality set for sbox {name}")))?;
                                let table = spec.sbox_table(name).expect("validated");
                                let outputs = (0..table.out_bits()).map(|k| self.var(format!("y{r}_{j}_{k}"))).collect::<Result<Vec<_>>>()?;
                                if ineqs.dim() != inputs.len() + outputs.len() {
                                    return Err(Error::DimensionMismatch { expected: inputs.len() + outputs.len(), got: ineqs.dim() });
                                }
                                let vars: Vec<VarId> = inputs.iter().chain(&outputs).copied().collect();
                                for q in ineqs.iter() {
                                    self.model.add_constraint(vars.iter().zip(q.coeffs()).map(|(&v, &c)| (v, c)), Sense::Ge, q.rhs())?;
                                }
                                let a = self.var(format!("A{n}"))?;
                                self.model.add_constraint(inputs.iter().map(|&x| (x, 1)).chain([(a, -1)]), Sense::Ge, 0)?;
                                for &x in &inputs {
                                    self.model.add_constraint([(a, 1), (x, -1)], Sense::Ge, 0)?;
                                }
                                if opts.sbox_extras {
                                    self.model.add_constraint(outputs.iter().map(|&y| (y, 1)).chain([(a, -1)]), Sense::Ge, 0)?;
                                    for &y in &outputs {
                                        self.model.add_constraint([(a, 1), (y, -1)], Sense::Ge, 0)?;
                                    }
                                }
                                (outputs, a)
                            }
                            // A word SBox maps zero to zero and non-zero to non-zero.
                            Mode::Word => (inputs.clone(), inputs[0]),
                        };
                        let dest = targets.as_ref().map_or(group, |t| &t[j]);
                        for (k, &p) in dest.iter().enumerate() {
                            state[p] = match combine {
                                Combine::Assign => Some(outputs[k]),
                                Combine::Xor => self.xor(
                                    old[p].into_iter().chain([outputs[k]]).collect(),
                                    format!("s{r}_{l}_{p}"),
                                    spec.mode,
                                    opts.xor_style,
                                )?,
                            };
                        }
                        self.sboxes.push(SboxInstance { round: r, sbox: sbox.clone(), inputs, outputs, activity });
                    }
                }
                Layer::Pbox { perm } => {
                    for (i, &to) in perm.iter().enumerate() {
                        state[to] = old[i];
                    }
                }
                Layer::Linear { matrix: Some(rows), inputs, outputs, combine, .. } => {
                    let m = BinaryMatrix::from_rows(rows)?;
                    for (row, &p) in outputs.iter().enumerate() {
                        let mut terms: Vec<VarId> = m.row_support(row).into_iter().filter_map(|c| old[inputs[c]]).collect();
                        if *combine == Combine::Xor {
                            terms.extend(old[p]);
                        }
                        state[p] = self.xor(terms, format!("l{r}_{l}_{p}"), spec.mode, opts.xor_style)?;
                    }
                }
                Layer::Linear { branch: Some(b), inputs, outputs, combine, .. } => {
                    if *combine == Combine::Xor {
                        return Err(Error::Spec("branch-number layers cannot XOR into their outputs".into()));
                    }
                    let bn = spec.branch_number(b).ok_or_else(|| Error::Spec(format!("missing branch number {b}")))?;
                    let ins = inputs.iter().map(|&p| self.materialize(old[p])).collect::<Result<Vec<_>>>()?;
                    let outs = outputs.iter().map(|&p| self.var(format!("w{r}_{l}_{p}"))).collect::<Result<Vec<_>>>()?;
                    let d = self.var(format!("dL{r}_{l}_{}", outputs[0]))?;
                    let all: Vec<VarId> = ins.iter().chain(&outs).copied().collect();
                    self.model.add_constraint(all.iter().map(|&v| (v, 1)).chain([(d, -i64::from(bn))]), Sense::Ge, 0)?;
                    for &v in &all {
                        self.model.add_constraint([(d, 1), (v, -1)], Sense::Ge, 0)?;
                    }
                    for (&p, &v) in outputs.iter().zip(&outs) {
                        state[p] = Some(v);
                    }
                }
                Layer::Linear { .. } => return Err(Error::Spec("linear layer needs a matrix or a branch".into())),
            }
        }
        Ok(())
    }
}

fn unroll(spec: &CipherSpec, rounds: usize, sbox_ineqs: &BTreeMap<String, InequalitySet>, opts: &ModelOptions) -> Result<UnrolledModel> {
    if rounds == 0 {
        return Err(Error::Invalid("rounds must be at least 1".into()));
    }
    let mut b = Builder { spec, model: MilpModel::new(), zeros: 0, sboxes: Vec::new() };
    let input_vars = (0..spec.positions()).map(|p| b.var(format!("x{p}"))).collect::<Result<Vec<_>>>()?;
    let mut state: Vec<Option<VarId>> = input_vars.iter().copied().map(Some).collect();
    let mut round_states = vec![state.clone()];
    let mut round_boundaries = Vec::new();
    for r in 0..rounds {
        let start = b.model.num_vars();
        b.round(r, &mut state, sbox_ineqs, opts)?;
        round_boundaries.push(start..b.model.num_vars());
        round_states.push(state.clone());
    }
    let output_vars = state.iter().map(|&v| b.materialize(v)).collect::<Result<Vec<_>>>()?;
    b.model.add_constraint(input_vars.iter().map(|&v| (v, 1)), Sense::Ge, 1)?;
    let activity_vars: Vec<VarId> = b.sboxes.iter().map(|s| s.activity).collect();
    b.model.set_objective(activity_vars.iter().map(|&v| (v, 1)))?;
    Ok(UnrolledModel {
        model: b.model,
        spec: spec.clone(),
        rounds,
        input_vars,
        output_vars,
        activity_vars,
        round_boundaries,
        round_states,
        sboxes: b.sboxes,
    })
}

/// Bit-level model: exact SBox inequalities, activity linking, XOR-modeled linear layers.
pub fn generate_bit_model(spec: &CipherSpec, rounds: usize, sbox_ineqs: &BTreeMap<String, InequalitySet>, opts: &ModelOptions) -> Result<UnrolledModel> {
    if spec.mode != Mode::Bit {
        return Err(Error::Spec(format!("{} is not a bit-mode spec", spec.name)));
    }
    unroll(spec, rounds, sbox_ineqs, opts)
}

/// Word-level model: word activity binaries, word XORs and branch-number constraints.
pub fn generate_word_model(spec: &CipherSpec, rounds: usize) -> Result<UnrolledModel> {
    if spec.mode != Mode::Word {
        return Err(Error::Spec(format!("{} is not a word-mode spec", spec.name)));
    }
    unroll(spec, rounds, &BTreeMap::new(), &ModelOptions::default())
}

/// Either model kind with default SBox inequalities.
pub fn generate_model(spec: &CipherSpec, rounds: usize, opts: &ModelOptions) -> Result<UnrolledModel> {
    match spec.mode {
        Mode::Bit => generate_bit_model(spec, rounds, &default_sbox_inequalities(spec)?, opts),
        Mode::Word => generate_word_model(spec, rounds),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrailResult {
    pub cipher: String,
    pub rounds: usize,
    pub status: SolveStatus,
    /// State difference before each round and after the last, as hex (bit mode)
    /// or one `0`/`1` character per word (word mode).
    pub states: Vec<String>,
    pub active_per_round: Vec<usize>,
    pub active: usize,
}

impl TrailResult {
    pub fn optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} rounds={} active SBoxes: {} ({})\n", self.cipher, self.rounds, self.active, self.status.as_str());
        for (r, s) in self.states.iter().enumerate() {
            match self.active_per_round.get(r) {
                Some(a) => out.push_str(&format!("round {:>2}  {s}  active {a}\n", r + 1)),
                None => out.push_str(&format!("output    {s}\n")),
            }
        }
        out
    }
}

/// Packs MSB-first bits into hex (bit count must be a multiple of 4).
pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().fold(0u32, |acc, &b| acc << 1 | u32::from(b));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

impl UnrolledModel {
    fn value(values: &[i64], v: Option<VarId>) -> bool {
        v.is_some_and(|v| values[v.0] != 0)
    }

    pub fn state_values(&self, values: &[i64], round: usize) -> Vec<bool> {
        self.round_states[round].iter().map(|&v| Self::value(values, v)).collect()
    }

    fn render(&self, bits: &[bool]) -> String {
        match self.spec.mode {
            Mode::Bit => bits_to_hex(bits),
            Mode::Word => bits.iter().map(|&b| if b { '1' } else { '0' }).collect(),
        }
    }

    /// Decodes a solved assignment and replays it through the spec.
    pub fn decode_assignment(&self, r: &SolveResult) -> Result<TrailResult> {
        let values = r.assignment.as_ref().ok_or_else(|| Error::Invalid(format!("no assignment to decode ({})", r.status.as_str())))?;
        self.replay(values)?;
        let mut active_per_round = vec![0; self.rounds];
        for s in &self.sboxes {
            active_per_round[s.round] += usize::from(values[s.activity.0] != 0);
        }
        Ok(TrailResult {
            cipher: self.spec.name.clone(),
            rounds: self.rounds,
            status: r.status,
            states: (0..=self.rounds).map(|k| self.render(&self.state_values(values, k))).collect(),
            active: active_per_round.iter().sum(),
            active_per_round,
        })
    }

    /// Re-executes the spec on the decoded differences: SBox outputs are read from the
    /// assignment and checked against the DDT (bit mode) or activity rules (word mode),
    /// everything else is recomputed and compared with the model's state variables.
    pub fn replay(&self, values: &[i64]) -> Result<()> {
        let spec = &self.spec;
        let fail = |m: String| Err(Error::Invalid(format!("trail replay: {m}")));
        let ddts: BTreeMap<&str, Ddt> = spec.sboxes.keys().map(|n| (n.as_str(), spec.sbox_table(n).expect("resolved").ddt())).collect();
        let mut state = self.state_values(values, 0);
        let mut next_sbox = 0;
        let bit = |v: VarId| values[v.0] != 0;
        let pack = |bits: &[bool]| bits.iter().fold(0usize, |acc, &b| acc << 1 | usize::from(b));
        for r in 0..self.rounds {
            for layer in spec.round_layers(r)? {
                let old = state.clone();
                match layer {
                    Layer::Sbox { sbox, groups, targets, combine } => {
                        for (j, group) in groups.iter().enumerate() {
                            let inst = &self.sboxes[next_sbox];
                            next_sbox += 1;
                            let dx: Vec<bool> = group.iter().map(|&p| old[p]).collect();
                            if dx != inst.inputs.iter().map(|&v| bit(v)).collect::<Vec<_>>() {
                                return fail(format!("round {} sbox {j}: input mismatch", r + 1));
                            }
                            let dy: Vec<bool> = inst.outputs.iter().map(|&v| bit(v)).collect();
                            let active = dx.iter().any(|&b| b);
                            if bit(inst.activity) != active {
                                return fail(format!("round {} sbox {j}: activity flag {} for input {dx:?}", r + 1, bit(inst.activity)));
                            }
                            match (spec.mode, sbox) {
                                (Mode::Bit, Some(name)) => {
                                    if ddts[name.as_str()].get(pack(&dx), pack(&dy)) == 0 {
                                        return fail(format!("round {} sbox {j}: impossible transition {:x} -> {:x}", r + 1, pack(&dx), pack(&dy)));
                                    }
                                }
                                _ => {
                                    if dy.iter().any(|&b| b) != active {
                                        return fail(format!("round {} sbox {j}: word activity changed", r + 1));
                                    }
                                }
                            }
                            let dest = targets.as_ref().map_or(group, |t| &t[j]);
                            for (k, &p) in dest.iter().enumerate() {
                                state[p] = match combine {
                                    Combine::Assign => dy[k],
                                    Combine::Xor if spec.mode == Mode::Bit => old[p] ^ dy[k],
                                    // Word XOR: the model decides; only 0 ^ a = a is forced.
                                    Combine::Xor => state[p],
                                };
                            }
                        }
                    }
                    Layer::Pbox { perm } => {
                        for (i, &to) in perm.iter().enumerate() {
                            state[to] = old[i];
                        }
                    }
                    Layer::Linear { matrix: Some(rows), inputs, outputs, combine, .. } if spec.mode == Mode::Bit => {
                        let m = BinaryMatrix::from_rows(rows)?;
                        let x: Vec<bool> = inputs.iter().map(|&p| old[p]).collect();
                        let y = m.apply(&x)?;
                        for (k, &p) in outputs.iter().enumerate() {
                            state[p] = y[k] ^ (*combine == Combine::Xor && old[p]);
                        }
                    }
                    // Word-level linear layers are relations, not functions: the
                    // end-of-round comparison below uses the model's values.
                    Layer::Linear { .. } => {}
                }
            }
            if spec.mode == Mode::Word {
                let model_state = self.state_values(values, r + 1);
                self.check_word_round(r, values)?;
                state = model_state;
            } else if state != self.state_values(values, r + 1) {
                return fail(format!("round {} output state differs from the model", r + 1));
            }
        }
        Ok(())
    }

    /// Branch-number property of every word-level linear layer in round `r`.
    fn check_word_round(&self, r: usize, values: &[i64]) -> Result<()> {
        let spec = &self.spec;
        let mut state = self.round_states[r].clone();
        for (l, layer) in spec.round_layers(r)?.iter().enumerate() {
            let old = state.clone();
            match layer {
                Layer::Pbox { perm } => {
                    for (i, &to) in perm.iter().enumerate() {
                        state[to] = old[i];
                    }
                }
                Layer::Linear { branch: Some(b), inputs, outputs, .. } => {
                    let bn = spec.branch_number(b).expect("validated") as usize;
                    let ins = inputs.iter().filter(|&&p| Self::value(values, old[p])).count();
                    let outs: Vec<Option<VarId>> = outputs
                        .iter()
                        .map(|&p| self.model.var(&format!("w{r}_{l}_{p}")))
                        .collect();
                    let active = ins + outs.iter().filter(|&&v| Self::value(values, v)).count();
                    if active != 0 && active < bn {
                        return Err(Error::Invalid(format!("trail replay: round {} branch {b} has {active} active words", r + 1)));
                    }
                    for (&p, &v) in outputs.iter().zip(&outs) {
                        state[p] = v;
                    }
                }
                Layer::Sbox { .. } | Layer::Linear { .. } => {}
            }
        }
        Ok(())
    }
}
