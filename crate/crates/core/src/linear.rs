//! Models for XOR gates and binary-matrix linear layers.
//!
//! An XOR gate `u0 = u1 ^ .. ^ un` over differences admits exactly the
//! even-parity assignments of its `n + 1` variables. Two encodings are offered:
//! the hull encoding cuts off each of the `2^n` odd-parity points with its own
//! inequality; the parity encoding adds one integer `d` and the single equality
//! `u0 + u1 + .. + un = 2d`.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::milp::{MilpModel, Sense, SolveStatus, Solver, VarId};
use crate::polytope::{InequalitySet, LinearInequality};
use crate::reduction::conditional_inequality;
use crate::sbox::{point_bits, Ddt};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum XorStyle {
    Hull,
    #[default]
    Parity,
}

impl XorStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            XorStyle::Hull => "hull",
            XorStyle::Parity => "parity",
        }
    }
}

impl fmt::Display for XorStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for XorStyle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hull" => Ok(XorStyle::Hull),
            "parity" => Ok(XorStyle::Parity),
            _ => Err(Error::Invalid(format!("unknown xor style {s:?} (expected hull|parity)"))),
        }
    }
}

/// `output = inputs[0] ^ .. ^ inputs[n-1]` over difference variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorGate {
    inputs: Vec<VarId>,
    output: VarId,
}

impl XorGate {
    pub fn new(inputs: Vec<VarId>, output: VarId) -> Result<Self> {
        if inputs.len() < 2 {
            return Err(Error::Invalid(format!("xor gate needs fan-in >= 2, got {}", inputs.len())));
        }
        let mut all: Vec<VarId> = inputs.clone();
        all.push(output);
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("xor gate variables must be distinct".into()));
        }
        Ok(XorGate { inputs, output })
    }

    pub fn fan_in(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[VarId] {
        &self.inputs
    }

    pub fn output(&self) -> VarId {
        self.output
    }

    /// Inputs followed by the output.
    pub fn vars(&self) -> Vec<VarId> {
        let mut v = self.inputs.clone();
        v.push(self.output);
        v
    }
}

/// Dense row-major 0/1 matrix; `y = M x` over GF(2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BinaryMatrix {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: bits.len() });
        }
        Ok(BinaryMatrix { rows, cols, bits })
    }

    /// Rows as strings of `0`/`1`; whitespace inside a row is ignored.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let mut bits = Vec::new();
        let mut cols = None;
        for r in rows {
            let row: Vec<bool> = r
                .as_ref()
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse(format!("bad matrix character {c:?}"))),
                })
                .collect::<Result<_>>()?;
            match cols {
                None => cols = Some(row.len()),
                Some(n) if n != row.len() => return Err(Error::DimensionMismatch { expected: n, got: row.len() }),
                _ => {}
            }
            bits.extend(row);
        }
        BinaryMatrix::new(rows.len(), cols.unwrap_or(0), bits)
    }

    pub fn identity(n: usize) -> Self {
        let bits = (0..n * n).map(|i| i / n == i % n).collect();
        BinaryMatrix { rows: n, cols: n, bits }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.cols + c]
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_support(r).len()
    }

    pub fn to_rows(&self) -> Vec<String> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn apply(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        Ok((0..self.rows).map(|r| (0..self.cols).fold(false, |acc, c| acc ^ (self.get(r, c) & x[c]))).collect())
    }

    /// Block matrix with `b` copies of `self` on the diagonal.
    pub fn block_diagonal(&self, b: usize) -> Self {
        let (rows, cols) = (self.rows * b, self.cols * b);
        let mut bits = vec![false; rows * cols];
        for k in 0..b {
            for r in 0..self.rows {
                for c in 0..self.cols {
                    bits[(k * self.rows + r) * cols + k * self.cols + c] = self.get(r, c);
                }
            }
        }
        BinaryMatrix { rows, cols, bits }
    }

    /// Replaces every entry by an `n x n` identity or zero block (word-level matrix to bit level).
    pub fn expand_words(&self, n: usize) -> Self {
        let (rows, cols) = (self.rows * n, self.cols * n);
        let bits = (0..rows * cols)
            .map(|i| {
                let (r, c) = (i / cols, i % cols);
                r % n == c % n && self.get(r / n, c / n)
            })
            .collect();
        BinaryMatrix { rows, cols, bits }
    }

    pub fn mul(&self, other: &BinaryMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let bits = (0..self.rows * other.cols)
            .map(|i| {
                let (r, c) = (i / other.cols, i % other.cols);
                (0..self.cols).fold(false, |acc, k| acc ^ (self.get(r, k) & other.get(k, c)))
            })
            .collect();
        Ok(BinaryMatrix { rows: self.rows, cols: other.cols, bits })
    }

    /// Inverse over GF(2), if the matrix is square and invertible.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        if n != self.cols {
            return None;
        }
        let mut a: Vec<Vec<bool>> = (0..n).map(|r| (0..n).map(|c| self.get(r, c)).chain((0..n).map(|c| c == r)).collect()).collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r][col])?;
            a.swap(col, piv);
            for r in 0..n {
                if r != col && a[r][col] {
                    let src = a[col].clone();
                    for (x, y) in a[r].iter_mut().zip(src) {
                        *x ^= y;
                    }
                }
            }
        }
        let bits = a.into_iter().flat_map(|row| row.into_iter().skip(n)).collect();
        Some(BinaryMatrix { rows: n, cols: n, bits })
    }

    /// Midori64 column mixing on one 16-bit column, nibble-major, MSB first in each nibble.
    pub fn midori_mix_column() -> Self {
        let mut rows = Vec::new();
        for block in 0..4 {
            for bit in 0..4 {
                let row: String = (0..4)
                    .map(|j| if j == block { "0000".to_string() } else { (0..4).map(|b| if b == bit { '1' } else { '0' }).collect() })
                    .collect();
                rows.push(row);
            }
        }
        BinaryMatrix::from_rows(&rows).expect("well-formed")
    }
}

/// DDT of an `n`-input XOR: row `i` puts all `2^n` pairs in column `parity(i)`.
pub fn xor_ddt(n: u32) -> Result<Ddt> {
    if !(2..=8).contains(&n) {
        return Err(Error::Invalid(format!("xor fan-in {n} outside 2..=8")));
    }
    let rows = 1usize << n;
    let mut counts = vec![0u32; rows * 2];
    for i in 0..rows {
        counts[i * 2 + (i.count_ones() as usize & 1)] = rows as u32;
    }
    Ddt::from_counts(n, 1, counts)
}

fn odd_parity_cuts(vars: usize) -> Vec<LinearInequality> {
    (0..1u32 << vars)
        .filter(|p| p.count_ones() % 2 == 1)
        .map(|p| conditional_inequality(&point_bits(p, vars)))
        .collect()
}

/// The `2^n` cuts, one per odd-parity point, over `n` inputs and one output.
pub fn xor_hull_model(n: usize) -> Result<InequalitySet> {
    if !(2..=7).contains(&n) {
        return Err(Error::Invalid(format!("xor fan-in {n} outside 2..=7")));
    }
    InequalitySet::from_items(n + 1, odd_parity_cuts(n + 1))
}

fn dummy_name(model: &MilpModel, out: VarId) -> String {
    format!("{}_xd", model.variable(out).name)
}

/// Adds `sum(gate vars) = 2d` with a new integer `d in [0, floor((n+1)/2)]`.
/// Returns the dummy and the constraint index. Modeling the same gate twice is an error.
pub fn xor_parity_model(gate: &XorGate, model: &mut MilpModel) -> Result<(VarId, usize)> {
    check_binary(gate, model)?;
    let name = dummy_name(model, gate.output);
    if model.var(&name).is_some() {
        return Err(Error::Model(format!("xor gate on {} already modeled", model.variable(gate.output).name)));
    }
    let d = model.add_integer(&name, 0, gate.fan_in().div_ceil(2) as i64)?;
    let mut terms: Vec<(VarId, i64)> = gate.vars().into_iter().map(|v| (v, 1)).collect();
    terms.push((d, -2));
    let c = model.add_constraint(terms, Sense::Eq, 0)?;
    Ok((d, c))
}

/// Adds the `2^n` hull cuts of the gate; returns the index of the first constraint.
pub fn xor_hull_constraints(gate: &XorGate, model: &mut MilpModel) -> Result<usize> {
    check_binary(gate, model)?;
    Ok(add_cuts(&gate.vars(), model))
}

fn add_cuts(vars: &[VarId], model: &mut MilpModel) -> usize {
    let first = model.num_constraints();
    for q in odd_parity_cuts(vars.len()) {
        let terms = vars.iter().copied().zip(q.coeffs().iter().copied());
        model.add_constraint(terms, Sense::Ge, q.rhs()).expect("variables exist");
    }
    first
}

fn check_binary(gate: &XorGate, model: &MilpModel) -> Result<()> {
    for v in gate.vars() {
        if v.0 >= model.num_vars() {
            return Err(Error::Model(format!("unknown variable index {}", v.0)));
        }
        if model.variable(v).kind != crate::milp::VarKind::Binary {
            return Err(Error::Model(format!("xor gate variable {} is not binary", model.variable(v).name)));
        }
    }
    Ok(())
}

pub fn add_xor(gate: &XorGate, style: XorStyle, model: &mut MilpModel) -> Result<()> {
    match style {
        XorStyle::Hull => xor_hull_constraints(gate, model).map(|_| ()),
        XorStyle::Parity => xor_parity_model(gate, model).map(|_| ()),
    }
}

/// Constrains `out_vars = m * in_vars`. Zero rows fix the output to 0; weight-one rows become equalities.
pub fn matrix_to_xor_layer(m: &BinaryMatrix, in_vars: &[VarId], out_vars: &[VarId], style: XorStyle, model: &mut MilpModel) -> Result<()> {
    if m.cols() != in_vars.len() {
        return Err(Error::DimensionMismatch { expected: m.cols(), got: in_vars.len() });
    }
    if m.rows() != out_vars.len() {
        return Err(Error::DimensionMismatch { expected: m.rows(), got: out_vars.len() });
    }
    for (r, &out) in out_vars.iter().enumerate() {
        let support: Vec<VarId> = m.row_support(r).into_iter().map(|c| in_vars[c]).collect();
        match support.len() {
            0 => {
                model.add_constraint([(out, 1)], Sense::Eq, 0)?;
            }
            1 => {
                model.add_constraint([(out, 1), (support[0], -1)], Sense::Eq, 0)?;
            }
            _ => add_xor(&XorGate::new(support, out)?, style, model)?,
        }
    }
    Ok(())
}

/// Word-level XOR model `u + v + y >= 2d`, `d >= u, v, y` with binary `d`.
/// It admits `(1, 1, 1)`, which no exact bit-level XOR does.
pub fn word_xor_model(u: VarId, v: VarId, y: VarId, dummy: &str, model: &mut MilpModel) -> Result<VarId> {
    let d = model.add_binary(dummy)?;
    model.add_constraint([(u, 1), (v, 1), (y, 1), (d, -2)], Sense::Ge, 0)?;
    for x in [u, v, y] {
        model.add_constraint([(d, 1), (x, -1)], Sense::Ge, 0)?;
    }
    Ok(d)
}

/// Rotational network of `n`-input XOR gates: `u[r+1][i] = u[r][i] ^ .. ^ u[r][i+n-1]` (indices mod width).
///
/// With `width` a power of two the round map is `(1 + S + .. + S^(n-1))` over `GF(2)[S]/(S^width + 1)`:
/// nilpotent for even `n` (every output is eventually zero) and invertible for odd `n`.
#[derive(Clone, Debug)]
pub struct XorNetwork {
    pub model: MilpModel,
    pub inputs: Vec<VarId>,
    pub outputs: Vec<VarId>,
    pub style: XorStyle,
    pub gates: usize,
}

pub fn xor_stress_network(n: usize, rounds: usize, width: usize, style: XorStyle) -> Result<XorNetwork> {
    if !(2..=7).contains(&n) {
        return Err(Error::Invalid(format!("xor fan-in {n} outside 2..=7")));
    }
    if width < n || !width.is_multiple_of(4) {
        return Err(Error::Invalid(format!("width {width} must be a multiple of 4 and at least {n}")));
    }
    let mut model = MilpModel::new();
    let layer = |model: &mut MilpModel, r: usize| -> Result<Vec<VarId>> {
        (0..width).map(|i| model.add_binary(&format!("u{r}_{i}"))).collect()
    };
    let inputs = layer(&mut model, 0)?;
    let mut cur = inputs.clone();
    for r in 1..=rounds {
        let next = layer(&mut model, r)?;
        for (i, &out) in next.iter().enumerate() {
            let ins = (i..i + n).map(|j| cur[j % width]).collect();
            add_xor(&XorGate::new(ins, out)?, style, &mut model)?;
        }
        cur = next;
    }
    Ok(XorNetwork { model, inputs, outputs: cur, style, gates: rounds * width })
}

impl XorNetwork {
    /// (input nibble, output nibble) pairs, one solve each.
    pub fn configurations(&self) -> Vec<(usize, usize)> {
        let nibbles = self.inputs.len() / 4;
        (0..nibbles).flat_map(|a| (0..nibbles).map(move |b| (a, b))).collect()
    }

    /// Feasibility of each configuration: input nibble `a` and output nibble `b` both non-zero.
    pub fn solve_configurations(&self, budget: Duration) -> Result<Vec<bool>> {
        let mut solver = Solver::new(&self.model)?;
        let nib = |vars: &[VarId], k: usize| vars[4 * k..4 * k + 4].to_vec();
        let nibbles = self.inputs.len() / 4;
        let mut gin = Vec::new();
        let mut gout = Vec::new();
        for k in 0..nibbles {
            gin.push(solver.add_guarded_at_least_one(&nib(&self.inputs, k))?);
            gout.push(solver.add_guarded_at_least_one(&nib(&self.outputs, k))?);
        }
        self.configurations()
            .into_iter()
            .map(|(a, b)| {
                let r = solver.solve_assuming(&[], &[gin[a], gout[b]], budget)?;
                Ok(r.status == SolveStatus::Optimal)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::solve;
    use crate::polytope::convex_hull_hrep;

    /// Feasible 0/1 assignments of `vars` by enumerating every completion of the remaining variables.
    fn feasible_projection(model: &MilpModel, vars: &[VarId]) -> Vec<u32> {
        let others: Vec<usize> = (0..model.num_vars()).filter(|i| !vars.iter().any(|v| v.0 == *i)).collect();
        let mut out = Vec::new();
        for code in 0..1u32 << vars.len() {
            let bits = point_bits(code, vars.len());
            let mut values = vec![0i64; model.num_vars()];
            for (v, b) in vars.iter().zip(&bits) {
                values[v.0] = i64::from(*b);
            }
            let ranges: Vec<(i64, i64)> = others.iter().map(|&i| model.variables()[i].kind.bounds()).collect();
            let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            let found = loop {
                for (k, &i) in others.iter().enumerate() {
                    values[i] = cur[k];
                }
                if model.is_feasible(&values) {
                    break true;
                }
                let mut k = 0;
                while k < cur.len() && cur[k] == ranges[k].1 {
                    cur[k] = ranges[k].0;
                    k += 1;
                }
                if k == cur.len() {
                    break false;
                }
                cur[k] += 1;
            };
            if found {
                out.push(code);
            }
        }
        out
    }

    fn even_codes(vars: usize) -> Vec<u32> {
        (0..1u32 << vars).filter(|c| c.count_ones() % 2 == 0).collect()
    }

    fn gate_model(n: usize) -> (MilpModel, XorGate) {
        let mut m = MilpModel::new();
        let ins: Vec<VarId> = (0..n).map(|i| m.add_binary(&format!("y{}", i + 1)).unwrap()).collect();
        let out = m.add_binary("y0").unwrap();
        (m, XorGate::new(ins, out).unwrap())
    }

    #[test]
    fn ddt_rows_follow_parity() {
        let d = xor_ddt(4).unwrap();
        assert_eq!(d.row(0), &[16, 0]);
        assert_eq!(d.row(1), &[0, 16]);
        assert_eq!(d.row(3), &[16, 0]);
        let d = xor_ddt(2).unwrap();
        assert_eq!((d.get(0, 0), d.get(3, 0), d.get(1, 1), d.get(2, 1)), (4, 4, 4, 4));
        assert_eq!(xor_ddt(5).unwrap().row(31), &[0, 32]);
        assert!(xor_ddt(1).is_err());
        assert!(xor_ddt(9).is_err());
    }

    #[test]
    fn three_input_hull_cuts() {
        let set = xor_hull_model(3).unwrap();
        let lines: Vec<String> = set.iter().map(|q| q.to_line()).collect();
        let expected = [
            "1 1 1 -1 0",
            "1 1 -1 1 0",
            "1 -1 1 1 0",
            "1 -1 -1 -1 -2",
            "-1 1 1 1 0",
            "-1 1 -1 -1 -2",
            "-1 -1 1 -1 -2",
            "-1 -1 -1 1 -2",
        ];
        assert_eq!(lines, expected);
    }

    #[test]
    fn hull_cuts_are_the_hull_facets() {
        for n in 2..=5 {
            let vars = n + 1;
            let hull = convex_hull_hrep(&even_codes(vars), vars).unwrap();
            let mut facets: Vec<String> = hull
                .facets
                .iter()
                .filter(|q| q.coeffs().iter().filter(|&&c| c != 0).count() > 1)
                .map(|q| q.to_line())
                .collect();
            facets.sort();
            let mut ours: Vec<String> = xor_hull_model(n).unwrap().iter().map(|q| q.to_line()).collect();
            ours.sort();
            assert_eq!(facets, ours, "n={n}");
        }
    }

    #[test]
    fn both_styles_give_even_parity() {
        for n in 2..=7 {
            let set = xor_hull_model(n).unwrap();
            assert_eq!(set.len(), 1 << n);
            let sols: Vec<u32> = (0..1u32 << (n + 1)).filter(|&c| set.satisfied_by(c)).collect();
            assert_eq!(sols, even_codes(n + 1));

            let (mut m, g) = gate_model(n);
            let (d, _) = xor_parity_model(&g, &mut m).unwrap();
            assert_eq!((m.num_vars(), m.num_constraints()), (n + 2, 1));
            assert_eq!(m.variable(d).kind.bounds(), (0, n.div_ceil(2) as i64));
            assert_eq!(feasible_projection(&m, &g.vars()), even_codes(n + 1));
            assert!(xor_parity_model(&g, &mut m).is_err());

            let (mut m, g) = gate_model(n);
            xor_hull_constraints(&g, &mut m).unwrap();
            assert_eq!(m.num_constraints(), 1 << n);
            assert_eq!(feasible_projection(&m, &g.vars()), even_codes(n + 1));
        }
    }

    #[test]
    fn gate_validation() {
        let (m, _) = gate_model(2);
        let v = |i| m.var(&format!("y{i}")).unwrap();
        assert!(XorGate::new(vec![v(1)], v(0)).is_err());
        assert!(XorGate::new(vec![v(1), v(1)], v(0)).is_err());
        assert!(XorGate::new(vec![v(1), v(2)], v(1)).is_err());
    }

    #[test]
    fn word_xor_admits_all_ones() {
        let mut m = MilpModel::new();
        let [u, v, y] = ["u", "v", "y"].map(|n| m.add_binary(n).unwrap());
        word_xor_model(u, v, y, "d", &mut m).unwrap();
        let word = feasible_projection(&m, &[u, v, y]);
        let (mut p, g) = gate_model(2);
        xor_parity_model(&g, &mut p).unwrap();
        let parity = feasible_projection(&p, &g.vars());
        let extra: Vec<u32> = word.iter().copied().filter(|c| !parity.contains(c)).collect();
        assert_eq!(extra, vec![0b111]);
        assert!(parity.iter().all(|c| word.contains(c)));
    }

    #[test]
    fn midori_matrix_shape() {
        let m = BinaryMatrix::midori_mix_column();
        assert_eq!((m.rows(), m.cols()), (16, 16));
        assert!((0..16).all(|r| m.row_weight(r) == 3));
        assert_eq!(m.to_rows()[0], "0000100010001000");
        assert_eq!(m.to_rows()[5], "0100000001000100");
        let mut model = MilpModel::new();
        let x: Vec<VarId> = (0..64).map(|i| model.add_binary(&format!("x{i}")).unwrap()).collect();
        let y: Vec<VarId> = (0..64).map(|i| model.add_binary(&format!("y{i}")).unwrap()).collect();
        matrix_to_xor_layer(&m.block_diagonal(4), &x, &y, XorStyle::Hull, &mut model).unwrap();
        assert_eq!(model.num_constraints(), 512);
    }

    #[test]
    fn matrix_layer_matches_multiplication() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        use rand::{Rng, SeedableRng};
        let mat = loop {
            let bits: Vec<bool> = (0..64).map(|_| rng.gen_bool(0.5)).collect();
            let m = BinaryMatrix::new(8, 8, bits).unwrap();
            let images: std::collections::HashSet<Vec<bool>> =
                (0..256u32).map(|x| m.apply(&(0..8).map(|i| x >> (7 - i) & 1 == 1).collect::<Vec<_>>()).unwrap()).collect();
            if images.len() == 256 {
                break m;
            }
        };
        for style in [XorStyle::Hull, XorStyle::Parity] {
            let mut model = MilpModel::new();
            let x: Vec<VarId> = (0..8).map(|i| model.add_binary(&format!("x{i}")).unwrap()).collect();
            let y: Vec<VarId> = (0..8).map(|i| model.add_binary(&format!("y{i}")).unwrap()).collect();
            matrix_to_xor_layer(&mat, &x, &y, style, &mut model).unwrap();
            let mut solver = Solver::new(&model).unwrap();
            for code in 0..256u32 {
                let xb: Vec<bool> = (0..8).map(|i| code >> (7 - i) & 1 == 1).collect();
                let fixed: Vec<(VarId, bool)> = x.iter().copied().zip(xb.iter().copied()).collect();
                let r = solver.solve_assuming(&fixed, &[], Duration::from_secs(10)).unwrap();
                let got: Vec<bool> = y.iter().map(|&v| r.value(v) == Some(1)).collect();
                assert_eq!(got, mat.apply(&xb).unwrap());
            }
        }
    }

    #[test]
    fn inverse_and_expansion() {
        let m = BinaryMatrix::from_rows(&["0111", "1011", "1101", "1110"]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), BinaryMatrix::identity(4));
        assert!(BinaryMatrix::from_rows(&["11", "11"]).unwrap().inverse().is_none());
        assert_eq!(m.expand_words(4), BinaryMatrix::midori_mix_column());
    }

    #[test]
    fn identity_and_zero_rows() {
        let mut model = MilpModel::new();
        let x: Vec<VarId> = (0..3).map(|i| model.add_binary(&format!("x{i}")).unwrap()).collect();
        let y: Vec<VarId> = (0..3).map(|i| model.add_binary(&format!("y{i}")).unwrap()).collect();
        let m = BinaryMatrix::from_rows(&["100", "010", "000"]).unwrap();
        matrix_to_xor_layer(&m, &x, &y, XorStyle::Parity, &mut model).unwrap();
        let proj = feasible_projection(&model, &[x[0], x[1], x[2], y[0], y[1], y[2]]);
        let expected: Vec<u32> = (0..8u32).map(|v| v << 3 | (v & 0b110)).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        assert_eq!(proj, expected);
        assert!(matrix_to_xor_layer(&m, &x[..2], &y, XorStyle::Parity, &mut model).is_err());
        assert!(BinaryMatrix::from_rows(&["10", "1"]).is_err());
    }

    #[test]
    fn stress_network_counts_and_agreement() {
        let net = xor_stress_network(4, 200, 16, XorStyle::Parity).unwrap();
        assert_eq!(net.model.count_integer_vars(), 3200);
        assert_eq!(net.model.num_constraints(), 3200);
        for n in [3, 4] {
            let a = xor_stress_network(n, 40, 16, XorStyle::Parity).unwrap().solve_configurations(Duration::from_secs(60)).unwrap();
            let b = xor_stress_network(n, 40, 16, XorStyle::Hull).unwrap().solve_configurations(Duration::from_secs(60)).unwrap();
            assert_eq!(a.len(), 16);
            assert_eq!(a, b);
            // An even number of taps squares to zero after 16 rounds.
            assert!(a.iter().all(|&f| f == (n % 2 == 1)), "n={n}");
        }
    }

    #[test]
    fn solver_finds_single_gate_optimum() {
        let (mut m, g) = gate_model(3);
        xor_parity_model(&g, &mut m).unwrap();
        m.add_constraint([(g.output(), 1)], Sense::Ge, 1).unwrap();
        m.set_objective(g.inputs().iter().map(|&v| (v, 1))).unwrap();
        assert_eq!(solve(&m, Duration::from_secs(10)).unwrap().objective_value, Some(1));
    }
}
