//! Round-function specifications.
//!
//! A spec is a JSON document:
//!
//! ```json
//! {
//!   "name": "toy",
//!   "state_bits": 8,
//!   "word_bits": 4,
//!   "mode": "bit",
//!   "sboxes": { "s": "c6901a2b385d4e7f" },
//!   "rounds": [[
//!     { "kind": "sbox", "sbox": "s", "groups": [[0,1,2,3],[4,5,6,7]] },
//!     { "kind": "pbox", "perm": [4,5,6,7,0,1,2,3] },
//!     { "kind": "linear", "matrix": ["1100","0110","0011","1001"], "inputs": [0,1,2,3], "outputs": [0,1,2,3] }
//!   ]],
//!   "repeat": true
//! }
//! ```
//!
//! Positions are bit indices in bit mode and word indices in word mode; index 0
//! is the most significant (leftmost in hex). Every layer reads the state as it
//! was before the layer and then writes:
//!
//! - `sbox`: each group is one SBox input (MSB first). Its output replaces the
//!   group, or goes to `targets` when given; with `"combine": "xor"` it is XORed
//!   into the destination instead. In word mode groups are single words and the
//!   table is not needed.
//! - `pbox`: the value at position `i` moves to `perm[i]`.
//! - `linear`: `outputs = matrix * inputs` over GF(2) (again `"combine": "xor"`
//!   XORs into the outputs). In word mode a layer may instead name a branch
//!   number from `word_branch_numbers`.
//!
//! `rounds` lists round templates; with `repeat` (the default) round `i` uses
//! template `i mod len`, otherwise at most `len` rounds exist. Sbox tables are hex
//! strings (one digit per entry when there are no separators) or `{"file": path}`
//! relative to the spec file. Key additions are omitted: they carry no difference.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::linear::BinaryMatrix;
use crate::sbox::SBoxTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bit,
    Word,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    #[default]
    Assign,
    Xor,
}

impl Combine {
    fn is_assign(&self) -> bool {
        *self == Combine::Assign
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SboxSource {
    Hex(String),
    File { file: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Layer {
    Sbox {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sbox: Option<String>,
        groups: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        targets: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Combine::is_assign")]
        combine: Combine,
    },
    Pbox {
        perm: Vec<usize>,
    },
    Linear {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        branch: Option<String>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        #[serde(default, skip_serializing_if = "Combine::is_assign")]
        combine: Combine,
    },
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CipherSpec {
    pub name: String,
    pub state_bits: usize,
    pub word_bits: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sboxes: BTreeMap<String, SboxSource>,
    pub rounds: Vec<Vec<Layer>>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub repeat: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_branch_numbers: Option<BTreeMap<String, u32>>,
    #[serde(skip)]
    tables: BTreeMap<String, SBoxTable>,
}

impl CipherSpec {
    /// Parses and validates; file references resolve against the working directory.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_in(text, None)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_in(&text, path.parent())
    }

    fn parse_in(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut spec: CipherSpec = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.resolve(base)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Indented JSON with arrays of scalars kept on one line.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("serializable");
        let mut out = String::new();
        write_json(&value, 0, &mut out);
        out.push('\n');
        out
    }

    fn resolve(&mut self, base: Option<&Path>) -> Result<()> {
        self.tables.clear();
        for (name, src) in &self.sboxes {
            let table = match src {
                SboxSource::Hex(h) => parse_hex_table(h)?,
                SboxSource::File { file } => {
                    let path = base.map_or_else(|| Path::new(file).to_path_buf(), |b| b.join(file));
                    SBoxTable::parse(&std::fs::read_to_string(&path)?)?
                }
            };
            self.tables.insert(name.clone(), table);
        }
        Ok(())
    }

    pub fn sbox_table(&self, name: &str) -> Option<&SBoxTable> {
        self.tables.get(name)
    }

    pub fn words(&self) -> usize {
        self.state_bits / self.word_bits
    }

    /// Number of addressable positions: bits in bit mode, words in word mode.
    pub fn positions(&self) -> usize {
        match self.mode {
            Mode::Bit => self.state_bits,
            Mode::Word => self.words(),
        }
    }

    pub fn round_layers(&self, round: usize) -> Result<&[Layer]> {
        if self.rounds.is_empty() {
            return Err(Error::Spec("spec has no rounds".into()));
        }
        if !self.repeat && round >= self.rounds.len() {
            return Err(Error::Spec(format!("{} defines only {} rounds", self.name, self.rounds.len())));
        }
        Ok(&self.rounds[round % self.rounds.len()])
    }

    pub fn sboxes_per_round(&self, round: usize) -> Result<usize> {
        Ok(self
            .round_layers(round)?
            .iter()
            .map(|l| match l {
                Layer::Sbox { groups, .. } => groups.len(),
                _ => 0,
            })
            .sum())
    }

    pub fn branch_number(&self, name: &str) -> Option<u32> {
        self.word_branch_numbers.as_ref()?.get(name).copied()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Spec(format!("{}: {m}", self.name)));
        if self.word_bits == 0 || self.state_bits == 0 || !self.state_bits.is_multiple_of(self.word_bits) {
            return err(format!("state_bits {} not divisible by word_bits {}", self.state_bits, self.word_bits));
        }
        if self.rounds.is_empty() {
            return err("no rounds".into());
        }
        let n = self.positions();
        let in_range = |v: &[usize]| v.iter().all(|&p| p < n);
        let distinct = |v: &[usize]| {
            let mut s = v.to_vec();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        };
        for (r, round) in self.rounds.iter().enumerate() {
            for (l, layer) in round.iter().enumerate() {
                let at = format!("round {r} layer {l}");
                match layer {
                    Layer::Sbox { sbox, groups, targets, .. } => {
                        let (q, out) = match (self.mode, sbox) {
                            (Mode::Bit, None) => return err(format!("{at}: bit-mode sbox layer needs a table")),
                            (_, Some(name)) => match self.tables.get(name) {
                                Some(t) if self.mode == Mode::Bit => (t.in_bits() as usize, t.out_bits() as usize),
                                Some(_) => (1, 1),
                                None => return err(format!("{at}: unknown sbox {name:?}")),
                            },
                            (Mode::Word, None) => (1, 1),
                        };
                        let flat: Vec<usize> = groups.iter().flatten().copied().collect();
                        if groups.iter().any(|g| g.len() != q) || !in_range(&flat) || !distinct(&flat) {
                            return err(format!("{at}: sbox groups must be disjoint, in range and {q} wide"));
                        }
                        if let Some(t) = targets {
                            let flat: Vec<usize> = t.iter().flatten().copied().collect();
                            if t.len() != groups.len() || t.iter().any(|g| g.len() != out) || !in_range(&flat) || !distinct(&flat) {
                                return err(format!("{at}: sbox targets must match groups and be {out} wide"));
                            }
                        } else if out != q {
                            return err(format!("{at}: in-place sbox needs equal input and output widths"));
                        }
                    }
                    Layer::Pbox { perm } => {
                        if perm.len() != n || !in_range(perm) || !distinct(perm) {
                            return err(format!("{at}: pbox is not a permutation of 0..{n}"));
                        }
                    }
                    Layer::Linear { matrix, branch, inputs, outputs, .. } => {
                        if !in_range(inputs) || !distinct(inputs) || !in_range(outputs) || !distinct(outputs) {
                            return err(format!("{at}: linear inputs/outputs must be distinct and in range"));
                        }
                        match (matrix, branch) {
                            (Some(rows), None) => {
                                let m = BinaryMatrix::from_rows(rows)?;
                                if m.rows() != outputs.len() || m.cols() != inputs.len() {
                                    return err(format!(
                                        "{at}: matrix is {}x{} for {} outputs and {} inputs",
                                        m.rows(),
                                        m.cols(),
                                        outputs.len(),
                                        inputs.len()
                                    ));
                                }
                            }
                            (None, Some(b)) => {
                                if self.mode != Mode::Word {
                                    return err(format!("{at}: branch-number layers are word mode only"));
                                }
                                if self.branch_number(b).is_none() {
                                    return err(format!("{at}: unknown branch number {b:?}"));
                                }
                            }
                            _ => return err(format!("{at}: linear layer needs exactly one of matrix or branch")),
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn write_json(v: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if items.iter().all(|i| !i.is_array() && !i.is_object()) => {
            out.push_str(&serde_json::to_string(v).expect("scalar array"));
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push_str(": ");
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalar")),
    }
}

fn parse_hex_table(text: &str) -> Result<SBoxTable> {
    let t = text.trim();
    if t.contains(|c: char| c.is_whitespace() || c == ',') {
        return SBoxTable::parse(t);
    }
    let entries = t
        .chars()
        .map(|c| c.to_digit(16).map(|d| d as u8).ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}"))))
        .collect::<Result<Vec<u8>>>()?;
    SBoxTable::from_entries(&entries)
}

fn hex_table(t: &SBoxTable) -> String {
    if t.out_bits() <= 4 {
        t.table().iter().map(|&v| char::from_digit(u32::from(v), 16).expect("nibble")).collect()
    } else {
        t.table().iter().map(|v| format!("{v:02x}")).collect::<Vec<_>>().join(" ")
    }
}

/// Bit positions of word `w` (MSB first).
fn word_bits(w: usize, n: usize) -> Vec<usize> {
    (w * n..(w + 1) * n).collect()
}

/// Expands a word-level destination permutation to bits.
fn expand_perm(words: &[usize], n: usize) -> Vec<usize> {
    let mut perm = vec![0; words.len() * n];
    for (w, &to) in words.iter().enumerate() {
        for b in 0..n {
            perm[w * n + b] = to * n + b;
        }
    }
    perm
}

/// Destination permutation from a gather table `new[i] = old[src[i]]`.
fn from_gather(src: &[usize]) -> Vec<usize> {
    let mut perm = vec![0; src.len()];
    for (i, &s) in src.iter().enumerate() {
        perm[s] = i;
    }
    perm
}

fn nibble_sbox_layer(name: &str, words: usize) -> Layer {
    Layer::Sbox { sbox: Some(name.into()), groups: (0..words).map(|w| word_bits(w, 4)).collect(), targets: None, combine: Combine::Assign }
}

fn linear(m: &BinaryMatrix, inputs: Vec<usize>, outputs: Vec<usize>, combine: Combine) -> Layer {
    Layer::Linear { matrix: Some(m.to_rows()), branch: None, inputs, outputs, combine }
}

fn bit_spec(name: &str, sboxes: &[&str], rounds: Vec<Vec<Layer>>) -> CipherSpec {
    let mut spec = CipherSpec {
        name: name.into(),
        state_bits: 64,
        word_bits: 4,
        mode: Mode::Bit,
        sboxes: sboxes
            .iter()
            .map(|s| {
                let t = catalog::sbox(s).expect("catalog sbox");
                (s.to_string(), SboxSource::Hex(hex_table(&t)))
            })
            .collect(),
        rounds,
        repeat: true,
        word_branch_numbers: None,
        tables: BTreeMap::new(),
    };
    spec.resolve(None).expect("inline tables");
    spec.validate().expect("builtin spec is valid");
    spec
}

/// GIFT-64: SubCells then PermBits (bit `i`, counted from the LSB, moves to `P(i)`).
fn gift64() -> CipherSpec {
    let mut perm = vec![0; 64];
    for i in 0..64 {
        let p = 4 * (i / 16) + 16 * ((3 * ((i % 16) / 4) + (i % 4)) % 4) + (i % 4);
        perm[63 - i] = 63 - p;
    }
    bit_spec("gift64", &["gift"], vec![vec![nibble_sbox_layer("gift", 16), Layer::Pbox { perm }]])
}

/// Per-column expansion of a 4x4 cell matrix acting on cells `cols[c] + 4 r`.
fn column_layers(cell_matrix: &BinaryMatrix, column_cells: impl Fn(usize) -> [usize; 4]) -> Vec<Layer> {
    let m = cell_matrix.expand_words(4);
    (0..4)
        .map(|c| {
            let bits: Vec<usize> = column_cells(c).iter().flat_map(|&w| word_bits(w, 4)).collect();
            linear(&m, bits.clone(), bits, Combine::Assign)
        })
        .collect()
}

/// SKINNY-64: SubCells, ShiftRows, MixColumns on a row-major 4x4 nibble state.
fn skinny64() -> CipherSpec {
    let shift = [0, 1, 2, 3, 7, 4, 5, 6, 10, 11, 8, 9, 13, 14, 15, 12];
    let mc = BinaryMatrix::from_rows(&["1011", "1000", "0110", "1010"]).expect("matrix");
    let mut round = vec![nibble_sbox_layer("skinny", 16), Layer::Pbox { perm: expand_perm(&from_gather(&shift), 4) }];
    round.extend(column_layers(&mc, |c| [c, 4 + c, 8 + c, 12 + c]));
    bit_spec("skinny64", &["skinny"], vec![round])
}

/// Midori64: SubCell, ShuffleCell, MixColumn on a column-major 4x4 nibble state.
fn midori64() -> CipherSpec {
    let shuffle = [0, 10, 5, 15, 14, 4, 11, 1, 9, 3, 12, 6, 7, 13, 2, 8];
    let mc = BinaryMatrix::from_rows(&["0111", "1011", "1101", "1110"]).expect("matrix");
    let mut round = vec![nibble_sbox_layer("midori_s0", 16), Layer::Pbox { perm: expand_perm(&from_gather(&shuffle), 4) }];
    round.extend(column_layers(&mc, |c| [4 * c, 4 * c + 1, 4 * c + 2, 4 * c + 3]));
    bit_spec("midori64", &["midori_s0"], vec![round])
}

fn gf256_mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0;
    while b != 0 {
        if b & 1 == 1 {
            p ^= a;
        }
        let hi = a & 0x80;
        a <<= 1;
        if hi != 0 {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    p
}

/// Binary form of the AES column mix on 4 bytes, MSB-first bits.
pub fn aes_mix_column_matrix() -> BinaryMatrix {
    let coef = [[2u8, 3, 1, 1], [1, 2, 3, 1], [1, 1, 2, 3], [3, 1, 1, 2]];
    let mut bits = vec![false; 32 * 32];
    for (r, row) in coef.iter().enumerate() {
        for (c, &k) in row.iter().enumerate() {
            for j in 0..8 {
                let img = gf256_mul(k, 0x80 >> j);
                for i in 0..8 {
                    bits[(r * 8 + i) * 32 + c * 8 + j] = img & (0x80 >> i) != 0;
                }
            }
        }
    }
    BinaryMatrix::new(32, 32, bits).expect("32x32")
}

/// KLEIN-64: SubNibbles, RotateNibbles (two bytes left), MixNibbles (AES column mix on each half).
fn klein() -> CipherSpec {
    let rotate: Vec<usize> = (0..16).map(|i| (i + 12) % 16).collect();
    let m = aes_mix_column_matrix();
    let half = |h: usize| -> Vec<usize> { (32 * h..32 * h + 32).collect() };
    let round = vec![
        nibble_sbox_layer("klein", 16),
        Layer::Pbox { perm: expand_perm(&rotate, 4) },
        linear(&m, half(0), half(0), Combine::Assign),
        linear(&m, half(1), half(1), Combine::Assign),
    ];
    bit_spec("klein", &["klein"], vec![round])
}

/// Lilliput: nibble `X_j` is hex digit `15 - j`. `X_{15-j} ^= S(X_j)` for `j < 8`,
/// then `X_{15-j} ^= X_7` (`1 <= j <= 6`) and `X_15 ^= X_7 ^ .. ^ X_1`, then `Y_{pi(i)} = X_i`.
fn lilliput() -> CipherSpec {
    let w = |j: usize| 15 - j;
    let sboxes = Layer::Sbox {
        sbox: Some("lilliput".into()),
        groups: (0..8).map(|j| word_bits(w(j), 4)).collect(),
        targets: Some((0..8).map(|j| word_bits(w(15 - j), 4)).collect()),
        combine: Combine::Xor,
    };
    // Outputs X_15..X_9, inputs X_7..X_1.
    let mut rows = vec!["1111111".to_string()];
    rows.extend((1..=6).map(|_| "1000000".to_string()));
    let m = BinaryMatrix::from_rows(&rows).expect("matrix").expand_words(4);
    let outputs: Vec<usize> = (0..7).flat_map(|j| word_bits(w(15 - j), 4)).collect();
    let inputs: Vec<usize> = (1..=7).rev().flat_map(|j| word_bits(w(j), 4)).collect();
    let pi = [13, 9, 14, 8, 10, 11, 12, 15, 4, 5, 3, 1, 2, 6, 0, 7];
    let mut words = vec![0; 16];
    for (i, &p) in pi.iter().enumerate() {
        words[w(i)] = w(p);
    }
    let round = vec![sboxes, linear(&m, inputs, outputs, Combine::Xor), Layer::Pbox { perm: expand_perm(&words, 4) }];
    bit_spec("lilliput", &["lilliput"], vec![round])
}

/// MIBS nibble-level mixing followed by its nibble permutation, as one 8x8 word matrix.
fn mibs_f_matrix() -> BinaryMatrix {
    let mix = BinaryMatrix::from_rows(&[
        "11011011", "01111110", "11101101", "01110011", "10111001", "11011100", "11100110", "10110111",
    ])
    .expect("matrix");
    let perm = [2, 3, 0, 1, 4, 6, 7, 5];
    let mut p = vec![false; 64];
    for (i, &to) in perm.iter().enumerate() {
        p[to * 8 + i] = true;
    }
    BinaryMatrix::new(8, 8, p).expect("8x8").mul(&mix).expect("square")
}

/// MIBS: `(L, R) -> (R ^ F(L), L)` with `F = P . S`. The SBox outputs are XORed into
/// `P^-1 R`, then `P` is applied, which equals `R ^ P(S(L))`.
fn mibs() -> CipherSpec {
    let f = mibs_f_matrix().expand_words(4);
    let f_inv = f.inverse().expect("MIBS mixing is invertible");
    let right: Vec<usize> = (32..64).collect();
    let sboxes = Layer::Sbox {
        sbox: Some("mibs".into()),
        groups: (0..8).map(|w| word_bits(w, 4)).collect(),
        targets: Some((8..16).map(|w| word_bits(w, 4)).collect()),
        combine: Combine::Xor,
    };
    let swap: Vec<usize> = (0..64).map(|i| (i + 32) % 64).collect();
    let round = vec![
        linear(&f_inv, right.clone(), right.clone(), Combine::Assign),
        sboxes,
        linear(&f, right.clone(), right, Combine::Assign),
        Layer::Pbox { perm: swap },
    ];
    bit_spec("mibs", &["mibs"], vec![round])
}

/// AES at word level: SubBytes, ShiftRows, MixColumns with branch number 5.
fn aes_word() -> CipherSpec {
    let shift: Vec<usize> = (0..16).map(|i| (i % 4) + 4 * ((i / 4 + i % 4) % 4)).collect();
    let mut round = vec![
        Layer::Sbox { sbox: None, groups: (0..16).map(|w| vec![w]).collect(), targets: None, combine: Combine::Assign },
        Layer::Pbox { perm: from_gather(&shift) },
    ];
    for c in 0..4 {
        let cells: Vec<usize> = (4 * c..4 * c + 4).collect();
        round.push(Layer::Linear { matrix: None, branch: Some("mix_columns".into()), inputs: cells.clone(), outputs: cells, combine: Combine::Assign });
    }
    let mut spec = CipherSpec {
        name: "aes_word".into(),
        state_bits: 128,
        word_bits: 8,
        mode: Mode::Word,
        sboxes: BTreeMap::new(),
        rounds: vec![round],
        repeat: true,
        word_branch_numbers: Some(BTreeMap::from([("mix_columns".to_string(), 5)])),
        tables: BTreeMap::new(),
    };
    spec.resolve(None).expect("no tables");
    spec.validate().expect("builtin spec is valid");
    spec
}

pub const BUILTIN_NAMES: [&str; 7] = ["aes_word", "gift64", "klein", "lilliput", "mibs", "midori64", "skinny64"];

pub fn builtin_specs() -> BTreeMap<String, CipherSpec> {
    [aes_word(), gift64(), klein(), lilliput(), mibs(), midori64(), skinny64()].into_iter().map(|s| (s.name.clone(), s)).collect()
}

pub fn builtin_spec(name: &str) -> Option<CipherSpec> {
    match name {
        "aes_word" => Some(aes_word()),
        "gift64" => Some(gift64()),
        "klein" => Some(klein()),
        "lilliput" => Some(lilliput()),
        "mibs" => Some(mibs()),
        "midori64" => Some(midori64()),
        "skinny64" => Some(skinny64()),
        _ => None,
    }
}

/// A bundled name or a path to a JSON spec.
pub fn load_spec(name_or_path: &str) -> Result<CipherSpec> {
    match builtin_spec(name_or_path) {
        Some(s) => Ok(s),
        None => CipherSpec::load(Path::new(name_or_path)),
    }
}
