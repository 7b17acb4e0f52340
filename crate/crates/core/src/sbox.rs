//! SBox tables, difference distribution tables and transition point sets.
//!
//! A transition point for a `q x r` SBox is the bit-vector
//! `(x_{q-1}, .., x_0, y_{r-1}, .., y_0)`. It is stored as the integer code
//! `(dx << r) | dy`, so vector index 0 is the most significant bit of the code
//! and sorting codes sorts the vectors lexicographically.

use crate::error::{Error, Result};

pub const MAX_WIDTH: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SBoxTable {
    in_bits: u32,
    out_bits: u32,
    table: Vec<u8>,
    bijective: bool,
}

impl SBoxTable {
    pub fn new(in_bits: u32, out_bits: u32, table: Vec<u8>) -> Result<Self> {
        if !(1..=MAX_WIDTH).contains(&in_bits) || !(1..=MAX_WIDTH).contains(&out_bits) {
            return Err(Error::InvalidSbox(format!(
                "widths {in_bits}x{out_bits} outside 1..={MAX_WIDTH}"
            )));
        }
        if table.len() != 1 << in_bits {
            return Err(Error::InvalidSbox(format!(
                "expected {} entries, got {}",
                1usize << in_bits,
                table.len()
            )));
        }
        if let Some((i, v)) = table.iter().enumerate().find(|(_, &v)| u32::from(v) >= 1 << out_bits) {
            return Err(Error::InvalidSbox(format!("entry {i} = {v:#x} exceeds {out_bits} bits")));
        }
        let bijective = in_bits == out_bits && {
            let mut seen = vec![false; table.len()];
            table.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
        };
        Ok(SBoxTable { in_bits, out_bits, table, bijective })
    }

    /// Square table whose width is inferred from its length.
    pub fn from_entries(entries: &[u8]) -> Result<Self> {
        let n = entries.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidSbox(format!("entry count {n} is not a power of two")));
        }
        let in_bits = n.trailing_zeros();
        let max = entries.iter().copied().max().unwrap_or(0) as u32;
        let out_bits = if max < 1 << in_bits { in_bits } else { 32 - max.leading_zeros() };
        SBoxTable::new(in_bits, out_bits, entries.to_vec())
    }

    /// Parses whitespace-separated hex entries (`0x` prefixes and `#` comments allowed).
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                let digits = tok.trim_start_matches("0x").trim_start_matches("0X");
                let v = u32::from_str_radix(digits, 16)
                    .map_err(|_| Error::Parse(format!("non-hex token {tok:?}")))?;
                if v > 0xff {
                    return Err(Error::InvalidSbox(format!("entry {tok} exceeds 8 bits")));
                }
                entries.push(v as u8);
            }
        }
        SBoxTable::from_entries(&entries)
    }

    pub fn to_text(&self) -> String {
        let width = self.out_bits.div_ceil(4) as usize;
        let cells: Vec<String> = self.table.iter().map(|v| format!("{v:0width$x}")).collect();
        let mut out = String::new();
        for chunk in cells.chunks(16) {
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn is_bijective(&self) -> bool {
        self.bijective
    }

    pub fn apply(&self, x: u32) -> u32 {
        u32::from(self.table[x as usize])
    }

    pub fn ddt(&self) -> Ddt {
        compute_ddt(self)
    }
}

/// Difference distribution table stored row-major, rows indexed by input difference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ddt {
    in_bits: u32,
    out_bits: u32,
    counts: Vec<u32>,
}

pub fn compute_ddt(s: &SBoxTable) -> Ddt {
    let rows = 1usize << s.in_bits;
    let cols = 1usize << s.out_bits;
    let mut counts = vec![0u32; rows * cols];
    for dx in 0..rows {
        for x in 0..rows {
            let dy = (s.table[x] ^ s.table[x ^ dx]) as usize;
            counts[dx * cols + dy] += 1;
        }
    }
    Ddt { in_bits: s.in_bits, out_bits: s.out_bits, counts }
}

impl Ddt {
    /// Builds a table from raw counts after checking the row invariants.
    pub fn from_counts(in_bits: u32, out_bits: u32, counts: Vec<u32>) -> Result<Self> {
        if in_bits == 0 || in_bits > MAX_WIDTH || out_bits == 0 || out_bits > MAX_WIDTH {
            return Err(Error::InvalidDdt(format!("widths {in_bits}x{out_bits} unsupported")));
        }
        let rows = 1usize << in_bits;
        let cols = 1usize << out_bits;
        if counts.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: counts.len() });
        }
        let total = rows as u64;
        for (r, row) in counts.chunks(cols).enumerate() {
            let sum: u64 = row.iter().map(|&c| u64::from(c)).sum();
            if sum != total {
                return Err(Error::InvalidDdt(format!("row {r} sums to {sum}, expected {total}")));
            }
        }
        if counts[0] as u64 != total {
            return Err(Error::InvalidDdt("row 0 must be concentrated on column 0".into()));
        }
        Ok(Ddt { in_bits, out_bits, counts })
    }

    /// Parses `2^q` lines of `2^r` decimal counts.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u32>().map_err(|_| Error::Parse(format!("bad count {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n_rows = rows.len();
        if n_rows < 2 || !n_rows.is_power_of_two() {
            return Err(Error::InvalidDdt(format!("row count {n_rows} is not a power of two")));
        }
        let n_cols = rows[0].len();
        if n_cols < 2 || !n_cols.is_power_of_two() {
            return Err(Error::InvalidDdt(format!("column count {n_cols} is not a power of two")));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch { expected: n_cols, got: bad.len() });
        }
        let counts = rows.into_iter().flatten().collect();
        Ddt::from_counts(n_rows.trailing_zeros(), n_cols.trailing_zeros(), counts)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.counts.chunks(self.cols()) {
            let cells: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn rows(&self) -> usize {
        1 << self.in_bits
    }

    pub fn cols(&self) -> usize {
        1 << self.out_bits
    }

    pub fn get(&self, dx: usize, dy: usize) -> u32 {
        self.counts[dx * self.cols() + dy]
    }

    pub fn row(&self, dx: usize) -> &[u32] {
        let c = self.cols();
        &self.counts[dx * c..(dx + 1) * c]
    }

    /// Largest non-trivial entry, the numerator of the maximum differential probability.
    pub fn max_entry(&self) -> u32 {
        (1..self.rows()).flat_map(|dx| self.row(dx).iter().copied()).max().unwrap_or(0)
    }

    pub fn transitions(&self) -> TransitionSet {
        transition_sets(self)
    }
}

/// Partition of `{0,1}^(q+r)` into DDT-possible and impossible transition points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSet {
    in_bits: u32,
    out_bits: u32,
    possible: Vec<u32>,
    impossible: Vec<u32>,
}

pub fn transition_sets(d: &Ddt) -> TransitionSet {
    let mut possible = Vec::new();
    let mut impossible = Vec::new();
    for code in 0..(d.rows() * d.cols()) as u32 {
        if d.counts[code as usize] > 0 {
            possible.push(code);
        } else {
            impossible.push(code);
        }
    }
    TransitionSet { in_bits: d.in_bits, out_bits: d.out_bits, possible, impossible }
}

impl TransitionSet {
    /// Builds the partition from an explicit possible set; every other point is impossible.
    pub fn from_possible(in_bits: u32, out_bits: u32, possible: &[u32]) -> Result<Self> {
        let dim = in_bits + out_bits;
        if dim > 24 {
            return Err(Error::DimensionOverflow(dim as usize, 24));
        }
        let mut mark = vec![false; 1 << dim];
        for &p in possible {
            if p >= 1 << dim {
                return Err(Error::Invalid(format!("point {p:#x} outside dimension {dim}")));
            }
            mark[p as usize] = true;
        }
        let (possible, impossible): (Vec<u32>, Vec<u32>) = (0..1u32 << dim).partition(|&c| mark[c as usize]);
        Ok(TransitionSet { in_bits, out_bits, possible, impossible })
    }

    pub fn dim(&self) -> usize {
        (self.in_bits + self.out_bits) as usize
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn possible(&self) -> &[u32] {
        &self.possible
    }

    pub fn impossible(&self) -> &[u32] {
        &self.impossible
    }

    pub fn is_possible(&self, code: u32) -> bool {
        self.possible.binary_search(&code).is_ok()
    }

    pub fn split(&self, code: u32) -> (u32, u32) {
        (code >> self.out_bits, code & ((1 << self.out_bits) - 1))
    }

    pub fn join(&self, dx: u32, dy: u32) -> u32 {
        (dx << self.out_bits) | dy
    }
}

/// Expands a point code into its bit-vector in the shared MSB-first order.
pub fn point_bits(code: u32, dim: usize) -> Vec<u8> {
    (0..dim).map(|i| ((code >> (dim - 1 - i)) & 1) as u8).collect()
}

/// Inverse of [`point_bits`].
pub fn point_code(bits: &[u8]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b & 1))
}
