//! Published result tables as printed, plus helpers to turn a printed row into a
//! search pattern. Klein and SKINNY64 rows are printed with the 64-bit state
//! reversed; GIFT64 and Lilliput rows are printed in state order.
#![allow(dead_code)]

use diffmilp::search::Pattern;

pub const GIFT64_R5: [(&str, &str); 31] = [
    ("000000000000000*", "0000000000-00000"),
    ("000000000000000*", "000000-000000000"),
    ("00000000000000*0", "00000000000000-0"),
    ("0000000000000*00", "00000000000000-0"),
    ("0000000000000*00", "00-0000000000000"),
    ("000000000000*000", "000000-000000000"),
    ("000000000000*000", "00-0000000000000"),
    ("00000000000*0000", "000000000-000000"),
    ("00000000000*0000", "00000-0000000000"),
    ("0000000000*00000", "0000000000000-00"),
    ("0000000000*00000", "000000000-000000"),
    ("000000000*000000", "0000000000000-00"),
    ("000000000*000000", "0-00000000000000"),
    ("00000000*0000000", "00000-0000000000"),
    ("00000000*0000000", "0-00000000000000"),
    ("0000000*00000000", "00000000-0000000"),
    ("0000000*00000000", "0000-00000000000"),
    ("000000*000000000", "000000000000-000"),
    ("000000*000000000", "00000000-0000000"),
    ("00000*0000000000", "000000000000-000"),
    ("00000*0000000000", "-000000000000000"),
    ("0000*00000000000", "0000-00000000000"),
    ("0000*00000000000", "-000000000000000"),
    ("000*000000000000", "00000000000-0000"),
    ("000*000000000000", "0000000-00000000"),
    ("00*0000000000000", "000000000000000-"),
    ("00*0000000000000", "00000000000-0000"),
    ("0*00000000000000", "000000000000000-"),
    ("0*00000000000000", "000-000000000000"),
    ("*000000000000000", "0000000-00000000"),
    ("*000000000000000", "000-000000000000"),
];

pub const SKINNY64_R11: [(&str, &str); 12] = [
    ("000*000000000000", "0000000-00000000"),
    ("000*000000000000", "000000-000000000"),
    ("000*000000000000", "0000-00000000000"),
    ("00*0000000000000", "0000000-00000000"),
    ("00*0000000000000", "000000-000000000"),
    ("00*0000000000000", "00000-0000000000"),
    ("0*00000000000000", "000000-000000000"),
    ("0*00000000000000", "00000-0000000000"),
    ("0*00000000000000", "0000-00000000000"),
    ("*000000000000000", "0000000-00000000"),
    ("*000000000000000", "00000-0000000000"),
    ("*000000000000000", "0000-00000000000"),
];

pub const LILLIPUT_R9: [(&str, &str); 35] = [
    ("0000000*00000000", "00000000000*0000"),
    ("000000*000000000", "000000000000000*"),
    ("000000*000000000", "00000000000000*0"),
    ("0000002000000000", "0000000000000200"),
    ("0000003000000000", "0000000000000300"),
    ("0000008000000000", "0000000000000800"),
    ("0000009000000000", "0000000000000900"),
    ("000000E000000000", "0000000000000E00"),
    ("000000F000000000", "0000000000000F00"),
    ("000000*000000000", "0000000000*00000"),
    ("00000*0000000000", "000000000000000*"),
    ("00000*0000000000", "00000000000000*0"),
    ("00000*0000000000", "0000000000000*00"),
    ("00000*0000000000", "0000000000*00000"),
    ("0000*00000000000", "000000000000000*"),
    ("0000*00000000000", "00000000000000*0"),
    ("0000700000000000", "0000000000000700"),
    ("0000E00000000000", "0000000000000E00"),
    ("0000*00000000000", "0000000000*00000"),
    ("000*000000000000", "000000000000000*"),
    ("0001000000000000", "0000000000000010"),
    ("0001000000000000", "0000000000000050"),
    ("0002000000000000", "0000000000000020"),
    ("0003000000000000", "0000000000000030"),
    ("0004000000000000", "0000000000000040"),
    ("0005000000000000", "0000000000000050"),
    ("0006000000000000", "0000000000000060"),
    ("0007000000000000", "0000000000000070"),
    ("0008000000000000", "0000000000000080"),
    ("0009000000000000", "0000000000000090"),
    ("000A000000000000", "00000000000000A0"),
    ("000B000000000000", "00000000000000B0"),
    ("000E000000000000", "00000000000000E0"),
    ("000F000000000000", "00000000000000F0"),
    ("000*000000000000", "0000000000*00000"),
];

/// Published 4-round equal-value table, printed with the state bit order reversed.
pub const KLEIN_R4: [(&str, &str); 40] = [
    ("0000000000000800", "0000000080000000"),
    ("0000000000000B00", "0000000B00000000"),
    ("0000000000000800", "8000000000000000"),
    ("0000000000003000", "0000030000000000"),
    ("0000000000007000", "0000000000000007"),
    ("0000000000008000", "0000000000000008"),
    ("0000000000008000", "0000080000000000"),
    ("0000000000009000", "0009000000000000"),
    ("000000000000B000", "000B000000000000"),
    ("000000000000E000", "000E000000000000"),
    ("0000000008000000", "0000000000008000"),
    ("0000000008000000", "0000800000000000"),
    ("000000000B000000", "000B000000000000"),
    ("0000000030000000", "0300000000000000"),
    ("0000000070000000", "0000000000070000"),
    ("0000000080000000", "0000000000080000"),
    ("0000000080000000", "0800000000000000"),
    ("0000000090000000", "0000000900000000"),
    ("00000000B0000000", "0000000B00000000"),
    ("00000000E0000000", "0000000E00000000"),
    ("0000080000000000", "0000000080000000"),
    ("0000080000000000", "8000000000000000"),
    ("00000B0000000000", "000000000000000B"),
    ("0000300000000000", "0000000000000300"),
    ("0000700000000000", "0000000700000000"),
    ("0000800000000000", "0000000000000800"),
    ("0000800000000000", "0000000800000000"),
    ("0000900000000000", "0000000000090000"),
    ("0000B00000000000", "00000000000B0000"),
    ("0000E00000000000", "00000000000E0000"),
    ("0800000000000000", "0000000000008000"),
    ("0800000000000000", "0000800000000000"),
    ("0B00000000000000", "00000000000B0000"),
    ("3000000000000000", "0000000003000000"),
    ("7000000000000000", "0007000000000000"),
    ("8000000000000000", "0000000008000000"),
    ("8000000000000000", "0008000000000000"),
    ("9000000000000000", "0000000000000009"),
    ("B000000000000000", "000000000000000B"),
    ("E000000000000000", "000000000000000E"),
];

/// Reverses the bit order of a 64-bit hex state; wildcard characters move with their nibble.
pub fn mirror(hex: &str) -> String {
    hex.chars()
        .rev()
        .map(|c| match c.to_digit(16) {
            Some(v) => {
                let r = (v & 1) << 3 | (v & 2) << 1 | (v & 4) >> 1 | (v & 8) >> 3;
                char::from_digit(r, 16).unwrap()
            }
            None => c,
        })
        .collect()
}

fn word(hex: &str) -> (usize, Option<u32>) {
    let i = hex.chars().position(|c| c != '0').expect("one active nibble");
    let c = hex.as_bytes()[i] as char;
    (i, c.to_digit(16))
}

/// Single-nibble pattern of a printed row in state order.
pub fn pattern(input: &str, output: &str) -> Pattern {
    let ((i, a), (j, b)) = (word(input), word(output));
    Pattern { in_word: i, out_word: j, in_value: a, out_value: b }
}

/// Single-nibble pattern of a row printed with the state reversed.
pub fn mirrored_pattern(input: &str, output: &str) -> Pattern {
    pattern(&mirror(input), &mirror(output))
}
