//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The process fails only on an
//! unexpected FAIL; criteria listed in `EXPECTED_FAIL` are reported but tolerated,
//! and a note is printed if one of them starts passing.
//!
//! Checks that need the optional `highspy` Python module are skipped when it is
//! missing. The deep optimization checks (GIFT64 r=9, SKINNY64 r=7) take a long
//! time even with an external optimizer; set `DIFFMILP_DEEP=1` to run them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use diffmilp::catalog;
use diffmilp::linear::{add_xor, xor_hull_model, xor_parity_model, xor_stress_network, XorGate, XorStyle};
use diffmilp::milp::{export_lp, MilpModel, SolveStatus, Solver, VarId};
use diffmilp::modelgen::{generate_model, ModelOptions};
use diffmilp::polytope::{convex_hull_hrep, InequalitySet};
use diffmilp::reduction::{
    exact_reduce, greedy_random_runs, reduce, subset_addition_reduce, verify_exact_model, GoodType, Method, ReduceOptions,
};
use diffmilp::sbox::{SBoxTable, TransitionSet};
use diffmilp::search::{
    pattern_model, pattern_witness, search_impossible, search_patterns, Granularity, Pattern, SearchQuery, Verdict,
};
use diffmilp::set_cover::{solve_exact, CoverInstance};
use diffmilp::spec::builtin_spec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{mirror, mirrored_pattern, pattern, GIFT64_R5, KLEIN_R4, LILLIPUT_R9, SKINNY64_R11};

/// 7x: SKINNY64 r=7 has a trail with 26 active SBoxes (tests/skinny_oracle.rs),
/// so a minimum of 27 cannot be reached.
/// 8b: Klein r=4 proves 48 pairs, 16 of them listed; the other 24 listed pairs
/// have trails accepted by an independent round implementation.
const EXPECTED_FAIL: &[&str] = &["7x", "8b"];

const HULL_LIMIT_4BIT: Duration = Duration::from_secs(60);
const HULL_LIMIT_ASCON: Duration = Duration::from_secs(30 * 60);
const EXACT_LIMIT: Duration = Duration::from_secs(10 * 60);
const SUBSET_LIMIT: Duration = Duration::from_secs(30 * 60);
const SWEEP_BUDGET: Duration = Duration::from_secs(60);
const SOLVE_LIMIT: Duration = Duration::from_secs(30 * 60);
const IMPOSSIBLE_LIMIT: Duration = Duration::from_secs(4 * 3600);
const HIGHS_LIMIT: f64 = 600.0;
const BUILTIN_LIMIT: Duration = Duration::from_secs(600);
const RANDOM_GREEDY_SEED: u64 = 7;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
    Skip,
}

struct Suite {
    lines: Vec<(String, Outcome)>,
}

impl Suite {
    fn report(&mut self, id: &str, outcome: Outcome, detail: String) {
        let tag = match outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail if EXPECTED_FAIL.contains(&id) => "FAIL (expected)",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        println!("{tag:<16}{id:<5}{detail}");
        self.lines.push((id.to_string(), outcome));
    }

    fn check(&mut self, id: &str, ok: bool, detail: String) {
        self.report(id, if ok { Outcome::Pass } else { Outcome::Fail }, detail);
    }

    fn note(&self, text: &str) {
        println!("{:<16}{text}", "NOTE");
    }
}

fn table(name: &str) -> SBoxTable {
    catalog::sbox(name).unwrap_or_else(|| panic!("bundled sbox {name}"))
}

fn transitions(name: &str) -> TransitionSet {
    table(name).ddt().transitions()
}

/// Possible (dx, dy) codes straight from the lookup table.
fn possible_codes(s: &SBoxTable) -> BTreeSet<u32> {
    let (n, m) = (s.in_bits(), s.out_bits());
    let t = s.table();
    let mut out = BTreeSet::new();
    for x in 0..1u32 << n {
        for dx in 0..1u32 << n {
            let dy = u32::from(t[x as usize] ^ t[(x ^ dx) as usize]);
            out.insert(dx << m | dy);
        }
    }
    out
}

/// 0/1 points of `set` by direct evaluation, MSB-first bit order.
fn feasible_codes(set: &InequalitySet) -> BTreeSet<u32> {
    let d = set.dim();
    (0..1u32 << d)
        .filter(|&c| {
            set.iter().all(|q| {
                let lhs: i64 = q.coeffs().iter().enumerate().map(|(i, &a)| a * i64::from(c >> (d - 1 - i) & 1)).sum();
                lhs >= q.rhs()
            })
        })
        .collect()
}

fn is_exact(set: &InequalitySet, s: &SBoxTable) -> bool {
    feasible_codes(set) == possible_codes(s)
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn hull_counts(suite: &mut Suite) {
    let expected = [
        ("gift", 237),
        ("present", 327),
        ("mibs", 378),
        ("piccolo", 202),
        ("lblock_s0", 205),
        ("lilliput", 324),
        ("ascon", 2415),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, want) in expected {
        let t = transitions(name);
        let start = Instant::now();
        let hull = convex_hull_hrep(t.possible(), t.dim()).expect("hull");
        let took = start.elapsed();
        let limit = if name == "ascon" { HULL_LIMIT_ASCON } else { HULL_LIMIT_4BIT };
        let got = hull.facets.len();
        let good = got == want && hull.equalities.is_empty() && took <= limit && is_exact(&hull.inequalities(), &table(name));
        ok &= good;
        parts.push(format!("{name} {got}/{want} {}", secs(took)));
    }
    suite.check("1", ok, format!("hull facets: {}", parts.join(", ")));
}

fn exact_reduction(suite: &mut Suite) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, want) in [("present", 21), ("klein", 21), ("mibs", 23), ("twine", 23)] {
        let t = transitions(name);
        let hull = convex_hull_hrep(t.possible(), t.dim()).expect("hull").inequalities();
        let start = Instant::now();
        let r = exact_reduce(&hull, t.impossible(), EXACT_LIMIT).expect("exact reduce");
        let took = start.elapsed();
        let good = r.optimal && r.size() == want && took <= EXACT_LIMIT && is_exact(&r.chosen, &table(name));
        ok &= good;
        parts.push(format!("{name} {}/{want}{} {}", r.size(), if r.optimal { "" } else { " (not optimal)" }, secs(took)));
    }
    suite.check("2", ok, format!("exact reduction: {}", parts.join(", ")));
}

fn subset_addition(suite: &mut Suite) {
    let cases = [
        ("gift", 2, 17),
        ("skinny", 2, 16),
        ("piccolo", 2, 16),
        ("present", 2, 17),
        ("lblock_s0", 3, 16),
        ("serpent0_s3", 3, 14),
        ("rectangle", 3, 16),
        ("minalpher", 3, 18),
    ];
    let mut ok = true;
    let mut flagged = Vec::new();
    let mut parts = Vec::new();
    for (name, k, want) in cases {
        let start = Instant::now();
        let r = subset_addition_reduce(&transitions(name), k, GoodType::Type1, SUBSET_LIMIT).expect("subset addition");
        let took = start.elapsed();
        let exact = is_exact(&r.chosen, &table(name));
        if r.optimal {
            ok &= exact && r.size() == want;
        } else {
            ok &= exact && r.size() <= want + 1;
            flagged.push(name);
        }
        parts.push(format!("{name} k={k} {}/{want} {}", r.size(), secs(took)));
    }
    let mut detail = format!("subset addition: {}", parts.join(", "));
    if !flagged.is_empty() {
        detail.push_str(&format!(" [not proven optimal: {}]", flagged.join(", ")));
    }
    suite.check("3", ok, detail);
}

fn random_greedy(suite: &mut Suite) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, bound) in [("mibs", 24), ("lblock_s0", 25)] {
        let t = transitions(name);
        let s = table(name);
        let hull = convex_hull_hrep(t.possible(), t.dim()).expect("hull").inequalities();
        let mut best = usize::MAX;
        for runs in [500, 5000] {
            let sets = greedy_random_runs(&hull, t.impossible(), runs, RANDOM_GREEDY_SEED).expect("random greedy");
            ok &= sets.iter().all(|c| verify_exact_model(c, &t) && is_exact(c, &s));
            best = sets.iter().map(InequalitySet::len).min().unwrap_or(usize::MAX);
            parts.push(format!("{name} best {best} in {runs} runs"));
            if best <= bound {
                break;
            }
        }
        ok &= best <= bound;
    }
    suite.check("4", ok, format!("random greedy (seed {RANDOM_GREEDY_SEED}, bound 24/25): {}", parts.join(", ")));
}

fn exactness_sweep(suite: &mut Suite) {
    let names = catalog::four_bit_names();
    let mut failures = Vec::new();
    let start = Instant::now();
    for name in &names {
        let s = table(name);
        let t = s.ddt().transitions();
        for method in Method::ALL {
            let opts = ReduceOptions { method, k: 2, runs: 50, seed: 1, budget: SWEEP_BUDGET, ..Default::default() };
            match reduce(&t, &opts) {
                Ok(r) if is_exact(&r.chosen, &s) => {}
                Ok(_) => failures.push(format!("{name}/{method}: not exact")),
                Err(e) => failures.push(format!("{name}/{method}: {e}")),
            }
        }
    }
    suite.check(
        "5",
        failures.is_empty(),
        format!(
            "exactness over {} boxes x {} methods ({}){}",
            names.len(),
            Method::ALL.len(),
            secs(start.elapsed()),
            if failures.is_empty() { String::new() } else { format!(": {}", failures.join("; ")) }
        ),
    );
}

/// Feasible projections onto `vars` of every 0/1 assignment, by one solve each.
fn solver_projection(model: &MilpModel, vars: &[VarId]) -> BTreeSet<u32> {
    let mut solver = Solver::new(model).expect("solver");
    let k = vars.len();
    (0..1u32 << k)
        .filter(|&c| {
            let fixed: Vec<(VarId, bool)> = vars.iter().enumerate().map(|(i, &v)| (v, c >> (k - 1 - i) & 1 == 1)).collect();
            let r = solver.solve_assuming(&fixed, &[], Duration::from_secs(60)).expect("solve");
            r.status == SolveStatus::Optimal
        })
        .collect()
}

fn xor_models(suite: &mut Suite) {
    // Rows as printed for A + B + C = D: coefficients of (A, B, C, D), then the bound.
    let printed: [[i64; 5]; 8] = [
        [1, 1, 1, -1, 0],
        [1, 1, -1, 1, 0],
        [1, -1, 1, 1, 0],
        [-1, 1, 1, 1, 0],
        [-1, -1, -1, 1, -2],
        [-1, -1, 1, -1, -2],
        [-1, 1, -1, -1, -2],
        [1, -1, -1, -1, -2],
    ];
    let want: BTreeSet<Vec<i64>> = printed.iter().map(|r| r.to_vec()).collect();
    let got: BTreeSet<Vec<i64>> = xor_hull_model(3)
        .expect("n=3")
        .iter()
        .map(|q| q.coeffs().iter().copied().chain([q.rhs()]).collect())
        .collect();
    let mut ok = got == want;
    let mut notes = vec![format!("n=3 hull rows {}/8 match", got.intersection(&want).count())];

    for n in 2..=7 {
        let even: BTreeSet<u32> = (0..1u32 << (n + 1)).filter(|c| c.count_ones() % 2 == 0).collect();
        for style in [XorStyle::Parity, XorStyle::Hull] {
            let mut m = MilpModel::new();
            let ins: Vec<VarId> = (0..n).map(|i| m.add_binary(&format!("x{i}")).unwrap()).collect();
            let out = m.add_binary("y").unwrap();
            let (vars0, cons0) = (m.num_vars(), m.num_constraints());
            add_xor(&XorGate::new(ins.clone(), out).unwrap(), style, &mut m).unwrap();
            let added = (m.num_vars() - vars0, m.num_constraints() - cons0);
            if style == XorStyle::Parity && added != (1, 1) {
                ok = false;
                notes.push(format!("n={n} parity added {added:?}"));
            }
            let vars: Vec<VarId> = ins.iter().copied().chain([out]).collect();
            if solver_projection(&m, &vars) != even {
                ok = false;
                notes.push(format!("n={n} {style} feasible set differs from even parity"));
            }
        }
    }
    // The parity helper alone, for the per-gate count.
    let mut m = MilpModel::new();
    let ins: Vec<VarId> = (0..4).map(|i| m.add_binary(&format!("x{i}")).unwrap()).collect();
    let out = m.add_binary("y").unwrap();
    xor_parity_model(&XorGate::new(ins, out).unwrap(), &mut m).unwrap();
    ok &= (m.num_vars(), m.num_constraints()) == (6, 1);
    notes.push("n=2..7 both styles equal even parity; parity adds 1 var + 1 constraint".into());
    suite.check("6", ok, format!("xor models: {}", notes.join("; ")));
}

fn differential_counts(suite: &mut Suite) {
    let cases: [(&str, &[usize]); 4] = [
        ("aes_word", &[1, 5, 9, 25]),
        ("gift64", &[1, 2, 3]),
        ("skinny64", &[1, 2, 5]),
        ("midori64", &[1, 4]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, want) in cases {
        let spec = builtin_spec(name).expect("builtin spec");
        let mut got = Vec::new();
        for (r, &w) in want.iter().enumerate() {
            let mut q = SearchQuery::differential(spec.clone(), r + 1);
            q.budget = SOLVE_LIMIT;
            let start = Instant::now();
            let t = diffmilp::search::search_differential(&q).expect("differential search");
            ok &= t.optimal() && t.active == w && start.elapsed() <= SOLVE_LIMIT;
            got.push(t.active.to_string());
        }
        let want: Vec<String> = want.iter().map(|w| w.to_string()).collect();
        parts.push(format!("{name} [{}] want [{}]", got.join(","), want.join(",")));
    }
    suite.check("7", ok, format!("minimum active sboxes: {}", parts.join("; ")));
}

const HIGHS_SCRIPT: &str = r#"
import sys, highspy
limit = float(sys.argv[1])
for path in sys.argv[2:]:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", limit)
    h.readModel(path)
    h.run()
    print(h.modelStatusToString(h.getModelStatus()) + "\t" + repr(h.getInfo().objective_function_value))
"#;

fn highs_available() -> bool {
    Command::new("python3").args(["-c", "import highspy"]).output().map(|o| o.status.success()).unwrap_or(false)
}

/// (status, objective) per LP file.
fn highs(paths: &[PathBuf], limit: f64) -> Vec<(String, f64)> {
    let out = Command::new("python3")
        .arg("-c")
        .arg(HIGHS_SCRIPT)
        .arg(limit.to_string())
        .args(paths)
        .output()
        .expect("python3");
    assert!(out.status.success(), "highspy failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| {
            let (s, v) = l.split_once('\t').expect("status line");
            (s.to_string(), v.parse().unwrap_or(f64::NAN))
        })
        .collect()
}

fn write_lp(dir: &Path, name: &str, model: &MilpModel) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, export_lp(model)).expect("write lp");
    path
}

fn deep_differential(suite: &mut Suite, highs_ok: bool) {
    if !highs_ok {
        suite.report("7x", Outcome::Skip, "deep rounds via LP export: highspy not available".into());
        return;
    }
    if std::env::var_os("DIFFMILP_DEEP").is_none() {
        suite.report("7x", Outcome::Skip, "deep rounds via LP export: set DIFFMILP_DEEP=1 to run".into());
        return;
    }
    let dir = tempfile::tempdir().expect("tempdir");
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, rounds, want) in [("gift64", 9, 18.0), ("skinny64", 7, 27.0)] {
        let spec = builtin_spec(name).unwrap();
        let u = generate_model(&spec, rounds, &ModelOptions::default()).unwrap();
        let path = write_lp(dir.path(), &format!("{name}_{rounds}.lp"), &u.model);
        let start = Instant::now();
        let (status, obj) = highs(&[path], HIGHS_LIMIT).remove(0);
        ok &= status == "Optimal" && (obj - want).abs() < 1e-6;
        parts.push(format!("{name} r={rounds} {status} {obj} want {want} {}", secs(start.elapsed())));
    }
    suite.check("7x", ok, format!("deep rounds via LP export: {}", parts.join("; ")));
}

fn proved_set(report: &diffmilp::search::ImpossibleReport) -> BTreeSet<Pattern> {
    report.proved().map(|e| e.pattern).collect()
}

fn gift_fuzzy(suite: &mut Suite) {
    let spec = builtin_spec("gift64").unwrap();
    let start = Instant::now();
    let report = search_impossible(&SearchQuery::impossible(spec, 5, Granularity::Fuzzy)).expect("search");
    let took = start.elapsed();
    let listed: BTreeSet<Pattern> = GIFT64_R5.iter().map(|(a, b)| pattern(a, b)).collect();
    let found = proved_set(&report);
    let missing = listed.difference(&found).count();
    let extra: Vec<String> = found.difference(&listed).map(|p| format!("{} -> {}", p.in_hex(16, 4), p.out_hex(16, 4))).collect();
    let ok = missing == 0 && report.unresolved().count() == 0 && took <= IMPOSSIBLE_LIMIT;
    suite.check(
        "8a",
        ok,
        format!(
            "gift64 r=5 fuzzy: {}/{} listed rows proved, {} found, {} concretizations, extra [{}] ({})",
            listed.len() - missing,
            listed.len(),
            found.len(),
            report.concretizations(),
            extra.join(", "),
            secs(took)
        ),
    );
}

fn klein_equal(suite: &mut Suite) {
    let spec = builtin_spec("klein").unwrap();
    let start = Instant::now();
    let report = search_impossible(&SearchQuery::impossible(spec, 4, Granularity::Equal)).expect("search");
    let took = start.elapsed();
    let listed: BTreeSet<Pattern> = KLEIN_R4.iter().map(|(a, b)| mirrored_pattern(a, b)).collect();
    let found = proved_set(&report);
    let shared = listed.intersection(&found).count();
    suite.check(
        "8b",
        found == listed && report.unresolved().count() == 0,
        format!(
            "klein r=4 equal: {} proved, {} listed, {shared} shared, {} unresolved ({})",
            found.len(),
            listed.len(),
            report.unresolved().count(),
            secs(took)
        ),
    );
    if found != listed {
        suite.note("8b: listed pairs outside the proved set are realized by trails (see the klein_oracle tests)");
    }
}

/// Printed input and output difference.
type Row = (&'static str, &'static str);

/// A listed row with its wildcards filled in, in state order. Every `*` in a row
/// takes one shared non-zero value; each `-` takes its own.
fn concretize(row: (&str, &str), mirrored: bool, rng: &mut ChaCha8Rng) -> Pattern {
    let shared = char::from_digit(rng.gen_range(1..16), 16).unwrap();
    let mut fill = |s: &str| -> String {
        s.chars()
            .map(|c| match c {
                '*' => shared,
                '-' => char::from_digit(rng.gen_range(1..16), 16).unwrap(),
                _ => c,
            })
            .collect()
    };
    let (a, b) = (fill(row.0), fill(row.1));
    if mirrored {
        pattern(&mirror(&a), &mirror(&b))
    } else {
        pattern(&a, &b)
    }
}

fn sampled_entries(suite: &mut Suite, highs_ok: bool) {
    if !highs_ok {
        suite.report("8c", Outcome::Skip, "sampled table entries via LP export: highspy not available".into());
        return;
    }
    let dir = tempfile::tempdir().expect("tempdir");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ok = true;
    let mut parts = Vec::new();
    let tables: [(&str, usize, &[Row], bool); 2] = [("lilliput", 9, &LILLIPUT_R9, false), ("skinny64", 11, &SKINNY64_R11, true)];
    for (name, rounds, rows, mirrored) in tables {
        let spec = builtin_spec(name).unwrap();
        let u = generate_model(&spec, rounds, &ModelOptions::default()).unwrap();
        let picks: Vec<Row> = rows.choose_multiple(&mut rng, 5).copied().collect();
        let patterns: Vec<Pattern> = picks.iter().map(|&r| concretize(r, mirrored, &mut rng)).collect();
        let paths: Vec<PathBuf> = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| write_lp(dir.path(), &format!("{name}_{i}.lp"), &pattern_model(&u, p).unwrap()))
            .collect();
        let start = Instant::now();
        let statuses = highs(&paths, HIGHS_LIMIT);
        let infeasible = statuses.iter().filter(|(s, _)| s == "Infeasible").count();
        let builtin = patterns.iter().filter(|p| matches!(pattern_witness(&u, p, BUILTIN_LIMIT), Ok(None))).count();
        ok &= infeasible == 5 && builtin == 5;
        parts.push(format!("{name} r={rounds}: {infeasible}/5 infeasible, builtin {builtin}/5 ({})", secs(start.elapsed())));
    }
    suite.check("8c", ok, format!("sampled table entries: {}", parts.join("; ")));
}

fn skinny_fuzzy(suite: &mut Suite) {
    let spec = builtin_spec("skinny64").unwrap();
    let start = Instant::now();
    let report = search_impossible(&SearchQuery::impossible(spec, 11, Granularity::Fuzzy)).expect("search");
    let listed: BTreeSet<Pattern> = SKINNY64_R11.iter().map(|(a, b)| mirrored_pattern(a, b)).collect();
    let found = proved_set(&report);
    suite.check(
        "8d",
        found == listed && report.concretizations() == 2700,
        format!(
            "skinny64 r=11 fuzzy with the built-in solver: {} found, {} listed, {} concretizations ({})",
            found.len(),
            listed.len(),
            report.concretizations(),
            secs(start.elapsed())
        ),
    );
}

fn lilliput_equal(suite: &mut Suite) {
    let spec = builtin_spec("lilliput").unwrap();
    let start = Instant::now();
    let report = search_impossible(&SearchQuery::impossible(spec, 9, Granularity::Equal)).expect("search");
    let mut listed_equal = BTreeSet::new();
    let mut listed_other = Vec::new();
    for &(a, b) in LILLIPUT_R9.iter() {
        let p = pattern(a, b);
        match (p.in_value, p.out_value) {
            (Some(x), Some(y)) if x != y => listed_other.push(p),
            _ => listed_equal.extend((1..16).filter(|v| p.in_value.is_none_or(|x| x == *v)).map(|v| Pattern {
                in_value: Some(v),
                out_value: Some(v),
                ..p
            })),
        }
    }
    let found = proved_set(&report);
    let other = search_patterns(&SearchQuery::impossible(builtin_spec("lilliput").unwrap(), 9, Granularity::Targeted), &listed_other)
        .expect("targeted");
    let other_ok = other.entries.iter().all(|e| e.verdict == Verdict::Impossible);
    suite.check(
        "8e",
        found == listed_equal && other_ok,
        format!(
            "lilliput r=9 with the built-in solver: {} equal-value pairs proved, {} listed, plus {} listed non-equal pair(s) proved {} = {} ({})",
            found.len(),
            listed_equal.len(),
            listed_other.len(),
            other_ok,
            found.len() + listed_other.len(),
            secs(start.elapsed())
        ),
    );
}

/// Smallest cover size by trying every combination of increasing size.
fn brute_force_cover(universe: usize, sets: &[u32]) -> Option<usize> {
    let full = if universe == 32 { u32::MAX } else { (1u32 << universe) - 1 };
    fn search(sets: &[u32], start: usize, left: usize, acc: u32, full: u32) -> bool {
        if left == 0 {
            return acc == full;
        }
        (start..sets.len()).any(|j| search(sets, j + 1, left - 1, acc | sets[j], full))
    }
    (0..=sets.len()).find(|&k| search(sets, 0, k, 0, full))
}

fn set_cover(suite: &mut Suite) {
    let figure = CoverInstance::new(7, vec![vec![0, 1], vec![0, 1, 2], vec![1, 2, 4], vec![3, 4], vec![5], vec![5, 6]]).unwrap();
    let s = solve_exact(&figure, Duration::from_secs(60)).expect("figure");
    let mut ok = s.optimal && s.size() == 3 && figure.is_cover(&s.chosen);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut mismatches = 0;
    for _ in 0..100 {
        let universe = rng.gen_range(1..=24);
        let n = rng.gen_range(1..=20);
        let masks: Vec<u32> = (0..n).map(|_| (0..universe).filter(|_| rng.gen_bool(0.3)).fold(0, |m, e| m | 1 << e)).collect();
        let subsets: Vec<Vec<usize>> = masks.iter().map(|&m| (0..universe).filter(|e| m >> e & 1 == 1).collect()).collect();
        let inst = CoverInstance::new(universe, subsets).unwrap();
        let agree = match (brute_force_cover(universe, &masks), solve_exact(&inst, Duration::from_secs(60))) {
            (None, Err(_)) => true,
            (Some(opt), Ok(r)) => r.optimal && r.size() == opt && inst.is_cover(&r.chosen),
            _ => false,
        };
        mismatches += usize::from(!agree);
    }
    ok &= mismatches == 0;
    suite.check("9", ok, format!("set cover: figure instance {} (want 3), {mismatches} mismatches in 100 random instances", s.size()));
}

fn stress_network(suite: &mut Suite) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4, 3] {
        let start = Instant::now();
        let parity = xor_stress_network(n, 200, 16, XorStyle::Parity).unwrap();
        let hull = xor_stress_network(n, 200, 16, XorStyle::Hull).unwrap();
        let a = parity.solve_configurations(SOLVE_LIMIT).unwrap();
        let b = hull.solve_configurations(SOLVE_LIMIT).unwrap();
        let dummies = parity.model.count_integer_vars();
        ok &= a.len() == 16 && a == b && dummies == 3200;
        parts.push(format!(
            "n={n}: {} dummies, styles agree {}, {} of 16 feasible ({})",
            dummies,
            a == b,
            a.iter().filter(|&&f| f).count(),
            secs(start.elapsed())
        ));
    }
    suite.check("10", ok, format!("xor stress network, 200 rounds: {}", parts.join("; ")));
}

fn main() -> ExitCode {
    let mut suite = Suite { lines: Vec::new() };
    let highs_ok = highs_available();
    hull_counts(&mut suite);
    exact_reduction(&mut suite);
    subset_addition(&mut suite);
    random_greedy(&mut suite);
    exactness_sweep(&mut suite);
    xor_models(&mut suite);
    differential_counts(&mut suite);
    deep_differential(&mut suite, highs_ok);
    gift_fuzzy(&mut suite);
    klein_equal(&mut suite);
    sampled_entries(&mut suite, highs_ok);
    skinny_fuzzy(&mut suite);
    lilliput_equal(&mut suite);
    set_cover(&mut suite);
    stress_network(&mut suite);

    let mut by_outcome: BTreeMap<&str, usize> = BTreeMap::new();
    let mut unexpected = Vec::new();
    for (id, o) in &suite.lines {
        let key = match o {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Skip => "skip",
        };
        *by_outcome.entry(key).or_default() += 1;
        if *o == Outcome::Fail && !EXPECTED_FAIL.contains(&id.as_str()) {
            unexpected.push(id.clone());
        }
        if *o == Outcome::Pass && EXPECTED_FAIL.contains(&id.as_str()) {
            suite.note(&format!("{id} is listed as an expected failure but passed"));
        }
    }
    println!(
        "summary: {} pass, {} fail, {} skip; unexpected failures: [{}]",
        by_outcome.get("pass").unwrap_or(&0),
        by_outcome.get("fail").unwrap_or(&0),
        by_outcome.get("skip").unwrap_or(&0),
        unexpected.join(", ")
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
