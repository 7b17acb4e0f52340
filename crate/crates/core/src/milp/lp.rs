//! CPLEX LP text export.

use std::fmt::Write;

use super::model::{MilpModel, VarId, VarKind};

const MAX_LINE: usize = 200;

fn push_terms(out: &mut String, head: &str, terms: &[(VarId, i64)], model: &MilpModel) {
    let mut line = String::from(head);
    for (i, &(v, a)) in terms.iter().enumerate() {
        let name = &model.variable(v).name;
        let term = match (i, a) {
            (0, 1) => name.clone(),
            (0, -1) => format!("- {name}"),
            (0, a) if a < 0 => format!("- {} {name}", -a),
            (0, a) => format!("{a} {name}"),
            (_, 1) => format!("+ {name}"),
            (_, -1) => format!("- {name}"),
            (_, a) if a < 0 => format!("- {} {name}", -a),
            (_, a) => format!("+ {a} {name}"),
        };
        if line.len() + term.len() + 1 > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("  ");
        } else {
            line.push(' ');
        }
        line.push_str(&term);
    }
    out.push_str(&line);
}

/// Serializes the model; identical models give identical bytes.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n");
    match model.objective() {
        Some(t) if !t.is_empty() => push_terms(&mut out, " obj:", t, model),
        _ if model.num_vars() > 0 => {
            let _ = write!(out, " obj: 0 {}", model.variables()[0].name);
        }
        _ => out.push_str(" obj:"),
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let head = format!(" c{i}:");
        if c.terms.is_empty() {
            // Constant constraint; keep it visible with a zero term.
            if let Some(v) = model.variables().first() {
                let _ = write!(out, "{head} 0 {}", v.name);
            }
        } else {
            push_terms(&mut out, &head, &c.terms, model);
        }
        let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        if let VarKind::Integer { lo, hi } = v.kind {
            let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
        }
    }
    let binaries: Vec<&str> =
        model.variables().iter().filter(|v| v.kind == VarKind::Binary).map(|v| v.name.as_str()).collect();
    let generals: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| matches!(v.kind, VarKind::Integer { .. }))
        .map(|v| v.name.as_str())
        .collect();
    for (title, names) in [("Binaries", binaries), ("Generals", generals)] {
        if names.is_empty() {
            continue;
        }
        out.push_str(title);
        out.push('\n');
        let mut line = String::new();
        for n in names {
            if line.len() + n.len() + 1 > MAX_LINE {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(n);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}
