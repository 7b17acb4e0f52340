use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer { lo: i64, hi: i64 },
}

impl VarKind {
    pub fn bounds(self) -> (i64, i64) {
        match self {
            VarKind::Binary => (0, 1),
            VarKind::Integer { lo, hi } => (lo, hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Ge => ">=",
            Sense::Le => "<=",
            Sense::Eq => "=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Ge => lhs >= rhs,
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

/// `sum(terms) sense rhs`; terms are merged per variable and never zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(VarId, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn lhs(&self, values: &[i64]) -> i64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    pub fn satisfied_by(&self, values: &[i64]) -> bool {
        self.sense.holds(self.lhs(values), self.rhs)
    }
}

/// Solver-agnostic MILP: bounded variables, linear constraints, optional minimization objective.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MilpModel {
    vars: Vec<Variable>,
    index: HashMap<String, VarId>,
    constraints: Vec<Constraint>,
    objective: Option<Vec<(VarId, i64)>>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']'))
}

fn merge_terms(terms: impl IntoIterator<Item = (VarId, i64)>) -> Vec<(VarId, i64)> {
    let mut out: Vec<(VarId, i64)> = Vec::new();
    let mut pos: HashMap<VarId, usize> = HashMap::new();
    for (v, a) in terms {
        match pos.get(&v) {
            Some(&i) => out[i].1 += a,
            None => {
                pos.insert(v, out.len());
                out.push((v, a));
            }
        }
    }
    out.retain(|&(_, a)| a != 0);
    out
}

impl MilpModel {
    pub fn new() -> Self {
        MilpModel::default()
    }

    fn add_var(&mut self, name: &str, kind: VarKind) -> Result<VarId> {
        if !valid_name(name) {
            return Err(Error::Model(format!("invalid variable name {name:?}")));
        }
        if self.index.contains_key(name) {
            return Err(Error::Model(format!("duplicate variable name {name:?}")));
        }
        let id = VarId(self.vars.len());
        self.vars.push(Variable { name: name.to_string(), kind });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_binary(&mut self, name: &str) -> Result<VarId> {
        self.add_var(name, VarKind::Binary)
    }

    pub fn add_integer(&mut self, name: &str, lo: i64, hi: i64) -> Result<VarId> {
        if lo > hi {
            return Err(Error::Model(format!("empty bounds [{lo}, {hi}] for {name:?}")));
        }
        self.add_var(name, VarKind::Integer { lo, hi })
    }

    pub fn add_constraint(&mut self, terms: impl IntoIterator<Item = (VarId, i64)>, sense: Sense, rhs: i64) -> Result<usize> {
        let terms = merge_terms(terms);
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
            return Err(Error::Model(format!("unknown variable index {}", v.0)));
        }
        self.constraints.push(Constraint { terms, sense, rhs });
        Ok(self.constraints.len() - 1)
    }

    /// Sets the (minimization) objective.
    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, i64)>) -> Result<()> {
        let terms = merge_terms(terms);
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
            return Err(Error::Model(format!("unknown variable index {}", v.0)));
        }
        self.objective = Some(terms);
        Ok(())
    }

    pub fn clear_objective(&mut self) {
        self.objective = None;
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&[(VarId, i64)]> {
        self.objective.as_deref()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn count_integer_vars(&self) -> usize {
        self.vars.iter().filter(|v| matches!(v.kind, VarKind::Integer { .. })).count()
    }

    /// Index of the first violated constraint or bound, if any.
    pub fn first_violation(&self, values: &[i64]) -> Option<String> {
        if values.len() != self.vars.len() {
            return Some(format!("assignment has {} values for {} variables", values.len(), self.vars.len()));
        }
        for (v, &x) in self.vars.iter().zip(values) {
            let (lo, hi) = v.kind.bounds();
            if x < lo || x > hi {
                return Some(format!("{} = {x} outside [{lo}, {hi}]", v.name));
            }
        }
        self.constraints
            .iter()
            .position(|c| !c.satisfied_by(values))
            .map(|i| format!("constraint c{i} violated"))
    }

    pub fn is_feasible(&self, values: &[i64]) -> bool {
        self.first_violation(values).is_none()
    }

    pub fn objective_value(&self, values: &[i64]) -> Option<i64> {
        self.objective.as_ref().map(|t| t.iter().map(|&(v, a)| a * values[v.0]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_validated() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x").unwrap();
        assert!(m.add_binary("x").is_err());
        assert!(m.add_binary("1x").is_err());
        assert!(m.add_binary("a b").is_err());
        assert!(m.add_integer("d", 3, 2).is_err());
        assert!(m.add_constraint([(VarId(5), 1)], Sense::Ge, 0).is_err());
        assert_eq!(m.var("x"), Some(x));
    }

    #[test]
    fn terms_merged() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x").unwrap();
        let y = m.add_binary("y").unwrap();
        m.add_constraint([(x, 1), (y, 2), (x, -1)], Sense::Le, 1).unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(y, 2)]);
        assert!(m.is_feasible(&[1, 0]));
        assert!(!m.is_feasible(&[1, 1]));
    }
}
