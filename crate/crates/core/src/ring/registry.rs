use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of a variable slot in a [`VarRegistry`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Base,
    Primed,
    Family,
    Curve,
    Generic,
    Chart,
}

/// The fixed set of variables every polynomial of a problem lives over.
///
/// Slots are laid out as `base | primed | family | curve | generic | chart`;
/// the primed block mirrors the base block one-to-one and houses the second
/// copy of the coordinates on the product space. The layout also fixes the
/// monomial order (graded reverse lexicographic in slot order).
#[derive(Debug, PartialEq, Eq)]
pub struct VarRegistry {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    n_base: usize,
    n_family: usize,
    n_generic: usize,
    n_chart: usize,
    index: HashMap<String, Var>,
}

#[derive(Debug, Clone, Default)]
pub struct RegistryBuilder {
    base: Vec<String>,
    family: Vec<String>,
    curve: Option<String>,
    generic: Vec<String>,
    chart: Vec<String>,
}

impl RegistryBuilder {
    pub fn base<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.base = names.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn family<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.family = names.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn curve(mut self, name: &str) -> Self {
        self.curve = Some(name.to_string());
        self
    }

    pub fn generic<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.generic = names.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn chart<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.chart = names.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    /// Adds `T1..Tp` chart variables.
    pub fn chart_count(mut self, p: usize) -> Self {
        self.chart = (1..=p).map(|i| format!("T{i}")).collect();
        self
    }

    pub fn build(self) -> Result<Arc<VarRegistry>> {
        let curve = self.curve.unwrap_or_else(|| "t".to_string());
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        for b in &self.base {
            names.push(b.clone());
            kinds.push(VarKind::Base);
        }
        for b in &self.base {
            names.push(format!("{b}'"));
            kinds.push(VarKind::Primed);
        }
        for f in &self.family {
            names.push(f.clone());
            kinds.push(VarKind::Family);
        }
        names.push(curve);
        kinds.push(VarKind::Curve);
        for g in &self.generic {
            names.push(g.clone());
            kinds.push(VarKind::Generic);
        }
        for c in &self.chart {
            names.push(c.clone());
            kinds.push(VarKind::Chart);
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(Error::Domain(format!("`{n}` is not a valid variable name")));
            }
            if index.insert(n.clone(), Var(i)).is_some() {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        Ok(Arc::new(VarRegistry {
            names,
            kinds,
            n_base: self.base.len(),
            n_family: self.family.len(),
            n_generic: self.generic.len(),
            n_chart: self.chart.len(),
            index,
        }))
    }
}

fn is_identifier(s: &str) -> bool {
    let core = s.trim_end_matches('\'');
    let mut chars = core.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarRegistry {
    pub fn builder() -> RegistryBuilder {
        RegistryBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn n_family(&self) -> usize {
        self.n_family
    }

    pub fn n_generic(&self) -> usize {
        self.n_generic
    }

    pub fn n_chart(&self) -> usize {
        self.n_chart
    }

    pub fn base(&self, i: usize) -> Var {
        assert!(i < self.n_base, "base index {i} out of range");
        Var(i)
    }

    pub fn primed(&self, i: usize) -> Var {
        assert!(i < self.n_base, "primed index {i} out of range");
        Var(self.n_base + i)
    }

    pub fn family(&self, i: usize) -> Var {
        assert!(i < self.n_family, "family index {i} out of range");
        Var(2 * self.n_base + i)
    }

    pub fn curve(&self) -> Var {
        Var(2 * self.n_base + self.n_family)
    }

    pub fn generic(&self, i: usize) -> Var {
        assert!(i < self.n_generic, "generic index {i} out of range");
        Var(2 * self.n_base + self.n_family + 1 + i)
    }

    pub fn chart(&self, i: usize) -> Var {
        assert!(i < self.n_chart, "chart index {i} out of range");
        Var(2 * self.n_base + self.n_family + 1 + self.n_generic + i)
    }

    pub fn base_vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.n_base).map(Var)
    }

    pub fn family_vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.n_family).map(|i| self.family(i))
    }

    pub fn generic_vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.n_generic).map(|i| self.generic(i))
    }

    pub fn kind(&self, v: Var) -> VarKind {
        self.kinds[v.0]
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.0]
    }

    pub fn lookup(&self, name: &str) -> Result<Var> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Position of a base variable within the base block.
    pub fn base_index(&self, v: Var) -> Option<usize> {
        (self.kind(v) == VarKind::Base).then_some(v.0)
    }

    pub fn prime_of(&self, v: Var) -> Result<Var> {
        match self.kind(v) {
            VarKind::Base => Ok(self.primed(v.0)),
            k => Err(Error::Domain(format!(
                "cannot prime {:?} variable `{}`",
                k,
                self.name(v)
            ))),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn names_of(&self, kind: VarKind) -> Vec<&str> {
        self.names
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == kind)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_priming() {
        let reg = VarRegistry::builder()
            .base(&["x", "y"])
            .family(&["t"])
            .curve("s")
            .generic(&["a", "b"])
            .chart_count(2)
            .build()
            .unwrap();
        assert_eq!(reg.len(), 2 + 2 + 1 + 1 + 2 + 2);
        assert_eq!(reg.name(reg.primed(1)), "y'");
        assert_eq!(reg.prime_of(reg.base(0)).unwrap(), reg.primed(0));
        assert!(reg.prime_of(reg.family(0)).is_err());
        assert_eq!(reg.kind(reg.curve()), VarKind::Curve);
        assert_eq!(reg.name(reg.chart(1)), "T2");
        assert_eq!(reg.lookup("b").unwrap(), reg.generic(1));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = VarRegistry::builder()
            .base(&["x", "t"])
            .build()
            .unwrap_err();
        assert_eq!(err, Error::DuplicateName("t".into()));
        let err = VarRegistry::builder()
            .base(&["x"])
            .generic(&["x'"])
            .build()
            .unwrap_err();
        assert_eq!(err, Error::DuplicateName("x'".into()));
    }
}
