//! Relational part of a hierarchy: domains, nesting, orthogonality, complexity.
//!
//! Nesting is kept as its full reflexive-transitive closure in memory and
//! written as a transitive reduction.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainId(pub u32);

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("signature has no domains")]
    Empty,
    #[error("duplicate domain id {0}")]
    DuplicateId(DomainId),
    #[error("unknown domain id {0}")]
    UnknownId(DomainId),
    #[error("unknown domain label {0:?}")]
    UnknownLabel(String),
    #[error("complexity must be positive")]
    ZeroComplexity,
    #[error("generator {generator} is not a bijection: {reason}")]
    NotBijection { generator: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainDecl {
    pub id: DomainId,
    pub unbounded: bool,
    pub label: String,
}

/// Generators acting on domains; entry `k` of a generator is the image of
/// the `k`-th domain in ascending id order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupActionSpec {
    pub generators: Vec<Vec<DomainId>>,
}

/// File form of a signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureDoc {
    pub domains: Vec<DomainDecl>,
    #[serde(default)]
    pub nest: Vec<(DomainId, DomainId)>,
    #[serde(default)]
    pub orth: Vec<(DomainId, DomainId)>,
    pub maximal: DomainId,
    pub complexity: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<GroupActionSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equal,
    /// The first domain is properly nested in the second.
    NestedUp,
    /// The second domain is properly nested in the first.
    NestedDown,
    Orthogonal,
    Transverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SignatureDoc", into = "SignatureDoc")]
pub struct HhsSignature {
    domains: Vec<DomainDecl>,
    index: BTreeMap<DomainId, usize>,
    le: Vec<Vec<bool>>,
    orth: Vec<Vec<bool>>,
    self_orth: Vec<usize>,
    maximal: usize,
    complexity: u32,
    action: Option<GroupActionSpec>,
}

impl TryFrom<SignatureDoc> for HhsSignature {
    type Error = SignatureError;

    fn try_from(doc: SignatureDoc) -> Result<Self, Self::Error> {
        HhsSignature::from_doc(doc)
    }
}

impl From<HhsSignature> for SignatureDoc {
    fn from(sig: HhsSignature) -> Self {
        sig.to_doc()
    }
}

impl HhsSignature {
    pub fn from_doc(doc: SignatureDoc) -> Result<Self, SignatureError> {
        if doc.domains.is_empty() {
            return Err(SignatureError::Empty);
        }
        if doc.complexity == 0 {
            return Err(SignatureError::ZeroComplexity);
        }
        let mut domains = doc.domains;
        domains.sort_by_key(|d| d.id);
        let mut index = BTreeMap::new();
        for (i, d) in domains.iter().enumerate() {
            if index.insert(d.id, i).is_some() {
                return Err(SignatureError::DuplicateId(d.id));
            }
        }
        let look = |id: DomainId| index.get(&id).copied().ok_or(SignatureError::UnknownId(id));
        let n = domains.len();
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(v, w) in &doc.nest {
            le[look(v)?][look(w)?] = true;
        }
        close_transitively(&mut le);
        let mut orth = vec![vec![false; n]; n];
        let mut self_orth = Vec::new();
        for &(v, w) in &doc.orth {
            let (a, b) = (look(v)?, look(w)?);
            if a == b {
                self_orth.push(a);
            } else {
                orth[a][b] = true;
                orth[b][a] = true;
            }
        }
        self_orth.sort_unstable();
        self_orth.dedup();
        let maximal = look(doc.maximal)?;
        let sig = HhsSignature { domains, index, le, orth, self_orth, maximal, complexity: doc.complexity, action: None };
        let action = match doc.action {
            Some(a) => {
                for (g, perm) in a.generators.iter().enumerate() {
                    sig.permutation_indices(g, perm)?;
                }
                Some(a)
            }
            None => None,
        };
        Ok(HhsSignature { action, ..sig })
    }

    /// Canonical document: nest as transitive reduction, sorted lists.
    pub fn to_doc(&self) -> SignatureDoc {
        let n = self.n();
        let mut nest = Vec::new();
        for v in 0..n {
            for w in 0..n {
                if v != w && self.le[v][w] && !(0..n).any(|u| u != v && u != w && self.le[v][u] && self.le[u][w]) {
                    nest.push((self.id(v), self.id(w)));
                }
            }
        }
        nest.sort();
        let mut orth = Vec::new();
        for v in 0..n {
            for w in v + 1..n {
                if self.orth[v][w] {
                    orth.push((self.id(v), self.id(w)));
                }
            }
        }
        for &v in &self.self_orth {
            orth.push((self.id(v), self.id(v)));
        }
        orth.sort();
        SignatureDoc {
            domains: self.domains.clone(),
            nest,
            orth,
            maximal: self.id(self.maximal),
            complexity: self.complexity,
            action: self.action.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[DomainDecl] {
        &self.domains
    }

    pub fn id(&self, i: usize) -> DomainId {
        self.domains[i].id
    }

    pub fn ids(&self, idx: &[usize]) -> Vec<DomainId> {
        idx.iter().map(|&i| self.id(i)).collect()
    }

    pub fn index(&self, id: DomainId) -> Result<usize, SignatureError> {
        self.index.get(&id).copied().ok_or(SignatureError::UnknownId(id))
    }

    pub fn index_of_label(&self, label: &str) -> Result<usize, SignatureError> {
        self.domains.iter().position(|d| d.label == label).ok_or_else(|| SignatureError::UnknownLabel(label.into()))
    }

    pub fn label(&self, i: usize) -> &str {
        &self.domains[i].label
    }

    pub fn unbounded(&self, i: usize) -> bool {
        self.domains[i].unbounded
    }

    pub fn unbounded_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.unbounded(i)).collect()
    }

    pub fn maximal(&self) -> usize {
        self.maximal
    }

    pub fn complexity(&self) -> u32 {
        self.complexity
    }

    pub fn action(&self) -> Option<&GroupActionSpec> {
        self.action.as_ref()
    }

    pub fn with_action(mut self, action: Option<GroupActionSpec>) -> Result<Self, SignatureError> {
        if let Some(a) = &action {
            for (g, perm) in a.generators.iter().enumerate() {
                self.permutation_indices(g, perm)?;
            }
        }
        self.action = action;
        Ok(self)
    }

    /// `v ⊑ w` (reflexive).
    #[inline]
    pub fn nested(&self, v: usize, w: usize) -> bool {
        self.le[v][w]
    }

    /// `v ⊊ w`.
    #[inline]
    pub fn properly_nested(&self, v: usize, w: usize) -> bool {
        v != w && self.le[v][w]
    }

    #[inline]
    pub fn orthogonal(&self, v: usize, w: usize) -> bool {
        self.orth[v][w]
    }

    #[inline]
    pub fn comparable(&self, v: usize, w: usize) -> bool {
        self.le[v][w] || self.le[w][v]
    }

    #[inline]
    pub fn transverse(&self, v: usize, w: usize) -> bool {
        v != w && !self.comparable(v, w) && !self.orth[v][w]
    }

    /// Index-level relation; nesting takes precedence on invalid input.
    pub fn relation(&self, v: usize, w: usize) -> Relation {
        if v == w {
            Relation::Equal
        } else if self.le[v][w] {
            Relation::NestedUp
        } else if self.le[w][v] {
            Relation::NestedDown
        } else if self.orth[v][w] {
            Relation::Orthogonal
        } else {
            Relation::Transverse
        }
    }

    pub fn relation_of(&self, v: DomainId, w: DomainId) -> Result<Relation, SignatureError> {
        Ok(self.relation(self.index(v)?, self.index(w)?))
    }

    /// `𝔖_w`: domains nested in `w`, including `w`.
    pub fn down_set(&self, w: usize) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.le[v][w]).collect()
    }

    pub fn orth_set(&self, w: usize) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.orth[v][w]).collect()
    }

    /// Orthogonal pairs `(v, w)` with `v < w`.
    pub fn orth_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n).flat_map(|v| (v + 1..n).filter(move |&w| self.orth[v][w]).map(move |w| (v, w))).collect()
    }

    /// Length of the longest ⊑-chain from the maximal domain down to `w`.
    pub fn level_index(&self, w: usize) -> usize {
        let mut memo = vec![0usize; self.n()];
        self.level_rec(w, &mut memo)
    }

    fn level_rec(&self, w: usize, memo: &mut [usize]) -> usize {
        if memo[w] != 0 {
            return memo[w];
        }
        memo[w] = usize::MAX;
        let mut best = 1;
        for u in 0..self.n() {
            if self.properly_nested(w, u) && !self.le[u][w] && memo[u] != usize::MAX {
                best = best.max(self.level_rec(u, memo) + 1);
            }
        }
        memo[w] = best;
        best
    }

    pub fn level(&self, w: DomainId) -> Result<usize, SignatureError> {
        Ok(self.level_index(self.index(w)?))
    }

    /// Longest chain of pairwise properly nested domains, top first.
    pub fn longest_chain(&self) -> Vec<usize> {
        let n = self.n();
        let mut order: Vec<usize> = (0..n).collect();
        let above = |v: usize| (0..n).filter(|&u| self.properly_nested(v, u)).count();
        order.sort_by_key(|&v| (above(v), v));
        let mut len = vec![1usize; n];
        let mut prev = vec![usize::MAX; n];
        for (pos, &v) in order.iter().enumerate() {
            for &u in &order[..pos] {
                if self.properly_nested(v, u) && !self.le[u][v] && len[u] + 1 > len[v] {
                    len[v] = len[u] + 1;
                    prev[v] = u;
                }
            }
        }
        let Some(mut end) = (0..n).max_by_key(|&v| (len[v], usize::MAX - v)) else {
            return Vec::new();
        };
        let mut chain = vec![end];
        while prev[end] != usize::MAX {
            end = prev[end];
            chain.push(end);
        }
        chain.reverse();
        chain
    }

    fn permutation_indices(&self, g: usize, perm: &[DomainId]) -> Result<Vec<usize>, SignatureError> {
        let n = self.n();
        if perm.len() != n {
            return Err(SignatureError::NotBijection {
                generator: g,
                reason: format!("length {} for {} domains", perm.len(), n),
            });
        }
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for &id in perm {
            let i = self.index(id).map_err(|_| SignatureError::NotBijection {
                generator: g,
                reason: format!("unknown image {id}"),
            })?;
            if seen[i] {
                return Err(SignatureError::NotBijection { generator: g, reason: format!("{id} hit twice") });
            }
            seen[i] = true;
            out.push(i);
        }
        Ok(out)
    }

    /// Generators of the attached action as index permutations.
    pub fn action_indices(&self) -> Vec<Vec<usize>> {
        match &self.action {
            Some(a) => a
                .generators
                .iter()
                .enumerate()
                .map(|(g, p)| self.permutation_indices(g, p).expect("validated at construction"))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_signature(self)
    }

    pub fn check_action(&self, action: &GroupActionSpec) -> Result<ActionReport, SignatureError> {
        check_action(self, action)
    }
}

fn close_transitively(m: &mut [Vec<bool>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
}

/// Builds signatures by label.
#[derive(Debug, Clone, Default)]
pub struct SignatureBuilder {
    domains: Vec<DomainDecl>,
    nest: Vec<(String, String)>,
    orth: Vec<(String, String)>,
    maximal: Option<String>,
    complexity: u32,
}

impl SignatureBuilder {
    pub fn new(complexity: u32) -> Self {
        SignatureBuilder { complexity, ..Default::default() }
    }

    pub fn domain(mut self, label: &str, unbounded: bool) -> Self {
        let id = DomainId(self.domains.len() as u32);
        self.domains.push(DomainDecl { id, unbounded, label: label.into() });
        self
    }

    pub fn nest(mut self, lower: &str, upper: &str) -> Self {
        self.nest.push((lower.into(), upper.into()));
        self
    }

    pub fn orth(mut self, a: &str, b: &str) -> Self {
        self.orth.push((a.into(), b.into()));
        self
    }

    pub fn maximal(mut self, label: &str) -> Self {
        self.maximal = Some(label.into());
        self
    }

    pub fn build(self) -> Result<HhsSignature, SignatureError> {
        let look = |l: &str| {
            self.domains.iter().find(|d| d.label == l).map(|d| d.id).ok_or_else(|| SignatureError::UnknownLabel(l.into()))
        };
        let nest = self.nest.iter().map(|(a, b)| Ok((look(a)?, look(b)?))).collect::<Result<Vec<_>, _>>()?;
        let orth = self.orth.iter().map(|(a, b)| Ok((look(a)?, look(b)?))).collect::<Result<Vec<_>, _>>()?;
        let maximal = match &self.maximal {
            Some(l) => look(l)?,
            None => self.domains.first().map(|d| d.id).ok_or(SignatureError::Empty)?,
        };
        HhsSignature::from_doc(SignatureDoc {
            domains: self.domains,
            nest,
            orth,
            maximal,
            complexity: self.complexity,
            action: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: u8,
    pub name: String,
    pub passed: bool,
    pub witness: Vec<DomainId>,
    pub detail: String,
}

impl AxiomCheck {
    fn new(axiom: u8, name: &str, witness: Option<(Vec<DomainId>, String)>) -> Self {
        let passed = witness.is_none();
        let (witness, detail) = witness.unwrap_or_default();
        AxiomCheck { axiom, name: name.into(), passed, witness, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks the purely relational axioms (2–6), reporting every failure.
pub fn validate_signature(sig: &HhsSignature) -> ValidationReport {
    let n = sig.n();
    let mut checks = Vec::new();

    let antisym = (0..n)
        .flat_map(|v| (v + 1..n).map(move |w| (v, w)))
        .find(|&(v, w)| sig.le[v][w] && sig.le[w][v])
        .map(|(v, w)| (sig.ids(&[v, w]), "nesting cycle".to_string()));
    checks.push(AxiomCheck::new(2, "nest-partial-order", antisym));

    let top = sig.maximal;
    let unique_max = (0..n)
        .find(|&v| !sig.le[v][top] || (v != top && sig.le[top][v]))
        .map(|v| (sig.ids(&[v]), format!("{} is not below the maximal domain", sig.label(v))));
    checks.push(AxiomCheck::new(2, "unique-maximal", unique_max));

    let irreflexive = sig.self_orth.first().map(|&v| (sig.ids(&[v, v]), "domain orthogonal to itself".to_string()));
    checks.push(AxiomCheck::new(3, "orth-irreflexive", irreflexive));

    let incomparable = sig
        .orth_pairs()
        .into_iter()
        .find(|&(v, w)| sig.comparable(v, w))
        .map(|(v, w)| (sig.ids(&[v, w]), "orthogonal domains are nested".to_string()));
    checks.push(AxiomCheck::new(3, "orth-incomparable", incomparable));

    let mut closure = None;
    'outer: for v in 0..n {
        for w in 0..n {
            if v == w || !sig.le[v][w] {
                continue;
            }
            for u in 0..n {
                if sig.orth[w][u] && !sig.orth[v][u] {
                    closure = Some((sig.ids(&[v, w, u]), "V ⊑ W and W ⊥ U but not V ⊥ U".to_string()));
                    break 'outer;
                }
            }
        }
    }
    checks.push(AxiomCheck::new(3, "orth-nesting-closure", closure));

    let trich = (0..n)
        .flat_map(|v| (v + 1..n).map(move |w| (v, w)))
        .find(|&(v, w)| {
            let kinds = [sig.le[v][w], sig.le[w][v], sig.orth[v][w]];
            kinds.iter().filter(|&&k| k).count() > 1
        })
        .map(|(v, w)| (sig.ids(&[v, w]), "pair carries more than one relation".to_string()));
    checks.push(AxiomCheck::new(4, "relation-trichotomy", trich));

    let chain = sig.longest_chain();
    let complexity = (chain.len() > sig.complexity as usize)
        .then(|| (sig.ids(&chain), format!("chain of {} exceeds complexity {}", chain.len(), sig.complexity)));
    checks.push(AxiomCheck::new(5, "finite-complexity", complexity));

    checks.push(AxiomCheck::new(6, "containers", container_failure(sig)));

    ValidationReport { passed: checks.iter().all(|c| c.passed), checks }
}

fn container_failure(sig: &HhsSignature) -> Option<(Vec<DomainId>, String)> {
    let n = sig.n();
    for w in 0..n {
        for u in 0..n {
            if !sig.properly_nested(u, w) {
                continue;
            }
            let targets: Vec<usize> = (0..n).filter(|&v| sig.le[v][w] && sig.orth[v][u]).collect();
            if targets.is_empty() {
                continue;
            }
            let found = (0..n).any(|q| sig.properly_nested(q, w) && targets.iter().all(|&v| sig.le[v][q]));
            if !found {
                return Some((sig.ids(&[u, w]), format!("no container of {} in {}", sig.label(u), sig.label(w))));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub generator: usize,
    pub preserves_nest: bool,
    pub preserves_orth: bool,
    pub preserves_unbounded: bool,
    pub passed: bool,
    pub witness: Vec<DomainId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionReport {
    pub passed: bool,
    pub generators: Vec<GeneratorReport>,
    /// Orbit partition of the unbounded domains.
    pub orbits: Vec<Vec<DomainId>>,
}

pub fn check_action(sig: &HhsSignature, action: &GroupActionSpec) -> Result<ActionReport, SignatureError> {
    let perms = action
        .generators
        .iter()
        .enumerate()
        .map(|(g, p)| sig.permutation_indices(g, p))
        .collect::<Result<Vec<_>, _>>()?;
    let n = sig.n();
    let mut generators = Vec::new();
    for (g, p) in perms.iter().enumerate() {
        let mut witness = Vec::new();
        let mut preserves_nest = true;
        let mut preserves_orth = true;
        for v in 0..n {
            for w in 0..n {
                if sig.le[v][w] != sig.le[p[v]][p[w]] && preserves_nest {
                    preserves_nest = false;
                    if witness.is_empty() {
                        witness = sig.ids(&[v, w]);
                    }
                }
                if sig.orth[v][w] != sig.orth[p[v]][p[w]] && preserves_orth {
                    preserves_orth = false;
                    if witness.is_empty() {
                        witness = sig.ids(&[v, w]);
                    }
                }
            }
        }
        let bad_flag = (0..n).find(|&v| sig.unbounded(v) != sig.unbounded(p[v]));
        if let (Some(v), true) = (bad_flag, witness.is_empty()) {
            witness = sig.ids(&[v]);
        }
        let preserves_unbounded = bad_flag.is_none();
        generators.push(GeneratorReport {
            generator: g,
            preserves_nest,
            preserves_orth,
            preserves_unbounded,
            passed: preserves_nest && preserves_orth && preserves_unbounded,
            witness,
        });
    }
    let orbits = orbit_partition(n, &perms)
        .into_iter()
        .map(|o| o.into_iter().filter(|&v| sig.unbounded(v)).map(|v| sig.id(v)).collect::<Vec<_>>())
        .filter(|o| !o.is_empty())
        .collect();
    Ok(ActionReport { passed: generators.iter().all(|g| g.passed), generators, orbits })
}

/// Orbits of `0..n` under the group generated by `perms`, each sorted,
/// listed by smallest member.
pub fn orbit_partition(n: usize, perms: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for p in perms {
        for (v, &pv) in p.iter().enumerate() {
            let (a, b) = (find(&mut parent, v), find(&mut parent, pv));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sab() -> SignatureBuilder {
        SignatureBuilder::new(2)
            .domain("S", true)
            .domain("A", true)
            .domain("B", true)
            .nest("A", "S")
            .nest("B", "S")
            .orth("A", "B")
    }

    #[test]
    fn product_signature_passes() {
        let sig = sab().build().unwrap();
        let r = validate_signature(&sig);
        assert!(r.passed, "{:?}", r.failed());
    }

    #[test]
    fn orth_comparable_conflict() {
        let sig = sab().nest("A", "B").build().unwrap();
        let r = validate_signature(&sig);
        let c = r.check("orth-incomparable").unwrap();
        assert!(!c.passed);
        assert_eq!(c.witness, vec![DomainId(1), DomainId(2)]);
    }

    #[test]
    fn container_failure_witness() {
        let sig = SignatureBuilder::new(2)
            .domain("S", true)
            .domain("A", true)
            .domain("B", true)
            .domain("C", true)
            .nest("A", "S")
            .nest("B", "S")
            .nest("C", "S")
            .orth("A", "B")
            .orth("A", "C")
            .build()
            .unwrap();
        let r = validate_signature(&sig);
        let c = r.check("containers").unwrap();
        assert!(!c.passed);
        assert_eq!(c.witness, vec![DomainId(1), DomainId(0)]);
        assert_eq!(r.failed(), vec!["containers"]);
    }

    #[test]
    fn relations() {
        let sig = sab().domain("C", true).nest("C", "S").build().unwrap();
        assert_eq!(sig.relation_of(DomainId(1), DomainId(0)).unwrap(), Relation::NestedUp);
        assert_eq!(sig.relation_of(DomainId(0), DomainId(1)).unwrap(), Relation::NestedDown);
        assert_eq!(sig.relation_of(DomainId(1), DomainId(2)).unwrap(), Relation::Orthogonal);
        assert_eq!(sig.relation_of(DomainId(2), DomainId(3)).unwrap(), Relation::Transverse);
        assert_eq!(sig.relation_of(DomainId(2), DomainId(2)).unwrap(), Relation::Equal);
        assert_eq!(sig.relation_of(DomainId(9), DomainId(2)), Err(SignatureError::UnknownId(DomainId(9))));
    }

    #[test]
    fn levels() {
        let chain = SignatureBuilder::new(3)
            .domain("S", true)
            .domain("I", true)
            .domain("A", true)
            .nest("I", "S")
            .nest("A", "I")
            .build()
            .unwrap();
        assert_eq!(chain.level(DomainId(0)).unwrap(), 1);
        assert_eq!(chain.level(DomainId(2)).unwrap(), 3);
        let diamond = SignatureBuilder::new(3)
            .domain("S", true)
            .domain("I1", true)
            .domain("I2", true)
            .domain("A", true)
            .nest("I1", "S")
            .nest("I2", "S")
            .nest("A", "I1")
            .nest("A", "I2")
            .build()
            .unwrap();
        assert_eq!(diamond.level(DomainId(3)).unwrap(), 3);
    }

    #[test]
    fn dangling_id_is_structural() {
        let doc = SignatureDoc {
            domains: vec![DomainDecl { id: DomainId(0), unbounded: true, label: "S".into() }],
            nest: vec![(DomainId(3), DomainId(0))],
            orth: vec![],
            maximal: DomainId(0),
            complexity: 1,
            action: None,
        };
        assert_eq!(HhsSignature::from_doc(doc), Err(SignatureError::UnknownId(DomainId(3))));
    }

    #[test]
    fn actions() {
        let sig = sab().build().unwrap();
        let id = GroupActionSpec { generators: vec![vec![DomainId(0), DomainId(1), DomainId(2)]] };
        let r = check_action(&sig, &id).unwrap();
        assert!(r.passed);
        assert_eq!(r.orbits.len(), 3);
        let swap = GroupActionSpec { generators: vec![vec![DomainId(0), DomainId(2), DomainId(1)]] };
        let r = check_action(&sig, &swap).unwrap();
        assert!(r.passed);
        assert_eq!(r.orbits, vec![vec![DomainId(0)], vec![DomainId(1), DomainId(2)]]);
        let bad = GroupActionSpec { generators: vec![vec![DomainId(1), DomainId(0), DomainId(2)]] };
        let r = check_action(&sig, &bad).unwrap();
        assert!(!r.passed);
        assert!(!r.generators[0].preserves_nest);
        let broken = GroupActionSpec { generators: vec![vec![DomainId(0), DomainId(0), DomainId(2)]] };
        assert!(matches!(check_action(&sig, &broken), Err(SignatureError::NotBijection { .. })));
    }

    #[test]
    fn document_round_trip() {
        let sig = sab().domain("A1", true).nest("A1", "A").build().unwrap();
        let doc = sig.to_doc();
        assert_eq!(doc.nest, vec![(DomainId(1), DomainId(0)), (DomainId(2), DomainId(0)), (DomainId(3), DomainId(1))]);
        let text = serde_json::to_string(&sig).unwrap();
        let back: HhsSignature = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sig);
    }
}
