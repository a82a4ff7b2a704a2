//! Class-level simplicial boundary: one vertex class per unbounded domain,
//! edges between orthogonal classes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signature::{orbit_partition, DomainId, GroupActionSpec, HhsSignature, SignatureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundaryError {
    #[error("generator {0} does not preserve the signature relations")]
    Action(usize),
    #[error("domain subset is empty")]
    EmptySubset,
    #[error("domain {0} is bounded")]
    Bounded(DomainId),
    #[error("subset is not downward closed: {lower} ⊑ {upper} is missing {lower}")]
    NotDownwardClosed { lower: DomainId, upper: DomainId },
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSubset {
    pub label: String,
    pub domains: Vec<DomainId>,
}

impl DomainSubset {
    /// Unbounded domains nested into `w`.
    pub fn nesting_closure(sig: &HhsSignature, w: usize) -> Self {
        let domains = (0..sig.n()).filter(|&v| sig.nested(v, w) && sig.unbounded(v)).map(|v| sig.id(v)).collect();
        DomainSubset { label: format!("closure({})", sig.label(w)), domains }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryComplex {
    /// Unbounded domains in id order.
    pub classes: Vec<DomainId>,
    /// Orthogonal pairs as class positions `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// Generator permutations of class positions.
    pub action: Vec<Vec<usize>>,
}

impl BoundaryComplex {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).is_ok()
    }

    pub fn position(&self, id: DomainId) -> Option<usize> {
        self.classes.iter().position(|&c| c == id)
    }

    pub fn edge_ids(&self) -> Vec<(DomainId, DomainId)> {
        self.edges.iter().map(|&(i, j)| (self.classes[i], self.classes[j])).collect()
    }

    /// Full subcomplex on the given class positions; the action is dropped.
    pub fn restrict(&self, keep: &[usize]) -> BoundaryComplex {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let pos = |c: usize| keep.binary_search(&c).ok();
        let edges = self.edges.iter().filter_map(|&(i, j)| Some((pos(i)?, pos(j)?))).collect();
        BoundaryComplex { classes: keep.iter().map(|&c| self.classes[c]).collect(), edges, action: Vec::new() }
    }
}

/// Uses the signature's own action when `action` is `None`.
pub fn build_boundary_complex(sig: &HhsSignature, action: Option<&GroupActionSpec>) -> Result<BoundaryComplex, BoundaryError> {
    let unb = sig.unbounded_indices();
    let classes: Vec<DomainId> = unb.iter().map(|&i| sig.id(i)).collect();
    let mut edges = Vec::new();
    for a in 0..unb.len() {
        for b in a + 1..unb.len() {
            if sig.orthogonal(unb[a], unb[b]) {
                edges.push((a, b));
            }
        }
    }
    let mut perms = Vec::new();
    if let Some(spec) = action.or(sig.action()) {
        let report = sig.check_action(spec)?;
        if let Some(g) = report.generators.iter().find(|g| !g.passed) {
            return Err(BoundaryError::Action(g.generator));
        }
        let checked = sig.clone().with_action(Some(spec.clone()))?;
        for perm in checked.action_indices() {
            perms.push(unb.iter().map(|&i| unb.iter().position(|&j| j == perm[i]).expect("unboundedness preserved")).collect());
        }
    }
    Ok(BoundaryComplex { classes, edges, action: perms })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub classes: Vec<DomainId>,
    /// Contains an orthogonal pair; otherwise an isolated vertex class.
    pub positive_dimensional: bool,
}

fn component_positions(bc: &BoundaryComplex) -> Vec<Vec<usize>> {
    let pairs: Vec<Vec<usize>> = bc.edges.iter().map(|&(i, j)| vec![i, j]).collect();
    let mut perms = Vec::new();
    for p in pairs {
        let mut perm: Vec<usize> = (0..bc.len()).collect();
        perm[p[0]] = p[1];
        perm[p[1]] = p[0];
        perms.push(perm);
    }
    orbit_partition(bc.len(), &perms)
}

/// Connected components ordered by smallest class.
pub fn components(bc: &BoundaryComplex) -> Vec<Component> {
    component_positions(bc)
        .into_iter()
        .map(|c| Component {
            positive_dimensional: bc.edges.iter().any(|&(i, j)| c.contains(&i) && c.contains(&j)),
            classes: c.iter().map(|&i| bc.classes[i]).collect(),
        })
        .collect()
}

/// Split into two nonempty sides with every cross pair orthogonal: the
/// complement component of the first class against the rest.
pub fn is_join(bc: &BoundaryComplex) -> Option<(Vec<DomainId>, Vec<DomainId>)> {
    let n = bc.len();
    if n < 2 {
        return None;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && v != u && !bc.adjacent(u, v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        return None;
    }
    let side = |flag: bool| (0..n).filter(|&i| seen[i] == flag).map(|i| bc.classes[i]).collect();
    Some((side(true), side(false)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EyrieReport {
    pub eyries: Vec<DomainId>,
    pub valid: bool,
    pub witness: Option<(DomainId, DomainId)>,
    /// The subset is taken as given; it is not certified to come from a subgroup.
    pub trusted_input: bool,
}

/// ⊑-maximal members of `subset`, valid when pairwise orthogonal.
pub fn eyries(sig: &HhsSignature, subset: &DomainSubset) -> Result<EyrieReport, BoundaryError> {
    if subset.domains.is_empty() {
        return Err(BoundaryError::EmptySubset);
    }
    let mut idx = Vec::new();
    for &id in &subset.domains {
        let i = sig.index(id)?;
        if !sig.unbounded(i) {
            return Err(BoundaryError::Bounded(id));
        }
        idx.push(i);
    }
    idx.sort_unstable();
    idx.dedup();
    let maximal: Vec<usize> = idx.iter().copied().filter(|&v| !idx.iter().any(|&w| sig.properly_nested(v, w))).collect();
    let mut witness = None;
    'outer: for (k, &a) in maximal.iter().enumerate() {
        for &b in &maximal[k + 1..] {
            if !sig.orthogonal(a, b) {
                witness = Some((sig.id(a), sig.id(b)));
                break 'outer;
            }
        }
    }
    Ok(EyrieReport { eyries: sig.ids(&maximal), valid: witness.is_none(), witness, trusted_input: true })
}

/// Full subcomplex on a downward-closed set of unbounded domains.
pub fn limit_set_subcomplex(sig: &HhsSignature, bc: &BoundaryComplex, closure: &DomainSubset) -> Result<BoundaryComplex, BoundaryError> {
    let mut idx = Vec::new();
    for &id in &closure.domains {
        let i = sig.index(id)?;
        if !sig.unbounded(i) {
            return Err(BoundaryError::Bounded(id));
        }
        idx.push(i);
    }
    for &w in &idx {
        for v in sig.unbounded_indices() {
            if sig.nested(v, w) && !idx.contains(&v) {
                return Err(BoundaryError::NotDownwardClosed { lower: sig.id(v), upper: sig.id(w) });
            }
        }
    }
    let keep: Vec<usize> = idx.iter().filter_map(|&i| bc.position(sig.id(i))).collect();
    Ok(bc.restrict(&keep))
}

/// Components mapped onto themselves by every generator.
pub fn invariant_components(bc: &BoundaryComplex) -> Vec<Component> {
    let all = components(bc);
    component_positions(bc)
        .into_iter()
        .zip(all)
        .filter(|(pos, _)| bc.action.iter().all(|perm| pos.iter().all(|&i| pos.contains(&perm[i]))))
        .map(|(_, c)| c)
        .collect()
}

/// Serializable summary of a complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryDoc {
    pub classes: Vec<DomainId>,
    pub edges: Vec<(DomainId, DomainId)>,
    pub components: Vec<Component>,
    pub join: Option<(Vec<DomainId>, Vec<DomainId>)>,
    pub invariant_components: Vec<Component>,
}

impl BoundaryDoc {
    pub fn new(bc: &BoundaryComplex) -> Self {
        BoundaryDoc {
            classes: bc.classes.clone(),
            edges: bc.edge_ids(),
            components: components(bc),
            join: is_join(bc),
            invariant_components: invariant_components(bc),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{product_signature, rel_hyp_signature};
    use crate::signature::SignatureBuilder;

    fn ids(v: &[u32]) -> Vec<DomainId> {
        v.iter().map(|&i| DomainId(i)).collect()
    }

    #[test]
    fn product_complex() {
        let bc = build_boundary_complex(&product_signature(), None).unwrap();
        assert_eq!(bc.classes, ids(&[0, 1, 2]));
        assert_eq!(bc.edge_ids(), vec![(DomainId(1), DomainId(2))]);
        let comps = components(&bc);
        assert_eq!(comps.len(), 2);
        assert!(!comps[0].positive_dimensional);
        assert!(comps[1].positive_dimensional);
    }

    #[test]
    fn only_top_unbounded() {
        let sig = SignatureBuilder::new(2).domain("S", true).domain("A", false).nest("A", "S").build().unwrap();
        let bc = build_boundary_complex(&sig, None).unwrap();
        assert_eq!((bc.len(), bc.edges.len()), (1, 0));
    }

    #[test]
    fn rel_hyp_components() {
        let sig = rel_hyp_signature(2);
        let bc = build_boundary_complex(&sig, None).unwrap();
        assert_eq!(bc.classes, ids(&[0, 2, 3, 5, 6]));
        let comps = components(&bc);
        let shapes: Vec<(Vec<DomainId>, bool)> = comps.into_iter().map(|c| (c.classes, c.positive_dimensional)).collect();
        assert_eq!(shapes, vec![(ids(&[0]), false), (ids(&[2, 3]), true), (ids(&[5, 6]), true)]);
    }

    #[test]
    fn joins() {
        let two = BoundaryComplex { classes: ids(&[0, 1]), edges: vec![(0, 1)], action: vec![] };
        assert_eq!(is_join(&two), Some((ids(&[0]), ids(&[1]))));
        let apart = BoundaryComplex { classes: ids(&[0, 1]), edges: vec![], action: vec![] };
        assert_eq!(is_join(&apart), None);
        let bip = BoundaryComplex { classes: ids(&[0, 1, 2, 3]), edges: vec![(0, 2), (0, 3), (1, 2), (1, 3)], action: vec![] };
        assert_eq!(is_join(&bip), Some((ids(&[0, 1]), ids(&[2, 3]))));
    }

    #[test]
    fn eyrie_cases() {
        let sig = SignatureBuilder::new(3)
            .domain("S", true)
            .domain("A", true)
            .domain("B", true)
            .domain("A'", true)
            .domain("C", true)
            .nest("A", "S")
            .nest("B", "S")
            .nest("A'", "A")
            .nest("C", "S")
            .orth("A", "B")
            .build()
            .unwrap();
        let r = eyries(&sig, &DomainSubset { label: "H".into(), domains: ids(&[1, 2, 3]) }).unwrap();
        assert_eq!((r.eyries, r.valid), (ids(&[1, 2]), true));
        let bad = eyries(&sig, &DomainSubset { label: "H".into(), domains: ids(&[1, 4]) }).unwrap();
        assert_eq!(bad.witness, Some((DomainId(1), DomainId(4))));
        assert_eq!(eyries(&sig, &DomainSubset { label: "H".into(), domains: vec![] }), Err(BoundaryError::EmptySubset));
        let block = rel_hyp_signature(1);
        let closure = DomainSubset::nesting_closure(&block, 1);
        assert_eq!(closure.domains, ids(&[2, 3]));
        assert_eq!(eyries(&block, &closure).unwrap().eyries.len(), 2);
    }

    #[test]
    fn limit_sets() {
        let sig = rel_hyp_signature(2);
        let bc = build_boundary_complex(&sig, None).unwrap();
        let sub = limit_set_subcomplex(&sig, &bc, &DomainSubset::nesting_closure(&sig, 1)).unwrap();
        assert_eq!(sub.edge_ids(), vec![(DomainId(2), DomainId(3))]);
        let none = limit_set_subcomplex(&sig, &bc, &DomainSubset { label: "∅".into(), domains: vec![] }).unwrap();
        assert!(none.is_empty());
        let err = limit_set_subcomplex(&sig, &bc, &DomainSubset { label: "S".into(), domains: ids(&[0]) });
        assert!(matches!(err, Err(BoundaryError::NotDownwardClosed { .. })));
    }

    #[test]
    fn swapped_blocks_are_not_invariant() {
        let sig = rel_hyp_signature(2);
        let swap = GroupActionSpec { generators: vec![ids(&[0, 4, 5, 6, 1, 2, 3])] };
        let bc = build_boundary_complex(&sig, Some(&swap)).unwrap();
        let inv = invariant_components(&bc);
        assert!(inv.iter().all(|c| !c.positive_dimensional));
        let inner = GroupActionSpec { generators: vec![ids(&[0, 1, 3, 2, 4, 5, 6])] };
        let bc = build_boundary_complex(&sig, Some(&inner)).unwrap();
        assert_eq!(invariant_components(&bc).len(), 3);
    }
}
