//! Structure-level transformations: electrifying the maximal space, adding
//! coset domains, detecting isolated orthogonality and the cusp structure.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, MetricsError, VertexSet};
use crate::model::{product_region, verify_axioms, ModelError, RealizedModel};
use crate::signature::{DomainDecl, DomainId, HhsSignature, SignatureBuilder, SignatureError};
use crate::{Distances, Graph};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("coset {0} is empty")]
    EmptyCoset(String),
    #[error("coset {0} is the whole ambient space")]
    DegenerateCoset(String),
    #[error("coset {0} has no declared nesting oracle")]
    MissingOracle(String),
    #[error("model fails axiom checks: {0:?}")]
    AxiomsFailed(Vec<String>),
    #[error("coset family not hyperbolically embedded at this scale: tests disagree on ({domain}, {coset})")]
    Disagreement { domain: DomainId, coset: String },
    #[error("family does not isolate orthogonality: {0}")]
    NotIsolating(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Ambient graph plus unit edges inside each non-maximal product region.
pub fn electrify_maximal(m: &RealizedModel) -> Result<Graph, TransformError> {
    let p = m.prepare()?;
    let mut g = m.ambient.clone();
    for w in 0..m.sig.n() {
        if w == m.sig.maximal() {
            continue;
        }
        let region = product_region(&p, w).vertices;
        let pts = region.as_slice();
        for (i, &u) in pts.iter().enumerate() {
            for &v in &pts[i + 1..] {
                g.add_edge(u, v, 1.0);
            }
        }
    }
    Ok(g.canonical())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximizedEntry {
    pub domain: DomainId,
    pub nested_unbounded: bool,
    pub orthogonal_unbounded: bool,
    pub exemption: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximizedReport {
    pub passed: bool,
    pub entries: Vec<MaximizedEntry>,
    pub failures: Vec<DomainId>,
}

/// Every domain needs an unbounded domain nested into it and one orthogonal
/// to it. The maximal domain and `coset_domains` are exempt from the second.
pub fn check_maximized(sig: &HhsSignature, coset_domains: &[DomainId]) -> MaximizedReport {
    let unb = sig.unbounded_indices();
    let entries: Vec<MaximizedEntry> = (0..sig.n())
        .map(|w| {
            let nested_unbounded = unb.iter().any(|&u| sig.nested(u, w));
            let orthogonal_unbounded = unb.iter().any(|&u| sig.orthogonal(u, w));
            let exemption = if w == sig.maximal() {
                Some("maximal domain".to_string())
            } else if coset_domains.contains(&sig.id(w)) {
                Some("coset domain".to_string())
            } else {
                None
            };
            let passed = nested_unbounded && (orthogonal_unbounded || exemption.is_some());
            MaximizedEntry { domain: sig.id(w), nested_unbounded, orthogonal_unbounded, exemption, passed }
        })
        .collect();
    let failures: Vec<DomainId> = entries.iter().filter(|e| !e.passed).map(|e| e.domain).collect();
    MaximizedReport { passed: failures.is_empty(), entries, failures }
}

/// A coset `F(Q)` in the ambient graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosetSpec {
    pub label: String,
    pub vertices: VertexSet,
    /// Declared domains nested into `Q`; computed from the model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nested: Option<Vec<DomainId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    Fixed(f64),
    /// `3E + 1`.
    Default,
    /// Chosen to maximize agreement of the two nesting tests.
    Auto,
}

/// Outcome of the nesting tests for one `(V, Q)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub domain: DomainId,
    pub coset: String,
    /// `diam π_V(F(Q))`.
    pub projection_diameter: f64,
    /// `max d(x, F(Q))` over `x ∈ P_V`.
    pub region_distance: f64,
    /// Best density gap of `π_W(F(Q))` over unbounded `W ⊥ V`.
    pub orthogonal_density: Option<f64>,
    pub large_projection: bool,
    pub region_contained: bool,
    pub orthogonal_onto: bool,
    pub agree: bool,
    /// Added by transitive closure although the tests failed.
    pub closure_added: bool,
    pub margin_projection: f64,
    pub margin_region: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosetExtension {
    pub signature: HhsSignature,
    pub coset_domains: Vec<DomainId>,
    pub threshold: f64,
    pub calibrated: bool,
    pub provenance: Vec<ProvenanceEntry>,
    #[serde(skip)]
    pub model: Option<RealizedModel>,
}

fn check_cosets(m: &RealizedModel, cosets: &[CosetSpec]) -> Result<(), TransformError> {
    for c in cosets {
        if c.vertices.is_empty() {
            return Err(TransformError::EmptyCoset(c.label.clone()));
        }
        if let Some(v) = c.vertices.max_vertex().filter(|&v| v >= m.ambient.n) {
            return Err(MetricsError::VertexOutOfRange { vertex: v, n: m.ambient.n }.into());
        }
        if c.vertices.len() == m.ambient.n {
            return Err(TransformError::DegenerateCoset(c.label.clone()));
        }
    }
    Ok(())
}

/// Old signature plus one domain per coset nested into the maximal domain,
/// with `V ⊑ Q` for each listed pair. Coset domains are pairwise transverse.
fn extend_signature(
    sig: &HhsSignature,
    cosets: &[CosetSpec],
    nested: &[Vec<usize>],
    unbounded: &[bool],
) -> Result<(HhsSignature, Vec<DomainId>), TransformError> {
    let mut doc = sig.to_doc();
    doc.action = None;
    let base = sig.ids(&(0..sig.n()).collect::<Vec<_>>()).into_iter().map(|d| d.0).max().unwrap_or(0) + 1;
    let mut ids = Vec::new();
    for (k, c) in cosets.iter().enumerate() {
        let id = DomainId(base + k as u32);
        ids.push(id);
        doc.domains.push(DomainDecl { id, unbounded: unbounded[k], label: c.label.clone() });
        doc.nest.push((id, doc.maximal));
        for &v in &nested[k] {
            doc.nest.push((sig.id(v), id));
        }
    }
    doc.complexity += 1;
    Ok((HhsSignature::from_doc(doc)?, ids))
}

/// Adds coset domains using declared nesting oracles only.
pub fn add_cosets_signature_only(sig: &HhsSignature, cosets: &[CosetSpec]) -> Result<(HhsSignature, Vec<DomainId>), TransformError> {
    let mut nested = Vec::new();
    for c in cosets {
        let decl = c.nested.as_ref().ok_or_else(|| TransformError::MissingOracle(c.label.clone()))?;
        nested.push(decl.iter().map(|&id| sig.index(id)).collect::<Result<Vec<_>, _>>()?);
    }
    extend_signature(sig, cosets, &nested, &vec![true; cosets.len()])
}

struct PairStats {
    v: usize,
    q: usize,
    a: f64,
    b: f64,
    density: Option<f64>,
}

fn calibrate(stats: &[PairStats], fallback: f64) -> f64 {
    let mut cands: Vec<f64> = stats.iter().flat_map(|s| [s.a, s.b]).filter(|x| x.is_finite()).collect();
    cands.push(fallback);
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    let score = |t: f64| stats.iter().filter(|s| (s.a > t + TOL) == (s.b <= t + TOL)).count();
    let mut best = fallback;
    let mut best_score = score(fallback);
    for &t in &cands {
        let sc = score(t);
        if sc > best_score || (sc == best_score && (t - fallback).abs() < (best - fallback).abs()) {
            best = t;
            best_score = sc;
        }
    }
    best
}

/// Adds one domain per coset to a realized model. `V ⊑ Q` when
/// `diam π_V(F(Q)) > B`; the product-region containment test must agree.
pub fn add_hyperbolically_embedded(
    m: &RealizedModel,
    cosets: &[CosetSpec],
    threshold: Threshold,
) -> Result<CosetExtension, TransformError> {
    check_cosets(m, cosets)?;
    let report = verify_axioms(m)?;
    if !report.passed {
        return Err(TransformError::AxiomsFailed(report.failed().into_iter().map(String::from).collect()));
    }
    let p = m.prepare()?;
    let sig = &m.sig;
    let e = m.constant;
    let candidates: Vec<usize> = (0..sig.n()).filter(|&v| v != sig.maximal()).collect();
    let regions: Vec<VertexSet> = (0..sig.n()).map(|v| product_region(&p, v).vertices).collect();
    let jobs: Vec<(usize, usize)> = (0..cosets.len()).flat_map(|q| candidates.iter().map(move |&v| (v, q))).collect();
    let stats: Vec<PairStats> = jobs
        .par_iter()
        .map(|&(v, q)| {
            let coset = &cosets[q].vertices;
            let a = p.spaces[v].set_diameter(&p.image(v, coset));
            let b = if regions[v].is_empty() {
                f64::INFINITY
            } else {
                regions[v].iter().map(|x| p.ambient.to_set(x, coset)).fold(0.0, f64::max)
            };
            let density = sig
                .orth_set(v)
                .into_iter()
                .filter(|&w| sig.unbounded(w))
                .map(|w| {
                    let image = p.image(w, coset);
                    (0..m.spaces[w].n).map(|t| p.spaces[w].to_set(t, &image)).fold(0.0, f64::max)
                })
                .reduce(f64::min);
            PairStats { v, q, a, b, density }
        })
        .collect();
    let fallback = 3.0 * e + 1.0;
    let (b_thr, calibrated) = match threshold {
        Threshold::Fixed(t) => (t, false),
        Threshold::Default => (fallback, false),
        Threshold::Auto => (calibrate(&stats, fallback), true),
    };
    let mut nested = vec![Vec::new(); cosets.len()];
    for s in &stats {
        if s.a > b_thr + TOL {
            nested[s.q].push(s.v);
        }
    }
    let mut entries = Vec::new();
    for s in &stats {
        let large = s.a > b_thr + TOL;
        let contained = s.b <= b_thr + TOL;
        if large != contained {
            return Err(TransformError::Disagreement { domain: sig.id(s.v), coset: cosets[s.q].label.clone() });
        }
        entries.push((s, large, contained));
    }

    // 𝒞_𝔥 S cones off each π_S(F(Q)); 𝒞_𝔥 Q is the hull of π_S(F(Q)) in 𝒞S.
    let s_idx = sig.maximal();
    let d_s = &p.spaces[s_idx];
    let images: Vec<VertexSet> = cosets.iter().map(|c| p.image(s_idx, &c.vertices)).collect();
    let hulls: Vec<VertexSet> = images.iter().map(|img| metrics::convex_hull(d_s, img)).collect();
    let hull_graphs: Vec<Graph> = hulls.iter().map(|h| m.spaces[s_idx].induced(h)).collect();
    let hull_diams: Vec<f64> = hull_graphs
        .iter()
        .map(|g| metrics::all_pairs_distances(g).map(|d| d.diameter()))
        .collect::<Result<_, _>>()?;
    let unbounded: Vec<bool> = hull_diams.iter().map(|&d| d > b_thr + TOL).collect();
    let (hsig, ids) = extend_signature(sig, cosets, &nested, &unbounded)?;

    let provenance = entries
        .into_iter()
        .map(|(s, large, contained)| {
            let q_idx = hsig.index(ids[s.q]).expect("new domain");
            let closure_added = !large && hsig.nested(s.v, q_idx);
            ProvenanceEntry {
                domain: sig.id(s.v),
                coset: cosets[s.q].label.clone(),
                projection_diameter: s.a,
                region_distance: s.b,
                orthogonal_density: s.density,
                large_projection: large,
                region_contained: contained,
                orthogonal_onto: s.density.is_some_and(|d| d <= b_thr + TOL),
                agree: large == contained,
                closure_added,
                margin_projection: s.a - b_thr,
                margin_region: b_thr - s.b,
            }
        })
        .collect();

    let model = build_h_model(m, &p.spaces, &hsig, &ids, &images, &hulls, hull_graphs)?;
    Ok(CosetExtension { signature: hsig, coset_domains: ids, threshold: b_thr, calibrated, provenance, model: Some(model) })
}

/// Closest-point projection onto `hull` in `𝒞S`, reindexed into the hull.
fn hull_projection(d_s: &Distances, hull: &VertexSet, source: &VertexSet) -> Result<VertexSet, MetricsError> {
    let proj = metrics::project_set(d_s, hull, source)?;
    Ok(proj.iter().map(|v| hull.as_slice().binary_search(&v).expect("projection lies in hull")).collect())
}

fn build_h_model(
    m: &RealizedModel,
    spaces_d: &[Distances],
    hsig: &HhsSignature,
    ids: &[DomainId],
    images: &[VertexSet],
    hulls: &[VertexSet],
    hull_graphs: Vec<Graph>,
) -> Result<RealizedModel, TransformError> {
    let sig = &m.sig;
    let s_idx = sig.maximal();
    let d_s = &spaces_d[s_idx];
    let mut spaces = m.spaces.clone();
    let mut coned = m.spaces[s_idx].clone();
    for img in images {
        let pts = img.as_slice();
        for (i, &u) in pts.iter().enumerate() {
            for &v in &pts[i + 1..] {
                coned.add_edge(u, v, 1.0);
            }
        }
    }
    spaces[s_idx] = coned.canonical();
    spaces.extend(hull_graphs);
    let mut proj = m.proj.clone();
    for hull in hulls {
        let tau = m.proj[s_idx].iter().map(|ps| hull_projection(d_s, hull, ps)).collect::<Result<Vec<_>, _>>()?;
        proj.push(tau);
    }
    let mut rel_proj: BTreeMap<(usize, usize), VertexSet> = m.rel_proj.clone();
    let qs: Vec<usize> = ids.iter().map(|&id| hsig.index(id)).collect::<Result<_, _>>()?;
    for (k, &q) in qs.iter().enumerate() {
        rel_proj.insert((q, s_idx), images[k].clone());
        for v in 0..sig.n() {
            if v == s_idx {
                continue;
            }
            if hsig.properly_nested(v, q) || hsig.transverse(v, q) {
                rel_proj.insert((v, q), hull_projection(d_s, &hulls[k], &m.rel_proj[&(v, s_idx)])?);
            }
            if hsig.transverse(q, v) {
                let all: VertexSet = images[k].iter().flat_map(|x| m.proj[v][x].iter()).collect();
                rel_proj.insert((q, v), all);
            }
        }
        for (k2, &q2) in qs.iter().enumerate() {
            if k2 != k {
                rel_proj.insert((q, q2), hull_projection(d_s, &hulls[k2], &images[k])?);
            }
        }
    }
    Ok(RealizedModel { sig: hsig.clone(), ambient: m.ambient.clone(), spaces, proj, rel_proj, constant: m.constant })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IsolationResult {
    Found { family: Vec<DomainId> },
    /// An orthogonal pair with no admissible common ancestor.
    Uncovered { pair: (DomainId, DomainId) },
    /// Every cover forces two members sharing a nested domain; lists
    /// `(I₁, I₂, W)` overlaps among candidates.
    Infeasible { conflicts: Vec<(DomainId, DomainId, DomainId)> },
    Inconclusive { candidates: usize, limit: usize },
}

pub const ISOLATION_LIMIT: usize = 20;

/// Smallest family (then lexicographically smallest ids) such that every
/// orthogonal pair nests properly into a member and no domain nests into
/// two members.
pub fn detect_isolated_orthogonality(sig: &HhsSignature, limit: usize) -> IsolationResult {
    let n = sig.n();
    let pairs = sig.orth_pairs();
    let mut pair_cands: Vec<Vec<usize>> = Vec::new();
    for &(v, w) in &pairs {
        let c: Vec<usize> =
            (0..n).filter(|&i| i != sig.maximal() && sig.properly_nested(v, i) && sig.properly_nested(w, i)).collect();
        if c.is_empty() {
            return IsolationResult::Uncovered { pair: (sig.id(v), sig.id(w)) };
        }
        pair_cands.push(c);
    }
    let mut cands: Vec<usize> = pair_cands.iter().flatten().copied().collect();
    cands.sort_unstable();
    cands.dedup();
    if cands.len() > limit {
        return IsolationResult::Inconclusive { candidates: cands.len(), limit };
    }
    let overlap = |a: usize, b: usize| (0..n).find(|&u| sig.nested(u, a) && sig.nested(u, b));
    let mut best: Option<Vec<usize>> = None;
    let mut chosen = Vec::new();
    search(&pairs, &pair_cands, sig, &overlap, &mut chosen, &mut best);
    match best {
        Some(mut f) => {
            f.sort_unstable();
            IsolationResult::Found { family: sig.ids(&f) }
        }
        None => {
            let mut conflicts = Vec::new();
            for (i, &a) in cands.iter().enumerate() {
                for &b in &cands[i + 1..] {
                    if let Some(u) = overlap(a, b) {
                        conflicts.push((sig.id(a), sig.id(b), sig.id(u)));
                    }
                }
            }
            IsolationResult::Infeasible { conflicts }
        }
    }
}

fn search(
    pairs: &[(usize, usize)],
    pair_cands: &[Vec<usize>],
    sig: &HhsSignature,
    overlap: &dyn Fn(usize, usize) -> Option<usize>,
    chosen: &mut Vec<usize>,
    best: &mut Option<Vec<usize>>,
) {
    let key = |f: &[usize]| {
        let mut s = f.to_vec();
        s.sort_unstable();
        (s.len(), s)
    };
    if let Some(b) = best {
        if chosen.len() > b.len() {
            return;
        }
    }
    let uncovered = pairs.iter().position(|&(v, w)| !chosen.iter().any(|&i| sig.properly_nested(v, i) && sig.properly_nested(w, i)));
    match uncovered {
        None => {
            if best.as_ref().map_or(true, |b| key(chosen) < key(b)) {
                *best = Some(chosen.clone());
            }
        }
        Some(k) => {
            for &c in &pair_cands[k] {
                if chosen.iter().any(|&i| overlap(i, c).is_some()) {
                    continue;
                }
                chosen.push(c);
                search(pairs, pair_cands, sig, overlap, chosen, best);
                chosen.pop();
            }
        }
    }
}

/// Checks the three isolation conditions for a given family.
pub fn check_isolation(sig: &HhsSignature, family: &[usize]) -> Result<(), String> {
    if family.contains(&sig.maximal()) {
        return Err(format!("family contains the maximal domain {}", sig.id(sig.maximal())));
    }
    for (v, w) in sig.orth_pairs() {
        if !family.iter().any(|&i| sig.properly_nested(v, i) && sig.properly_nested(w, i)) {
            return Err(format!("orthogonal pair ({}, {}) is not covered", sig.id(v), sig.id(w)));
        }
    }
    for (k, &a) in family.iter().enumerate() {
        for &b in &family[k + 1..] {
            if let Some(u) = (0..sig.n()).find(|&u| sig.nested(u, a) && sig.nested(u, b)) {
                return Err(format!("domain {} nests into both {} and {}", sig.id(u), sig.id(a), sig.id(b)));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    ElectrifiedAmbient,
    Horoball,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTag {
    pub domain: DomainId,
    pub kind: SpaceKind,
    /// Domain of the input signature this one stands for.
    pub source: DomainId,
}

/// `{S} ∪ 𝔦` with every member of `𝔦` properly nested in `S` and the
/// members pairwise transverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspSignature {
    pub signature: HhsSignature,
    pub tags: Vec<SpaceTag>,
}

pub fn build_cusp_signature(sig: &HhsSignature, family: &[DomainId]) -> Result<CuspSignature, TransformError> {
    let idx: Vec<usize> = family.iter().map(|&id| sig.index(id)).collect::<Result<_, _>>()?;
    check_isolation(sig, &idx).map_err(TransformError::NotIsolating)?;
    let top = sig.label(sig.maximal()).to_string();
    let mut b = SignatureBuilder::new(if idx.is_empty() { 1 } else { 2 }).domain(&top, true);
    for &i in &idx {
        b = b.domain(sig.label(i), true).nest(sig.label(i), &top);
    }
    let signature = b.build()?;
    let mut tags = vec![SpaceTag { domain: signature.id(0), kind: SpaceKind::ElectrifiedAmbient, source: sig.id(sig.maximal()) }];
    for (k, &i) in idx.iter().enumerate() {
        tags.push(SpaceTag { domain: signature.id(k + 1), kind: SpaceKind::Horoball, source: sig.id(i) });
    }
    Ok(CuspSignature { signature, tags })
}
