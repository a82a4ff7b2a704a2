//! Verdicts: boundary criteria for relative hyperbolicity, the quotient
//! boundary, wideness and thickness audits.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{
    build_boundary_complex, components, eyries, invariant_components, is_join, limit_set_subcomplex, BoundaryComplex,
    BoundaryError, Component, DomainSubset,
};
use crate::horocusp::{proximity_against, CuspedSpace, ProximityReport};
use crate::metrics::{self, CoarseIntersection, MetricsError, VertexSet};
use crate::signature::{DomainId, GroupActionSpec, HhsSignature, SignatureError};
use crate::transforms::{detect_isolated_orthogonality, IsolationResult, ISOLATION_LIMIT};
use crate::{Distances, Graph};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("peripheral closures overlap in domain {0}")]
    Overlap(DomainId),
    #[error("cusped space has {found} peripherals, quotient has {expected}")]
    PeripheralMismatch { expected: usize, found: usize },
    #[error("eyries {0} and {1} are not orthogonal")]
    InvalidEyries(DomainId, DomainId),
    #[error("peripheral list is empty")]
    NoPeripherals,
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionStatus {
    pub condition: u8,
    pub passed: bool,
    /// Accepted as input rather than checked.
    pub trusted: bool,
    pub detail: String,
    pub witness: Vec<DomainId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaShape {
    pub label: String,
    pub eyries: Vec<DomainId>,
    pub join: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelHypCertificate {
    pub certified: bool,
    pub conditions: Vec<ConditionStatus>,
    pub lambdas: Vec<LambdaShape>,
    /// Distinct translates of all `Λ_i`.
    pub translates: Vec<Vec<DomainId>>,
    pub residual: Vec<DomainId>,
}

fn apply(perm: &[usize], set: &BTreeSet<usize>) -> BTreeSet<usize> {
    set.iter().map(|&i| perm[i]).collect()
}

/// Orbit of a set of domain indices under the generated group.
fn orbit(perms: &[Vec<usize>], start: BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let mut seen = vec![start.clone()];
    let mut queue = vec![start];
    while let Some(s) = queue.pop() {
        for p in perms {
            let t = apply(p, &s);
            if !seen.contains(&t) {
                seen.push(t.clone());
                queue.push(t);
            }
        }
    }
    seen.sort();
    seen
}

/// Boundary criterion for relative hyperbolicity relative to the `Λ_i`.
/// Quasiconvexity and the limit-set identification are trust inputs.
pub fn rel_hyp_boundary_check(
    sig: &HhsSignature,
    action: Option<&GroupActionSpec>,
    lambdas: &[DomainSubset],
) -> Result<RelHypCertificate, ClassifyError> {
    let bc = build_boundary_complex(sig, action)?;
    let checked = match action.or(sig.action()) {
        Some(a) => sig.clone().with_action(Some(a.clone()))?,
        None => sig.clone(),
    };
    let perms = checked.action_indices();
    let mut shapes = Vec::new();
    let mut sets = Vec::new();
    for l in lambdas {
        let sub = limit_set_subcomplex(sig, &bc, l)?;
        let eyr = if l.domains.is_empty() { Vec::new() } else { eyries(sig, l)?.eyries };
        shapes.push(LambdaShape { label: l.label.clone(), eyries: eyr, join: is_join(&sub).is_some() });
        sets.push(l.domains.iter().map(|&d| sig.index(d)).collect::<Result<BTreeSet<usize>, _>>()?);
    }
    let mut conditions = vec![
        ConditionStatus {
            condition: 1,
            passed: true,
            trusted: true,
            detail: "stabilizers taken as hierarchically quasiconvex".into(),
            witness: vec![],
        },
        ConditionStatus {
            condition: 2,
            passed: true,
            trusted: true,
            detail: "subsets taken as the limit sets; downward closure checked".into(),
            witness: vec![],
        },
    ];

    let mut translates: Vec<BTreeSet<usize>> = Vec::new();
    for s in &sets {
        for t in orbit(&perms, s.clone()) {
            if !translates.contains(&t) {
                translates.push(t);
            }
        }
    }
    translates.sort();
    let mut overlap = None;
    'scan: for (i, a) in translates.iter().enumerate() {
        for b in &translates[i + 1..] {
            if let Some(&d) = a.intersection(b).next() {
                overlap = Some(d);
                break 'scan;
            }
        }
    }
    conditions.push(ConditionStatus {
        condition: 3,
        passed: overlap.is_none(),
        trusted: false,
        detail: match overlap {
            None => "translates pairwise disjoint or equal".into(),
            Some(_) => "two distinct translates share a domain".into(),
        },
        witness: overlap.map(|d| vec![sig.id(d)]).unwrap_or_default(),
    });

    let covered: BTreeSet<usize> = translates.iter().flatten().copied().collect();
    let residual: Vec<usize> = sig.unbounded_indices().into_iter().filter(|i| !covered.contains(i)).collect();
    let residual_ids = sig.ids(&residual);
    let mut bad_edge = None;
    for &(i, j) in &bc.edges {
        let (a, b) = (bc.classes[i], bc.classes[j]);
        if residual_ids.contains(&a) || residual_ids.contains(&b) {
            bad_edge = Some(vec![a, b]);
            break;
        }
    }
    let (passed4, detail4, witness4) = match (&bad_edge, residual.is_empty()) {
        (Some(e), _) => (false, "residual class has an orthogonal partner".to_string(), e.clone()),
        (None, true) => (false, "no residual classes".to_string(), vec![]),
        (None, false) => (true, "residual classes are isolated vertices".to_string(), vec![]),
    };
    conditions.push(ConditionStatus { condition: 4, passed: passed4, trusted: false, detail: detail4, witness: witness4 });

    Ok(RelHypCertificate {
        certified: conditions.iter().all(|c| c.passed),
        conditions,
        lambdas: shapes,
        translates: translates.iter().map(|t| t.iter().map(|&i| sig.id(i)).collect()).collect(),
        residual: residual_ids,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuotientNode {
    Peripheral { label: String, fiber: Vec<DomainId> },
    Residual { class: DomainId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientComplex {
    pub nodes: Vec<QuotientNode>,
    /// Node index of each class, in class order.
    pub fiber_map: Vec<(DomainId, usize)>,
    pub peripheral_count: usize,
}

/// Collapses each peripheral closure to one node; other classes stay.
pub fn quotient_boundary(bc: &BoundaryComplex, peripherals: &[DomainSubset]) -> Result<QuotientComplex, ClassifyError> {
    let mut owner: Vec<Option<usize>> = vec![None; bc.len()];
    for (k, p) in peripherals.iter().enumerate() {
        for &d in &p.domains {
            if let Some(i) = bc.position(d) {
                if owner[i].is_some_and(|o| o != k) {
                    return Err(ClassifyError::Overlap(d));
                }
                owner[i] = Some(k);
            }
        }
    }
    let mut nodes: Vec<QuotientNode> = peripherals
        .iter()
        .enumerate()
        .map(|(k, p)| QuotientNode::Peripheral {
            label: p.label.clone(),
            fiber: (0..bc.len()).filter(|&i| owner[i] == Some(k)).map(|i| bc.classes[i]).collect(),
        })
        .collect();
    let mut fiber_map = Vec::new();
    for i in 0..bc.len() {
        let node = match owner[i] {
            Some(k) => k,
            None => {
                nodes.push(QuotientNode::Residual { class: bc.classes[i] });
                nodes.len() - 1
            }
        };
        fiber_map.push((bc.classes[i], node));
    }
    Ok(QuotientComplex { nodes, fiber_map, peripheral_count: peripherals.len() })
}

/// A sequence of ambient points marching into peripheral `peripheral`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct March {
    pub peripheral: usize,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarchReport {
    pub peripheral: usize,
    /// Profile against each peripheral's deep proxy.
    pub profiles: Vec<ProximityReport<f64>>,
    /// Own-proxy products are nondecreasing up to `2δ`.
    pub own_monotone: bool,
    /// Own-proxy products strictly increase along the march.
    pub own_strictly_increasing: bool,
    /// Largest product against any other peripheral's proxy.
    pub others_max: f64,
    pub others_bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientCuspReport {
    pub base_point: usize,
    pub delta: f64,
    pub bound: f64,
    pub marches: Vec<MarchReport>,
    pub passed: bool,
}

/// Checks that marches into a peripheral approach its cusp point and stay
/// within `bound` of every other one. Proxies are taken nearest `x0` for
/// the own peripheral and nearest `anchors[j]` for peripheral `j`.
pub fn verify_quotient_against_cusp(
    cs: &CuspedSpace<f64>,
    qc: &QuotientComplex,
    d_ambient: &Distances,
    d_cusped: &Distances,
    x0: usize,
    anchors: &[usize],
    marches: &[March],
    delta: f64,
    bound: f64,
) -> Result<QuotientCuspReport, ClassifyError> {
    if cs.horoballs.len() != qc.peripheral_count || anchors.len() != qc.peripheral_count {
        return Err(ClassifyError::PeripheralMismatch { expected: qc.peripheral_count, found: cs.horoballs.len() });
    }
    let mut reports = Vec::new();
    for march in marches {
        let mut profiles = Vec::new();
        for (j, &anchor) in anchors.iter().enumerate() {
            let at = if j == march.peripheral { x0 } else { anchor };
            let proxy = cs.deep_proxy(d_ambient, j, at);
            profiles.push(proximity_against(d_ambient, d_cusped, proxy, x0, &march.points));
        }
        let own = &profiles[march.peripheral];
        let own_monotone = own.rows.windows(2).all(|w| w[1].product >= w[0].product - 2.0 * delta - TOL);
        let own_strictly_increasing = own.rows.windows(2).all(|w| w[1].product > w[0].product + TOL);
        let others_max = profiles
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != march.peripheral)
            .flat_map(|(_, p)| p.rows.iter().map(|r| r.product))
            .fold(0.0, f64::max);
        reports.push(MarchReport {
            peripheral: march.peripheral,
            profiles,
            own_monotone,
            own_strictly_increasing,
            others_bounded: others_max <= bound + TOL,
            others_max,
        });
    }
    let passed = reports.iter().all(|r| r.own_monotone && r.others_bounded);
    Ok(QuotientCuspReport { base_point: x0, delta, bound, marches: reports, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryVerdict {
    Wide,
    RelHypCandidate,
    ThickOrder1Candidate,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThickEvidence {
    pub components: Vec<Component>,
    pub invariant_positive: Vec<Component>,
    pub candidate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelHypEvidence {
    pub isolation: IsolationResult,
    pub residual: Vec<DomainId>,
    pub candidate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: GeometryVerdict,
    pub join: Option<(Vec<DomainId>, Vec<DomainId>)>,
    pub thickness: ThickEvidence,
    pub rel_hyp: RelHypEvidence,
}

/// Precedence: wide, then relatively hyperbolic, then thick of order 1.
pub fn classify_geometry(sig: &HhsSignature, action: Option<&GroupActionSpec>) -> Result<Classification, ClassifyError> {
    let bc = build_boundary_complex(sig, action)?;
    let join = is_join(&bc);
    let comps = components(&bc);
    let invariant_positive: Vec<Component> = invariant_components(&bc).into_iter().filter(|c| c.positive_dimensional).collect();
    let thick = join.is_none() && comps.len() >= 2 && !invariant_positive.is_empty();

    let isolation = detect_isolated_orthogonality(sig, ISOLATION_LIMIT);
    let (residual, rel) = match &isolation {
        IsolationResult::Found { family } if !family.is_empty() => {
            let members: Vec<usize> = family.iter().map(|&d| sig.index(d)).collect::<Result<_, _>>()?;
            let residual: Vec<DomainId> = bc
                .classes
                .iter()
                .copied()
                .filter(|&c| {
                    let i = sig.index(c).expect("class is a domain");
                    !members.iter().any(|&m| sig.nested(i, m))
                })
                .collect();
            let isolated = residual.iter().all(|&c| {
                let p = bc.position(c).expect("residual class");
                !bc.edges.iter().any(|&(i, j)| i == p || j == p)
            });
            let ok = !residual.is_empty() && isolated;
            (residual, ok)
        }
        _ => (Vec::new(), false),
    };
    let verdict = if join.is_some() {
        GeometryVerdict::Wide
    } else if rel {
        GeometryVerdict::RelHypCandidate
    } else if thick {
        GeometryVerdict::ThickOrder1Candidate
    } else {
        GeometryVerdict::Indeterminate
    };
    Ok(Classification {
        verdict,
        join,
        thickness: ThickEvidence { components: comps, invariant_positive, candidate: thick },
        rel_hyp: RelHypEvidence { isolation, residual, candidate: rel },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EyrieWideness {
    pub wide: bool,
    pub eyrie_count: usize,
    pub eyries: Vec<DomainId>,
}

pub fn eyrie_wideness(sig: &HhsSignature, subset: &DomainSubset) -> Result<EyrieWideness, ClassifyError> {
    let r = eyries(sig, subset)?;
    if let Some((a, b)) = r.witness {
        return Err(ClassifyError::InvalidEyries(a, b));
    }
    Ok(EyrieWideness { wide: r.eyries.len() >= 2, eyrie_count: r.eyries.len(), eyries: r.eyries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThickParams {
    pub c: f64,
    /// Diameter standing in for "infinite"; half the ambient diameter when absent.
    pub threshold: Option<f64>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEdge {
    pub a: usize,
    pub b: usize,
    pub intersection_diameter: f64,
    /// Components of the coarse intersection at scale `τ`.
    pub tau_components: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThickReport {
    pub c: f64,
    pub threshold: f64,
    pub cover_defect: f64,
    pub edges: Vec<ChainEdge>,
    /// Pairs of peripherals within `3C` of each other.
    pub close_pairs: Vec<(usize, usize)>,
    pub close_pairs_chained: bool,
    pub chain_connected: bool,
    pub certified: bool,
    /// Longest chain needed between close pairs, in hops.
    pub max_chain_length: Option<usize>,
    pub strong: Option<bool>,
}

fn hop_distances(k: usize, edges: &[ChainEdge], from: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; k];
    dist[from] = Some(0);
    let mut frontier = vec![from];
    let mut step = 0;
    while !frontier.is_empty() {
        step += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for e in edges {
                let v = if e.a == u { e.b } else if e.b == u { e.a } else { continue };
                if dist[v].is_none() {
                    dist[v] = Some(step);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Order-one thickness audit: coarse cover, chain graph of large coarse
/// intersections, and the optional strong bounds at scale `τ`.
pub fn thick_chain_audit(g: &Graph, peripherals: &[VertexSet], params: ThickParams) -> Result<ThickReport, ClassifyError> {
    if peripherals.is_empty() {
        return Err(ClassifyError::NoPeripherals);
    }
    let d = metrics::all_pairs_distances(g)?;
    let threshold = params.threshold.unwrap_or(d.diameter() / 2.0);
    let union: VertexSet = peripherals.iter().flat_map(|p| p.iter()).collect();
    if union.is_empty() {
        return Err(MetricsError::EmptySet.into());
    }
    let cover_defect = (0..d.n()).map(|x| d.to_set(x, &union)).fold(0.0, f64::max);
    let k = peripherals.len();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if let CoarseIntersection::Diameter(diam) = metrics::coarse_intersection_diameter(&d, &peripherals[a], &peripherals[b], params.c) {
                if diam >= threshold - TOL {
                    let tau_components = params.tau.map(|tau| {
                        let inter = d.neighborhood(&peripherals[a], params.c).intersection(&d.neighborhood(&peripherals[b], params.c));
                        metrics::coarse_components(&d, &inter, tau)
                    });
                    edges.push(ChainEdge { a, b, intersection_diameter: diam, tau_components });
                }
            }
        }
    }
    let mut close_pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if d.set_distance(&peripherals[a], &peripherals[b]) <= 3.0 * params.c + TOL {
                close_pairs.push((a, b));
            }
        }
    }
    let hops: Vec<Vec<Option<usize>>> = (0..k).map(|a| hop_distances(k, &edges, a)).collect();
    let close_pairs_chained = close_pairs.iter().all(|&(a, b)| hops[a][b].is_some());
    let chain_connected = hops[0].iter().all(Option::is_some);
    let certified = cover_defect <= params.c + TOL && close_pairs_chained && chain_connected;
    let max_chain_length = close_pairs.iter().filter_map(|&(a, b)| hops[a][b]).max();
    let strong = params.tau.map(|tau| {
        certified
            && max_chain_length.is_none_or(|l| l as f64 <= tau + TOL)
            && edges.iter().all(|e| e.tau_components == Some(1))
    });
    Ok(ThickReport {
        c: params.c,
        threshold,
        cover_defect,
        edges,
        close_pairs,
        close_pairs_chained,
        chain_connected,
        certified,
        max_chain_length,
        strong,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalnormalityReport {
    pub threshold: f64,
    /// `(i, j, diam N_C(P_i) ∩ N_C(P_j))` for flagged pairs.
    pub flagged: Vec<(usize, usize, f64)>,
}

/// Flags distinct cosets whose coarse intersection reaches `threshold`.
pub fn malnormality_diagnostic(d: &Distances, cosets: &[VertexSet], c: f64, threshold: f64) -> Result<MalnormalityReport, ClassifyError> {
    let mut flagged = Vec::new();
    for a in 0..cosets.len() {
        for b in a + 1..cosets.len() {
            if cosets[a] == cosets[b] {
                continue;
            }
            if let CoarseIntersection::Diameter(diam) = metrics::coarse_intersection_diameter(d, &cosets[a], &cosets[b], c) {
                if diam >= threshold - TOL {
                    flagged.push((a, b, diam));
                }
            }
        }
    }
    Ok(MalnormalityReport { threshold, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{product_signature, rel_hyp_signature, GluedFlats};
    use crate::signature::SignatureBuilder;

    fn closures(sig: &HhsSignature, members: &[usize]) -> Vec<DomainSubset> {
        members.iter().map(|&i| DomainSubset::nesting_closure(sig, i)).collect()
    }

    #[test]
    fn rel_hyp_fixture_certified() {
        let sig = rel_hyp_signature(2);
        let cert = rel_hyp_boundary_check(&sig, None, &closures(&sig, &[1, 4])).unwrap();
        assert!(cert.certified, "{:?}", cert.conditions);
        assert_eq!(cert.residual, vec![DomainId(0)]);
    }

    #[test]
    fn residual_edge_fails_condition_four() {
        let sig = SignatureBuilder::new(3)
            .domain("S", true)
            .domain("I1", false)
            .domain("A", true)
            .domain("B", true)
            .domain("R", true)
            .nest("I1", "S")
            .nest("A", "I1")
            .nest("B", "I1")
            .nest("R", "S")
            .orth("A", "B")
            .orth("R", "A")
            .build()
            .unwrap();
        let cert = rel_hyp_boundary_check(&sig, None, &closures(&sig, &[1])).unwrap();
        assert!(!cert.certified);
        let c4 = &cert.conditions[3];
        assert_eq!((c4.passed, c4.witness.clone()), (false, vec![DomainId(2), DomainId(4)]));
    }

    #[test]
    fn overlapping_lambdas_fail_condition_three() {
        let sig = rel_hyp_signature(2);
        let lambdas = vec![
            DomainSubset { label: "L1".into(), domains: vec![DomainId(2), DomainId(3)] },
            DomainSubset { label: "L2".into(), domains: vec![DomainId(3)] },
        ];
        let cert = rel_hyp_boundary_check(&sig, None, &lambdas).unwrap();
        assert_eq!((cert.conditions[2].passed, cert.conditions[2].witness.clone()), (false, vec![DomainId(3)]));
    }

    #[test]
    fn quotient_shapes() {
        let sig = rel_hyp_signature(2);
        let bc = build_boundary_complex(&sig, None).unwrap();
        let q = quotient_boundary(&bc, &closures(&sig, &[1, 4])).unwrap();
        assert_eq!(q.nodes.len(), 3);
        let ident = quotient_boundary(&bc, &[]).unwrap();
        assert_eq!(ident.nodes.len(), bc.len());
        let all = DomainSubset { label: "all".into(), domains: bc.classes.clone() };
        assert_eq!(quotient_boundary(&bc, &[all]).unwrap().nodes.len(), 1);
        let overlap = vec![
            DomainSubset { label: "a".into(), domains: vec![DomainId(2)] },
            DomainSubset { label: "b".into(), domains: vec![DomainId(2)] },
        ];
        assert_eq!(quotient_boundary(&bc, &overlap), Err(ClassifyError::Overlap(DomainId(2))));
    }

    #[test]
    fn verdicts() {
        let wide = SignatureBuilder::new(2)
            .domain("S", false)
            .domain("A", true)
            .domain("B", true)
            .nest("A", "S")
            .nest("B", "S")
            .orth("A", "B")
            .build()
            .unwrap();
        let c = classify_geometry(&wide, None).unwrap();
        assert_eq!(c.verdict, GeometryVerdict::Wide);
        assert_eq!(c.join, Some((vec![DomainId(1)], vec![DomainId(2)])));

        let rh = classify_geometry(&rel_hyp_signature(2), None).unwrap();
        assert_eq!(rh.verdict, GeometryVerdict::RelHypCandidate);
        assert!(rh.thickness.candidate);

        let edgeless = SignatureBuilder::new(2)
            .domain("S", true)
            .domain("A", true)
            .nest("A", "S")
            .build()
            .unwrap();
        assert_eq!(classify_geometry(&edgeless, None).unwrap().verdict, GeometryVerdict::Indeterminate);
        assert_eq!(classify_geometry(&product_signature(), None).unwrap().verdict, GeometryVerdict::ThickOrder1Candidate);
    }

    #[test]
    fn eyrie_wideness_cases() {
        let sig = product_signature();
        let both = DomainSubset { label: "H".into(), domains: vec![DomainId(1), DomainId(2)] };
        assert!(eyrie_wideness(&sig, &both).unwrap().wide);
        let one = DomainSubset { label: "H".into(), domains: vec![DomainId(1)] };
        assert_eq!(eyrie_wideness(&sig, &one).unwrap().eyrie_count, 1);
        let block = rel_hyp_signature(1);
        let closure = DomainSubset::nesting_closure(&block, 1);
        assert!(eyrie_wideness(&block, &closure).unwrap().wide);
    }

    #[test]
    fn whole_space_thick_audit() {
        let g = Graph::grid(3, 3);
        let r = thick_chain_audit(&g, &[VertexSet::range(9)], ThickParams { c: 1.0, threshold: None, tau: None }).unwrap();
        assert_eq!(r.cover_defect, 0.0);
        assert!(r.certified);
    }

    #[test]
    fn grid_rows_need_positive_c() {
        let n = 5;
        let g = Graph::grid(n, n);
        let rows: Vec<VertexSet> = (0..n).map(|r| VertexSet::new((r * n..(r + 1) * n).collect())).collect();
        let r0 = thick_chain_audit(&g, &rows, ThickParams { c: 0.0, threshold: None, tau: None }).unwrap();
        assert!(r0.edges.is_empty() && !r0.certified);
        let r1 = thick_chain_audit(&g, &rows, ThickParams { c: 1.0, threshold: None, tau: Some(4.0) }).unwrap();
        assert!(r1.certified && r1.strong == Some(true));
    }

    #[test]
    fn glued_flats_chain() {
        let gf = GluedFlats::new(5, 4).unwrap();
        let r = thick_chain_audit(&gf.model.ambient, &gf.flats, ThickParams { c: 4.0, threshold: Some(4.0), tau: None }).unwrap();
        assert_eq!(r.edges.len(), 1);
        assert!(r.certified);
    }

    #[test]
    fn malnormality_flags() {
        let g = Graph::grid(6, 6);
        let d = metrics::all_pairs_distances(&g).unwrap();
        let left = VertexSet::new((0..6).flat_map(|r| [r * 6, r * 6 + 1]).collect());
        let right = VertexSet::new((0..6).flat_map(|r| [r * 6 + 1, r * 6 + 2]).collect());
        let far = VertexSet::new((0..6).map(|r| r * 6 + 5).collect());
        let rep = malnormality_diagnostic(&d, &[left.clone(), right, far, left], 0.0, 3.0).unwrap();
        assert_eq!(rep.flagged.iter().map(|f| (f.0, f.1)).collect::<Vec<_>>(), vec![(0, 1), (1, 3)]);
    }
}
