//! Property tests for metric, horoball, transform, boundary and I/O invariants.

use proptest::prelude::*;

use hhs_core::boundary::{build_boundary_complex, is_join};
use hhs_core::classify::quotient_boundary;
use hhs_core::cli_io::{canonical_json, generate_fixture, FixtureSpec};
use hhs_core::boundary::DomainSubset;
use hhs_core::enumerate::enumerate_signatures;
use hhs_core::fixtures::{random_graph, rel_hyp_signature, GluedFlats};
use hhs_core::horocusp::{build_horoball, horoball_distance_estimate};
use hhs_core::metrics::{all_pairs_distances, closest_point_projection, four_point_delta, gromov_product, DeltaOptions, VertexSet};
use hhs_core::model::{gate, product_region, single_domain_model};
use hhs_core::signature::{validate_signature, HhsSignature};
use hhs_core::transforms::electrify_maximal;
use hhs_core::Graph;

const EPS: f64 = 1e-9;

fn small_graph() -> impl Strategy<Value = Graph> {
    (4usize..24, 0.05f64..0.4, any::<u64>()).prop_map(|(n, p, seed)| random_graph(n, p, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distances_form_a_metric(g in small_graph()) {
        let d = all_pairs_distances(&g).unwrap();
        for x in 0..d.n() {
            prop_assert_eq!(d.get(x, x), 0.0);
            for y in 0..d.n() {
                prop_assert_eq!(d.get(x, y), d.get(y, x));
                for z in 0..d.n() {
                    prop_assert!(d.get(x, z) <= d.get(x, y) + d.get(y, z) + EPS);
                }
            }
        }
    }

    #[test]
    fn gromov_products_are_bounded(g in small_graph(), a in any::<usize>(), b in any::<usize>(), c in any::<usize>()) {
        let d = all_pairs_distances(&g).unwrap();
        let (x, y, z) = (a % d.n(), b % d.n(), c % d.n());
        let p = gromov_product(&d, x, y, z);
        prop_assert!(p >= -EPS);
        prop_assert!(p <= d.get(x, z).min(d.get(y, z)) + EPS);
    }

    #[test]
    fn delta_is_at_most_half_the_diameter(g in small_graph()) {
        let d = all_pairs_distances(&g).unwrap();
        let e = four_point_delta(&d, &DeltaOptions::default());
        prop_assert!(e.delta >= 0.0 && e.delta <= d.diameter() / 2.0 + EPS);
    }

    #[test]
    fn projection_is_a_coarse_nearest_set(g in small_graph(), picks in prop::collection::vec(any::<usize>(), 1..5), x in any::<usize>()) {
        let d = all_pairs_distances(&g).unwrap();
        let y: VertexSet = picks.iter().map(|p| p % d.n()).collect();
        let x = x % d.n();
        let proj = closest_point_projection(&d, &y, x).unwrap();
        prop_assert!(!proj.is_empty() && proj.is_subset(&y));
        let dmin = d.to_set(x, &y);
        prop_assert!(proj.iter().any(|p| (d.get(x, p) - dmin).abs() <= EPS));
        for p in y.iter() {
            prop_assert_eq!(proj.contains(p), d.get(x, p) <= dmin + 1.0 + EPS);
        }
    }

    #[test]
    fn horoball_vertical_distances_are_exact(g in small_graph(), v in any::<usize>(), depth in 1usize..5) {
        let h = build_horoball(&g, depth).unwrap();
        let d = all_pairs_distances(&h.graph).unwrap();
        let v = v % g.n;
        for i in 0..=depth {
            for j in 0..=depth {
                prop_assert!((d.get(h.vertex(v, i), h.vertex(v, j)) - (i as f64 - j as f64).abs()).abs() <= EPS);
            }
        }
    }

    #[test]
    fn horoball_shortcuts_base_and_tracks_formula(g in small_graph()) {
        let db = all_pairs_distances(&g).unwrap();
        let depth = hhs_core::horocusp::default_depth(db.diameter());
        let h = build_horoball(&g, depth).unwrap();
        let d = all_pairs_distances(&h.graph).unwrap();
        for u in 0..g.n {
            for v in 0..g.n {
                let dh = d.get(h.vertex(u, 0), h.vertex(v, 0));
                prop_assert!(dh <= db.get(u, v) + EPS);
                let est = horoball_distance_estimate(db.get(u, v), 0, 0).unwrap();
                prop_assert!((dh - est).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn electrification_never_lengthens(side in 3usize..6, path_len in 2usize..5) {
        let gf = GluedFlats::new(side, path_len).unwrap();
        let before = all_pairs_distances(&gf.model.ambient).unwrap();
        let after = all_pairs_distances(&electrify_maximal(&gf.model).unwrap()).unwrap();
        for x in 0..before.n() {
            for y in 0..before.n() {
                prop_assert!(after.get(x, y) <= before.get(x, y) + EPS);
            }
        }
    }

    #[test]
    fn single_domain_electrification_is_identity(g in small_graph()) {
        prop_assert_eq!(electrify_maximal(&single_domain_model(g.clone())).unwrap(), g.canonical());
    }

    #[test]
    fn regions_and_gates_stay_inside(side in 3usize..5, picks in prop::collection::vec(any::<usize>(), 1..4), x in any::<usize>()) {
        let gf = GluedFlats::new(side, 3).unwrap();
        let p = gf.model.prepare().unwrap();
        let n = gf.model.ambient.n;
        prop_assert_eq!(product_region(&p, gf.model.sig.maximal()).vertices.len(), n);
        let y: VertexSet = picks.iter().map(|v| v % n).collect();
        let g = gate(&p, &y, x % n).unwrap();
        prop_assert!(!g.gate.is_empty() && g.gate.is_subset(&y));
    }

    #[test]
    fn fixtures_round_trip_byte_identically(rows in 1usize..5, cols in 1usize..5, n in 2usize..20, seed in any::<u64>()) {
        for spec in [FixtureSpec::Grid { rows, cols }, FixtureSpec::RandomGraph { n, p: 0.2, seed }] {
            let text = canonical_json(&generate_fixture(&spec).unwrap());
            let back: hhs_core::cli_io::FixtureOutput = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(canonical_json(&back), text.clone());
            prop_assert_eq!(canonical_json(&generate_fixture(&spec).unwrap()), text);
        }
    }

    #[test]
    fn rel_hyp_quotient_has_one_node_per_block_plus_residual(copies in 1usize..6) {
        let sig = rel_hyp_signature(copies);
        prop_assert!(validate_signature(&sig).passed);
        let bc = build_boundary_complex(&sig, None).unwrap();
        let lambdas: Vec<DomainSubset> = (0..sig.n())
            .filter(|&i| sig.label(i).starts_with('I'))
            .map(|i| DomainSubset::nesting_closure(&sig, i))
            .collect();
        prop_assert_eq!(lambdas.len(), copies);
        let q = quotient_boundary(&bc, &lambdas).unwrap();
        prop_assert_eq!(q.nodes.len(), copies + 1);
        prop_assert_eq!(q.fiber_map.len(), bc.len());
    }
}

fn complement_disconnected(sig: &HhsSignature, classes: &[usize]) -> bool {
    if classes.len() < 2 {
        return false;
    }
    let mut seen = vec![false; classes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..classes.len() {
            if !seen[b] && b != a && !sig.orthogonal(classes[a], classes[b]) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.iter().any(|s| !s)
}

#[test]
fn join_iff_complement_disconnected() {
    let e = enumerate_signatures(2, 5, 10_000);
    assert!(!e.truncated);
    for s in &e.signatures {
        let sig = &s.signature;
        assert!(validate_signature(sig).passed);
        let bc = build_boundary_complex(sig, None).unwrap();
        let classes = sig.unbounded_indices();
        assert_eq!(is_join(&bc).is_some(), complement_disconnected(sig, &classes), "{:?}", s.code);
        let doc = sig.to_doc();
        let back: HhsSignature = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(&back, sig);
    }
}
