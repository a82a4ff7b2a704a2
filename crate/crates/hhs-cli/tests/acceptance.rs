//! Acceptance suite: one pass/fail line per criterion.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hhs_core::boundary::{build_boundary_complex, eyries, is_join, DomainSubset};
use hhs_core::classify::{quotient_boundary, rel_hyp_boundary_check, verify_quotient_against_cusp, March, QuotientNode};
use hhs_core::enumerate::enumerate_signatures;
use hhs_core::fixtures::{random_graph, rel_hyp_signature, GluedFlats, ProductMutation, ProductOfTrees};
use hhs_core::horocusp::{build_cusped_space, build_horoball, default_depth, verify_distance_formula, Peripheral, PeripheralSystem};
use hhs_core::metrics::{all_pairs_distances, four_point_delta, DeltaOptions};
use hhs_core::model::verify_axioms;
use hhs_core::signature::{validate_signature, HhsSignature};
use hhs_core::transforms::{add_hyperbolically_embedded, detect_isolated_orthogonality, CosetSpec, IsolationResult, Threshold, ISOLATION_LIMIT};
use hhs_core::Graph;

const C1_STABILITY: f64 = 0.1;
const C1_RUNTIME: Duration = Duration::from_secs(120);
const C2_RATIO: f64 = 3.0;
const C2_GRID_GROWTH: f64 = 2.0;
const C2_RUNTIME: Duration = Duration::from_secs(300);
const C3_FACTOR: f64 = 2.0;
const C3_RUNTIME: Duration = Duration::from_secs(300);
const C4_RUNTIME: Duration = Duration::from_secs(180);
const C5_RUNTIME: Duration = Duration::from_secs(60);
const C7_CAP: usize = 10_000;
const C7_RUNTIME: Duration = Duration::from_secs(120);
const C8_RUNTIME: Duration = Duration::from_secs(60);
const C9_REPETITIONS: usize = 3;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn flats_peripherals(g: &GluedFlats) -> PeripheralSystem<f64> {
    PeripheralSystem {
        peripherals: (0..2).map(|k| Peripheral { label: format!("F{}", k + 1), vertices: g.flats[k].clone() }).collect(),
        scale: 1.0,
    }
}

fn delta_of(g: &Graph) -> f64 {
    four_point_delta(&all_pairs_distances(g).unwrap(), &DeltaOptions::default()).delta
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut suite: Vec<(String, Graph)> = Vec::new();
    for s in 0..20u64 {
        let n = 10 + (s as usize * 7) % 31;
        suite.push((format!("random{s}"), random_graph(n, 0.04, s)));
    }
    for n in 4..=32 {
        suite.push((format!("P{n}"), Graph::path(n)));
    }
    for n in 2..=5 {
        suite.push((format!("grid{n}x{n}"), Graph::grid(n, n)));
    }
    let mut c = 0.0f64;
    let mut worst_shift = 0.0f64;
    let mut worst = String::new();
    for (name, g) in &suite {
        let depth = default_depth(all_pairs_distances(g).unwrap().diameter());
        let a = verify_distance_formula(&build_horoball(g, depth).unwrap()).unwrap();
        let b = verify_distance_formula(&build_horoball(g, depth + 2).unwrap()).unwrap();
        c = c.max(a.c_observed);
        let shift = (a.c_observed - b.c_observed).abs();
        if shift >= worst_shift {
            worst_shift = shift;
            worst = name.clone();
        }
    }
    let elapsed = t.elapsed();
    outcome(
        worst_shift <= C1_STABILITY && c.is_finite() && elapsed < C1_RUNTIME,
        format!("{} bases, c = {c:.3}, max shift at depth+2 = {worst_shift:.3} ({worst}), {elapsed:.1?}", suite.len()),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let bases = [("P8", Graph::path(8)), ("C8", Graph::cycle(8)), ("grid4x4", Graph::grid(4, 4)), ("random30", random_graph(30, 0.04, 0))];
    let mut deltas = Vec::new();
    for (_, g) in &bases {
        let h = build_horoball(g, default_depth(all_pairs_distances(g).unwrap().diameter())).unwrap();
        deltas.push(delta_of(&h.graph));
    }
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(0.0, f64::max);
    let grid: Vec<f64> = (2..=6).map(|n| delta_of(&Graph::grid(n, n))).collect();
    let monotone = grid.windows(2).all(|w| w[1] >= w[0]);
    let growth = grid[4] >= C2_GRID_GROWTH * grid[0];
    let elapsed = t.elapsed();
    let uniform = lo > 0.0 && hi / lo <= C2_RATIO;
    let names: Vec<String> = bases.iter().zip(&deltas).map(|((n, _), d)| format!("{n}={d:.2}")).collect();
    outcome(
        uniform && monotone && growth && elapsed < C2_RUNTIME,
        format!("horoball δ [{}] ratio {:.2}, grid δ {grid:?}, {elapsed:.1?}", names.join(", "), hi / lo),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut ambient = Vec::new();
    let mut cusped = Vec::new();
    for n in 3..=6 {
        let g = GluedFlats::new(n, 3).unwrap();
        ambient.push(delta_of(&g.model.ambient));
        let cs = build_cusped_space(&g.model.ambient, &flats_peripherals(&g), None).unwrap();
        cusped.push(delta_of(&cs.graph));
    }
    let grows = ambient.windows(2).all(|w| w[1] > w[0]);
    let flat = cusped.iter().all(|&d| d <= C3_FACTOR * cusped[0] && d * C3_FACTOR >= cusped[0]);
    let elapsed = t.elapsed();
    outcome(
        grows && flat && elapsed < C3_RUNTIME,
        format!("ambient δ {ambient:?}, cusped δ {cusped:?}, {elapsed:.1?}"),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let p = ProductOfTrees::new(2, 3).unwrap();
    let base = verify_axioms(&p.model).unwrap();
    let mut ok = base.passed && p.model.ambient.n <= 200;
    let mut lines = vec![format!("base {} checks passed={}", base.checks.len(), base.passed)];
    for &m in ProductMutation::ALL.iter() {
        let r = verify_axioms(&p.mutated(m)).unwrap();
        let failed = r.failed();
        let exact = failed == vec![m.target_check()];
        ok &= exact;
        lines.push(format!("{}->{:?}", m.target_check(), failed));
    }
    let elapsed = t.elapsed();
    outcome(ok && ProductMutation::ALL.len() == 6 && elapsed < C4_RUNTIME, format!("{}, {elapsed:.1?}", lines.join(" ")))
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let g = GluedFlats::new(10, 6).unwrap();
    let cosets: Vec<CosetSpec> =
        (0..2).map(|k| CosetSpec { label: format!("F{}", k + 1), vertices: g.flats[k].clone(), nested: None }).collect();
    let ext = match add_hyperbolically_embedded(&g.model, &cosets, Threshold::Default) {
        Ok(e) => e,
        Err(e) => return outcome(false, format!("construction error: {e}")),
    };
    let valid = validate_signature(&ext.signature).passed;
    let isolation = detect_isolated_orthogonality(&ext.signature, ISOLATION_LIMIT);
    let exact = matches!(&isolation, IsolationResult::Found { family } if *family == ext.coset_domains);
    let pairs = ext.provenance.len();
    let agree = ext.provenance.iter().all(|p| p.agree);
    let elapsed = t.elapsed();
    outcome(
        valid && exact && agree && elapsed < C5_RUNTIME,
        format!(
            "B = {}, valid = {valid}, isolation = {:?}, new domains = {:?}, {pairs} (V,Q) pairs agree = {agree}, {elapsed:.1?}",
            ext.threshold, isolation, ext.coset_domains
        ),
    )
}

/// Quotient checks on one certified fixture.
fn quotient_case(sig: &HhsSignature, members: &[usize]) -> Result<String, String> {
    let lambdas: Vec<DomainSubset> = members.iter().map(|&i| DomainSubset::nesting_closure(sig, i)).collect();
    let cert = rel_hyp_boundary_check(sig, None, &lambdas).map_err(|e| e.to_string())?;
    if !cert.certified {
        return Err(format!("not certified: {:?}", cert.conditions));
    }
    let bc = build_boundary_complex(sig, None).map_err(|e| e.to_string())?;
    let q = quotient_boundary(&bc, &lambdas).map_err(|e| e.to_string())?;
    let residual_positions: Vec<usize> = cert.residual.iter().map(|&c| bc.position(c).expect("residual class")).collect();
    let edge_free = residual_positions.iter().all(|&p| !bc.edges.iter().any(|&(i, j)| i == p || j == p));
    if cert.residual.is_empty() || !edge_free {
        return Err(format!("residual {:?} edge-free = {edge_free}", cert.residual));
    }
    let closures_in_complex = lambdas.iter().filter(|l| l.domains.iter().any(|&d| bc.position(d).is_some())).count();
    if q.nodes.len() != closures_in_complex + cert.residual.len() {
        return Err(format!("{} nodes for {closures_in_complex} closures and {} residual", q.nodes.len(), cert.residual.len()));
    }
    let mut seen = BTreeSet::new();
    for node in &q.nodes {
        let fiber = match node {
            QuotientNode::Peripheral { fiber, .. } => fiber.clone(),
            QuotientNode::Residual { class } => vec![*class],
        };
        for c in fiber {
            if !seen.insert(c) {
                return Err(format!("class {c} in two fibers"));
            }
        }
    }
    let all: BTreeSet<_> = bc.classes.iter().copied().collect();
    let mapped = q.fiber_map.len() == bc.len() && q.fiber_map.iter().all(|&(_, k)| k < q.nodes.len());
    if seen != all || !mapped {
        return Err("fibers do not partition the classes".into());
    }
    Ok(format!("{}+{}={}", closures_in_complex, cert.residual.len(), q.nodes.len()))
}

fn criterion_6() -> Outcome {
    let mut cases: Vec<(String, HhsSignature)> = (1..=4).map(|k| (format!("rel-hyp({k})"), rel_hyp_signature(k))).collect();
    for n in [4, 6] {
        let g = GluedFlats::new(n, 3).unwrap();
        let cosets: Vec<CosetSpec> =
            (0..2).map(|k| CosetSpec { label: format!("F{}", k + 1), vertices: g.flats[k].clone(), nested: None }).collect();
        match add_hyperbolically_embedded(&g.model, &cosets, Threshold::Auto) {
            Ok(ext) => cases.push((format!("glued-flats({n})"), ext.signature)),
            Err(e) => return outcome(false, format!("glued-flats({n}): {e}")),
        }
    }
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, sig) in &cases {
        let family = match detect_isolated_orthogonality(sig, ISOLATION_LIMIT) {
            IsolationResult::Found { family } => family,
            other => {
                ok = false;
                lines.push(format!("{name}: {other:?}"));
                continue;
            }
        };
        let members: Vec<usize> = family.iter().map(|&d| sig.index(d).unwrap()).collect();
        match quotient_case(sig, &members) {
            Ok(s) => lines.push(format!("{name}: {s}")),
            Err(e) => {
                ok = false;
                lines.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(ok, format!("{} fixtures [{}]", cases.len(), lines.join("; ")))
}

/// Join oracle: some bipartition of the classes has every cross pair orthogonal.
fn join_oracle(sig: &HhsSignature, classes: &[usize]) -> bool {
    let k = classes.len();
    if k < 2 {
        return false;
    }
    (1..(1u32 << (k - 1))).any(|mask| {
        let mask = mask << 1;
        (0..k).all(|a| {
            (0..k).all(|b| {
                let cross = (mask >> a) & 1 != (mask >> b) & 1;
                !cross || sig.orthogonal(classes[a], classes[b])
            })
        })
    })
}

/// Maximality oracle: unbounded domains not properly below another one.
fn eyrie_oracle(sig: &HhsSignature, classes: &[usize]) -> (usize, bool) {
    let top: Vec<usize> = classes
        .iter()
        .copied()
        .filter(|&v| !classes.iter().any(|&w| w != v && sig.nested(v, w)))
        .collect();
    let valid = top.iter().all(|&a| top.iter().all(|&b| a == b || sig.orthogonal(a, b)));
    (top.len(), valid)
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let e = enumerate_signatures(4, 7, C7_CAP);
    let mut checked = 0;
    let mut invalid = 0;
    let mut no_unbounded = 0;
    let mut discrepancies = Vec::new();
    for s in &e.signatures {
        let sig = &s.signature;
        let classes = sig.unbounded_indices();
        if classes.is_empty() {
            no_unbounded += 1;
            continue;
        }
        let bc = build_boundary_complex(sig, None).unwrap();
        let join = is_join(&bc).is_some();
        let er = eyries(sig, &DomainSubset { label: "all".into(), domains: sig.ids(&classes) }).unwrap();
        let (count, valid) = eyrie_oracle(sig, &classes);
        if join != join_oracle(sig, &classes) || er.eyries.len() != count || er.valid != valid {
            discrepancies.push(format!("oracle mismatch at {:?}", s.code));
            continue;
        }
        if !er.valid {
            invalid += 1;
            continue;
        }
        checked += 1;
        if join != (er.eyries.len() >= 2) {
            discrepancies.push(format!("n={} code={:?} join={join} eyries={}", s.n, s.code, er.eyries.len()));
        }
    }
    let elapsed = t.elapsed();
    let per_n: Vec<String> = e.counts.iter().map(|(n, c)| format!("n={n}:{c}")).collect();
    outcome(
        discrepancies.is_empty() && e.signatures.len() <= C7_CAP && elapsed < C7_RUNTIME,
        format!(
            "{} signatures (cap {}, truncated = {}, found [{}]), {checked} compared, {invalid} with non-orthogonal eyries, {no_unbounded} without unbounded domains, {} discrepancies {:?}, {elapsed:.1?}",
            e.signatures.len(),
            C7_CAP,
            e.truncated,
            per_n.join(" "),
            discrepancies.len(),
            discrepancies.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let (n, l) = (6, 6);
    let g = GluedFlats::new(n, l).unwrap();
    let da = all_pairs_distances(&g.model.ambient).unwrap();
    let cs = build_cusped_space(&g.model.ambient, &flats_peripherals(&g), None).unwrap();
    let dc = all_pairs_distances(&cs.graph).unwrap();
    let delta = four_point_delta(&dc, &DeltaOptions::default()).delta;
    let [c1, c2] = g.corners;
    let m = n - 1;
    let points: Vec<usize> = [1usize, 2, 4, 8]
        .iter()
        .map(|&k| {
            let up = k.min(m);
            g.vertex(0, m - up, m - (k - up))
        })
        .collect();
    let steps: Vec<f64> = points.iter().map(|&p| da.get(c1, p)).collect();
    let doubling = steps == vec![1.0, 2.0, 4.0, 8.0];
    let scale = da.get(c1, c2);
    let bound = scale + 2.0 * delta;
    let sig = &g.model.sig;
    let lambdas: Vec<DomainSubset> = ["X1", "X2"]
        .iter()
        .map(|l| DomainSubset { label: l.to_string(), domains: vec![sig.id(sig.index_of_label(l).unwrap())] })
        .collect();
    let bc = build_boundary_complex(sig, None).unwrap();
    let q = match quotient_boundary(&bc, &lambdas) {
        Ok(q) => q,
        Err(e) => return outcome(false, format!("quotient: {e}")),
    };
    let r = match verify_quotient_against_cusp(&cs, &q, &da, &dc, c1, &[c1, c2], &[March { peripheral: 0, points }], delta, bound) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("cusp check: {e}")),
    };
    let mr = &r.marches[0];
    let own: Vec<String> = mr.profiles[0].rows.iter().map(|row| format!("{:.3}", row.product)).collect();
    let elapsed = t.elapsed();
    outcome(
        doubling && mr.own_strictly_increasing && mr.others_bounded && elapsed < C8_RUNTIME,
        format!(
            "δ = {delta}, (x|ξ1) = [{}], max (x|ξ2) = {:.3} ≤ {bound} (scale {scale} + 2δ), {elapsed:.1?}",
            own.join(", "),
            mr.others_max
        ),
    )
}

fn hhs(dir: &Path, args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_hhs")).current_dir(dir).args(args).output().expect("hhs runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let setup: [(&str, Vec<&str>); 5] = [
        ("pt.json", vec!["fixture", "product-of-trees"]),
        ("gf.json", vec!["fixture", "glued-flats", "-p", "side=4", "-p", "path-len=3"]),
        ("rh.json", vec!["fixture", "rel-hyp-signature"]),
        ("rg.json", vec!["fixture", "random-graph", "-p", "n=90", "-p", "p=0.05", "--seed", "11"]),
        ("big.json", vec!["fixture", "random-graph", "-p", "n=1600", "-p", "p=0.003", "--seed", "3"]),
    ];
    for (file, args) in &setup {
        let (bytes, code) = hhs(d, args);
        if code != 0 {
            return outcome(false, format!("setup {file} exited {code}"));
        }
        std::fs::write(d.join(file), bytes).unwrap();
    }
    std::fs::write(
        d.join("pipeline.json"),
        r#"{"fixture":{"generator":"glued-flats","side":4,"path_len":3},"stages":["verify","add-cosets","isolate","classify","quotient","verify-against-cusp"]}"#,
    )
    .unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["fixture", "random-graph", "-p", "n=30", "--seed", "5"],
        vec!["sig", "validate", "rh.json"],
        vec!["sig", "show", "rh.json"],
        vec!["metrics", "delta", "rg.json"],
        vec!["metrics", "delta", "big.json", "--seed", "9"],
        vec!["metrics", "qc", "gf.json", "--set", "[0,1,2,3]"],
        vec!["metrics", "project", "gf.json", "--target", "[0,1,2,3]", "--source", "[20,21]"],
        vec!["model", "verify", "pt.json"],
        vec!["model", "region", "gf.json", "--domain", "1"],
        vec!["model", "gate", "gf.json", "--set", "[0,1,4,5]", "--point", "15"],
        vec!["horoball", "build", "rg.json"],
        vec!["horoball", "verify", "rg.json"],
        vec!["cusp", "build", "gf.json"],
        vec!["cusp", "proximity", "gf.json", "--peripheral", "0", "--base", "15", "--points", "[11,7,3]"],
        vec!["boundary", "build", "rh.json"],
        vec!["boundary", "join", "rh.json"],
        vec!["boundary", "eyries", "rh.json"],
        vec!["boundary", "components", "rh.json"],
        vec!["transform", "electrify", "pt.json"],
        vec!["transform", "add-cosets", "gf.json", "--threshold", "auto"],
        vec!["transform", "isolate", "rh.json"],
        vec!["transform", "cusp-sig", "rh.json"],
        vec!["classify", "rh.json"],
        vec!["quotient", "rh.json"],
        vec!["thick", "gf.json"],
        vec!["pipeline", "pipeline.json"],
    ];
    let workers = ["1", "2", "4"];
    let mut mismatched = Vec::new();
    for cmd in &commands {
        let mut runs = Vec::new();
        for rep in 0..C9_REPETITIONS {
            let mut args = cmd.clone();
            args.extend(["--workers", workers[rep % workers.len()]]);
            runs.push(hhs(d, &args));
        }
        if runs.iter().any(|r| r != &runs[0]) || runs[0].0.is_empty() {
            mismatched.push(cmd.join(" "));
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("{} commands x {C9_REPETITIONS} runs at workers 1/2/4, mismatches {mismatched:?}", commands.len()),
    )
}

#[test]
fn acceptance() {
    let criteria: [(u8, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = Vec::new();
    for (k, f) in criteria {
        let o = f();
        println!("criterion {k}: {} {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
