//! Fixture generation, canonical report documents and the staged pipeline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boundary::{build_boundary_complex, DomainSubset};
use crate::classify::{
    classify_geometry, quotient_boundary, rel_hyp_boundary_check, verify_quotient_against_cusp, GeometryVerdict, March,
};
use crate::fixtures::{random_graph, rel_hyp_signature, GluedFlats, ProductMutation, ProductOfTrees};
use crate::horocusp::{build_cusped_space, Peripheral, PeripheralSystem};
use crate::metrics::{all_pairs_distances, four_point_delta, DeltaOptions, VertexSet};
use crate::model::{verify_axioms, ModelDoc, RealizedModel};
use crate::signature::{validate_signature, DomainId, HhsSignature, SignatureDoc};
use crate::transforms::{add_hyperbolically_embedded, detect_isolated_orthogonality, CosetSpec, IsolationResult, Threshold, ISOLATION_LIMIT};
use crate::{Distances, Graph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliIoError {
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
}

/// Named fixture generator with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum FixtureSpec {
    ProductOfTrees {
        depth: usize,
        valence: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mutation: Option<ProductMutation>,
    },
    GluedFlats {
        side: usize,
        path_len: usize,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    RandomGraph {
        n: usize,
        p: f64,
        seed: u64,
    },
    RelHypSignature {
        copies: usize,
    },
    /// Canonical re-emission of a model document.
    Custom {
        model: ModelDoc,
    },
}

impl FixtureSpec {
    /// Builds a spec from a generator name and `key=value` parameters.
    pub fn from_name(name: &str, params: &BTreeMap<String, String>, seed: u64) -> Result<Self, CliIoError> {
        let get = |k: &str, default: usize| -> Result<usize, CliIoError> {
            params.get(k).map_or(Ok(default), |v| v.parse().map_err(|_| CliIoError::Parameter(format!("{k}={v}"))))
        };
        Ok(match name {
            "product-of-trees" => FixtureSpec::ProductOfTrees {
                depth: get("depth", 2)?,
                valence: get("valence", 3)?,
                mutation: match params.get("mutation") {
                    Some(m) => Some(ProductMutation::parse(m).ok_or_else(|| CliIoError::Parameter(format!("mutation={m}")))?),
                    None => None,
                },
            },
            "glued-flats" => FixtureSpec::GluedFlats { side: get("side", 6)?, path_len: get("path-len", 6)? },
            "grid" => FixtureSpec::Grid { rows: get("rows", 4)?, cols: get("cols", 4)? },
            "random-graph" => FixtureSpec::RandomGraph {
                n: get("n", 20)?,
                p: params
                    .get("p")
                    .map_or(Ok(0.1), |v| v.parse().map_err(|_| CliIoError::Parameter(format!("p={v}"))))?,
                seed,
            },
            "rel-hyp-signature" => FixtureSpec::RelHypSignature { copies: get("copies", 2)? },
            other => return Err(CliIoError::UnknownGenerator(other.to_string())),
        })
    }
}

/// Generated files; absent parts are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureOutput {
    pub spec: FixtureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Graph>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub peripherals: Vec<Peripheral>,
}

fn param(e: impl std::fmt::Display) -> CliIoError {
    CliIoError::Parameter(e.to_string())
}

pub fn generate_fixture(spec: &FixtureSpec) -> Result<FixtureOutput, CliIoError> {
    let mut out = FixtureOutput { spec: spec.clone(), signature: None, model: None, graph: None, peripherals: Vec::new() };
    match spec {
        FixtureSpec::ProductOfTrees { depth, valence, mutation } => {
            let p = ProductOfTrees::new(*depth, *valence).map_err(param)?;
            let m = match mutation {
                Some(mu) => p.mutated(*mu),
                None => p.model,
            };
            out.model = Some(m.to_doc());
        }
        FixtureSpec::GluedFlats { side, path_len } => {
            let g = GluedFlats::new(*side, *path_len).map_err(param)?;
            out.peripherals = g
                .flats
                .iter()
                .enumerate()
                .map(|(k, f)| Peripheral { label: format!("F{}", k + 1), vertices: f.clone() })
                .collect();
            out.graph = Some(g.model.ambient.clone());
            out.model = Some(g.model.to_doc());
        }
        FixtureSpec::Grid { rows, cols } => {
            if *rows == 0 || *cols == 0 {
                return Err(CliIoError::Parameter("grid sides must be positive".into()));
            }
            out.graph = Some(Graph::grid(*rows, *cols));
        }
        FixtureSpec::RandomGraph { n, p, seed } => {
            if *n == 0 || !(0.0..=1.0).contains(p) {
                return Err(CliIoError::Parameter(format!("random-graph n={n} p={p}")));
            }
            out.graph = Some(random_graph(*n, *p, *seed));
        }
        FixtureSpec::RelHypSignature { copies } => {
            if *copies == 0 {
                return Err(CliIoError::Parameter("copies must be positive".into()));
            }
            out.signature = Some(rel_hyp_signature(*copies).to_doc());
        }
        FixtureSpec::Custom { model } => {
            let m = RealizedModel::from_doc(model.clone()).map_err(|e| CliIoError::Input(e.to_string()))?;
            out.model = Some(m.to_doc());
        }
    }
    if let Some(doc) = &out.signature {
        let sig = HhsSignature::from_doc(doc.clone()).map_err(param)?;
        if !validate_signature(&sig).passed {
            return Err(CliIoError::Parameter("generated signature fails validation".into()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Structural,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Structural => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

/// Command result with embedded thresholds and an input digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub thresholds: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub witnesses: Vec<Value>,
    pub measured: BTreeMap<String, f64>,
    pub result: Value,
}

/// Hex SHA-256 over the inputs, each prefixed by its length.
pub fn digest_inputs(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for i in inputs {
        h.update((i.len() as u64).to_le_bytes());
        h.update(i);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl ReportDocument {
    pub fn new(command: &str, inputs: &[&[u8]], seed: u64) -> Self {
        ReportDocument {
            command: command.to_string(),
            inputs_digest: digest_inputs(inputs),
            seed,
            thresholds: BTreeMap::new(),
            verdict: Verdict::Pass,
            witnesses: Vec::new(),
            measured: BTreeMap::new(),
            result: Value::Null,
        }
    }

    pub fn threshold(mut self, key: &str, v: f64) -> Self {
        self.thresholds.insert(key.to_string(), v);
        self
    }

    pub fn measure(mut self, key: &str, v: f64) -> Self {
        self.measured.insert(key.to_string(), v);
        self
    }

    pub fn with_result<T: Serialize>(mut self, r: &T) -> Self {
        self.result = to_value(r);
        self
    }

    pub fn witness<T: Serialize>(mut self, w: &T) -> Self {
        self.witnesses.push(to_value(w));
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }

    /// Sorted keys, two-space indentation, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("document types serialize to JSON")
}

/// JSON text with object keys in sorted order.
pub fn canonical_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(v)).expect("JSON values serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Verify,
    AddCosets,
    Isolate,
    Classify,
    Quotient,
    VerifyAgainstCusp,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Verify => "verify",
            Stage::AddCosets => "add-cosets",
            Stage::Isolate => "isolate",
            Stage::Classify => "classify",
            Stage::Quotient => "quotient",
            Stage::VerifyAgainstCusp => "verify-against-cusp",
        }
    }
}

fn default_threshold() -> Threshold {
    Threshold::Auto
}

/// Input either as a fixture spec, a model document or a signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<FixtureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureDoc>,
    /// Cosets; the fixture peripherals when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosets: Option<Vec<CosetSpec>>,
    #[serde(default = "default_threshold")]
    pub threshold: Threshold,
    /// Hyperbolicity constant of the cusped space; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub stages: Vec<StageRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopped_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<usize>,
}

struct PipelineState {
    model: Option<RealizedModel>,
    sig: Option<HhsSignature>,
    cosets: Vec<CosetSpec>,
    coset_domains: Vec<DomainId>,
    family: Vec<DomainId>,
    quotient: Option<crate::classify::QuotientComplex>,
}

fn stage_err(stage: Stage, e: impl std::fmt::Display) -> CliIoError {
    CliIoError::Stage { stage: stage.name().into(), message: e.to_string() }
}

/// Vertex of `set` nearest to `others`, smallest id on ties.
fn anchor(d: &Distances, set: &VertexSet, others: &VertexSet) -> usize {
    set.iter()
        .map(|v| (d.to_set(v, others), v))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|p| p.1)
        .expect("coset is nonempty")
}

/// Points of `set` at distance `2^k` from `x0` where available, else the
/// farthest point within that radius, keeping the distances increasing.
fn doubling_march(d: &Distances, set: &VertexSet, x0: usize) -> Vec<usize> {
    let far = set.iter().map(|v| d.get(x0, v)).fold(0.0, f64::max);
    let mut pts = Vec::new();
    let mut last = 0.0;
    let mut r = 1.0;
    while r <= far + 1e-9 {
        let pick = set
            .iter()
            .filter(|&v| d.get(x0, v) <= r + 1e-9 && d.get(x0, v) > last + 1e-9)
            .max_by(|&a, &b| d.get(x0, a).total_cmp(&d.get(x0, b)).then(b.cmp(&a)));
        if let Some(v) = pick {
            last = d.get(x0, v);
            pts.push(v);
        }
        r *= 2.0;
    }
    pts
}

/// Runs the configured stages in order; a failing stage stops the run.
pub fn run_pipeline(config: &PipelineConfig, seed: u64) -> Result<ReportDocument, CliIoError> {
    let config_text = canonical_json(config);
    let mut report = ReportDocument::new("pipeline", &[config_text.as_bytes()], seed);
    let mut st = PipelineState { model: None, sig: None, cosets: Vec::new(), coset_domains: Vec::new(), family: Vec::new(), quotient: None };
    if let Some(spec) = &config.fixture {
        let out = generate_fixture(spec)?;
        if let Some(m) = out.model {
            st.model = Some(RealizedModel::from_doc(m).map_err(|e| CliIoError::Input(e.to_string()))?);
        }
        if let Some(s) = out.signature {
            st.sig = Some(HhsSignature::from_doc(s).map_err(|e| CliIoError::Input(e.to_string()))?);
        }
        st.cosets = out.peripherals.into_iter().map(|p| CosetSpec { label: p.label, vertices: p.vertices, nested: None }).collect();
    }
    if let Some(m) = &config.model {
        st.model = Some(RealizedModel::from_doc(m.clone()).map_err(|e| CliIoError::Input(e.to_string()))?);
    }
    if let Some(s) = &config.signature {
        st.sig = Some(HhsSignature::from_doc(s.clone()).map_err(|e| CliIoError::Input(e.to_string()))?);
    }
    if st.sig.is_none() {
        st.sig = st.model.as_ref().map(|m| m.sig.clone());
    }
    if let Some(c) = &config.cosets {
        st.cosets = c.clone();
    }
    if st.sig.is_none() {
        return Err(CliIoError::Input("pipeline needs a fixture, model or signature".into()));
    }
    if let Some(d) = config.delta {
        report = report.threshold("delta", d);
    }
    let mut result = PipelineResult { stages: Vec::new(), stopped_at: None, quotient_nodes: None, residual: None };
    for &stage in &config.stages {
        let (passed, detail, verdict) = run_stage(stage, config, &mut st, &mut report)?;
        result.stages.push(StageRecord { stage: stage.name().into(), passed, detail: detail.clone() });
        if !passed {
            result.stopped_at = Some(stage.name().into());
            report = report.verdict(verdict).witness(&detail);
            break;
        }
    }
    if let Some(q) = &st.quotient {
        result.quotient_nodes = Some(q.nodes.len());
        result.residual = Some(q.nodes.len() - q.peripheral_count);
    }
    Ok(report.with_result(&result))
}

fn run_stage(
    stage: Stage,
    config: &PipelineConfig,
    st: &mut PipelineState,
    report: &mut ReportDocument,
) -> Result<(bool, Value, Verdict), CliIoError> {
    let need_model = |st: &PipelineState| st.model.clone().ok_or_else(|| stage_err(stage, "no realized model"));
    match stage {
        Stage::Verify => {
            let m = need_model(st)?;
            let r = verify_axioms(&m).map_err(|e| stage_err(stage, e))?;
            report.thresholds.insert("E".into(), r.constant);
            Ok((r.passed, to_value(&r), Verdict::Fail))
        }
        Stage::AddCosets => {
            let m = need_model(st)?;
            if st.cosets.is_empty() {
                return Err(stage_err(stage, "no cosets given"));
            }
            let ext = add_hyperbolically_embedded(&m, &st.cosets, config.threshold).map_err(|e| stage_err(stage, e))?;
            report.thresholds.insert("B".into(), ext.threshold);
            let detail = serde_json::json!({
                "coset_domains": ext.coset_domains,
                "threshold": ext.threshold,
                "calibrated": ext.calibrated,
                "signature": ext.signature.to_doc(),
            });
            st.sig = Some(ext.signature.clone());
            st.coset_domains = ext.coset_domains.clone();
            st.model = ext.model;
            Ok((true, detail, Verdict::Pass))
        }
        Stage::Isolate => {
            let sig = st.sig.as_ref().expect("signature present");
            let r = detect_isolated_orthogonality(sig, ISOLATION_LIMIT);
            report.thresholds.insert("isolation_limit".into(), ISOLATION_LIMIT as f64);
            let (ok, verdict) = match &r {
                IsolationResult::Found { family } if !family.is_empty() => {
                    st.family = family.clone();
                    (true, Verdict::Pass)
                }
                IsolationResult::Inconclusive { .. } => (false, Verdict::Inconclusive),
                _ => (false, Verdict::Fail),
            };
            Ok((ok, to_value(&r), verdict))
        }
        Stage::Classify => {
            let sig = st.sig.as_ref().expect("signature present");
            let c = classify_geometry(sig, None).map_err(|e| stage_err(stage, e))?;
            Ok((c.verdict != GeometryVerdict::Wide, to_value(&c), Verdict::Fail))
        }
        Stage::Quotient => {
            let sig = st.sig.as_ref().expect("signature present");
            if st.family.is_empty() {
                return Err(stage_err(stage, "no isolating family; run isolate first"));
            }
            let members: Vec<usize> = st.family.iter().map(|&d| sig.index(d)).collect::<Result<_, _>>().map_err(|e| stage_err(stage, e))?;
            let lambdas: Vec<DomainSubset> = members.iter().map(|&i| DomainSubset::nesting_closure(sig, i)).collect();
            let cert = rel_hyp_boundary_check(sig, None, &lambdas).map_err(|e| stage_err(stage, e))?;
            if !cert.certified {
                return Ok((false, to_value(&cert), Verdict::Fail));
            }
            let bc = build_boundary_complex(sig, None).map_err(|e| stage_err(stage, e))?;
            let q = quotient_boundary(&bc, &lambdas).map_err(|e| stage_err(stage, e))?;
            let detail = serde_json::json!({ "certificate": cert, "quotient": q });
            st.quotient = Some(q);
            Ok((true, detail, Verdict::Pass))
        }
        Stage::VerifyAgainstCusp => {
            let m = need_model(st)?;
            let q = st.quotient.clone().ok_or_else(|| stage_err(stage, "no quotient; run quotient first"))?;
            if st.cosets.len() != q.peripheral_count {
                return Err(stage_err(stage, format!("{} cosets for {} peripherals", st.cosets.len(), q.peripheral_count)));
            }
            let ambient = &m.ambient;
            let da = all_pairs_distances(ambient).map_err(|e| stage_err(stage, e))?;
            let ps = PeripheralSystem {
                peripherals: st.cosets.iter().map(|c| Peripheral { label: c.label.clone(), vertices: c.vertices.clone() }).collect(),
                scale: 1.0,
            };
            let cs = build_cusped_space(ambient, &ps, config.depth).map_err(|e| stage_err(stage, e))?;
            let dc = all_pairs_distances(&cs.graph).map_err(|e| stage_err(stage, e))?;
            let delta = match config.delta {
                Some(d) => d,
                None => four_point_delta(&dc, &DeltaOptions::default()).delta,
            };
            let anchors: Vec<usize> = (0..st.cosets.len())
                .map(|k| {
                    let others: VertexSet = st.cosets.iter().enumerate().filter(|&(j, _)| j != k).flat_map(|(_, c)| c.vertices.iter()).collect();
                    if others.is_empty() { st.cosets[k].vertices.as_slice()[0] } else { anchor(&da, &st.cosets[k].vertices, &others) }
                })
                .collect();
            let scale = (0..anchors.len())
                .flat_map(|a| (a + 1..anchors.len()).map(move |b| (a, b)))
                .map(|(a, b)| da.get(anchors[a], anchors[b]))
                .fold(0.0, f64::max);
            let bound = scale + 2.0 * delta;
            let mut reports = Vec::new();
            let mut passed = true;
            for k in 0..anchors.len() {
                let x0 = anchors[k];
                let march = March { peripheral: k, points: doubling_march(&da, &st.cosets[k].vertices, x0) };
                let r = verify_quotient_against_cusp(&cs, &q, &da, &dc, x0, &anchors, &[march], delta, bound)
                    .map_err(|e| stage_err(stage, e))?;
                passed &= r.passed;
                reports.push(r);
            }
            report.thresholds.insert("delta".into(), delta);
            report.thresholds.insert("bound".into(), bound);
            report.thresholds.insert("depth".into(), cs.horoballs.first().map_or(0.0, |h| h.depth as f64));
            Ok((passed, to_value(&reports), Verdict::Fail))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys() {
        let r = ReportDocument::new("x", &[b"a"], 7).measure("z", 1.0).measure("a", 2.0);
        let s = r.to_canonical_json();
        assert!(s.find("\"a\"").unwrap() < s.find("\"z\"").unwrap());
        assert!(s.find("\"command\"").unwrap() < s.find("\"inputs_digest\"").unwrap());
        let back: ReportDocument = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn digest_separates_inputs() {
        assert_ne!(digest_inputs(&[b"ab", b"c"]), digest_inputs(&[b"a", b"bc"]));
        assert_eq!(digest_inputs(&[b"x"]), digest_inputs(&[b"x"]));
    }

    #[test]
    fn unknown_generator() {
        assert_eq!(
            FixtureSpec::from_name("torus", &BTreeMap::new(), 0),
            Err(CliIoError::UnknownGenerator("torus".into()))
        );
    }

    #[test]
    fn fixtures_round_trip() {
        for spec in [
            FixtureSpec::ProductOfTrees { depth: 2, valence: 3, mutation: None },
            FixtureSpec::GluedFlats { side: 3, path_len: 3 },
            FixtureSpec::Grid { rows: 2, cols: 3 },
            FixtureSpec::RandomGraph { n: 12, p: 0.2, seed: 5 },
            FixtureSpec::RelHypSignature { copies: 2 },
        ] {
            let a = generate_fixture(&spec).unwrap();
            let text = canonical_json(&a);
            let back: FixtureOutput = serde_json::from_str(&text).unwrap();
            assert_eq!(canonical_json(&back), text);
            assert_eq!(canonical_json(&generate_fixture(&spec).unwrap()), text);
        }
    }

    #[test]
    fn product_fixture_passes_axioms() {
        let out = generate_fixture(&FixtureSpec::ProductOfTrees { depth: 2, valence: 3, mutation: None }).unwrap();
        let m = RealizedModel::from_doc(out.model.unwrap()).unwrap();
        assert!(verify_axioms(&m).unwrap().passed);
    }

    #[test]
    fn rel_hyp_pipeline_on_flats() {
        let config = PipelineConfig {
            fixture: Some(FixtureSpec::GluedFlats { side: 4, path_len: 3 }),
            model: None,
            signature: None,
            cosets: None,
            threshold: Threshold::Auto,
            delta: None,
            depth: None,
            stages: vec![Stage::Verify, Stage::AddCosets, Stage::Isolate, Stage::Classify, Stage::Quotient, Stage::VerifyAgainstCusp],
        };
        let r = run_pipeline(&config, 0).unwrap();
        let res: PipelineResult = serde_json::from_value(r.result.clone()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", res.stopped_at);
        assert_eq!(res.quotient_nodes, Some(2 + res.residual.unwrap()));
    }

    #[test]
    fn wide_pipeline_stops_at_classify() {
        let config = PipelineConfig {
            fixture: None,
            model: None,
            signature: Some(
                crate::signature::SignatureBuilder::new(2)
                    .domain("S", false)
                    .domain("A", true)
                    .domain("B", true)
                    .nest("A", "S")
                    .nest("B", "S")
                    .orth("A", "B")
                    .build()
                    .unwrap()
                    .to_doc(),
            ),
            cosets: None,
            threshold: Threshold::Auto,
            delta: None,
            depth: None,
            stages: vec![Stage::Classify, Stage::Quotient],
        };
        let r = run_pipeline(&config, 0).unwrap();
        let res: PipelineResult = serde_json::from_value(r.result).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(res.stopped_at.as_deref(), Some("classify"));
    }
}
