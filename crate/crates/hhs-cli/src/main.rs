//! `hhs`: command-line surface over hhs-core with canonical JSON reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::Value;

use hhs_core::boundary::{self, build_boundary_complex, BoundaryDoc, DomainSubset};
use hhs_core::classify::{self, ThickParams};
use hhs_core::cli_io::{canonical_json, generate_fixture, run_pipeline, FixtureSpec, PipelineConfig, ReportDocument, Verdict};
use hhs_core::horocusp::{self, Peripheral, PeripheralSystem};
use hhs_core::metrics::{self, DeltaOptions, VertexSet};
use hhs_core::model::{self, ModelDoc, RealizedModel};
use hhs_core::signature::{validate_signature, DomainId, HhsSignature, SignatureDoc};
use hhs_core::transforms::{self, CosetSpec, IsolationResult, Threshold, ISOLATION_LIMIT};
use hhs_core::Graph;

#[derive(Parser)]
#[command(name = "hhs", version, about = "Finite hierarchically hyperbolic structures toolkit")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel scans.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Pass bound for measured constants where a command supports one.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Signature documents.
    #[command(subcommand)]
    Sig(SigCmd),
    /// Metric primitives on a graph.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Realized models.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Combinatorial horoballs.
    #[command(subcommand)]
    Horoball(HoroballCmd),
    /// Cusped spaces.
    #[command(subcommand)]
    Cusp(CuspCmd),
    /// Simplicial boundary complexes.
    #[command(subcommand)]
    Boundary(BoundaryCmd),
    /// Structure transforms.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Geometry verdict from a signature.
    Classify(SigInput),
    /// Boundary quotient collapsing peripheral closures.
    Quotient(QuotientArgs),
    /// Thickness chain audit.
    Thick(ThickArgs),
    /// Generate a fixture.
    Fixture(FixtureArgs),
    /// Run a staged pipeline from a config file.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SigInput {
    /// Signature, model or fixture document.
    input: PathBuf,
}

#[derive(Args)]
struct GraphInput {
    /// Graph, model or fixture document.
    input: PathBuf,
}

#[derive(Args)]
struct ModelInput {
    /// Model or fixture document.
    input: PathBuf,
}

#[derive(Subcommand)]
enum SigCmd {
    Validate(SigInput),
    Show(SigInput),
}

#[derive(Subcommand)]
enum MetricsCmd {
    Delta(GraphInput),
    Qc {
        input: PathBuf,
        /// Vertex set as a JSON array.
        #[arg(long)]
        set: String,
    },
    Project {
        input: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        source: String,
    },
}

#[derive(Subcommand)]
enum ModelCmd {
    Verify(ModelInput),
    Region {
        input: PathBuf,
        /// Domain id.
        #[arg(long)]
        domain: u32,
    },
    Gate {
        input: PathBuf,
        #[arg(long)]
        set: String,
        #[arg(long)]
        point: usize,
    },
}

#[derive(Subcommand)]
enum HoroballCmd {
    Build {
        input: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    Verify {
        input: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Subcommand)]
enum CuspCmd {
    Build {
        input: PathBuf,
        /// Peripheral list or fixture document; the input's own when absent.
        #[arg(long)]
        peripherals: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    Proximity {
        input: PathBuf,
        #[arg(long)]
        peripherals: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
        /// Peripheral whose deep proxy is the target.
        #[arg(long)]
        peripheral: usize,
        #[arg(long)]
        base: usize,
        /// Sample points as a JSON array.
        #[arg(long)]
        points: String,
    },
}

#[derive(Subcommand)]
enum BoundaryCmd {
    Build(SigInput),
    Join(SigInput),
    Eyries {
        input: PathBuf,
        /// Domain ids as a JSON array; all unbounded domains when absent.
        #[arg(long)]
        domains: Option<String>,
    },
    Components(SigInput),
}

#[derive(Subcommand)]
enum TransformCmd {
    Electrify(ModelInput),
    AddCosets {
        input: PathBuf,
        /// Coset list; the fixture peripherals when absent.
        #[arg(long)]
        cosets: Option<PathBuf>,
        /// `default`, `auto` or a number.
        #[arg(long, default_value = "default")]
        threshold: String,
    },
    Isolate(SigInput),
    CuspSig {
        input: PathBuf,
        /// Family of domain ids as a JSON array; detected when absent.
        #[arg(long)]
        family: Option<String>,
    },
}

#[derive(Args)]
struct QuotientArgs {
    input: PathBuf,
    /// Peripheral domain ids as a JSON array; the isolating family when absent.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct ThickArgs {
    input: PathBuf,
    #[arg(long)]
    peripherals: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct FixtureArgs {
    /// product-of-trees, glued-flats, grid, random-graph or rel-hyp-signature.
    name: String,
    /// Parameters as `key=value`.
    #[arg(long = "param", short = 'p')]
    params: Vec<String>,
}

#[derive(Args)]
struct PipelineArgs {
    config: PathBuf,
}

/// Failure before a verdict can be reached.
struct Structural(String);

impl<E: std::fmt::Display> From<E> for Structural {
    fn from(e: E) -> Self {
        Structural(e.to_string())
    }
}

type Res<T> = Result<T, Structural>;

struct Input {
    bytes: Vec<u8>,
    value: Value,
}

fn read(path: &Path) -> Res<Input> {
    let bytes = std::fs::read(path).map_err(|e| Structural(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| Structural(format!("{}: {e}", path.display())))?;
    Ok(Input { bytes, value })
}

fn parse<T: DeserializeOwned>(v: &Value) -> Res<T> {
    Ok(serde_json::from_value(v.clone())?)
}

fn parse_inline<T: DeserializeOwned>(s: &str) -> Res<T> {
    serde_json::from_str(s).map_err(|e| Structural(format!("{s}: {e}")))
}

/// Fixture reports keep the generated files under `result`.
fn unwrap_report(v: &Value) -> &Value {
    match (v.get("command"), v.get("result")) {
        (Some(_), Some(r)) => r,
        _ => v,
    }
}

fn signature_of(v: &Value) -> Res<HhsSignature> {
    let v = unwrap_report(v);
    if v.get("domains").is_some() {
        return Ok(HhsSignature::from_doc(parse::<SignatureDoc>(v)?)?);
    }
    if let Some(s) = v.get("signature") {
        return signature_of(s);
    }
    if let Some(m) = v.get("model") {
        return signature_of(m);
    }
    Err(Structural("no signature in document".into()))
}

fn model_of(v: &Value) -> Res<RealizedModel> {
    let v = unwrap_report(v);
    if v.get("proj").is_some() {
        return Ok(RealizedModel::from_doc(parse::<ModelDoc>(v)?)?);
    }
    match v.get("model") {
        Some(m) => model_of(m),
        None => Err(Structural("no model in document".into())),
    }
}

fn graph_of(v: &Value) -> Res<Graph> {
    let v = unwrap_report(v);
    if v.get("edges").is_some() {
        let g: Graph = parse(v)?;
        g.validate()?;
        return Ok(g);
    }
    if let Some(g) = v.get("graph") {
        return graph_of(g);
    }
    if let Some(g) = v.get("ambient") {
        return graph_of(g);
    }
    match v.get("model") {
        Some(m) => graph_of(m),
        None => Err(Structural("no graph in document".into())),
    }
}

fn peripherals_of(v: &Value) -> Res<Vec<Peripheral>> {
    let v = unwrap_report(v);
    if v.is_array() {
        return parse(v);
    }
    match v.get("peripherals") {
        Some(p) => parse(p),
        None => Err(Structural("no peripherals in document".into())),
    }
}

fn load_peripherals(primary: &Input, path: &Option<PathBuf>) -> Res<(Vec<Peripheral>, Vec<u8>)> {
    match path {
        Some(p) => {
            let i = read(p)?;
            Ok((peripherals_of(&i.value)?, i.bytes))
        }
        None => Ok((peripherals_of(&primary.value)?, Vec::new())),
    }
}

fn threshold_of(s: &str) -> Res<Threshold> {
    match s {
        "default" => Ok(Threshold::Default),
        "auto" => Ok(Threshold::Auto),
        x => Ok(Threshold::Fixed(x.parse().map_err(|_| Structural(format!("threshold {x}")))?)),
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn delta_options(seed: u64) -> DeltaOptions {
    DeltaOptions { seed, ..DeltaOptions::default() }
}

fn run(cli: &Cli) -> Res<ReportDocument> {
    let seed = cli.seed;
    let tol = cli.tolerance;
    let with_tol = |r: ReportDocument| match tol {
        Some(t) => r.threshold("tolerance", t),
        None => r,
    };
    Ok(match &cli.command {
        Command::Sig(SigCmd::Validate(a)) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            let r = validate_signature(&sig);
            let mut doc = ReportDocument::new("sig validate", &[&i.bytes], seed).verdict(pass_if(r.passed));
            for c in r.checks.iter().filter(|c| !c.passed) {
                doc = doc.witness(c);
            }
            doc.with_result(&r)
        }
        Command::Sig(SigCmd::Show(a)) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            ReportDocument::new("sig show", &[&i.bytes], seed)
                .measure("domains", sig.n() as f64)
                .measure("complexity", sig.complexity() as f64)
                .with_result(&sig.to_doc())
        }
        Command::Metrics(MetricsCmd::Delta(a)) => {
            let i = read(&a.input)?;
            let g = graph_of(&i.value)?;
            let d = metrics::all_pairs_distances(&g)?;
            let opts = delta_options(seed);
            let e = metrics::four_point_delta(&d, &opts);
            let verdict = match tol {
                Some(t) => pass_if(e.delta <= t + 1e-9),
                None => Verdict::Pass,
            };
            with_tol(ReportDocument::new("metrics delta", &[&i.bytes], seed))
                .threshold("exhaustive_limit", opts.exhaustive_limit as f64)
                .threshold("exact_limit", opts.exact_limit as f64)
                .threshold("samples", opts.samples as f64)
                .measure("delta", e.delta)
                .verdict(verdict)
                .with_result(&e)
        }
        Command::Metrics(MetricsCmd::Qc { input, set }) => {
            let i = read(input)?;
            let g = graph_of(&i.value)?;
            let y: VertexSet = parse_inline(set)?;
            let d = metrics::all_pairs_distances(&g)?;
            let r = metrics::quasiconvexity_constant(&g, &d, &y)?;
            let verdict = match tol {
                Some(t) => pass_if(r.all_geodesics <= t + 1e-9),
                None => Verdict::Pass,
            };
            with_tol(ReportDocument::new("metrics qc", &[&i.bytes, set.as_bytes()], seed))
                .measure("some_geodesic", r.some_geodesic)
                .measure("all_geodesics", r.all_geodesics)
                .verdict(verdict)
                .with_result(&r)
        }
        Command::Metrics(MetricsCmd::Project { input, target, source }) => {
            let i = read(input)?;
            let g = graph_of(&i.value)?;
            let t: VertexSet = parse_inline(target)?;
            let s: VertexSet = parse_inline(source)?;
            let d = metrics::all_pairs_distances(&g)?;
            let p = metrics::project_set(&d, &t, &s)?;
            ReportDocument::new("metrics project", &[&i.bytes, target.as_bytes(), source.as_bytes()], seed)
                .measure("diameter", d.set_diameter(&p))
                .with_result(&p)
        }
        Command::Model(ModelCmd::Verify(a)) => {
            let i = read(&a.input)?;
            let m = model_of(&i.value)?;
            let r = model::verify_axioms(&m)?;
            let mut doc = ReportDocument::new("model verify", &[&i.bytes], seed)
                .threshold("E", r.constant)
                .verdict(pass_if(r.passed));
            for c in &r.checks {
                doc = doc.measure(&c.name, c.measured);
            }
            for c in r.checks.iter().filter(|c| !c.passed) {
                doc = doc.witness(c);
            }
            doc.with_result(&r)
        }
        Command::Model(ModelCmd::Region { input, domain }) => {
            let i = read(input)?;
            let m = model_of(&i.value)?;
            let w = m.sig.index(DomainId(*domain))?;
            let p = m.prepare()?;
            let r = model::product_region(&p, w);
            ReportDocument::new("model region", &[&i.bytes, &domain.to_le_bytes()], seed)
                .threshold("E", m.constant)
                .measure("size", r.vertices.len() as f64)
                .verdict(pass_if(!r.empty_warning))
                .with_result(&r)
        }
        Command::Model(ModelCmd::Gate { input, set, point }) => {
            let i = read(input)?;
            let m = model_of(&i.value)?;
            let y: VertexSet = parse_inline(set)?;
            if *point >= m.ambient.n {
                return Err(Structural(format!("point {point} out of range")));
            }
            let p = m.prepare()?;
            let r = model::gate(&p, &y, *point)?;
            ReportDocument::new("model gate", &[&i.bytes, set.as_bytes(), &point.to_le_bytes()], seed)
                .threshold("E", m.constant)
                .measure("kappa", r.kappa)
                .with_result(&r)
        }
        Command::Horoball(HoroballCmd::Build { input, depth }) => {
            let i = read(input)?;
            let g = graph_of(&i.value)?;
            let depth = depth_or_default(&g, *depth)?;
            let h = horocusp::build_horoball(&g, depth)?;
            ReportDocument::new("horoball build", &[&i.bytes], seed)
                .threshold("depth", depth as f64)
                .measure("vertices", h.graph.n as f64)
                .with_result(&h.graph)
        }
        Command::Horoball(HoroballCmd::Verify { input, depth }) => {
            let i = read(input)?;
            let g = graph_of(&i.value)?;
            let depth = depth_or_default(&g, *depth)?;
            let h = horocusp::build_horoball(&g, depth)?;
            let r = horocusp::verify_distance_formula(&h)?;
            let verdict = match tol {
                Some(t) => pass_if(r.c_observed <= t + 1e-9),
                None => Verdict::Pass,
            };
            with_tol(ReportDocument::new("horoball verify", &[&i.bytes], seed))
                .threshold("depth", depth as f64)
                .measure("c", r.c_observed)
                .verdict(verdict)
                .with_result(&r)
        }
        Command::Cusp(CuspCmd::Build { input, peripherals, depth, scale }) => {
            let i = read(input)?;
            let g = graph_of(&i.value)?;
            let (ps, pbytes) = load_peripherals(&i, peripherals)?;
            let cs = horocusp::build_cusped_space(&g, &PeripheralSystem { peripherals: ps, scale: *scale }, *depth)?;
            ReportDocument::new("cusp build", &[&i.bytes, &pbytes], seed)
                .threshold("scale", *scale)
                .threshold("depth", cs.horoballs.first().map_or(0.0, |h| h.depth as f64))
                .measure("vertices", cs.graph.n as f64)
                .with_result(&cs)
        }
        Command::Cusp(CuspCmd::Proximity { input, peripherals, depth, peripheral, base, points }) => {
            let i = read(input)?;
            let g = graph_of(&i.value)?;
            let (ps, pbytes) = load_peripherals(&i, peripherals)?;
            let pts: Vec<usize> = parse_inline(points)?;
            if *peripheral >= ps.len() {
                return Err(Structural(format!("peripheral {peripheral} out of range")));
            }
            if let Some(&v) = pts.iter().chain([base]).find(|&&v| v >= g.n) {
                return Err(Structural(format!("vertex {v} out of range")));
            }
            let cs = horocusp::build_cusped_space(&g, &PeripheralSystem { peripherals: ps, scale: 1.0 }, *depth)?;
            let da = metrics::all_pairs_distances(&g)?;
            let dc = metrics::all_pairs_distances(&cs.graph)?;
            let proxy = cs.deep_proxy(&da, *peripheral, *base);
            let r = horocusp::proximity_against(&da, &dc, proxy, *base, &pts);
            ReportDocument::new("cusp proximity", &[&i.bytes, &pbytes, points.as_bytes()], seed)
                .threshold("depth", cs.horoballs.first().map_or(0.0, |h| h.depth as f64))
                .threshold("monotone_tolerance", r.tolerance)
                .verdict(pass_if(r.monotone))
                .with_result(&r)
        }
        Command::Boundary(cmd) => boundary_cmd(cmd, seed)?,
        Command::Transform(cmd) => transform_cmd(cmd, seed)?,
        Command::Classify(a) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            let c = classify::classify_geometry(&sig, None)?;
            let verdict = match &c.rel_hyp.isolation {
                IsolationResult::Inconclusive { .. } if c.verdict == classify::GeometryVerdict::Indeterminate => Verdict::Inconclusive,
                _ => Verdict::Pass,
            };
            ReportDocument::new("classify", &[&i.bytes], seed)
                .threshold("isolation_limit", ISOLATION_LIMIT as f64)
                .verdict(verdict)
                .with_result(&c)
        }
        Command::Quotient(a) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            let family = family_or_detect(&sig, a.family.as_deref())?;
            let members: Vec<usize> = family.iter().map(|&d| sig.index(d)).collect::<Result<_, _>>()?;
            let lambdas: Vec<DomainSubset> = members.iter().map(|&m| DomainSubset::nesting_closure(&sig, m)).collect();
            let cert = classify::rel_hyp_boundary_check(&sig, None, &lambdas)?;
            let bc = build_boundary_complex(&sig, None)?;
            let q = classify::quotient_boundary(&bc, &lambdas)?;
            ReportDocument::new("quotient", &[&i.bytes], seed)
                .measure("nodes", q.nodes.len() as f64)
                .measure("residual", (q.nodes.len() - q.peripheral_count) as f64)
                .verdict(pass_if(cert.certified))
                .with_result(&serde_json::json!({ "certificate": cert, "quotient": q }))
        }
        Command::Thick(a) => {
            let i = read(&a.input)?;
            let g = graph_of(&i.value)?;
            let (ps, pbytes) = load_peripherals(&i, &a.peripherals)?;
            let sets: Vec<VertexSet> = ps.into_iter().map(|p| p.vertices).collect();
            let r = classify::thick_chain_audit(&g, &sets, ThickParams { c: a.c, threshold: a.threshold, tau: a.tau })?;
            let mut doc = ReportDocument::new("thick", &[&i.bytes, &pbytes], seed)
                .threshold("C", r.c)
                .threshold("infinite_diameter_scale", r.threshold)
                .measure("cover_defect", r.cover_defect)
                .verdict(pass_if(r.certified));
            if let Some(t) = a.tau {
                doc = doc.threshold("tau", t);
            }
            doc.with_result(&r)
        }
        Command::Fixture(a) => {
            let mut params = BTreeMap::new();
            for p in &a.params {
                let (k, v) = p.split_once('=').ok_or_else(|| Structural(format!("parameter {p} is not key=value")))?;
                params.insert(k.to_string(), v.to_string());
            }
            let spec = FixtureSpec::from_name(&a.name, &params, seed)?;
            let out = generate_fixture(&spec)?;
            ReportDocument::new("fixture", &[a.name.as_bytes(), canonical_json(&params).as_bytes()], seed).with_result(&out)
        }
        Command::Pipeline(a) => {
            let i = read(&a.config)?;
            let config: PipelineConfig = parse(&i.value)?;
            run_pipeline(&config, seed)?
        }
    })
}

fn depth_or_default(g: &Graph, depth: Option<usize>) -> Res<usize> {
    Ok(match depth {
        Some(d) => d,
        None => horocusp::default_depth(metrics::all_pairs_distances(g)?.diameter()),
    })
}

fn family_or_detect(sig: &HhsSignature, family: Option<&str>) -> Res<Vec<DomainId>> {
    match family {
        Some(f) => parse_inline(f),
        None => match transforms::detect_isolated_orthogonality(sig, ISOLATION_LIMIT) {
            IsolationResult::Found { family } => Ok(family),
            other => Err(Structural(format!("no isolating family: {}", serde_json::to_string(&other)?))),
        },
    }
}

fn boundary_cmd(cmd: &BoundaryCmd, seed: u64) -> Res<ReportDocument> {
    Ok(match cmd {
        BoundaryCmd::Build(a) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            let bc = build_boundary_complex(&sig, None)?;
            ReportDocument::new("boundary build", &[&i.bytes], seed)
                .measure("classes", bc.len() as f64)
                .measure("edges", bc.edges.len() as f64)
                .with_result(&BoundaryDoc::new(&bc))
        }
        BoundaryCmd::Join(a) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            let bc = build_boundary_complex(&sig, None)?;
            let j = boundary::is_join(&bc);
            ReportDocument::new("boundary join", &[&i.bytes], seed)
                .verdict(pass_if(j.is_some()))
                .with_result(&serde_json::json!({ "join": j }))
        }
        BoundaryCmd::Eyries { input, domains } => {
            let i = read(input)?;
            let sig = signature_of(&i.value)?;
            let ids: Vec<DomainId> = match domains {
                Some(d) => parse_inline(d)?,
                None => sig.ids(&sig.unbounded_indices()),
            };
            let r = boundary::eyries(&sig, &DomainSubset { label: "subset".into(), domains: ids })?;
            let mut doc = ReportDocument::new("boundary eyries", &[&i.bytes, domains.as_deref().unwrap_or("").as_bytes()], seed)
                .measure("eyries", r.eyries.len() as f64)
                .verdict(pass_if(r.valid));
            if let Some(w) = &r.witness {
                doc = doc.witness(w);
            }
            doc.with_result(&r)
        }
        BoundaryCmd::Components(a) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            let bc = build_boundary_complex(&sig, None)?;
            let c = boundary::components(&bc);
            let inv = boundary::invariant_components(&bc);
            ReportDocument::new("boundary components", &[&i.bytes], seed)
                .measure("components", c.len() as f64)
                .with_result(&serde_json::json!({ "components": c, "invariant": inv }))
        }
    })
}

fn transform_cmd(cmd: &TransformCmd, seed: u64) -> Res<ReportDocument> {
    Ok(match cmd {
        TransformCmd::Electrify(a) => {
            let i = read(&a.input)?;
            let m = model_of(&i.value)?;
            let g = transforms::electrify_maximal(&m)?;
            ReportDocument::new("transform electrify", &[&i.bytes], seed)
                .threshold("E", m.constant)
                .measure("edges", g.edges.len() as f64)
                .with_result(&g)
        }
        TransformCmd::AddCosets { input, cosets, threshold } => {
            let i = read(input)?;
            let m = model_of(&i.value)?;
            let (specs, cbytes): (Vec<CosetSpec>, Vec<u8>) = match cosets {
                Some(p) => {
                    let c = read(p)?;
                    (parse(&c.value)?, c.bytes)
                }
                None => (
                    peripherals_of(&i.value)?
                        .into_iter()
                        .map(|p| CosetSpec { label: p.label, vertices: p.vertices, nested: None })
                        .collect(),
                    Vec::new(),
                ),
            };
            match transforms::add_hyperbolically_embedded(&m, &specs, threshold_of(threshold)?) {
                Ok(ext) => {
                    let isolated = transforms::detect_isolated_orthogonality(&ext.signature, ISOLATION_LIMIT);
                    let exact = matches!(&isolated, IsolationResult::Found { family } if *family == ext.coset_domains);
                    let agree = ext.provenance.iter().all(|p| p.agree);
                    ReportDocument::new("transform add-cosets", &[&i.bytes, &cbytes, threshold.as_bytes()], seed)
                        .threshold("B", ext.threshold)
                        .threshold("E", m.constant)
                        .measure("disagreements", ext.provenance.iter().filter(|p| !p.agree).count() as f64)
                        .verdict(pass_if(agree && exact))
                        .with_result(&serde_json::json!({
                            "signature": ext.signature.to_doc(),
                            "coset_domains": ext.coset_domains,
                            "calibrated": ext.calibrated,
                            "provenance": ext.provenance,
                            "isolation": isolated,
                            "validation": validate_signature(&ext.signature),
                        }))
                }
                Err(transforms::TransformError::Disagreement { domain, coset }) => {
                    ReportDocument::new("transform add-cosets", &[&i.bytes, &cbytes, threshold.as_bytes()], seed)
                        .verdict(Verdict::Fail)
                        .witness(&serde_json::json!({ "domain": domain, "coset": coset }))
                        .with_result(&Value::Null)
                }
                Err(e) => return Err(e.into()),
            }
        }
        TransformCmd::Isolate(a) => {
            let i = read(&a.input)?;
            let sig = signature_of(&i.value)?;
            let r = transforms::detect_isolated_orthogonality(&sig, ISOLATION_LIMIT);
            let verdict = match &r {
                IsolationResult::Found { .. } => Verdict::Pass,
                IsolationResult::Inconclusive { .. } => Verdict::Inconclusive,
                _ => Verdict::Fail,
            };
            ReportDocument::new("transform isolate", &[&i.bytes], seed)
                .threshold("isolation_limit", ISOLATION_LIMIT as f64)
                .verdict(verdict)
                .with_result(&r)
        }
        TransformCmd::CuspSig { input, family } => {
            let i = read(input)?;
            let sig = signature_of(&i.value)?;
            let fam = family_or_detect(&sig, family.as_deref())?;
            let c = transforms::build_cusp_signature(&sig, &fam)?;
            ReportDocument::new("transform cusp-sig", &[&i.bytes, family.as_deref().unwrap_or("").as_bytes()], seed).with_result(&c)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(Structural(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let text = report.to_canonical_json();
    match &cli.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parameterless_document_lookup() {
        let v: Value = serde_json::json!({ "n": 2, "edges": [[0, 1, 1.0]] });
        assert_eq!(graph_of(&v).ok().map(|g| g.n), Some(2));
        assert!(signature_of(&v).is_err());
    }
}
