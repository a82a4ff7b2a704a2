//! Combinatorial horoballs, nets, cusped spaces and the horoball distance
//! estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, DistanceMatrix, MetricsError, VertexSet, WeightedGraph};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HorocuspError {
    #[error("horoball depth must be at least 1")]
    ZeroDepth,
    #[error("horoball base must have unit edge lengths")]
    NonUnitBase,
    #[error("negative horoball level")]
    NegativeLevel,
    #[error("net scale too coarse: approximation graph of peripheral {0} is disconnected")]
    CoarseNet(usize),
    #[error("peripheral {0} is empty")]
    EmptyPeripheral(usize),
    #[error("net scale must be positive")]
    BadScale,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// `ℋ(Γ)` truncated at `depth`; vertex `(v, n)` has index `n·|V(Γ)| + v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Horoball<S> {
    pub base: WeightedGraph<S>,
    pub depth: usize,
    pub graph: WeightedGraph<S>,
}

impl<S: Scalar> Horoball<S> {
    pub fn vertex(&self, v: usize, level: usize) -> usize {
        level * self.base.n + v
    }

    /// `(v, n)` for a horoball vertex index.
    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i % self.base.n, i / self.base.n)
    }
}

/// `⌈ln diam⌉ + 3`, with non-positive logarithms clamped to zero.
pub fn default_depth<S: Scalar>(base_diameter: S) -> usize {
    let l = base_diameter.as_f64().ln().ceil();
    if l.is_finite() && l > 0.0 {
        l as usize + 3
    } else {
        3
    }
}

pub fn build_horoball<S: Scalar>(base: &WeightedGraph<S>, depth: usize) -> Result<Horoball<S>, HorocuspError> {
    if depth < 1 {
        return Err(HorocuspError::ZeroDepth);
    }
    base.validate()?;
    if !base.has_unit_lengths() {
        return Err(HorocuspError::NonUnitBase);
    }
    let base = base.canonical();
    let nb = base.n;
    let mut graph = WeightedGraph::empty(nb * (depth + 1));
    for level in 0..=depth {
        let w = S::lit((-(level as f64)).exp());
        for &(u, v, _) in &base.edges {
            graph.add_edge(level * nb + u, level * nb + v, w);
        }
    }
    for level in 0..depth {
        for v in 0..nb {
            graph.add_edge(level * nb + v, (level + 1) * nb + v, S::one());
        }
    }
    Ok(Horoball { base, depth, graph })
}

/// `2 ln(d e^{-max(n, m)} + 1) + |m − n|`.
pub fn horoball_distance_estimate<S: Scalar>(d_base: S, n: i64, m: i64) -> Result<S, HorocuspError> {
    if n < 0 || m < 0 {
        return Err(HorocuspError::NegativeLevel);
    }
    let top = n.max(m) as f64;
    let v = 2.0 * (d_base.as_f64() * (-top).exp() + 1.0).ln() + (m - n).abs() as f64;
    Ok(S::lit(v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct FormulaReport<S> {
    pub c_observed: S,
    /// Arg-max pair as `((v, n), (w, m))`.
    pub argmax: ((usize, usize), (usize, usize)),
    pub depth: usize,
    /// Whether `depth ≥ ⌈ln diam⌉ + 2`.
    pub adequate_depth: bool,
}

/// Maximum over all vertex pairs of `|d_true − estimate|`.
pub fn verify_distance_formula<S: Scalar>(h: &Horoball<S>) -> Result<FormulaReport<S>, HorocuspError> {
    let base_d = metrics::all_pairs_distances(&h.base)?;
    let true_d = metrics::all_pairs_distances(&h.graph)?;
    let n = h.graph.n;
    let (c, i, j) = (0..n)
        .into_par_iter()
        .map(|i| {
            let (vi, li) = h.coords(i);
            let mut best = (S::zero(), i, i);
            for j in i..n {
                let (vj, lj) = h.coords(j);
                let est = horoball_distance_estimate(base_d.get(vi, vj), li as i64, lj as i64).expect("levels are non-negative");
                let dev = (true_d.get(i, j) - est).abs();
                if dev > best.0 {
                    best = (dev, i, j);
                }
            }
            best
        })
        .reduce(|| (S::zero(), 0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
    let diam = base_d.diameter();
    let needed = default_depth(diam).saturating_sub(1);
    Ok(FormulaReport { c_observed: c, argmax: (h.coords(i), h.coords(j)), depth: h.depth, adequate_depth: h.depth >= needed })
}

/// A `C`-net of a peripheral and its approximation graph, whose vertex `i`
/// is `net[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Net<S> {
    pub net: VertexSet,
    pub approx: WeightedGraph<S>,
}

/// Greedy net over ascending ids; a vertex joins when it is farther than
/// `C` from every chosen point. Net points at distance `≤ 2C` are joined.
pub fn build_net_and_approximation_graph<S: Scalar>(
    d: &DistanceMatrix<S>,
    p: &VertexSet,
    c: S,
) -> Result<Net<S>, HorocuspError> {
    if p.is_empty() {
        return Err(HorocuspError::EmptyPeripheral(0));
    }
    if !(c > S::zero()) {
        return Err(HorocuspError::BadScale);
    }
    let mut net: Vec<usize> = Vec::new();
    for v in p.iter() {
        if net.iter().all(|&u| d.get(u, v) > c + S::TOLERANCE) {
            net.push(v);
        }
    }
    let two_c = c + c;
    let mut approx = WeightedGraph::empty(net.len());
    for i in 0..net.len() {
        for j in i + 1..net.len() {
            if d.get(net[i], net[j]) <= two_c + S::TOLERANCE {
                approx.add_edge(i, j, S::one());
            }
        }
    }
    if metrics::all_pairs_distances(&approx).is_err() {
        return Err(HorocuspError::CoarseNet(0));
    }
    Ok(Net { net: VertexSet::new(net), approx })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peripheral {
    pub label: String,
    pub vertices: VertexSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PeripheralSystem<S> {
    pub peripherals: Vec<Peripheral>,
    pub scale: S,
}

/// Ambient graph with a horoball over the approximation graph of each
/// peripheral. Ambient vertices keep their ids; horoball `i` occupies
/// `offsets[i]..offsets[i] + |net_i|·(depth + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct CuspedSpace<S> {
    pub ambient: WeightedGraph<S>,
    pub peripherals: PeripheralSystem<S>,
    pub nets: Vec<VertexSet>,
    pub horoballs: Vec<Horoball<S>>,
    pub offsets: Vec<usize>,
    pub graph: WeightedGraph<S>,
    /// Horoball level per vertex; `None` on ambient vertices.
    pub levels: Vec<Option<usize>>,
    /// Ambient vertex each vertex lies over.
    pub origin: Vec<usize>,
}

impl<S: Scalar> CuspedSpace<S> {
    /// Index of `(net point k, level)` in horoball `i`.
    pub fn horoball_vertex(&self, i: usize, k: usize, level: usize) -> usize {
        self.offsets[i] + self.horoballs[i].vertex(k, level)
    }

    /// Deepest vertex above the net point of peripheral `i` nearest `x`
    /// (ties to the smallest id).
    pub fn deep_proxy(&self, d_ambient: &DistanceMatrix<S>, i: usize, x: usize) -> usize {
        let net = self.nets[i].as_slice();
        let mut best = 0;
        for k in 1..net.len() {
            if d_ambient.get(x, net[k]) < d_ambient.get(x, net[best]) {
                best = k;
            }
        }
        self.horoball_vertex(i, best, self.horoballs[i].depth)
    }
}

/// Glues a horoball over each peripheral's approximation graph. `depth`
/// defaults to [`default_depth`] of the largest approximation-graph diameter.
pub fn build_cusped_space<S: Scalar>(
    g: &WeightedGraph<S>,
    peripherals: &PeripheralSystem<S>,
    depth: Option<usize>,
) -> Result<CuspedSpace<S>, HorocuspError> {
    let d = metrics::all_pairs_distances(g)?;
    let mut nets = Vec::new();
    for (i, p) in peripherals.peripherals.iter().enumerate() {
        if p.vertices.is_empty() {
            return Err(HorocuspError::EmptyPeripheral(i));
        }
        if let Some(v) = p.vertices.max_vertex().filter(|&v| v >= g.n) {
            return Err(MetricsError::VertexOutOfRange { vertex: v, n: g.n }.into());
        }
        let net = build_net_and_approximation_graph(&d, &p.vertices, peripherals.scale).map_err(|e| match e {
            HorocuspError::CoarseNet(_) => HorocuspError::CoarseNet(i),
            other => other,
        })?;
        nets.push(net);
    }
    let depth = match depth {
        Some(dp) => dp,
        None => {
            let mut diam = S::zero();
            for net in &nets {
                diam = diam.max(metrics::all_pairs_distances(&net.approx)?.diameter());
            }
            default_depth(diam)
        }
    };
    let mut graph = g.clone();
    let mut levels = vec![None; g.n];
    let mut origin: Vec<usize> = (0..g.n).collect();
    let mut horoballs = Vec::new();
    let mut offsets = Vec::new();
    for net in &nets {
        let h = build_horoball(&net.approx, depth)?;
        let off = graph.n;
        graph.n += h.graph.n;
        for &(u, v, w) in &h.graph.edges {
            graph.add_edge(u + off, v + off, w);
        }
        for i in 0..h.graph.n {
            let (k, level) = h.coords(i);
            levels.push(Some(level));
            origin.push(net.net.as_slice()[k]);
        }
        for (k, p) in net.net.iter().enumerate() {
            graph.add_edge(p, off + h.vertex(k, 0), S::one());
        }
        offsets.push(off);
        horoballs.push(h);
    }
    Ok(CuspedSpace {
        ambient: g.clone(),
        peripherals: peripherals.clone(),
        nets: nets.into_iter().map(|n| n.net).collect(),
        horoballs,
        offsets,
        graph,
        levels,
        origin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ProximityRow<S> {
    pub point: usize,
    pub distance: S,
    pub product: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ProximityReport<S> {
    pub base_point: usize,
    pub proxy: usize,
    pub rows: Vec<ProximityRow<S>>,
    pub tolerance: S,
    /// Products are nondecreasing in distance up to `tolerance`.
    pub monotone: bool,
}

/// `(x | ξ)_{x0}` against the deep proxy of peripheral `i` nearest `x0`,
/// for each sample, sorted by ambient distance from `x0`.
pub fn boundary_proximity_profile<S: Scalar>(
    cs: &CuspedSpace<S>,
    d_ambient: &DistanceMatrix<S>,
    d_cusped: &DistanceMatrix<S>,
    i: usize,
    x0: usize,
    samples: &[usize],
) -> ProximityReport<S> {
    let proxy = cs.deep_proxy(d_ambient, i, x0);
    proximity_against(d_ambient, d_cusped, proxy, x0, samples)
}

/// Proximity profile against an explicit proxy vertex.
pub fn proximity_against<S: Scalar>(
    d_ambient: &DistanceMatrix<S>,
    d_cusped: &DistanceMatrix<S>,
    proxy: usize,
    x0: usize,
    samples: &[usize],
) -> ProximityReport<S> {
    let mut rows: Vec<ProximityRow<S>> = samples
        .iter()
        .map(|&x| ProximityRow {
            point: x,
            distance: d_ambient.get(x0, x),
            product: metrics::gromov_product(d_cusped, x, proxy, x0),
        })
        .collect();
    rows.sort_by(|a, b| a.distance.partial_cmp(&b.distance).unwrap().then(a.point.cmp(&b.point)));
    let tolerance = S::lit(2.0);
    let monotone = rows.windows(2).all(|w| w[1].product >= w[0].product - tolerance);
    ProximityReport { base_point: x0, proxy, rows, tolerance, monotone }
}
