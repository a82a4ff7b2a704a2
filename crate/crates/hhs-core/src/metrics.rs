//! Metric primitives on finite weighted graphs.
//!
//! Shortest paths, Gromov products, four-point hyperbolicity, closest-point
//! projections, quasiconvexity, convex hulls and coarse intersections.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("graph is disconnected: no path between {0} and {1}")]
    Disconnected(usize, usize),
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) has non-positive or non-finite length")]
    BadLength(usize, usize),
    #[error("vertex set is empty")]
    EmptySet,
}

/// Sorted, deduplicated list of vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(vec![v])
    }

    pub fn range(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| other.contains(v)).collect())
    }

    pub fn max_vertex(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Undirected graph with positive edge lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct WeightedGraph<S> {
    pub n: usize,
    pub edges: Vec<(usize, usize, S)>,
}

impl<S: Scalar> WeightedGraph<S> {
    pub fn empty(n: usize) -> Self {
        WeightedGraph { n, edges: Vec::new() }
    }

    pub fn from_edges(n: usize, edges: Vec<(usize, usize, S)>) -> Result<Self, MetricsError> {
        let g = WeightedGraph { n, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: S) {
        self.edges.push((u, v, w));
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        for &(u, v, w) in &self.edges {
            for x in [u, v] {
                if x >= self.n {
                    return Err(MetricsError::VertexOutOfRange { vertex: x, n: self.n });
                }
            }
            if u == v {
                return Err(MetricsError::SelfLoop(u));
            }
            if !(w > S::zero()) || !w.is_finite() {
                return Err(MetricsError::BadLength(u, v));
            }
        }
        Ok(())
    }

    /// Normalizes endpoints to `u < v`, merges parallel edges keeping the
    /// shortest, and sorts.
    pub fn canonical(&self) -> Self {
        let mut e: Vec<(usize, usize, S)> =
            self.edges.iter().map(|&(u, v, w)| (u.min(v), u.max(v), w)).collect();
        e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal)));
        e.dedup_by(|later, kept| later.0 == kept.0 && later.1 == kept.1);
        WeightedGraph { n: self.n, edges: e }
    }

    /// Neighbor lists sorted by neighbor index; parallel edges keep the shortest.
    pub fn adjacency(&self) -> Vec<Vec<(usize, S)>> {
        let mut adj: Vec<Vec<(usize, S)>> = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.canonical().edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    pub fn has_unit_lengths(&self) -> bool {
        self.edges.iter().all(|&(_, _, w)| (w - S::one()).abs() <= S::TOLERANCE)
    }

    /// Subgraph induced on `keep`, relabeled to `0..keep.len()` in sorted order.
    pub fn induced(&self, keep: &VertexSet) -> Self {
        let mut index = vec![usize::MAX; self.n];
        for (i, v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v, _)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v, w)| (index[u], index[v], w))
            .collect();
        WeightedGraph { n: keep.len(), edges }
    }

    pub fn cast<T: Scalar>(&self) -> WeightedGraph<T> {
        WeightedGraph {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v, w)| (u, v, T::lit(w.as_f64()))).collect(),
        }
    }

    pub fn scaled(&self, factor: S) -> Self {
        WeightedGraph { n: self.n, edges: self.edges.iter().map(|&(u, v, w)| (u, v, w * factor)).collect() }
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i, S::one())).collect();
        WeightedGraph { n, edges }
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.add_edge(n - 1, 0, S::one());
        }
        g
    }

    /// `rows × cols` unit grid; vertex `(r, c)` has index `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut g = Self::empty(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    g.add_edge(v, v + 1, S::one());
                }
                if r + 1 < rows {
                    g.add_edge(v, v + cols, S::one());
                }
            }
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v, S::one());
            }
        }
        g
    }

    /// Cartesian product; vertex `(a, b)` has index `a * other.n + b`.
    pub fn cartesian_product(&self, other: &Self) -> Self {
        let mut g = Self::empty(self.n * other.n);
        for a in 0..self.n {
            for &(u, v, w) in &other.edges {
                g.add_edge(a * other.n + u, a * other.n + v, w);
            }
        }
        for b in 0..other.n {
            for &(u, v, w) in &self.edges {
                g.add_edge(u * other.n + b, v * other.n + b, w);
            }
        }
        g
    }
}

/// Dense symmetric matrix of shortest-path distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> DistanceMatrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let n = rows.len();
        let data = rows.into_iter().flatten().collect::<Vec<_>>();
        assert_eq!(data.len(), n * n, "distance rows must form a square matrix");
        DistanceMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> S {
        self.data.iter().copied().fold(S::zero(), S::max)
    }

    pub fn scaled(&self, factor: S) -> Self {
        DistanceMatrix { n: self.n, data: self.data.iter().map(|&x| x * factor).collect() }
    }

    /// Distance from `x` to the nearest member of `set`.
    pub fn to_set(&self, x: usize, set: &VertexSet) -> S {
        set.iter().map(|y| self.get(x, y)).fold(S::infinity(), S::min)
    }

    /// Infimum distance between two sets.
    pub fn set_distance(&self, a: &VertexSet, b: &VertexSet) -> S {
        a.iter().map(|x| self.to_set(x, b)).fold(S::infinity(), S::min)
    }

    pub fn set_diameter(&self, a: &VertexSet) -> S {
        let mut best = S::zero();
        for x in a.iter() {
            for y in a.iter() {
                best = best.max(self.get(x, y));
            }
        }
        best
    }

    /// Vertices within `c` of `set`.
    pub fn neighborhood(&self, set: &VertexSet, c: S) -> VertexSet {
        (0..self.n).filter(|&v| self.to_set(v, set) <= c + S::TOLERANCE).collect()
    }

    /// Vertices on some geodesic from `a` to `b`.
    pub fn interval(&self, a: usize, b: usize) -> VertexSet {
        let dab = self.get(a, b);
        (0..self.n).filter(|&v| self.get(a, v) + self.get(v, b) <= dab + S::TOLERANCE).collect()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry<S> {
    dist: S,
    vertex: usize,
}

impl<S: Scalar> Eq for HeapEntry<S> {}

impl<S: Scalar> Ord for HeapEntry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl<S: Scalar> PartialOrd for HeapEntry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `source`; unreachable vertices get `S::infinity()`.
pub fn single_source<S: Scalar>(adj: &[Vec<(usize, S)>], source: usize) -> Vec<S> {
    let mut dist = vec![S::infinity(); adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = S::zero();
    heap.push(HeapEntry { dist: S::zero(), vertex: source });
    while let Some(HeapEntry { dist: d, vertex: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry { dist: nd, vertex: v });
            }
        }
    }
    dist
}

pub fn all_pairs_distances<S: Scalar>(g: &WeightedGraph<S>) -> Result<DistanceMatrix<S>, MetricsError> {
    g.validate()?;
    if g.n == 0 {
        return Ok(DistanceMatrix { n: 0, data: Vec::new() });
    }
    let adj = g.adjacency();
    let first = single_source(&adj, 0);
    if let Some(v) = first.iter().position(|d| !d.is_finite()) {
        return Err(MetricsError::Disconnected(0, v));
    }
    let rows: Vec<Vec<S>> = (0..g.n).into_par_iter().map(|s| single_source(&adj, s)).collect();
    Ok(DistanceMatrix::from_rows(rows))
}

/// `(x|y)_z = ½(d(x,z) + d(y,z) − d(x,y))`.
pub fn gromov_product<S: Scalar>(d: &DistanceMatrix<S>, x: usize, y: usize, z: usize) -> S {
    S::half() * (d.get(x, z) + d.get(y, z) - d.get(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMethod {
    /// Every unordered quadruple scanned.
    Exhaustive,
    /// Exact maximum by the pair-sorted pruning scan.
    Pruned,
    /// Seeded random quadruples; a lower bound.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaOptions {
    pub exhaustive_limit: usize,
    pub exact_limit: usize,
    pub samples: u64,
    pub seed: u64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { exhaustive_limit: 60, exact_limit: 1500, samples: 1_000_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct DeltaEstimate<S> {
    pub delta: S,
    pub degenerate: bool,
    pub method: DeltaMethod,
    pub lower_bound: bool,
    pub witness: Option<[usize; 4]>,
}

#[inline]
fn quad_delta<S: Scalar>(d: &DistanceMatrix<S>, x: usize, y: usize, u: usize, v: usize) -> S {
    let s1 = d.get(x, y) + d.get(u, v);
    let s2 = d.get(x, u) + d.get(y, v);
    let s3 = d.get(x, v) + d.get(y, u);
    let (hi, mid) = if s1 >= s2 {
        if s2 >= s3 { (s1, s2) } else if s1 >= s3 { (s1, s3) } else { (s3, s1) }
    } else if s1 >= s3 {
        (s2, s1)
    } else if s2 >= s3 {
        (s2, s3)
    } else {
        (s3, s2)
    };
    S::half() * (hi - mid)
}

type Best<S> = (S, Option<[usize; 4]>);

fn better<S: Scalar>(a: Best<S>, b: Best<S>) -> Best<S> {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Greater) => a,
        Some(Ordering::Less) => b,
        _ => match (a.1, b.1) {
            (Some(x), Some(y)) if y < x => b,
            (None, Some(_)) => b,
            _ => a,
        },
    }
}

/// Four-point hyperbolicity constant: the maximum over quadruples of
/// `min((x|y)_w, (y|z)_w) − (x|z)_w`, evaluated through the equivalent
/// half-gap between the two largest pair sums.
pub fn four_point_delta<S: Scalar>(d: &DistanceMatrix<S>, opts: &DeltaOptions) -> DeltaEstimate<S> {
    let n = d.n();
    if n < 4 {
        return DeltaEstimate {
            delta: S::zero(),
            degenerate: true,
            method: DeltaMethod::Exhaustive,
            lower_bound: false,
            witness: None,
        };
    }
    let (best, method) = if n <= opts.exhaustive_limit {
        (delta_exhaustive(d), DeltaMethod::Exhaustive)
    } else if n <= opts.exact_limit {
        (delta_pruned(d), DeltaMethod::Pruned)
    } else {
        (delta_sampled(d, opts.samples, opts.seed), DeltaMethod::Sampled)
    };
    DeltaEstimate {
        delta: best.0.max(S::zero()),
        degenerate: false,
        method,
        lower_bound: method == DeltaMethod::Sampled,
        witness: best.1,
    }
}

fn delta_exhaustive<S: Scalar>(d: &DistanceMatrix<S>) -> Best<S> {
    let n = d.n();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: Best<S> = (S::neg_infinity(), None);
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        let v = quad_delta(d, i, j, k, l);
                        if v > best.0 {
                            best = (v, Some([i, j, k, l]));
                        }
                    }
                }
            }
            best
        })
        .reduce(|| (S::neg_infinity(), None), better)
}

fn sorted_quad(a: usize, b: usize, c: usize, e: usize) -> [usize; 4] {
    let mut q = [a, b, c, e];
    q.sort_unstable();
    q
}

fn delta_pruned<S: Scalar>(d: &DistanceMatrix<S>) -> Best<S> {
    let n = d.n();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    pairs.sort_by(|a, b| {
        d.get(b.0, b.1).partial_cmp(&d.get(a.0, a.1)).unwrap_or(Ordering::Equal).then(a.cmp(b))
    });
    let mut best: Best<S> = (S::zero(), None);
    for a in 1..pairs.len() {
        let (x, y) = pairs[a];
        if S::half() * d.get(x, y) <= best.0 {
            break;
        }
        let found = pairs[..a]
            .par_iter()
            .map(|&(u, v)| {
                let val = quad_delta(d, x, y, u, v);
                (val, Some(sorted_quad(x, y, u, v)))
            })
            .reduce(|| (S::neg_infinity(), None), better);
        best = better(best, found);
    }
    best
}

fn delta_sampled<S: Scalar>(d: &DistanceMatrix<S>, samples: u64, seed: u64) -> Best<S> {
    let n = d.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Best<S> = (S::zero(), None);
    for _ in 0..samples {
        let q = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
        let v = quad_delta(d, q[0], q[1], q[2], q[3]);
        best = better(best, (v, Some(sorted_quad(q[0], q[1], q[2], q[3]))));
    }
    best
}

/// All `y ∈ Y` with `d(x, y) ≤ d(x, Y) + 1`.
pub fn closest_point_projection<S: Scalar>(
    d: &DistanceMatrix<S>,
    y: &VertexSet,
    x: usize,
) -> Result<VertexSet, MetricsError> {
    if y.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let dmin = d.to_set(x, y);
    Ok(y.iter().filter(|&p| d.get(x, p) <= dmin + S::one() + S::TOLERANCE).collect())
}

/// Projection of a set: the union of the projections of its points.
pub fn project_set<S: Scalar>(
    d: &DistanceMatrix<S>,
    target: &VertexSet,
    source: &VertexSet,
) -> Result<VertexSet, MetricsError> {
    let mut out = Vec::new();
    for x in source.iter() {
        out.extend(closest_point_projection(d, target, x)?.into_vec());
    }
    Ok(VertexSet::new(out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct QuasiconvexityReport<S> {
    /// Smallest μ such that some geodesic between each pair stays in `N_μ(Y)`.
    pub some_geodesic: S,
    /// Smallest μ such that every geodesic between each pair stays in `N_μ(Y)`.
    pub all_geodesics: S,
    pub witness_pair: Option<(usize, usize)>,
}

/// Quasiconvexity constant of `Y`, measured at vertices.
pub fn quasiconvexity_constant<S: Scalar>(
    g: &WeightedGraph<S>,
    d: &DistanceMatrix<S>,
    y: &VertexSet,
) -> Result<QuasiconvexityReport<S>, MetricsError> {
    if y.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let adj = g.adjacency();
    let dy: Vec<S> = (0..d.n()).map(|v| d.to_set(v, y)).collect();
    let pts = y.as_slice();
    let pairs: Vec<(usize, usize)> =
        (0..pts.len()).flat_map(|i| (i + 1..pts.len()).map(move |j| (pts[i], pts[j]))).collect();
    let per_pair: Vec<(S, S, (usize, usize))> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let interval = d.interval(a, b);
            let strict = interval.iter().map(|v| dy[v]).fold(S::zero(), S::max);
            (bottleneck_geodesic(&adj, d, &dy, a, b, &interval), strict, (a, b))
        })
        .collect();
    let mut report = QuasiconvexityReport { some_geodesic: S::zero(), all_geodesics: S::zero(), witness_pair: None };
    for (some, strict, pair) in per_pair {
        if some > report.some_geodesic {
            report.some_geodesic = some;
            report.witness_pair = Some(pair);
        }
        report.all_geodesics = report.all_geodesics.max(strict);
    }
    Ok(report)
}

/// Minimum over geodesics from `a` to `b` of the maximum weight `dy` met.
fn bottleneck_geodesic<S: Scalar>(
    adj: &[Vec<(usize, S)>],
    d: &DistanceMatrix<S>,
    dy: &[S],
    a: usize,
    b: usize,
    interval: &VertexSet,
) -> S {
    let mut order: Vec<usize> = interval.iter().collect();
    order.sort_by(|&u, &v| d.get(a, u).partial_cmp(&d.get(a, v)).unwrap_or(Ordering::Equal).then(u.cmp(&v)));
    let mut best = vec![S::infinity(); d.n()];
    best[a] = dy[a];
    for &v in &order {
        if v == a {
            continue;
        }
        let mut via = S::infinity();
        for &(u, w) in &adj[v] {
            if interval.contains(u) && (d.get(a, u) + w - d.get(a, v)).abs() <= S::TOLERANCE {
                via = via.min(best[u]);
            }
        }
        best[v] = dy[v].max(via);
    }
    best[b]
}

/// Union of all geodesics between pairs of points of `Y`.
pub fn convex_hull<S: Scalar>(d: &DistanceMatrix<S>, y: &VertexSet) -> VertexSet {
    let pts = y.as_slice();
    let mut keep = vec![false; d.n()];
    for &p in pts {
        keep[p] = true;
    }
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            for v in d.interval(a, b).iter() {
                keep[v] = true;
            }
        }
    }
    (0..d.n()).filter(|&v| keep[v]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "diameter", rename_all = "kebab-case")]
#[serde(bound = "S: Scalar")]
pub enum CoarseIntersection<S> {
    Empty,
    Diameter(S),
}

impl<S: Scalar> CoarseIntersection<S> {
    pub fn diameter(&self) -> Option<S> {
        match self {
            CoarseIntersection::Empty => None,
            CoarseIntersection::Diameter(x) => Some(*x),
        }
    }
}

/// Diameter of `N_C(A) ∩ N_C(B)`, or `Empty`.
pub fn coarse_intersection_diameter<S: Scalar>(
    d: &DistanceMatrix<S>,
    a: &VertexSet,
    b: &VertexSet,
    c: S,
) -> CoarseIntersection<S> {
    let common = d.neighborhood(a, c).intersection(&d.neighborhood(b, c));
    if common.is_empty() {
        CoarseIntersection::Empty
    } else {
        CoarseIntersection::Diameter(d.set_diameter(&common))
    }
}

/// Connected components of the graph on `set` joining points at distance `≤ scale`.
pub fn coarse_components<S: Scalar>(d: &DistanceMatrix<S>, set: &VertexSet, scale: S) -> usize {
    let pts = set.as_slice();
    let mut seen = vec![false; pts.len()];
    let mut count = 0;
    for start in 0..pts.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..pts.len() {
                if !seen[j] && d.get(pts[i], pts[j]) <= scale + S::TOLERANCE {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}
