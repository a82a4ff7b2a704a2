//! Built-in example models and graphs.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::VertexSet;
use crate::model::RealizedModel;
use crate::signature::{HhsSignature, SignatureBuilder};
use crate::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("invalid fixture parameter: {0}")]
    Parameter(String),
}

/// Rooted tree with BFS numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub graph: Graph,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    pub leaves: Vec<usize>,
}

impl Tree {
    pub fn regular(depth: usize, valence: usize) -> Self {
        let mut parent = vec![None];
        let mut dep = vec![0];
        let mut edges = Vec::new();
        let mut frontier = vec![0];
        for d in 1..=depth {
            let mut next = Vec::new();
            for &p in &frontier {
                for _ in 0..valence {
                    let v = parent.len();
                    parent.push(Some(p));
                    dep.push(d);
                    edges.push((p, v, 1.0));
                    next.push(v);
                }
            }
            frontier = next;
        }
        let leaves = if depth == 0 { vec![0] } else { frontier };
        Tree { graph: Graph { n: parent.len(), edges }, parent, depth: dep, leaves }
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    /// Ancestor of `v` at depth 1.
    pub fn branch(&self, mut v: usize) -> Option<usize> {
        while self.depth[v] > 1 {
            v = self.parent[v]?;
        }
        (self.depth[v] == 1).then_some(v)
    }

    fn first_leaf_in_branch(&self, k: usize) -> usize {
        let branch = 1 + k;
        *self.leaves.iter().find(|&&l| self.branch(l) == Some(branch)).expect("branch has leaves")
    }
}

/// Appends a path of `len` new vertices at `at`; returns the far end.
fn attach_tail(g: &mut Graph, at: usize, len: usize) -> usize {
    let mut prev = at;
    for _ in 0..len {
        let v = g.n;
        g.n += 1;
        g.edges.push((prev, v, 1.0));
        prev = v;
    }
    prev
}

/// Product of two regular trees with domains `S ⊋ A ⊥ B ⊊ S`.
///
/// `𝒞A` and `𝒞B` are the factor trees with coordinate projections, `𝒞S` is
/// the ambient electrified along `P_A = P_B = X` (a complete graph), and
/// every relative projection into `S` is the base point `(root, root)`.
/// The constant is `E = depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductOfTrees {
    pub model: RealizedModel,
    pub tree: Tree,
}

impl ProductOfTrees {
    pub fn new(depth: usize, valence: usize) -> Result<Self, FixtureError> {
        if depth < 2 || valence < 3 {
            return Err(FixtureError::Parameter("product of trees needs depth ≥ 2 and valence ≥ 3".into()));
        }
        let tree = Tree::regular(depth, valence);
        let t = tree.n();
        let ambient = tree.graph.cartesian_product(&tree.graph);
        let nx = ambient.n;
        let sig = SignatureBuilder::new(2)
            .domain("S", true)
            .domain("A", true)
            .domain("B", true)
            .nest("A", "S")
            .nest("B", "S")
            .orth("A", "B")
            .build()
            .expect("product signature");
        let proj = vec![
            (0..nx).map(VertexSet::singleton).collect(),
            (0..nx).map(|x| VertexSet::singleton(x / t)).collect(),
            (0..nx).map(|x| VertexSet::singleton(x % t)).collect(),
        ];
        let mut rel_proj = BTreeMap::new();
        rel_proj.insert((1, 0), VertexSet::singleton(0));
        rel_proj.insert((2, 0), VertexSet::singleton(0));
        let model = RealizedModel {
            sig,
            spaces: vec![Graph::complete(nx), tree.graph.clone(), tree.graph.clone()],
            ambient,
            proj,
            rel_proj,
            constant: depth as f64,
        };
        Ok(ProductOfTrees { model, tree })
    }

    pub fn vertex(&self, a: usize, b: usize) -> usize {
        a * self.tree.n() + b
    }

    /// Applies a defect designed to break exactly one axiom check.
    pub fn mutated(&self, mutation: ProductMutation) -> RealizedModel {
        let tree = &self.tree;
        let e = self.model.constant as usize;
        let first = tree.leaves[0];
        let last = *tree.leaves.last().expect("leaves");
        let mid = tree.first_leaf_in_branch(1);
        let mut m = self.model.clone();
        match mutation {
            ProductMutation::Lipschitz => {
                let end = attach_tail(&mut m.spaces[1], last, 2 * e + 1);
                m.proj[1][self.vertex(first, 0)] = VertexSet::singleton(end);
            }
            ProductMutation::Onto => {
                attach_tail(&mut m.spaces[1], last, e + 1);
            }
            ProductMutation::Bgi => {
                m.spaces[0] = m.ambient.clone();
            }
            ProductMutation::LargeLinks => {
                let copies = 2 * e + 1;
                let mut doc = m.sig.to_doc();
                let base = doc.domains.len() as u32;
                for k in 0..copies {
                    let id = crate::signature::DomainId(base + k as u32);
                    doc.domains.push(crate::signature::DomainDecl { id, unbounded: true, label: format!("C{}", k + 1) });
                    doc.nest.push((id, doc.maximal));
                }
                m.sig = HhsSignature::from_doc(doc).expect("copies extend the signature");
                for k in 0..copies {
                    self.add_copy(&mut m, 3 + k, VertexSet::singleton(0), VertexSet::singleton(0));
                }
                for i in 3..3 + copies {
                    for j in 3..3 + copies {
                        if i != j {
                            m.rel_proj.insert((i, j), VertexSet::singleton(0));
                        }
                    }
                }
            }
            ProductMutation::Consistency => {
                let mut doc = m.sig.to_doc();
                let id = crate::signature::DomainId(doc.domains.len() as u32);
                doc.domains.push(crate::signature::DomainDecl { id, unbounded: true, label: "C".into() });
                doc.nest.push((id, doc.maximal));
                m.sig = HhsSignature::from_doc(doc).expect("copy extends the signature");
                self.add_copy(&mut m, 3, VertexSet::singleton(first), VertexSet::singleton(mid));
            }
            ProductMutation::PartialRealization => {
                let t = tree.n();
                let d = crate::metrics::all_pairs_distances(&tree.graph).expect("tree is connected");
                for a in 0..t {
                    if d.get(a, first) <= e as f64 {
                        for b in 0..t {
                            m.proj[2][self.vertex(a, b)] = VertexSet::singleton(first);
                        }
                    }
                }
            }
        }
        m
    }

    /// Installs domain `c` as a copy of `A`, transverse to `A` and `B`.
    fn add_copy(&self, m: &mut RealizedModel, c: usize, rho_c_in_a: VertexSet, rho_a_in_c: VertexSet) {
        m.spaces.push(self.tree.graph.clone());
        m.proj.push(m.proj[1].clone());
        m.rel_proj.insert((c, 0), VertexSet::singleton(0));
        m.rel_proj.insert((c, 1), rho_c_in_a);
        m.rel_proj.insert((1, c), rho_a_in_c);
        m.rel_proj.insert((c, 2), VertexSet::singleton(0));
        m.rel_proj.insert((2, c), VertexSet::singleton(0));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum ProductMutation {
    Lipschitz,
    Onto,
    Bgi,
    LargeLinks,
    Consistency,
    PartialRealization,
}

impl ProductMutation {
    pub const ALL: [ProductMutation; 6] = [
        ProductMutation::Lipschitz,
        ProductMutation::Onto,
        ProductMutation::Bgi,
        ProductMutation::LargeLinks,
        ProductMutation::Consistency,
        ProductMutation::PartialRealization,
    ];

    /// Name of the model check this mutation is designed to break.
    pub fn target_check(self) -> &'static str {
        match self {
            ProductMutation::Lipschitz => "lipschitz",
            ProductMutation::Onto => "onto",
            ProductMutation::Bgi => "bgi",
            ProductMutation::LargeLinks => "large-links",
            ProductMutation::Consistency => "consistency",
            ProductMutation::PartialRealization => "partial-realization",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.target_check() == s)
    }
}

/// Two `n × n` grids joined corner to corner by a path of `path_len` edges.
///
/// Domains are `S` and the coordinate directions `X1, Y1, X2, Y2`, with
/// `X_i ⊥ Y_i` and cross-flat pairs transverse. `𝒞S` cones off each flat.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedFlats {
    pub model: RealizedModel,
    pub side: usize,
    pub path_len: usize,
    pub flats: [VertexSet; 2],
    /// Interior vertices of the gluing path.
    pub path: VertexSet,
    /// `c1` (far corner of the first flat) and `c2` (origin of the second).
    pub corners: [usize; 2],
}

impl GluedFlats {
    pub fn new(side: usize, path_len: usize) -> Result<Self, FixtureError> {
        if side < 2 || path_len < 1 {
            return Err(FixtureError::Parameter("glued flats need side ≥ 2 and path length ≥ 1".into()));
        }
        let n = side;
        let sq = n * n;
        let nx = 2 * sq + path_len - 1;
        let mut ambient = Graph::empty(nx);
        for off in [0, sq] {
            for (u, v, w) in Graph::grid(n, n).edges {
                ambient.add_edge(u + off, v + off, w);
            }
        }
        let c1 = sq - 1;
        let c2 = sq;
        let mut prev = c1;
        for k in 0..path_len - 1 {
            ambient.add_edge(prev, 2 * sq + k, 1.0);
            prev = 2 * sq + k;
        }
        ambient.add_edge(prev, c2, 1.0);

        let mut cone = ambient.clone();
        for off in [0, sq] {
            for u in 0..sq {
                for v in u + 1..sq {
                    cone.add_edge(u + off, v + off, 1.0);
                }
            }
        }
        let cone = cone.canonical();

        let sig = SignatureBuilder::new(2)
            .domain("S", true)
            .domain("X1", true)
            .domain("Y1", true)
            .domain("X2", true)
            .domain("Y2", true)
            .nest("X1", "S")
            .nest("Y1", "S")
            .nest("X2", "S")
            .nest("Y2", "S")
            .orth("X1", "Y1")
            .orth("X2", "Y2")
            .build()
            .expect("glued flats signature");

        // Coordinate projection of flat `f`, direction column (0) or row (1).
        let coord = |f: usize, dir: usize, x: usize| -> usize {
            let off = f * sq;
            let local = if (off..off + sq).contains(&x) { x - off } else if f == 0 { c1 } else { 0 };
            if dir == 0 {
                local % n
            } else {
                local / n
            }
        };
        let mut proj = vec![(0..nx).map(VertexSet::singleton).collect::<Vec<_>>()];
        for (f, dir) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            proj.push((0..nx).map(|x| VertexSet::singleton(coord(f, dir, x))).collect());
        }
        let mut rel_proj = BTreeMap::new();
        let flat_of = |d: usize| (d - 1) / 2;
        for v in 1..5 {
            rel_proj.insert((v, 0), VertexSet::singleton([c1, c2][flat_of(v)]));
            for w in 1..5 {
                if flat_of(v) != flat_of(w) {
                    let corner = [c1, c2][flat_of(v)];
                    rel_proj.insert((v, w), proj[w][corner].clone());
                }
            }
        }
        let model = RealizedModel {
            sig,
            spaces: vec![cone, Graph::path(n), Graph::path(n), Graph::path(n), Graph::path(n)],
            ambient,
            proj,
            rel_proj,
            constant: 2.0,
        };
        Ok(GluedFlats {
            model,
            side,
            path_len,
            flats: [VertexSet::new((0..sq).collect()), VertexSet::new((sq..2 * sq).collect())],
            path: VertexSet::new((2 * sq..nx).collect()),
            corners: [c1, c2],
        })
    }

    /// Vertex at `(row, col)` of flat `f`.
    pub fn vertex(&self, f: usize, row: usize, col: usize) -> usize {
        f * self.side * self.side + row * self.side + col
    }
}

/// Connected random graph: a random recursive tree plus independent extra
/// edges with probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::empty(n);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v, 1.0);
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p.clamp(0.0, 1.0)) {
                g.add_edge(u, v, 1.0);
            }
        }
    }
    g.canonical()
}

/// `S ⊋ I_k ⊋ {A_k ⊥ B_k}` for `k = 1..=copies`, with each `I_k` bounded.
pub fn rel_hyp_signature(copies: usize) -> HhsSignature {
    let mut b = SignatureBuilder::new(3).domain("S", true);
    for k in 1..=copies {
        let (i, a, c) = (format!("I{k}"), format!("A{k}"), format!("B{k}"));
        b = b.domain(&i, false).domain(&a, true).domain(&c, true).nest(&i, "S").nest(&a, &i).nest(&c, &i).orth(&a, &c);
    }
    b.build().expect("relatively hyperbolic signature")
}

/// Product signature `S ⊋ {A ⊥ B}`.
pub fn product_signature() -> HhsSignature {
    SignatureBuilder::new(2)
        .domain("S", true)
        .domain("A", true)
        .domain("B", true)
        .nest("A", "S")
        .nest("B", "S")
        .orth("A", "B")
        .build()
        .expect("product signature")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_axioms;

    #[test]
    fn trinary_tree_shape() {
        let t = Tree::regular(2, 3);
        assert_eq!(t.n(), 13);
        assert_eq!(t.leaves, (4..13).collect::<Vec<_>>());
        assert_eq!(t.branch(12), Some(3));
    }

    #[test]
    fn product_of_trees_passes() {
        let p = ProductOfTrees::new(2, 3).unwrap();
        let r = verify_axioms(&p.model).unwrap();
        assert!(r.passed, "{:?}", r.failed());
    }

    #[test]
    fn each_mutation_breaks_only_its_check() {
        let p = ProductOfTrees::new(2, 3).unwrap();
        for mutation in ProductMutation::ALL {
            let r = verify_axioms(&p.mutated(mutation)).unwrap();
            assert_eq!(r.failed(), vec![mutation.target_check()], "{mutation:?}");
        }
    }

    #[test]
    fn glued_flats_pass() {
        let g = GluedFlats::new(4, 3).unwrap();
        let r = verify_axioms(&g.model).unwrap();
        assert!(r.passed, "{:?}", r.failed());
    }

    #[test]
    fn random_graph_is_connected_and_seeded() {
        let g = random_graph(30, 0.05, 7);
        assert!(crate::metrics::all_pairs_distances(&g).is_ok());
        assert_eq!(g, random_graph(30, 0.05, 7));
    }

    #[test]
    fn rel_hyp_signature_is_valid() {
        let s = rel_hyp_signature(2);
        assert!(s.validate().passed);
        assert_eq!(s.n(), 7);
    }
}
