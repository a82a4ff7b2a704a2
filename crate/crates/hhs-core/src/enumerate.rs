//! Exhaustive enumeration of small signatures up to isomorphism.
//!
//! A signature on `n` domains is a poset on `n − 1` elements with a top
//! added, an orthogonality relation on incomparable pairs and unboundedness
//! flags. Only signatures passing [`validate_signature`] are kept.

use serde::{Deserialize, Serialize};

use crate::signature::{validate_signature, DomainDecl, DomainId, HhsSignature, SignatureDoc};

/// Strict order on `m ≤ 6` elements as a bitmask: bit `i·m + j` is `i < j`.
type Order = u64;

fn bit(m: usize, i: usize, j: usize) -> Order {
    1 << (i * m + j)
}

fn permute_order(m: usize, rel: Order, perm: &[usize]) -> Order {
    let mut out = 0;
    for i in 0..m {
        for j in 0..m {
            if rel & bit(m, i, j) != 0 {
                out |= bit(m, perm[i], perm[j]);
            }
        }
    }
    out
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    heap_permute(m, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        let j = if k.is_multiple_of(2) { i } else { 0 };
        cur.swap(j, k - 1);
    }
}

/// Canonical strict orders on `m` elements, one per isomorphism class.
pub fn posets(m: usize) -> Vec<Order> {
    let perms = permutations(m);
    let mut labeled = vec![0 as Order];
    for k in 1..m {
        let mut next = Vec::new();
        for &rel in &labeled {
            for down in 0u32..(1 << k) {
                let ideal = (0..k).all(|j| {
                    down & (1 << j) == 0 || (0..k).all(|i| rel & bit(m, i, j) == 0 || down & (1 << i) != 0)
                });
                if !ideal {
                    continue;
                }
                let mut r = rel;
                for i in 0..k {
                    if down & (1 << i) != 0 {
                        r |= bit(m, i, k);
                    }
                }
                next.push(r);
            }
        }
        labeled = next;
    }
    let mut canon: Vec<Order> = labeled.iter().map(|&r| perms.iter().map(|p| permute_order(m, r, p)).min().unwrap_or(r)).collect();
    canon.sort_unstable();
    canon.dedup();
    canon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedSignature {
    pub n: usize,
    /// `(order, orthogonality, flags)` canonical code.
    pub code: (u64, u64, u32),
    pub signature: HhsSignature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub signatures: Vec<EnumeratedSignature>,
    pub cap: usize,
    pub truncated: bool,
    /// Valid signatures found per domain count before truncation.
    pub counts: Vec<(usize, usize)>,
}

fn pair_index(m: usize, i: usize, j: usize) -> usize {
    let (a, b) = (i.min(j), i.max(j));
    a * m + b
}

fn build(m: usize, rel: Order, orth: u64, flags: u32) -> HhsSignature {
    let n = m + 1;
    let domains = (0..n)
        .map(|i| DomainDecl {
            id: DomainId(i as u32),
            unbounded: flags & (1 << i) != 0,
            label: if i == 0 { "S".into() } else { format!("D{i}") },
        })
        .collect();
    let mut nest = Vec::new();
    for i in 0..m {
        nest.push((DomainId(i as u32 + 1), DomainId(0)));
        for j in 0..m {
            if rel & bit(m, i, j) != 0 {
                nest.push((DomainId(i as u32 + 1), DomainId(j as u32 + 1)));
            }
        }
    }
    let mut orth_pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if orth & (1 << pair_index(m, i, j)) != 0 {
                orth_pairs.push((DomainId(i as u32 + 1), DomainId(j as u32 + 1)));
            }
        }
    }
    let doc = SignatureDoc { domains, nest, orth: orth_pairs, maximal: DomainId(0), complexity: n as u32, action: None };
    HhsSignature::from_doc(doc).expect("enumerated document is well formed")
}

fn permute_pairs(m: usize, mask: u64, perm: &[usize]) -> u64 {
    let mut out = 0;
    for i in 0..m {
        for j in i + 1..m {
            if mask & (1 << pair_index(m, i, j)) != 0 {
                out |= 1 << pair_index(m, perm[i], perm[j]);
            }
        }
    }
    out
}

/// Flags: bit 0 is the top, bit `i + 1` is element `i`.
fn permute_flags(m: usize, flags: u32, perm: &[usize]) -> u32 {
    let mut out = flags & 1;
    for i in 0..m {
        if flags & (1 << (i + 1)) != 0 {
            out |= 1 << (perm[i] + 1);
        }
    }
    out
}

/// All valid signatures on `m + 1` domains, sorted by canonical code.
fn signatures_with(m: usize) -> Vec<EnumeratedSignature> {
    let perms = permutations(m);
    let mut out = Vec::new();
    for rel in posets(m) {
        let aut: Vec<&Vec<usize>> = perms.iter().filter(|p| permute_order(m, rel, p) == rel).collect();
        let le = |i: usize, j: usize| i == j || rel & bit(m, i, j) != 0;
        let incomparable: Vec<(usize, usize)> =
            (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).filter(|&(i, j)| !le(i, j) && !le(j, i)).collect();
        for sub in 0u64..(1 << incomparable.len()) {
            let mut orth = 0u64;
            for (k, &(i, j)) in incomparable.iter().enumerate() {
                if sub & (1 << k) != 0 {
                    orth |= 1 << pair_index(m, i, j);
                }
            }
            let is_orth = |i: usize, j: usize| i != j && orth & (1 << pair_index(m, i, j)) != 0;
            let closed = (0..m).all(|v| {
                (0..m).all(|w| v == w || !le(v, w) || (0..m).all(|u| !is_orth(w, u) || is_orth(v, u)))
            });
            if !closed {
                continue;
            }
            if aut.iter().any(|p| permute_pairs(m, orth, p) < orth) {
                continue;
            }
            let stab: Vec<&&Vec<usize>> = aut.iter().filter(|p| permute_pairs(m, orth, p) == orth).collect();
            let structural = build(m, rel, orth, 0);
            if !validate_signature(&structural).passed {
                continue;
            }
            for flags in 0u32..(1 << (m + 1)) {
                if stab.iter().any(|p| permute_flags(m, flags, p) < flags) {
                    continue;
                }
                out.push(EnumeratedSignature { n: m + 1, code: (rel, orth, flags), signature: build(m, rel, orth, flags) });
            }
        }
    }
    out.sort_by_key(|e| e.code);
    out
}

/// Signatures with `min_n..=max_n` domains ordered by size then code,
/// truncated to `cap`.
pub fn enumerate_signatures(min_n: usize, max_n: usize, cap: usize) -> Enumeration {
    let mut signatures = Vec::new();
    let mut counts = Vec::new();
    let mut truncated = false;
    for n in min_n.max(2)..=max_n.min(7) {
        if signatures.len() >= cap {
            truncated = true;
            break;
        }
        let batch = signatures_with(n - 1);
        counts.push((n, batch.len()));
        let room = cap - signatures.len();
        if batch.len() > room {
            truncated = true;
        }
        signatures.extend(batch.into_iter().take(room));
    }
    Enumeration { signatures, cap, truncated, counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unlabeled_poset_counts() {
        let counts: Vec<usize> = (1..=5).map(|m| posets(m).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 16, 63]);
    }

    #[test]
    fn enumeration_is_valid_and_ordered() {
        let e = enumerate_signatures(3, 4, 10_000);
        assert!(!e.truncated);
        assert!(e.signatures.iter().all(|s| s.signature.validate().passed));
        assert!(e.signatures.windows(2).all(|w| (w[0].n, w[0].code) < (w[1].n, w[1].code)));
    }

    #[test]
    fn cap_truncates() {
        let e = enumerate_signatures(4, 5, 50);
        assert!(e.truncated);
        assert_eq!(e.signatures.len(), 50);
    }
}
