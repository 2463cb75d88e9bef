//! Deduplicated pool of reasoning fragments with occurrence statistics.

mod extract;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::llm_client::{CompletionTrace, EmbeddingVector, LlmClient, ModelSpec};

pub use extract::{
    extract_fragments, extract_fragments_with, split_sentences, DEFAULT_MIN_FRAGMENT_CHARS,
};

pub const DEFAULT_MERGE_THRESHOLD: f64 = 0.85;
pub const POOL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub sample_index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reason {
    pub id: usize,
    pub canonical_text: String,
    pub variants: Vec<Variant>,
    pub embedding: EmbeddingVector,
}

/// Sparse co-occurrence counts. Zero counts are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OccurrenceCounts {
    pub max_order: usize,
    pub single: Vec<u32>,
    pub pairs: BTreeMap<(usize, usize), u32>,
    pub triples: BTreeMap<(usize, usize, usize), u32>,
}

impl OccurrenceCounts {
    pub fn pair(&self, i: usize, j: usize) -> u32 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs.get(&(a, b)).copied().unwrap_or(0)
    }

    pub fn triple(&self, i: usize, j: usize, k: usize) -> u32 {
        let mut t = [i, j, k];
        t.sort_unstable();
        self.triples.get(&(t[0], t[1], t[2])).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReasonPool {
    reasons: Vec<Reason>,
    n_samples: usize,
    /// `membership[s][r]`: reason `r` occurs in sample `s`.
    membership: Vec<Vec<bool>>,
    counts: OccurrenceCounts,
}

impl ReasonPool {
    /// Assembles a pool from reasons and a membership matrix, computing counts up to order 3.
    pub fn new(reasons: Vec<Reason>, membership: Vec<Vec<bool>>) -> Result<Self> {
        let r = reasons.len();
        if let Some((i, _)) = reasons.iter().enumerate().find(|(i, x)| x.id != *i) {
            return Err(Error::Input(format!(
                "reason ids must be dense; position {i} mismatched"
            )));
        }
        if let Some(bad) = reasons.iter().find(|x| x.canonical_text.trim().is_empty()) {
            return Err(Error::Input(format!(
                "reason {} has empty canonical text",
                bad.id
            )));
        }
        if let Some(s) = membership.iter().position(|row| row.len() != r) {
            return Err(Error::Input(format!(
                "membership row {s} has {} columns, expected {r}",
                membership[s].len()
            )));
        }
        let mut pool = Self {
            reasons,
            n_samples: membership.len(),
            membership,
            counts: OccurrenceCounts::default(),
        };
        pool.counts = occurrence_counts(&pool.membership, r, 3)?;
        Ok(pool)
    }

    pub fn reasons(&self) -> &[Reason] {
        &self.reasons
    }

    pub fn len(&self) -> usize {
        self.reasons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reasons.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn membership(&self) -> &[Vec<bool>] {
        &self.membership
    }

    pub fn counts(&self) -> &OccurrenceCounts {
        &self.counts
    }

    /// p_i: fraction of samples containing reason `i`.
    pub fn popularity(&self, i: usize) -> f64 {
        if self.n_samples == 0 {
            return 0.0;
        }
        self.counts.single[i] as f64 / self.n_samples as f64
    }

    /// Occurrence variance p_i (1 - p_i).
    pub fn risk(&self, i: usize) -> f64 {
        let p = self.popularity(i);
        p * (1.0 - p)
    }

    /// Recomputes counts from membership at the requested order.
    pub fn recount(&mut self, max_order: usize) -> Result<()> {
        self.counts = occurrence_counts(&self.membership, self.reasons.len(), max_order)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = PoolDoc {
            schema_version: POOL_SCHEMA_VERSION,
            n_samples: self.n_samples,
            reasons: self.reasons.clone(),
            membership: self
                .membership
                .iter()
                .map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PoolDoc = serde_json::from_str(text)?;
        if doc.schema_version != POOL_SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported pool schema_version {}",
                doc.schema_version
            )));
        }
        if doc.membership.len() != doc.n_samples {
            return Err(Error::Input(format!(
                "pool declares {} samples but has {} membership rows",
                doc.n_samples,
                doc.membership.len()
            )));
        }
        let membership = doc
            .membership
            .iter()
            .enumerate()
            .map(|(s, bits)| {
                bits.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::Input(format!(
                            "membership row {s} contains `{other}`"
                        ))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.reasons, membership)
    }

    /// SHA-256 of the canonical JSON export.
    pub fn content_hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_json()?.as_bytes())))
    }
}

#[derive(Serialize, Deserialize)]
struct PoolDoc {
    schema_version: u32,
    n_samples: usize,
    reasons: Vec<Reason>,
    membership: Vec<String>,
}

/// Counts samples containing each reason, pair, and (for order 3) triple.
pub fn occurrence_counts(
    membership: &[Vec<bool>],
    num_reasons: usize,
    max_order: usize,
) -> Result<OccurrenceCounts> {
    if !(2..=3).contains(&max_order) {
        return Err(Error::Input(format!(
            "max_order must be 2 or 3, got {max_order}"
        )));
    }
    let mut counts = OccurrenceCounts {
        max_order,
        single: vec![0; num_reasons],
        ..Default::default()
    };
    for row in membership {
        let present: Vec<usize> = (0..num_reasons).filter(|&r| row[r]).collect();
        for (a, &i) in present.iter().enumerate() {
            counts.single[i] += 1;
            for (b, &j) in present.iter().enumerate().skip(a + 1) {
                *counts.pairs.entry((i, j)).or_insert(0) += 1;
                if max_order == 3 {
                    for &k in &present[b + 1..] {
                        *counts.triples.entry((i, j, k)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    Ok(counts)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Merges fragments into reasons by single-linkage at `merge_threshold`.
///
/// `fragments[s]` holds the fragments of sample `s`; every distinct fragment
/// text must have an entry in `embeddings`. The canonical text of a reason is
/// the member with the highest similarity summed over all occurrences in the
/// component (ties: lexicographically smallest). Reason ids follow canonical
/// text order, so the pool does not depend on the order of samples.
pub fn dedup_merge(
    fragments: &[Vec<String>],
    embeddings: &HashMap<String, EmbeddingVector>,
    merge_threshold: f64,
) -> Result<ReasonPool> {
    if !(merge_threshold > 0.0 && merge_threshold < 1.0) {
        return Err(Error::Input(format!(
            "merge_threshold must be in (0, 1), got {merge_threshold}"
        )));
    }
    let unique: Vec<&String> = fragments
        .iter()
        .flatten()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vectors: Vec<&EmbeddingVector> = unique
        .iter()
        .map(|t| {
            embeddings
                .get(*t)
                .ok_or_else(|| Error::Input(format!("fragment `{t}` has no embedding")))
        })
        .collect::<Result<_>>()?;
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for f in fragments.iter().flatten() {
        *occurrences.entry(f.as_str()).or_insert(0) += 1;
    }

    let u = unique.len();
    let mut sim = vec![0.0; u * u];
    let mut uf = UnionFind::new(u);
    for a in 0..u {
        sim[a * u + a] = 1.0;
        for b in a + 1..u {
            let s = vectors[a].cosine(vectors[b]);
            sim[a * u + b] = s;
            sim[b * u + a] = s;
            if s >= merge_threshold {
                uf.union(a, b);
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in 0..u {
        components.entry(uf.find(a)).or_default().push(a);
    }
    let mut canon_of_component: Vec<(usize, Vec<usize>)> = components
        .into_values()
        .map(|members| {
            let score = |a: usize| -> f64 {
                members
                    .iter()
                    .map(|&b| sim[a * u + b] * occurrences[unique[b].as_str()] as f64)
                    .sum()
            };
            let canon = members
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    score(a)
                        .total_cmp(&score(b))
                        .then_with(|| unique[b].cmp(unique[a]))
                })
                .expect("components are nonempty");
            (canon, members)
        })
        .collect();
    canon_of_component.sort_by(|x, y| unique[x.0].cmp(unique[y.0]));

    let mut reason_of_unique = vec![0; u];
    for (rid, (_, members)) in canon_of_component.iter().enumerate() {
        for &m in members {
            reason_of_unique[m] = rid;
        }
    }
    let index_of: HashMap<&str, usize> = unique
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let r = canon_of_component.len();
    let mut reasons: Vec<Reason> = canon_of_component
        .iter()
        .enumerate()
        .map(|(rid, (canon, _))| Reason {
            id: rid,
            canonical_text: unique[*canon].clone(),
            variants: Vec::new(),
            embedding: vectors[*canon].clone(),
        })
        .collect();
    let mut membership = vec![vec![false; r]; fragments.len()];
    for (s, frags) in fragments.iter().enumerate() {
        for f in frags {
            let rid = reason_of_unique[index_of[f.as_str()]];
            membership[s][rid] = true;
            reasons[rid].variants.push(Variant {
                sample_index: s,
                text: f.clone(),
            });
        }
    }
    ReasonPool::new(reasons, membership)
}

/// Symmetric matrix of cosine similarities between reason embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_embeddings(vectors: &[&EmbeddingVector]) -> Result<Self> {
        let n = vectors.len();
        if let Some(d) = vectors.first().map(|v| v.dim()) {
            if let Some(bad) = vectors.iter().position(|v| v.dim() != d) {
                return Err(Error::Input(format!(
                    "embedding {bad} has a different dimension"
                )));
            }
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
            for j in i + 1..n {
                let s = vectors[i].cosine(vectors[j]);
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Mean of the three pairwise similarities.
    pub fn triple_mean(&self, i: usize, j: usize, k: usize) -> f64 {
        (self.get(i, j) + self.get(i, k) + self.get(j, k)) / 3.0
    }
}

pub fn similarity_matrix(pool: &ReasonPool) -> Result<SimilarityMatrix> {
    let vectors: Vec<&EmbeddingVector> = pool.reasons.iter().map(|r| &r.embedding).collect();
    SimilarityMatrix::from_embeddings(&vectors)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolOptions {
    pub merge_threshold: f64,
    pub min_fragment_chars: usize,
}

impl Default for PoolOptions {
    fn default() -> Self {
        Self {
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
            min_fragment_chars: DEFAULT_MIN_FRAGMENT_CHARS,
        }
    }
}

/// Extracts, embeds, and merges the fragments of a question's traces.
/// Traces are placed in membership rows by their position in `traces`.
pub fn build_pool(
    traces: &[CompletionTrace],
    client: &LlmClient,
    embed_model: &ModelSpec,
    options: &PoolOptions,
) -> Result<ReasonPool> {
    let fragments: Vec<Vec<String>> = traces
        .iter()
        .map(|t| extract_fragments_with(&t.raw_text, options.min_fragment_chars))
        .collect();
    let unique: Vec<String> = fragments
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut embeddings = HashMap::new();
    if !unique.is_empty() {
        let question_id = traces.first().map(|t| t.question_id.as_str()).unwrap_or("");
        let vectors = client.embed(question_id, &unique, embed_model)?;
        embeddings.extend(unique.into_iter().zip(vectors));
    }
    dedup_merge(&fragments, &embeddings, options.merge_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_client::StubEmbedder;
    use proptest::prelude::*;

    fn unit(values: Vec<f64>) -> EmbeddingVector {
        EmbeddingVector::new(values).unwrap()
    }

    fn stub_map(texts: &[&str]) -> HashMap<String, EmbeddingVector> {
        let e = StubEmbedder::new(0);
        texts
            .iter()
            .map(|t| (t.to_string(), unit(e.embed_one(t))))
            .collect()
    }

    fn frags(rows: &[&[&str]]) -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn exact_duplicates_merge() {
        let f = frags(&[&["same fragment text"], &["same fragment text"]]);
        let pool = dedup_merge(&f, &stub_map(&["same fragment text"]), 0.9).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.counts().single, vec![2]);
    }

    #[test]
    fn orthogonal_vectors_stay_apart() {
        let mut emb = HashMap::new();
        emb.insert("first one".to_string(), unit(vec![1.0, 0.0]));
        emb.insert("second one".to_string(), unit(vec![0.0, 1.0]));
        let f = frags(&[&["first one"], &["second one"]]);
        assert_eq!(dedup_merge(&f, &emb, 0.9).unwrap().len(), 2);
    }

    #[test]
    fn repeated_fragment_counts_once_per_sample() {
        let f = frags(&[&["fragment alpha", "fragment alpha"], &[]]);
        let pool = dedup_merge(&f, &stub_map(&["fragment alpha"]), 0.9).unwrap();
        assert_eq!(pool.counts().single, vec![1]);
        assert_eq!(pool.popularity(0), 0.5);
        assert_eq!(pool.risk(0), 0.25);
        assert_eq!(pool.reasons()[0].variants.len(), 2);
    }

    #[test]
    fn canonical_is_most_central_member() {
        // b is within threshold of both a and c; a and c are not of each other.
        let mut emb = HashMap::new();
        let ang = |deg: f64| unit(vec![deg.to_radians().cos(), deg.to_radians().sin()]);
        emb.insert("aaaa".to_string(), ang(0.0));
        emb.insert("bbbb".to_string(), ang(20.0));
        emb.insert("cccc".to_string(), ang(40.0));
        let f = frags(&[&["aaaa"], &["bbbb"], &["cccc"]]);
        let pool = dedup_merge(&f, &emb, 0.9).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.reasons()[0].canonical_text, "bbbb");
    }

    #[test]
    fn threshold_out_of_range() {
        assert!(dedup_merge(&[], &HashMap::new(), 1.0).is_err());
        assert!(dedup_merge(&[], &HashMap::new(), 0.0).is_err());
    }

    #[test]
    fn disjoint_samples_have_no_pairs() {
        let m = vec![vec![true, false], vec![false, true]];
        let c = occurrence_counts(&m, 2, 3).unwrap();
        assert!(c.pairs.is_empty());
        assert_eq!(c.pair(0, 1), 0);
    }

    #[test]
    fn hand_counted_pairs_and_triples() {
        // N = 4; reasons 0, 1, 2 together in samples 0 and 1.
        let m = vec![
            vec![true, true, true],
            vec![true, true, true],
            vec![false, false, true],
            vec![false, false, false],
        ];
        let c = occurrence_counts(&m, 3, 3).unwrap();
        assert_eq!(c.pair(0, 1), 2);
        assert_eq!(c.pair(1, 0), 2);
        assert_eq!(c.pair(1, 2), 2);
        assert_eq!(c.triple(2, 0, 1), 2);
        assert_eq!(c.single, vec![2, 2, 3]);
        assert!(occurrence_counts(&m, 3, 4).is_err());
        assert!(occurrence_counts(&m, 3, 2).unwrap().triples.is_empty());
    }

    #[test]
    fn similarity_matches_direct_computation() {
        let e = StubEmbedder::new(3);
        let vs: Vec<EmbeddingVector> = (0..12)
            .map(|i| unit(e.embed_one(&format!("sentence number {i} about things"))))
            .collect();
        let refs: Vec<&EmbeddingVector> = vs.iter().collect();
        let m = SimilarityMatrix::from_embeddings(&refs).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let a = vs[i].values();
                let b = vs[j].values();
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((m.get(i, j) - dot / (na * nb)).abs() < 1e-9);
                assert!((m.get(i, j) - m.get(j, i)).abs() < 1e-9);
            }
            assert_eq!(m.get(i, i), 1.0);
        }
    }

    #[test]
    fn json_round_trip_recomputes_counts() {
        let texts = [
            "alpha reason here",
            "beta reason there",
            "gamma reason else",
        ];
        let f = frags(&[&texts[..2], &texts[1..], &texts[..1]]);
        let pool = dedup_merge(&f, &stub_map(&texts), 0.95).unwrap();
        let back = ReasonPool::from_json(&pool.to_json().unwrap()).unwrap();
        assert_eq!(back, pool);
        assert!(ReasonPool::from_json(&pool.to_json().unwrap().replace("\"1", "\"x")).is_err());
    }

    /// Union-find over brute-force pairwise similarities, kept separate from the implementation.
    fn component_count(
        texts: &[String],
        emb: &HashMap<String, EmbeddingVector>,
        thr: f64,
    ) -> usize {
        let n = texts.len();
        let mut label: Vec<usize> = (0..n).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..n {
                for b in 0..n {
                    if emb[&texts[a]].cosine(&emb[&texts[b]]) >= thr && label[b] < label[a] {
                        label[a] = label[b];
                        changed = true;
                    }
                }
            }
        }
        label.iter().collect::<BTreeSet<_>>().len()
    }

    fn fixture_samples(seed: u64) -> Vec<Vec<String>> {
        // 20 samples over paraphrase families: case/punctuation variants merge.
        let families = [
            [
                "The storm closed the bridge.",
                "the storm closed the bridge",
                "The storm closed the bridge!",
            ],
            [
                "Traffic moved to the detour.",
                "traffic moved to the detour",
                "Traffic moved to the detour",
            ],
            [
                "Officials issued a warning.",
                "officials issued a warning",
                "Officials issued a warning!",
            ],
            [
                "Repairs take two weeks.",
                "repairs take two weeks",
                "Repairs take two weeks!",
            ],
            [
                "Local shops lost customers.",
                "local shops lost customers",
                "Local shops lost customers.",
            ],
        ];
        (0..20u64)
            .map(|s| {
                let h = s.wrapping_mul(2654435761).wrapping_add(seed);
                families
                    .iter()
                    .enumerate()
                    .filter(|(f, _)| (h >> f) & 1 == 1 || *f == 0)
                    .map(|(f, fam)| fam[((h >> (f + 8)) % 3) as usize].to_string())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn merge_matches_union_find_oracle() {
        let samples = fixture_samples(11);
        let e = StubEmbedder::new(0);
        let texts: Vec<String> = samples
            .iter()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let emb: HashMap<String, EmbeddingVector> = texts
            .iter()
            .map(|t| (t.clone(), unit(e.embed_one(t))))
            .collect();
        for thr in [0.5, 0.85, 0.95, 0.999] {
            let pool = dedup_merge(&samples, &emb, thr).unwrap();
            assert_eq!(
                pool.len(),
                component_count(&texts, &emb, thr),
                "threshold {thr}"
            );
        }
        assert_eq!(dedup_merge(&samples, &emb, 0.85).unwrap().len(), 5);
    }

    proptest! {
        #[test]
        fn count_invariants(rows in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 7), 1..20)) {
            let c = occurrence_counts(&rows, 7, 3).unwrap();
            let n = rows.len() as u32;
            for i in 0..7 {
                prop_assert!(c.single[i] <= n);
                for j in i + 1..7 {
                    let brute = rows.iter().filter(|r| r[i] && r[j]).count() as u32;
                    prop_assert_eq!(c.pair(i, j), brute);
                    prop_assert!(c.pair(i, j) <= c.single[i].min(c.single[j]));
                    for k in j + 1..7 {
                        let t = c.triple(i, j, k);
                        prop_assert_eq!(t, rows.iter().filter(|r| r[i] && r[j] && r[k]).count() as u32);
                        prop_assert!(t <= c.pair(i, j).min(c.pair(i, k)).min(c.pair(j, k)));
                    }
                }
            }
            prop_assert!(c.pairs.values().all(|&v| v > 0));
            prop_assert!(c.triples.values().all(|&v| v > 0));
        }

        #[test]
        fn threshold_monotone_and_idempotent(seed in 0u64..500, lo in 0.3f64..0.9, step in 0.0f64..0.09) {
            let samples = fixture_samples(seed);
            let e = StubEmbedder::new(seed);
            let texts: BTreeSet<String> = samples.iter().flatten().cloned().collect();
            let emb: HashMap<String, EmbeddingVector> =
                texts.iter().map(|t| (t.clone(), unit(e.embed_one(t)))).collect();
            let low = dedup_merge(&samples, &emb, lo).unwrap();
            let high = dedup_merge(&samples, &emb, lo + step).unwrap();
            prop_assert!(high.len() >= low.len());

            let canon: Vec<Vec<String>> = vec![low.reasons().iter().map(|r| r.canonical_text.clone()).collect()];
            prop_assert_eq!(dedup_merge(&canon, &emb, lo).unwrap().len(), low.len());
        }
    }
}
