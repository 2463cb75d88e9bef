//! Energy model over reasoning fragments.
//!
//! One binary variable per reason. Linear terms reward popular fragments and
//! charge for occurrence variance; pair and triple terms reward standardized
//! connected co-occurrence and penalize semantic redundancy. Each interaction
//! order is then rescaled into its own symmetric range.

pub(crate) mod model;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reason_pool::{ReasonPool, SimilarityMatrix};

pub use model::{format_f64, HuboModel, ModelMetadata, HUBO_SCHEMA_VERSION, PRUNE_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuboParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda_sim2: f64,
    pub lambda_sim3: f64,
    pub epsilon: f64,
    pub range_a: f64,
    pub range_b: f64,
    pub range_c: f64,
    /// Highest interaction order emitted: 2 or 3.
    pub k: usize,
    /// Extra non-co-occurring triples to keep, by largest standardized |correlation|.
    pub triple_sparsify_top_m: Option<usize>,
}

impl Default for HuboParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            alpha: 0.5,
            beta: 1.0,
            gamma: 0.5,
            lambda_sim2: 0.5,
            lambda_sim3: 0.5,
            epsilon: 1e-8,
            range_a: 1.0,
            range_b: 1.0,
            range_c: 1.0,
            k: 3,
            triple_sparsify_top_m: None,
        }
    }
}

impl HuboParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("lambda_sim2", self.lambda_sim2),
            ("lambda_sim3", self.lambda_sim3),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        let positive = [
            ("mu", self.mu),
            ("epsilon", self.epsilon),
            ("range_a", self.range_a),
            ("range_b", self.range_b),
            ("range_c", self.range_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(2..=3).contains(&self.k) {
            return Err(Error::Config(format!("k must be 2 or 3, got {}", self.k)));
        }
        Ok(())
    }

    /// Normalization bound for terms of the given order (orders above 3 share `range_c`).
    pub fn range_for_order(&self, order: usize) -> f64 {
        match order {
            1 => self.range_a,
            2 => self.range_b,
            _ => self.range_c,
        }
    }
}

/// w_i = -mu p_i + alpha p_i (1 - p_i)
pub fn linear_coeffs(pool: &ReasonPool, params: &HuboParams) -> Vec<f64> {
    (0..pool.len())
        .map(|i| -params.mu * pool.popularity(i) + params.alpha * pool.risk(i))
        .collect()
}

/// c_ij = n_ij / N - p_i p_j for every pair i < j, in lexicographic order.
pub fn connected_corr2(pool: &ReasonPool) -> Vec<((usize, usize), f64)> {
    let r = pool.len();
    let n = pool.n_samples().max(1) as f64;
    let mut out = Vec::with_capacity(r * r.saturating_sub(1) / 2);
    for i in 0..r {
        for j in i + 1..r {
            let joint = pool.counts().pair(i, j) as f64 / n;
            out.push(((i, j), joint - pool.popularity(i) * pool.popularity(j)));
        }
    }
    out
}

/// c_ijk = n_ijk / N - p_i p_j p_k for every triple i < j < k, in lexicographic order.
pub fn connected_corr3(pool: &ReasonPool) -> Vec<((usize, usize, usize), f64)> {
    let r = pool.len();
    let n = pool.n_samples().max(1) as f64;
    let p: Vec<f64> = (0..r).map(|i| pool.popularity(i)).collect();
    let mut out = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            for k in j + 1..r {
                let joint = pool.counts().triple(i, j, k) as f64 / n;
                out.push(((i, j, k), joint - p[i] * p[j] * p[k]));
            }
        }
    }
    out
}

/// z-scores `(v - mean) / (std + epsilon)` with the population standard deviation.
/// A population of identical values maps to all zeros.
pub fn standardize(values: &[f64], epsilon: f64) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() || lo == hi {
        return vec![0.0; values.len()];
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let denom = var.sqrt() + epsilon;
    values.iter().map(|v| (v - mean) / denom).collect()
}

fn standardize_keyed<K: Copy>(values: &[(K, f64)], epsilon: f64) -> Vec<(K, f64)> {
    let raw: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    values
        .iter()
        .zip(standardize(&raw, epsilon))
        .map(|((k, _), z)| (*k, z))
        .collect()
}

/// w_ij = -beta (c~_ij - lambda2 sim(i, j))
pub fn pair_coeffs(
    standardized: &[((usize, usize), f64)],
    sim: &SimilarityMatrix,
    params: &HuboParams,
) -> Vec<((usize, usize), f64)> {
    standardized
        .iter()
        .map(|&((i, j), c)| {
            (
                (i, j),
                -params.beta * (c - params.lambda_sim2 * sim.get(i, j)),
            )
        })
        .collect()
}

/// w_ijk = -gamma (c~_ijk - lambda3 mean_sim(i, j, k))
pub fn triple_coeffs(
    standardized: &[((usize, usize, usize), f64)],
    sim: &SimilarityMatrix,
    params: &HuboParams,
) -> Vec<((usize, usize, usize), f64)> {
    standardized
        .iter()
        .map(|&((i, j, k), c)| {
            (
                (i, j, k),
                -params.gamma * (c - params.lambda_sim3 * sim.triple_mean(i, j, k)),
            )
        })
        .collect()
}

/// Rescales each order so its largest |coefficient| equals that order's range.
/// Orders whose coefficients are all zero are left unchanged.
pub fn normalize_typewise(model: &HuboModel, params: &HuboParams) -> HuboModel {
    let mut out = model.clone();
    let orders: Vec<usize> = {
        let mut o: Vec<usize> = model.terms().keys().map(Vec::len).collect();
        o.sort_unstable();
        o.dedup();
        o
    };
    for order in orders {
        let max_abs = model.max_abs_of_order(order);
        if max_abs > 0.0 {
            let scale = params.range_for_order(order) / max_abs;
            for (vars, w) in model.terms_of_order(order) {
                out.set_term(vars, w * scale)
                    .expect("keys already canonical");
            }
        }
    }
    out
}

/// Triples that materialize as terms: every co-occurring triple, plus the `m`
/// largest-|c~| others when sparsification is configured.
fn select_triples(
    pool: &ReasonPool,
    standardized: Vec<((usize, usize, usize), f64)>,
    top_m: Option<usize>,
) -> Vec<((usize, usize, usize), f64)> {
    let (mut keep, mut rest): (Vec<_>, Vec<_>) = standardized
        .into_iter()
        .partition(|&((i, j, k), _)| pool.counts().triple(i, j, k) > 0);
    if let Some(m) = top_m {
        rest.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
        rest.truncate(m);
        keep.extend(rest);
        keep.sort_by_key(|(key, _)| *key);
    }
    keep
}

/// Assembles, normalizes, and prunes the full energy model for a pool.
pub fn build_hubo(
    pool: &ReasonPool,
    sim: &SimilarityMatrix,
    params: &HuboParams,
) -> Result<HuboModel> {
    params.validate()?;
    let r = pool.len();
    if r == 0 {
        return Err(Error::EmptyModel);
    }
    if sim.len() != r {
        return Err(Error::Input(format!(
            "similarity matrix is {0}x{0} but the pool has {r} reasons",
            sim.len()
        )));
    }
    let mut model = HuboModel::new(r);
    for (i, w) in linear_coeffs(pool, params).into_iter().enumerate() {
        model.set_term(&[i], w)?;
    }
    let pairs = standardize_keyed(&connected_corr2(pool), params.epsilon);
    for ((i, j), w) in pair_coeffs(&pairs, sim, params) {
        model.set_term(&[i, j], w)?;
    }
    if params.k == 3 {
        let triples = standardize_keyed(&connected_corr3(pool), params.epsilon);
        let triples = select_triples(pool, triples, params.triple_sparsify_top_m);
        for ((i, j, k), w) in triple_coeffs(&triples, sim, params) {
            model.set_term(&[i, j, k], w)?;
        }
    }
    // Sub-tolerance residue would otherwise be blown up to full range.
    model.prune(PRUNE_TOLERANCE);
    let mut model = normalize_typewise(&model, params);
    model.prune(PRUNE_TOLERANCE);
    model.metadata = ModelMetadata {
        params: Some(*params),
        pool_hash: Some(pool.content_hash()?),
    };
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_client::EmbeddingVector;
    use crate::reason_pool::{Reason, ReasonPool};

    fn pool_from(membership: Vec<Vec<bool>>, dirs: &[Vec<f64>]) -> ReasonPool {
        let reasons = dirs
            .iter()
            .enumerate()
            .map(|(id, d)| Reason {
                id,
                canonical_text: format!("reason {id}"),
                variants: vec![],
                embedding: EmbeddingVector::new(d.clone()).unwrap(),
            })
            .collect();
        ReasonPool::new(reasons, membership).unwrap()
    }

    fn axes(r: usize) -> Vec<Vec<f64>> {
        (0..r)
            .map(|i| (0..r).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn linear_examples() {
        // p = 0, 1, 0.5 across four samples.
        let m = vec![
            vec![false, true, true],
            vec![false, true, true],
            vec![false, true, false],
            vec![false, true, false],
        ];
        let pool = pool_from(m, &axes(3));
        let params = HuboParams {
            mu: 1.0,
            alpha: 2.0,
            ..Default::default()
        };
        let w = linear_coeffs(&pool, &params);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], -1.0);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn pair_correlation_examples() {
        // N = 4, p_0 = p_1 = 0.5 co-occurring twice; p_2 = 0.5 disjoint from 0.
        let m = vec![
            vec![true, true, false],
            vec![true, true, false],
            vec![false, false, true],
            vec![false, false, true],
        ];
        let pool = pool_from(m, &axes(3));
        let c = connected_corr2(&pool);
        assert_eq!(c[0], ((0, 1), 0.25));
        assert_eq!(c[1], ((0, 2), -0.25));
    }

    #[test]
    fn independent_pair_has_zero_correlation() {
        let m = vec![
            vec![true, true],
            vec![true, false],
            vec![false, true],
            vec![false, false],
        ];
        let pool = pool_from(m, &axes(2));
        assert_eq!(connected_corr2(&pool)[0].1, 0.0);
    }

    #[test]
    fn triple_correlation_examples() {
        let m = vec![
            vec![true, true, true, false],
            vec![true, true, true, false],
            vec![false, false, false, true],
            vec![false, false, false, true],
        ];
        let pool = pool_from(m, &axes(4));
        let c = connected_corr3(&pool);
        assert_eq!(c[0], ((0, 1, 2), 0.375));

        let saturated = pool_from(vec![vec![true; 3], vec![true; 3]], &axes(3));
        assert_eq!(connected_corr3(&saturated)[0].1, 0.0);

        let absent = pool_from(
            vec![vec![true, true, false], vec![true, false, false]],
            &axes(3),
        );
        assert_eq!(connected_corr3(&absent)[0].1, 0.0);
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize(&[3.0, 3.0, 3.0], 1e-8), vec![0.0; 3]);
        let z = standardize(&[-1.0, 1.0], 0.0);
        assert_eq!(z, vec![-1.0, 1.0]);
        assert_eq!(standardize(&[5.0], 1e-8), vec![0.0]);
    }

    #[test]
    fn pair_and_triple_coefficient_examples() {
        let orth = SimilarityMatrix::from_embeddings(
            &axes(3)
                .into_iter()
                .map(|v| EmbeddingVector::new(v).unwrap())
                .collect::<Vec<_>>()
                .iter()
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let same_vecs: Vec<EmbeddingVector> = (0..3)
            .map(|_| EmbeddingVector::new(vec![1.0, 0.0]).unwrap())
            .collect();
        let same =
            SimilarityMatrix::from_embeddings(&same_vecs.iter().collect::<Vec<_>>()).unwrap();
        let unit = HuboParams {
            beta: 1.0,
            gamma: 1.0,
            lambda_sim2: 1.0,
            lambda_sim3: 1.0,
            ..Default::default()
        };
        assert_eq!(pair_coeffs(&[((0, 1), 1.0)], &orth, &unit)[0].1, -1.0);
        assert_eq!(pair_coeffs(&[((0, 1), 0.0)], &same, &unit)[0].1, 1.0);
        assert_eq!(triple_coeffs(&[((0, 1, 2), 1.0)], &orth, &unit)[0].1, -1.0);
        assert_eq!(triple_coeffs(&[((0, 1, 2), 0.0)], &same, &unit)[0].1, 1.0);

        let off = HuboParams {
            beta: 0.0,
            gamma: 0.0,
            ..unit
        };
        assert!(pair_coeffs(&[((0, 1), 0.7)], &same, &off)
            .iter()
            .all(|(_, w)| *w == 0.0));
        assert!(triple_coeffs(&[((0, 1, 2), 0.7)], &same, &off)
            .iter()
            .all(|(_, w)| *w == 0.0));
    }

    #[test]
    fn normalize_examples() {
        let p = HuboParams::default();
        let mut m = HuboModel::new(2);
        m.add_term(&[0], -2.0).unwrap();
        m.add_term(&[1], 4.0).unwrap();
        let n = normalize_typewise(&m, &p);
        assert_eq!(n.coeff(&[0]), -0.5);
        assert_eq!(n.coeff(&[1]), 1.0);
        assert_eq!(normalize_typewise(&n, &p), n);
        let empty = HuboModel::new(3);
        assert_eq!(normalize_typewise(&empty, &p), empty);
    }

    #[test]
    fn single_reason_model() {
        let pool = pool_from(vec![vec![true], vec![true]], &axes(1));
        let m = build_hubo(
            &pool,
            &crate::reason_pool::similarity_matrix(&pool).unwrap(),
            &HuboParams::default(),
        )
        .unwrap();
        assert_eq!(m.len(), 1);
        // w_1 = -mu (p = 1, risk 0), scaled to -a.
        assert_eq!(m.coeff(&[0]), -1.0);
    }

    #[test]
    fn three_reason_term_bound() {
        let m = vec![
            vec![true, true, true],
            vec![true, false, true],
            vec![false, true, false],
        ];
        let pool = pool_from(m, &axes(3));
        let sim = crate::reason_pool::similarity_matrix(&pool).unwrap();
        let model = build_hubo(
            &pool,
            &sim,
            &HuboParams {
                triple_sparsify_top_m: Some(usize::MAX),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(model.len() <= 7);
        for order in 1..=3 {
            let max = model.max_abs_of_order(order);
            assert!(max == 0.0 || (max - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_pool_is_rejected() {
        let pool = ReasonPool::new(vec![], vec![vec![]; 3]).unwrap();
        let sim = crate::reason_pool::similarity_matrix(&pool).unwrap();
        assert!(matches!(
            build_hubo(&pool, &sim, &HuboParams::default()),
            Err(Error::EmptyModel)
        ));
    }

    #[test]
    fn sparsification_adds_top_m() {
        // Five reasons, disjoint singletons: no co-occurring triples.
        let m: Vec<Vec<bool>> = (0..5).map(|s| (0..5).map(|r| r == s).collect()).collect();
        let pool = pool_from(m, &axes(5));
        let sim = crate::reason_pool::similarity_matrix(&pool).unwrap();
        let count3 = |top| {
            let p = HuboParams {
                triple_sparsify_top_m: top,
                ..Default::default()
            };
            build_hubo(&pool, &sim, &p)
                .unwrap()
                .terms_of_order(3)
                .count()
        };
        assert_eq!(count3(None), 0);
        // All standardized triple correlations are equal (zero), so they prune away.
        assert_eq!(count3(Some(4)), 0);
        assert!(HuboParams {
            k: 4,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
