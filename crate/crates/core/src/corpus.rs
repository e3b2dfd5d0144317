//! Named instances and seeded random families.
//!
//! Every random generator draws from a ChaCha8 stream seeded with the given
//! `u64`, so the same arguments always produce the same object.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apex::apex_extend_chain_matrix;
use crate::coboundary::ChainMatrix;
use crate::hypertree::{is_hypertree, mbc_metric, WeightedComplex};
use crate::linalg::rank;
use crate::metric::KMetric;
use crate::simplex::{binomial, simplex_count, Combinations, SimplexKey};
use crate::volume::PointCloud;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Metric(KMetric),
    Chains(ChainMatrix),
    Complex(WeightedComplex),
    Cloud(PointCloud),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Flag(bool),
    Number(f64),
    /// One value per `(k-1)`-simplex in canonical order.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusInstance {
    pub name: String,
    pub payload: Payload,
    /// A chain matrix whose coboundary metric is the payload, when known.
    pub inducing_chains: Option<ChainMatrix>,
    pub expected: BTreeMap<String, Expected>,
}

impl CorpusInstance {
    fn new(name: impl Into<String>, payload: Payload) -> Self {
        CorpusInstance { name: name.into(), payload, inducing_chains: None, expected: BTreeMap::new() }
    }

    fn expect(mut self, key: &str, value: Expected) -> Self {
        self.expected.insert(key.to_string(), value);
        self
    }

    pub fn metric(&self) -> Option<&KMetric> {
        match &self.payload {
            Payload::Metric(d) => Some(d),
            _ => None,
        }
    }

    pub fn chains(&self) -> Option<&ChainMatrix> {
        match &self.payload {
            Payload::Chains(f) => Some(f),
            _ => self.inducing_chains.as_ref(),
        }
    }
}

/// Triangles of the subdivided triangle on `x0..x5` (outer corners `x0, x1, x2`).
pub const SUBDIVISION: [[usize; 3]; 7] =
    [[0, 1, 4], [0, 3, 4], [1, 2, 5], [1, 4, 5], [0, 2, 3], [2, 3, 5], [3, 4, 5]];

/// Value 1 on the seven subdivision triangles, 10 on every other triple.
pub fn subdivided_triangle() -> CorpusInstance {
    let d = KMetric::from_fn(6, 3, |s| if SUBDIVISION.iter().any(|t| t == s) { 1.0 } else { 10.0 })
        .expect("fixed shape");
    CorpusInstance::new("subdivided_triangle", Payload::Metric(d))
        .expect("weak", Expected::Flag(true))
        .expect("strong", Expected::Flag(false))
        .expect("witness_cost", Expected::Number(7.0))
        .expect("witness_value", Expected::Number(10.0))
}

/// All distinct k-tuples at value 1. For `k = 3` it carries the all-ones
/// 1-chain that induces it under any norm.
pub fn discrete_metric(n: usize, k: usize) -> Result<CorpusInstance> {
    if k > n {
        return Err(Error::Argument(format!("arity {k} exceeds the point count {n}")));
    }
    let d = KMetric::from_fn(n, k, |_| 1.0)?;
    let mut inst = CorpusInstance::new(format!("discrete_{n}_{k}"), Payload::Metric(d))
        .expect("weak", Expected::Flag(true))
        .expect("strong", Expected::Flag(true));
    if k == 3 {
        let rows = simplex_count(n, 1)?;
        inst.inducing_chains = Some(ChainMatrix::new(n, 3, DMatrix::from_element(rows, 1, 1.0))?);
    }
    Ok(inst)
}

/// Four points with 2-dimensional edge labels; the ℓ2 coboundary metric is
/// zero on `(x0, x1, x2)` and one on the other triples.
pub fn four_point_c32() -> CorpusInstance {
    let h = 3f64.sqrt() / 2.0;
    // edges (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
    #[rustfmt::skip]
    let data = [
        0.0, 0.0,
        0.0, 0.0,
        0.0, 0.0,
        0.0, 0.0,
        1.0, 0.0,
        0.5, h,
    ];
    let f = ChainMatrix::from_row_major(4, 3, 2, &data).expect("fixed shape");
    CorpusInstance::new("four_point_c32", Payload::Chains(f))
        .expect("eval_p2", Expected::Table(vec![0.0, 1.0, 1.0, 1.0]))
}

/// Apex lift of the all-ones 1-chain on five points: one on quadruples that
/// contain the apex `x5`, zero on the rest.
pub fn six_point_c4() -> CorpusInstance {
    let ones = ChainMatrix::new(5, 3, DMatrix::from_element(10, 1, 1.0)).expect("fixed shape");
    let f = apex_extend_chain_matrix(&ones).expect("fixed shape");
    let table = Combinations::new(6, 4).map(|s| if s[3] == 5 { 1.0 } else { 0.0 }).collect();
    CorpusInstance::new("six_point_c4", Payload::Chains(f)).expect("eval_p1", Expected::Table(table))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn triangle_metric(cloud: &PointCloud, name: &str, f: impl Fn([f64; 3]) -> f64) -> Result<CorpusInstance> {
    let p = cloud.points();
    let d = KMetric::from_fn(cloud.n(), 3, |s| {
        f([distance(&p[s[0]], &p[s[1]]), distance(&p[s[0]], &p[s[2]]), distance(&p[s[1]], &p[s[2]])])
    })?;
    Ok(CorpusInstance::new(name, Payload::Metric(d)).expect("weak", Expected::Flag(true)))
}

/// Perimeter of each triangle.
pub fn perimeter_3metric(cloud: &PointCloud) -> Result<CorpusInstance> {
    triangle_metric(cloud, "perimeter_3metric", |s| s.iter().sum())
}

/// Longest side of each triangle.
pub fn maxside_3metric(cloud: &PointCloud) -> Result<CorpusInstance> {
    triangle_metric(cloud, "maxside_3metric", |s| s.iter().copied().fold(0.0, f64::max))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bounding-chain metric of the complete complex with weights in `[1, 10)`.
pub fn random_strong_metric(n: usize, k: usize, seed: u64) -> Result<CorpusInstance> {
    if n < k {
        return Err(Error::Argument(format!("need at least {k} points, got {n}")));
    }
    let mut r = rng(seed);
    let complex = WeightedComplex::complete(n, k, |_| r.random_range(1.0..10.0))?;
    let d = mbc_metric(&complex)?;
    Ok(CorpusInstance::new(format!("random_strong_{n}_{k}_{seed}"), Payload::Metric(d))
        .expect("weak", Expected::Flag(true))
        .expect("strong", Expected::Flag(true)))
}

/// A random `(k-1)`-hypertree with weights in `[0.5, 5)`.
///
/// Starts from the complete complex and deletes facets in random order
/// whenever the boundary rank survives, which keeps every cycle filled and
/// ends with an acyclic facet set.
pub fn random_hypertree(n: usize, k: usize, seed: u64) -> Result<WeightedComplex> {
    if k < 2 || n < k {
        return Err(Error::Argument(format!("need n ≥ k ≥ 2, got n = {n}, k = {k}")));
    }
    let mut r = rng(seed);
    let mut facets: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    facets.shuffle(&mut r);
    let target = binomial(n - 1, k - 1) as usize;
    let weighted = |fs: &[Vec<usize>]| -> Result<WeightedComplex> {
        WeightedComplex::new(n, k, fs.iter().map(|s| (SimplexKey::from_sorted_unchecked(s.clone()), 1.0)).collect())
    };
    let mut i = 0;
    while facets.len() > target && i < facets.len() {
        let mut trial = facets.clone();
        trial.remove(i);
        if rank(&weighted(&trial)?.boundary_matrix(), crate::hypertree::RANK_TOL) == target {
            facets = trial;
        } else {
            i += 1;
        }
    }
    let complex = WeightedComplex::new(
        n,
        k,
        facets.into_iter().map(|s| (SimplexKey::from_sorted_unchecked(s), r.random_range(0.5..5.0))).collect(),
    )?;
    debug_assert!(is_hypertree(&complex).is_hypertree);
    Ok(complex)
}

/// Entries uniform in `[-1, 1]`.
pub fn random_chain_matrix(n: usize, k: usize, m: usize, seed: u64) -> Result<ChainMatrix> {
    if k < 2 {
        return Err(Error::Argument(format!("arity must be at least 2, got {k}")));
    }
    let mut r = rng(seed);
    let rows = simplex_count(n, k - 2)?;
    let data: Vec<f64> = (0..rows * m).map(|_| r.random_range(-1.0..=1.0)).collect();
    ChainMatrix::from_row_major(n, k, m, &data)
}

/// Coordinates uniform in `[-1, 1]`.
pub fn random_cloud(n: usize, m: usize, seed: u64) -> Result<PointCloud> {
    let mut r = rng(seed);
    let points = (0..n).map(|_| (0..m).map(|_| r.random_range(-1.0..=1.0)).collect()).collect();
    PointCloud::new(m, points)
}

/// Shortest-path closure of random edge weights in `[1, 10)`.
pub fn random_triangle_metric(n: usize, seed: u64) -> Result<KMetric> {
    if n < 2 {
        return Err(Error::Argument(format!("need at least 2 points, got {n}")));
    }
    let mut r = rng(seed);
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = r.random_range(1.0..10.0);
            dist[i][j] = w;
            dist[j][i] = w;
        }
    }
    for via in 0..n {
        for i in 0..n {
            for j in 0..n {
                let alt = dist[i][via] + dist[via][j];
                if alt < dist[i][j] {
                    dist[i][j] = alt;
                }
            }
        }
    }
    KMetric::from_fn(n, 2, |s| dist[s[0]][s[1]])
}

/// Names accepted by [`named`].
pub const NAMED: [&str; 3] = ["subdivided_triangle", "four_point_c32", "six_point_c4"];

/// The parameter-free instances by name.
pub fn named(name: &str) -> Result<CorpusInstance> {
    match name {
        "subdivided_triangle" => Ok(subdivided_triangle()),
        "four_point_c32" => Ok(four_point_c32()),
        "six_point_c4" => Ok(six_point_c4()),
        other => Err(Error::Argument(format!("unknown instance {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subdivided_values() {
        let inst = subdivided_triangle();
        let d = inst.metric().unwrap();
        assert_eq!(d.get(&[0, 1, 4]), 1.0);
        assert_eq!(d.get(&[4, 1, 0]), 1.0);
        assert_eq!(d.get(&[0, 1, 2]), 10.0);
        assert_eq!(d.get(&[0, 0, 2]), 0.0);
        assert_eq!(d.values().iter().filter(|&&v| v == 1.0).count(), 7);
    }

    #[test]
    fn discrete_shapes() {
        assert!(discrete_metric(2, 3).is_err());
        assert!(discrete_metric(5, 3).unwrap().inducing_chains.is_some());
        assert!(discrete_metric(3, 2).unwrap().inducing_chains.is_none());
        assert_eq!(discrete_metric(6, 4).unwrap().metric().unwrap().values().len(), 15);
    }

    #[test]
    fn triangle_shape_metrics() {
        let h = 3f64.sqrt() / 2.0;
        let eq = PointCloud::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        let p = perimeter_3metric(&eq).unwrap();
        assert!((p.metric().unwrap().values()[0] - 3.0).abs() < 1e-12);
        let m = maxside_3metric(&eq).unwrap();
        assert!((m.metric().unwrap().values()[0] - 1.0).abs() < 1e-12);
        let line = PointCloud::new(1, vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(maxside_3metric(&line).unwrap().metric().unwrap().values(), &[3.0]);
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(random_chain_matrix(5, 3, 2, 4).unwrap(), random_chain_matrix(5, 3, 2, 4).unwrap());
        assert_ne!(random_cloud(5, 3, 1).unwrap(), random_cloud(5, 3, 2).unwrap());
        assert_eq!(random_triangle_metric(5, 9).unwrap(), random_triangle_metric(5, 9).unwrap());
    }

    #[test]
    fn random_hypertrees_are_hypertrees() {
        for seed in 0..5 {
            for (n, k) in [(6, 2), (5, 3), (4, 3)] {
                let c = random_hypertree(n, k, seed).unwrap();
                let r = is_hypertree(&c);
                assert!(r.is_hypertree, "n = {n}, k = {k}, seed = {seed}: {r:?}");
                assert_eq!(c.facets().len(), binomial(n - 1, k - 1) as usize);
            }
        }
    }

    #[test]
    fn random_strong_with_a_single_simplex() {
        let inst = random_strong_metric(3, 3, 0).unwrap();
        assert_eq!(inst.metric().unwrap().values().len(), 1);
        assert!(random_strong_metric(2, 3, 0).is_err());
    }

    #[test]
    fn named_lookup() {
        for name in NAMED {
            assert_eq!(named(name).unwrap().name, name);
        }
        assert!(named("nope").is_err());
    }
}
