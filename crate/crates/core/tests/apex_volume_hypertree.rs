use kmetric_core::corpus::{
    discrete_metric, random_chain_matrix, random_cloud, random_hypertree, random_strong_metric, six_point_c4,
    subdivided_triangle,
};
use kmetric_core::simplex::{binomial, Combinations};
use kmetric_core::volume::{
    cauchy_binet_sum, gram_volume, nu_kp, projected_volume_vector, signed_volume, volume_metric,
    volume_to_coboundary,
};
use kmetric_core::{
    apex_extend, apex_extend_chain_matrix, boundary_operator, check_strong, check_weak, eval_coboundary_metric,
    hypertree_to_l1, is_hypertree, lift_operator, mbc_metric, project_operator, KMetric, Norm, PointCloud,
    SimplexKey, VerifyOptions, WeightedComplex,
};
use nalgebra::DMatrix;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn dijkstra_metric(c: &WeightedComplex) -> KMetric {
    let mut g = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<NodeIndex> = (0..c.n()).map(|_| g.add_node(())).collect();
    for (s, w) in c.facets() {
        g.add_edge(nodes[s.vertices()[0]], nodes[s.vertices()[1]], *w);
    }
    let dist: Vec<_> = nodes.iter().map(|&v| dijkstra(&g, v, None, |e| *e.weight())).collect();
    KMetric::from_fn(c.n(), 2, |s| dist[s[0]][&nodes[s[1]]]).unwrap()
}

#[test]
fn projection_commutes_with_boundary_and_lift_with_coboundary() {
    for n in 2..=6usize {
        for h in 2..=n.min(4) {
            let lhs = boundary_operator(n, h - 1).unwrap().compose(&project_operator(n, h).unwrap()).unwrap();
            let rhs = project_operator(n, h - 1).unwrap().compose(&boundary_operator(n + 1, h).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            // transposed form: δ_{h-1}[K'] L_{h-2} = L_{h-1} δ_{h-2}[K]
            let lhs = boundary_operator(n + 1, h).unwrap().transpose().compose(&lift_operator(n, h - 2).unwrap()).unwrap();
            let rhs = lift_operator(n, h - 1).unwrap().compose(&boundary_operator(n, h - 1).unwrap().transpose()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn discrete_apex_extension() {
    let d = discrete_metric(5, 3).unwrap().metric().unwrap().clone();
    let e = apex_extend(&d).unwrap().extended;
    for (s, v) in e.entries() {
        assert_eq!(v, if s[3] == 5 { 1.0 } else { 0.0 });
    }
    assert!(apex_extend(&KMetric::zeros(4, 3).unwrap()).unwrap().extended.values().iter().all(|&v| v == 0.0));
}

#[test]
fn six_point_table() {
    let inst = six_point_c4();
    let d = eval_coboundary_metric(inst.chains().unwrap(), Norm::P(1.0));
    assert_eq!(d.get(&[0, 1, 2, 3]), 0.0);
    assert_eq!(d.get(&[0, 1, 2, 5]), 1.0);
    assert_eq!(d.get(&[0, 0, 2, 5]), 0.0);
}

#[test]
fn lifted_chains_induce_the_apex_extension() {
    for seed in 0..10u64 {
        let f = random_chain_matrix(4 + (seed % 3) as usize, 2 + (seed % 2) as usize, 2, seed).unwrap();
        let g = apex_extend_chain_matrix(&f).unwrap();
        for norm in [Norm::P(1.0), Norm::P(2.0), Norm::Inf] {
            let lifted = eval_coboundary_metric(&g, norm);
            let extended = apex_extend(&eval_coboundary_metric(&f, norm)).unwrap().extended;
            for (a, b) in lifted.values().iter().zip(extended.values()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
    assert!(apex_extend_chain_matrix(&kmetric_core::ChainMatrix::zeros(4, 3, 2).unwrap())
        .unwrap()
        .data()
        .iter()
        .all(|&x| x == 0.0));
}

#[test]
fn vertex_labels_on_a_triangle_lift_by_hand() {
    // k = 2 labels f = (0, 1, 3): d = |f(y) - f(x)|, lifted onto triangles with the apex
    let f = kmetric_core::ChainMatrix::from_row_major(3, 2, 1, &[0.0, 1.0, 3.0]).unwrap();
    let d = eval_coboundary_metric(&apex_extend_chain_matrix(&f).unwrap(), Norm::P(1.0));
    // (0,1,2) (0,1,3) (0,2,3) (1,2,3)
    assert_eq!(d.values(), &[0.0, 1.0, 3.0, 2.0]);
}

#[test]
fn apex_preserves_weak_and_strong() {
    let opts = VerifyOptions::default();
    for inst in [subdivided_triangle(), discrete_metric(5, 3).unwrap(), discrete_metric(4, 2).unwrap()] {
        let e = apex_extend(inst.metric().unwrap()).unwrap().extended;
        assert!(check_weak(&e).is_weak, "{}", inst.name);
    }
    for seed in 0..4u64 {
        let d = random_strong_metric(4, 2 + (seed % 2) as usize, seed).unwrap().metric().unwrap().clone();
        let r = check_strong(&apex_extend(&d).unwrap().extended, &opts).unwrap();
        assert_eq!(r.is_strong, Some(true));
    }
    let e = apex_extend(subdivided_triangle().metric().unwrap()).unwrap().extended;
    assert_eq!(check_strong(&e, &opts).unwrap().is_strong, Some(false));
}

#[test]
fn cone_chains_reproduce_volumes() {
    for seed in 0..12u64 {
        let k = 3 + (seed % 2) as usize;
        let m = (k - 1).max(2 + (seed % 3) as usize);
        let cloud = random_cloud(5 + (seed % 2) as usize, m, seed).unwrap();
        let vol = volume_metric(&cloud, k).unwrap();
        let cone = eval_coboundary_metric(&volume_to_coboundary(&cloud, k).unwrap(), Norm::P(2.0));
        for (a, b) in vol.values().iter().zip(cone.values()) {
            assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }
}

#[test]
fn planar_cone_chain_has_one_column() {
    let cloud = random_cloud(5, 2, 3).unwrap();
    let f = volume_to_coboundary(&cloud, 3).unwrap();
    assert_eq!(f.m(), 1);
    for (s, v) in eval_coboundary_metric(&f, Norm::P(1.0)).entries() {
        let pts: Vec<&[f64]> = s.iter().map(|&i| cloud.point(i)).collect();
        assert!((v - signed_volume(&pts).unwrap().abs()).abs() < 1e-12);
    }
}

#[test]
fn cone_chains_survive_translation_onto_a_point() {
    let cloud = random_cloud(6, 3, 8).unwrap();
    let origin = cloud.point(2).to_vec();
    let moved = PointCloud::new(3, cloud.points().iter().map(|p| p.iter().zip(&origin).map(|(x, o)| x - o).collect()).collect()).unwrap();
    let a = eval_coboundary_metric(&volume_to_coboundary(&moved, 3).unwrap(), Norm::P(2.0));
    let b = volume_metric(&cloud, 3).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!(rel_close(*x, *y, 1e-9));
    }
}

#[test]
fn volume_metrics_are_strong() {
    for seed in 0..4u64 {
        let k = 3 + (seed % 2) as usize;
        let cloud = random_cloud(5, 3, seed).unwrap();
        let r = check_strong(&volume_metric(&cloud, k).unwrap(), &VerifyOptions::default()).unwrap();
        assert!(r.is_weak && r.is_strong == Some(true));
    }
}

#[test]
fn no_collinear_labels_realize_the_equilateral_table() {
    // three distinct reals with pairwise equal nonzero gaps do not exist
    let grid: Vec<f64> = (-40..=40).map(|i| f64::from(i) * 0.05).collect();
    for &a1 in &grid {
        for &a2 in &grid {
            let g = (a1 - a2).abs();
            if g == 0.0 {
                continue;
            }
            for &a3 in &grid {
                let ok = ((a1 - a3).abs() - g).abs() < 1e-12 && ((a2 - a3).abs() - g).abs() < 1e-12;
                assert!(!ok, "{a1} {a2} {a3}");
            }
        }
    }
}

#[test]
fn random_trees_match_dijkstra() {
    for seed in 0..20u64 {
        let n = 3 + (seed % 6) as usize;
        let tree = random_hypertree(n, 2, seed).unwrap();
        let oracle = dijkstra_metric(&tree);
        let mbc = mbc_metric(&tree).unwrap();
        let l1 = eval_coboundary_metric(&hypertree_to_l1(&tree).unwrap(), Norm::P(1.0));
        for ((a, b), c) in oracle.values().iter().zip(mbc.values()).zip(l1.values()) {
            assert!(rel_close(*a, *b, 1e-8) && rel_close(*a, *c, 1e-8));
        }
    }
}

#[test]
fn star_tree_l1_is_hop_distance() {
    let facets = (1..4).map(|v| (SimplexKey::new(vec![0, v], 4).unwrap(), 1.0)).collect();
    let star = WeightedComplex::new(4, 2, facets).unwrap();
    let d = eval_coboundary_metric(&hypertree_to_l1(&star).unwrap(), Norm::P(1.0));
    assert_eq!(d.values().iter().map(|v| v.round() as i64).collect::<Vec<_>>(), vec![1, 1, 1, 2, 2, 2]);
}

#[test]
fn random_two_hypertrees_round_trip() {
    for seed in 0..5u64 {
        let n = 4 + (seed % 2) as usize;
        let c = random_hypertree(n, 3, seed).unwrap();
        assert!(is_hypertree(&c).is_hypertree);
        let mbc = mbc_metric(&c).unwrap();
        let l1 = eval_coboundary_metric(&hypertree_to_l1(&c).unwrap(), Norm::P(1.0));
        for (a, b) in mbc.values().iter().zip(l1.values()) {
            assert!(rel_close(*a, *b, 1e-6));
        }
        assert_eq!(check_strong(&mbc, &VerifyOptions::default()).unwrap().is_strong, Some(true));
    }
}

#[test]
fn general_graph_metrics_match_dijkstra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let n = 6;
        let mut facets = Vec::new();
        for s in Combinations::new(n, 2) {
            if s[1] == s[0] + 1 || rng.random_bool(0.4) {
                facets.push((SimplexKey::new(s, n).unwrap(), rng.random_range(0.5..4.0)));
            }
        }
        let g = WeightedComplex::new(n, 2, facets).unwrap();
        let (a, b) = (dijkstra_metric(&g), mbc_metric(&g).unwrap());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(rel_close(*x, *y, 1e-8));
        }
    }
}

#[test]
fn adding_a_facet_never_increases_values() {
    for seed in 0..4u64 {
        let c = random_hypertree(5, 3, seed).unwrap();
        let before = mbc_metric(&c).unwrap();
        let (_, mask) = c.weights_and_mask();
        let missing = Combinations::new(5, 3).zip(mask).find(|(_, m)| !m).unwrap().0;
        let after = mbc_metric(&c.with_facet(SimplexKey::new(missing, 5).unwrap(), 0.7).unwrap()).unwrap();
        for (a, b) in after.values().iter().zip(before.values()) {
            assert!(*a <= b + 1e-9);
        }
    }
}

fn random_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..=5, 1usize..=3).prop_filter("tall", |(m, k)| k <= m).prop_flat_map(|(m, k)| {
        proptest::collection::vec(-2.0f64..2.0, m * k).prop_map(move |v| DMatrix::from_vec(m, k, v))
    })
}

fn rotation(m: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_binet(a in random_matrix()) {
        let gram = (a.transpose() * &a).determinant();
        let sum = cauchy_binet_sum(&a).unwrap();
        prop_assert!(rel_close(gram, sum, 1e-9), "{} vs {}", gram, sum);
    }

    #[test]
    fn projected_volumes_have_gram_norm(seed in 0u64..10_000, m in 2usize..=5, k in 2usize..=4) {
        prop_assume!(k - 1 <= m);
        let cloud = random_cloud(k, m, seed).unwrap();
        let pts: Vec<&[f64]> = cloud.points().iter().map(|p| p.as_slice()).collect();
        let v = projected_volume_vector(&pts).unwrap();
        prop_assert_eq!(v.len() as u64, binomial(m, k - 1));
        let g = gram_volume(&pts).unwrap();
        prop_assert!(rel_close(nu_kp(&pts, Norm::P(2.0)).unwrap(), g, 1e-9));
        prop_assert!(nu_kp(&pts, Norm::Inf).unwrap() <= nu_kp(&pts, Norm::P(1.0)).unwrap() + 1e-15);
    }

    #[test]
    fn volumes_are_rigid_and_homogeneous(seed in 0u64..10_000, c in 0.2f64..5.0) {
        let cloud = random_cloud(5, 3, seed).unwrap();
        let q = rotation(3, seed + 1);
        let shift = [0.3, -1.2, 2.0];
        let moved = PointCloud::new(3, cloud.points().iter().map(|p| {
            let r = &q * nalgebra::DVector::from_column_slice(p);
            (0..3).map(|i| r[i] + shift[i]).collect()
        }).collect()).unwrap();
        let scaled = PointCloud::new(3, cloud.points().iter().map(|p| p.iter().map(|x| c * x).collect()).collect()).unwrap();
        for k in [2usize, 3, 4] {
            let base = volume_metric(&cloud, k).unwrap();
            let rigid = volume_metric(&moved, k).unwrap();
            let big = volume_metric(&scaled, k).unwrap();
            for ((a, b), s) in base.values().iter().zip(rigid.values()).zip(big.values()) {
                prop_assert!((a - b).abs() < 1e-8);
                prop_assert!(rel_close(*s, c.powi(k as i32 - 1) * a, 1e-8));
            }
        }
    }
}
