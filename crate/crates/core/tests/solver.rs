use coarsepath::decomp::{build_path_partition, partition_from_bags, random_tree_partition, validate_decomposition};
use coarsepath::gen::{self, generate};
use coarsepath::graph::set_ball;
use coarsepath::oracle::{brute_dist_ds_witness, brute_dist_is_witness, Budget};
use coarsepath::solver::{solve_with_tables, witness_problems, RootedDecomposition};
use coarsepath::{pipeline, Graph, Mode, SolverOptions, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn budget() -> Budget {
    Budget::new(24, 50_000_000).unwrap()
}

/// An optimum found by the oracle must fit under the state caps at every node.
#[test]
fn caps_admit_oracle_optima() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..120 {
        let n = rng.gen_range(2..=18);
        let g = match trial % 3 {
            0 => gen::path(n),
            1 => gen::cycle(n.max(3)),
            _ => Graph::from_edges(n, (1..n).map(|i| (rng.gen_range(0..i), i))).unwrap(),
        };
        let rho = rng.gen_range(1..=2);
        let pd = random_tree_partition(&g, rho, 20, &mut rng).unwrap();
        let all: Vec<Vertex> = (0..g.n()).collect();
        for (mode, optimum) in [
            (Mode::Independent, brute_dist_is_witness(&g, &all, 2 * rho, budget()).unwrap()),
            (Mode::Dominating, brute_dist_ds_witness(&g, &all, rho, budget()).unwrap()),
        ] {
            let (_, tables) = solve_with_tables(&g, &pd, mode, SolverOptions::default()).unwrap();
            for bag in &pd.bags {
                let near = set_ball(&g, bag, rho);
                let inside = optimum.iter().filter(|v| near.contains(v)).count();
                assert!(
                    inside <= tables.bounds.cap,
                    "{mode:?} optimum has {inside} vertices near bag {bag:?}, cap {}",
                    tables.bounds.cap
                );
            }
        }
    }
}

#[test]
fn witnesses_reconstruct_values() {
    for spec in ["cycle 12", "grid 4 5 1", "cross 3 5", "random-cover-union 3 5 1 2"] {
        let inst = generate(spec.parse().unwrap()).unwrap();
        let mut c = inst.cover;
        c.rho = c.rho.max(1);
        let pd = build_path_partition(&inst.graph, &c).unwrap();
        assert!(validate_decomposition(&inst.graph, &pd).ok);
        for mode in [Mode::Independent, Mode::Dominating] {
            let (sol, tables) = solve_with_tables(&inst.graph, &pd, mode, SolverOptions::default()).unwrap();
            assert_eq!(sol.witness.len(), sol.value, "{spec}");
            assert!(witness_problems(&inst.graph, &sol.witness, mode, tables.bounds.rho).is_empty());
        }
    }
}

#[test]
fn rooted_subtrees_cover_everything_once() {
    let g = gen::path(9);
    let pd = partition_from_bags(&g, 1, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]).unwrap();
    let rd = RootedDecomposition::new(&pd, 0).unwrap();
    assert_eq!(rd.subtree_vertices(rd.root), (0..9).collect::<Vec<_>>());
    assert_eq!(rd.parent[rd.root], None);
    let leaf = (0..3).find(|&x| rd.children[x].is_empty()).unwrap();
    assert_eq!(rd.subtree_vertices(leaf), pd.bags[leaf]);
}

#[test]
fn pipeline_examples() {
    let inst = generate("path 9".parse().unwrap()).unwrap();
    let mut c = inst.cover.clone();
    c.rho = 1;
    let r = pipeline(&inst.graph, &c, 100_000).unwrap();
    assert_eq!((r.independent.value, r.dominating.value), (2, 2));
    assert_eq!(r.solver_rho, 2);
    assert!(r.decomposition.is_path());

    let inst = generate("cycle 12".parse().unwrap()).unwrap();
    let mut c = inst.cover.clone();
    c.rho = 1;
    let r = pipeline(&inst.graph, &c, 100_000).unwrap();
    // C12: pairwise distance above 4 allows two vertices; radius-2 balls hold five
    assert_eq!((r.independent.value, r.dominating.value), (2, 3));
}
