use ec3r::engine::{ExactMethod, TrotterOrder};
use ec3r::model::{
    brute_force_solutions, example_instance, p_lower_bound, p_sequence, parse_instance, random_instance,
    serialize_instance, shared_bits, Ec3Instance,
};
use ec3r::protocol::{run_full, satisfies_all, Evolution, ProtocolParams, RunStatus, Verdict};
use ec3r::validation::cross_validate;
use proptest::prelude::*;

fn fast(seed: u64) -> ProtocolParams {
    ProtocolParams { seed, purify_successes: Some(2), scan_points: 256, ..ProtocolParams::default() }
}

#[test]
fn krylov_and_eigen_paths_give_the_same_run() {
    let inst = example_instance();
    let eigen = run_full(&inst, &ProtocolParams { evolution: Evolution::Exact { method: ExactMethod::Eigen }, ..fast(3) }).unwrap();
    let krylov = run_full(&inst, &ProtocolParams { evolution: Evolution::Exact { method: ExactMethod::Krylov }, ..fast(3) }).unwrap();
    assert_eq!(eigen.status, RunStatus::Sat);
    assert_eq!(eigen.solutions.len(), krylov.solutions.len());
    assert_eq!(eigen.solutions[0].assignment, krylov.solutions[0].assignment);
    for (a, b) in eigen.records.iter().zip(&krylov.records) {
        assert_eq!(a.trials_to_first_decay, b.trials_to_first_decay);
        assert!((a.decay_probability - b.decay_probability).abs() < 1e-8);
    }
}

#[test]
fn split_operator_run_solves_example_instance_run() {
    let params = ProtocolParams {
        evolution: Evolution::Trotter { steps: 200, order: TrotterOrder::Second },
        scan_points: 128,
        ..fast(0)
    };
    let res = run_full(&example_instance(), &params).unwrap();
    assert_eq!(res.status, RunStatus::Sat);
    assert_eq!(res.solutions[0].assignment.to_string(), "00010111");
}

#[test]
fn extreme_weights_reduce_exactly() {
    // a duplicated clause has p = 1 in round 2: the three-level picture is exact
    let inst = Ec3Instance::from_triples(6, &[[1, 2, 3], [1, 2, 3], [4, 5, 6]]).unwrap();
    let grid: Vec<f64> = (0..50).map(|i| i as f64 * 20.0).collect();
    let cv = cross_validate(&inst, 2, 0.02, &grid).unwrap();
    assert_eq!(cv.p_k, 1.0);
    assert!(cv.max_deviation() < 1e-10 && cv.max_leakage() < 1e-12);
}

#[test]
fn planted_instances_are_solved_and_checked() {
    for seed in 0..4 {
        let inst = random_instance(7, 4, 50 + seed, true).unwrap();
        let res = run_full(&inst, &fast(seed)).unwrap();
        let truth = brute_force_solutions(&inst).unwrap();
        assert_eq!(res.status, RunStatus::Sat, "seed {seed}");
        for w in &res.solutions {
            assert!(satisfies_all(&inst, &w.assignment).unwrap());
            assert!(truth.contains(&w.assignment));
        }
        assert!(res.records.iter().all(|r| r.verdict == Verdict::Projected && r.oracle_consistent == Some(true)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn serialize_then_parse_is_identity(n in 3usize..14, m in 1usize..8, seed in 0u64..10_000) {
        prop_assume!(m <= n * (n - 1) * (n - 2) / 6);
        let inst = random_instance(n, m, seed, false).unwrap();
        let text = serialize_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst.clone());
        prop_assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
    }

    #[test]
    fn transition_weights_respect_overlap_bounds(n in 4usize..11, m in 2usize..7, seed in 0u64..10_000) {
        prop_assume!(m <= n * (n - 1) * (n - 2) / 6);
        let inst = random_instance(n, m, seed, false).unwrap();
        let seq = p_sequence(&inst).unwrap();
        let cl = inst.clauses();
        for k in 1..cl.len() {
            if let Some(p) = seq.values[k] {
                let bound = p_lower_bound(shared_bits(&cl[k], &cl[..k])).unwrap();
                prop_assert!(bound.admits(p), "k={} p={} bound={:?}", k + 1, p, bound);
            }
        }
    }

    #[test]
    fn relabeling_preserves_counts(seed in 0u64..10_000, rot in 0usize..8) {
        let inst = random_instance(8, 5, seed, false).unwrap();
        let perm: Vec<usize> = (0..8).map(|i| (i + rot) % 8 + 1).collect();
        let moved = inst.relabel(&perm).unwrap();
        prop_assert_eq!(p_sequence(&inst).unwrap().counts, p_sequence(&moved).unwrap().counts);
    }
}
