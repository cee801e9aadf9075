use proptest::prelude::*;

use ppr_core::oracle::{dense_solve_enumerate, random_m_matrix};
use ppr_core::record::{read_csv, BenchRow, InstanceSource, RunRecord, SolveOutput};
use ppr_core::verify::TestInstance;
use ppr_core::{
    solve, AsprVariant, Counters, GapBound, MQuadratic, OptimalityReport, SolverConfig, SolverKind, SparseVector,
};

fn instance(seed: u64, max_n: usize) -> MQuadratic {
    TestInstance::sample(seed, (seed % 2) as usize, max_n).unwrap().q
}

fn point(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed | 1;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            if s.is_multiple_of(3) {
                0.0
            } else {
                (s % 10_000) as f64 / 2500.0
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn restricted_gradient_matches_full_bitwise(seed in any::<u64>(), xseed in any::<u64>(), mask in any::<u32>()) {
        let q = instance(seed, 24);
        let x = point(q.dim(), xseed);
        let coords: Vec<usize> = (0..q.dim()).filter(|i| (mask >> (i % 32)) & 1 == 1).collect();
        let full = q.gradient(&x, None, &mut Counters::default());
        let part = q.gradient(&x, Some(&coords), &mut Counters::default());
        for (k, &i) in coords.iter().enumerate() {
            prop_assert_eq!(part[k].to_bits(), full[i].to_bits());
        }
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), xseed in any::<u64>()) {
        let q = instance(seed, 16);
        let x = point(q.dim(), xseed);
        let g = q.gradient(&x, None, &mut Counters::default());
        let h = 1e-5;
        for i in 0..q.dim() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (q.objective(&up) - q.objective(&down)) / (2.0 * h);
            let scale = 1.0 + g[i].abs() + q.objective(&x).abs();
            prop_assert!((fd - g[i]).abs() <= 1e-6 * scale, "i={} fd={} g={}", i, fd, g[i]);
        }
    }

    #[test]
    fn lowering_one_coordinate_raises_the_others(seed in any::<u64>(), xseed in any::<u64>(), i in 0usize..64, eps in 1e-6f64..2.0) {
        let q = instance(seed, 20);
        let n = q.dim();
        let i = i % n;
        let x = point(n, xseed);
        let before = q.gradient(&x, None, &mut Counters::default());
        let mut moved = x.clone();
        moved[i] -= eps;
        let after = q.gradient(&moved, None, &mut Counters::default());
        for j in (0..n).filter(|&j| j != i) {
            prop_assert!(after[j] >= before[j] - 1e-12);
        }
    }

    #[test]
    fn run_record_json_round_trip(
        alpha in 1e-6f64..1.0,
        rho in proptest::option::of(1e-9f64..1.0),
        eps in 1e-12f64..1.0,
        gap in proptest::option::of(-1e-3f64..1e3),
        counts in proptest::array::uniform5(any::<u32>()),
        viol in proptest::collection::vec(0usize..1000, 0..4),
        pos in 0.0f64..1.0,
        wall in any::<u64>(),
    ) {
        let record = RunRecord {
            source: InstanceSource::Generator { family: "grid".into(), seed: wall ^ 7 },
            n: 900,
            alpha,
            rho,
            solver: "aspr".into(),
            variant: "early+constraints".into(),
            eps,
            counters: Counters {
                stages: counts[0] as u64,
                inner_iters: counts[1] as u64,
                nnz_touched: counts[2] as u64 * 1_000_003,
                full_gradients: counts[3] as u64,
                restricted_gradients: counts[4] as u64,
            },
            support_size: 12,
            reference_support_size: Some(12),
            vol_supp: Some(60),
            ivol_supp: None,
            gap,
            residuals: OptimalityReport {
                max_violation_positive: pos,
                max_violation_zero_low: pos / 3.0,
                upper_box_violations: viol,
            },
            wall_ns: wall,
        };
        let back = RunRecord::from_json(&record.to_json()).unwrap();
        prop_assert_eq!(back, record);
    }

    #[test]
    fn bench_row_csv_round_trip(alpha in 1e-9f64..1.0, rho in 1e-12f64..1.0, gap in proptest::option::of(-1.0f64..1.0), big in any::<u64>()) {
        let row = BenchRow {
            family: "sbm".into(),
            n: 64,
            alpha,
            rho,
            solver: "ista".into(),
            variant: "-".into(),
            stages: big % 1000,
            inner_iters: big,
            nnz_touched: big / 3,
            full_gradients: 2,
            support_size: 9,
            vol_supp: Some(31),
            ivol_supp: Some(17),
            gap,
            wall_ns: big,
        };
        let mut buf = Vec::new();
        ppr_core::record::write_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
        let back: Vec<BenchRow> = read_csv(&buf[..]).unwrap();
        prop_assert_eq!(back, vec![row]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn solvers_are_deterministic_and_sparse(seed in any::<u64>()) {
        let q = instance(seed, 12);
        let star = dense_solve_enumerate(&q).unwrap();
        let config = SolverConfig::default();
        for kind in [SolverKind::Cdpr, SolverKind::Aspr, SolverKind::Ista] {
            for variant in [AsprVariant::PLAIN, AsprVariant::early(), AsprVariant::constraints()] {
                let a = solve(&q, kind, 1e-6, variant, &config).unwrap();
                let b = solve(&q, kind, 1e-6, variant, &config).unwrap();
                prop_assert_eq!(&a.support, &b.support);
                prop_assert_eq!(a.counters.stages, b.counters.stages);
                for i in &a.support {
                    prop_assert!(star.support.contains(i), "{:?} {} not in {:?}", kind, i, star.support);
                }
            }
        }
    }

    #[test]
    fn solve_output_json_round_trip(seed in any::<u64>()) {
        let q = random_m_matrix(8, 0.5, seed).unwrap();
        let sol = solve(&q, SolverKind::Aspr, 1e-6, AsprVariant::PLAIN, &SolverConfig::default()).unwrap();
        let out = SolveOutput::new(SolverKind::Aspr, &sol);
        let back: SolveOutput = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
        prop_assert_eq!(back.gap_bound, GapBound::Certified(1e-6));
        prop_assert_eq!(back, out);
    }
}

#[test]
fn sparse_vector_round_trips_through_dense() {
    let v = SparseVector::from_pairs(6, [(4, 0.25), (1, 3.0)]);
    assert_eq!(v.indices, vec![1, 4]);
    assert_eq!(SparseVector::from_dense(&v.to_dense()), v);
}
