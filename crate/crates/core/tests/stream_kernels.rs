use membench::device::{DeviceProfile, LevelName, MemoryLevel};
use membench::stream::{run_stream_test_with, size_for_level, StreamInit, StreamKind};
use membench::timing::RepetitionPolicy;
use proptest::prelude::*;

fn want(kind: StreamKind, i: StreamInit) -> f64 {
    match kind {
        StreamKind::Copy => i.b,
        StreamKind::Scale => i.d * i.b,
        StreamKind::Sum => i.b + i.c,
        StreamKind::Triad => i.b + i.d * i.c,
    }
}

fn kind() -> impl Strategy<Value = StreamKind> {
    prop::sample::select(StreamKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernels_leave_formula_values(k in kind(), n in 1usize..5000, threads in 1usize..5,
                                    b in -8i32..8, c in -8i32..8, d in -8i32..8) {
        let init = StreamInit { a: 0.125, b: b as f64, c: c as f64 * 0.5, d: d as f64 };
        let policy = RepetitionPolicy::new(0, 2).unwrap();
        let (run, arrays) = run_stream_test_with(k, n, threads, &policy, init).unwrap();
        prop_assert_eq!(run.n_elems, n);
        prop_assert!(run.bandwidth > 0.0);
        let expected = want(k, init);
        prop_assert!(arrays.a.iter().all(|&x| x == expected));
        prop_assert!(arrays.b.iter().all(|&x| x == init.b));
        prop_assert!(arrays.c.iter().all(|&x| x == init.c));
    }

    #[test]
    fn sized_working_set_fits_between_levels(l1 in 4u64..64, ratio in 8u64..64, k in kind()) {
        let l1 = l1 * 1024;
        let l2 = l1 * ratio;
        let dev = DeviceProfile::new("p", 2, vec![
            MemoryLevel { label: LevelName::L1, capacity: l1, shared: false },
            MemoryLevel { label: LevelName::L2, capacity: l2, shared: true },
            MemoryLevel { label: LevelName::Dram, capacity: 1 << 34, shared: true },
        ]).unwrap();
        let bytes = |n: usize| n as u64 * k.arrays() * 8;
        let n1 = size_for_level(LevelName::L1, &dev, k).unwrap();
        prop_assert!(bytes(n1) <= l1 / 2);
        let n2 = size_for_level(LevelName::L2, &dev, k).unwrap();
        prop_assert!(bytes(n2) >= 4 * l1 && bytes(n2) <= l2 / 2);
        let nd = size_for_level(LevelName::Dram, &dev, k).unwrap();
        prop_assert!(bytes(nd) >= 4 * l2);
    }
}
