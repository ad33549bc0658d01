use std::collections::BTreeMap;

use proptest::prelude::*;

use ising_ldpc::bp::{self, BpAlgorithm, BpConfig, Schedule};
use ising_ldpc::channel::{self, ChannelObservation};
use ising_ldpc::code::io::{parse_alist, write_alist};
use ising_ldpc::formulation::{
    bits_to_spins, build_higher_order, build_qubo, qubo_spins, spins_to_bits, to_ising, AuxEncoding, QuadraticModel,
    VarTag,
};
use ising_ldpc::metrics::{expected_ber, sign_test, AnnealEnsemble, BerStats, RankedSolution};
use ising_ldpc::sa::{Couplings, HigherOrderState, IsingState, SpinSystem};
use ising_ldpc::{BitVector, GeneratorMatrix, ParityCheckMatrix};

fn matrix() -> impl Strategy<Value = ParityCheckMatrix> {
    (2usize..6, 4usize..10).prop_flat_map(|(m, n)| {
        proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=n.min(4)), m).prop_map(move |rows| {
            ParityCheckMatrix::from_rows(m, n, rows.into_iter().map(|r| r.into_iter().collect()).collect()).unwrap()
        })
    })
}

fn spins(n: usize) -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n)
}

proptest! {
    #[test]
    fn encoded_words_have_zero_syndrome(h in matrix(), seed in any::<u64>()) {
        let g = GeneratorMatrix::from_parity_check(&h);
        let msg = BitVector::from_bools((0..g.k()).map(|i| (seed >> (i % 64)) & 1 == 1));
        let c = g.encode(&msg).unwrap();
        prop_assert!(h.is_codeword(&c).unwrap());
        prop_assert_eq!(g.extract_message(&c).unwrap(), msg);
    }

    #[test]
    fn alist_round_trip(h in matrix()) {
        prop_assert_eq!(parse_alist(&write_alist(&h)).unwrap(), h);
    }

    #[test]
    fn higher_order_delta_matches_recompute(
        (h, s, r) in matrix().prop_flat_map(|h| {
            let n = h.n();
            (Just(h), spins(n), proptest::collection::vec(-3.0f64..3.0, n))
        }),
        alpha in 0.1f64..8.0,
        i in any::<prop::sample::Index>(),
    ) {
        let model = build_higher_order(&h, &r, alpha).unwrap();
        let i = i.index(h.n());
        let state = HigherOrderState::new(&model, s.clone()).unwrap();
        let mut t = s.clone();
        t[i] = -t[i];
        let full = model.energy(&t).unwrap() - model.energy(&s).unwrap();
        prop_assert!((state.delta(i) - full).abs() < 1e-9);
        prop_assert!((model.flip_delta(&s, i) - full).abs() < 1e-9);
    }

    #[test]
    fn qubo_and_ising_agree(
        (lin, quad, x) in (2usize..9).prop_flat_map(|n| (
            proptest::collection::vec(-4.0f64..4.0, n),
            proptest::collection::btree_map((0..n, 0..n), -4.0f64..4.0, 0..12),
            proptest::collection::vec(any::<bool>(), n),
        )),
        offset in -5.0f64..5.0,
    ) {
        let n = lin.len();
        let quad: BTreeMap<(usize, usize), f64> = quad.into_iter().filter(|((a, b), _)| a < b).collect();
        let q = QuadraticModel::from_parts(lin, quad, offset, (0..n).map(VarTag::CodeBit).collect()).unwrap();
        let ising = to_ising(&q);
        let x = BitVector::from_bools(x);
        let couplings = Couplings::new(&ising);
        let st = IsingState::new(&ising, &couplings, qubo_spins(&x)).unwrap();
        prop_assert!((q.energy(&x).unwrap() - st.energy()).abs() < 1e-9);
        for i in 0..n {
            let mut y = x.clone();
            y.flip(i);
            let full = q.energy(&y).unwrap() - q.energy(&x).unwrap();
            prop_assert!((st.delta(i) - full).abs() < 1e-9);
        }
    }

    #[test]
    fn codewords_zero_the_penalty(h in matrix(), unary in any::<bool>()) {
        // with R = 0 the channel term is a constant, so any codeword extended
        // by suitable auxiliaries reaches the offset-only energy
        let n = h.n();
        let enc = if unary { AuxEncoding::Unary } else { AuxEncoding::Binary };
        let q = build_qubo(&h, &vec![0.0; n], 1.0, enc).unwrap();
        let zero = BitVector::zeros(q.num_vars());
        prop_assert!((q.energy(&zero).unwrap() - q.offset()).abs() < 1e-12);
    }

    #[test]
    fn spin_maps_invert(bits in proptest::collection::vec(any::<bool>(), 0..70)) {
        let b = BitVector::from_bools(bits);
        prop_assert_eq!(spins_to_bits(&bits_to_spins(&b)), b);
    }

    #[test]
    fn expected_ber_identities(
        sols in proptest::collection::vec((1usize..6, 0usize..20, -10.0f64..10.0), 1..6),
        na in 1u32..12,
    ) {
        let n = 20;
        let ranked: Vec<RankedSolution> = sols
            .iter()
            .enumerate()
            .map(|(idx, &(m, e, energy))| RankedSolution {
                bits: BitVector::from_bools((0..8).map(|b| (idx >> b) & 1 == 1)),
                energy,
                multiplicity: m,
                errors: e,
            })
            .collect();
        let ens = AnnealEnsemble::from_solutions(ranked.clone()).unwrap();
        let total: usize = ranked.iter().map(|s| s.multiplicity).sum();
        let mean: f64 = ranked.iter().map(|s| s.multiplicity as f64 * s.errors as f64).sum::<f64>() / total as f64 / n as f64;
        prop_assert!((expected_ber(&ens, 1, n).unwrap() - mean).abs() < 1e-12);

        // with errors non-decreasing in rank, more anneals never hurt
        let mut sorted: Vec<usize> = ens.ranked().iter().map(|s| s.errors).collect();
        sorted.sort_unstable();
        let mono: Vec<RankedSolution> = ens
            .ranked()
            .iter()
            .zip(&sorted)
            .map(|(s, &e)| RankedSolution { errors: e, ..s.clone() })
            .collect();
        let ens = AnnealEnsemble::from_solutions(mono).unwrap();
        prop_assert!(expected_ber(&ens, na + 1, n).unwrap() <= expected_ber(&ens, na, n).unwrap() + 1e-15);
    }

    #[test]
    fn ber_stats_merge_is_order_free(frames in proptest::collection::vec(0usize..=50, 1..20)) {
        let mut all = BerStats::default();
        let (mut a, mut b) = (BerStats::default(), BerStats::default());
        for (i, &e) in frames.iter().enumerate() {
            all.record_errors(50, e);
            if i % 2 == 0 { a.record_errors(50, e) } else { b.record_errors(50, e) }
        }
        let mut ab = a;
        ab.merge(&b);
        let mut ba = b;
        ba.merge(&a);
        prop_assert_eq!(ab, all);
        prop_assert_eq!(ba, all);
        prop_assert!(all.bit_errors <= all.bits_total && all.frame_errors <= all.frames_total);
    }

    #[test]
    fn sign_test_is_symmetric(a in proptest::collection::vec(0usize..4, 1..40), b in proptest::collection::vec(0usize..4, 1..40)) {
        let len = a.len().min(b.len());
        let (a, b) = (&a[..len], &b[..len]);
        let ab = sign_test(a, b).unwrap();
        let ba = sign_test(b, a).unwrap();
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!(ab.p_value > 0.0 && ab.p_value <= 1.0);
        prop_assert_eq!(ab.wins + ab.losses + ab.ties, len as u64);
    }

    #[test]
    fn min_sum_success_means_zero_syndrome(seed in any::<u64>(), ebno in -1.0f64..4.0, alg in 0usize..4, layered in any::<bool>()) {
        let h = ParityCheckMatrix::from_dense(&[
            vec![1, 1, 0, 1, 1, 0, 0],
            vec![1, 0, 1, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 0, 0, 1],
        ]).unwrap();
        let mut rng = ising_ldpc::rng::stream(seed, &[]);
        let obs: ChannelObservation = channel::transmit(&[1.0; 7], ebno, 4.0 / 7.0, &mut rng).unwrap();
        let algorithm = [BpAlgorithm::SumProduct, BpAlgorithm::MinSum, BpAlgorithm::NormalizedMinSum, BpAlgorithm::OffsetMinSum][alg];
        let schedule = if layered { Schedule::Layered } else { Schedule::Flooding };
        let out = bp::decode(&h, &obs.llr, &BpConfig::new(algorithm, schedule, 20)).unwrap();
        prop_assert_eq!(out.success, h.is_codeword(&out.bits).unwrap());
    }
}
