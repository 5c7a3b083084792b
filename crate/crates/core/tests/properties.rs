mod common;

use proptest::prelude::*;

use findtrack_core::backends::Embedding;
use findtrack_core::identify::{
    alignment_score, mask_score, sample_candidates, select_key_frame, CandidateSet,
};
use findtrack_core::io::{decode_pgm, decode_ppm, encode_pgm, encode_ppm};
use findtrack_core::mask::{rle_decode, rle_encode, RleMask};
use findtrack_core::metrics::{contour_f, region_j};
use findtrack_core::propagate::features::{cell_fractions, extract_features};
use findtrack_core::propagate::memory::{LONG_TERM_CAPACITY, WORKING_CAPACITY};
use findtrack_core::propagate::{split_sequence, MemoryBank};
use findtrack_core::types::ScoredMask;
use findtrack_core::{BinaryMask, Frame};

fn mask_strategy(max: usize) -> impl Strategy<Value = BinaryMask> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<bool>(), w * h)
            .prop_map(move |bits| BinaryMask::from_bits(w, h, bits).unwrap())
    })
}

fn mask_pair(max: usize) -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        let bits = proptest::collection::vec(any::<bool>(), w * h);
        (bits.clone(), bits).prop_map(move |(a, b)| {
            (
                BinaryMask::from_bits(w, h, a).unwrap(),
                BinaryMask::from_bits(w, h, b).unwrap(),
            )
        })
    })
}

fn embedding(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, dim)
        .prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #[test]
    fn rle_round_trips(m in mask_strategy(24)) {
        let rle = rle_encode(&m);
        prop_assert_eq!(rle.size, [m.height(), m.width()]);
        prop_assert_eq!(rle.counts.iter().sum::<u64>() as usize, m.width() * m.height());
        // Only the leading zero-run may be empty.
        prop_assert!(rle.counts.iter().skip(1).all(|&c| c > 0));
        let json = serde_json::to_string(&rle).unwrap();
        let back: RleMask = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(rle_decode(&back).unwrap(), m);
    }

    #[test]
    fn pgm_round_trips(m in mask_strategy(24)) {
        prop_assert_eq!(decode_pgm(&encode_pgm(&m)).unwrap(), m);
    }

    #[test]
    fn ppm_round_trips(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
        let mut g = findtrack_core::synthgen::Lcg::new(seed);
        let px: Vec<u8> = (0..w * h * 3).map(|_| g.int(0, 255) as u8).collect();
        let f = Frame::new(4, w, h, px).unwrap();
        prop_assert_eq!(decode_ppm(&encode_ppm(&f), 4).unwrap(), f);
    }

    #[test]
    fn sampling_invariants(t in 1usize..=500, n in 1usize..=50) {
        let c = sample_candidates(t, n);
        prop_assert!(c.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(c.iter().all(|&j| (1..=t).contains(&j)));
        if n == 1 {
            prop_assert_eq!(c, vec![t.div_ceil(2)]);
        } else {
            prop_assert_eq!(c.len(), n.min(t));
            prop_assert_eq!(c[0], 1);
            prop_assert_eq!(*c.last().unwrap(), t);
        }
    }

    #[test]
    fn alignment_in_range_and_scale_free(u in embedding(8), v in embedding(8), c in 0.01f64..100.0) {
        let (eu, ev) = (Embedding(u.clone()), Embedding(v));
        let rho = alignment_score(&eu, &ev).unwrap();
        prop_assert!((-1.0..=1.0).contains(&rho));
        let scaled = Embedding(u.iter().map(|x| x * c).collect());
        prop_assert!((alignment_score(&scaled, &ev).unwrap() - rho).abs() < 1e-9);
        prop_assert!((alignment_score(&eu, &eu).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn selection_invariant_under_weight_scaling(
        scores in proptest::collection::vec((0.0f64..1.0, -1.0f64..1.0, any::<bool>()), 1..8),
        w1 in 0.0f64..1.0,
        w2 in 0.0f64..1.0,
        c in prop::sample::select(vec![0.1, 1.0, 10.0]),
    ) {
        prop_assume!(w1 + w2 > 0.0);
        let pick = |w1: f64, w2: f64| {
            let scored: Vec<ScoredMask> = scores.iter().enumerate().map(|(i, &(pi, rho, empty))| {
                let mut mask = BinaryMask::empty(2, 2);
                mask.set(0, 0, !empty);
                ScoredMask {
                    frame_index: i + 1,
                    mask,
                    confidence: pi,
                    alignment: rho,
                    score: mask_score(pi, rho, w1, w2),
                }
            }).collect();
            let set = CandidateSet { indices: (1..=scored.len()).collect(), scored };
            select_key_frame(&set).ok().map(|r| r.key_frame)
        };
        // Scaling can only reorder candidates whose scores tie up to rounding.
        let base = pick(w1, w2);
        let scaled = pick(w1 * c, w2 * c);
        if base != scaled {
            // Accept only a rounding-level near-tie.
            let s = |k: usize| {
                let (pi, rho, _) = scores[k - 1];
                mask_score(pi, rho, w1, w2)
            };
            let (a, b) = (base.unwrap(), scaled.unwrap());
            prop_assert!((s(a) - s(b)).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn j_properties((a, b) in mask_pair(20)) {
        let j = region_j(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, region_j(&b, &a).unwrap());
        prop_assert_eq!(region_j(&a, &a).unwrap(), 1.0);
        prop_assert!((j - common::oracle_j(&a, &b)).abs() < 1e-12);
        // Adding missed truth or dropping false positives never lowers J.
        let grown = BinaryMask::from_fn(a.width(), a.height(), |x, y| a.get(x, y) || b.get(x, y));
        let pruned = BinaryMask::from_fn(a.width(), a.height(), |x, y| a.get(x, y) && b.get(x, y));
        prop_assert!(region_j(&grown, &b).unwrap() >= j);
        prop_assert!(region_j(&pruned, &b).unwrap() >= j);
    }

    #[test]
    fn f_matches_oracle((a, b) in mask_pair(20)) {
        let f = contour_f(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - common::oracle_f(&a, &b)).abs() < 1e-9);
        prop_assert!((f - contour_f(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn split_covers_every_frame(t in 1usize..=50, k_frac in 0.0f64..1.0) {
        let k = 1 + ((t - 1) as f64 * k_frac) as usize;
        let c = split_sequence(t, k).unwrap();
        let mut all: Vec<usize> = c.forward.iter().chain(&c.backward).copied().collect();
        all.sort();
        all.dedup();
        prop_assert_eq!(all, (1..=t).collect::<Vec<_>>());
        let shared: Vec<usize> = c.forward.iter().filter(|i| c.backward.contains(i)).copied().collect();
        prop_assert_eq!(shared, vec![k]);
        prop_assert_eq!(c.forward[0], k);
        prop_assert_eq!(c.backward[0], k);
    }

    #[test]
    fn cell_fractions_in_unit_range(m in mask_strategy(20)) {
        let f = cell_fractions(&m);
        prop_assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
        let total: f32 = f.iter().sum();
        prop_assert_eq!(total == 0.0, m.is_empty());
    }

    #[test]
    fn memory_stays_bounded(writes in 1usize..30, long_term in any::<bool>(), seed in any::<u64>()) {
        let mut g = findtrack_core::synthgen::Lcg::new(seed);
        let frame = |g: &mut findtrack_core::synthgen::Lcg| {
            let px: Vec<u8> = (0..16 * 16 * 3).map(|_| g.int(0, 255) as u8).collect();
            Frame::new(1, 16, 16, px).unwrap()
        };
        let key = frame(&mut g);
        let labels = cell_fractions(&common::random_mask(seed, 16, 16));
        let mut bank = MemoryBank::new(extract_features(&key).with_labels(labels.clone()), long_term);
        for _ in 0..writes {
            bank.insert(extract_features(&frame(&mut g)).with_labels(labels.clone()));
            prop_assert!(bank.working_len() <= WORKING_CAPACITY);
            prop_assert!(bank.long_term_len() <= LONG_TERM_CAPACITY);
            prop_assert!(long_term || bank.long_term_len() == 0);
            prop_assert!(bank.long_term().iter().all(|p| (0.0..=1.0).contains(&p.label)));
        }
    }
}
