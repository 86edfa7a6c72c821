use super::*;
use crate::rng::stream_rng;
use crate::stats::chi2_uniform;

#[test]
fn forced_share_example_from_link_values() {
    // N=3, M=4: link values (j_1,j_2,j_3) = (1,2,3) force (i_1,i_2,i_3) =
    // (3,1,2) and shares z = (2,1,1), Σ = 4 ≡ 0 (mod 4).
    let values = [1usize, 2, 3];
    let shares = shares_from_link_values(&values, &values, 4);
    let z: Vec<u32> = shares.iter().map(|s| s.z).collect();
    assert_eq!(z, vec![2, 1, 1]);
    assert_eq!(z.iter().sum::<u32>() % 4, 0);
}

#[test]
fn key_sum_identity_is_exact() {
    let mut rng = stream_rng(20, 0);
    for n in [2usize, 3, 5, 8] {
        let cfg = RingConfig::new(n).unwrap();
        let mut completions = 0;
        while completions < 300 {
            if let KeygenOutcome::Keys(shares) = keygen(&cfg, &mut rng).unwrap().outcome {
                let total: u32 = shares.iter().map(|s| s.z).sum();
                assert_eq!(total as usize % cfg.modulus, 0, "key sum broken at N={n}");
                completions += 1;
            }
        }
    }
}

#[test]
fn share_marginals_are_uniform() {
    let mut rng = stream_rng(21, 0);
    let cfg = RingConfig::new(4).unwrap();
    let m = cfg.modulus;
    let mut counts = vec![vec![0u64; m]; 4];
    let mut completions = 0;
    while completions < 40_000 {
        if let KeygenOutcome::Keys(shares) = keygen(&cfg, &mut rng).unwrap().outcome {
            for s in &shares {
                counts[s.party as usize][s.z as usize] += 1;
            }
            completions += 1;
        }
    }
    // 0.999 quantile of chi-square with M−1 = 3 degrees of freedom.
    let critical = 16.266;
    for (party, c) in counts.iter().enumerate() {
        let chi2 = chi2_uniform(c);
        assert!(chi2 < critical, "party {party}: chi2 = {chi2}");
    }
}

#[test]
fn all_testers_on_ideal_channel_pass_every_check() {
    let mut rng = stream_rng(22, 0);
    let mut cfg = RingConfig::new(5).unwrap();
    cfg.test_prob = 1.0;
    for _ in 0..200 {
        match keygen(&cfg, &mut rng).unwrap().outcome {
            KeygenOutcome::Test(report) => {
                assert_eq!(report.tested_links, 5);
                assert_eq!(report.passed, report.tested_links);
                assert_eq!(report.f_min, 1.0);
                assert!(!report.tamper_detected());
            }
            KeygenOutcome::Keys(_) => panic!("everyone tests"),
        }
    }
}

#[test]
fn key_round_probability_approaches_one_over_e() {
    // P(no tester) = (1 − 1/N)^N → 1/e.
    let mut rng = stream_rng(23, 0);
    let n = 8usize;
    let cfg = RingConfig::new(n).unwrap();
    let trials = 20_000usize;
    let mut keys = 0u32;
    for _ in 0..trials {
        if matches!(keygen(&cfg, &mut rng).unwrap().outcome, KeygenOutcome::Keys(_)) {
            keys += 1;
        }
    }
    let expect = (1.0 - 1.0 / n as f64).powi(n as i32);
    let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
    let freq = keys as f64 / trials as f64;
    assert!((freq - expect).abs() < 3.0 * sigma, "freq {freq} vs {expect}");
    assert!((expect - (-1.0f64).exp()).abs() < 0.03);
}

#[test]
fn secure_sum_worked_examples() {
    let mut rng = stream_rng(24, 0);
    let cfg = RingConfig::new(3).unwrap();
    assert_eq!(cfg.modulus, 4);
    assert_eq!(secure_sum(&[1, 0, 1], &cfg, &mut rng).unwrap().value, 2);
    assert_eq!(secure_sum(&[0, 0, 0], &cfg, &mut rng).unwrap().value, 0);
    assert_eq!(secure_sum(&[3, 3, 3], &cfg, &mut rng).unwrap().value, 1);
}

#[test]
fn secure_sum_exhaustive_small_rings() {
    let mut rng = stream_rng(25, 0);
    for n in 2..=3usize {
        for m in [2usize, 4] {
            let cfg = RingConfig::new(n).unwrap().with_modulus(m).unwrap();
            let mut inputs = vec![0usize; n];
            loop {
                let expect = inputs.iter().sum::<usize>() % m;
                let run = secure_sum(&inputs, &cfg, &mut rng).unwrap();
                assert_eq!(run.value, expect, "inputs {inputs:?} mod {m}");
                // Increment the input tuple in base m.
                let mut k = 0;
                while k < n {
                    inputs[k] += 1;
                    if inputs[k] < m {
                        break;
                    }
                    inputs[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
    }
}

#[test]
fn announcements_are_uniform_for_fixed_inputs() {
    let mut rng = stream_rng(26, 0);
    let cfg = RingConfig::new(3).unwrap();
    let m = cfg.modulus;
    for inputs in [[0usize, 0, 0], [1, 2, 3], [3, 0, 1]] {
        let mut counts = vec![vec![0u64; m]; 3];
        for _ in 0..30_000 {
            let run = secure_sum(&inputs, &cfg, &mut rng).unwrap();
            for (party, &a) in run.announcements.iter().enumerate() {
                counts[party][a as usize] += 1;
            }
        }
        let critical = 16.266; // chi-square 0.999 quantile, 3 dof
        for (party, c) in counts.iter().enumerate() {
            let chi2 = chi2_uniform(c);
            assert!(chi2 < critical, "inputs {inputs:?} party {party}: chi2 = {chi2}");
        }
    }
}

#[test]
fn broadcast_bit_reaches_everyone() {
    let mut rng = stream_rng(27, 0);
    let cfg = RingConfig::bit_broadcast(4).unwrap();
    for sender in 0..4 {
        let (bit, _) = broadcast_bit(sender, true, &cfg, &mut rng).unwrap();
        assert!(bit);
        let (bit, _) = broadcast_bit(sender, false, &cfg, &mut rng).unwrap();
        assert!(!bit);
    }
}

#[test]
fn queue_of_one_party_fills_immediately() {
    let mut rng = stream_rng(28, 0);
    let cfg = RingConfig::new(1).unwrap();
    let run = build_queue(&cfg, &mut rng).unwrap();
    assert_eq!(run.permutation.order(), &[0]);
    assert_eq!(run.rounds_used, 1);
}

#[test]
fn queue_first_slot_success_probability() {
    // First-slot success per round is (1 − 1/N)^{N−1}; N = 3 gives 4/9.
    assert!((queue_slot_success_prob(3, 1) - 4.0 / 9.0).abs() < 1e-12);
    let mut rng = stream_rng(29, 0);
    let cfg = RingConfig::new(3).unwrap();
    let trials = 3000usize;
    let mut first_round_hits = 0u32;
    for _ in 0..trials {
        let run = build_queue(&cfg, &mut rng).unwrap();
        if run.slot_rounds[0] == 1 {
            first_round_hits += 1;
        }
    }
    let expect = 4.0 / 9.0;
    let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
    let freq = first_round_hits as f64 / trials as f64;
    assert!((freq - expect).abs() < 3.0 * sigma, "freq {freq}");
}

#[test]
fn queue_round_count_tracks_expectation() {
    let mut rng = stream_rng(30, 0);
    let n = 5usize;
    let cfg = RingConfig::new(n).unwrap();
    let runs = 400usize;
    let mut total = 0u64;
    for _ in 0..runs {
        let run = build_queue(&cfg, &mut rng).unwrap();
        assert_eq!(run.slot_rounds.iter().sum::<u32>(), run.rounds_used);
        total += run.rounds_used as u64;
    }
    let mean = total as f64 / runs as f64;
    let expect = queue_expected_rounds(n);
    assert!(
        (mean - expect).abs() / expect < 0.10,
        "mean {mean} vs expected {expect}"
    );
}

#[test]
fn intercept_resend_fails_x_checks_at_the_oracle_rate() {
    // With every party testing, each segment is one link; the attacked link's
    // check fails with probability 1 − 1/M computed from the collapsed state.
    let mut rng = stream_rng(31, 0);
    for n in [3usize, 4] {
        let mut cfg = RingConfig::new(n).unwrap();
        cfg.test_prob = 1.0;
        cfg.channel = ChannelModel::InterceptResend { link: 1 };
        let m = cfg.modulus;

        // Statevector oracle: pass probability of the X⊗X check on |c⟩|c⟩.
        let qft = crate::qsim::qft_basis(m).unwrap();
        let collapsed = crate::qsim::PureState::basis_state(vec![m], 0).unwrap();
        let probs = crate::qsim::outcome_probabilities(&collapsed, &qft).unwrap();
        let mut pass_oracle = 0.0;
        for (a, pa) in probs.iter().enumerate() {
            for (b, pb) in probs.iter().enumerate() {
                if (a + b) % m == 0 {
                    pass_oracle += pa * pb;
                }
            }
        }
        assert!((pass_oracle - 1.0 / m as f64).abs() < 1e-12);

        let trials = 4000usize;
        let mut fails = 0u32;
        for _ in 0..trials {
            match keygen(&cfg, &mut rng).unwrap().outcome {
                KeygenOutcome::Test(report) => {
                    assert_eq!(report.tested_links, n as u32);
                    let failed = report.tested_links - report.passed;
                    assert!(failed <= 1, "only the attacked link may fail");
                    fails += failed;
                }
                KeygenOutcome::Keys(shares) => {
                    // Z-basis interception leaves the key correlations intact.
                    let total: u32 = shares.iter().map(|s| s.z).sum();
                    assert_eq!(total as usize % m, 0);
                }
            }
        }
        let expect = 1.0 - pass_oracle;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        let freq = fails as f64 / trials as f64;
        assert!((freq - expect).abs() < 3.0 * sigma, "N={n}: freq {freq} vs {expect}");
    }
}

#[test]
fn ideal_channel_never_fails_checks() {
    let mut rng = stream_rng(32, 0);
    let mut cfg = RingConfig::new(4).unwrap();
    cfg.test_prob = 0.6;
    for _ in 0..300 {
        if let KeygenOutcome::Test(report) = keygen(&cfg, &mut rng).unwrap().outcome {
            assert_eq!(report.passed, report.tested_links);
        }
    }
}

#[test]
fn announcement_noise_only_wastes_rounds() {
    let mut rng = stream_rng(33, 0);
    let cfg = RingConfig::new(4)
        .unwrap()
        .with_channel(ChannelModel::AnnouncementNoise { p: 0.3 });
    let run = build_queue(&cfg, &mut rng).unwrap();
    // The permutation stays a bijection; noise shows up as extra rounds.
    assert_eq!(run.permutation.len(), 4);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn queue_output_is_always_a_bijection(n in 2usize..7, seed in 0u64..2000) {
            let mut rng = stream_rng(seed, 31);
            let cfg = RingConfig::new(n).unwrap();
            let run = build_queue(&cfg, &mut rng).unwrap();
            // QueuePermutation::new re-validates bijectivity on construction.
            prop_assert_eq!(run.permutation.len(), n);
            let mut seen = vec![false; n];
            for slot in 0..n {
                seen[run.permutation.party_at(slot) as usize] = true;
            }
            prop_assert!(seen.iter().all(|&s| s));
        }

        #[test]
        fn secure_sum_matches_plain_sum(seed in 0u64..2000, inputs in proptest::collection::vec(0usize..4, 2..5)) {
            let mut rng = stream_rng(seed, 32);
            let cfg = RingConfig::new(inputs.len()).unwrap().with_modulus(4).unwrap();
            let run = secure_sum(&inputs, &cfg, &mut rng).unwrap();
            prop_assert_eq!(run.value, inputs.iter().sum::<usize>() % 4);
        }
    }
}
