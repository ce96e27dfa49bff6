mod common;

use myopic_auth::adversary::*;
use myopic_auth::channel::{bsc, make_r_ow_bsc_bec, MyopicAvc};
use myopic_auth::code::TwoPhaseCode;
use myopic_auth::math::{Distribution, StochasticMatrix};
use myopic_auth::overwrite::is_u_overwritable;
use myopic_auth::sim::experiment::{build_two_phase, CodeConfig};
use myopic_auth::sim::*;
use myopic_auth::tag::*;
use myopic_auth::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn input_blind_channel() -> MyopicAvc {
    let to0 = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let to1 = StochasticMatrix::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
    MyopicAvc::new(vec![bsc(0.1).unwrap(), to0, to1], bsc(0.2).unwrap()).unwrap()
}

fn simple_tag(avc: &MyopicAvc, n: usize, alpha: f64, beta: f64, sets: usize, mu: f64, rho: f64) -> Tag {
    let fam = build_set_family(n, alpha, beta, sets, 1, 10).unwrap();
    TagScheme::new(avc, Distribution::uniform(avc.x_size()), 0, fam, mu, Some(rho)).unwrap().into()
}

fn histogram(seq: &[usize], k: usize) -> Vec<f64> {
    let mut h = vec![0.0; k];
    for &s in seq {
        h[s] += 1.0 / seq.len() as f64;
    }
    h
}

#[test]
fn output_is_independent_of_observation_given_input_and_state() {
    let avc = common::random_avc(5, 2, 2, 2, 2);
    let q = StochasticMatrix::new(vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
    let strategy = AdversaryStrategy::Memoryless { q };
    let sampler = AvcSampler::new(&avc);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<usize> = (0..100_000).map(|_| rng.random_range(0..2)).collect();
    let tag = simple_tag(&avc, 100, 0.3, 0.3, 2, 0.4, 0.1);
    let t = sampler
        .transmit(&avc, &x, &strategy, Scheme::Tag { tag: &tag, m_hat: 0 }, &mut rng)
        .unwrap();
    // joint of (x, s, z, y) against P(x,s)·P(z|x,s)·P(y|x,s)
    let mut joint = vec![0.0; 16];
    let mut xs = vec![0.0; 4];
    let mut xsz = vec![0.0; 8];
    let mut xsy = vec![0.0; 8];
    let n = x.len() as f64;
    for i in 0..x.len() {
        let c = x[i] * 2 + t.s[i];
        joint[c * 4 + t.z[i] * 2 + t.y[i]] += 1.0 / n;
        xs[c] += 1.0 / n;
        xsz[c * 2 + t.z[i]] += 1.0 / n;
        xsy[c * 2 + t.y[i]] += 1.0 / n;
    }
    let mut d = 0.0;
    for c in 0..4 {
        for z in 0..2 {
            for y in 0..2 {
                let prod = if xs[c] > 0.0 { xsz[c * 2 + z] * xsy[c * 2 + y] / xs[c] } else { 0.0 };
                d += 0.5 * (joint[c * 4 + z * 2 + y] - prod).abs();
            }
        }
    }
    assert!(d <= 0.02, "TV of joint vs product {d}");
}

#[test]
fn null_memoryless_strategy_matches_absent() {
    let avc = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
    let tag = simple_tag(&avc, 50, 0.3, 0.3, 2, 0.4, 0.1);
    let null = AdversaryStrategy::Memoryless {
        q: StochasticMatrix::new(vec![vec![1.0, 0.0, 0.0]; 3]).unwrap(),
    };
    let sampler = AvcSampler::new(&avc);
    let mut ys = [Vec::new(), Vec::new()];
    for (k, s) in [AdversaryStrategy::Absent, null].iter().enumerate() {
        for t in 0..10_000u64 {
            let trial = run_tag_trial(&avc, &sampler, &tag, s, 0, 0, 100 + k as u64, t).unwrap();
            assert!(trial.transmission.s.iter().all(|&v| v == 0));
            ys[k].extend(trial.transmission.y);
        }
    }
    assert!(common::tv(&histogram(&ys[0], 2), &histogram(&ys[1], 2)) <= 0.02);
}

#[test]
fn overwrite_witness_imitates_target_for_every_input() {
    let avc = input_blind_channel();
    let tier = is_u_overwritable(&avc).unwrap();
    let strategy = AdversaryStrategy::from_witness(&tier, 0).unwrap();
    let sampler = AvcSampler::new(&avc);
    let tag = simple_tag(&avc, 100, 0.3, 0.3, 2, 0.4, 0.1);
    let target = avc.no_adversary().row(0).probs().to_vec();
    for x in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(x as u64);
        let t = sampler
            .transmit(&avc, &vec![x; 10_000], &strategy, Scheme::Tag { tag: &tag, m_hat: 0 }, &mut rng)
            .unwrap();
        assert!(common::tv(&histogram(&t.y, 2), &target) <= 0.02, "input {x}");
    }
}

#[test]
fn wilson_coverage_is_nominal() {
    for q in [0.01, 0.1, 0.5] {
        let mut rng = ChaCha8Rng::seed_from_u64((q * 1000.0) as u64);
        let mut covered = 0;
        for _ in 0..500 {
            let events = (0..1000).filter(|_| rng.random::<f64>() < q).count() as u64;
            let (lo, hi) = wilson_interval(events, 1000, Z95);
            covered += (lo <= q && q <= hi) as usize;
        }
        let c = covered as f64 / 500.0;
        assert!((0.92..=0.98).contains(&c), "q={q}: coverage {c}");
    }
}

#[test]
fn false_alarm_is_zero_on_noiseless_channel_with_constant_input() {
    let avc = MyopicAvc::new(vec![StochasticMatrix::identity(2)], StochasticMatrix::identity(2)).unwrap();
    let fam = build_set_family(100, 0.3, 0.3, 3, 2, 10).unwrap();
    let tag: Tag = TagScheme::new(&avc, Distribution::point_mass(2, 0), 0, fam, 0.4, None).unwrap().into();
    let e = estimate_tag_errors(&tag, &avc, &AdversaryStrategy::Absent, 1, 1, 500, 3, Execution::Parallel).unwrap();
    assert_eq!(e.estimate.quantity, Quantity::FalseAlarm);
    assert_eq!(e.estimate.events, 0);
    assert!(estimate_tag_errors(&tag, &avc, &AdversaryStrategy::Absent, 1, 1, 99, 3, Execution::Parallel).is_err());
}

#[test]
fn sequential_and_parallel_agree_and_records_replay() {
    let avc = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
    let tag = simple_tag(&avc, 80, 0.3, 0.3, 3, 0.4, 0.1);
    let s = AdversaryStrategy::Memoryless {
        q: StochasticMatrix::new(vec![vec![0.2, 0.8, 0.0], vec![0.2, 0.0, 0.8], vec![0.5, 0.25, 0.25]]).unwrap(),
    };
    let a = estimate_tag_errors(&tag, &avc, &s, 0, 1, 400, 9, Execution::Sequential).unwrap();
    let b = estimate_tag_errors(&tag, &avc, &s, 0, 1, 400, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 4);
    for r in &a.records {
        replay_tag_record(&avc, &tag, &s, r).unwrap();
    }
    let mut forged = a.records[0].clone();
    forged.outcome = !forged.outcome;
    assert!(replay_tag_record(&avc, &tag, &s, &forged).is_err());
}

fn small_code(avc: &MyopicAvc, seed: u64) -> TwoPhaseCode {
    let cfg = CodeConfig {
        rate: 0.1,
        block_len: 40,
        code_seed: seed,
        c_tag_proxy: 0.5,
        tag_len: Some(24),
        alpha: 0.5,
        beta: 0.1,
        mu: 0.8,
        rho: 0.2,
        x_prime: 0,
        p_x: None,
        family_seed: seed,
        max_retries: 10,
        messages: 16,
    };
    build_two_phase(avc, &cfg).unwrap()
}

/// Binary AVC whose no-adversary channel is a BSC and whose other states are random.
fn decomposition_channel(seed: u64) -> MyopicAvc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nz = 2 + (seed as usize % 2);
    let ns = 2 + (seed as usize / 2 % 2);
    let mut w = vec![bsc(0.02 + 0.1 * rng.random::<f64>()).unwrap()];
    for _ in 1..ns {
        w.push(common::random_matrix(&mut rng, 2, 2));
    }
    MyopicAvc::new(w, common::random_matrix(&mut rng, 2, nz)).unwrap()
}

#[test]
fn forgery_rate_obeys_the_suffix_decomposition() {
    for seed in 0..10u64 {
        let avc = decomposition_channel(seed);
        let code = small_code(&avc, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 50);
        let q = common::random_matrix(&mut rng, avc.z_size(), avc.s_size());
        let strategies = [
            AdversaryStrategy::Absent,
            AdversaryStrategy::Memoryless { q },
            AdversaryStrategy::TwoPhaseForger { target: ForgeryTarget::Adaptive },
        ];
        let messages = sample_messages(code.message_count(), 4, seed);
        for s in &strategies {
            let e = estimate_code_errors(&code, &avc, s, &messages, 300, seed, Execution::Parallel).unwrap();
            assert_eq!(e.structural_violations, 0);
            let d = &e.decomposition;
            assert!(d.holds, "channel {seed} {}: forged {} > accepted {} + {}", s.label(), d.lhs, d.rhs, d.slack);
            for r in &e.records {
                replay_code_record(&avc, &code, s, r).unwrap();
            }
        }
    }
}

#[test]
fn tag_phase_forger_is_no_stronger_than_best_memoryless() {
    // without a payload the forger's states depend on z_i alone, a memoryless rule
    for u in [0.5, 1.0] {
        let avc = make_r_ow_bsc_bec(0.1, 0.3, u).unwrap();
        let tag = simple_tag(&avc, 60, 0.3, 0.3, 4, 0.2, 0.05);
        let (m, m_hat, _) = tag.base().family.max_overlap_pair().unwrap();
        let forger = AdversaryStrategy::TwoPhaseForger { target: ForgeryTarget::Adaptive };
        let f = estimate_tag_errors(&tag, &avc, &forger, m, m_hat, 4000, 1, Execution::Parallel).unwrap();
        let cfg = SearchConfig { trials: 1000, seed: 2, ..Default::default() };
        let best = best_memoryless_response(&avc, &tag, m, m_hat, &cfg).unwrap();
        let b = estimate_tag_errors(&tag, &avc, &AdversaryStrategy::Memoryless { q: best.q }, m, m_hat, 4000, 1, Execution::Parallel)
            .unwrap();
        let slack = 2.0 * f.estimate.half_width().max(b.estimate.half_width());
        assert!(
            f.estimate.estimate <= b.estimate.estimate + slack,
            "u={u}: forger {} vs memoryless {}",
            f.estimate.estimate,
            b.estimate.estimate
        );
    }
}

#[test]
fn best_response_overwrites_a_u_overwritable_channel() {
    let avc = input_blind_channel();
    let tag = simple_tag(&avc, 200, 0.5, 0.3, 4, 0.4, 0.1);
    let honest = estimate_tag_errors(&tag, &avc, &AdversaryStrategy::Absent, 0, 0, 2000, 4, Execution::Parallel).unwrap();
    assert!(honest.estimate.estimate <= 0.05);
    let best = best_memoryless_response(&avc, &tag, 0, 1, &SearchConfig { trials: 300, seed: 5, ..Default::default() }).unwrap();
    assert!(best.acceptance >= 0.9, "{}", best.acceptance);
    let again = best_memoryless_response(&avc, &tag, 0, 1, &SearchConfig { trials: 300, seed: 5, ..Default::default() }).unwrap();
    assert_eq!(best, again);
}

#[test]
fn single_state_best_response_is_honest_acceptance() {
    let avc = MyopicAvc::new(vec![bsc(0.1).unwrap()], bsc(0.2).unwrap()).unwrap();
    let tag = simple_tag(&avc, 60, 0.3, 0.3, 3, 0.4, 0.1);
    let best = best_memoryless_response(&avc, &tag, 0, 1, &SearchConfig { trials: 2000, seed: 3, ..Default::default() }).unwrap();
    let honest = estimate_tag_errors(&tag, &avc, &AdversaryStrategy::Absent, 0, 1, 2000, 8, Execution::Parallel).unwrap();
    assert!((best.acceptance - honest.estimate.estimate).abs() <= 3.0 * honest.estimate.half_width());
    assert_eq!(best.evaluations, 1);
}
