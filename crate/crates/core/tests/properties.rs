mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dposim_core::adversary::{colluder_count, is_malicious, select_colluders, BehaviorKind};
use dposim_core::chain::{Block, ChainState, ViolationKind};
use dposim_core::consensus::{band_sizes, feedback_phase, quorum_size};
use dposim_core::exec::ExecMode;
use dposim_core::netmodel::{round_latency, HopSummary, MessageSizes, NetworkGen};
use dposim_core::preset::Preset;
use dposim_core::reputation::{
    beta_score, combine_opinions, decayed_evidence, opinion_from_evidence, reputation_beta, Engine, Evidence,
    Interaction, InteractionLedger, MinerEvidence, Model, MwslParams, Opinion,
};
use dposim_core::sim::{detect, run_scenario_with, Detector, ScenarioConfig};
use dposim_core::{MinerId, UeId};

use common::*;

fn evidence_of(events: &[Interaction], fade: f64) -> MinerEvidence {
    let mut ev = MinerEvidence::default();
    for e in events {
        ev.add(*e, fade);
    }
    ev
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unsealed_mutation_is_flagged_at_its_block(seed: u64, len in 1usize..16, pick: prop::sample::Index) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut blocks = random_chain(&mut rng, len).into_blocks();
        let i = pick.index(blocks.len());
        mutate_block(&mut rng, &mut blocks[i]);
        let v = ChainState::from_blocks_unchecked(blocks).verify().unwrap_err();
        prop_assert_eq!(v.index, i);
        prop_assert_eq!(v.kind, ViolationKind::HashMismatch);
    }

    #[test]
    fn resealed_mutation_breaks_the_next_link(seed: u64, len in 2usize..16, pick: prop::sample::Index) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut blocks = random_chain(&mut rng, len).into_blocks();
        let i = pick.index(blocks.len() - 1);
        mutate_block(&mut rng, &mut blocks[i]);
        blocks[i].seal();
        let v = ChainState::from_blocks_unchecked(blocks).verify().unwrap_err();
        prop_assert!(v.index == i || v.index == i + 1, "{:?}", v);
    }

    #[test]
    fn quorum_is_two_thirds(n in 1u32..=300, a_frac in 0.0f64..=1.0) {
        let a = ((n as f64) * a_frac).round() as u32;
        prop_assert!(quorum_matches(n, a.min(n)));
        let q = quorum_size(n);
        prop_assert!(3 * q >= 2 * n && 3 * (q - 1) < 2 * n);
    }

    #[test]
    fn bands_partition_verifiers(n in 0usize..5000, types in 1u32..20) {
        let sizes = band_sizes(n, types);
        prop_assert_eq!(sizes.len(), types as usize);
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn safety_holds_with_full_audit(seed: u64) {
        let t = safety_trial(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(!t.committed, "{:?}", t);
    }

    #[test]
    fn rotation_is_fair(n in 1u32..300, start in 0u64..100_000) {
        let active: Vec<MinerId> = (0..n).map(|i| MinerId(i * 7 + 3)).collect();
        prop_assert!(rotation_counts(&active, start).iter().all(|c| *c == 1));
    }

    #[test]
    fn opinions_are_normalized(pos in 0.0f64..1e4, neg in 0.0f64..1e4, succ in 0.0f64..=1.0, wp in 0.0f64..=1.0) {
        let params = MwslParams { success_prob: succ, w_pos: wp, w_neg: 1.0 - wp, ..MwslParams::default() };
        let op = opinion_from_evidence(Evidence { positive: pos, negative: neg }, &params);
        prop_assert!((op.belief + op.disbelief + op.uncertainty - 1.0).abs() <= 1e-9);
        prop_assert!(op.belief >= 0.0 && op.disbelief >= 0.0 && op.uncertainty >= 0.0);
    }

    #[test]
    fn combined_reputation_lies_between_inputs(
        parts in prop::collection::vec((0.0f64..50.0, 0.0f64..50.0, 1u32..100), 1..20)
    ) {
        let params = MwslParams::default();
        let ops: Vec<(Opinion, u32)> = parts
            .iter()
            .map(|(p, n, h)| (opinion_from_evidence(Evidence { positive: *p, negative: *n }, &params), *h))
            .collect();
        let e: Vec<f64> = ops.iter().map(|(o, _)| o.expectation()).collect();
        let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let r = combine_opinions(&ops, &params).unwrap();
        prop_assert!(r >= lo - 1e-12 && r <= hi + 1e-12);
    }

    #[test]
    fn beta_matches_closed_form(seed: u64, len in 0usize..200) {
        let events = random_history(&mut ChaCha8Rng::seed_from_u64(seed), len, 100, 8);
        let (a, b) = count_evidence(&events);
        let expected = (a + 1.0) / (a + b + 2.0);
        prop_assert!((reputation_beta(&events, 100, 1.0) - expected).abs() <= 1e-12);
        let engine = Engine::new(Model::Beta);
        prop_assert!((engine.score(&evidence_of(&events, 1.0), 100) - expected).abs() <= 1e-12);
    }

    #[test]
    fn accumulated_evidence_matches_event_sum(seed: u64, len in 1usize..200, fade in 0.5f64..=1.0) {
        let events = random_history(&mut ChaCha8Rng::seed_from_u64(seed), len, 60, 8);
        let now = events.last().unwrap().round + 3;
        let direct = decayed_evidence(&events, now, fade);
        let acc = evidence_of(&events, fade).pooled_at(now, fade);
        prop_assert!((direct.positive - acc.positive).abs() <= 1e-9 * (1.0 + direct.positive));
        prop_assert!((direct.negative - acc.negative).abs() <= 1e-9 * (1.0 + direct.negative));
        prop_assert!((beta_score(direct) - beta_score(acc)).abs() <= 1e-9);
    }

    #[test]
    fn single_appends_move_scores_the_right_way(seed: u64, len in 0usize..150, hops in 1u32..10, model_ix in 0usize..3) {
        let engine = Engine::new(Model::ALL[model_ix]);
        let fade = engine.fade();
        let events = random_history(&mut ChaCha8Rng::seed_from_u64(seed), len, 50, 8);
        let now = events.last().map_or(0, |e| e.round);
        let base = evidence_of(&events, fade);
        let before = engine.score(&base, now);
        let mut up = base.clone();
        up.add(Interaction { round: now, positive: true, hops }, fade);
        let mut down = base;
        down.add(Interaction { round: now, positive: false, hops }, fade);
        prop_assert!(engine.score(&up, now) >= before);
        prop_assert!(engine.score(&down, now) <= before);
    }

    #[test]
    fn latency_scales_with_link_rate(mean in 1.0f64..100.0, max in 1u32..100, fanin in 0.0f64..=1.0, p_ix in 0usize..4) {
        let sizes = MessageSizes::for_scale(&Preset::ALL[p_ix].params(), 1024);
        let hops = HopSummary { mean_hops: mean, max_verifier_hops: max, reputation_fanin: fanin };
        let t4 = round_latency(&sizes, NetworkGen::G4, &hops).total();
        let t5 = round_latency(&sizes, NetworkGen::G5, &hops).total();
        let t6 = round_latency(&sizes, NetworkGen::G6, &hops).total();
        prop_assert!((t4 / t5 - 50.0).abs() <= 1e-9);
        prop_assert!((t5 / t6 - 200.0).abs() <= 1e-9);
    }

    #[test]
    fn colluder_selection_is_exact(n in 1usize..3000, f in 0.0f64..=1.0, seed: u64) {
        let ues: Vec<UeId> = (0..n as u32).map(UeId).collect();
        let plan = select_colluders(&ues, f, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(plan.len(), colluder_count(n, f));
        prop_assert_eq!(plan.len(), ((f * n as f64).round() as usize).min(n));
        prop_assert!(plan.colluders.iter().all(|u| (u.0 as usize) < n));
    }

    #[test]
    fn feedback_reports_tampering_unless_colluding(seed: u64, n in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records: Vec<_> = (0..n).map(|_| random_record(&mut rng, 4)).collect();
        for (i, r) in records.iter_mut().enumerate() {
            r.producer = UeId(i as u32);
            r.tampered = rand::Rng::gen_bool(&mut rng, 0.5);
        }
        let colluders: Vec<bool> = (0..n).map(|_| rand::Rng::gen_bool(&mut rng, 0.3)).collect();
        let hops = vec![2; n];
        let block = Block::draft(1, 0, MinerId(0), records.clone(), vec![]);
        let mut ledger = InteractionLedger::new();
        let events = feedback_phase(&block, &colluders, &hops, 4, &mut ledger).unwrap();
        for ((ue, ev), rec) in events.iter().zip(&records) {
            prop_assert_eq!(ev.positive, colluders[ue.index()] || !rec.tampered);
        }
        prop_assert_eq!(ledger.event_count(), n);
    }

    #[test]
    fn online_detector_matches_offline(traj in prop::collection::vec(0.0f64..1.0, 0..100), active in prop::collection::vec(any::<bool>(), 100)) {
        let offline = detect(&traj, &active, 0.5);
        let mut d = Detector::new(0.5);
        let online = traj.iter().zip(&active).enumerate().find_map(|(i, (r, a))| d.observe(i as u64, *r, *a));
        prop_assert_eq!(offline, online);
    }
}

/// Malicious rounds 0..200 built span by span, independently of the
/// closed-form schedule.
#[test]
fn behavior_schedule_table() {
    let mut osc = vec![false; 20];
    while osc.len() < 200 {
        osc.extend([true; 15]);
        osc.extend([false; 5]);
    }
    for r in 0..200u64 {
        assert_eq!(is_malicious(&BehaviorKind::OSCILLATING, r), osc[r as usize], "oscillating round {r}");
        assert_eq!(is_malicious(&BehaviorKind::LATE_ONSET, r), r >= 20, "late onset round {r}");
        assert!(!is_malicious(&BehaviorKind::AlwaysHonest, r));
    }
}

#[test]
fn quorum_boundary_exhaustive() {
    for n in 1..=300 {
        for a in 0..=n {
            assert!(quorum_matches(n, a), "n={n} a={a}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scenarios_are_deterministic(seed in 0u64..1_000_000, c_ix in 0usize..3, g_ix in 0usize..3) {
        let mut cfg = ScenarioConfig::new(Preset::Small, NetworkGen::ALL[g_ix]);
        cfg.collusion = [0.25, 0.33, 0.5][c_ix];
        cfg.seed = seed;
        let a = run_scenario_with(&cfg, ExecMode::Sequential).unwrap();
        let b = run_scenario_with(&cfg, ExecMode::Sequential).unwrap();
        let c = run_scenario_with(&cfg, ExecMode::Parallel).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
        prop_assert!(a.chain_valid);
    }
}
