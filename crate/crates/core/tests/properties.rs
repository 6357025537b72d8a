use proptest::prelude::*;

use crossdock::model::{CrossdockModel, FailureSpec, ModelConfig, ModelVariant};
use crossdock::sim::{EventKind, FutureEventList, ShiftSchedule, ShiftWindow, Subject};
use crossdock::stats::{half_width, summarize, SequentialState};
use crossdock::streams::{
    discrete_from_uniform, exponential_from_uniform, triangular_from_uniform, DistributionSpec,
};

fn variant() -> impl Strategy<Value = ModelVariant> {
    prop::sample::select(ModelVariant::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn events_dispatch_in_time_then_insertion_order(times in prop::collection::vec(0u8..20, 1..200)) {
        let mut fel = FutureEventList::new(f64::INFINITY);
        for (i, &t) in times.iter().enumerate() {
            fel.schedule(t as f64, EventKind::Arrival, Subject::Order(i as u64)).unwrap();
        }
        let mut last = (f64::NEG_INFINITY, 0u64);
        let mut n = 0;
        while let Some(ev) = fel.next_event() {
            prop_assert!(ev.time > last.0 || (ev.time == last.0 && ev.sequence > last.1));
            prop_assert_eq!(fel.now(), ev.time);
            last = (ev.time, ev.sequence);
            n += 1;
        }
        prop_assert_eq!(n, times.len());
    }

    #[test]
    fn horizon_is_inclusive(horizon in 1.0f64..100.0, offsets in prop::collection::vec(-5.0f64..5.0, 1..50)) {
        let mut fel = FutureEventList::new(horizon);
        for &o in &offsets {
            fel.schedule((horizon + o).max(0.0), EventKind::Arrival, Subject::System).unwrap();
        }
        fel.schedule(horizon, EventKind::EndReplication, Subject::System).unwrap();
        let mut seen = Vec::new();
        while let Some(ev) = fel.next_event() {
            seen.push(ev);
        }
        prop_assert!(seen.iter().all(|e| e.time <= horizon));
        prop_assert!(seen.iter().any(|e| e.kind == EventKind::EndReplication));
        let expected = offsets.iter().filter(|&&o| (horizon + o).max(0.0) <= horizon).count() + 1;
        prop_assert_eq!(seen.len(), expected);
    }

    #[test]
    fn scheduling_into_the_past_is_rejected(t in 1.0f64..100.0, back in 1e-9f64..1.0) {
        let mut fel = FutureEventList::new(f64::INFINITY);
        fel.schedule(t, EventKind::Arrival, Subject::System).unwrap();
        fel.next_event().unwrap();
        prop_assert!(fel.schedule(t - back, EventKind::Arrival, Subject::System).is_err());
    }

    #[test]
    fn triangular_stays_in_support(u in 0.0f64..1.0, a in 0.0f64..10.0, w1 in 0.0f64..5.0, w2 in 0.0f64..5.0) {
        let (min, mode, max) = (a, a + w1, a + w1 + w2);
        let x = triangular_from_uniform(u, min, mode, max);
        prop_assert!(x >= min && x <= max);
        let spec = DistributionSpec::Triangular { min, mode, max };
        if max > min {
            prop_assert!((spec.cdf(x) - u).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_inverts_its_cdf(u in 0.0f64..1.0, mean in 0.01f64..100.0) {
        let x = exponential_from_uniform(u, mean);
        prop_assert!(x >= 0.0);
        let spec = DistributionSpec::Exponential { mean };
        prop_assert!((spec.cdf(x) - u).abs() < 1e-9);
    }

    #[test]
    fn discrete_never_picks_zero_weight(u in 0.0f64..1.0, w in prop::collection::vec(prop::sample::select(vec![0.0, 0.1, 0.5, 1.0]), 5)) {
        prop_assume!(w.iter().sum::<f64>() > 0.0);
        let total: f64 = w.iter().sum();
        let norm: Vec<f64> = w.iter().map(|x| x / total).collect();
        let i = discrete_from_uniform(u, &norm);
        prop_assert!(norm[i] > 0.0);
    }

    #[test]
    fn advancing_on_shift_consumes_exactly_that_much(t in 0.0f64..5000.0, amount in 0.0f64..3000.0) {
        let s = ShiftSchedule::default();
        let end = s.advance_on_shift(t, amount);
        prop_assert!(end >= t);
        prop_assert!((s.on_shift_between(t, end) - amount).abs() < 1e-6);
    }

    #[test]
    fn on_shift_minutes_per_day(day in 0u32..30) {
        let s = ShiftSchedule::default();
        let from = day as f64 * 1440.0;
        prop_assert_eq!(s.on_shift_between(from, from + 1440.0), 960.0);
    }

    #[test]
    fn half_width_widens_with_confidence(sample in prop::collection::vec(-1e3f64..1e3, 2..60)) {
        let lo = half_width(&sample, 0.90).unwrap();
        let mid = half_width(&sample, 0.95).unwrap();
        let hi = half_width(&sample, 0.99).unwrap();
        prop_assert!(lo <= mid && mid <= hi);
    }

    #[test]
    fn running_state_matches_batch_summary(sample in prop::collection::vec(-1e4f64..1e4, 2..200)) {
        let state = SequentialState::from_sample(&sample);
        let batch = summarize(&sample).unwrap();
        let scale = 1.0 + batch.mean.abs();
        prop_assert!((state.mean().unwrap() - batch.mean).abs() <= 1e-9 * scale);
        let sd = batch.sd.unwrap();
        prop_assert!((state.sd().unwrap() - sd).abs() <= 1e-7 * (1.0 + sd));
        prop_assert!(batch.min <= batch.mean && batch.mean <= batch.max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replications_conserve_orders_and_minutes(
        variant in variant(),
        points in 1u32..5,
        skilled in 1u32..3,
        unskilled in 1u32..3,
        automated in 1u32..3,
        arrival_mean in 0.2f64..4.0,
        length in 100.0f64..3000.0,
        failures in any::<bool>(),
        night_shift in any::<bool>(),
        seed in any::<u64>(),
        rep in 0u64..1000,
    ) {
        let mut cfg = ModelConfig::for_variant(variant);
        cfg.picking_points = points;
        cfg.staffing.skilled = skilled;
        cfg.staffing.unskilled = unskilled;
        cfg.staffing.automated = automated;
        cfg.arrival = DistributionSpec::Exponential { mean: arrival_mean };
        cfg.replication_length_min = length;
        if failures {
            cfg.failure = Some(FailureSpec {
                up_mean_min: 120.0,
                repair: DistributionSpec::Triangular { min: 5.0, mode: 10.0, max: 20.0 },
            });
        }
        if night_shift {
            cfg.shifts.windows.insert(0, ShiftWindow { start_min: 0.0, duration_min: 120.0 });
        }
        let model = CrossdockModel::new(variant, cfg).unwrap();
        let r = model.run_replication(seed, rep).unwrap();
        prop_assert_eq!(r.orders_created, r.orders_disposed + r.orders_in_system);
        prop_assert_eq!(r.orders_by_type.iter().sum::<u64>(), r.orders_created);
        prop_assert_eq!(r.ledger.total_cost(), r.total_usage_cost);
        for rec in &r.ledger.records {
            prop_assert_eq!(rec.busy_min + rec.idle_min, rec.scheduled_min);
            prop_assert!(rec.busy_min >= 0.0 && rec.busy_min <= rec.scheduled_min);
            prop_assert!(rec.overtime_min >= 0.0);
        }
        prop_assert_eq!(model.run_replication(seed, rep).unwrap(), r);
    }
}
