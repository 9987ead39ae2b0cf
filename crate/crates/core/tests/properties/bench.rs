use gencs::bench::{lifetime_proxy, BenchRecord, RunMetrics};
use gencs::metrics::{compression_ratio, rpeak_f1};
use gencs::pipeline::{CsCodec, CsConfig, Method};
use proptest::prelude::*;

fn record(method: Method, cr: f64, seed: u64, mac_count: u64, f1: f64) -> BenchRecord {
    BenchRecord {
        method,
        cr,
        seed,
        metrics: Some(RunMetrics {
            rpeak_f1: f1,
            rr_rmse_s: Some(0.0),
            prd_pct: 10.0,
            mac_count,
            transmitted_bits: 1,
            wall_time_s: 0.0,
            n_samples: 12_000,
            frames: 30,
        }),
    }
}

pub fn cs_ratio_follows_from_the_record() {
    proptest!(super::config(), |(n in prop_oneof![Just(256usize), Just(400), Just(512)], m_frac in 0.02..1.0f64, frames in 1usize..500, seed in any::<u64>())| {
        let m = ((n as f64 * m_frac) as usize).max(1);
        let cfg = CsConfig { frame_len: n, ..CsConfig::default() };
        let codec = CsCodec::<f64>::plain(m, seed, &cfg).unwrap();
        let bits = codec.transmitted_bits(frames, cfg.measurement_bits);
        let cr = compression_ratio((frames * n) as u64, cfg.bits_per_sample, bits).unwrap();
        let expected = n as f64 / m as f64 * (cfg.bits_per_sample as f64 / cfg.measurement_bits as f64);
        prop_assert_eq!(cr, expected);
    });
}

pub fn f1_of_a_list_with_itself_is_one() {
    proptest!(super::config(), |(gaps in prop::collection::vec(1usize..400, 1..200), start in 0usize..1000, tol_s in 0.001..0.2f64)| {
        let peaks: Vec<usize> = gaps
            .iter()
            .scan(start, |p, g| {
                *p += g;
                Some(*p)
            })
            .collect();
        let s = rpeak_f1(&peaks, &peaks, tol_s, 200.0).unwrap();
        prop_assert_eq!(s.f1, 1.0);
        prop_assert_eq!(s.true_positives, peaks.len());
    });
}

pub fn fewer_macs_buy_more_frames() {
    proptest!(super::config(), |(macs in prop::collection::vec(1u64..1_000_000_000, 2..12), budget in 1u64..u64::MAX / 2)| {
        let records: Vec<BenchRecord> = macs
            .iter()
            .enumerate()
            .map(|(i, &m)| record(Method::PlainCs, 2.0 + i as f64, 1, m, 0.9))
            .collect();
        let rows = lifetime_proxy(&records, budget).unwrap();
        prop_assert_eq!(rows.len(), macs.len());
        for (a, ma) in rows.iter().zip(&macs) {
            for (b, mb) in rows.iter().zip(&macs) {
                if ma < mb {
                    prop_assert!(a.frames_per_budget > b.frames_per_budget);
                }
            }
        }
    });
}
