//! Randomised invariants, shared by the `props` and `acceptance` targets.

#![allow(dead_code)]

pub mod bench;
pub mod model;
pub mod qrs;
pub mod recovery;
pub mod sensing;
pub mod signal;

use proptest::test_runner::{Config, RngSeed};

/// Cases per property.
pub const CASES: u32 = 200;

/// Fixed-seed runner so every run draws the same cases.
pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(0x6765_6e63_7321),
        failure_persistence: None,
        ..Config::default()
    }
}

macro_rules! suite {
    ($($module:ident::$name:ident),* $(,)?) => {
        /// Every property as `(module::name, runner)`; a runner panics on a
        /// counterexample.
        pub const ALL: &[(&str, fn())] = &[
            $((concat!(stringify!($module), "::", stringify!($name)), $module::$name)),*
        ];

        #[cfg(test)]
        mod run {
            $(
                #[test]
                fn $name() {
                    super::$module::$name()
                }
            )*
        }
    };
}

suite! {
    signal::synthesis_is_a_function_of_the_spec,
    signal::truth_sits_on_local_maxima,
    signal::resample_round_trip_keeps_slow_sinusoids,
    qrs::cascade_is_linear,
    qrs::matrix_equals_stream,
    qrs::canonical_highpass_rejects_dc,
    qrs::zero_prefix_shifts_output,
    qrs::detections_respect_refractory,
    sensing::entries_are_signed_inverse_sqrt_m,
    sensing::measure_is_linear,
    sensing::effective_matrix_associates,
    sensing::ratio_picks_rounded_m,
    recovery::synthesis_then_analysis_is_identity,
    recovery::omp_residuals_never_grow,
    recovery::omp_recovers_sparse_vectors,
    recovery::filtered_recovery_cost_tracks_plain,
    model::rendered_beat_peaks_at_centre,
    model::reconstruction_keeps_its_peaks,
    model::steady_rhythm_round_trips,
    model::zero_tolerance_reproduces_every_interval,
    model::looser_tolerances_send_less,
    bench::cs_ratio_follows_from_the_record,
    bench::f1_of_a_list_with_itself_is_one,
    bench::fewer_macs_buy_more_frames,
}
