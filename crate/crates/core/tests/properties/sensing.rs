use gencs::qrs::{centered_filter_matrix, filter_matrix, FilterVariant};
use gencs::sensing::{bernoulli_matrix, effective_matrix, measure, measurements_for_ratio};
use gencs::signal::SampledSignal;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(m, n)` with `0 < m ≤ n`.
fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..160).prop_flat_map(|n| (1..=n, Just(n)))
}

fn frame(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

pub fn entries_are_signed_inverse_sqrt_m() {
    proptest!(super::config(), |((m, n) in shape(), seed in any::<u64>())| {
        let phi = bernoulli_matrix::<f64>(m, n, seed).unwrap();
        let v = 1.0 / (m as f64).sqrt();
        prop_assert!(phi.entries.as_slice().iter().all(|&e| e == v || e == -v));
        prop_assert_eq!(&phi, &bernoulli_matrix::<f64>(m, n, seed).unwrap());
        for i in 0..m {
            let sq: f64 = phi.entries.row(i).iter().map(|e| e * e).sum();
            prop_assert!((sq - n as f64 / m as f64).abs() <= 1e-12 * n as f64, "row {} norm² {}", i, sq);
        }
    });
}

pub fn measure_is_linear() {
    proptest!(super::config(), |((m, n) in shape(), seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64)| {
        let phi = bernoulli_matrix::<f64>(m, n, seed).unwrap();
        let (x, y) = (frame(n, seed ^ 1), frame(n, seed ^ 2));
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let sig = |v: Vec<f64>| SampledSignal::new(v, 200.0).unwrap();
        let ym = measure(&phi, &sig(mix), 0).unwrap().values;
        let yx = measure(&phi, &sig(x), 0).unwrap().values;
        let yy = measure(&phi, &sig(y), 0).unwrap().values;
        for i in 0..m {
            prop_assert!((ym[i] - (a * yx[i] + b * yy[i])).abs() <= 1e-9);
        }
    });
}

pub fn effective_matrix_associates() {
    proptest!(super::config(), |(m_frac in 0.05..1.0f64, n in 33usize..256, seed in any::<u64>(), centred in any::<bool>())| {
        let m = ((n as f64 * m_frac) as usize).max(1);
        let phi = bernoulli_matrix::<f64>(m, n, seed).unwrap();
        let f = if centred {
            centered_filter_matrix(n, FilterVariant::Canonical).unwrap()
        } else {
            filter_matrix(n, FilterVariant::Canonical).unwrap()
        };
        let a0 = effective_matrix(&phi, &f).unwrap();
        let x = frame(n, seed);
        let lhs = a0.matvec(&x).unwrap();
        let rhs = phi.entries.matvec(&f.apply(&x).unwrap()).unwrap();
        for (p, q) in lhs.iter().zip(&rhs) {
            prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1.0), "{} vs {}", p, q);
        }
    });
}

pub fn ratio_picks_rounded_m() {
    proptest!(super::config(), |(n in 1usize..2000, cr in 1.0..50.0f64)| {
        let ideal = (n as f64 / cr).round() as usize;
        match measurements_for_ratio(n, cr) {
            Ok(m) => prop_assert!(m == ideal && m >= 1 && m <= n),
            Err(_) => prop_assert_eq!(ideal, 0),
        }
    });
}
