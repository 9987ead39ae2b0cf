use gencs::linalg::Matrix;
use gencs::qrs::{centered_filter_matrix, FilterVariant};
use gencs::recovery::{dwt_matrix, omp, RecoveryDictionary, WaveletBasis, WaveletFamily};
use gencs::sensing::bernoulli_matrix;
use gencs::signal::{synthesize_ecg, SyntheticEcgSpec};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn family() -> impl Strategy<Value = WaveletFamily> {
    prop_oneof![Just(WaveletFamily::Haar), Just(WaveletFamily::Daubechies4)]
}

/// `(family, levels, n)` with `n` a power of two.
fn basis() -> impl Strategy<Value = WaveletBasis<f64>> {
    (family(), 3u32..10).prop_flat_map(|(f, p)| {
        (1..=p as usize).prop_map(move |l| WaveletBasis::new(f, l, 1 << p).unwrap())
    })
}

fn sparse(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for j in sample(rng, n, k) {
        let mag: f64 = rng.random_range(0.3..2.0);
        s[j] = if rng.random::<bool>() { mag } else { -mag };
    }
    s
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn synthesis_then_analysis_is_identity() {
    proptest!(super::config(), |(b in basis(), seed in any::<u64>())| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..b.n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let back = b.idwt(&b.dwt(&x).unwrap()).unwrap();
        let w = dwt_matrix(&b);
        let via_matrix = w.matvec(&w.matvec_transposed(&x).unwrap()).unwrap();
        for i in 0..b.n {
            prop_assert!((back[i] - x[i]).abs() < 1e-9);
            prop_assert!((via_matrix[i] - x[i]).abs() < 1e-9);
        }
    });
}

pub fn omp_residuals_never_grow() {
    proptest!(super::config(), |((m, n) in (4usize..48).prop_flat_map(|m| (Just(m), m..128)), k in 1usize..12, noise in 0.0..0.5f64, seed in any::<u64>())| {
        let a = bernoulli_matrix::<f64>(m, n, seed).unwrap().entries;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sparse(n, k.min(n), &mut rng);
        let mut y = a.matvec(&s).unwrap();
        for v in &mut y {
            *v += noise * rng.random_range(-1.0..1.0);
        }
        let sol = omp(&a, &y, m / 2, 0.0).unwrap();
        for w in sol.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", sol.residual_history);
        }
        for (j, &c) in sol.coefficients.iter().enumerate() {
            prop_assert!(c == 0.0 || sol.support.contains(&j));
        }
        let fit = a.matvec(&sol.coefficients).unwrap();
        let r: Vec<f64> = y.iter().zip(&fit).map(|(p, q)| p - q).collect();
        prop_assert!((norm(&r) - sol.residual_norm).abs() <= 1e-9);
    });
}

pub fn omp_recovers_sparse_vectors() {
    proptest!(super::config(), |(m in 24usize..64, p in 6u32..9, seed in any::<u64>())| {
        let n = (1usize << p).max(m);
        let k_max = (m as f64 / (2.0 * (n as f64).log2())).floor() as usize;
        prop_assume!(k_max >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0;
        for trial in 0..50u64 {
            let a: Matrix<f64> = bernoulli_matrix(m, n, seed.wrapping_add(trial)).unwrap().entries;
            let k = rng.random_range(1..=k_max);
            let s = sparse(n, k, &mut rng);
            let sol = omp(&a, &a.matvec(&s).unwrap(), m, 1e-12).unwrap();
            let err: Vec<f64> = sol.coefficients.iter().zip(&s).map(|(p, q)| p - q).collect();
            if norm(&err) <= 1e-6 * norm(&s) {
                hits += 1;
            }
        }
        prop_assert!(hits >= 45, "{} of 50", hits);
    });
}

pub fn filtered_recovery_cost_tracks_plain() {
    proptest!(super::config(), |(m in 20usize..200, support in 1usize..20, seed in any::<u64>(), offset in 0usize..1600, f in family())| {
        let n = 400;
        let (x, _) = synthesize_ecg(&SyntheticEcgSpec { noise_std: 0.01, hr_jitter: 0.05, ..SyntheticEcgSpec::clean(10.0, seed) }).unwrap();
        let frame = &x.samples()[offset..offset + n];
        let phi = bernoulli_matrix::<f64>(m, n, seed).unwrap();
        let basis = WaveletBasis::new(f, 5, 512).unwrap();
        let fm = centered_filter_matrix(n, FilterVariant::Canonical).unwrap();
        let support = support.min(m);

        let plain = RecoveryDictionary::plain(&phi, &basis).unwrap();
        let (_, ps) = plain.recover(&phi.entries.matvec(frame).unwrap(), support, 0.0).unwrap();
        let filtered = RecoveryDictionary::filtered(&phi, &fm, &basis).unwrap();
        let y = phi.entries.matvec(&fm.apply(frame).unwrap()).unwrap();
        let (_, fs) = filtered.recover(&y, support, 0.0).unwrap();
        let ratio = fs.mac_count as f64 / ps.mac_count as f64;
        prop_assert!((0.5..=2.0).contains(&ratio), "filtered {} plain {}", fs.mac_count, ps.mac_count);
    });
}
