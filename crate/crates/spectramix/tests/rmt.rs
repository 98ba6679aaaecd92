use spectramix::eig::{hermitian_eigensystem, unitary_eigenphases};
use spectramix::rmt::{
    bgs_spacing_check, deduplicate_kramers, haar_transform, invariance_statistic,
    invariance_test, qr_decompose, quasienergy_spacings, randomness_test, sample_ensemble,
    spacing_test, surmise_cdf, unfold_spectrum, wigner_surmise, EnsembleKind, MatrixSample,
    UnfoldMethod,
};
use spectramix::stats::{ks_distance, sample_variance};
use spectramix::{seeded_rng, C64, CMat};
use std::f64::consts::PI;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn goe_batch(count: usize, n: usize, seed: u64) -> Vec<MatrixSample> {
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| sample_ensemble(EnsembleKind::Goe, n, &mut rng).unwrap()).collect()
}

/// symmetric matrices with uniform [-1,1] entries: not Gaussian, but exactly
/// as symmetric as a GOE draw
fn uniform_symmetric_batch(count: usize, n: usize, seed: u64) -> Vec<MatrixSample> {
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| {
            let mut m = CMat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let x = C64::new(rng.uniform_in(-1.0, 1.0), 0.0);
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            MatrixSample { kind: EnsembleKind::Goe, n, matrix: m }
        })
        .collect()
}

#[test]
fn surmise_is_normalized_with_unit_mean() {
    for beta in [1usize, 2, 4] {
        let p = |s: f64| wigner_surmise(beta, s).unwrap();
        let total = simpson(p, 0.0, 10.0, 20000);
        let mean = simpson(|s| s * p(s), 0.0, 10.0, 20000);
        assert!((total - 1.0).abs() < 1e-10, "beta {beta}: integral {total}");
        assert!((mean - 1.0).abs() < 1e-10, "beta {beta}: mean {mean}");
        assert_eq!(p(0.0), 0.0, "level repulsion at s = 0");
    }
    assert!(wigner_surmise(3, 1.0).is_err());
    assert!(wigner_surmise(0, 1.0).is_err());
    assert!(wigner_surmise(1, -0.1).is_err());
}

#[test]
fn surmise_peak_value_for_orthogonal_class() {
    let p = wigner_surmise(1, 1.0).unwrap();
    assert!((p - 0.7161).abs() < 5e-4, "P_1(1) = {p}");
    assert!((p - (PI / 2.0) * (-PI / 4.0).exp()).abs() < 1e-15);
}

#[test]
fn surmise_cdf_matches_quadrature() {
    for beta in [1usize, 2, 4] {
        assert_eq!(surmise_cdf(beta, 0.0).unwrap(), 0.0);
        assert!((surmise_cdf(beta, 10.0).unwrap() - 1.0).abs() < 1e-10);
        let mut prev = 0.0;
        for k in 1..=20 {
            let s = 0.25 * k as f64;
            let cdf = surmise_cdf(beta, s).unwrap();
            let quad = simpson(|x| wigner_surmise(beta, x).unwrap(), 0.0, s, 4000);
            assert!((cdf - quad).abs() < 1e-9, "beta {beta} s {s}: {cdf} vs {quad}");
            assert!(cdf >= prev);
            prev = cdf;
        }
    }
    assert!(surmise_cdf(5, 1.0).is_err());
}

#[test]
fn goe_samples_are_symmetric_with_standard_variances() {
    let samples = goe_batch(10_000, 8, 11);
    let mut h00 = Vec::with_capacity(samples.len());
    let mut h01 = Vec::with_capacity(samples.len());
    for s in &samples {
        h00.push(s.matrix[(0, 0)].re);
        h01.push(s.matrix[(0, 1)].re);
    }
    for s in samples.iter().take(100) {
        let m = &s.matrix;
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m[(i, j)].im, 0.0);
                assert_eq!(m[(i, j)].re, m[(j, i)].re, "symmetry is exact by construction");
            }
        }
    }
    let v_diag = sample_variance(&h00);
    let v_off = sample_variance(&h01);
    assert!((v_diag - 1.0).abs() < 0.05, "diagonal variance {v_diag}");
    assert!((v_off - 0.5).abs() < 0.03, "off-diagonal variance {v_off}");
    assert!(sample_ensemble(EnsembleKind::Goe, 1, &mut seeded_rng(0)).is_err());
}

#[test]
fn gue_samples_are_hermitian_with_standard_variances() {
    let mut rng = seeded_rng(12);
    let mut d_re = Vec::new();
    let mut o_re = Vec::new();
    let mut o_im = Vec::new();
    for _ in 0..5000 {
        let s = sample_ensemble(EnsembleKind::Gue, 8, &mut rng).unwrap();
        assert_eq!(s.matrix.hermitian_defect(), 0.0);
        assert_eq!(s.matrix[(3, 3)].im, 0.0);
        d_re.push(s.matrix[(0, 0)].re);
        o_re.push(s.matrix[(0, 1)].re);
        o_im.push(s.matrix[(0, 1)].im);
    }
    assert!((sample_variance(&d_re) - 1.0).abs() < 0.06);
    assert!((sample_variance(&o_re) - 0.5).abs() < 0.04);
    assert!((sample_variance(&o_im) - 0.5).abs() < 0.04);
}

#[test]
fn gse_samples_have_quaternion_structure_and_kramers_pairs() {
    let mut rng = seeded_rng(13);
    let s = sample_ensemble(EnsembleKind::Gse, 4, &mut rng).unwrap();
    let m = &s.matrix;
    assert_eq!(m.nrows(), 8, "stored matrix is 2n x 2n");
    assert_eq!(m.hermitian_defect(), 0.0);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(m[(i + 4, j + 4)], m[(i, j)].conj());
            assert_eq!(m[(i + 4, j)], -m[(i, j + 4)].conj());
        }
    }
    let eig = hermitian_eigensystem(m).unwrap();
    let mut gaps = Vec::new();
    for k in 0..4 {
        gaps.push((eig.values[2 * k + 1] - eig.values[2 * k]).abs());
    }
    let max_gap = gaps.iter().cloned().fold(0.0f64, f64::max);
    assert!(max_gap < 1e-8, "Kramers pair gap {max_gap}");

    let collapsed = deduplicate_kramers(&eig.values).unwrap();
    assert_eq!(collapsed.len(), 4);
    for k in 0..4 {
        let mid = 0.5 * (eig.values[2 * k] + eig.values[2 * k + 1]);
        assert!((collapsed[k] - mid).abs() < 1e-14);
    }
    assert!(deduplicate_kramers(&eig.values[..3]).is_err(), "odd length has no pairing");

    // entry variances on the n=2 blocks: diagonal 1, independent components 1/2
    let mut a00 = Vec::new();
    let mut a01 = Vec::new();
    let mut b01 = Vec::new();
    for _ in 0..10_000 {
        let s = sample_ensemble(EnsembleKind::Gse, 2, &mut rng).unwrap();
        a00.push(s.matrix[(0, 0)].re);
        a01.push(s.matrix[(0, 1)].re);
        b01.push(s.matrix[(0, 3)].re);
    }
    assert!((sample_variance(&a00) - 1.0).abs() < 0.06);
    assert!((sample_variance(&a01) - 0.5).abs() < 0.04);
    assert!((sample_variance(&b01) - 0.5).abs() < 0.04);
}

#[test]
fn haar_transforms_match_their_symmetry_class() {
    let mut rng = seeded_rng(17);
    let q = haar_transform(EnsembleKind::Goe, 16, &mut rng).unwrap();
    assert!(q.unitarity_defect() < 1e-12, "orthogonal defect {}", q.unitarity_defect());
    assert_eq!(q.max_abs(), q.data().iter().map(|z| z.re.abs()).fold(0.0, f64::max));
    for z in q.data() {
        assert_eq!(z.im, 0.0, "orthogonal transform stays real");
    }

    let u = haar_transform(EnsembleKind::Gue, 16, &mut rng).unwrap();
    assert!(u.unitarity_defect() < 1e-12);

    let n = 8;
    let sp = haar_transform(EnsembleKind::Gse, n, &mut rng).unwrap();
    assert_eq!(sp.nrows(), 2 * n);
    assert!(sp.unitarity_defect() < 1e-12);
    // U^T J U = J with J the standard antisymmetric unit
    let mut j = CMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, k + n)] = C64::new(1.0, 0.0);
        j[(k + n, k)] = C64::new(-1.0, 0.0);
    }
    let form = sp.transpose().mul(&j.mul(&sp));
    assert!(form.sub(&j).max_abs() < 1e-12, "symplectic defect {}", form.sub(&j).max_abs());

    assert!(haar_transform(EnsembleKind::Gue, 1, &mut rng).is_err());
}

#[test]
fn haar_eigenphases_uniform_only_after_phase_correction() {
    let uniform_cdf = |phi: f64| (phi + PI) / (2.0 * PI);
    let mut rng = seeded_rng(19);
    let n = 64;
    let samples = 500;

    let mut corrected = Vec::with_capacity(samples * n);
    let mut raw = Vec::with_capacity(samples * n);
    for _ in 0..samples {
        let u = haar_transform(EnsembleKind::Gue, n, &mut rng).unwrap();
        corrected.extend(unitary_eigenphases(&u).unwrap().phases);

        let g = CMat::from_fn(n, n, |_, _| rng.normal_c());
        let (q, _) = qr_decompose(&g).unwrap();
        raw.extend(unitary_eigenphases(&q).unwrap().phases);
    }
    let crit = 1.63 / ((samples * n) as f64).sqrt();
    let d_corrected = ks_distance(&corrected, uniform_cdf).unwrap();
    let d_raw = ks_distance(&raw, uniform_cdf).unwrap();
    assert!(d_corrected < crit, "corrected {d_corrected} vs critical {crit}");
    assert!(d_raw > crit, "uncorrected QR should show its diagonal bias, got {d_raw}");
}

#[test]
fn qr_factors_reconstruct_input() {
    let mut rng = seeded_rng(23);
    let a = CMat::from_fn(16, 16, |_, _| rng.normal_c());
    let (q, r) = qr_decompose(&a).unwrap();
    assert!(q.unitarity_defect() < 1e-13);
    for i in 0..16 {
        for j in 0..i {
            assert_eq!(r[(i, j)], C64::new(0.0, 0.0), "strict lower triangle");
        }
    }
    let defect = q.mul(&r).sub(&a).max_abs();
    assert!(defect < 1e-13 * a.max_abs(), "reconstruction defect {defect}");

    let b = CMat::from_fn(8, 8, |_, _| C64::new(rng.normal(), 0.0));
    let (qb, rb) = qr_decompose(&b).unwrap();
    for z in qb.data().iter().chain(rb.data()) {
        assert_eq!(z.im, 0.0, "real input factors stay real");
    }
}

#[test]
fn randomness_screen_accepts_gaussian_samples() {
    let samples = goe_batch(10_000, 8, 29);
    let mut rng = seeded_rng(30);
    let (pearson, chi2) = randomness_test(&samples, &mut rng).unwrap();
    assert!(pearson.pass, "max |r| = {}", pearson.statistic);
    assert!(pearson.statistic < 0.04);
    assert_eq!(pearson.threshold, 4.0 / (10_000f64).sqrt());
    assert_eq!(pearson.samples, 10_000);
    assert!(chi2.pass, "chi2 = {} vs {}", chi2.statistic, chi2.threshold);
}

#[test]
fn randomness_screen_flags_injected_correlation() {
    let mut samples = goe_batch(2000, 8, 31);
    for s in &mut samples {
        let dup = s.matrix[(0, 0)];
        s.matrix[(0, 1)] = dup;
        s.matrix[(1, 0)] = dup;
    }
    let mut rng = seeded_rng(32);
    let (pearson, _) = randomness_test(&samples, &mut rng).unwrap();
    assert!(!pearson.pass);
    assert!(pearson.statistic > 0.99, "duplicated entries correlate perfectly");
}

#[test]
fn randomness_screen_needs_a_batch() {
    let mut rng = seeded_rng(33);
    let one = goe_batch(1, 8, 33);
    assert!(randomness_test(&one, &mut rng).is_err());
    let few = goe_batch(999, 8, 34);
    assert!(randomness_test(&few, &mut rng).is_err());
    assert!(randomness_test(&[], &mut rng).is_err());
}

#[test]
fn invariance_holds_for_gaussian_orthogonal() {
    let samples = goe_batch(10_000, 8, 37);
    let mut rng = seeded_rng(38);
    let report = invariance_test(&samples, EnsembleKind::Goe, &mut rng).unwrap();
    let expected_threshold = (2f64).sqrt() * 1.63 / (10_000f64).sqrt();
    assert!((report.threshold - expected_threshold).abs() < 1e-15);
    assert!(report.pass, "statistic {} vs {}", report.statistic, report.threshold);
}

#[test]
fn invariance_fails_for_uniform_entries() {
    let samples = uniform_symmetric_batch(10_000, 8, 39);
    let mut rng = seeded_rng(40);
    let report = invariance_test(&samples, EnsembleKind::Goe, &mut rng).unwrap();
    assert!(!report.pass);
    assert!(report.statistic > 0.04, "rotation gaussianizes uniform entries: {}", report.statistic);
}

#[test]
fn identity_conjugation_gives_zero_statistic() {
    let samples = goe_batch(1500, 8, 41);
    let stat = invariance_statistic(&samples, &samples).unwrap();
    assert_eq!(stat, 0.0, "conjugating every sample by the identity changes nothing");
}

#[test]
fn null_calibration_and_adversarial_power() {
    let master = seeded_rng(20260815);
    let mut pearson_pass = 0usize;
    let mut chi2_pass = 0usize;
    let mut invariance_pass = 0usize;
    let mut correlation_caught = 0usize;
    let mut uniform_caught = 0usize;
    for rep in 0..100 {
        let mut rng = master.derive(rep);
        let samples: Vec<_> =
            (0..1000).map(|_| sample_ensemble(EnsembleKind::Goe, 8, &mut rng).unwrap()).collect();
        let (p, c) = randomness_test(&samples, &mut rng).unwrap();
        pearson_pass += p.pass as usize;
        chi2_pass += c.pass as usize;

        let mut poisoned = samples;
        for s in &mut poisoned {
            let dup = s.matrix[(0, 0)];
            s.matrix[(0, 1)] = dup;
            s.matrix[(1, 0)] = dup;
        }
        let (p_bad, _) = randomness_test(&poisoned, &mut rng).unwrap();
        correlation_caught += !p_bad.pass as usize;

        let null: Vec<_> =
            (0..2000).map(|_| sample_ensemble(EnsembleKind::Goe, 8, &mut rng).unwrap()).collect();
        let inv = invariance_test(&null, EnsembleKind::Goe, &mut rng).unwrap();
        invariance_pass += inv.pass as usize;

        let uniform = uniform_symmetric_batch(5000, 8, 7000 + rep);
        let bad = invariance_test(&uniform, EnsembleKind::Goe, &mut rng).unwrap();
        uniform_caught += !bad.pass as usize;
    }
    assert!(pearson_pass >= 95, "pearson null pass rate {pearson_pass}/100");
    assert!(chi2_pass >= 95, "chi2 null pass rate {chi2_pass}/100");
    assert!(invariance_pass >= 95, "invariance null pass rate {invariance_pass}/100");
    assert_eq!(correlation_caught, 100, "injected correlation must always be caught");
    assert_eq!(uniform_caught, 100, "uniform-entry ensemble must always be caught");
}

#[test]
fn unfolding_equally_spaced_levels_gives_unit_spacings() {
    let levels: Vec<f64> = (0..64).map(|k| k as f64 * 10.0 / 63.0).collect();
    let s = unfold_spectrum(&levels, UnfoldMethod::Polynomial(7)).unwrap();
    assert_eq!(s.len(), 63);
    let worst = s.iter().map(|x| (x - 1.0).abs()).fold(0.0f64, f64::max);
    assert!(worst < 1e-8, "equally spaced levels unfold to unit spacings, worst {worst}");

    let goe = goe_batch(1, 64, 43);
    let eig = hermitian_eigensystem(&goe[0].matrix).unwrap();
    for method in [UnfoldMethod::Semicircle, UnfoldMethod::Polynomial(7)] {
        let s = unfold_spectrum(&eig.values, method).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 1.0).abs() < 1e-12, "rescaled mean {mean}");
    }

    assert!(unfold_spectrum(&levels[..15], UnfoldMethod::Semicircle).is_err());
    let mut unsorted = levels.clone();
    unsorted.swap(3, 40);
    assert!(unfold_spectrum(&unsorted, UnfoldMethod::Polynomial(7)).is_err());
    assert!(unfold_spectrum(&levels, UnfoldMethod::Polynomial(0)).is_err());
}

/// central-bulk spacing pool from repeated spectra, rescaled to unit mean
fn pooled_bulk_spacings(matrices: usize, n: usize, method: UnfoldMethod, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    let mut pool = Vec::with_capacity(matrices * n / 2);
    for _ in 0..matrices {
        let s = sample_ensemble(EnsembleKind::Goe, n, &mut rng).unwrap();
        let eig = hermitian_eigensystem(&s.matrix).unwrap();
        let spacings = unfold_spectrum(&eig.values, method).unwrap();
        pool.extend_from_slice(&spacings[n / 4..3 * n / 4]);
    }
    let mean = pool.iter().sum::<f64>() / pool.len() as f64;
    pool.iter_mut().for_each(|s| *s /= mean);
    pool
}

#[test]
fn goe_bulk_spacings_match_surmise_for_both_unfoldings() {
    for (method, seed) in [(UnfoldMethod::Semicircle, 47), (UnfoldMethod::Polynomial(7), 47)] {
        let pool = pooled_bulk_spacings(200, 200, method, seed);
        assert_eq!(pool.len(), 20_000);
        let report = spacing_test(&pool, 1).unwrap();
        assert_eq!(report.threshold, 0.05);
        assert!(
            report.pass && report.statistic < 0.03,
            "{method:?}: KS {} vs 0.05",
            report.statistic
        );
    }
}

#[test]
fn poisson_spacings_fail_the_surmise_test() {
    let mut rng = seeded_rng(53);
    let spacings: Vec<f64> = (0..20_000).map(|_| -rng.uniform().ln()).collect();
    let report = spacing_test(&spacings, 1).unwrap();
    assert!(!report.pass);
    assert!(report.statistic > 0.1, "exponential vs level-repulsion: KS {}", report.statistic);

    assert!(spacing_test(&[], 1).is_err());
    assert!(spacing_test(&[0.5; 2000], 3).is_err());
    let mut bad = spacings;
    bad[17] = -0.25;
    assert!(spacing_test(&bad, 1).is_err(), "negative spacing is corrupt input");
}

#[test]
fn quasienergy_spacings_have_unit_mean() {
    let phases = [-3.0, -1.0, 0.0, 2.0];
    let mut s = quasienergy_spacings(&phases).unwrap();
    assert_eq!(s.len(), 4);
    s.sort_by(f64::total_cmp);
    let scale = 4.0 / (2.0 * PI);
    let mut expected = [2.0 * scale, 1.0 * scale, 2.0 * scale, (2.0 * PI - 5.0) * scale];
    expected.sort_by(f64::total_cmp);
    for (a, b) in s.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    let mut rng = seeded_rng(59);
    let many: Vec<f64> = (0..777).map(|_| rng.uniform_in(-PI, PI)).collect();
    let s = quasienergy_spacings(&many).unwrap();
    assert_eq!(s.len(), 777);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!((mean - 1.0).abs() < 1e-12, "circular gaps always average to one: {mean}");
    assert!(s.iter().all(|x| *x >= 0.0));
    assert!(quasienergy_spacings(&[0.3]).is_err());
}

fn rotor_phases(lambda: f64, tau: f64) -> Vec<f64> {
    let mut config = spectramix::qkr::QkrConfig::new(512, lambda, tau, 0.2).unwrap();
    config.a2 = 0.5;
    config.theta2 = 0.7;
    let f = spectramix::qkr::build_floquet(&config).unwrap();
    spectramix::qkr::floquet_eigensystem(&f).unwrap().phases
}

#[test]
fn chaotic_rotor_quasienergies_repel_like_gaussian_levels() {
    let sets: Vec<Vec<f64>> =
        [1.0, 1.1, 1.3].iter().map(|&tau| rotor_phases(10.0, tau)).collect();
    let (surmise, poisson) = bgs_spacing_check(&sets).unwrap();
    assert_eq!(surmise.samples, 3 * 512);
    assert!(surmise.pass, "KS {} should beat {}", surmise.statistic, surmise.threshold);
    assert!(!poisson.pass);
    assert!(surmise.statistic < 0.05, "chaotic kick: {}", surmise.statistic);
    assert!(poisson.statistic > 0.15, "far from independent levels: {}", poisson.statistic);
}

#[test]
fn free_rotor_quasienergies_cluster_like_poisson() {
    let sets = vec![rotor_phases(0.0, 1.0)];
    let (surmise, poisson) = bgs_spacing_check(&sets).unwrap();
    assert!(poisson.pass, "integrable limit: {} vs {}", poisson.statistic, surmise.statistic);
    assert!(!surmise.pass);
    assert!(poisson.statistic < surmise.statistic);
}

#[test]
fn uniform_synthetic_phases_get_poisson_verdict() {
    let mut rng = seeded_rng(61);
    let phases: Vec<f64> = (0..1024).map(|_| rng.uniform_in(-PI, PI)).collect();
    let (surmise, poisson) = bgs_spacing_check(&[phases]).unwrap();
    assert!(poisson.pass && !surmise.pass);
    assert!(surmise.statistic > 0.15, "ordered uniform points repel nothing");
    assert!(poisson.statistic < 0.06);

    let short: Vec<f64> = (0..100).map(|_| rng.uniform_in(-PI, PI)).collect();
    assert!(bgs_spacing_check(&[short]).is_err());
}
