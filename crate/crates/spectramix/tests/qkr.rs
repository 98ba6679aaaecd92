use num_complex::Complex64;
use spectramix::qkr::{
    build_floquet, fixed_point_defect, floquet_eigensystem, localization_length,
    momentum_eigenstate, momentum_spread, momentum_squared_observable, momentum_values,
    momentum_window_projector, propagate, quantum_correlation, quantum_factorization_defect,
    weak_limit, CorrelationScan, FloquetBasis, QkrConfig,
};
use spectramix::{seeded_rng, C64, CMat, DensityMatrix};

fn chaotic(n: usize, hbar: f64) -> QkrConfig {
    QkrConfig::new(n, 10.0, 1.0, hbar).unwrap()
}

fn random_pure(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = seeded_rng(seed);
    let v: Vec<C64> = (0..n).map(|_| rng.normal_c()).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn basis_of(config: &QkrConfig) -> (CMat, FloquetBasis) {
    let f = build_floquet(config).unwrap();
    let basis = floquet_eigensystem(&f).unwrap();
    (f, basis)
}

#[test]
fn free_floquet_is_momentum_diagonal() {
    let config = QkrConfig::new(8, 0.0, 0.7, 0.5).unwrap();
    let f = build_floquet(&config).unwrap();
    let ms = momentum_values(8);
    for j in 0..8 {
        for k in 0..8 {
            if j == k {
                let m = ms[j] as f64;
                let expect = Complex64::from_polar(1.0, -config.tau * config.hbar * m * m);
                assert!((f[(j, j)] - expect).norm() < 1e-12, "diag {j}: {}", f[(j, j)]);
            } else {
                assert!(f[(j, k)].norm() < 1e-12, "off-diag ({j},{k}) = {}", f[(j, k)]);
            }
        }
    }
}

#[test]
fn free_floquet_with_zero_period_is_identity() {
    let config = QkrConfig::new(16, 0.0, 0.0, 0.5).unwrap();
    let f = build_floquet(&config).unwrap();
    assert!(f.sub(&CMat::identity(16)).max_abs() < 1e-12);
}

#[test]
fn chaotic_floquet_is_unitary() {
    let f = build_floquet(&QkrConfig::new(256, 10.0, 1.0, 0.25).unwrap()).unwrap();
    let defect = f.unitarity_defect();
    assert!(defect < 1e-12, "unitarity defect {defect}");
}

#[test]
fn config_validation() {
    assert!(QkrConfig::new(12, 10.0, 1.0, 0.25).is_err()); // not a power of two
    assert!(QkrConfig::new(0, 10.0, 1.0, 0.25).is_err());
    assert!(QkrConfig::new(64, 10.0, 1.0, 0.0).is_err()); // hbar must be positive
    assert!(QkrConfig::new(64, -1.0, 1.0, 0.25).is_err());
    assert!(chaotic(64, 0.25).is_chaotic());
    assert!(!QkrConfig::new(64, 2.0, 1.0, 0.25).unwrap().is_chaotic());
}

#[test]
fn split_step_matches_matrix_power() {
    let config = chaotic(64, 0.25);
    let f = build_floquet(&config).unwrap();
    let psi0 = random_pure(64, 7);
    let split = propagate(&config, &psi0, 100).unwrap();
    let mut direct = psi0;
    for _ in 0..100 {
        direct = f.mul_vec(&direct);
    }
    let err = split
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    assert!(err < 1e-8, "split-step vs matrix power: {err}");
}

#[test]
fn eigensystem_reconstructs_floquet_operator() {
    let config = chaotic(64, 0.25);
    let (f, basis) = basis_of(&config);
    let n = basis.dim();
    let mut rebuilt = CMat::zeros(n, n);
    for k in 0..n {
        let phase = Complex64::from_polar(1.0, -basis.phases[k]);
        let v = basis.vectors.col(k);
        for i in 0..n {
            for j in 0..n {
                rebuilt[(i, j)] += phase * v[i] * v[j].conj();
            }
        }
    }
    assert!(f.sub(&rebuilt).max_abs() < 1e-10);
    for w in basis.phases.windows(2) {
        assert!(w[0] <= w[1], "phases not ascending");
    }
    assert!(basis.phases.iter().all(|p| *p > -std::f64::consts::PI
        && *p <= std::f64::consts::PI));
}

#[test]
fn free_eigenvectors_live_on_momentum_pairs() {
    // lambda = 0: H = L^2 is diagonal, so eigenvectors may only mix the
    // degenerate +-m pair
    let config = QkrConfig::new(32, 0.0, 0.73, 0.5).unwrap();
    let (_, basis) = basis_of(&config);
    for k in 0..32 {
        let v = basis.vectors.col(k);
        let support: Vec<usize> = (0..32).filter(|j| v[*j].norm() > 1e-8).collect();
        assert!(support.len() <= 2, "eigenvector {k} spread over {support:?}");
        if support.len() == 2 {
            assert_eq!((32 - support[0]) % 32, support[1] % 32, "support {support:?}");
        }
    }
}

#[test]
fn weak_limit_fixes_floquet_eigenstates_and_mixed_state() {
    let config = chaotic(32, 0.25);
    let (_, basis) = basis_of(&config);
    let pure = DensityMatrix::from_pure(&basis.vectors.col(3)).unwrap();
    let wl = weak_limit(&pure, &basis).unwrap();
    assert!(wl.density().mat().sub(pure.mat()).max_abs() < 1e-12);

    let mixed = DensityMatrix::maximally_mixed(32);
    let wl = weak_limit(&mixed, &basis).unwrap();
    assert!(wl.density().mat().sub(mixed.mat()).max_abs() < 1e-12);
}

#[test]
fn weak_limit_invariants_hold_for_generic_state() {
    let config = chaotic(64, 0.25);
    let n = config.n;
    let (f, basis) = basis_of(&config);
    let rho = DensityMatrix::mixture(&[
        (0.6, random_pure(n, 11)),
        (0.3, random_pure(n, 12)),
        (0.1, random_pure(n, 13)),
    ])
    .unwrap();
    let wl = weak_limit(&rho, &basis).unwrap();

    let trace = wl.density().mat().trace();
    assert!((trace.re - 1.0).abs() < 1e-12 && trace.im.abs() < 1e-13);
    assert!(wl.density().mat().hermitian_defect() < 1e-12);
    assert!(wl.populations().iter().all(|p| *p >= -1e-10));

    // off-diagonals vanish in the Floquet frame
    let in_frame = basis.to_floquet_frame(wl.density().mat());
    let mut off = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                off = off.max(in_frame[(k, l)].norm());
            }
        }
    }
    assert!(off < 1e-12, "off-diagonal Floquet element {off}");

    // diagonal entries are the Rayleigh quotients of the input state
    for k in 0..n {
        let v = basis.vectors.col(k);
        let mut expect = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                expect += v[i].conj() * rho.mat()[(i, j)] * v[j];
            }
        }
        assert!((wl.populations()[k] - expect.re).abs() < 1e-12);
    }

    assert!(fixed_point_defect(wl.density(), &f).unwrap() < 1e-12);
}

#[test]
fn fixed_point_defect_examples() {
    let config = chaotic(32, 0.25);
    let (f, basis) = basis_of(&config);

    let eigenstate = DensityMatrix::from_pure(&basis.vectors.col(5)).unwrap();
    assert!(fixed_point_defect(&eigenstate, &f).unwrap() < 1e-14);

    let rho = DensityMatrix::from_pure(&random_pure(32, 3)).unwrap();
    let wl = weak_limit(&rho, &basis).unwrap();
    assert!(fixed_point_defect(wl.density(), &f).unwrap() < 1e-12);

    // an even superposition of two eigenstates rotates under F
    let a = basis.vectors.col(0);
    let b = basis.vectors.col(1);
    let sup: Vec<C64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0f64.sqrt()).collect();
    let rho = DensityMatrix::from_pure(&sup).unwrap();
    let defect = fixed_point_defect(&rho, &f).unwrap();
    assert!(defect > 1e-4, "superposition should not be fixed, defect {defect}");
}

#[test]
fn correlation_vanishes_for_floquet_diagonal_state() {
    let config = chaotic(32, 0.25);
    let (_, basis) = basis_of(&config);
    let rho = DensityMatrix::from_pure(&random_pure(32, 21)).unwrap();
    let wl = weak_limit(&rho, &basis).unwrap();
    let o = momentum_window_projector(32, -4, 4);
    for m in [0usize, 7, 100, 5000] {
        let c = quantum_correlation(wl.density(), &o, m, &basis).unwrap();
        assert!(c.norm() < 1e-12, "M={m}: C = {c}");
    }
}

#[test]
fn correlation_at_zero_kicks_is_trace_difference() {
    let config = chaotic(32, 0.25);
    let (_, basis) = basis_of(&config);
    let rho = DensityMatrix::from_pure(&random_pure(32, 5)).unwrap();
    let o = momentum_window_projector(32, -6, 2);
    let wl = weak_limit(&rho, &basis).unwrap();
    let expect = rho.expectation(&o) - wl.density().expectation(&o);
    let c = quantum_correlation(&rho, &o, 0, &basis).unwrap();
    assert!((c - expect).norm() < 1e-12, "C(0) = {c}, trace difference {expect}");
}

#[test]
fn spectral_correlation_matches_direct_propagation() {
    let config = chaotic(64, 0.25);
    let (_, basis) = basis_of(&config);
    let psi0 = momentum_eigenstate(64, 0).unwrap();
    let rho = DensityMatrix::from_pure(&psi0).unwrap();
    let o = momentum_window_projector(64, -8, 8);
    let rho_star = weak_limit(&rho, &basis).unwrap();
    let baseline = rho_star.density().expectation(&o).re;
    let scan = CorrelationScan::new(&rho, &o, &basis).unwrap();
    for m in [0usize, 3, 50, 1234, 9999] {
        let spectral = quantum_correlation(&rho, &o, m, &basis).unwrap();
        assert_eq!(spectral, scan.at(m), "scan kernel must agree at M={m}");
        let psi = propagate(&config, &psi0, m).unwrap();
        let direct = DensityMatrix::from_pure(&psi).unwrap().expectation(&o).re - baseline;
        assert!(
            (spectral.re - direct).abs() < 1e-10 && spectral.im.abs() < 1e-10,
            "M={m}: spectral {spectral} vs direct {direct}"
        );
    }
}

#[test]
fn dephasing_shrinks_window_averaged_correlation() {
    // finite N leaves an equilibrium floor: a Gaussian phasor sum with
    // avg|C| ~ sqrt(pi/4) * RMS, so assert decay towards that floor rather
    // than decay to zero
    let config = chaotic(256, 0.25);
    let (_, basis) = basis_of(&config);
    let rho = DensityMatrix::from_pure(&momentum_eigenstate(256, 0).unwrap()).unwrap();
    let o = momentum_window_projector(256, -8, 8);
    let scan = CorrelationScan::new(&rho, &o, &basis).unwrap();

    let window = |start: usize| -> f64 {
        (start..start + 200).map(|m| scan.at(m).norm()).sum::<f64>() / 200.0
    };
    let initial = window(0);
    let tail = window(5000);
    assert!(tail < initial, "no decay: initial {initial}, tail {tail}");

    let rho_f = basis.to_floquet_frame(rho.mat());
    let o_f = basis.to_floquet_frame(&o);
    let n = basis.dim();
    let mut rms2 = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                rms2 += rho_f[(k, l)].norm_sqr() * o_f[(l, k)].norm_sqr();
            }
        }
    }
    let floor = (std::f64::consts::PI / 4.0).sqrt() * rms2.sqrt();
    assert!(
        tail < 3.0 * floor,
        "tail window {tail} far above phasor floor {floor}"
    );
}

#[test]
fn momentum_spread_is_zero_for_free_ground_state() {
    let config = QkrConfig::new(64, 0.0, 1.0, 0.25).unwrap();
    let psi0 = momentum_eigenstate(64, 0).unwrap();
    let traj = momentum_spread(&psi0, &config, 50).unwrap();
    assert_eq!(traj.len(), 51);
    assert!(traj.iter().all(|v| *v == 0.0), "free m=0 state should stay put");
}

#[test]
fn momentum_spread_starts_at_initial_momentum() {
    let config = chaotic(128, 0.5);
    let psi0 = momentum_eigenstate(128, 5).unwrap();
    let traj = momentum_spread(&psi0, &config, 3).unwrap();
    let expect = (5.0 * config.hbar) * (5.0 * config.hbar);
    assert!((traj[0] - expect).abs() < 1e-12, "traj[0] = {}", traj[0]);
}

#[test]
fn momentum_spread_saturates_under_dynamical_localization() {
    let config = chaotic(1024, 0.25);
    let psi0 = momentum_eigenstate(1024, 0).unwrap();
    let traj = momentum_spread(&psi0, &config, 3000).unwrap();
    let third = traj[1500..2250].iter().sum::<f64>() / 750.0;
    let fourth = traj[2250..3000].iter().sum::<f64>() / 750.0;
    assert!(
        (fourth - third).abs() < 0.2 * third,
        "no saturation: third quarter {third}, fourth quarter {fourth}"
    );
}

#[test]
fn localization_fit_recovers_synthetic_profile() {
    let n = 256;
    let ms = momentum_values(n);
    let weights: Vec<f64> = ms.iter().map(|m| (-2.0 * m.abs() as f64 / 10.0).exp()).collect();
    let total: f64 = weights.iter().sum();
    let psi: Vec<C64> = weights
        .iter()
        .map(|w| Complex64::new((w / total).sqrt(), 0.0))
        .collect();
    let est = localization_length(&psi).unwrap();
    assert!(!est.flagged);
    assert!((est.length - 10.0).abs() < 0.2, "l_s = {}", est.length);
    assert!(est.r_squared > 0.99);
}

#[test]
fn localization_flags_uniform_profile() {
    let n = 128;
    let psi: Vec<C64> = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let est = localization_length(&psi).unwrap();
    assert!(est.flagged, "uniform profile must be flagged, got {est:?}");
}

#[test]
fn kicked_rotor_localizes_reproducibly() {
    // the box must dwarf l_s (~1200 momentum cells at lambda/hbar = 40) or
    // the walls flatten the fitted tail
    let n = 8192;
    let config = chaotic(n, 0.25);
    let mut lengths = Vec::new();
    for m0 in [5i64, 2, -3] {
        let mut psi = momentum_eigenstate(n, m0).unwrap();
        // time-average the tail occupation to smooth single-kick flicker
        let mut profile = vec![0.0f64; n];
        for kick in 0..8000 {
            psi = propagate(&config, &psi, 1).unwrap();
            if kick >= 4000 {
                for (acc, z) in profile.iter_mut().zip(&psi) {
                    *acc += z.norm_sqr();
                }
            }
        }
        let total: f64 = profile.iter().sum();
        let smoothed: Vec<C64> = profile
            .iter()
            .map(|w| Complex64::new((w / total).sqrt(), 0.0))
            .collect();
        let est = localization_length(&smoothed).unwrap();
        assert!(!est.flagged, "m0 {m0}: fit flagged, {est:?}");
        assert!(
            est.length > 100.0 && est.length < n as f64 / 4.0,
            "m0 {m0}: l_s = {}",
            est.length
        );
        lengths.push(est.length);
    }
    let (lo, hi) = (
        lengths.iter().cloned().fold(f64::INFINITY, f64::min),
        lengths.iter().cloned().fold(0.0f64, f64::max),
    );
    assert!(hi / lo < 1.3, "cross-start spread {lengths:?}");
}

#[test]
fn factorization_single_observable_is_exactly_zero() {
    let config = chaotic(32, 0.25);
    let (_, basis) = basis_of(&config);
    let rho = DensityMatrix::from_pure(&random_pure(32, 9)).unwrap();
    let wl = weak_limit(&rho, &basis).unwrap();
    let o = momentum_window_projector(32, -3, 3);
    let d = quantum_factorization_defect(&wl, &[o], &[17], &basis).unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn factorization_idempotent_projector_at_zero_offset() {
    let config = chaotic(32, 0.25);
    let (_, basis) = basis_of(&config);
    let rho = DensityMatrix::from_pure(&random_pure(32, 30)).unwrap();
    let wl = weak_limit(&rho, &basis).unwrap();
    let pi = basis.eigenstate_projector(5);
    let p = wl.populations()[5];
    let d = quantum_factorization_defect(&wl, &[pi.clone(), pi], &[0, 0], &basis).unwrap();
    assert!((d - (p - p * p)).abs() < 1e-12, "defect {d} vs <pi>-<pi>^2 = {}", p - p * p);
}

#[test]
fn factorization_defect_stays_small_across_gaps() {
    let config = chaotic(256, 0.25);
    let (_, basis) = basis_of(&config);
    let rho = DensityMatrix::from_pure(&momentum_eigenstate(256, 0).unwrap()).unwrap();
    let wl = weak_limit(&rho, &basis).unwrap();
    let o1 = momentum_window_projector(256, -8, 8);
    let o2 = momentum_window_projector(256, 4, 20);
    let defects: Vec<f64> = [0usize, 10, 100, 1000]
        .iter()
        .map(|g| {
            quantum_factorization_defect(
                &wl,
                &[o1.clone(), o2.clone()],
                &[0, *g],
                &basis,
            )
            .unwrap()
        })
        .collect();
    for w in defects.windows(2) {
        assert!(w[1] <= w[0] + 0.02, "defects grew beyond noise: {defects:?}");
    }
    assert!(defects.iter().all(|d| *d < 0.05), "defects {defects:?}");
}

#[test]
fn observable_helpers_are_consistent() {
    let n = 16;
    let proj = momentum_window_projector(n, -2, 2);
    assert!(proj.hermitian_defect() == 0.0);
    assert!((proj.trace().re - 5.0).abs() < 1e-15);
    let l2 = momentum_squared_observable(n, 0.5);
    let ms = momentum_values(n);
    for j in 0..n {
        let expect = (0.5 * ms[j] as f64) * (0.5 * ms[j] as f64);
        assert!((l2[(j, j)].re - expect).abs() < 1e-15);
    }
    assert!(momentum_eigenstate(n, 8).is_err());
    assert!(momentum_eigenstate(n, -9).is_err());
    let psi = momentum_eigenstate(n, -8).unwrap();
    assert!((psi[8].re - 1.0).abs() < 1e-15);
}

#[test]
fn decoherence_time_grows_with_localization_length() {
    // <L^2> relaxes towards saturation on a timescale set by l_s; halving
    // hbar should push the 90%-of-saturation crossing later. The box size
    // scales with the expected l_s so the walls never cap the spread, and
    // the second kick harmonic keeps the parameters away from resonant
    // slow tails.
    let mut crossings = Vec::new();
    for (hbar, n) in [(0.5, 4096usize), (0.25, 8192), (0.125, 16384)] {
        let mut config = QkrConfig::new(n, 10.0, 1.07, hbar).unwrap();
        config.a2 = 0.5;
        config.theta2 = 0.7;
        let psi0 = momentum_eigenstate(n, 0).unwrap();
        let traj = momentum_spread(&psi0, &config, 20_000).unwrap();
        let sat = traj[15_000..].iter().sum::<f64>() / (traj.len() - 15_000) as f64;
        let window = 200;
        let mut t10 = None;
        let mut acc: f64 = traj[..window].iter().map(|v| (v - sat).abs()).sum();
        for t in 0..traj.len() - window {
            if acc / (window as f64) < 0.1 * sat {
                t10 = Some(t);
                break;
            }
            acc += (traj[t + window] - sat).abs() - (traj[t] - sat).abs();
        }
        let t10 = t10.expect("trajectory never reached 90% of saturation");
        crossings.push(t10);
    }
    assert!(
        crossings[0] < crossings[1] && crossings[1] < crossings[2],
        "decoherence times not ordered with 1/hbar: {crossings:?}"
    );
}
