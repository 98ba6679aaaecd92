//! Kicked-rotor Floquet dynamics on a finite momentum lattice.
//!
//! One period applies the free rotation first and the kick second,
//! F = exp(-i lam V(theta)/hbar) . exp(-i tau L^2/hbar), with L = hbar m and
//! the momentum index m laid out in FFT order (0..N/2-1, -N/2..-1). The kick
//! factor acts in the angle representation, reached by an inverse transform,
//! so one period costs two FFTs. The kick potential is
//! V(theta) = cos(theta + theta0) + a2 cos(2 theta + theta2); the second
//! harmonic is off by default and only matters when a parity-breaking
//! spectrum is wanted.

use crate::eig::unitary_eigenphases;
use crate::fft::fft_raw;
use crate::matrix::{C64, CMat, DensityMatrix};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Clone, Debug)]
pub struct QkrConfig {
    /// momentum lattice size, a power of two
    pub n: usize,
    /// kick strength
    pub lambda: f64,
    /// kick period
    pub tau: f64,
    /// effective Planck constant
    pub hbar: f64,
    /// kick potential phase offset
    pub theta0: f64,
    /// second-harmonic amplitude
    pub a2: f64,
    /// second-harmonic phase
    pub theta2: f64,
    /// use H = L^2/2 instead of the literal H = L^2
    pub half_kinetic: bool,
}

impl QkrConfig {
    pub fn new(n: usize, lambda: f64, tau: f64, hbar: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Contract(format!(
                "lattice size must be a power of two >= 2, got {n}"
            )));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::Contract(format!("hbar must be positive, got {hbar}")));
        }
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::Contract(format!(
                "kick strength must be non-negative, got {lambda}"
            )));
        }
        if tau < 0.0 || !tau.is_finite() {
            return Err(Error::Contract(format!(
                "kick period must be non-negative, got {tau}"
            )));
        }
        Ok(QkrConfig {
            n,
            lambda,
            tau,
            hbar,
            theta0: 0.0,
            a2: 0.0,
            theta2: 0.0,
            half_kinetic: false,
        })
    }

    pub fn is_chaotic(&self) -> bool {
        self.lambda > 5.0
    }
}

/// Momentum quantum numbers in storage (FFT) order.
pub fn momentum_values(n: usize) -> Vec<i64> {
    (0..n)
        .map(|j| if j < n / 2 { j as i64 } else { j as i64 - n as i64 })
        .collect()
}

fn momentum_index(n: usize, m: i64) -> Result<usize> {
    let half = n as i64 / 2;
    if m < -half || m >= half {
        return Err(Error::Contract(format!(
            "momentum {m} outside [-{half}, {half})"
        )));
    }
    Ok(m.rem_euclid(n as i64) as usize)
}

/// Basis vector with sharp momentum m.
pub fn momentum_eigenstate(n: usize, m: i64) -> Result<Vec<C64>> {
    let idx = momentum_index(n, m)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    psi[idx] = Complex64::new(1.0, 0.0);
    Ok(psi)
}

/// Diagonal projector onto momenta m in [m_lo, m_hi].
pub fn momentum_window_projector(n: usize, m_lo: i64, m_hi: i64) -> CMat {
    let ms = momentum_values(n);
    CMat::from_fn(n, n, |i, j| {
        if i == j && ms[i] >= m_lo && ms[i] <= m_hi {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Diagonal observable L^2 = (hbar m)^2.
pub fn momentum_squared_observable(n: usize, hbar: f64) -> CMat {
    let ms = momentum_values(n);
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            let l = hbar * ms[i] as f64;
            Complex64::new(l * l, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Precomputed one-period factors; `kick` is None for the free rotor, which
/// keeps free evolution exactly momentum-diagonal.
struct SplitStep {
    kick: Option<Vec<C64>>,
    rotor: Vec<C64>,
    inv_n: f64,
}

impl SplitStep {
    fn new(config: &QkrConfig) -> Self {
        let n = config.n;
        let kinetic = if config.half_kinetic { 0.5 } else { 1.0 };
        let rotor: Vec<C64> = momentum_values(n)
            .iter()
            .map(|m| {
                let m = *m as f64;
                Complex64::from_polar(1.0, -config.tau * config.hbar * m * m * kinetic)
            })
            .collect();
        let kick = (config.lambda != 0.0).then(|| {
            (0..n)
                .map(|j| {
                    let theta = TAU * j as f64 / n as f64;
                    let v = (theta + config.theta0).cos()
                        + config.a2 * (2.0 * theta + config.theta2).cos();
                    Complex64::from_polar(1.0, -config.lambda * v / config.hbar)
                })
                .collect()
        });
        SplitStep { kick, rotor, inv_n: 1.0 / n as f64 }
    }

    fn advance(&self, psi: &mut [C64]) {
        for (z, r) in psi.iter_mut().zip(&self.rotor) {
            *z *= r;
        }
        if let Some(kick) = &self.kick {
            fft_raw(psi, false);
            for (z, k) in psi.iter_mut().zip(kick) {
                *z *= k;
            }
            fft_raw(psi, true);
            for z in psi.iter_mut() {
                *z *= self.inv_n;
            }
        }
    }
}

/// Apply `kicks` periods to the state by FFT split-stepping.
pub fn propagate(config: &QkrConfig, psi: &[C64], kicks: usize) -> Result<Vec<C64>> {
    if psi.len() != config.n {
        return Err(Error::Dimension(format!(
            "state length {} does not match lattice size {}",
            psi.len(),
            config.n
        )));
    }
    let step = SplitStep::new(config);
    let mut out = psi.to_vec();
    for _ in 0..kicks {
        step.advance(&mut out);
    }
    Ok(out)
}

/// Dense one-period propagator, assembled column by column.
pub fn build_floquet(config: &QkrConfig) -> Result<CMat> {
    let n = config.n;
    if n > 4096 {
        return Err(Error::Resource(format!(
            "dense propagator at n = {n} exceeds the supported 4096"
        )));
    }
    let step = SplitStep::new(config);
    let mut f = CMat::zeros(n, n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[k] = Complex64::new(1.0, 0.0);
        step.advance(&mut col);
        for i in 0..n {
            f[(i, k)] = col[i];
        }
    }
    Ok(f)
}

/// Floquet eigenbasis: F |a_k> = e^{-i phases[k]} |a_k>, phases ascending.
pub struct FloquetBasis {
    pub phases: Vec<f64>,
    /// orthonormal columns, k-th column pairs with phases[k]
    pub vectors: CMat,
    pub min_phase_gap: f64,
    pub degenerate: bool,
}

impl FloquetBasis {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// |a_k><a_k|
    pub fn eigenstate_projector(&self, k: usize) -> CMat {
        let v = self.vectors.col(k);
        let n = v.len();
        CMat::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    /// V† A V: matrix elements in the Floquet basis.
    pub fn to_floquet_frame(&self, a: &CMat) -> CMat {
        self.vectors.dagger().mul(&a.mul(&self.vectors))
    }
}

pub fn floquet_eigensystem(f: &CMat) -> Result<FloquetBasis> {
    let eig = unitary_eigenphases(f)?;
    Ok(FloquetBasis {
        phases: eig.phases,
        vectors: eig.vectors,
        min_phase_gap: eig.min_phase_gap,
        degenerate: eig.degenerate,
    })
}

/// Density matrix with the Floquet off-diagonals removed.
pub struct WeakLimitState {
    density: DensityMatrix,
    populations: Vec<f64>,
}

impl WeakLimitState {
    pub fn density(&self) -> &DensityMatrix {
        &self.density
    }

    /// Floquet-basis diagonal <a_k| rho |a_k>.
    pub fn populations(&self) -> &[f64] {
        &self.populations
    }
}

/// rho* = sum_k <a_k|rho|a_k> |a_k><a_k|.
pub fn weak_limit(rho: &DensityMatrix, basis: &FloquetBasis) -> Result<WeakLimitState> {
    let n = basis.dim();
    if rho.dim() != n {
        return Err(Error::Dimension(format!(
            "state dimension {} does not match basis dimension {n}",
            rho.dim()
        )));
    }
    let in_frame = basis.to_floquet_frame(rho.mat());
    let populations: Vec<f64> = (0..n).map(|k| in_frame[(k, k)].re).collect();
    // V with columns rescaled by the populations, times V†
    let mut scaled = basis.vectors.clone();
    for i in 0..n {
        let row = scaled.row_mut(i);
        for (k, z) in row.iter_mut().enumerate() {
            *z *= populations[k];
        }
    }
    let mat = scaled.mul(&basis.vectors.dagger());
    Ok(WeakLimitState { density: DensityMatrix::new(mat)?, populations })
}

/// max |F rho F† - rho|: zero exactly when rho is stationary under F.
pub fn fixed_point_defect(rho: &DensityMatrix, f: &CMat) -> Result<f64> {
    if rho.dim() != f.nrows() || !f.is_square() {
        return Err(Error::Dimension(format!(
            "dimension mismatch: state {} vs propagator {}x{}",
            rho.dim(),
            f.nrows(),
            f.ncols()
        )));
    }
    let evolved = f.mul(&rho.mat().mul(&f.dagger()));
    Ok(evolved.sub(rho.mat()).max_abs())
}

/// Floquet-frame correlation kernel: transforms rho and the observable once,
/// then evaluates C(M) = sum_{k != l} rho_kl O_lk e^{-iM(phi_k - phi_l)} for
/// any number of kick counts.
pub struct CorrelationScan {
    rho_f: CMat,
    obs_f: CMat,
    phases: Vec<f64>,
}

impl CorrelationScan {
    pub fn new(rho: &DensityMatrix, obs: &CMat, basis: &FloquetBasis) -> Result<Self> {
        let n = basis.dim();
        if rho.dim() != n || obs.nrows() != n || obs.ncols() != n {
            return Err(Error::Dimension(format!(
                "dimension mismatch: state {}, observable {}x{}, basis {n}",
                rho.dim(),
                obs.nrows(),
                obs.ncols()
            )));
        }
        if !obs.is_hermitian() {
            return Err(Error::Contract("observable must be Hermitian".into()));
        }
        Ok(CorrelationScan {
            rho_f: basis.to_floquet_frame(rho.mat()),
            obs_f: basis.to_floquet_frame(obs),
            phases: basis.phases.clone(),
        })
    }

    pub fn at(&self, kicks: usize) -> C64 {
        let n = self.phases.len();
        let m = kicks as f64;
        let mut c = Complex64::new(0.0, 0.0);
        for k in 0..n {
            for l in 0..n {
                if k != l {
                    let rot = Complex64::from_polar(1.0, -m * (self.phases[k] - self.phases[l]));
                    c += self.rho_f[(k, l)] * self.obs_f[(l, k)] * rot;
                }
            }
        }
        c
    }
}

/// C(M) = <O>_{rho(M)} - <O>_{rho*}, evaluated spectrally.
pub fn quantum_correlation(
    rho: &DensityMatrix,
    obs: &CMat,
    kicks: usize,
    basis: &FloquetBasis,
) -> Result<C64> {
    Ok(CorrelationScan::new(rho, obs, basis)?.at(kicks))
}

/// <L^2> after each kick, starting with the initial state (kicks+1 entries).
pub fn momentum_spread(psi0: &[C64], config: &QkrConfig, kicks: usize) -> Result<Vec<f64>> {
    if psi0.len() != config.n {
        return Err(Error::Dimension(format!(
            "state length {} does not match lattice size {}",
            psi0.len(),
            config.n
        )));
    }
    let norm: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Contract(format!("state not normalized: |psi|^2 = {norm}")));
    }
    let weights: Vec<f64> = momentum_values(config.n)
        .iter()
        .map(|m| {
            let l = config.hbar * *m as f64;
            l * l
        })
        .collect();
    let l2 = |psi: &[C64]| -> f64 {
        psi.iter().zip(&weights).map(|(z, w)| w * z.norm_sqr()).sum()
    };
    let step = SplitStep::new(config);
    let mut psi = psi0.to_vec();
    let mut traj = Vec::with_capacity(kicks + 1);
    traj.push(l2(&psi));
    for _ in 0..kicks {
        step.advance(&mut psi);
        traj.push(l2(&psi));
    }
    Ok(traj)
}

#[derive(Clone, Debug)]
pub struct LocalizationEstimate {
    /// l_s = 2/|slope| of log |psi_m|^2 against distance from the peak
    pub length: f64,
    pub r_squared: f64,
    /// set when the profile is not exponential (fit R^2 < 0.5 or too flat)
    pub flagged: bool,
}

/// Exponential-tail fit of a momentum distribution. The fitted band is the
/// decade between max/10 and max/100: localized states carry a
/// non-exponential enhancement right at the peak, so the top decade is
/// excluded on purpose.
pub fn localization_length(state: &[C64]) -> Result<LocalizationEstimate> {
    let n = state.len();
    if n < 8 {
        return Err(Error::InsufficientData(format!(
            "need at least 8 momentum cells, got {n}"
        )));
    }
    let weights: Vec<f64> = state.iter().map(|z| z.norm_sqr()).collect();
    let peak = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let wmax = weights[peak];
    if wmax <= 0.0 {
        return Err(Error::Contract("state has no weight".into()));
    }

    let flagged = LocalizationEstimate {
        length: f64::INFINITY,
        r_squared: 0.0,
        flagged: true,
    };

    let half = n as i64 / 2;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (j, w) in weights.iter().enumerate() {
        let d = ((j as i64 - peak as i64 + half).rem_euclid(n as i64) - half).abs();
        if d > 0 && *w < wmax / 10.0 && *w >= wmax / 100.0 {
            xs.push(d as f64);
            ys.push(w.ln());
        }
    }
    if xs.len() < 3 {
        return Ok(flagged);
    }

    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Ok(flagged);
    }
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum();
    let r_squared = 1.0 - ss_res / syy;
    if slope >= 0.0 {
        return Ok(LocalizationEstimate { length: f64::INFINITY, r_squared, flagged: true });
    }
    Ok(LocalizationEstimate {
        length: 2.0 / slope.abs(),
        r_squared,
        flagged: r_squared < 0.5,
    })
}

/// D = |Tr(rho* O_1(t_1)...O_n(t_n)) - prod_i Tr(rho* O_i)| with
/// O(t) = F^{-t} O F^t expressed through the Floquet phases.
pub fn quantum_factorization_defect(
    rho_star: &WeakLimitState,
    observables: &[CMat],
    offsets: &[usize],
    basis: &FloquetBasis,
) -> Result<f64> {
    if observables.is_empty() || observables.len() != offsets.len() {
        return Err(Error::Dimension(format!(
            "need equally many observables and offsets, got {} and {}",
            observables.len(),
            offsets.len()
        )));
    }
    let n = basis.dim();
    if rho_star.populations.len() != n {
        return Err(Error::Dimension("state does not match basis".into()));
    }
    for obs in observables {
        if obs.nrows() != n || obs.ncols() != n {
            return Err(Error::Dimension(format!(
                "observable is {}x{}, basis dimension {n}",
                obs.nrows(),
                obs.ncols()
            )));
        }
        if !obs.is_hermitian() {
            return Err(Error::Contract("observables must be Hermitian".into()));
        }
    }

    let evolved: Vec<CMat> = observables
        .iter()
        .zip(offsets)
        .map(|(obs, t)| {
            let in_frame = basis.to_floquet_frame(obs);
            let t = *t as f64;
            CMat::from_fn(n, n, |a, b| {
                in_frame[(a, b)]
                    * Complex64::from_polar(1.0, (basis.phases[a] - basis.phases[b]) * t)
            })
        })
        .collect();

    let mut product = evolved[0].clone();
    for obs in &evolved[1..] {
        product = product.mul(obs);
    }
    let lhs: C64 = (0..n)
        .map(|k| product[(k, k)] * rho_star.populations[k])
        .sum();

    let rhs: C64 = evolved
        .iter()
        .map(|obs| {
            (0..n)
                .map(|k| obs[(k, k)] * rho_star.populations[k])
                .sum::<C64>()
        })
        .product();

    Ok((lhs - rhs).norm())
}
