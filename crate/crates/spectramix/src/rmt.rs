//! Gaussian matrix ensembles in the three classical symmetry classes, the
//! Haar-random transforms that conjugate them, and the statistical screens
//! behind our two ensemble conditions: independent entries and invariance
//! under the class's transformation group. Spectral unfolding and
//! nearest-neighbor spacing tests against the Wigner surmise family live
//! here too, since they consume the same samples.

use crate::report::TestReport;
use crate::rng::RngStream;
use crate::stats::{chi2_critical, chi2_pair_independence, ks_distance, ks_two_sample, pearson_correlation};
use crate::{CMat, Error, Result, C64};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    /// real symmetric, orthogonal invariance (beta = 1)
    Goe,
    /// complex Hermitian, unitary invariance (beta = 2)
    Gue,
    /// quaternion self-dual stored as a 2n x 2n complex matrix (beta = 4)
    Gse,
}

impl EnsembleKind {
    pub fn beta(self) -> usize {
        match self {
            EnsembleKind::Goe => 1,
            EnsembleKind::Gue => 2,
            EnsembleKind::Gse => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EnsembleKind::Goe => "goe",
            EnsembleKind::Gue => "gue",
            EnsembleKind::Gse => "gse",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "goe" => Ok(EnsembleKind::Goe),
            "gue" => Ok(EnsembleKind::Gue),
            "gse" => Ok(EnsembleKind::Gse),
            other => Err(Error::Contract(format!("unknown ensemble kind '{other}'"))),
        }
    }
}

/// One draw from an ensemble. For [`EnsembleKind::Gse`] the stored matrix is
/// the 2n x 2n complex representation; `n` is always the logical dimension.
#[derive(Clone, Debug)]
pub struct MatrixSample {
    pub kind: EnsembleKind,
    pub n: usize,
    pub matrix: CMat,
}

/// Entry convention: diagonal variance 1, each independent off-diagonal real
/// component variance 1/2. The symmetry class holds exactly (defect 0, not
/// merely small) because conjugate pairs are computed from the same draws.
pub fn sample_ensemble(kind: EnsembleKind, n: usize, rng: &mut RngStream) -> Result<MatrixSample> {
    if n < 2 {
        return Err(Error::Contract(format!("ensemble dimension must be >= 2, got {n}")));
    }
    let matrix = match kind {
        EnsembleKind::Goe => {
            let g = CMat::from_fn(n, n, |_, _| C64::new(rng.normal(), 0.0));
            CMat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)]) * 0.5)
        }
        EnsembleKind::Gue => {
            let g = CMat::from_fn(n, n, |_, _| rng.normal_c());
            CMat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
        }
        EnsembleKind::Gse => {
            let g = CMat::from_fn(n, n, |_, _| rng.normal_c());
            let f = CMat::from_fn(n, n, |_, _| rng.normal_c());
            let a = CMat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
            let b = CMat::from_fn(n, n, |i, j| (f[(i, j)] - f[(j, i)]) * 0.5);
            CMat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                (true, true) => a[(i, j)],
                (true, false) => b[(i, j - n)],
                (false, true) => -b[(i - n, j)].conj(),
                (false, false) => a[(i - n, j - n)].conj(),
            })
        }
    };
    Ok(MatrixSample { kind, n, matrix })
}

/// Householder QR with the usual sign convention (R_kk carries the phase of
/// the reflected column), which is exactly the convention whose Q is *not*
/// Haar-distributed; see [`haar_transform`] for the corrected draw.
pub fn qr_decompose(a: &CMat) -> Result<(CMat, CMat)> {
    if !a.is_square() {
        return Err(Error::Dimension("qr_decompose needs a square matrix".into()));
    }
    let n = a.nrows();
    let mut r = a.clone();
    let mut q = CMat::identity(n);
    let mut v = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let mut nx2 = 0.0;
        for i in k..n {
            nx2 += r[(i, k)].norm_sqr();
        }
        let nx = nx2.sqrt();
        if nx == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] += phase * nx;
        let vnorm = (k..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for i in k..n {
            v[i] /= vnorm;
        }
        for j in k..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in k..n {
                dot += v[i].conj() * r[(i, j)];
            }
            let dot = dot * 2.0;
            for i in k..n {
                let w = v[i] * dot;
                r[(i, j)] -= w;
            }
        }
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in k..n {
                dot += q[(i, j)] * v[j];
            }
            let dot = dot * 2.0;
            for j in k..n {
                let w = dot * v[j].conj();
                q[(i, j)] -= w;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            r[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((q, r))
}

/// Haar-distributed transform of the class that leaves `kind` invariant:
/// orthogonal for GOE, unitary for GUE, unitary-symplectic (2n x 2n) for GSE.
///
/// The orthogonal/unitary draws are QR of a Gaussian matrix with each column
/// of Q rescaled by the phase of the matching R diagonal; without that
/// rescale the R_kk phases bias the distribution and eigenphase uniformity
/// fails. The symplectic draw orthonormalizes Gaussian columns in dual pairs
/// (q, -J conj(q)), which keeps the symplectic form exact.
pub fn haar_transform(kind: EnsembleKind, n: usize, rng: &mut RngStream) -> Result<CMat> {
    if n < 2 {
        return Err(Error::Contract(format!("transform dimension must be >= 2, got {n}")));
    }
    match kind {
        EnsembleKind::Goe => {
            let g = CMat::from_fn(n, n, |_, _| C64::new(rng.normal(), 0.0));
            let (mut q, r) = qr_decompose(&g)?;
            for k in 0..n {
                if r[(k, k)].re < 0.0 {
                    for i in 0..n {
                        q[(i, k)] = -q[(i, k)];
                    }
                }
            }
            Ok(q)
        }
        EnsembleKind::Gue => {
            let g = CMat::from_fn(n, n, |_, _| rng.normal_c());
            let (mut q, r) = qr_decompose(&g)?;
            for k in 0..n {
                let d = r[(k, k)];
                let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
                for i in 0..n {
                    q[(i, k)] *= phase;
                }
            }
            Ok(q)
        }
        EnsembleKind::Gse => Ok(symplectic_haar(n, rng)),
    }
}

fn symplectic_haar(n: usize, rng: &mut RngStream) -> CMat {
    let nn = 2 * n;
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(nn);
    for _ in 0..n {
        let q = loop {
            let mut x: Vec<C64> = (0..nn).map(|_| rng.normal_c()).collect();
            for c in &cols {
                let proj: C64 = c.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
                for (xi, ci) in x.iter_mut().zip(c) {
                    *xi -= ci * proj;
                }
            }
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                x.iter_mut().for_each(|z| *z /= norm);
                break x;
            }
        };
        // dual partner -J conj(q); orthogonal to everything so far by the
        // antisymmetry of the form, so no re-orthogonalization is needed
        let mut d = vec![C64::new(0.0, 0.0); nn];
        for i in 0..n {
            d[i] = -q[i + n].conj();
            d[i + n] = q[i].conj();
        }
        cols.push(q);
        cols.push(d);
    }
    CMat::from_fn(nn, nn, |i, j| {
        let pair = if j < n { 2 * j } else { 2 * (j - n) + 1 };
        cols[pair][i]
    })
}

/// Independent real components of one sample, in a fixed scan order shared by
/// every sample of the same kind and size.
fn entry_components(sample: &MatrixSample) -> Vec<f64> {
    let m = &sample.matrix;
    let mut out = Vec::new();
    match sample.kind {
        EnsembleKind::Goe => {
            let n = m.nrows();
            for i in 0..n {
                for j in i..n {
                    out.push(m[(i, j)].re);
                }
            }
        }
        EnsembleKind::Gue => {
            let n = m.nrows();
            for i in 0..n {
                for j in i..n {
                    out.push(m[(i, j)].re);
                    if j > i {
                        out.push(m[(i, j)].im);
                    }
                }
            }
        }
        EnsembleKind::Gse => {
            let n = sample.n;
            for i in 0..n {
                for j in i..n {
                    out.push(m[(i, j)].re);
                    if j > i {
                        out.push(m[(i, j)].im);
                        out.push(m[(i, j + n)].re);
                        out.push(m[(i, j + n)].im);
                    }
                }
            }
        }
    }
    out
}

fn check_batch(samples: &[MatrixSample]) -> Result<()> {
    if samples.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "ensemble screens need >= 1000 samples, got {}",
            samples.len()
        )));
    }
    let (kind, n) = (samples[0].kind, samples[0].n);
    for s in samples {
        if s.kind != kind || s.n != n {
            return Err(Error::Contract("mixed ensemble kinds or sizes in one batch".into()));
        }
    }
    Ok(())
}

/// Factorized-entries screen: the joint density of the independent entries
/// should be a product of marginals. Returns the Pearson report (statistic =
/// max |r| over all component pairs, threshold 4/sqrt(S)) and a chi-square
/// independence report on 8 x 8 quantile-binned joints for 10 pairs chosen
/// by `rng` (threshold = 99.9% quantile, to keep the family-wise rate low).
pub fn randomness_test(
    samples: &[MatrixSample],
    rng: &mut RngStream,
) -> Result<(TestReport, TestReport)> {
    check_batch(samples)?;
    let count = samples.len();
    let width = entry_components(&samples[0]).len();
    let mut series = vec![Vec::with_capacity(count); width];
    for s in samples {
        let comps = entry_components(s);
        if comps.len() != width {
            return Err(Error::Contract("inconsistent component count in batch".into()));
        }
        for (c, x) in comps.into_iter().enumerate() {
            series[c].push(x);
        }
    }

    let mut max_r = 0.0f64;
    for a in 0..width {
        for b in a + 1..width {
            let r = pearson_correlation(&series[a], &series[b])?.abs();
            max_r = max_r.max(r);
        }
    }
    let pearson =
        TestReport::new("entry-pearson", max_r, 4.0 / (count as f64).sqrt(), count, rng.seed());

    let mut max_chi2 = 0.0f64;
    let mut chosen = 0;
    while chosen < 10 {
        let a = rng.below(width);
        let b = rng.below(width);
        if a == b {
            continue;
        }
        max_chi2 = max_chi2.max(chi2_pair_independence(&series[a], &series[b], 8));
        chosen += 1;
    }
    let crit = chi2_critical(49, 3.0902323061678132);
    let chi2 = TestReport::new("entry-chi2", max_chi2, crit, count, rng.seed());
    Ok((pearson, chi2))
}

const INVARIANCE_POSITIONS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 2), (3, 3)];

/// Worst two-sample KS distance over the probe entry positions, comparing the
/// real component of each position across the two batches.
pub fn invariance_statistic(a: &[MatrixSample], b: &[MatrixSample]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("invariance statistic needs two batches".into()));
    }
    for s in a.iter().chain(b) {
        if s.matrix.nrows() < 4 {
            return Err(Error::Contract("probe positions need matrices of dimension >= 4".into()));
        }
    }
    let mut worst = 0.0f64;
    for (i, j) in INVARIANCE_POSITIONS {
        let xs: Vec<f64> = a.iter().map(|s| s.matrix[(i, j)].re).collect();
        let ys: Vec<f64> = b.iter().map(|s| s.matrix[(i, j)].re).collect();
        worst = worst.max(ks_two_sample(&xs, &ys)?);
    }
    Ok(worst)
}

/// Invariance screen: conjugate every sample by a fresh Haar transform of the
/// class and compare entry distributions before and after. The threshold is
/// the 1% one-sample KS critical value scaled by sqrt(2) for the two-sample
/// comparison; a genuinely invariant ensemble sits well below it, while a
/// non-Gaussian one moves, because conjugation mixes its entries toward
/// Gaussian sums.
pub fn invariance_test(
    samples: &[MatrixSample],
    kind: EnsembleKind,
    rng: &mut RngStream,
) -> Result<TestReport> {
    check_batch(samples)?;
    let count = samples.len();
    let mut rotated = Vec::with_capacity(count);
    for s in samples {
        let u = haar_transform(kind, s.n, rng)?;
        if u.nrows() != s.matrix.nrows() {
            return Err(Error::Dimension(format!(
                "transform dimension {} does not match sample dimension {}",
                u.nrows(),
                s.matrix.nrows()
            )));
        }
        let conj = u.mul(&s.matrix.mul(&u.dagger()));
        rotated.push(MatrixSample { kind: s.kind, n: s.n, matrix: conj });
    }
    let stat = invariance_statistic(samples, &rotated)?;
    let threshold = (2.0f64).sqrt() * 1.63 / (count as f64).sqrt();
    Ok(TestReport::new("conjugation-invariance", stat, threshold, count, rng.seed()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnfoldMethod {
    /// analytic integrated semicircle density for a full spectrum sampled with
    /// the standard entry variances (support radius sqrt(2n))
    Semicircle,
    /// least-squares fit of the empirical staircase by a degree-k polynomial
    Polynomial(usize),
}

/// Map sorted levels to unit-mean nearest-neighbor spacings by differencing a
/// smooth estimate of the integrated level density.
pub fn unfold_spectrum(levels: &[f64], method: UnfoldMethod) -> Result<Vec<f64>> {
    if levels.len() < 16 {
        return Err(Error::InsufficientData(format!(
            "unfolding needs >= 16 levels, got {}",
            levels.len()
        )));
    }
    for w in levels.windows(2) {
        if !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::Contract("levels must be finite".into()));
        }
        if w[1] < w[0] {
            return Err(Error::Contract("levels must be sorted ascending".into()));
        }
    }
    let nbar = match method {
        UnfoldMethod::Semicircle => {
            let n = levels.len() as f64;
            let radius = (2.0 * n).sqrt();
            levels
                .iter()
                .map(|lam| {
                    let x = (lam / radius).clamp(-1.0, 1.0);
                    n * (0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI)
                })
                .collect::<Vec<f64>>()
        }
        UnfoldMethod::Polynomial(k) => polynomial_nbar(levels, k)?,
    };
    let mut spacings: Vec<f64> = nbar.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::Numeric("unfolded density collapsed to zero mean spacing".into()));
    }
    spacings.iter_mut().for_each(|s| *s /= mean);
    Ok(spacings)
}

/// Fitted integrated density: least squares of the staircase counts 0..N-1 on
/// a Chebyshev basis over the spectral span. The basis keeps the normal
/// equations well conditioned where a raw monomial fit at degree 7 would
/// already lose half the mantissa.
fn polynomial_nbar(levels: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::Contract("polynomial unfolding needs degree >= 1".into()));
    }
    let n = levels.len();
    if k + 1 > n {
        return Err(Error::Contract(format!("degree {k} fit needs more than {n} levels")));
    }
    let (lo, hi) = (levels[0], levels[n - 1]);
    if hi <= lo {
        return Err(Error::Contract("levels span a single point".into()));
    }
    let width = k + 1;
    let mut basis = vec![0.0f64; width];
    let mut gram = vec![vec![0.0f64; width]; width];
    let mut rhs = vec![0.0f64; width];
    let mut rows = Vec::with_capacity(n);
    for (idx, lam) in levels.iter().enumerate() {
        let t = (2.0 * lam - (lo + hi)) / (hi - lo);
        basis[0] = 1.0;
        if width > 1 {
            basis[1] = t;
        }
        for j in 2..width {
            basis[j] = 2.0 * t * basis[j - 1] - basis[j - 2];
        }
        for a in 0..width {
            rhs[a] += basis[a] * idx as f64;
            for b in a..width {
                gram[a][b] += basis[a] * basis[b];
            }
        }
        rows.push(basis.clone());
    }
    for a in 0..width {
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }
    let coef = solve_dense(gram, rhs)?;
    Ok(rows.iter().map(|row| row.iter().zip(&coef).map(|(b, c)| b * c).sum()).collect())
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|a, c| m[*a][col].abs().total_cmp(&m[*c][col].abs())).unwrap();
        if m[pivot][col].abs() < 1e-13 * scale {
            return Err(Error::Numeric("singular system in polynomial fit".into()));
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        let (head, tail) = m.split_at_mut(col + 1);
        let prow = &head[col];
        let bcol = b[col];
        for (off, row) in tail.iter_mut().enumerate() {
            let f = row[col] / prow[col];
            for j in col..n {
                row[j] -= f * prow[j];
            }
            b[col + 1 + off] -= f * bcol;
        }
    }
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let dot: f64 = (col + 1..n).map(|j| m[col][j] * x[j]).sum();
        x[col] = (b[col] - dot) / m[col][col];
    }
    Ok(x)
}

const GSE_A: f64 = 64.0 / (9.0 * PI);
const GSE_C: f64 = 262144.0 / (729.0 * PI * PI * PI);

/// Nearest-neighbor spacing density of the 2x2 surmise family, normalized to
/// unit area and unit mean.
pub fn wigner_surmise(beta: usize, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Contract(format!("spacing must be nonnegative, got {s}")));
    }
    match beta {
        1 => Ok(0.5 * PI * s * (-0.25 * PI * s * s).exp()),
        2 => Ok(32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()),
        4 => Ok(GSE_C * s.powi(4) * (-GSE_A * s * s).exp()),
        other => Err(Error::Contract(format!("no surmise for beta = {other}"))),
    }
}

/// Closed-form integral of [`wigner_surmise`] from 0 to `s`.
pub fn surmise_cdf(beta: usize, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Contract(format!("spacing must be nonnegative, got {s}")));
    }
    match beta {
        1 => Ok(1.0 - (-0.25 * PI * s * s).exp()),
        2 => Ok(libm::erf(2.0 * s / PI.sqrt()) - 4.0 * s / PI * (-4.0 * s * s / PI).exp()),
        4 => {
            let a = GSE_A;
            let tail = GSE_C * (-a * s * s).exp() * (s * s * s / (2.0 * a) + 3.0 * s / (4.0 * a * a));
            Ok(libm::erf(a.sqrt() * s) - tail)
        }
        other => Err(Error::Contract(format!("no surmise for beta = {other}"))),
    }
}

/// KS comparison of unit-mean spacings against the surmise for `beta`. The
/// 0.05 threshold deliberately absorbs the ~2% bulk bias of the 2x2 surmise
/// relative to large-n spacing distributions.
pub fn spacing_test(spacings: &[f64], beta: usize) -> Result<TestReport> {
    if spacings.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "spacing test needs >= 1000 spacings, got {}",
            spacings.len()
        )));
    }
    for s in spacings {
        if !s.is_finite() || *s < 0.0 {
            return Err(Error::Contract(format!("corrupt spacing {s}")));
        }
    }
    surmise_cdf(beta, 0.0)?;
    let stat = ks_distance(spacings, |s| surmise_cdf(beta, s).unwrap())?;
    let name = format!("spacing-surmise-beta{beta}");
    Ok(TestReport::new(&name, stat, 0.05, spacings.len(), 0))
}

/// Collapse a Kramers-degenerate spectrum (sorted, even length) to one level
/// per degenerate pair by averaging the partners.
pub fn deduplicate_kramers(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() || values.len() % 2 != 0 {
        return Err(Error::Contract(format!(
            "Kramers spectrum must pair up, got {} levels",
            values.len()
        )));
    }
    for w in values.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Contract("spectrum must be sorted ascending".into()));
        }
    }
    Ok(values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Circular nearest-neighbor spacings of eigenphases, unfolded by the exact
/// uniform density on the circle: s_k = gap * N / 2pi, including the
/// wrap-around gap, so the mean is 1 by construction.
pub fn quasienergy_spacings(phases: &[f64]) -> Result<Vec<f64>> {
    let n = phases.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("circular spacings need >= 2 phases, got {n}")));
    }
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::Contract("phases must be finite".into()));
    }
    let mut ph: Vec<f64> = phases.iter().map(|p| p.rem_euclid(2.0 * PI)).collect();
    ph.sort_by(f64::total_cmp);
    let scale = n as f64 / (2.0 * PI);
    let mut out: Vec<f64> = ph.windows(2).map(|w| (w[1] - w[0]) * scale).collect();
    out.push((ph[0] + 2.0 * PI - ph[n - 1]) * scale);
    Ok(out)
}

/// Spacing verdict for pooled quasienergy spectra: KS against the beta = 1
/// surmise and against the exponential (Poisson) law, each report passing
/// when its law is the closer one. Pooling several parameter sets is how a
/// single quasienergy run reaches a usable spacing count.
pub fn bgs_spacing_check(phase_sets: &[Vec<f64>]) -> Result<(TestReport, TestReport)> {
    if phase_sets.is_empty() {
        return Err(Error::InsufficientData("no quasienergy sets given".into()));
    }
    let mut pool = Vec::new();
    for set in phase_sets {
        if set.len() < 256 {
            return Err(Error::InsufficientData(format!(
                "each quasienergy set needs >= 256 phases, got {}",
                set.len()
            )));
        }
        pool.extend(quasienergy_spacings(set)?);
    }
    let d_surmise = ks_distance(&pool, |s| surmise_cdf(1, s).unwrap())?;
    let d_poisson = ks_distance(&pool, |s| 1.0 - (-s).exp())?;
    let surmise = TestReport::new("bgs-surmise", d_surmise, d_poisson, pool.len(), 0);
    let poisson = TestReport::new("bgs-poisson", d_poisson, d_surmise, pool.len(), 0);
    Ok((surmise, poisson))
}
