//! Weyl symbols and Wigner functions on a uniform position grid.
//!
//! The grid is periodic (the FFT wraps), but the intended operators live on
//! a line and decay near the box edges; every symbol therefore carries an
//! edge-mass diagnostic, see [`band_limit_defect`]. The symbol is built
//! chord by chord: even chords of the rotated matrix are exact matrix
//! elements, odd chords sit between grid centers and are filled by
//! symmetric 8th-order interpolation at the half point, and an FFT over
//! the chord index yields the momentum dependence. Dividing a density
//! matrix symbol by h = 2 pi hbar gives the Wigner function, normalized so
//! that sum W dq dp = 1.

use crate::fft::fft_raw;
use crate::matrix::{C64, CMat, DensityMatrix};
use crate::{Error, Result};
use std::f64::consts::PI;
use std::io;
use std::path::{Path, PathBuf};

/// Discretized phase space: `n` position points on `[q_min, q_max)` and the
/// `n` conjugate momenta `2 pi hbar j / (n dq)` for `j = -n/2 .. n/2 - 1`.
/// One grid cell has area `dq * dp = h / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    n: usize,
    q_min: f64,
    q_max: f64,
    hbar: f64,
}

impl PhaseGrid {
    pub fn new(n: usize, q_min: f64, q_max: f64, hbar: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 8 {
            // 8 = span of the half-point interpolation stencil
            return Err(Error::Contract(format!(
                "grid size {n} must be a power of two and at least 8"
            )));
        }
        if !q_min.is_finite() || !q_max.is_finite() || q_max <= q_min {
            return Err(Error::Contract(format!("bad position box [{q_min}, {q_max})")));
        }
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::Contract(format!("hbar = {hbar} must be positive")));
        }
        Ok(PhaseGrid { n, q_min, q_max, hbar })
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / (self.n as f64 * self.dq())
    }

    /// Planck cell, dq * dp * n.
    pub fn h(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    pub fn q_values(&self) -> Vec<f64> {
        let dq = self.dq();
        (0..self.n).map(|i| self.q_min + i as f64 * dq).collect()
    }

    /// Momenta in ascending order, `-n/2 dp` through `(n/2 - 1) dp`.
    pub fn p_values(&self) -> Vec<f64> {
        let dp = self.dp();
        let half = (self.n / 2) as i64;
        (0..self.n).map(|j| (j as i64 - half) as f64 * dp).collect()
    }

    /// Momenta in FFT index order: 0, dp, ..., then the negative branch.
    fn p_fft(&self) -> Vec<f64> {
        let dp = self.dp();
        let ni = self.n as i64;
        (0..ni).map(|j| (if j < ni / 2 { j } else { j - ni }) as f64 * dp).collect()
    }
}

/// A function on the phase-space grid, stored row-major with q varying
/// slowest and p ascending within a row.
#[derive(Clone, Debug)]
pub struct WeylGrid {
    grid: PhaseGrid,
    values: Vec<C64>,
    edge_mass: f64,
}

/// Edge mass above this fraction marks an operator as not band limited
/// for the wrap-around grid; see [`band_limit_defect`].
pub const BAND_LIMIT_TOL: f64 = 1e-10;

impl WeylGrid {
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn value(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.n + j]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// sum over the grid times the cell area dq dp.
    pub fn integral(&self) -> C64 {
        let cell = self.grid.dq() * self.grid.dp();
        self.values.iter().sum::<C64>() * cell
    }

    /// Plain grid overlap `sum_a sum_b W1 W2 dq dp` (no conjugation: symbols
    /// of Hermitian operators are real). For band-limited smooth operators
    /// this approximates `Tr(A B)` up to the aliasing floor of the odd-chord
    /// interpolation; [`phase_space_expectation`] avoids that floor entirely.
    pub fn overlap(&self, other: &WeylGrid) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::Dimension("overlap of mismatched phase grids".into()));
        }
        let cell = self.grid.dq() * self.grid.dp();
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * cell)
    }

    fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sum_p W dp` per position point; for a Wigner function this is the
    /// position density `<q|rho|q>` scaled by 1/dq.
    pub fn position_marginal(&self) -> Vec<f64> {
        let n = self.grid.n;
        let dp = self.grid.dp();
        (0..n)
            .map(|i| self.values[i * n..(i + 1) * n].iter().map(|v| v.re).sum::<f64>() * dp)
            .collect()
    }

    /// `sum_q W dq` per momentum point, ascending in p.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let n = self.grid.n;
        let dq = self.grid.dq();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for (j, v) in self.values[i * n..(i + 1) * n].iter().enumerate() {
                out[j] += v.re;
            }
        }
        for v in &mut out {
            *v *= dq;
        }
        out
    }

    pub fn edge_mass(&self) -> f64 {
        self.edge_mass
    }

    /// True when the operator behind this symbol carried non-negligible
    /// weight near the box edges, so wrap-around artifacts are possible.
    pub fn band_limit_warning(&self) -> bool {
        self.edge_mass > BAND_LIMIT_TOL
    }

    /// `q,p,value` rows (real part), q varying slowest.
    pub fn write_csv(&self, mut out: impl io::Write) -> io::Result<()> {
        let q = self.grid.q_values();
        let p = self.grid.p_values();
        writeln!(out, "q,p,value")?;
        for (i, &qi) in q.iter().enumerate() {
            for (j, &pj) in p.iter().enumerate() {
                writeln!(out, "{},{},{}", qi, pj, self.value(i, j).re)?;
            }
        }
        Ok(())
    }

    /// Real part as little-endian f64, row-major, plus a `<path>.hdr` text
    /// sidecar recording the grid.
    pub fn write_raw(&self, path: &Path) -> io::Result<()> {
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
        }
        std::fs::write(path, &buf)?;
        let hdr = format!(
            "n={}\nq_min={}\nq_max={}\nhbar={}\nlayout=row-major, q slowest, p ascending, real f64 little-endian\n",
            self.grid.n, self.grid.q_min, self.grid.q_max, self.grid.hbar
        );
        let mut os = path.as_os_str().to_os_string();
        os.push(".hdr");
        std::fs::write(PathBuf::from(os), hdr)
    }
}

/// Interpolation weights for the midpoint of an 8-point symmetric stencil
/// (Lagrange nodes -4..3 evaluated at -1/2). They sum to one, so constant
/// chords, and with them circulant operators, are reproduced exactly.
fn halfpoint_taps() -> [(i64, f64); 8] {
    let mut taps = [(0i64, 0.0f64); 8];
    for (i, t) in taps.iter_mut().enumerate() {
        let si = i as i64 - 4;
        let mut w = 1.0;
        for m in 0..8 {
            if m != i {
                let sm = m as i64 - 4;
                w *= (-0.5 - sm as f64) / ((si - sm) as f64);
            }
        }
        *t = (si, w);
    }
    taps
}

/// Chord samples of `a` around center `c`, indexed by the signed offset k
/// wrapped into 0..n. Even offsets are matrix elements of the rotated
/// matrix; odd offsets are interpolated between neighboring centers.
fn chord_row(a: &CMat, n: usize, c: usize, taps: &[(i64, f64); 8], out: &mut [C64]) {
    let ni = n as i64;
    let ci = c as i64;
    for ks in -(ni / 2)..(ni / 2) {
        let slot = ks.rem_euclid(ni) as usize;
        out[slot] = if ks % 2 == 0 {
            let r = ks / 2;
            let x = (ci + r).rem_euclid(ni) as usize;
            let y = (ci - r).rem_euclid(ni) as usize;
            a[(x, y)]
        } else {
            let rp = (ks + 1) / 2;
            let mut acc = C64::new(0.0, 0.0);
            for &(s, w) in taps {
                let x = (ci + rp + s).rem_euclid(ni) as usize;
                let y = (x as i64 - ks).rem_euclid(ni) as usize;
                acc += a[(x, y)] * w;
            }
            acc
        };
    }
}

/// Weyl symbol of `a` on the grid. Exact for diagonal and circulant
/// operators; for generic band-limited operators the odd-chord
/// interpolation converges at 8th order in the grid step.
pub fn weyl_symbol(a: &CMat, grid: &PhaseGrid) -> Result<WeylGrid> {
    let n = grid.n;
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, grid has {} points",
            a.nrows(),
            a.ncols(),
            n
        )));
    }
    let taps = halfpoint_taps();
    let mut values = vec![C64::new(0.0, 0.0); n * n];
    let mut row = vec![C64::new(0.0, 0.0); n];
    for c in 0..n {
        chord_row(a, n, c, &taps, &mut row);
        fft_raw(&mut row, true);
        // fft order -> ascending p
        let out = &mut values[c * n..(c + 1) * n];
        for (js, v) in out.iter_mut().enumerate() {
            *v = row[(js + n / 2) % n];
        }
    }
    Ok(WeylGrid { grid: *grid, values, edge_mass: band_limit_defect(a, grid) })
}

/// Wigner function of a state: the symbol of rho divided by h, so the grid
/// sum times dq dp is the trace.
pub fn wigner_function(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<WeylGrid> {
    let mut w = weyl_symbol(rho.mat(), grid)?;
    let h = grid.h();
    for v in &mut w.values {
        *v /= h;
    }
    Ok(w)
}

/// Fraction of the squared Frobenius mass of `a` sitting in rows or columns
/// within 10% of the box edges. The grid wraps, so operators carrying weight
/// there alias across the boundary and their symbols are unreliable.
pub fn band_limit_defect(a: &CMat, grid: &PhaseGrid) -> f64 {
    let n = grid.n;
    assert_eq!(a.nrows(), n, "operator size does not match the grid");
    assert_eq!(a.ncols(), n);
    let margin = n / 10;
    let edge = |i: usize| i < margin || i >= n - margin;
    let mut near = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            let m = v.norm_sqr();
            total += m;
            if edge(i) || edge(j) {
                near += m;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        near / total
    }
}

/// Phase-space average `sum W_rho W~_O dq dp` evaluated chord class by chord
/// class on the doubled center lattice, where odd chords are exact matrix
/// elements on half-integer centers and the momentum sum telescopes. The
/// result equals `Tr(rho O)` to roundoff for any operators on the grid; no
/// interpolation enters. Returns the real part; see
/// [`phase_space_expectation_complex`] for non-Hermitian observables.
pub fn phase_space_expectation(rho: &DensityMatrix, o: &CMat, grid: &PhaseGrid) -> Result<f64> {
    phase_space_expectation_complex(rho, o, grid).map(|z| z.re)
}

/// Complex phase-space mean. For a non-Hermitian observable (a product of
/// two Hermitian ones, say) the imaginary part carries the commutator and
/// is reported as is.
pub fn phase_space_expectation_complex(
    rho: &DensityMatrix,
    o: &CMat,
    grid: &PhaseGrid,
) -> Result<C64> {
    let n = grid.n;
    if rho.dim() != n || o.nrows() != n || o.ncols() != n {
        return Err(Error::Dimension(format!(
            "state dim {} / observable {}x{} vs grid {}",
            rho.dim(),
            o.nrows(),
            o.ncols(),
            n
        )));
    }
    let a = rho.mat();
    let ni = n as i64;
    let mut acc = C64::new(0.0, 0.0);
    for ks in -(ni / 2)..(ni / 2) {
        // the state's chord k pairs with the observable's chord -k; the
        // unpaired k = -n/2 class pairs with itself
        let kneg = if ks == -(ni / 2) { ks } else { -ks };
        if ks % 2 == 0 {
            let r = ks / 2;
            let r2 = kneg / 2;
            for c in 0..ni {
                let x = (c + r).rem_euclid(ni) as usize;
                let y = (c - r).rem_euclid(ni) as usize;
                let x2 = (c + r2).rem_euclid(ni) as usize;
                let y2 = (c - r2).rem_euclid(ni) as usize;
                acc += a[(x, y)] * o[(x2, y2)];
            }
        } else {
            let rp = (ks + 1) / 2;
            let rp2 = (kneg + 1) / 2;
            for c in 0..ni {
                let x = (c + rp).rem_euclid(ni) as usize;
                let y = (x as i64 - ks).rem_euclid(ni) as usize;
                let x2 = (c + rp2).rem_euclid(ni) as usize;
                let y2 = (x2 as i64 - kneg).rem_euclid(ni) as usize;
                acc += a[(x, y)] * o[(x2, y2)];
            }
        }
    }
    Ok(acc)
}

/// Relative L2 mismatch between the symbol of the product `A B` and the
/// product of the symbols, restricted to a central window: points with
/// `|q - q_mid| <= q_frac * (box half width)` and `|p| <= p_frac * p_max`.
/// The fractions must lie in (0, 1]. For band-limited pairs the mismatch is
/// the leading Moyal correction and shrinks linearly in hbar.
pub fn moyal_defect_windowed(
    a: &CMat,
    b: &CMat,
    grid: &PhaseGrid,
    q_frac: f64,
    p_frac: f64,
) -> Result<f64> {
    if !(q_frac > 0.0 && q_frac <= 1.0 && p_frac > 0.0 && p_frac <= 1.0) {
        return Err(Error::Contract(format!(
            "window fractions ({q_frac}, {p_frac}) must lie in (0, 1]"
        )));
    }
    let wa = weyl_symbol(a, grid)?;
    let wb = weyl_symbol(b, grid)?;
    let wab = weyl_symbol(&a.mul(b), grid)?;
    let n = grid.n;
    let q = grid.q_values();
    let p = grid.p_values();
    let q_mid = 0.5 * (grid.q_min + grid.q_max);
    let q_win = q_frac * 0.5 * (grid.q_max - grid.q_min);
    let p_win = p_frac * p[0].abs();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        if (q[i] - q_mid).abs() > q_win {
            continue;
        }
        for j in 0..n {
            if p[j].abs() > p_win {
                continue;
            }
            let prod = wa.values[i * n + j] * wb.values[i * n + j];
            num += (wab.values[i * n + j] - prod).norm_sqr();
            den += prod.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(Error::Numeric("product of symbols vanishes on the window".into()));
    }
    Ok((num / den).sqrt())
}

/// [`moyal_defect_windowed`] over the whole grid.
pub fn moyal_defect(a: &CMat, b: &CMat, grid: &PhaseGrid) -> Result<f64> {
    moyal_defect_windowed(a, b, grid, 1.0, 1.0)
}

/// Quadratic reference dynamics with unit mass and frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dynamics {
    HarmonicOscillator,
    FreeParticle,
}

impl Dynamics {
    /// Grid Hamiltonian: the kinetic term is the circulant with momentum
    /// symbol p^2/2, the oscillator adds diag(q^2/2).
    pub fn hamiltonian(&self, grid: &PhaseGrid) -> CMat {
        let mut h = circulant_from_momentum(grid, |p| 0.5 * p * p);
        if let Dynamics::HarmonicOscillator = self {
            let q = grid.q_values();
            for (i, &qi) in q.iter().enumerate() {
                h[(i, i)] += 0.5 * qi * qi;
            }
        }
        // exact Hermitian symmetry, circulant roundoff is ~1 ulp
        h.add(&h.dagger()).scaled(C64::new(0.5, 0.0))
    }

    /// Classical flow over time t.
    fn flow(&self, t: f64, q: f64, p: f64) -> (f64, f64) {
        match self {
            Dynamics::HarmonicOscillator => {
                let (s, c) = t.sin_cos();
                (q * c + p * s, p * c - q * s)
            }
            Dynamics::FreeParticle => (q + p * t, p),
        }
    }
}

/// Relative L2 covariance defect of the Heisenberg evolution:
/// `|| W~_{U+ A U} - W~_A o flow(t) || / || W~_A ||` with
/// `U = exp(-i H t / hbar)`. For the quadratic flows here the Weyl symbol
/// transports classically, so the defect is interpolation-limited.
pub fn weyl_covariance_defect(
    a: &CMat,
    dynamics: Dynamics,
    t: f64,
    grid: &PhaseGrid,
) -> Result<f64> {
    let s0 = weyl_symbol(a, grid)?;
    let nrm = s0.l2_norm();
    if nrm == 0.0 {
        return Err(Error::Numeric("zero observable".into()));
    }
    let u_t = evolution_operator(dynamics, t, grid)?;
    let a_t = u_t.dagger().mul(a).mul(&u_t);
    let s1 = weyl_symbol(&a_t, grid)?;

    let sampler = Sampler::new(&s0);
    let q = grid.q_values();
    let p = grid.p_values();
    let n = grid.n;
    let mut num = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (qf, pf) = dynamics.flow(t, q[i], p[j]);
            num += (s1.values[i * n + j] - sampler.at(qf, pf)).norm_sqr();
        }
    }
    Ok(num.sqrt() / nrm)
}

/// Relative L2 distance between the Wigner function of `rho` and its pull
/// back along the classical flow, `|| W o flow(-t) - W || / || W ||`. Zero
/// (up to interpolation error) exactly when the state is a fixed point of
/// the phase-space propagator.
pub fn fp_fixed_point_defect(
    rho: &DensityMatrix,
    dynamics: Dynamics,
    t: f64,
    grid: &PhaseGrid,
) -> Result<f64> {
    let w = wigner_function(rho, grid)?;
    let nrm = w.l2_norm();
    if nrm == 0.0 {
        return Err(Error::Numeric("zero state".into()));
    }
    let sampler = Sampler::new(&w);
    let q = grid.q_values();
    let p = grid.p_values();
    let n = grid.n;
    let mut num = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (qb, pb) = dynamics.flow(-t, q[i], p[j]);
            num += (sampler.at(qb, pb) - w.values[i * n + j]).norm_sqr();
        }
    }
    Ok(num.sqrt() / nrm)
}

fn evolution_operator(dynamics: Dynamics, t: f64, grid: &PhaseGrid) -> Result<CMat> {
    let h = dynamics.hamiltonian(grid);
    let eig = crate::eig::hermitian_eigensystem(&h)?;
    let phases: Vec<C64> =
        eig.values.iter().map(|&e| C64::from_polar(1.0, -e * t / grid.hbar)).collect();
    let n = grid.n;
    let mut vp = eig.vectors.clone();
    for r in 0..n {
        for (k, z) in vp.row_mut(r).iter_mut().enumerate() {
            *z *= phases[k];
        }
    }
    Ok(vp.mul(&eig.vectors.dagger()))
}

/// Weyl quantization of a phase-space function: the inverse of
/// [`weyl_symbol`]. Chord transforms are taken on the doubled center grid
/// (integer and half-integer positions), so both parities map back without
/// interpolation; exact for functions of q alone, of p alone, and for
/// anything band limited up to the p-edge truncation of its symbol.
pub fn weyl_quantize(f: impl Fn(f64, f64) -> C64, grid: &PhaseGrid) -> Result<CMat> {
    let n = grid.n;
    let ni = n as i64;
    let pf = grid.p_fft();
    let dq2 = 0.5 * grid.dq();
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(2 * n);
    for m in 0..2 * n {
        let qc = grid.q_min + m as f64 * dq2;
        let mut row: Vec<C64> = pf.iter().map(|&p| f(qc, p)).collect();
        fft_raw(&mut row, false);
        for z in &mut row {
            *z /= n as f64;
        }
        rows.push(row);
    }
    let a = CMat::from_fn(n, n, |x, y| {
        // signed chord offset and its center, on the doubled grid
        let k = (x as i64 - y as i64 + ni / 2).rem_euclid(ni) - ni / 2;
        let m = (2 * x as i64 - k).rem_euclid(2 * ni) as usize;
        rows[m][k.rem_euclid(ni) as usize]
    });
    if a.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("symbol produced a non-finite value".into()));
    }
    Ok(a)
}

/// Normalized Gaussian wave packet `exp(-(q - q0)^2 / 2 hbar + i p0 q / hbar)`
/// sampled on the grid. Errors when the packet has no support on the box.
pub fn gaussian_packet(grid: &PhaseGrid, q0: f64, p0: f64) -> Result<Vec<C64>> {
    let hb = grid.hbar;
    let mut psi: Vec<C64> = grid
        .q_values()
        .iter()
        .map(|&q| C64::from_polar((-(q - q0) * (q - q0) / (2.0 * hb)).exp(), p0 * q / hb))
        .collect();
    let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm < 1e-150 {
        return Err(Error::Contract(format!("packet at q0 = {q0} vanishes on the grid")));
    }
    for z in &mut psi {
        *z /= nrm;
    }
    Ok(psi)
}

/// Unitary position-to-momentum transform, `U[m, a] = exp(-i k_m q_a) / sqrt(n)`
/// with `k_m = p_m / hbar`; `U rho U+` is the state in the momentum basis,
/// FFT index order.
pub fn momentum_transform(grid: &PhaseGrid) -> CMat {
    let n = grid.n;
    let scale = 1.0 / (n as f64).sqrt();
    let q = grid.q_values();
    let pf = grid.p_fft();
    let hb = grid.hbar;
    CMat::from_fn(n, n, |m, a| C64::from_polar(scale, -pf[m] * q[a] / hb))
}

fn circulant_from_momentum(grid: &PhaseGrid, f: impl Fn(f64) -> f64) -> CMat {
    let n = grid.n;
    let mut c: Vec<C64> = grid.p_fft().iter().map(|&p| C64::new(f(p), 0.0)).collect();
    fft_raw(&mut c, false);
    for z in &mut c {
        *z /= n as f64;
    }
    CMat::from_fn(n, n, |a, b| c[(a + n - b) % n])
}

/// Momentum operator on the grid: the circulant whose symbol is p.
pub fn momentum_operator(grid: &PhaseGrid) -> CMat {
    let m = circulant_from_momentum(grid, |p| p);
    m.add(&m.dagger()).scaled(C64::new(0.5, 0.0))
}

/// Position operator, diag(q).
pub fn position_operator(grid: &PhaseGrid) -> CMat {
    let q = grid.q_values();
    CMat::from_fn(grid.n, grid.n, |a, b| {
        if a == b {
            C64::new(q[a], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Bicubic Catmull-Rom interpolation on a [`WeylGrid`]; points outside the
/// box, and stencil taps past the edges, read zero. Appropriate for symbols
/// that decay before the boundary, which band limitation guarantees.
struct Sampler<'a> {
    v: &'a [C64],
    n: i64,
    q0: f64,
    dq: f64,
    p0: f64,
    dp: f64,
    q_last: f64,
    p_last: f64,
}

impl<'a> Sampler<'a> {
    fn new(w: &'a WeylGrid) -> Self {
        let g = &w.grid;
        let n = g.n as i64;
        let q0 = g.q_min;
        let dq = g.dq();
        let p = g.p_values();
        Sampler {
            v: &w.values,
            n,
            q0,
            dq,
            p0: p[0],
            dp: g.dp(),
            q_last: q0 + (g.n - 1) as f64 * dq,
            p_last: p[g.n - 1],
        }
    }

    fn at(&self, q: f64, p: f64) -> C64 {
        if q < self.q0 || q > self.q_last || p < self.p0 || p > self.p_last {
            return C64::new(0.0, 0.0);
        }
        let xi = (q - self.q0) / self.dq;
        let yi = (p - self.p0) / self.dp;
        let i0 = xi.floor() as i64;
        let j0 = yi.floor() as i64;
        let tx = xi - i0 as f64;
        let ty = yi - j0 as f64;
        let zero = C64::new(0.0, 0.0);
        let mut col = [zero; 4];
        for (di, out) in col.iter_mut().enumerate() {
            let i = i0 + di as i64 - 1;
            if i < 0 || i >= self.n {
                continue;
            }
            let row = &self.v[(i * self.n) as usize..((i + 1) * self.n) as usize];
            let mut line = [zero; 4];
            for (dj, lv) in line.iter_mut().enumerate() {
                let j = j0 + dj as i64 - 1;
                if (0..self.n).contains(&j) {
                    *lv = row[j as usize];
                }
            }
            *out = catmull(&line, ty);
        }
        catmull(&col, tx)
    }
}

fn catmull(v: &[C64; 4], t: f64) -> C64 {
    let [a, b, c, d] = *v;
    b + (c - a + (a * 2.0 - b * 5.0 + c * 4.0 - d + ((b - c) * 3.0 + d - a) * t) * t) * t * 0.5
}
