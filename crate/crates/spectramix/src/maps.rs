//! Measure-preserving maps on the unit torus, grid subsets and densities,
//! mixing correlations, and the factorization defect of time-separated sets.
//!
//! All set measures use cell-center membership on an n x n grid. The baker and
//! cat maps act affinely on dyadic rationals, so cell centers land in exactly
//! determined cells and the correlation estimates carry no rounding noise.

use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq)]
pub enum MapSpec {
    Baker,
    ArnoldCat,
    StandardMap { k: f64 },
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    // rem_euclid can return 1.0 when x is a tiny negative
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

fn step(map: &MapSpec, (q, p): (f64, f64)) -> (f64, f64) {
    match map {
        MapSpec::Baker => {
            let b = if q >= 0.5 { 1.0 } else { 0.0 };
            (wrap(2.0 * q), (p + b) / 2.0)
        }
        MapSpec::ArnoldCat => (wrap(q + p), wrap(q + 2.0 * p)),
        MapSpec::StandardMap { k } => {
            let kick = k / TAU * (TAU * q).sin();
            (wrap(q + p + kick), wrap(p + kick))
        }
    }
}

fn step_back(map: &MapSpec, (q, p): (f64, f64)) -> (f64, f64) {
    match map {
        MapSpec::Baker => {
            let b = if p >= 0.5 { 1.0 } else { 0.0 };
            ((q + b) / 2.0, wrap(2.0 * p - b))
        }
        MapSpec::ArnoldCat => (wrap(2.0 * q - p), wrap(p - q)),
        MapSpec::StandardMap { k } => {
            let q0 = wrap(q - p);
            (q0, wrap(p - k / TAU * (TAU * q0).sin()))
        }
    }
}

/// t-fold composition of the one-step map; t = 0 is the identity.
pub fn apply_map(map: &MapSpec, point: (f64, f64), t: usize) -> (f64, f64) {
    let mut x = point;
    for _ in 0..t {
        x = step(map, x);
    }
    x
}

/// t-fold composition of the inverse map (all three maps are invertible).
pub fn apply_map_inverse(map: &MapSpec, point: (f64, f64), t: usize) -> (f64, f64) {
    let mut x = point;
    for _ in 0..t {
        x = step_back(map, x);
    }
    x
}

/// Boolean indicator on an n x n grid over [0,1)^2; cell (iq, ip) covers
/// [iq/n, (iq+1)/n) x [ip/n, (ip+1)/n).
#[derive(Clone, Debug)]
pub struct GridMask {
    n: usize,
    cells: Vec<bool>,
}

impl GridMask {
    /// Indicator evaluated at cell centers.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> bool) -> Self {
        let mut cells = Vec::with_capacity(n * n);
        for iq in 0..n {
            let q = (iq as f64 + 0.5) / n as f64;
            for ip in 0..n {
                let p = (ip as f64 + 0.5) / n as f64;
                cells.push(f(q, p));
            }
        }
        GridMask { n, cells }
    }

    /// Half-open rectangle [q0,q1) x [p0,p1).
    pub fn from_rect(n: usize, q0: f64, q1: f64, p0: f64, p1: f64) -> Self {
        Self::from_fn(n, |q, p| q >= q0 && q < q1 && p >= p0 && p < p1)
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub fn measure(&self) -> f64 {
        self.count() as f64 / (self.n * self.n) as f64
    }

    /// Membership of an arbitrary point via its containing cell.
    pub fn contains(&self, (q, p): (f64, f64)) -> bool {
        let n = self.n;
        let iq = ((q * n as f64) as usize).min(n - 1);
        let ip = ((p * n as f64) as usize).min(n - 1);
        self.cells[iq * n + ip]
    }

    fn cell_center(&self, idx: usize) -> (f64, f64) {
        let n = self.n as f64;
        let (iq, ip) = (idx / self.n, idx % self.n);
        ((iq as f64 + 0.5) / n, (ip as f64 + 0.5) / n)
    }
}

/// Non-negative density on the grid, normalized so the mean value is 1
/// (i.e. (1/n^2) sum = 1, the uniform density is identically 1).
#[derive(Clone, Debug)]
pub struct GridDensity {
    n: usize,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Dimension(format!(
                "density needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::Contract("density values must be non-negative".into()));
        }
        let mean = values.iter().sum::<f64>() / (n * n) as f64;
        if (mean - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("density mean {mean} != 1")));
        }
        Ok(GridDensity { n, values })
    }

    pub fn uniform(n: usize) -> Self {
        GridDensity { n, values: vec![1.0; n * n] }
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// integral of the density over the mask: (1/n^2) sum_{cells in mask} f
    pub fn measure_of(&self, mask: &GridMask) -> f64 {
        let total: f64 = self
            .values
            .iter()
            .zip(&mask.cells)
            .filter(|(_, m)| **m)
            .map(|(v, _)| v)
            .sum();
        total / (self.n * self.n) as f64
    }
}

fn check_same_resolution(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("grid resolutions differ: {a} vs {b}")));
    }
    Ok(())
}

/// C(T_t A, B) = mu(T_t A n B) - mu(A) mu(B), estimated by mapping the cell
/// centers of A forward t steps and counting membership in B.
pub fn mixing_correlation(map: &MapSpec, a: &GridMask, b: &GridMask, t: usize) -> Result<f64> {
    check_same_resolution(a.n, b.n)?;
    let n2 = (a.n * a.n) as f64;
    let hits: usize = a
        .cells
        .par_iter()
        .enumerate()
        .filter(|(_, inside)| **inside)
        .filter(|(idx, _)| b.contains(apply_map(map, a.cell_center(*idx), t)))
        .count();
    Ok(hits as f64 / n2 - a.measure() * b.measure())
}

/// C(T_t A, B) for t = 0..=t_max, advancing the image of A one step at a time.
pub fn mixing_correlation_scan(
    map: &MapSpec,
    a: &GridMask,
    b: &GridMask,
    t_max: usize,
) -> Result<Vec<f64>> {
    check_same_resolution(a.n, b.n)?;
    let n2 = (a.n * a.n) as f64;
    let product = a.measure() * b.measure();
    let mut points: Vec<(f64, f64)> = a
        .cells
        .iter()
        .enumerate()
        .filter(|(_, inside)| **inside)
        .map(|(idx, _)| a.cell_center(idx))
        .collect();
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let hits: usize = points.par_iter().filter(|pt| b.contains(**pt)).count();
        out.push(hits as f64 / n2 - product);
        if t < t_max {
            points.par_iter_mut().for_each(|pt| *pt = step(map, *pt));
        }
    }
    Ok(out)
}

/// D = | integral of f* . prod_i 1_{T_{t_i} A_i}  -  prod_i integral of f* . 1_{A_i} |.
///
/// Membership in T_t A is evaluated by pulling cell centers back t steps.
/// The right-hand side uses the untranslated sets: for an invariant f* the
/// translated and untranslated integrals agree, which is the regime where the
/// factorization property is meaningful. Equal offsets reproduce the literal
/// (unseparated) form and its known failure for overlapping sets.
pub fn factorization_defect(
    map: &MapSpec,
    f_star: &GridDensity,
    sets: &[GridMask],
    offsets: &[usize],
) -> Result<f64> {
    if sets.is_empty() || sets.len() != offsets.len() {
        return Err(Error::Dimension(format!(
            "need equally many sets and offsets, got {} and {}",
            sets.len(),
            offsets.len()
        )));
    }
    let n = f_star.n;
    for s in sets {
        check_same_resolution(s.n, n)?;
    }
    let n2 = (n * n) as f64;

    let terms: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let center = sets[0].cell_center(idx);
            let inside_all = sets
                .iter()
                .zip(offsets)
                .all(|(set, t)| set.contains(apply_map_inverse(map, center, *t)));
            if inside_all {
                f_star.values[idx]
            } else {
                0.0
            }
        })
        .collect();
    let joint = terms.iter().sum::<f64>() / n2;

    let product: f64 = sets.iter().map(|set| f_star.measure_of(set)).product();
    Ok((joint - product).abs())
}
