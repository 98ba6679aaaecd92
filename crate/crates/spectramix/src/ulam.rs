//! Ulam discretization of a map's transfer operator and its invariant density.
//!
//! Each grid cell is covered with an s x s lattice of sample points; the
//! fraction of samples carried into cell j by t steps of the map becomes the
//! matrix entry P[j, i]. Columns are stochastic by construction. The matrix is
//! stored column-sparse: at most s^2 destinations per column, against n^2
//! rows, so a dense layout would be pure waste.

use crate::maps::{apply_map, GridDensity, MapSpec};
use crate::{Error, Result};
use rayon::prelude::*;

const SUBSAMPLES: usize = 8;
const MAX_RESOLUTION: usize = 256;
const DENSITY_TOL: f64 = 1e-10;
const MAX_POWER_ITERATIONS: usize = 100_000;

/// Column-stochastic transfer matrix on an n x n grid, column-major sparse.
pub struct TransferMatrix {
    n: usize,
    cols: Vec<Vec<(u32, f64)>>,
}

impl TransferMatrix {
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// (row, weight) pairs of column i, rows ascending.
    pub fn column(&self, i: usize) -> impl Iterator<Item = (&u32, &f64)> {
        self.cols[i].iter().map(|(j, w)| (j, w))
    }

    /// max_i |sum_j P[j, i] - 1|
    pub fn column_sum_deviation(&self) -> f64 {
        self.cols
            .iter()
            .map(|col| (col.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Row sums; exactly 1 only when the discretized map is doubly stochastic.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim()];
        for col in &self.cols {
            for (j, w) in col {
                sums[*j as usize] += w;
            }
        }
        sums
    }

    /// f' = P f
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.dim(), "vector length mismatch");
        let mut out = vec![0.0; self.dim()];
        for (i, col) in self.cols.iter().enumerate() {
            let fi = f[i];
            if fi == 0.0 {
                continue;
            }
            for (j, w) in col {
                out[*j as usize] += w * fi;
            }
        }
        out
    }
}

/// Discretize t steps of the map at resolution n. t = 0 yields the identity.
pub fn ulam_transfer_matrix(map: &MapSpec, n: usize, t: usize) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::Dimension("grid resolution must be positive".into()));
    }
    if n > MAX_RESOLUTION {
        return Err(Error::Resource(format!(
            "resolution {n} exceeds the supported maximum {MAX_RESOLUTION}"
        )));
    }
    let s = SUBSAMPLES;
    let weight = 1.0 / (s * s) as f64;
    let cols: Vec<Vec<(u32, f64)>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (iq, ip) = (idx / n, idx % n);
            let mut landed: Vec<u32> = Vec::with_capacity(s * s);
            for a in 0..s {
                let q = (iq as f64 + (a as f64 + 0.5) / s as f64) / n as f64;
                for b in 0..s {
                    let p = (ip as f64 + (b as f64 + 0.5) / s as f64) / n as f64;
                    let (q1, p1) = apply_map(map, (q, p), t);
                    let jq = ((q1 * n as f64) as usize).min(n - 1);
                    let jp = ((p1 * n as f64) as usize).min(n - 1);
                    landed.push((jq * n + jp) as u32);
                }
            }
            landed.sort_unstable();
            let mut col: Vec<(u32, f64)> = Vec::new();
            for j in landed {
                match col.last_mut() {
                    Some((last, w)) if *last == j => *w += weight,
                    _ => col.push((j, weight)),
                }
            }
            col
        })
        .collect();
    Ok(TransferMatrix { n, cols })
}

/// Fixed point of P by power iteration from the uniform density.
pub fn invariant_density(p: &TransferMatrix) -> Result<GridDensity> {
    let dim = p.dim();
    let mut f = vec![1.0; dim];
    for _ in 0..MAX_POWER_ITERATIONS {
        let next = p.apply(&f);
        let change: f64 = next.iter().zip(&f).map(|(a, b)| (a - b).abs()).sum::<f64>()
            / dim as f64;
        f = next;
        if change < DENSITY_TOL {
            // column sums hold the total mass fixed up to roundoff; pin the
            // mean back to 1 so downstream normalization checks stay exact
            let mean = f.iter().sum::<f64>() / dim as f64;
            for v in &mut f {
                *v /= mean;
            }
            return GridDensity::new(p.resolution(), f);
        }
    }
    Err(Error::Numeric(
        "transfer-operator power iteration did not converge".into(),
    ))
}
