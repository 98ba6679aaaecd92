//! Dense Hermitian and unitary eigensolvers.
//!
//! Cyclic Jacobi, kept self-contained on purpose: desk-scale matrices
//! (n <= a few thousand), machine-precision off-diagonal convergence, no
//! external linear-algebra dependency. A real-symmetric fast path avoids
//! paying complex arithmetic for real ensembles.
//!
//! Unitary matrices are diagonalized through the commuting Hermitian pair
//! H1 = (U+U†)/2, H2 = (U−U†)/(2i): eigenvectors of H1, with near-degenerate
//! H1 clusters re-diagonalized in the projected H2 to separate phases that
//! share a cosine.

use crate::matrix::{CMat, C64};
use crate::{Error, Result};
use std::f64::consts::PI;

pub struct EigH {
    /// ascending
    pub values: Vec<f64>,
    /// orthonormal columns, k-th column pairs with values[k]
    pub vectors: CMat,
}

pub struct UnitaryEig {
    /// ascending in (-pi, pi]; the eigenvalue of U paired with phases[k] is e^{-i phases[k]}
    pub phases: Vec<f64>,
    pub vectors: CMat,
    /// smallest circular gap between adjacent phases
    pub min_phase_gap: f64,
    /// set when min_phase_gap is below resolvable tolerance
    pub degenerate: bool,
}

const MAX_SWEEPS: usize = 60;
// off-diagonal Frobenius target relative to ||H||_F
const OFF_TOL: f64 = 1e-13;

fn off_norm_complex(m: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += m[i * n + j].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// One cyclic sweep over all (p, q) pairs. `m` is kept Hermitian by explicit
/// column mirroring after each row rotation.
fn jacobi_sweep_complex(m: &mut [C64], vt: &mut [C64], n: usize) {
    for p in 0..n - 1 {
        for q in p + 1..n {
            let hpq = m[p * n + q];
            let r = hpq.norm();
            if r == 0.0 {
                continue;
            }
            let u = hpq / r; // e^{i phi}
            let alpha = m[p * n + p].re;
            let beta = m[q * n + q].re;
            let tau = (beta - alpha) / (2.0 * r);
            let t = if tau >= 0.0 {
                -1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            // rows p and q of H (left factor U†, right factor via mirroring)
            {
                let (head, tail) = m.split_at_mut(q * n);
                let row_p = &mut head[p * n..p * n + n];
                let row_q = &mut tail[..n];
                let su = u.scale(s);
                let suc = u.conj().scale(s);
                for i in 0..n {
                    let hp = row_p[i];
                    let hq = row_q[i];
                    row_p[i] = hp.scale(c) + su * hq;
                    row_q[i] = hq.scale(c) - suc * hp;
                }
            }
            let two_rsc = 2.0 * r * s * c;
            m[p * n + p] = C64::new(alpha * c * c + two_rsc + beta * s * s, 0.0);
            m[q * n + q] = C64::new(alpha * s * s - two_rsc + beta * c * c, 0.0);
            m[p * n + q] = C64::new(0.0, 0.0);
            m[q * n + p] = C64::new(0.0, 0.0);
            for i in 0..n {
                if i != p && i != q {
                    m[i * n + p] = m[p * n + i].conj();
                    m[i * n + q] = m[q * n + i].conj();
                }
            }

            // accumulate V <- V * J as row operations on V^T
            {
                let (head, tail) = vt.split_at_mut(q * n);
                let row_p = &mut head[p * n..p * n + n];
                let row_q = &mut tail[..n];
                let suc = u.conj().scale(s);
                let su = u.scale(s);
                for i in 0..n {
                    let vp = row_p[i];
                    let vq = row_q[i];
                    row_p[i] = vp.scale(c) + suc * vq;
                    row_q[i] = vq.scale(c) - su * vp;
                }
            }
        }
    }
}

fn off_norm_real(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += m[i * n + j] * m[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

fn jacobi_sweep_real(m: &mut [f64], vt: &mut [f64], n: usize) {
    for p in 0..n - 1 {
        for q in p + 1..n {
            let hpq = m[p * n + q];
            if hpq == 0.0 {
                continue;
            }
            let r = hpq.abs();
            let u = hpq / r; // +-1
            let alpha = m[p * n + p];
            let beta = m[q * n + q];
            let tau = (beta - alpha) / (2.0 * r);
            let t = if tau >= 0.0 {
                -1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            let su = s * u;
            {
                let (head, tail) = m.split_at_mut(q * n);
                let row_p = &mut head[p * n..p * n + n];
                let row_q = &mut tail[..n];
                for i in 0..n {
                    let hp = row_p[i];
                    let hq = row_q[i];
                    row_p[i] = c * hp + su * hq;
                    row_q[i] = c * hq - su * hp;
                }
            }
            let two_rsc = 2.0 * r * s * c;
            m[p * n + p] = alpha * c * c + two_rsc + beta * s * s;
            m[q * n + q] = alpha * s * s - two_rsc + beta * c * c;
            m[p * n + q] = 0.0;
            m[q * n + p] = 0.0;
            for i in 0..n {
                if i != p && i != q {
                    m[i * n + p] = m[p * n + i];
                    m[i * n + q] = m[q * n + i];
                }
            }
            {
                let (head, tail) = vt.split_at_mut(q * n);
                let row_p = &mut head[p * n..p * n + n];
                let row_q = &mut tail[..n];
                for i in 0..n {
                    let vp = row_p[i];
                    let vq = row_q[i];
                    row_p[i] = c * vp + su * vq;
                    row_q[i] = c * vq - su * vp;
                }
            }
        }
    }
}

/// Pack (unsorted eigenvalue, V^T row) pairs into an ascending EigH.
fn pack(values: Vec<f64>, vt_rows: impl Fn(usize, usize) -> C64, n: usize) -> EigH {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let sorted: Vec<f64> = order.iter().map(|k| values[*k]).collect();
    let vectors = CMat::from_fn(n, n, |i, col| vt_rows(order[col], i));
    EigH { values: sorted, vectors }
}

pub fn hermitian_eigensystem(h: &CMat) -> Result<EigH> {
    if !h.is_square() {
        return Err(Error::Dimension("eigensystem needs a square matrix".into()));
    }
    let n = h.nrows();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if n > 4096 {
        return Err(Error::Resource(format!("n = {n} exceeds the dense solver limit 4096")));
    }
    let scale = h.max_abs();
    if h.hermitian_defect() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract("matrix is not Hermitian within tolerance".into()));
    }
    if scale == 0.0 {
        return Ok(EigH { values: vec![0.0; n], vectors: CMat::identity(n) });
    }
    let fro = h.fro_norm();

    let all_real = h.data().iter().all(|z| z.im == 0.0);
    if all_real {
        let mut m: Vec<f64> = h.data().iter().map(|z| z.re).collect();
        // symmetrize roundoff-level asymmetry so mirroring is exact
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
                m[i * n + j] = avg;
                m[j * n + i] = avg;
            }
        }
        let mut vt = vec![0.0f64; n * n];
        for i in 0..n {
            vt[i * n + i] = 1.0;
        }
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if off_norm_real(&m, n) <= OFF_TOL * fro {
                converged = true;
                break;
            }
            jacobi_sweep_real(&mut m, &mut vt, n);
        }
        if !converged && off_norm_real(&m, n) > OFF_TOL * fro {
            return Err(Error::Numeric("jacobi did not converge".into()));
        }
        let values: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
        return Ok(pack(values, |row, i| C64::new(vt[row * n + i], 0.0), n));
    }

    let mut m: Vec<C64> = h.data().to_vec();
    for i in 0..n {
        m[i * n + i] = C64::new(m[i * n + i].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[i * n + j] + m[j * n + i].conj()).scale(0.5);
            m[i * n + j] = avg;
            m[j * n + i] = avg.conj();
        }
    }
    let mut vt = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        vt[i * n + i] = C64::new(1.0, 0.0);
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm_complex(&m, n) <= OFF_TOL * fro {
            converged = true;
            break;
        }
        jacobi_sweep_complex(&mut m, &mut vt, n);
    }
    if !converged && off_norm_complex(&m, n) > OFF_TOL * fro {
        return Err(Error::Numeric("jacobi did not converge".into()));
    }
    let values: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    Ok(pack(values, |row, i| vt[row * n + i], n))
}

/// Near-degenerate clusters of H1 eigenvalues wider than this are
/// re-diagonalized in the projected skew part. Kept coarse: within a cluster
/// the final phase comes from Rayleigh quotients, so over-clustering is
/// harmless, while under-clustering mixes +-phi pairs.
const CLUSTER_GAP: f64 = 1e-2;

pub fn unitary_eigenphases(u: &CMat) -> Result<UnitaryEig> {
    if !u.is_square() {
        return Err(Error::Dimension("eigenphases need a square matrix".into()));
    }
    let n = u.nrows();
    if u.unitarity_defect() > 1e-8 {
        return Err(Error::Contract("matrix is not unitary within tolerance".into()));
    }
    let udag = u.dagger();
    let h1 = u.add(&udag).scaled(C64::new(0.5, 0.0));
    let h2 = u.sub(&udag).scaled(C64::new(0.0, -0.5));
    let eig1 = hermitian_eigensystem(&h1)?;
    let mut v = eig1.vectors;

    // rotate each near-degenerate cosine cluster into eigenvectors of the
    // projected sine part (H1 and H2 commute, so this diagonalizes both)
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && eig1.values[end] - eig1.values[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let vc = CMat::from_fn(n, m, |i, j| v[(i, start + j)]);
            let b = vc.dagger().mul(&h2).mul(&vc);
            let eig_b = hermitian_eigensystem(&b)?;
            let rotated = vc.mul(&eig_b.vectors);
            for j in 0..m {
                for i in 0..n {
                    v[(i, start + j)] = rotated[(i, j)];
                }
            }
        }
        start = end;
    }

    // phases from per-column Rayleigh quotients of both Hermitian parts
    let w1 = h1.mul(&v);
    let w2 = h2.mul(&v);
    let mut phases: Vec<f64> = (0..n)
        .map(|k| {
            let mut mu1 = 0.0;
            let mut mu2 = 0.0;
            for i in 0..n {
                let vc = v[(i, k)].conj();
                mu1 += (vc * w1[(i, k)]).re;
                mu2 += (vc * w2[(i, k)]).re;
            }
            // eigenvalue mu1 + i mu2 = e^{-i phi}
            let phi = (-mu2).atan2(mu1);
            if phi <= -PI {
                phi + 2.0 * PI
            } else {
                phi
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| phases[*a].total_cmp(&phases[*b]));
    let vectors = CMat::from_fn(n, n, |i, col| v[(i, order[col])]);
    phases.sort_by(f64::total_cmp);

    let mut min_gap = f64::INFINITY;
    if n > 1 {
        for w in phases.windows(2) {
            min_gap = min_gap.min(w[1] - w[0]);
        }
        min_gap = min_gap.min(phases[0] + 2.0 * PI - phases[n - 1]);
    }
    Ok(UnitaryEig { phases, vectors, min_phase_gap: min_gap, degenerate: min_gap < 1e-9 })
}
