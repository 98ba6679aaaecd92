//! Mixed-state construction that realizes a prescribed set of measurement
//! probabilities with rank-one projectors: a three-weight mixture rho* =
//! alpha |1><1| + beta |2><2| + gamma |3><3| together with projectors onto
//! u |1> + v |2>, whose weights solve alpha u^2 + beta v^2 = p exactly.

use crate::{CMat, DensityMatrix, Error, Result, C64};

#[derive(Clone, Debug)]
pub struct WeakLimitConstruction {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho_star: DensityMatrix,
    /// projector reproducing the joint probability
    pub joint_projector: CMat,
    /// projectors reproducing each marginal, in input order
    pub marginal_projectors: Vec<CMat>,
    pub u: f64,
    pub v: f64,
    pub u_marginals: Vec<f64>,
    pub v_marginals: Vec<f64>,
    /// max-entry distance between the joint projector and the ordered product
    /// of the marginal ones. Reported, never asserted: the marginal
    /// projectors need not commute at finite dimension, so their product is
    /// generally not even a projector.
    pub product_defect: f64,
}

/// Mixture weights from the 0.9-interpolation defaults: alpha sits 10% below
/// the smallest probability, beta 90% of the way from the largest toward 1/2.
pub fn weak_limit_construction(
    p_marginals: &[f64],
    p_joint: f64,
    dim: usize,
) -> Result<WeakLimitConstruction> {
    check_probabilities(p_marginals, p_joint)?;
    let mut lo = p_joint;
    let mut hi = p_joint;
    for p in p_marginals {
        lo = lo.min(*p);
        hi = hi.max(*p);
    }
    let alpha = 0.9 * lo;
    let beta = (hi + 0.9 * (0.5 - hi)).min(0.5);
    weak_limit_construction_with(p_marginals, p_joint, dim, alpha, beta)
}

/// Same construction with explicit mixture weights alpha, beta. They must
/// strictly bracket every input probability, with beta at most 1/2.
pub fn weak_limit_construction_with(
    p_marginals: &[f64],
    p_joint: f64,
    dim: usize,
    alpha: f64,
    beta: f64,
) -> Result<WeakLimitConstruction> {
    check_probabilities(p_marginals, p_joint)?;
    if dim < 3 {
        return Err(Error::Contract(format!(
            "construction needs three orthogonal states, got dimension {dim}"
        )));
    }
    let lo = p_marginals.iter().fold(p_joint, |acc, p| acc.min(*p));
    let hi = p_marginals.iter().fold(p_joint, |acc, p| acc.max(*p));
    if !(alpha > 0.0) || alpha >= lo {
        return Err(Error::Contract(format!(
            "alpha must lie in (0, min probability): {alpha} vs min {lo}"
        )));
    }
    if beta <= hi || beta > 0.5 {
        return Err(Error::Contract(format!(
            "beta must lie in (max probability, 1/2]: {beta} vs max {hi}"
        )));
    }
    let gamma = 1.0 - alpha - beta;

    let mut weights = vec![C64::new(0.0, 0.0); dim];
    weights[0] = C64::new(alpha, 0.0);
    weights[1] = C64::new(beta, 0.0);
    weights[2] = C64::new(gamma, 0.0);
    let rho_star = DensityMatrix::new(CMat::diag(&weights))?;

    let split = |p: f64| -> (f64, f64) {
        let span = beta - alpha;
        (((beta - p) / span).sqrt(), ((p - alpha) / span).sqrt())
    };
    let projector = |u: f64, v: f64| -> CMat {
        let mut m = CMat::zeros(dim, dim);
        m[(0, 0)] = C64::new(u * u, 0.0);
        m[(0, 1)] = C64::new(u * v, 0.0);
        m[(1, 0)] = C64::new(u * v, 0.0);
        m[(1, 1)] = C64::new(v * v, 0.0);
        m
    };

    let (u, v) = split(p_joint);
    let joint_projector = projector(u, v);
    let mut u_marginals = Vec::with_capacity(p_marginals.len());
    let mut v_marginals = Vec::with_capacity(p_marginals.len());
    let mut marginal_projectors = Vec::with_capacity(p_marginals.len());
    for p in p_marginals {
        let (um, vm) = split(*p);
        u_marginals.push(um);
        v_marginals.push(vm);
        marginal_projectors.push(projector(um, vm));
    }

    let mut product = marginal_projectors[0].clone();
    for p in &marginal_projectors[1..] {
        product = product.mul(p);
    }
    let product_defect = joint_projector.sub(&product).max_abs();

    let construction = WeakLimitConstruction {
        alpha,
        beta,
        gamma,
        rho_star,
        joint_projector,
        marginal_projectors,
        u,
        v,
        u_marginals,
        v_marginals,
        product_defect,
    };
    construction.verify(p_marginals, p_joint)?;
    Ok(construction)
}

fn check_probabilities(p_marginals: &[f64], p_joint: f64) -> Result<()> {
    if p_marginals.is_empty() {
        return Err(Error::Contract("need at least one marginal probability".into()));
    }
    for p in p_marginals.iter().chain(std::iter::once(&p_joint)) {
        if !p.is_finite() || *p <= 0.0 || *p >= 0.5 {
            return Err(Error::Contract(format!("probability {p} outside the open range (0, 1/2)")));
        }
    }
    Ok(())
}

impl WeakLimitConstruction {
    /// The construction is algebraically exact; anything past roundoff in the
    /// trace identities means the inputs were inconsistent with the weights.
    fn verify(&self, p_marginals: &[f64], p_joint: f64) -> Result<()> {
        let joint = self.rho_star.expectation(&self.joint_projector).re;
        if (joint - p_joint).abs() > 1e-12 {
            return Err(Error::Numeric(format!(
                "joint trace identity broke: {joint} vs {p_joint}"
            )));
        }
        for (proj, p) in self.marginal_projectors.iter().zip(p_marginals) {
            let tr = self.rho_star.expectation(proj).re;
            if (tr - p).abs() > 1e-12 {
                return Err(Error::Numeric(format!("marginal trace identity broke: {tr} vs {p}")));
            }
        }
        Ok(())
    }
}
