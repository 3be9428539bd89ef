//! Contextuality measures for triples `{A, B, C}` with `[A,B] = [B,C] = 0`.
//!
//! The state-independent quantity is the mutual information energy
//!
//! ```text
//! E(B; A, C) = (1/d) sum_{i,j} Tr[(P_i Q_j)^2]
//! ```
//!
//! with `P_i`, `Q_j` the joint-eigenspace projectors of `(A,B)` and `(C,B)`.
//! The state-dependent quantity is `D(G, rho) = |Tr([A,C] rho)|`, bounded above by
//! the spectral, purity-corrected, operator-norm and hybrid bounds and below
//! (through Robertson) by twice the uncertainty product.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    commutator, expectation, hs_norm, joint_eigenprojectors, op_norm, purity, variance, CMatrix,
    DensityMatrix, HermitianOperator, JointEigenspaceFamily, StateVector, Tolerances,
};

/// Slack allowed on range checks of `E` and `1 - E` before clamping.
pub const MIE_RANGE_TOL: f64 = 1e-9;
/// Slack on the Robertson inequality.
pub const ROBERTSON_TOL: f64 = 1e-9;

/// A measurement context: `B` commutes with both `A` and `C`.
///
/// `[A,C]` may vanish; such a context is legal and noncontextual.
#[derive(Debug, Clone)]
pub struct Context {
    a: HermitianOperator,
    b: HermitianOperator,
    c: HermitianOperator,
    ab: JointEigenspaceFamily,
    cb: JointEigenspaceFamily,
    ac: CMatrix,
}

impl Context {
    pub fn new(a: HermitianOperator, b: HermitianOperator, c: HermitianOperator) -> Result<Self> {
        Context::with_tolerances(a, b, c, Tolerances::default())
    }

    pub fn with_tolerances(
        a: HermitianOperator,
        b: HermitianOperator,
        c: HermitianOperator,
        tol: Tolerances,
    ) -> Result<Self> {
        let d = b.dim();
        for x in [&a, &c] {
            if x.dim() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: x.dim(),
                });
            }
        }
        if d < 3 {
            return Err(Error::validation(format!(
                "contexts need dimension at least 3, got {d}"
            )));
        }
        let ab = joint_eigenprojectors(&a, &b, tol)?;
        let cb = joint_eigenprojectors(&c, &b, tol)?;
        let ac = commutator(&a, &c)?;
        Ok(Context { a, b, c, ab, cb, ac })
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn a(&self) -> &HermitianOperator {
        &self.a
    }

    pub fn b(&self) -> &HermitianOperator {
        &self.b
    }

    pub fn c(&self) -> &HermitianOperator {
        &self.c
    }

    /// Joint eigenspaces of `(A, B)`.
    pub fn ab_family(&self) -> &JointEigenspaceFamily {
        &self.ab
    }

    /// Joint eigenspaces of `(C, B)`.
    pub fn cb_family(&self) -> &JointEigenspaceFamily {
        &self.cb
    }

    /// `[A, C]`.
    pub fn outer_commutator(&self) -> &CMatrix {
        &self.ac
    }
}

/// An ordered, nonempty collection of contexts of equal dimension.
#[derive(Debug, Clone)]
pub struct ContextFamily {
    contexts: Vec<Context>,
}

impl ContextFamily {
    pub fn new(contexts: Vec<Context>) -> Result<Self> {
        let first = contexts
            .first()
            .ok_or_else(|| Error::validation("a context family needs at least one context"))?;
        let d = first.dim();
        if let Some(bad) = contexts.iter().find(|c| c.dim() != d) {
            return Err(Error::Dimension {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(ContextFamily { contexts })
    }

    pub fn dim(&self) -> usize {
        self.contexts[0].dim()
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

/// A value of `E` clamped to `[1/d, 1]`, with the unclamped value kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MieValue {
    pub value: f64,
    pub raw: f64,
}

fn clamp_mie(raw: f64, d: usize) -> Result<MieValue> {
    let lo = 1.0 / d as f64;
    if !(lo - MIE_RANGE_TOL..=1.0 + MIE_RANGE_TOL).contains(&raw) {
        return Err(Error::numerical(format!(
            "mutual information energy {raw} outside [1/{d}, 1]"
        )));
    }
    Ok(MieValue {
        value: raw.clamp(lo, 1.0),
        raw,
    })
}

/// `Tr[(P Q)^2]`, real for Hermitian projectors.
fn overlap_energy(p: &CMatrix, q: &CMatrix) -> f64 {
    let pq = p * q;
    // Tr(X X) = sum_ij X_ij X_ji
    let d = pq.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (pq[(i, j)] * pq[(j, i)]).re;
        }
    }
    acc
}

/// Mutual information energy from the projector definition.
pub fn mie(ctx: &Context) -> Result<MieValue> {
    let d = ctx.dim();
    let total: f64 = ctx
        .ab
        .projectors
        .iter()
        .flat_map(|p| ctx.cb.projectors.iter().map(move |q| overlap_energy(p, q)))
        .sum();
    clamp_mie(total / d as f64, d)
}

/// Mutual information energy from `1 - (1/2d) sum ||[P_i, Q_j]||_HS^2`.
pub fn mie_via_commutators(ctx: &Context) -> Result<MieValue> {
    let d = ctx.dim();
    let mut total = 0.0;
    for p in &ctx.ab.projectors {
        for q in &ctx.cb.projectors {
            total += hs_norm(&commutator(p, q)?).powi(2);
        }
    }
    clamp_mie(1.0 - total / (2.0 * d as f64), d)
}

fn check_orthonormal(basis: &[StateVector]) -> Result<()> {
    let d = basis.len();
    for (i, u) in basis.iter().enumerate() {
        if u.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: u.len(),
            });
        }
        for (j, v) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (u.dotc(v) - num_complex::Complex64::new(target, 0.0)).norm() > 1e-9 {
                return Err(Error::validation(format!(
                    "basis is not orthonormal at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Rank-one form `(1/d) sum_{i,j} |<ab_i|cb_j>|^4` for two orthonormal bases.
pub fn mie_rank1(ab_basis: &[StateVector], cb_basis: &[StateVector]) -> Result<f64> {
    check_orthonormal(ab_basis)?;
    check_orthonormal(cb_basis)?;
    if ab_basis.len() != cb_basis.len() {
        return Err(Error::Dimension {
            expected: ab_basis.len(),
            found: cb_basis.len(),
        });
    }
    let d = ab_basis.len();
    let total: f64 = ab_basis
        .iter()
        .flat_map(|u| cb_basis.iter().map(move |v| u.dotc(v).norm_sqr().powi(2)))
        .sum();
    Ok(total / d as f64)
}

fn check_state_dim(ctx: &Context, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != ctx.dim() {
        return Err(Error::Dimension {
            expected: ctx.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `D(G_alpha, rho) = |Tr([A, C] rho)|`.
pub fn d_single(ctx: &Context, rho: &DensityMatrix) -> Result<f64> {
    check_state_dim(ctx, rho)?;
    Ok(expectation(&ctx.ac, rho)?.norm())
}

/// `D(G, rho)`, summed over the family.
pub fn d_total(family: &ContextFamily, rho: &DensityMatrix) -> Result<f64> {
    family.contexts.iter().map(|c| d_single(c, rho)).sum()
}

/// Spectral prefactor `sqrt(2d) (sum_i a_i^2)^(1/2) (sum_j c_j^2)^(1/2)`.
///
/// The sums run over joint-eigenspace blocks; a block of dimension `k > 1`
/// contributes its eigenvalue once.
pub fn kappa(ctx: &Context) -> f64 {
    let sa: f64 = ctx.ab.pairs.iter().map(|&(a, _)| a * a).sum();
    let sc: f64 = ctx.cb.pairs.iter().map(|&(c, _)| c * c).sum();
    (2.0 * ctx.dim() as f64).sqrt() * sa.sqrt() * sc.sqrt()
}

fn one_minus_mie(ctx: &Context) -> Result<f64> {
    // E is already clamped to at most 1.
    Ok(1.0 - mie(ctx)?.value)
}

/// `kappa sqrt(1 - E)`.
pub fn spectral_bound(ctx: &Context) -> Result<f64> {
    Ok(kappa(ctx) * one_minus_mie(ctx)?.sqrt())
}

/// `sqrt(beta) kappa sqrt(1 - E)`.
pub fn purity_bound(ctx: &Context, rho: &DensityMatrix) -> Result<f64> {
    check_state_dim(ctx, rho)?;
    Ok(purity(rho).sqrt() * spectral_bound(ctx)?)
}

/// `||[A, C]||_op`.
pub fn opnorm_bound(ctx: &Context) -> f64 {
    op_norm(&ctx.ac)
}

/// `min(opnorm, purity)`.
pub fn hybrid_bound(ctx: &Context, rho: &DensityMatrix) -> Result<f64> {
    Ok(opnorm_bound(ctx).min(purity_bound(ctx, rho)?))
}

/// Robertson relation `D/2 <= dA dC` for one context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobertsonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub satisfied: bool,
}

pub fn robertson_check(ctx: &Context, rho: &DensityMatrix) -> Result<RobertsonCheck> {
    let lhs = d_single(ctx, rho)? / 2.0;
    let rhs = (variance(&ctx.a, rho)? * variance(&ctx.c, rho)?).sqrt();
    Ok(RobertsonCheck {
        lhs,
        rhs,
        gap: rhs - lhs,
        satisfied: lhs <= rhs + ROBERTSON_TOL,
    })
}

/// One row of a [`BoundsReport`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundsRecord {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "one_minus_E")]
    pub one_minus_e: f64,
    pub kappa: f64,
    pub d_value: f64,
    pub spectral_bound: f64,
    pub purity_bound: f64,
    pub opnorm_bound: f64,
    pub hybrid_bound: f64,
    pub variance_product: f64,
    pub robertson_lhs: f64,
}

impl BoundsRecord {
    fn add(mut self, o: &BoundsRecord) -> Self {
        self.e += o.e;
        self.one_minus_e += o.one_minus_e;
        self.kappa += o.kappa;
        self.d_value += o.d_value;
        self.spectral_bound += o.spectral_bound;
        self.purity_bound += o.purity_bound;
        self.opnorm_bound += o.opnorm_bound;
        self.hybrid_bound += o.hybrid_bound;
        self.variance_product += o.variance_product;
        self.robertson_lhs += o.robertson_lhs;
        self
    }
}

/// Per-context and summed bounds for a family and a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub contexts: Vec<BoundsRecord>,
    pub totals: BoundsRecord,
    pub beta: f64,
}

fn bounds_record(ctx: &Context, rho: &DensityMatrix, beta: f64) -> Result<BoundsRecord> {
    let e = mie(ctx)?.value;
    let k = kappa(ctx);
    let spectral = k * (1.0 - e).sqrt();
    let purity_b = beta.sqrt() * spectral;
    let opnorm = opnorm_bound(ctx);
    let rob = robertson_check(ctx, rho)?;
    Ok(BoundsRecord {
        e,
        one_minus_e: 1.0 - e,
        kappa: k,
        d_value: d_single(ctx, rho)?,
        spectral_bound: spectral,
        purity_bound: purity_b,
        opnorm_bound: opnorm,
        hybrid_bound: opnorm.min(purity_b),
        variance_product: rob.rhs,
        robertson_lhs: rob.lhs,
    })
}

/// Fills a [`BoundsReport`]. Contexts are evaluated in parallel and combined
/// in family order.
pub fn global_bounds(family: &ContextFamily, rho: &DensityMatrix) -> Result<BoundsReport> {
    if rho.dim() != family.dim() {
        return Err(Error::Dimension {
            expected: family.dim(),
            found: rho.dim(),
        });
    }
    let beta = purity(rho);
    let contexts = family
        .contexts
        .par_iter()
        .map(|c| bounds_record(c, rho, beta))
        .collect::<Result<Vec<_>>>()?;
    let totals = contexts.iter().fold(BoundsRecord::default(), BoundsRecord::add);
    Ok(BoundsReport {
        contexts,
        totals,
        beta,
    })
}
