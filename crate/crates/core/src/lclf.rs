//! Common linear copositive Lyapunov functions `L(x) = ξᵀx`.
//!
//! A vector `ξ ≫ 0` with `(M(A0_k) + V(η_k)) ξ ≪ 0` for every subsystem
//! certifies exponential stability under arbitrary switching. The search is
//! posed as the margin LP
//!
//! ```text
//! maximize t  s.t.  envelope_k ξ + t·1 <= 0  (all k),  0 <= ξ <= 1
//! ```
//!
//! whose optimum `t*` equals the supremum of `min_{k,i} -(envelope_k ξ)_i / ‖ξ‖∞`
//! over the open certificate cone.

use crate::delay::{DelaySubsystem, SwitchedDelaySystem};
use crate::error::{Error, Result};
use crate::lp::{Bounds, Constraint, LinearProgram, LpSolution};
use crate::matrix::Matrix;
use crate::scalar::{vec_inf_norm, vec_max, vec_min, Scalar};

/// LP optimum below which no certificate is reported.
pub const MARGIN_THRESHOLD: f64 = 1e-9;

/// Strictness threshold for `envelope_k ξ ≪ 0` in [`verify_certificate`].
pub const VERIFY_TOL: f64 = 1e-12;

const ALPHA_REL_TOL: f64 = 1e-6;
const ALPHA_MAX_ITERS: usize = 200;

/// Factor applied to `max ξ / min ξ` to obtain the overshoot constant.
pub const GAIN_FACTOR: f64 = 1.01;

/// Certificate of exponential stability under arbitrary switching.
///
/// `xi` is normalized to `max ξ_i = 1`. `margin` is `min_{k,i} -(envelope_k ξ)_i`.
/// Every trajectory obeys `|x_i(t)| <= envelope_gain · e^{-decay_alpha t} · ξ_i · ‖φ‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct LclfCertificate<T = f64> {
    pub xi: Vec<T>,
    pub margin: T,
    pub decay_alpha: T,
    pub envelope_gain: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibleReason<T = f64> {
    /// The margin LP has no feasible point with `t > 0`.
    NoPositiveMargin { optimum: Option<T> },
    /// The LP vertex has a zero component, so it witnesses nothing.
    DegenerateCertificate { xi: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LclfOutcome<T = f64> {
    Certified(LclfCertificate<T>),
    Infeasible(InfeasibleReason<T>),
}

impl<T: Scalar> LclfOutcome<T> {
    pub fn certificate(&self) -> Option<&LclfCertificate<T>> {
        match self {
            Self::Certified(c) => Some(c),
            Self::Infeasible(_) => None,
        }
    }

    pub fn into_certificate(self) -> Option<LclfCertificate<T>> {
        match self {
            Self::Certified(c) => Some(c),
            Self::Infeasible(_) => None,
        }
    }
}

/// Result of substituting a candidate `ξ` into the copositive condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification<T = f64> {
    pub accepted: bool,
    /// `-(envelope_k ξ)`, subsystem-major: `slacks[k * n + i]`.
    pub slacks: Vec<T>,
}

impl<T: Scalar> Verification<T> {
    /// `β(ξ) = min_{k,i} -(envelope_k ξ)_i`.
    pub fn min_slack(&self) -> T {
        vec_min(&self.slacks)
    }
}

/// Optimum of the margin LP over a family of envelope matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginSolution<T = f64> {
    pub t_star: T,
    pub xi: Vec<T>,
}

/// Solves `max t` s.t. `E_k ξ + t·1 <= 0`, `0 <= ξ <= 1`. Returns `None` when
/// the LP is infeasible (it never is for square inputs: `ξ = 0, t = 0` works).
pub fn margin_lp<T: Scalar>(envelopes: &[Matrix<T>]) -> Result<Option<MarginSolution<T>>> {
    let n = envelopes
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no envelope matrices".into()))?
        .rows();
    if envelopes.iter().any(|e| e.shape() != (n, n)) {
        return Err(Error::DimensionMismatch(
            "envelopes must all be n x n".into(),
        ));
    }
    let mut objective = vec![T::zero(); n + 1];
    objective[n] = T::one();
    let constraints = envelopes
        .iter()
        .flat_map(|e| {
            (0..e.rows()).map(move |i| {
                let mut coeffs = e.row(i).to_vec();
                coeffs.push(T::one());
                Constraint::le(coeffs, T::zero())
            })
        })
        .collect();
    let mut bounds = vec![Bounds::between(T::zero(), T::one()); n];
    bounds.push(Bounds::free());
    match LinearProgram::new(objective, constraints, bounds).solve()? {
        LpSolution::Optimal {
            objective,
            variables,
        } => Ok(Some(MarginSolution {
            t_star: objective,
            xi: variables[..n].to_vec(),
        })),
        LpSolution::Infeasible | LpSolution::Unbounded => Ok(None),
    }
}

/// Substitutes `xi` into `(M(A0_k) + V(η_k)) ξ ≪ 0` for every subsystem.
pub fn verify_certificate<T: Scalar>(sys: &SwitchedDelaySystem<T>, xi: &[T]) -> Verification<T> {
    verify_against(&sys.envelopes(), xi)
}

fn verify_against<T: Scalar>(envelopes: &[Matrix<T>], xi: &[T]) -> Verification<T> {
    let mut slacks = Vec::with_capacity(envelopes.len() * xi.len());
    for e in envelopes {
        match e.mul_vec(xi) {
            Ok(v) => slacks.extend(v.into_iter().map(|x| -x)),
            Err(_) => {
                return Verification {
                    accepted: false,
                    slacks: Vec::new(),
                }
            }
        }
    }
    let tol = T::lit(VERIFY_TOL);
    let accepted =
        !xi.is_empty() && xi.iter().all(|&x| x > T::zero()) && slacks.iter().all(|&s| -s < -tol);
    Verification { accepted, slacks }
}

/// Ratio `β(ξ) / ‖ξ‖∞` for a candidate vector, `None` when `ξ` is rejected.
pub fn margin_ratio<T: Scalar>(sys: &SwitchedDelaySystem<T>, xi: &[T]) -> Option<T> {
    let v = verify_certificate(sys, xi);
    v.accepted.then(|| v.min_slack() / vec_inf_norm(xi))
}

/// Searches for a common LCLF by solving the margin LP.
pub fn find_common_lclf<T: Scalar>(sys: &SwitchedDelaySystem<T>) -> Result<LclfOutcome<T>> {
    let envelopes = sys.envelopes();
    let Some(sol) = margin_lp(&envelopes)? else {
        return Ok(LclfOutcome::Infeasible(
            InfeasibleReason::NoPositiveMargin { optimum: None },
        ));
    };
    if !(sol.t_star > T::lit(MARGIN_THRESHOLD)) {
        return Ok(LclfOutcome::Infeasible(
            InfeasibleReason::NoPositiveMargin {
                optimum: Some(sol.t_star),
            },
        ));
    }
    if sol.xi.iter().any(|&x| !(x > T::zero())) {
        return Ok(LclfOutcome::Infeasible(
            InfeasibleReason::DegenerateCertificate { xi: sol.xi },
        ));
    }
    let scale = vec_max(&sol.xi);
    let xi: Vec<T> = sol.xi.iter().map(|&x| x / scale).collect();
    match certificate_for(sys.h(), &envelopes, sys.subsystems(), xi) {
        Some(cert) => Ok(LclfOutcome::Certified(cert)),
        None => Ok(LclfOutcome::Infeasible(
            InfeasibleReason::NoPositiveMargin {
                optimum: Some(sol.t_star),
            },
        )),
    }
}

/// Builds the full certificate (margin, decay rate, gain) for a vector that
/// satisfies the strict condition. Returns `None` if it does not.
pub fn certificate_from_xi<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    xi: &[T],
) -> Option<LclfCertificate<T>> {
    if xi.len() != sys.dim() {
        return None;
    }
    let scale = vec_max(xi);
    if !(scale > T::zero()) {
        return None;
    }
    let xi = xi.iter().map(|&x| x / scale).collect();
    certificate_for(sys.h(), &sys.envelopes(), sys.subsystems(), xi)
}

fn certificate_for<T: Scalar>(
    h: T,
    envelopes: &[Matrix<T>],
    subsystems: &[DelaySubsystem<T>],
    xi: Vec<T>,
) -> Option<LclfCertificate<T>> {
    let check = verify_against(envelopes, &xi);
    if !check.accepted {
        return None;
    }
    let margin = check.min_slack();
    let parts: Vec<(Matrix<T>, Matrix<T>)> = subsystems
        .iter()
        .map(|s| {
            (
                s.a0().metzlerize().expect("square A0"),
                s.variation_matrix(),
            )
        })
        .collect();
    let decay_alpha = decay_rate(h, &parts, &xi, margin / vec_max(&xi))?;
    let envelope_gain = T::lit(GAIN_FACTOR) * vec_max(&xi) / vec_min(&xi);
    Some(LclfCertificate {
        xi,
        margin,
        decay_alpha,
        envelope_gain,
    })
}

/// `(M + e^{αh} V) ξ ≪ -α ξ` for every `(M, V)` pair.
pub fn decay_condition_holds<T: Scalar>(
    h: T,
    parts: &[(Matrix<T>, Matrix<T>)],
    xi: &[T],
    alpha: T,
) -> bool {
    let growth = (alpha * h).exp();
    parts.iter().all(|(m, v)| {
        let mx = m.mul_vec(xi).expect("dimension checked");
        let vx = v.mul_vec(xi).expect("dimension checked");
        mx.iter()
            .zip(&vx)
            .zip(xi)
            .all(|((&a, &b), &x)| a + growth * b < -alpha * x)
    })
}

/// Largest `α ∈ (0, alpha_hi]` passing [`decay_condition_holds`], by bisection.
fn decay_rate<T: Scalar>(
    h: T,
    parts: &[(Matrix<T>, Matrix<T>)],
    xi: &[T],
    alpha_hi: T,
) -> Option<T> {
    if decay_condition_holds(h, parts, xi, alpha_hi) {
        return Some(alpha_hi);
    }
    let (mut lo, mut hi) = (T::zero(), alpha_hi);
    for _ in 0..ALPHA_MAX_ITERS {
        if lo > T::zero() && hi - lo <= T::lit(ALPHA_REL_TOL) * hi {
            break;
        }
        let mid = T::lit(0.5) * (lo + hi);
        if decay_condition_holds(h, parts, xi, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo > T::zero()).then_some(lo)
}

/// Certificate obtained from a positive bounding subsystem whose envelope is
/// Hurwitz and which dominates every subsystem of `sys`.
///
/// Returns `Ok(None)` when the envelope is not Hurwitz or domination fails.
pub fn certify_dominated<T: Scalar>(
    bound: &DelaySubsystem<T>,
    sys: &SwitchedDelaySystem<T>,
) -> Result<Option<LclfCertificate<T>>> {
    if !bound.is_positive_system() {
        return Err(Error::NotPositiveBound);
    }
    let env = bound.envelope_matrix();
    if !env.metzler_is_hurwitz()? {
        return Ok(None);
    }
    for s in sys.subsystems() {
        if !bound.dominates(s)? {
            return Ok(None);
        }
    }
    // ξ = -env⁻¹ 1 satisfies env ξ = -1
    let ones = vec![T::one(); bound.dim()];
    let xi: Vec<T> = env
        .invert()?
        .mul_vec(&ones)?
        .into_iter()
        .map(|x| -x)
        .collect();
    Ok(certificate_from_xi(sys, &xi))
}
