//! Bounds on the structured stability radius.

use serde::Serialize;

use crate::delay::{DelaySubsystem, SwitchedDelaySystem};
use crate::error::{Error, Result};
use crate::lclf::{margin_lp, MARGIN_THRESHOLD};
use crate::matrix::Matrix;
use crate::perturb::{structure_gain, PerturbationStructure, StructureQuad};
use crate::scalar::{vec_inf_norm, Scalar};

/// Relative tolerance for sign checks on `P(0)⁻¹`.
pub const INVERSE_SIGN_TOL: f64 = 1e-12;

/// Where a bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundMethod {
    /// Margin LP optimum divided by the structure gain.
    #[serde(rename = "Theorem2-LP")]
    MarginLp,
    /// Positive bounding system, `1/(M0 ‖H0⁻¹ 1‖)`.
    #[serde(rename = "Theorem3-Domination")]
    Domination,
    /// `1/‖H0⁻¹‖` of the bounding system.
    #[serde(rename = "Corollary5-H0")]
    BoundInverse,
    /// Smallest exact subsystem radius.
    #[serde(rename = "SubsystemMin")]
    SubsystemMin,
    /// `1/max_k ‖H_k⁻¹‖`.
    #[serde(rename = "Corollary5-Hk")]
    SubsystemInverse,
}

impl BoundMethod {
    pub fn tag(self) -> &'static str {
        match self {
            Self::MarginLp => "Theorem2-LP",
            Self::Domination => "Theorem3-Domination",
            Self::BoundInverse => "Corollary5-H0",
            Self::SubsystemMin => "SubsystemMin",
            Self::SubsystemInverse => "Corollary5-Hk",
        }
    }
}

/// Lower/upper radius bounds; `None` means unavailable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusReport<T = f64> {
    pub lower: Option<T>,
    pub upper: Option<T>,
    pub lower_method: BoundMethod,
    pub upper_method: BoundMethod,
    pub certificate_xi: Option<Vec<T>>,
}

impl<T: Scalar> RadiusReport<T> {
    /// `lower ≤ upper + tol` when both are present.
    pub fn is_consistent(&self, tol: T) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l <= u + tol,
            _ => true,
        }
    }
}

/// Radius pair of a single positive subsystem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsystemRadius<T = f64> {
    pub lower: T,
    pub upper: T,
    /// `D0 = D1` or `E0 = E1`, so `lower == upper` is the radius itself.
    pub exact: bool,
}

/// `P(0)⁻¹` of a positive subsystem, checked to be entrywise nonnegative.
fn positive_resolvent<T: Scalar>(s: &DelaySubsystem<T>) -> Result<Matrix<T>> {
    if !s.is_positive_system() {
        return Err(Error::NotPositive);
    }
    let inv = s
        .characteristic_at_zero()
        .invert()
        .map_err(|e| Error::NotStable(format!("P(0) is not invertible: {e}")))?;
    let tol = T::lit(INVERSE_SIGN_TOL) * inv.inf_norm();
    if let Some(x) = inv.as_slice().iter().find(|&&x| x < -tol) {
        return Err(Error::NotStable(format!("P(0)⁻¹ has negative entry {x}")));
    }
    Ok(inv)
}

/// `1/max_{i,j} ‖Eⁱ P(0)⁻¹ Dʲ‖ ≤ r ≤ 1/max_i ‖Eⁱ P(0)⁻¹ Dⁱ‖` for a positive,
/// exponentially stable subsystem with nonnegative structure.
pub fn subsystem_radius_positive<T: Scalar>(
    s: &DelaySubsystem<T>,
    q: &StructureQuad<T>,
) -> Result<SubsystemRadius<T>> {
    if q.dim() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "structure of dimension {} for subsystem of dimension {}",
            q.dim(),
            s.dim()
        )));
    }
    let inv = positive_resolvent(s)?;
    if !q.is_nonnegative() {
        return Err(Error::NegativeStructure);
    }
    let es = [&q.e0, &q.e1];
    let ds = [&q.d0, &q.d1];
    let mut all = T::zero();
    let mut diag = T::zero();
    for (i, e) in es.iter().enumerate() {
        let left = e.try_mul(&inv)?;
        for (j, d) in ds.iter().enumerate() {
            let g = left.try_mul(d)?.inf_norm();
            all = all.max(g);
            if i == j {
                diag = diag.max(g);
            }
        }
    }
    Ok(SubsystemRadius {
        lower: all.recip(),
        upper: diag.recip(),
        exact: q.d0 == q.d1 || q.e0 == q.e1,
    })
}

/// `1/‖(A0 + ΣAⁱ + ∫B)⁻¹‖` of a positive, exponentially stable subsystem.
pub fn subsystem_radius_unstructured<T: Scalar>(s: &DelaySubsystem<T>) -> Result<T> {
    Ok(positive_resolvent(s)?.inf_norm().recip())
}

/// Margin-LP lower bound and smallest exact subsystem radius.
///
/// The upper bound is only reported when every subsystem is positive with
/// nonnegative structure and an exact radius formula applies.
pub fn radius_bounds_theorem2<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    p: &PerturbationStructure<T>,
) -> Result<RadiusReport<T>> {
    if p.len() != sys.len() || p.dim() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "structure for {} subsystems of dimension {}, system has {} of dimension {}",
            p.len(),
            p.dim(),
            sys.len(),
            sys.dim()
        )));
    }
    let gain = structure_gain(p);
    // no positive margin means no common certificate, hence no lower bound
    let (lower, certificate_xi) = match margin_lp(&sys.envelopes())? {
        Some(sol) if sol.t_star > T::lit(MARGIN_THRESHOLD) && gain > T::zero() => {
            (Some(sol.t_star / gain), Some(sol.xi))
        }
        _ => (None, None),
    };
    Ok(RadiusReport {
        lower,
        upper: min_exact_subsystem_radius(sys, p),
        lower_method: BoundMethod::MarginLp,
        upper_method: BoundMethod::SubsystemMin,
        certificate_xi,
    })
}

fn min_exact_subsystem_radius<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    p: &PerturbationStructure<T>,
) -> Option<T> {
    sys.subsystems()
        .iter()
        .zip(p.quads())
        .map(|(s, q)| match subsystem_radius_positive(s, q) {
            Ok(r) if r.exact => Some(r.lower),
            _ => None,
        })
        .try_fold(T::infinity(), |acc, r| r.map(|r| acc.min(r)))
}

/// `1/(M0 ‖-envelope(bound)⁻¹ 1‖)` where `M0` is the gain of the bounding
/// structure.
pub fn radius_lower_theorem3<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    p: &PerturbationStructure<T>,
    bound: &DelaySubsystem<T>,
    bound_structure: &StructureQuad<T>,
) -> Result<T> {
    if p.len() != sys.len() {
        return Err(Error::DimensionMismatch(format!(
            "structure for {} subsystems, system has {}",
            p.len(),
            sys.len()
        )));
    }
    let xi0 = bound_resolvent_ones(sys, bound)?;
    if !bound_structure.is_nonnegative() {
        return Err(Error::NegativeStructure);
    }
    for (k, q) in p.quads().iter().enumerate() {
        if !structure_dominated(q, bound_structure)? {
            return Err(Error::StructureNotDominating(k));
        }
    }
    let gain = bound_structure.gain();
    Ok((gain * vec_inf_norm(&xi0)).recip())
}

/// Checks bound positivity, Hurwitz envelope and domination of every
/// subsystem; returns `ξ0 = -envelope(bound)⁻¹ 1`.
fn bound_resolvent_ones<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    bound: &DelaySubsystem<T>,
) -> Result<Vec<T>> {
    if !bound.is_positive_system() {
        return Err(Error::NotPositiveBound);
    }
    let env = bound.envelope_matrix();
    if !env.metzler_is_hurwitz()? {
        return Err(Error::NotHurwitzBound);
    }
    for (k, s) in sys.subsystems().iter().enumerate() {
        if !bound.dominates(s)? {
            return Err(Error::DominationViolated(k));
        }
    }
    let ones = vec![T::one(); bound.dim()];
    Ok(env
        .invert()?
        .mul_vec(&ones)?
        .into_iter()
        .map(|x| -x)
        .collect())
}

fn structure_dominated<T: Scalar>(q: &StructureQuad<T>, b: &StructureQuad<T>) -> Result<bool> {
    let pairs = [
        (&q.d0, &b.d0),
        (&q.e0, &b.e0),
        (&q.d1, &b.d1),
        (&q.e1, &b.e1),
    ];
    for (m, bm) in pairs {
        if m.shape() != bm.shape() {
            return Err(Error::DimensionMismatch(format!(
                "structure shape {:?} against bounding shape {:?}",
                m.shape(),
                bm.shape()
            )));
        }
        if !m.abs().le_with_slack(bm, T::zero())? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Domination lower bound paired with the smallest exact subsystem radius.
pub fn radius_report_theorem3<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    p: &PerturbationStructure<T>,
    bound: &DelaySubsystem<T>,
    bound_structure: &StructureQuad<T>,
) -> Result<RadiusReport<T>> {
    let lower = radius_lower_theorem3(sys, p, bound, bound_structure)?;
    Ok(RadiusReport {
        lower: Some(lower),
        upper: min_exact_subsystem_radius(sys, p),
        lower_method: BoundMethod::Domination,
        upper_method: BoundMethod::SubsystemMin,
        certificate_xi: None,
    })
}

/// Unstructured bounds `1/‖H0⁻¹‖ ≤ r ≤ 1/max_k ‖H_k⁻¹‖` for positive
/// subsystems dominated by a positive, exponentially stable bound.
pub fn radius_bounds_corollary5<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    bound: &DelaySubsystem<T>,
) -> Result<RadiusReport<T>> {
    bound_resolvent_ones(sys, bound)?;
    let lower = subsystem_radius_unstructured(bound)?;
    let mut worst = T::zero();
    for s in sys.subsystems() {
        worst = worst.max(positive_resolvent(s)?.inf_norm());
    }
    Ok(RadiusReport {
        lower: Some(lower),
        upper: Some(worst.recip()),
        lower_method: BoundMethod::BoundInverse,
        upper_method: BoundMethod::SubsystemInverse,
        certificate_xi: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::{DiscreteDelay, DistributedKernel};
    use crate::lclf::margin_ratio;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn jump(delay: f64, matrix: Matrix) -> DiscreteDelay<f64> {
        DiscreteDelay { delay, matrix }
    }

    fn ex1() -> SwitchedDelaySystem {
        let sub = |a: Matrix, b: Matrix| DelaySubsystem::new(a, vec![jump(1.0, b)], None).unwrap();
        SwitchedDelaySystem::new(
            1.0,
            vec![
                sub(
                    m(&[&[-5.0221, 0.2531], &[1.0103, -3.0105]]),
                    m(&[&[0.6321, 0.3507], &[1.0315, 0.2403]]),
                ),
                sub(
                    m(&[&[-4.1023, 0.2517], &[0.5314, -2.4531]]),
                    m(&[&[1.103, 0.5041], &[0.7013, 0.1102]]),
                ),
            ],
        )
        .unwrap()
    }

    fn ex1_structure() -> PerturbationStructure {
        let e1 = m(&[&[0.0], &[1.0]]);
        let e2 = m(&[&[1.0], &[0.0]]);
        let id = Matrix::identity(2);
        PerturbationStructure::new(vec![
            StructureQuad::new(e1.clone(), id.clone(), e2.clone(), id.clone()).unwrap(),
            StructureQuad::new(e2, id.clone(), e1, id).unwrap(),
        ])
        .unwrap()
    }

    fn kernel(at_minus2: Matrix, at_0: Matrix) -> Option<DistributedKernel> {
        Some(DistributedKernel::new(vec![-2.0, 0.0], vec![at_minus2, at_0]).unwrap())
    }

    fn ex2() -> (SwitchedDelaySystem, DelaySubsystem) {
        let bound = DelaySubsystem::new(
            m(&[&[-18.0, 1.0, 0.0], &[1.0, -14.0, 1.0], &[1.0, 1.0, -13.0]]),
            vec![
                jump(
                    0.5,
                    m(&[&[1.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]]),
                ),
                jump(
                    1.0,
                    m(&[&[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 2.0]]),
                ),
                jump(
                    2.0,
                    m(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 0.0]]),
                ),
            ],
            kernel(
                m(&[&[2.0, 0.0, 1.0], &[1.0, 1.0, 0.0], &[2.0, 0.0, 0.0]]),
                m(&[&[2.0, 0.0, 1.0], &[1.0, 1.0, 0.0], &[2.0, 0.0, 2.0]]),
            ),
        )
        .unwrap();
        let k1 = DelaySubsystem::new(
            m(&[&[-18.0, 1.0, 0.0], &[1.0, -15.0, 1.0], &[1.0, 1.0, -13.0]]),
            vec![
                jump(
                    0.5,
                    m(&[&[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]]),
                ),
                jump(
                    1.0,
                    m(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 2.0]]),
                ),
                jump(
                    2.0,
                    m(&[&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]),
                ),
            ],
            kernel(
                m(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[2.0, 0.0, 0.0]]),
                m(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[2.0, 0.0, 2.0]]),
            ),
        )
        .unwrap();
        let k2 = DelaySubsystem::new(
            m(&[&[-19.0, 1.0, 0.0], &[1.0, -14.0, 1.0], &[1.0, 1.0, -15.0]]),
            vec![
                jump(
                    0.5,
                    m(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]]),
                ),
                jump(
                    1.0,
                    m(&[&[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 1.0]]),
                ),
                jump(
                    2.0,
                    m(&[&[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0], &[0.0, 1.0, 0.0]]),
                ),
            ],
            kernel(
                m(&[&[0.0, 0.0, 1.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 0.0]]),
                m(&[&[2.0, 0.0, 1.0], &[1.0, 1.0, 0.0], &[2.0, 0.0, 0.0]]),
            ),
        )
        .unwrap();
        (SwitchedDelaySystem::new(2.0, vec![k1, k2]).unwrap(), bound)
    }

    #[test]
    fn ex1_subsystem_radii() {
        let sys = ex1();
        let p = ex1_structure();
        let r1 = subsystem_radius_positive(sys.subsystem(0), p.quad(0)).unwrap();
        let r2 = subsystem_radius_positive(sys.subsystem(1), p.quad(1)).unwrap();
        assert!(r1.exact && r2.exact);
        assert_eq!(r1.lower, r1.upper);
        assert!((r1.lower - 2.4894).abs() < 1e-3, "{}", r1.lower);
        assert!((r2.lower - 2.0323).abs() < 1e-3, "{}", r2.lower);
    }

    #[test]
    fn trivial_subsystem_radii() {
        let s = DelaySubsystem::undelayed(Matrix::<f64>::identity(2).scale(-1.0)).unwrap();
        let r = subsystem_radius_positive(&s, &StructureQuad::unstructured(2)).unwrap();
        assert_eq!((r.lower, r.upper), (1.0, 1.0));
        let s2 = DelaySubsystem::undelayed(Matrix::<f64>::identity(3).scale(-2.0)).unwrap();
        assert_eq!(subsystem_radius_unstructured(&s2).unwrap(), 2.0);
    }

    #[test]
    fn subsystem_radius_errors() {
        let q = StructureQuad::unstructured(2);
        let neg = DelaySubsystem::undelayed(m(&[&[-1.0, -0.5], &[0.0, -1.0]])).unwrap();
        assert_eq!(subsystem_radius_positive(&neg, &q), Err(Error::NotPositive));
        let unstable = DelaySubsystem::undelayed(m(&[&[1.0, 0.0], &[0.0, -1.0]])).unwrap();
        assert!(matches!(
            subsystem_radius_positive(&unstable, &q),
            Err(Error::NotStable(_))
        ));
        let singular = DelaySubsystem::undelayed(m(&[&[0.0, 0.0], &[0.0, -1.0]])).unwrap();
        assert!(matches!(
            subsystem_radius_unstructured(&singular),
            Err(Error::NotStable(_))
        ));
        let stable = DelaySubsystem::undelayed(Matrix::<f64>::identity(2).scale(-1.0)).unwrap();
        let bad = StructureQuad::new(
            Matrix::identity(2).scale(-1.0),
            q.e0.clone(),
            q.d1.clone(),
            q.e1.clone(),
        )
        .unwrap();
        assert_eq!(
            subsystem_radius_positive(&stable, &bad),
            Err(Error::NegativeStructure)
        );
    }

    #[test]
    fn inexact_structure_gives_sandwich() {
        let s = DelaySubsystem::undelayed(m(&[&[-2.0, 1.0], &[0.5, -3.0]])).unwrap();
        let q = StructureQuad::new(
            m(&[&[1.0], &[0.0]]),
            m(&[&[1.0, 0.0]]),
            m(&[&[0.0], &[1.0]]),
            m(&[&[0.0, 1.0]]),
        )
        .unwrap();
        let r = subsystem_radius_positive(&s, &q).unwrap();
        assert!(!r.exact);
        assert!(r.lower <= r.upper);
    }

    #[test]
    fn ex1_theorem2() {
        let sys = ex1();
        let report = radius_bounds_theorem2(&sys, &ex1_structure()).unwrap();
        let ratio = margin_ratio(&sys, &[2.0, 5.0]).unwrap();
        assert!((ratio - 0.4439_f64).abs() < 1e-4);
        assert!(report.lower.unwrap() >= ratio - 1e-12);
        assert!((report.upper.unwrap() - 2.0323).abs() < 1e-3);
        assert!(report.is_consistent(1e-9));
        assert_eq!(report.certificate_xi.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn trivial_theorem2() {
        let sys = SwitchedDelaySystem::new(
            1.0,
            vec![DelaySubsystem::undelayed(Matrix::<f64>::identity(2).scale(-1.0)).unwrap()],
        )
        .unwrap();
        let r = radius_bounds_theorem2(&sys, &PerturbationStructure::unstructured(2, 1)).unwrap();
        assert!((r.lower.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.upper, Some(1.0));
    }

    #[test]
    fn theorem2_unavailable_parts() {
        let sys = SwitchedDelaySystem::new(
            1.0,
            vec![
                DelaySubsystem::undelayed(m(&[&[-1.0, 3.0], &[0.0, -1.0]])).unwrap(),
                DelaySubsystem::undelayed(m(&[&[-1.0, 0.0], &[3.0, -1.0]])).unwrap(),
            ],
        )
        .unwrap();
        let r = radius_bounds_theorem2(&sys, &PerturbationStructure::unstructured(2, 2)).unwrap();
        assert_eq!(r.lower, None);
        assert_eq!(r.certificate_xi, None);

        let nonpositive = SwitchedDelaySystem::new(
            1.0,
            vec![DelaySubsystem::undelayed(m(&[&[-2.0, -1.0], &[0.0, -2.0]])).unwrap()],
        )
        .unwrap();
        let r = radius_bounds_theorem2(&nonpositive, &PerturbationStructure::unstructured(2, 1))
            .unwrap();
        assert!(r.lower.is_some());
        assert_eq!(r.upper, None);
    }

    #[test]
    fn ex2_corollary5() {
        let (sys, bound) = ex2();
        let r = radius_bounds_corollary5(&sys, &bound).unwrap();
        assert!((r.lower.unwrap() - 0.6008).abs() < 1e-3, "{:?}", r.lower);
        assert!(r.is_consistent(1e-9));
        assert!((subsystem_radius_unstructured(&bound).unwrap() - 0.6008).abs() < 1e-3);
        // the domination bound with identity structures dominates the unstructured bound
        let p = PerturbationStructure::unstructured(3, 2);
        let t3 = radius_lower_theorem3(&sys, &p, &bound, &StructureQuad::unstructured(3)).unwrap();
        assert!(t3 >= r.lower.unwrap() - 1e-12);
    }

    #[test]
    fn single_system_corollary5_is_exact() {
        let s = DelaySubsystem::new(
            m(&[&[-3.0, 1.0], &[0.5, -2.0]]),
            vec![jump(1.0, m(&[&[0.2, 0.1], &[0.0, 0.3]]))],
            None,
        )
        .unwrap();
        let sys = SwitchedDelaySystem::new(1.0, vec![s.clone()]).unwrap();
        let r = radius_bounds_corollary5(&sys, &s).unwrap();
        assert_eq!(r.lower, r.upper);
    }

    #[test]
    fn theorem3_examples_and_errors() {
        let id = Matrix::<f64>::identity(2).scale(-1.0);
        let bound = DelaySubsystem::undelayed(id.clone()).unwrap();
        let sys = SwitchedDelaySystem::new(1.0, vec![bound.clone()]).unwrap();
        let p = PerturbationStructure::unstructured(2, 1);
        let q = StructureQuad::unstructured(2);
        assert_eq!(radius_lower_theorem3(&sys, &p, &bound, &q).unwrap(), 1.0);

        let loose = SwitchedDelaySystem::new(
            1.0,
            vec![DelaySubsystem::undelayed(m(&[&[-0.5, 0.0], &[0.0, -1.0]])).unwrap()],
        )
        .unwrap();
        assert_eq!(
            radius_lower_theorem3(&loose, &p, &bound, &q),
            Err(Error::DominationViolated(0))
        );
        assert_eq!(
            radius_bounds_corollary5(&loose, &bound),
            Err(Error::DominationViolated(0))
        );

        let unstable = DelaySubsystem::undelayed(m(&[&[0.5, 0.0], &[0.0, -1.0]])).unwrap();
        assert_eq!(
            radius_lower_theorem3(&sys, &p, &unstable, &q),
            Err(Error::NotHurwitzBound)
        );
        assert_eq!(
            radius_bounds_corollary5(&sys, &unstable),
            Err(Error::NotHurwitzBound)
        );

        let wide = PerturbationStructure::new(vec![StructureQuad::new(
            Matrix::identity(2).scale(2.0),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
        )
        .unwrap()])
        .unwrap();
        assert_eq!(
            radius_lower_theorem3(&sys, &wide, &bound, &q),
            Err(Error::StructureNotDominating(0))
        );
    }

    #[test]
    fn report_serializes_with_tags() {
        let r = RadiusReport {
            lower: Some(0.5),
            upper: None,
            lower_method: BoundMethod::MarginLp,
            upper_method: BoundMethod::SubsystemMin,
            certificate_xi: None,
        };
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["lower_method"], "Theorem2-LP");
        assert_eq!(v["upper"], serde_json::Value::Null);
        assert_eq!(BoundMethod::SubsystemInverse.tag(), "Corollary5-Hk");
    }
}
