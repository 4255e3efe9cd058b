//! Structured affine perturbations `A0_k → A0_k + D0_k Δ_k E0_k`,
//! `η_k → η_k + D1_k δ_k E1_k`.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::delay::{check_fits, DelaySubsystem, DelayTerms, DiscreteDelay, SwitchedDelaySystem};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Structuring matrices of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureQuad<T = f64> {
    pub d0: Matrix<T>,
    pub e0: Matrix<T>,
    pub d1: Matrix<T>,
    pub e1: Matrix<T>,
}

impl<T: Scalar> StructureQuad<T> {
    pub fn new(d0: Matrix<T>, e0: Matrix<T>, d1: Matrix<T>, e1: Matrix<T>) -> Result<Self> {
        let n = d0.rows();
        if e0.cols() != n || d1.rows() != n || e1.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "structure outer dimensions disagree: D0 {:?}, E0 {:?}, D1 {:?}, E1 {:?}",
                d0.shape(),
                e0.shape(),
                d1.shape(),
                e1.shape()
            )));
        }
        Ok(Self { d0, e0, d1, e1 })
    }

    /// `D = E = I`: perturbations hit every entry independently.
    pub fn unstructured(n: usize) -> Self {
        let id = Matrix::identity(n);
        Self {
            d0: id.clone(),
            e0: id.clone(),
            d1: id.clone(),
            e1: id,
        }
    }

    pub fn dim(&self) -> usize {
        self.d0.rows()
    }

    /// Shape of `Δ_k`.
    pub fn delta0_shape(&self) -> (usize, usize) {
        (self.d0.cols(), self.e0.rows())
    }

    /// Shape of the matrices making up `δ_k`.
    pub fn delta1_shape(&self) -> (usize, usize) {
        (self.d1.cols(), self.e1.rows())
    }

    pub fn is_nonnegative(&self) -> bool {
        [&self.d0, &self.e0, &self.d1, &self.e1]
            .iter()
            .all(|m| m.is_nonnegative())
    }

    /// `max(‖D0‖‖E0‖, ‖D1‖‖E1‖)`.
    pub fn gain(&self) -> T {
        (self.d0.inf_norm() * self.e0.inf_norm()).max(self.d1.inf_norm() * self.e1.inf_norm())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationStructure<T = f64> {
    quads: Vec<StructureQuad<T>>,
}

impl<T: Scalar> PerturbationStructure<T> {
    pub fn new(quads: Vec<StructureQuad<T>>) -> Result<Self> {
        let n = quads
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty perturbation structure".into()))?
            .dim();
        if quads.iter().any(|q| q.dim() != n) {
            return Err(Error::DimensionMismatch("structures disagree on n".into()));
        }
        Ok(Self { quads })
    }

    pub fn unstructured(n: usize, subsystems: usize) -> Self {
        Self {
            quads: vec![StructureQuad::unstructured(n); subsystems],
        }
    }

    pub fn quads(&self) -> &[StructureQuad<T>] {
        &self.quads
    }

    pub fn quad(&self, k: usize) -> &StructureQuad<T> {
        &self.quads[k]
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.quads[0].dim()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.quads.iter().all(StructureQuad::is_nonnegative)
    }

    fn check_against(&self, sys: &SwitchedDelaySystem<T>) -> Result<()> {
        if self.len() != sys.len() || self.dim() != sys.dim() {
            return Err(Error::DimensionMismatch(format!(
                "structure for {} subsystems of dimension {}, system has {} of dimension {}",
                self.len(),
                self.dim(),
                sys.len(),
                sys.dim()
            )));
        }
        Ok(())
    }
}

/// `M0 = max_k max(‖D0_k‖‖E0_k‖, ‖D1_k‖‖E1_k‖)`.
pub fn structure_gain<T: Scalar>(p: &PerturbationStructure<T>) -> T {
    p.quads
        .iter()
        .map(StructureQuad::gain)
        .fold(T::zero(), T::max)
}

/// Unknown parameters of one subsystem: `Δ_k` and the delay disturbance
/// `δ_k` in jump-plus-density form.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceTerm<T = f64> {
    pub delta0: Matrix<T>,
    pub delta1: DelayTerms<T>,
}

impl<T: Scalar> DisturbanceTerm<T> {
    pub fn zero(q: &StructureQuad<T>) -> Self {
        let (r, c) = q.delta0_shape();
        Self {
            delta0: Matrix::zeros(r, c),
            delta1: DelayTerms::empty(q.delta1_shape()),
        }
    }

    /// `‖Δ_k‖ + ‖δ_k‖` with `‖δ_k‖ = ‖V(δ_k)‖`.
    pub fn norm(&self) -> T {
        self.delta0.inf_norm() + self.delta1.variation_matrix().inf_norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance<T = f64> {
    terms: Vec<DisturbanceTerm<T>>,
}

impl<T: Scalar> Disturbance<T> {
    pub fn new(terms: Vec<DisturbanceTerm<T>>) -> Self {
        Self { terms }
    }

    pub fn zero(p: &PerturbationStructure<T>) -> Self {
        Self {
            terms: p.quads.iter().map(DisturbanceTerm::zero).collect(),
        }
    }

    pub fn terms(&self) -> &[DisturbanceTerm<T>] {
        &self.terms
    }

    /// Componentwise sum.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.terms.len() != other.terms.len() {
            return Err(Error::DimensionMismatch(
                "disturbances of different length".into(),
            ));
        }
        let terms = self
            .terms
            .iter()
            .zip(&other.terms)
            .map(|(a, b)| {
                Ok(DisturbanceTerm {
                    delta0: a.delta0.try_add(&b.delta0)?,
                    delta1: a.delta1.merge(&b.delta1)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { terms })
    }

    pub fn scaled(&self, s: T) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let (discrete, kernel) = scale_terms(&t.delta1, s);
                DisturbanceTerm {
                    delta0: t.delta0.scale(s),
                    delta1: DelayTerms::new(t.delta1.shape(), discrete, kernel)
                        .expect("scaling preserves validity"),
                }
            })
            .collect();
        Self { terms }
    }
}

fn scale_terms<T: Scalar>(
    d: &DelayTerms<T>,
    s: T,
) -> (
    Vec<DiscreteDelay<T>>,
    Option<crate::delay::DistributedKernel<T>>,
) {
    let discrete = d
        .discrete()
        .iter()
        .map(|j| DiscreteDelay {
            delay: j.delay,
            matrix: j.matrix.scale(s),
        })
        .collect();
    let kernel = d.kernel().map(|k| {
        crate::delay::DistributedKernel::new(
            k.grid().to_vec(),
            k.values().iter().map(|v| v.scale(s)).collect(),
        )
        .expect("scaling preserves validity")
    });
    (discrete, kernel)
}

/// `max_k (‖Δ_k‖ + ‖δ_k‖)`.
pub fn disturbance_norm<T: Scalar>(d: &Disturbance<T>) -> T {
    d.terms
        .iter()
        .map(DisturbanceTerm::norm)
        .fold(T::zero(), T::max)
}

/// Perturbed system: `A0_k + D0 Δ E0` and `η_k + D1 δ E1`, with jumps at
/// coinciding delays merged.
pub fn apply<T: Scalar>(
    sys: &SwitchedDelaySystem<T>,
    p: &PerturbationStructure<T>,
    d: &Disturbance<T>,
) -> Result<SwitchedDelaySystem<T>> {
    p.check_against(sys)?;
    if d.terms.len() != sys.len() {
        return Err(Error::DimensionMismatch(format!(
            "disturbance has {} terms for {} subsystems",
            d.terms.len(),
            sys.len()
        )));
    }
    let subsystems = sys
        .subsystems()
        .iter()
        .zip(&p.quads)
        .zip(&d.terms)
        .enumerate()
        .map(|(k, ((s, q), t))| {
            if t.delta0.shape() != q.delta0_shape() || t.delta1.shape() != q.delta1_shape() {
                return Err(Error::DimensionMismatch(format!(
                    "subsystem {k}: disturbance shapes {:?}/{:?}, structure expects {:?}/{:?}",
                    t.delta0.shape(),
                    t.delta1.shape(),
                    q.delta0_shape(),
                    q.delta1_shape()
                )));
            }
            let extra = t.delta1.sandwich(&q.d1, &q.e1)?;
            check_fits(&extra, sys.h(), k)?;
            let a0 = s.a0().try_add(&q.d0.try_mul(&t.delta0)?.try_mul(&q.e0)?)?;
            DelaySubsystem::from_parts(a0, s.delays().merge(&extra)?)
        })
        .collect::<Result<Vec<_>>>()?;
    SwitchedDelaySystem::new(sys.h(), subsystems)
}

/// Uniform sample in `[0, 1)` from the top 53 bits of a SplitMix64 output.
pub(crate) fn uniform01(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform_pm1<T: Scalar>(rng: &mut SplitMix64) -> T {
    T::lit(2.0 * uniform01(rng) - 1.0)
}

fn random_matrix<T: Scalar>(rng: &mut SplitMix64, (r, c): (usize, usize)) -> Matrix<T> {
    let data = (0..r * c).map(|_| uniform_pm1(rng)).collect();
    Matrix::new(r, c, data).expect("finite samples")
}

/// Deterministic random disturbance with `disturbance_norm == target_norm`.
///
/// Generator: SplitMix64 seeded with `seed`. For each subsystem in order,
/// `Δ_k` entries are drawn row-major, then the entries of a single jump
/// matrix for `δ_k` placed at delay `delay`; each entry is
/// `2 · (u >> 11) / 2^53 - 1`. Each subsystem's pair is then rescaled so
/// `‖Δ_k‖ + ‖δ_k‖ = target_norm`.
pub fn sample_disturbance<T: Scalar>(
    p: &PerturbationStructure<T>,
    delay: T,
    target_norm: T,
    seed: u64,
) -> Result<Disturbance<T>> {
    if !(target_norm >= T::zero()) {
        return Err(Error::InvalidModel(format!(
            "target norm must be >= 0, got {target_norm}"
        )));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let terms = p
        .quads
        .iter()
        .map(|q| {
            let delta0: Matrix<T> = random_matrix(&mut rng, q.delta0_shape());
            let jump: Matrix<T> = random_matrix(&mut rng, q.delta1_shape());
            let norm = delta0.inf_norm() + jump.inf_norm();
            let s = if norm > T::zero() {
                target_norm / norm
            } else {
                T::zero()
            };
            let delta1 = DelayTerms::new(
                q.delta1_shape(),
                vec![DiscreteDelay {
                    delay,
                    matrix: jump.scale(s),
                }],
                None,
            )?;
            Ok(DisturbanceTerm {
                delta0: delta0.scale(s),
                delta1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Disturbance { terms })
}
