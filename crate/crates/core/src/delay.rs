//! Constituent delay subsystems and switched families.
//!
//! A delay operator is represented as a finite set of jumps (discrete delays)
//! plus a piecewise-linear density on `[-h, 0]`. For this representation the
//! entrywise total variation is exact: jump magnitudes plus the integral of
//! the absolute density.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Absolute slack for entrywise order comparisons.
pub const ORDER_SLACK: f64 = 1e-12;

/// Piecewise-linear matrix density `B(θ)` sampled on a grid ending at `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedKernel<T = f64> {
    grid: Vec<T>,
    values: Vec<Matrix<T>>,
}

impl<T: Scalar> DistributedKernel<T> {
    pub fn new(grid: Vec<T>, values: Vec<Matrix<T>>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidModel(
                "kernel grid needs at least two points".into(),
            ));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidModel(format!(
                "kernel has {} grid points but {} value matrices",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidModel("kernel grid must be finite".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel(
                "kernel grid must be strictly increasing".into(),
            ));
        }
        if *grid.last().unwrap() != T::zero() {
            return Err(Error::InvalidModel("kernel grid must end at 0".into()));
        }
        let shape = values[0].shape();
        if values.iter().any(|v| v.shape() != shape) {
            return Err(Error::InvalidModel(
                "kernel values must share one shape".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[Matrix<T>] {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    /// Left end of the support, `-h`.
    pub fn start(&self) -> T {
        self.grid[0]
    }

    /// Linear interpolation between grid values; zero outside the support.
    pub fn value_at(&self, theta: T) -> Matrix<T> {
        let (r, c) = self.shape();
        if theta < self.grid[0] || theta > T::zero() {
            return Matrix::zeros(r, c);
        }
        let seg = match self.grid.iter().position(|&g| g >= theta) {
            Some(0) => return self.values[0].clone(),
            Some(i) => i - 1,
            None => return self.values[self.grid.len() - 1].clone(),
        };
        let (t0, t1) = (self.grid[seg], self.grid[seg + 1]);
        let w = (theta - t0) / (t1 - t0);
        &self.values[seg].scale(T::one() - w) + &self.values[seg + 1].scale(w)
    }

    /// Signed integral `∫ B(θ) dθ` by the trapezoid rule, exact for piecewise-linear `B`.
    pub fn integral(&self) -> Matrix<T> {
        let (r, c) = self.shape();
        let half = T::lit(0.5);
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .fold(Matrix::zeros(r, c), |acc, (g, v)| {
                &acc + &(&v[0] + &v[1]).scale(half * (g[1] - g[0]))
            })
    }

    /// Entrywise `∫ |B(θ)| dθ`. Segments whose endpoint values differ in sign
    /// are split at the zero crossing, so the result is exact.
    pub fn abs_integral(&self) -> Matrix<T> {
        let (r, c) = self.shape();
        let half = T::lit(0.5);
        let mut data = vec![T::zero(); r * c];
        for (g, v) in self.grid.windows(2).zip(self.values.windows(2)) {
            let width = g[1] - g[0];
            for (idx, out) in data.iter_mut().enumerate() {
                let a = v[0].as_slice()[idx];
                let b = v[1].as_slice()[idx];
                *out += if a * b >= T::zero() {
                    half * width * (a.abs() + b.abs())
                } else {
                    half * width * (a * a + b * b) / (a.abs() + b.abs())
                };
            }
        }
        Matrix::new(r, c, data).expect("finite kernel integral")
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(Matrix::is_nonnegative)
    }

    /// `D · B(θ) · E` applied at every grid point.
    pub fn sandwich(&self, d: &Matrix<T>, e: &Matrix<T>) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|v| d.try_mul(v)?.try_mul(e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.grid.clone(), values)
    }

    /// Pointwise sum of two kernels with the same support, on the union grid.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch("kernel shapes differ".into()));
        }
        if self.start() != other.start() {
            return Err(Error::InvalidModel(
                "kernels must share the same support".into(),
            ));
        }
        let mut grid: Vec<T> = self.grid.iter().chain(&other.grid).copied().collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let values = grid
            .iter()
            .map(|&t| &self.value_at(t) + &other.value_at(t))
            .collect();
        Self::new(grid, values)
    }
}

/// One discrete delay term `A x(t - delay)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDelay<T = f64> {
    pub delay: T,
    pub matrix: Matrix<T>,
}

/// Delayed part of a subsystem: jumps at strictly increasing positive delays
/// plus an optional distributed kernel. Matrices may be rectangular, which
/// lets the same type carry structured disturbances.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayTerms<T = f64> {
    shape: (usize, usize),
    discrete: Vec<DiscreteDelay<T>>,
    kernel: Option<DistributedKernel<T>>,
}

impl<T: Scalar> DelayTerms<T> {
    pub fn new(
        shape: (usize, usize),
        discrete: Vec<DiscreteDelay<T>>,
        kernel: Option<DistributedKernel<T>>,
    ) -> Result<Self> {
        for (i, term) in discrete.iter().enumerate() {
            if !(term.delay > T::zero()) || !term.delay.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "discrete term {i}: delay must be strictly positive, got {}",
                    term.delay
                )));
            }
            if term.matrix.shape() != shape {
                return Err(Error::InvalidModel(format!(
                    "discrete term {i}: expected {shape:?} matrix, got {:?}",
                    term.matrix.shape()
                )));
            }
        }
        if discrete.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::InvalidModel(
                "delays must be strictly increasing".into(),
            ));
        }
        if let Some(k) = &kernel {
            if k.shape() != shape {
                return Err(Error::InvalidModel(format!(
                    "kernel: expected {shape:?} values, got {:?}",
                    k.shape()
                )));
            }
        }
        Ok(Self {
            shape,
            discrete,
            kernel,
        })
    }

    pub fn empty(shape: (usize, usize)) -> Self {
        Self {
            shape,
            discrete: Vec::new(),
            kernel: None,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn discrete(&self) -> &[DiscreteDelay<T>] {
        &self.discrete
    }

    pub fn kernel(&self) -> Option<&DistributedKernel<T>> {
        self.kernel.as_ref()
    }

    /// Largest delay reached by a jump or by the kernel support.
    pub fn max_delay(&self) -> T {
        let jumps = self.discrete.last().map_or(T::zero(), |d| d.delay);
        let kernel = self.kernel.as_ref().map_or(T::zero(), |k| -k.start());
        jumps.max(kernel)
    }

    /// Exact total-variation matrix `Σ|A_i| + ∫|B|`.
    pub fn variation_matrix(&self) -> Matrix<T> {
        let (r, c) = self.shape;
        let jumps = self
            .discrete
            .iter()
            .fold(Matrix::zeros(r, c), |acc, d| &acc + &d.matrix.abs());
        match &self.kernel {
            Some(k) => &jumps + &k.abs_integral(),
            None => jumps,
        }
    }

    /// Value of the delay operator at `θ = 0`: `Σ A_i + ∫ B`.
    pub fn total(&self) -> Matrix<T> {
        let (r, c) = self.shape;
        let jumps = self
            .discrete
            .iter()
            .fold(Matrix::zeros(r, c), |acc, d| &acc + &d.matrix);
        match &self.kernel {
            Some(k) => &jumps + &k.integral(),
            None => jumps,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.discrete.iter().all(|d| d.matrix.is_nonnegative())
            && self
                .kernel
                .as_ref()
                .map_or(true, DistributedKernel::is_nonnegative)
    }

    /// `D · (·) · E` applied to every jump and kernel value.
    pub fn sandwich(&self, d: &Matrix<T>, e: &Matrix<T>) -> Result<Self> {
        let discrete = self
            .discrete
            .iter()
            .map(|t| {
                Ok(DiscreteDelay {
                    delay: t.delay,
                    matrix: d.try_mul(&t.matrix)?.try_mul(e)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = self.kernel.as_ref().map(|k| k.sandwich(d, e)).transpose()?;
        Self::new((d.rows(), e.cols()), discrete, kernel)
    }

    /// Termwise sum. Jumps at coinciding delays are added, others interleaved
    /// in delay order; kernels are merged on the union grid.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!(
                "delay terms {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let mut discrete = self.discrete.clone();
        for term in &other.discrete {
            match discrete.iter_mut().find(|d| d.delay == term.delay) {
                Some(d) => d.matrix = &d.matrix + &term.matrix,
                None => discrete.push(term.clone()),
            }
        }
        discrete.sort_by(|a, b| a.delay.partial_cmp(&b.delay).unwrap());
        let kernel = match (&self.kernel, &other.kernel) {
            (Some(a), Some(b)) => Some(a.merge(b)?),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        };
        Self::new(self.shape, discrete, kernel)
    }
}

/// One constituent system `x' = A0 x + Σ A_i x(t - h_i) + ∫ B(θ) x(t + θ) dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySubsystem<T = f64> {
    a0: Matrix<T>,
    delays: DelayTerms<T>,
}

impl<T: Scalar> DelaySubsystem<T> {
    pub fn new(
        a0: Matrix<T>,
        discrete: Vec<DiscreteDelay<T>>,
        kernel: Option<DistributedKernel<T>>,
    ) -> Result<Self> {
        if !a0.is_square() {
            return Err(Error::NotSquare {
                rows: a0.rows(),
                cols: a0.cols(),
            });
        }
        let delays = DelayTerms::new(a0.shape(), discrete, kernel)?;
        Ok(Self { a0, delays })
    }

    pub fn from_parts(a0: Matrix<T>, delays: DelayTerms<T>) -> Result<Self> {
        if !a0.is_square() {
            return Err(Error::NotSquare {
                rows: a0.rows(),
                cols: a0.cols(),
            });
        }
        if delays.shape() != a0.shape() {
            return Err(Error::DimensionMismatch("delay terms must match A0".into()));
        }
        Ok(Self { a0, delays })
    }

    /// Subsystem without delayed terms.
    pub fn undelayed(a0: Matrix<T>) -> Result<Self> {
        Self::new(a0, Vec::new(), None)
    }

    pub fn dim(&self) -> usize {
        self.a0.rows()
    }

    pub fn a0(&self) -> &Matrix<T> {
        &self.a0
    }

    pub fn delays(&self) -> &DelayTerms<T> {
        &self.delays
    }

    pub fn discrete(&self) -> &[DiscreteDelay<T>] {
        self.delays.discrete()
    }

    pub fn kernel(&self) -> Option<&DistributedKernel<T>> {
        self.delays.kernel()
    }

    pub fn variation_matrix(&self) -> Matrix<T> {
        self.delays.variation_matrix()
    }

    /// `M(A0) + V(η)`, the Metzler matrix entering the copositive condition.
    pub fn envelope_matrix(&self) -> Matrix<T> {
        let m = self.a0.metzlerize().expect("A0 is square");
        &m + &self.variation_matrix()
    }

    /// `A0 + Σ A_i + ∫ B`, i.e. `-P(0)`.
    pub fn lumped_matrix(&self) -> Matrix<T> {
        &self.a0 + &self.delays.total()
    }

    /// Characteristic matrix at `s = 0`: `-A0 - Σ A_i - ∫ B`.
    pub fn characteristic_at_zero(&self) -> Matrix<T> {
        -&self.lumped_matrix()
    }

    pub fn is_positive_system(&self) -> bool {
        self.a0.is_metzler().unwrap_or(false) && self.delays.is_nonnegative()
    }

    /// True iff `M(s.A0) <= self.A0` and `V(s) <= V(self)` entrywise.
    pub fn dominates(&self, s: &Self) -> Result<bool> {
        if !self.is_positive_system() {
            return Err(Error::NotPositiveBound);
        }
        if s.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "bound has dimension {}, subsystem {}",
                self.dim(),
                s.dim()
            )));
        }
        let slack = T::lit(ORDER_SLACK);
        Ok(s.a0.metzlerize()?.le_with_slack(&self.a0, slack)?
            && s.variation_matrix()
                .le_with_slack(&self.variation_matrix(), slack)?)
    }
}

/// Ordered family of subsystems sharing state dimension and maximal delay.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedDelaySystem<T = f64> {
    n: usize,
    h: T,
    subsystems: Vec<DelaySubsystem<T>>,
}

impl<T: Scalar> SwitchedDelaySystem<T> {
    pub fn new(h: T, subsystems: Vec<DelaySubsystem<T>>) -> Result<Self> {
        let first = subsystems
            .first()
            .ok_or_else(|| Error::InvalidModel("at least one subsystem is required".into()))?;
        let n = first.dim();
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidModel(format!(
                "max delay h must be positive, got {h}"
            )));
        }
        for (k, s) in subsystems.iter().enumerate() {
            if s.dim() != n {
                return Err(Error::InvalidModel(format!(
                    "subsystem {k} has dimension {}, expected {n}",
                    s.dim()
                )));
            }
            check_fits(s.delays(), h, k)?;
        }
        Ok(Self { n, h, subsystems })
    }

    /// Uses the largest delay present as `h` (1 when there are no delays).
    pub fn with_inferred_h(subsystems: Vec<DelaySubsystem<T>>) -> Result<Self> {
        let h = subsystems
            .iter()
            .map(|s| s.delays().max_delay())
            .fold(T::zero(), T::max);
        let h = if h > T::zero() { h } else { T::one() };
        Self::new(h, subsystems)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn subsystems(&self) -> &[DelaySubsystem<T>] {
        &self.subsystems
    }

    pub fn subsystem(&self, k: usize) -> &DelaySubsystem<T> {
        &self.subsystems[k]
    }

    pub fn envelopes(&self) -> Vec<Matrix<T>> {
        self.subsystems
            .iter()
            .map(DelaySubsystem::envelope_matrix)
            .collect()
    }

    pub fn is_positive_system(&self) -> bool {
        self.subsystems
            .iter()
            .all(DelaySubsystem::is_positive_system)
    }
}

/// Delay terms fit a system with max delay `h` when every jump is at most `h`
/// and any kernel spans exactly `[-h, 0]`.
pub(crate) fn check_fits<T: Scalar>(terms: &DelayTerms<T>, h: T, k: usize) -> Result<()> {
    if let Some(d) = terms.discrete().last() {
        if d.delay > h {
            return Err(Error::InvalidModel(format!(
                "subsystem {k}: delay {} exceeds h = {h}",
                d.delay
            )));
        }
    }
    if let Some(kernel) = terms.kernel() {
        if kernel.start() != -h {
            return Err(Error::InvalidModel(format!(
                "subsystem {k}: kernel grid starts at {} but must start at -h = {}",
                kernel.start(),
                -h
            )));
        }
    }
    Ok(())
}
