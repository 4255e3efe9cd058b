//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Problems are stated as
//!
//! ```text
//! maximize  c·x
//! s.t.      a_i·x <= b_i      for every constraint i
//!           l_j <= x_j <= u_j (either side optional)
//! ```
//!
//! and converted to `A y + s = b, y, s >= 0` by shifting, reflecting or
//! splitting each variable according to its bounds.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_PIVOTS: usize = 10_000;

/// Pivot and reduced-cost threshold.
const PIVOT_EPS: f64 = 1e-11;

/// Phase-one residual above which a problem is declared infeasible
/// (scaled by `1 + max|b|`).
const FEAS_EPS: f64 = 1e-9;

/// `coeffs · x <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T = f64> {
    pub coeffs: Vec<T>,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn le(coeffs: Vec<T>, rhs: T) -> Self {
        Self { coeffs, rhs }
    }

    /// `coeffs · x >= rhs`, stored negated.
    pub fn ge(coeffs: Vec<T>, rhs: T) -> Self {
        Self {
            coeffs: coeffs.into_iter().map(|c| -c).collect(),
            rhs: -rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<T = f64> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T: Scalar> Bounds<T> {
    pub fn free() -> Self {
        Self {
            lower: None,
            upper: None,
        }
    }

    pub fn nonnegative() -> Self {
        Self {
            lower: Some(T::zero()),
            upper: None,
        }
    }

    pub fn between(lower: T, upper: T) -> Self {
        Self {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution<T = f64> {
    Optimal { objective: T, variables: Vec<T> },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, Self::Optimal { .. })
    }

    pub fn objective(&self) -> Option<T> {
        match self {
            Self::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }

    pub fn variables(&self) -> Option<&[T]> {
        match self {
            Self::Optimal { variables, .. } => Some(variables),
            _ => None,
        }
    }
}

/// Linear program in the maximization convention.
#[derive(Debug, Clone)]
pub struct LinearProgram<T = f64> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<Bounds<T>>,
    pub max_pivots: usize,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>, constraints: Vec<Constraint<T>>, bounds: Vec<Bounds<T>>) -> Self {
        Self {
            objective,
            constraints,
            bounds,
            max_pivots: DEFAULT_MAX_PIVOTS,
        }
    }

    pub fn with_max_pivots(mut self, max_pivots: usize) -> Self {
        self.max_pivots = max_pivots;
        self
    }

    pub fn solve(&self) -> Result<LpSolution<T>> {
        let nvars = self.objective.len();
        if self.bounds.len() != nvars {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {nvars} variables",
                self.bounds.len()
            )));
        }
        if let Some((i, c)) = self
            .constraints
            .iter()
            .enumerate()
            .find(|(_, c)| c.coeffs.len() != nvars)
        {
            return Err(Error::DimensionMismatch(format!(
                "constraint {i} has {} coefficients for {nvars} variables",
                c.coeffs.len()
            )));
        }
        let all_finite = self.objective.iter().all(|x| x.is_finite())
            && self
                .constraints
                .iter()
                .all(|c| c.rhs.is_finite() && c.coeffs.iter().all(|x| x.is_finite()))
            && self.bounds.iter().all(|b| {
                b.lower.map_or(true, |x| x.is_finite()) && b.upper.map_or(true, |x| x.is_finite())
            });
        if !all_finite {
            return Err(Error::DimensionMismatch("LP data must be finite".into()));
        }

        // x_j = offset_j + Σ sign * y_col
        let mut maps: Vec<(T, Vec<(usize, T)>)> = Vec::with_capacity(nvars);
        let mut ny = 0;
        let mut rows: Vec<(Vec<(usize, T)>, T)> = Vec::new();
        for b in &self.bounds {
            match (b.lower, b.upper) {
                (Some(l), u) => {
                    if let Some(u) = u {
                        if u < l {
                            return Ok(LpSolution::Infeasible);
                        }
                        rows.push((vec![(ny, T::one())], u - l));
                    }
                    maps.push((l, vec![(ny, T::one())]));
                    ny += 1;
                }
                (None, Some(u)) => {
                    maps.push((u, vec![(ny, -T::one())]));
                    ny += 1;
                }
                (None, None) => {
                    maps.push((T::zero(), vec![(ny, T::one()), (ny + 1, -T::one())]));
                    ny += 2;
                }
            }
        }
        for c in &self.constraints {
            let mut coeffs = Vec::new();
            let mut rhs = c.rhs;
            for (j, &a) in c.coeffs.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                rhs -= a * maps[j].0;
                coeffs.extend(maps[j].1.iter().map(|&(col, s)| (col, a * s)));
            }
            rows.push((coeffs, rhs));
        }
        let mut cost = vec![T::zero(); ny];
        let mut cost_offset = T::zero();
        for (j, &c) in self.objective.iter().enumerate() {
            cost_offset += c * maps[j].0;
            for &(col, s) in &maps[j].1 {
                cost[col] += c * s;
            }
        }

        let mut tab = Tableau::build(ny, &rows);
        let mut pivots = 0;

        // phase one: drive the artificial variables to zero
        if tab.n_art > 0 {
            let phase1: Vec<T> = (0..tab.ncols)
                .map(|j| {
                    if tab.is_artificial(j) {
                        -T::one()
                    } else {
                        T::zero()
                    }
                })
                .collect();
            let status = tab.optimize(&phase1, true, &mut pivots, self.max_pivots)?;
            debug_assert!(status, "phase one is bounded");
            let residual = tab.objective_value(&phase1);
            let scale = T::one() + rows.iter().fold(T::zero(), |acc, r| acc.max(r.1.abs()));
            if -residual > T::lit(FEAS_EPS) * scale {
                return Ok(LpSolution::Infeasible);
            }
            tab.evict_artificials();
        }

        let mut phase2 = vec![T::zero(); tab.ncols];
        phase2[..ny].copy_from_slice(&cost);
        if !tab.optimize(&phase2, false, &mut pivots, self.max_pivots)? {
            return Ok(LpSolution::Unbounded);
        }

        let y = tab.primal(ny);
        let variables: Vec<T> = maps
            .iter()
            .map(|(off, cols)| cols.iter().fold(*off, |acc, &(col, s)| acc + s * y[col]))
            .collect();
        let objective = self
            .objective
            .iter()
            .zip(&variables)
            .fold(T::zero(), |acc, (&c, &x)| acc + c * x);
        debug_assert!(
            (objective - (tab.objective_value(&phase2) + cost_offset)).abs()
                <= T::lit(1e-6) * (T::one() + objective.abs())
        );
        Ok(LpSolution::Optimal {
            objective,
            variables,
        })
    }
}

/// Solves `max c·x` subject to `a_i·x <= b_i` and per-variable bounds.
pub fn lp_solve<T: Scalar>(
    objective: &[T],
    constraints: &[Constraint<T>],
    bounds: &[Bounds<T>],
) -> Result<LpSolution<T>> {
    LinearProgram::new(objective.to_vec(), constraints.to_vec(), bounds.to_vec()).solve()
}

/// Columns: structural `y`, one slack per row, then artificials.
struct Tableau<T> {
    m: usize,
    ncols: usize,
    first_art: usize,
    n_art: usize,
    // m rows of ncols coefficients followed by the rhs
    a: Vec<Vec<T>>,
    basis: Vec<usize>,
}

impl<T: Scalar> Tableau<T> {
    fn build(ny: usize, rows: &[(Vec<(usize, T)>, T)]) -> Self {
        let m = rows.len();
        let n_art = rows.iter().filter(|r| r.1 < T::zero()).count();
        let first_art = ny + m;
        let ncols = first_art + n_art;
        let mut a = vec![vec![T::zero(); ncols + 1]; m];
        let mut basis = vec![0; m];
        let mut art = first_art;
        for (i, (coeffs, rhs)) in rows.iter().enumerate() {
            let row = &mut a[i];
            for &(col, v) in coeffs {
                row[col] += v;
            }
            row[ny + i] = T::one();
            row[ncols] = *rhs;
            if *rhs < T::zero() {
                row.iter_mut().for_each(|x| *x = -*x);
                row[art] = T::one();
                basis[i] = art;
                art += 1;
            } else {
                basis[i] = ny + i;
            }
        }
        Self {
            m,
            ncols,
            first_art,
            n_art,
            a,
            basis,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_art
    }

    fn objective_value(&self, cost: &[T]) -> T {
        (0..self.m).fold(T::zero(), |acc, i| {
            acc + cost[self.basis[i]] * self.a[i][self.ncols]
        })
    }

    fn primal(&self, ny: usize) -> Vec<T> {
        let mut y = vec![T::zero(); ny];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < ny {
                y[b] = self.a[i][self.ncols];
            }
        }
        y
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let width = self.ncols + 1;
        let piv = self.a[p][q];
        for x in self.a[p].iter_mut() {
            *x /= piv;
        }
        let prow = self.a[p].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let f = row[q];
            if f != T::zero() {
                for j in 0..width {
                    row[j] -= f * prow[j];
                }
                row[q] = T::zero();
            }
        }
        self.basis[p] = q;
    }

    /// Maximizes `cost · columns` from the current basic feasible solution.
    /// Returns `false` if the objective is unbounded.
    fn optimize(
        &mut self,
        cost: &[T],
        allow_artificial: bool,
        pivots: &mut usize,
        max_pivots: usize,
    ) -> Result<bool> {
        let eps = T::lit(PIVOT_EPS);
        loop {
            // Bland: lowest-index column with positive reduced profit
            let entering = (0..self.ncols).find(|&j| {
                if !allow_artificial && self.is_artificial(j) {
                    return false;
                }
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced =
                    (0..self.m).fold(cost[j], |acc, i| acc - cost[self.basis[i]] * self.a[i][j]);
                reduced > eps
            });
            let Some(q) = entering else { return Ok(true) };

            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.m {
                let aiq = self.a[i][q];
                if aiq > eps {
                    let ratio = self.a[i][self.ncols] / aiq;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((p, best)) => {
                            if ratio < best || (ratio == best && self.basis[i] < self.basis[p]) {
                                Some((i, ratio))
                            } else {
                                Some((p, best))
                            }
                        }
                    };
                }
            }
            let Some((p, _)) = leave else {
                return Ok(false);
            };
            if *pivots >= max_pivots {
                return Err(Error::IterationLimit(max_pivots));
            }
            *pivots += 1;
            self.pivot(p, q);
            // clamp tiny negative right-hand sides produced by round-off
            for row in self.a.iter_mut() {
                let rhs = &mut row[self.ncols];
                if *rhs < T::zero() && *rhs > -eps {
                    *rhs = T::zero();
                }
            }
        }
    }

    /// After phase one, pivots every zero-valued artificial out of the basis
    /// where a structural column allows it. Rows without such a column are
    /// redundant and keep their artificial at zero.
    fn evict_artificials(&mut self) {
        let eps = T::lit(PIVOT_EPS);
        for i in 0..self.m {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let col = (0..self.first_art)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.a[i][j].abs() > eps);
            if let Some(q) = col {
                self.pivot(i, q);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nonneg(n: usize) -> Vec<Bounds> {
        vec![Bounds::nonnegative(); n]
    }

    #[test]
    fn single_variable_examples() {
        let sol = lp_solve(&[1.0], &[Constraint::le(vec![1.0], 3.0)], &nonneg(1)).unwrap();
        assert_eq!(sol.objective(), Some(3.0));
        let sol = lp_solve(&[1.0], &[Constraint::le(vec![1.0], -1.0)], &nonneg(1)).unwrap();
        assert_eq!(sol, LpSolution::Infeasible);
        let sol = lp_solve(&[1.0], &[], &nonneg(1)).unwrap();
        assert_eq!(sol, LpSolution::Unbounded);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let cons = [
            Constraint::le(vec![1.0, 0.0], 4.0),
            Constraint::le(vec![0.0, 2.0], 12.0),
            Constraint::le(vec![3.0, 2.0], 18.0),
        ];
        let sol = lp_solve(&[3.0, 5.0], &cons, &nonneg(2)).unwrap();
        let x = sol.variables().unwrap();
        assert!((sol.objective().unwrap() - 36.0).abs() < 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn ge_constraints_need_phase_one() {
        // min x + y s.t. x + 2y >= 4, 3x + y >= 6  ->  (1.6, 1.2), 2.8
        let cons = [
            Constraint::ge(vec![1.0, 2.0], 4.0),
            Constraint::ge(vec![3.0, 1.0], 6.0),
        ];
        let sol = lp_solve(&[-1.0, -1.0], &cons, &nonneg(2)).unwrap();
        assert!((sol.objective().unwrap() + 2.8).abs() < 1e-12);
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // max -|x - 2| style: max t, t <= x - 2, t <= 2 - x, x free, t free
        let cons = [
            Constraint::le(vec![-1.0, 1.0], -2.0),
            Constraint::le(vec![1.0, 1.0], 2.0),
        ];
        let sol = lp_solve(&[0.0_f64, 1.0], &cons, &[Bounds::free(), Bounds::free()]).unwrap();
        let x = sol.variables().unwrap();
        assert!(sol.objective().unwrap().abs() < 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-12);

        // x <= 5 only from above: max x -> 5; min x -> unbounded
        let ub = [Bounds {
            lower: None,
            upper: Some(5.0),
        }];
        assert_eq!(lp_solve(&[1.0], &[], &ub).unwrap().objective(), Some(5.0));
        assert_eq!(lp_solve(&[-1.0], &[], &ub).unwrap(), LpSolution::Unbounded);
        assert_eq!(
            lp_solve(&[1.0], &[], &[Bounds::between(2.0, 1.0)]).unwrap(),
            LpSolution::Infeasible
        );
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance (cycles under Dantzig's rule)
        let cons = [
            Constraint::le(vec![0.25, -60.0, -0.04, 9.0], 0.0),
            Constraint::le(vec![0.5, -90.0, -0.02, 3.0], 0.0),
            Constraint::le(vec![0.0, 0.0, 1.0, 0.0], 1.0),
        ];
        let sol = lp_solve(&[0.75, -150.0, 0.02, -6.0], &cons, &nonneg(4)).unwrap();
        assert!((sol.objective().unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn redundant_equality_rows() {
        // x + y = 2 written twice as pairs of inequalities
        let cons = [
            Constraint::le(vec![1.0, 1.0], 2.0),
            Constraint::ge(vec![1.0, 1.0], 2.0),
            Constraint::le(vec![2.0, 2.0], 4.0),
            Constraint::ge(vec![2.0, 2.0], 4.0),
        ];
        let sol = lp_solve(&[1.0, 0.0], &cons, &nonneg(2)).unwrap();
        assert!((sol.objective().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors_and_iteration_limit() {
        assert!(matches!(
            lp_solve(&[1.0, 1.0], &[Constraint::le(vec![1.0], 1.0)], &nonneg(2)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            lp_solve(&[1.0], &[], &nonneg(2)),
            Err(Error::DimensionMismatch(_))
        ));
        let lp = LinearProgram::new(
            vec![3.0, 5.0],
            vec![
                Constraint::le(vec![1.0, 0.0], 4.0),
                Constraint::le(vec![3.0, 2.0], 18.0),
            ],
            nonneg(2),
        )
        .with_max_pivots(1);
        assert_eq!(lp.solve(), Err(Error::IterationLimit(1)));
    }

    #[test]
    fn single_precision_solve() {
        let sol = lp_solve(
            &[1.0_f32, 1.0],
            &[Constraint::le(vec![1.0, 2.0], 4.0)],
            &[Bounds::between(0.0, 1.0), Bounds::nonnegative()],
        )
        .unwrap();
        assert!((sol.objective().unwrap() - 2.5).abs() < 1e-6);
    }
}
