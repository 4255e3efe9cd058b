//! Fixed-step RK4 for switched delay systems.
//!
//! Delays and switching instants must sit on the step grid. Delayed values
//! come from cubic Hermite interpolation of the stored solution, the
//! distributed term from the trapezoid rule on the kernel grid refined by
//! the step grid. Values at `t <= 0` come straight from the history.

use std::io::{self, Write};

use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::delay::SwitchedDelaySystem;
use crate::error::{Error, Result};
use crate::lclf::LclfCertificate;
use crate::matrix::Matrix;
use crate::perturb::uniform01;
use crate::scalar::{vec_inf_norm, vec_max, Scalar};

/// Relative tolerance for "is an integer multiple of dt".
pub const GRID_TOL: f64 = 1e-9;
/// Blow-up threshold relative to the history norm.
pub const DIVERGENCE_FACTOR: f64 = 1e12;
/// Relative slack of [`decay_envelope_check`].
pub const ENVELOPE_SLACK: f64 = 1e-6;
/// Relative slack of [`positivity_check`].
pub const POSITIVITY_SLACK: f64 = 1e-9;

/// Switching signal with 0-based subsystem indices.
#[derive(Debug, Clone, PartialEq)]
pub enum SwitchingSignal<T = f64> {
    Constant(usize),
    /// `(subsystem, duration)` pairs, repeated forever.
    Periodic(Vec<(usize, T)>),
    /// Dwell times drawn as multiples of dt in `[min_dwell, max_dwell]`; each
    /// new mode differs from the previous one when there is more than one.
    RandomDwell {
        min_dwell: T,
        max_dwell: T,
        seed: u64,
    },
}

impl<T: Scalar> SwitchingSignal<T> {
    fn validate(&self, modes: usize) -> Result<()> {
        let check = |k: usize| {
            if k >= modes {
                Err(Error::InvalidSignal(format!(
                    "subsystem index {k} out of range for {modes}"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            Self::Constant(k) => check(*k),
            Self::Periodic(schedule) => {
                if schedule.is_empty() {
                    return Err(Error::InvalidSignal("empty periodic schedule".into()));
                }
                for &(k, d) in schedule {
                    check(k)?;
                    if !(d > T::zero()) || !d.is_finite() {
                        return Err(Error::InvalidSignal(format!(
                            "duration must be > 0, got {d}"
                        )));
                    }
                }
                Ok(())
            }
            Self::RandomDwell {
                min_dwell,
                max_dwell,
                ..
            } => {
                if !(*min_dwell > T::zero()) || !(min_dwell <= max_dwell) || !max_dwell.is_finite()
                {
                    return Err(Error::InvalidSignal(format!(
                        "dwell range must satisfy 0 < min <= max, got [{min_dwell}, {max_dwell}]"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Active subsystem at each of the `steps + 1` grid points.
    pub fn sample(&self, modes: usize, dt: T, steps: usize) -> Result<Vec<usize>> {
        self.validate(modes)?;
        let len = steps + 1;
        let mut out = Vec::with_capacity(len);
        match self {
            Self::Constant(k) => out.resize(len, *k),
            Self::Periodic(schedule) => {
                let pieces = schedule
                    .iter()
                    .map(|&(k, d)| Ok((k, grid_steps(d, dt, "switching duration")?)))
                    .collect::<Result<Vec<_>>>()?;
                for &(k, m) in pieces.iter().cycle() {
                    if out.len() >= len {
                        break;
                    }
                    out.extend(std::iter::repeat(k).take(m.min(len - out.len())));
                }
            }
            Self::RandomDwell {
                min_dwell,
                max_dwell,
                seed,
            } => {
                let lo = (*min_dwell / dt - T::lit(GRID_TOL)).ceil().max(T::one());
                let hi = (*max_dwell / dt + T::lit(GRID_TOL)).floor();
                if hi < lo {
                    return Err(Error::StepMismatch(format!(
                        "no multiple of dt = {dt} in dwell range [{min_dwell}, {max_dwell}]"
                    )));
                }
                let (lo, hi) = (lo.to_f64_lossy() as usize, hi.to_f64_lossy() as usize);
                let mut rng = SplitMix64::seed_from_u64(*seed);
                let mut k = (uniform01(&mut rng) * modes as f64) as usize;
                while out.len() < len {
                    let m = lo + (uniform01(&mut rng) * (hi - lo + 1) as f64) as usize;
                    out.extend(std::iter::repeat(k).take(m.min(len - out.len())));
                    if modes > 1 {
                        let shift = 1 + (uniform01(&mut rng) * (modes - 1) as f64) as usize;
                        k = (k + shift.min(modes - 1)) % modes;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Sampled solution on the uniform grid `t_j = j·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T = f64> {
    pub dt: T,
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    /// 0-based active subsystem at each grid point.
    pub active: Vec<usize>,
    /// Set when the state blew past the divergence threshold; the trajectory
    /// then stops at the first offending point.
    pub diverged: bool,
    /// `sup |φ|` over the history interval.
    pub history_norm: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_norm(&self) -> T {
        self.states.last().map_or(T::zero(), |x| vec_inf_norm(x))
    }

    pub fn initial_norm(&self) -> T {
        self.states.first().map_or(T::zero(), |x| vec_inf_norm(x))
    }
}

/// Integer `m >= 1` with `x = m·dt` up to [`GRID_TOL`].
fn grid_steps<T: Scalar>(x: T, dt: T, what: &str) -> Result<usize> {
    let r = x / dt;
    let m = r.round();
    if m < T::one() || (r - m).abs() > T::lit(GRID_TOL) * r {
        return Err(Error::StepMismatch(format!(
            "{what} {x} is not a multiple of dt = {dt}"
        )));
    }
    Ok(m.to_f64_lossy() as usize)
}

/// Where a delayed value is read, relative to the current stage.
#[derive(Debug, Clone, Copy)]
enum Offset<T> {
    /// Exact multiple of dt/2.
    HalfSteps(usize),
    /// Arbitrary `θ` (a kernel breakpoint off the step grid).
    Theta(T),
}

struct Mode<T> {
    a0: Matrix<T>,
    jumps: Vec<(usize, Matrix<T>)>,
    /// Trapezoid nodes for stages on the grid and at half steps.
    nodes: [Vec<(Offset<T>, Matrix<T>)>; 2],
}

/// Trapezoid weights for `∫ B(θ) x(t+θ) dθ` with `t` at a grid point
/// (`half = false`) or half a step past one.
fn kernel_nodes<T: Scalar>(
    kernel: &crate::delay::DistributedKernel<T>,
    dt: T,
    half: bool,
) -> Vec<(Offset<T>, Matrix<T>)> {
    let start = kernel.start();
    let two = T::lit(2.0);
    let merge_tol = T::lit(GRID_TOL) * dt;
    // (θ, half-step count if on the grid); ascending in θ after the sort
    let mut pts: Vec<(T, Option<usize>)> = vec![(T::zero(), Some(0))];
    let mut q = if half { 1 } else { 2 };
    loop {
        let theta = -T::from_usize(q).unwrap() * dt / two;
        if theta < start - merge_tol {
            break;
        }
        pts.push((theta.max(start), Some(q)));
        q += 2;
    }
    for &g in kernel.grid() {
        if pts.iter().all(|(t, _)| (*t - g).abs() > merge_tol) {
            pts.push((g, None));
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    let mut weights = vec![T::zero(); pts.len()];
    for i in 0..pts.len() - 1 {
        let w = (pts[i + 1].0 - pts[i].0) / two;
        weights[i] += w;
        weights[i + 1] += w;
    }
    pts.into_iter()
        .zip(weights)
        .filter(|(_, w)| *w > T::zero())
        .map(|((theta, q), w)| {
            let offset = q.map_or(Offset::Theta(theta), Offset::HalfSteps);
            (offset, kernel.value_at(theta).scale(w))
        })
        .collect()
}

struct Solver<'a, T, H> {
    n: usize,
    dt: T,
    history: &'a H,
    modes: Vec<Mode<T>>,
    states: Vec<Vec<T>>,
    /// One-sided derivatives `(start, end)` of each completed interval.
    derivs: Vec<(Vec<T>, Vec<T>)>,
}

impl<'a, T: Scalar, H: Fn(T) -> Vec<T>> Solver<'a, T, H> {
    fn time(&self, half_steps: i64) -> T {
        T::from_i64(half_steps).unwrap() * self.dt / T::lit(2.0)
    }

    /// Hermite interpolation on completed interval `i` at fraction `s`.
    fn hermite(&self, i: usize, s: T) -> Vec<T> {
        let (x0, x1) = (&self.states[i], &self.states[i + 1]);
        let (d0, d1) = &self.derivs[i];
        let (s2, s3) = (s * s, s * s * s);
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = (s3 - two * s2 + s) * self.dt;
        let h01 = three * s2 - two * s3;
        let h11 = (s3 - s2) * self.dt;
        (0..self.n)
            .map(|r| h00 * x0[r] + h10 * d0[r] + h01 * x1[r] + h11 * d1[r])
            .collect()
    }

    /// `x` at half-step position `p`, where the current interval starts at
    /// grid index `j` and the stage value `y` sits at position `stage`.
    fn at_half_steps(&self, p: i64, j: usize, stage: i64, y: &[T]) -> Vec<T> {
        if p <= 0 {
            return (self.history)(self.time(p));
        }
        if p == stage {
            return y.to_vec();
        }
        let p = p as usize;
        if p <= 2 * j {
            if p % 2 == 0 {
                return self.states[p / 2].clone();
            }
            let i = p / 2;
            let (x0, x1) = (&self.states[i], &self.states[i + 1]);
            let (d0, d1) = &self.derivs[i];
            let eighth = self.dt / T::lit(8.0);
            let half = T::lit(0.5);
            return (0..self.n)
                .map(|r| half * (x0[r] + x1[r]) + eighth * (d0[r] - d1[r]))
                .collect();
        }
        self.at_time(self.time(p as i64), j, stage, y)
    }

    fn at_time(&self, t: T, j: usize, stage: i64, y: &[T]) -> Vec<T> {
        if t <= T::zero() {
            return (self.history)(t);
        }
        let tj = T::from_usize(j).unwrap() * self.dt;
        if t > tj {
            // inside the step being computed: chord from x_j to the stage value
            let w = (t - tj) / (self.time(stage) - tj);
            let xj = &self.states[j];
            return (0..self.n).map(|r| xj[r] + w * (y[r] - xj[r])).collect();
        }
        let u = t / self.dt;
        let i = (u.floor().to_f64_lossy() as usize).min(j.saturating_sub(1));
        self.hermite(i, u - T::from_usize(i).unwrap())
    }

    /// Right-hand side of mode `k` with the stage at half-step position
    /// `stage` (in `2j ..= 2j + 2`) holding value `y`.
    fn rhs(&self, k: usize, j: usize, stage: i64, y: &[T]) -> Vec<T> {
        let mode = &self.modes[k];
        let mut out = mode.a0.mul_vec(y).expect("dimensions checked");
        let mut add = |m: &Matrix<T>, x: &[T]| {
            for (o, v) in out
                .iter_mut()
                .zip(m.mul_vec(x).expect("dimensions checked"))
            {
                *o += v;
            }
        };
        for (m, a) in &mode.jumps {
            add(a, &self.at_half_steps(stage - 2 * *m as i64, j, stage, y));
        }
        for (offset, w) in &mode.nodes[(stage % 2) as usize] {
            let x = match *offset {
                Offset::HalfSteps(q) => self.at_half_steps(stage - q as i64, j, stage, y),
                Offset::Theta(theta) => self.at_time(self.time(stage) + theta, j, stage, y),
            };
            add(w, &x);
        }
        out
    }
}

fn axpy<T: Scalar>(x: &[T], a: T, d: &[T]) -> Vec<T> {
    x.iter().zip(d).map(|(&x, &d)| x + a * d).collect()
}

/// Integrates `sys` on `[0, horizon]` with step `dt`.
///
/// Every discrete delay and every periodic duration must be a multiple of
/// `dt`. Blow-up is reported through [`Trajectory::diverged`], not an error.
pub fn simulate<T: Scalar, H: Fn(T) -> Vec<T>>(
    sys: &SwitchedDelaySystem<T>,
    history: &H,
    signal: &SwitchingSignal<T>,
    horizon: T,
    dt: T,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::StepMismatch(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(horizon >= dt) || !horizon.is_finite() {
        return Err(Error::StepMismatch(format!(
            "horizon {horizon} shorter than dt = {dt}"
        )));
    }
    let steps = (horizon / dt + T::lit(GRID_TOL)).floor().to_f64_lossy() as usize;
    let n = sys.dim();
    let modes = sys
        .subsystems()
        .iter()
        .map(|s| {
            let jumps = s
                .discrete()
                .iter()
                .map(|d| Ok((grid_steps(d.delay, dt, "delay")?, d.matrix.clone())))
                .collect::<Result<Vec<_>>>()?;
            let nodes = match s.kernel() {
                Some(b) => [kernel_nodes(b, dt, false), kernel_nodes(b, dt, true)],
                None => [Vec::new(), Vec::new()],
            };
            Ok(Mode {
                a0: s.a0().clone(),
                jumps,
                nodes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let active = signal.sample(sys.len(), dt, steps)?;

    let history_norm = history_norm(sys, history, dt)?;
    let x0 = history(T::zero());
    let limit = T::lit(DIVERGENCE_FACTOR) * history_norm;
    let mut solver = Solver {
        n,
        dt,
        history,
        modes,
        states: vec![x0],
        derivs: Vec::with_capacity(steps),
    };
    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let mut diverged = false;
    // derivative at the end of the previous interval, reusable when the mode
    // does not change
    let mut carry: Option<(usize, Vec<T>)> = None;
    for j in 0..steps {
        let k = active[j];
        let x = solver.states[j].clone();
        let p = 2 * j as i64;
        let k1 = match carry.take() {
            Some((prev, d)) if prev == k => d,
            _ => solver.rhs(k, j, p, &x),
        };
        let k2 = solver.rhs(k, j, p + 1, &axpy(&x, half, &k1));
        let k3 = solver.rhs(k, j, p + 1, &axpy(&x, half, &k2));
        let k4 = solver.rhs(k, j, p + 2, &axpy(&x, dt, &k3));
        let next: Vec<T> = (0..n)
            .map(|r| x[r] + sixth * (k1[r] + T::lit(2.0) * (k2[r] + k3[r]) + k4[r]))
            .collect();
        let norm = vec_inf_norm(&next);
        if !norm.is_finite() || norm > limit {
            diverged = true;
            break;
        }
        let end = solver.rhs(k, j, p + 2, &next);
        solver.states.push(next);
        solver.derivs.push((k1, end.clone()));
        carry = Some((k, end));
    }
    let len = solver.states.len();
    Ok(Trajectory {
        dt,
        times: (0..len).map(|j| T::from_usize(j).unwrap() * dt).collect(),
        states: solver.states,
        active: active[..len].to_vec(),
        diverged,
        history_norm,
    })
}

/// `sup |φ(θ)|` sampled on the step grid of `[-h, 0]` and the kernel grids.
fn history_norm<T: Scalar, H: Fn(T) -> Vec<T>>(
    sys: &SwitchedDelaySystem<T>,
    history: &H,
    dt: T,
) -> Result<T> {
    let n = sys.dim();
    let mut thetas = Vec::new();
    let mut m = 0usize;
    loop {
        let theta = -T::from_usize(m).unwrap() * dt;
        if theta < -sys.h() {
            break;
        }
        thetas.push(theta);
        m += 1;
    }
    thetas.push(-sys.h());
    for s in sys.subsystems() {
        if let Some(b) = s.kernel() {
            thetas.extend_from_slice(b.grid());
        }
    }
    let mut norm = T::zero();
    for theta in thetas {
        let v = history(theta);
        if v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "history returned {} components, system has {n}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "history is not finite at {theta}"
            )));
        }
        norm = norm.max(vec_inf_norm(&v));
    }
    Ok(norm)
}

/// `|x_i(t)| <= M e^{-αt} ξ_i / ‖ξ‖ · history_norm` at every grid point,
/// with relative slack [`ENVELOPE_SLACK`].
pub fn decay_envelope_check<T: Scalar>(
    traj: &Trajectory<T>,
    cert: &LclfCertificate<T>,
    history_norm: T,
) -> bool {
    let xi_norm = vec_max(&cert.xi);
    let slack = T::one() + T::lit(ENVELOPE_SLACK);
    traj.times.iter().zip(&traj.states).all(|(&t, x)| {
        let scale = cert.envelope_gain * (-cert.decay_alpha * t).exp() * history_norm * slack;
        x.iter()
            .zip(&cert.xi)
            .all(|(xi_t, &w)| xi_t.abs() <= scale * w / xi_norm)
    })
}

/// Every component stays above `-1e-9` times the running max norm.
pub fn positivity_check<T: Scalar>(traj: &Trajectory<T>) -> bool {
    let mut running = T::zero();
    let slack = T::lit(POSITIVITY_SLACK);
    traj.states.iter().all(|x| {
        running = running.max(vec_inf_norm(x));
        x.iter().all(|&v| v >= -slack * running)
    })
}

/// Writes `t,x1,...,xn,sigma` with 17 significant digits and 1-based `sigma`.
pub fn write_csv<T: Scalar, W: Write>(traj: &Trajectory<T>, mut w: W) -> io::Result<()> {
    let n = traj.states.first().map_or(0, Vec::len);
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",x{i}"));
    }
    writeln!(w, "{header},sigma")?;
    for ((t, x), k) in traj.times.iter().zip(&traj.states).zip(&traj.active) {
        write!(w, "{:.16e}", t.to_f64_lossy())?;
        for v in x {
            write!(w, ",{:.16e}", v.to_f64_lossy())?;
        }
        writeln!(w, ",{}", k + 1)?;
    }
    Ok(())
}

/// Runs `job(0..count)` on up to `workers` threads; results keep job order.
pub fn parallel_map<R, F>(count: usize, workers: usize, job: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = workers.clamp(1, count.max(1));
    if workers == 1 {
        return (0..count).map(job).collect();
    }
    let mut slots: Vec<Option<R>> = (0..count).map(|_| None).collect();
    let chunk = count.div_ceil(workers);
    std::thread::scope(|scope| {
        for (c, slot) in slots.chunks_mut(chunk).enumerate() {
            let job = &job;
            scope.spawn(move || {
                for (i, s) in slot.iter_mut().enumerate() {
                    *s = Some(job(c * chunk + i));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}
