//! Fixtures, random generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use swdelay::cli::model::{parse_json, DisturbanceFile, Model, SystemFile};
use swdelay::{
    DelaySubsystem, DiscreteDelay, DistributedKernel, Disturbance, Matrix, SwitchedDelaySystem,
};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load_model(name: &str) -> Model {
    SystemFile::read(&fixture_path(name))
        .unwrap()
        .to_model()
        .unwrap()
}

pub fn ex1_big(model: &Model) -> Disturbance {
    let text = std::fs::read_to_string(fixture_path("ex1_big.json")).unwrap();
    let file: DisturbanceFile = parse_json(&text).unwrap();
    file.to_disturbance(model.structure.as_ref().unwrap())
        .unwrap()
}

pub fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.unit() * n as f64) as usize
    }
}

/// Random Metzler matrix: off-diagonal in `[0, off]`, diagonal in `[lo, hi]`.
pub fn random_metzler(rng: &mut Rng, n: usize, off: f64, lo: f64, hi: f64) -> Matrix {
    let data = (0..n * n)
        .map(|i| {
            if i / n == i % n {
                rng.range(lo, hi)
            } else {
                rng.range(0.0, off)
            }
        })
        .collect();
    Matrix::new(n, n, data).unwrap()
}

pub fn random_nonnegative(rng: &mut Rng, n: usize, scale: f64) -> Matrix {
    Matrix::new(n, n, (0..n * n).map(|_| rng.range(0.0, scale)).collect()).unwrap()
}

/// Positive switched system with `h = 1`, delays at 0.5 and 1 and, when
/// `kernel` is set, a piecewise-linear nonnegative kernel on `[-1, 0]`.
pub fn random_positive_system(
    rng: &mut Rng,
    n: usize,
    modes: usize,
    kernel: bool,
) -> SwitchedDelaySystem {
    let subs = (0..modes)
        .map(|_| {
            let a0 = random_metzler(rng, n, 0.6, -(n as f64) - 2.0, -1.0);
            let discrete = vec![
                DiscreteDelay {
                    delay: 0.5,
                    matrix: random_nonnegative(rng, n, 0.4),
                },
                DiscreteDelay {
                    delay: 1.0,
                    matrix: random_nonnegative(rng, n, 0.4),
                },
            ];
            let b = kernel.then(|| {
                DistributedKernel::new(
                    vec![-1.0, -0.3, 0.0],
                    (0..3).map(|_| random_nonnegative(rng, n, 0.3)).collect(),
                )
                .unwrap()
            });
            DelaySubsystem::new(a0, discrete, b).unwrap()
        })
        .collect();
    SwitchedDelaySystem::new(1.0, subs).unwrap()
}

/// Spectral abscissa of a Metzler matrix from the Gelfand formula applied to
/// the nonnegative shift `A + cI`, using normalized repeated squaring.
pub fn metzler_abscissa(a: &Matrix) -> f64 {
    let n = a.rows();
    let c = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max) + 1.0;
    let mut b = a.try_add(&Matrix::identity(n).scale(c)).unwrap();
    let norm = b.inf_norm();
    if norm == 0.0 {
        return -c;
    }
    b = b.scale(1.0 / norm);
    let mut log = norm.ln();
    let squarings = 48;
    for _ in 0..squarings {
        b = b.try_mul(&b).unwrap();
        let s = b.inf_norm();
        if s == 0.0 {
            return -c;
        }
        b = b.scale(1.0 / s);
        log = 2.0 * log + s.ln();
    }
    (log / 2f64.powi(squarings)).exp() - c
}

/// Exact optimum of `max t` s.t. `E_k ξ + t1 <= 0`, `0 <= ξ <= 1` for n = 2.
///
/// For `t > 0` the optimum sits on `max ξ = 1`, where `t(ξ)` is a concave
/// piecewise-linear function of one parameter; its maximum is at an endpoint
/// or a crossing of two of its linear pieces.
pub fn lp_oracle_n2(envs: &[Matrix]) -> f64 {
    // pieces as functions of s for ξ = (1, s) and ξ = (s, 1)
    let mut best = 0.0_f64;
    for orient in 0..2 {
        let lines: Vec<(f64, f64)> = envs
            .iter()
            .flat_map(|e| {
                (0..2).map(move |i| {
                    let (a, b) = (e[(i, 0)], e[(i, 1)]);
                    // -(a ξ1 + b ξ2)
                    if orient == 0 {
                        (-a, -b)
                    } else {
                        (-b, -a)
                    }
                })
            })
            .collect();
        let t_at = |s: f64| {
            lines
                .iter()
                .map(|(c, d)| c + d * s)
                .fold(f64::INFINITY, f64::min)
        };
        let mut cands = vec![0.0, 1.0];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let dd = lines[i].1 - lines[j].1;
                if dd != 0.0 {
                    let s = (lines[j].0 - lines[i].0) / dd;
                    if (0.0..=1.0).contains(&s) {
                        cands.push(s);
                    }
                }
            }
        }
        for s in cands {
            best = best.max(t_at(s));
        }
    }
    best
}

/// Root of `λ + e^{-λ} = 0` with positive imaginary part on the principal
/// branch; `Re e^{λt}` solves `x' = -x(t-1)` for all t.
pub fn delay_root() -> Complex64 {
    let mut z = Complex64::new(-0.3, 1.3);
    for _ in 0..50 {
        let f = z + (-z).exp();
        let df = Complex64::new(1.0, 0.0) - (-z).exp();
        z -= f / df;
    }
    z
}

pub fn exp_solution(lambda: Complex64, t: f64) -> f64 {
    (lambda * t).exp().re
}
