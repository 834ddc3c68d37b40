//! Derivative-free search for inputs with a large inequality ratio.
//!
//! Each function of the family is a Gaussian bump with a two-term spectrum,
//! `exp(-|x - c|²/2w²) (1 + e^{2πi(φ + x_1)})`, parameterized by its center
//! `c`, width `w` and phase `φ`. The search alternates random restarts with
//! coordinate moves of shrinking step. Its evaluation sequence does not
//! depend on the budget, which only decides where it stops; a larger budget
//! therefore sees a superset of the evaluations of a smaller one.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convolve;
use crate::grid::{SampledFunction, TorusGrid};
use crate::kernels::{bump_profile, sample_kernel, SampledKernel, Smoothness};
use crate::sqfn;

use super::config::ExperimentConfig;
use super::instance::compact_radii;
use super::HarnessError;

/// Step halvings without improvement before a restart.
const HALVINGS_PER_RESTART: usize = 3;

/// RNG stream reserved for the search.
const SEARCH_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Theorem1,
    Young,
}

impl FromStr for Objective {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "theorem1" => Ok(Objective::Theorem1),
            "young" => Ok(Objective::Young),
            other => Err(HarnessError::UnknownObjective(other.to_string())),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Theorem1 => "theorem1",
            Objective::Young => "young",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchTrace {
    pub objective: Objective,
    pub best_ratio: f64,
    pub best_params: Vec<f64>,
    /// Best ratio after each evaluation; nondecreasing.
    pub curve: Vec<f64>,
    pub evaluations: usize,
}

/// Parameter box `[lo, hi]` per coordinate.
struct Family {
    grid: TorusGrid,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Window radius per function for compact families.
    windows: Vec<Option<f64>>,
}

impl Family {
    fn per_function(d: usize) -> usize {
        d + 2
    }

    fn new(grid: TorusGrid, count: usize, window: impl Fn(usize) -> Option<f64>) -> Self {
        let d = grid.dim();
        let l = grid.period() as f64;
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut windows = Vec::new();
        for i in 0..count {
            let w = window(i);
            let (c_lo, c_hi, w_hi) = match w {
                Some(a) => (-a / 2.0, a / 2.0, a),
                None => (0.0, l, l / 4.0),
            };
            for _ in 0..d {
                lo.push(c_lo);
                hi.push(c_hi);
            }
            lo.push(0.05);
            hi.push(w_hi);
            lo.push(0.0);
            hi.push(1.0);
            windows.push(w);
        }
        Family {
            grid,
            lo,
            hi,
            windows,
        }
    }

    fn functions(&self, params: &[f64]) -> Vec<SampledFunction> {
        let d = self.grid.dim();
        let l = self.grid.period() as f64;
        params
            .chunks(Self::per_function(d))
            .zip(&self.windows)
            .map(|(p, window)| {
                let (center, width, phase) = (&p[..d], p[d], p[d + 1]);
                let eval = |x: &[f64]| {
                    let mut r2 = 0.0;
                    for a in 0..d {
                        let mut dx = x[a] - center[a];
                        if window.is_none() {
                            // torus distance
                            dx -= l * (dx / l).round();
                        }
                        r2 += dx * dx;
                    }
                    let win = match window {
                        Some(a) => bump_profile(
                            x.iter().map(|v| (v / a).powi(2)).sum(),
                            Smoothness::Infinite,
                        ),
                        None => 1.0,
                    };
                    let wave = Complex64::new(1.0, 0.0)
                        + Complex64::from_polar(1.0, 2.0 * PI * (phase + x[0]));
                    wave * (win * (-r2 / (2.0 * width * width)).exp())
                };
                if window.is_some() {
                    SampledFunction::from_centered_fn(self.grid, eval)
                } else {
                    SampledFunction::from_fn(self.grid, eval)
                }
            })
            .collect()
    }
}

enum Evaluator<'a> {
    Theorem1 {
        kernel: SampledKernel,
        config: &'a ExperimentConfig,
    },
    Young {
        config: &'a ExperimentConfig,
    },
}

impl Evaluator<'_> {
    fn ratio(&self, fs: &[SampledFunction]) -> Result<f64, HarnessError> {
        match self {
            Evaluator::Theorem1 { kernel, config } => {
                let refs: Vec<&SampledFunction> = fs.iter().collect();
                Ok(sqfn::theorem1_ratio(&refs, kernel, &config.theta, &config.theorem1)?.ratio)
            }
            Evaluator::Young { config } => {
                let (g, rest) = fs.split_last().expect("g is last");
                let refs: Vec<&SampledFunction> = rest.iter().collect();
                let res = convolve::young_check(
                    &refs,
                    g,
                    &config.theta,
                    &config.young,
                    config.r,
                    config.tolerances.inequality_slack,
                )?;
                Ok(res.ratio)
            }
        }
    }
}

pub fn ratio_search(
    config: &ExperimentConfig,
    objective: Objective,
    budget: usize,
) -> Result<SearchTrace, HarnessError> {
    let budget = budget.max(1);
    let m = config.theta.m();
    let (family, evaluator) = match objective {
        Objective::Theorem1 => (
            Family::new(config.grid, m, |_| None),
            Evaluator::Theorem1 {
                kernel: sample_kernel(&config.kernel, config.grid)?,
                config,
            },
        ),
        Objective::Young => {
            let (a, b) = compact_radii(&config.grid, config.theta.max_abs());
            (
                Family::new(config.grid, m + 1, |i| Some(if i < m { a } else { b })),
                Evaluator::Young { config },
            )
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(SEARCH_STREAM);

    let dims = family.lo.len();
    let mut best_ratio = f64::NEG_INFINITY;
    let mut best_params = Vec::new();
    let mut curve = Vec::with_capacity(budget);
    let mut evaluate = |params: &[f64], curve: &mut Vec<f64>| -> Result<f64, HarnessError> {
        let r = evaluator.ratio(&family.functions(params))?;
        if r > best_ratio {
            best_ratio = r;
            best_params = params.to_vec();
        }
        curve.push(best_ratio);
        Ok(r)
    };

    'restarts: while curve.len() < budget {
        let mut x: Vec<f64> = (0..dims)
            .map(|i| rng.gen_range(family.lo[i]..=family.hi[i]))
            .collect();
        let mut current = evaluate(&x, &mut curve)?;
        let mut step: Vec<f64> = (0..dims)
            .map(|i| 0.25 * (family.hi[i] - family.lo[i]))
            .collect();
        let mut halvings = 0;
        while halvings < HALVINGS_PER_RESTART {
            let mut improved = false;
            'coords: for i in 0..dims {
                for sign in [1.0, -1.0] {
                    if curve.len() >= budget {
                        break 'restarts;
                    }
                    let mut y = x.clone();
                    y[i] = (y[i] + sign * step[i]).clamp(family.lo[i], family.hi[i]);
                    if y[i] == x[i] {
                        continue;
                    }
                    let r = evaluate(&y, &mut curve)?;
                    if r > current {
                        current = r;
                        x = y;
                        improved = true;
                        break 'coords;
                    }
                }
            }
            if !improved {
                step.iter_mut().for_each(|s| *s /= 2.0);
                halvings += 1;
            }
        }
    }

    Ok(SearchTrace {
        objective,
        best_ratio,
        best_params,
        evaluations: curve.len(),
        curve,
    })
}
