//! Deterministic random test data.
//!
//! Instance `k` of a run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(instance_seed(s, k))`, so its data does not
//! depend on how many instances the run has.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{self, GridError, SampledFunction, TorusGrid};
use crate::kernels::{bump_profile, Smoothness};

use super::config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(
        "bandlimit {bandlimit} with sum |theta_i| = {theta_sum} needs 2 sum|theta| B < N/2 = {half}"
    )]
    BandwidthBudget {
        bandlimit: usize,
        theta_sum: i64,
        half: usize,
    },
    #[error("compact instances need a + max|theta| b <= L/2")]
    NoRoom,
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type Result<T> = std::result::Result<T, InstanceError>;

/// Golden-ratio increment used to spread instance seeds.
const SEED_STEP: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of instance `k`: `seed + k · 0x9E3779B97F4A7C15` (wrapping).
pub fn instance_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(SEED_STEP))
}

pub fn instance_rng(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(instance_seed(seed, k))
}

/// Checks that products of the data stay alias free: the `y`-bandwidth of
/// `Π f_i(x - θ_i y)` is `Σ|θ_i| B`, doubled by taking moduli squared.
pub fn check_budget(grid: &TorusGrid, theta_sum: i64, bandlimit: usize) -> Result<()> {
    let half = grid.axis_len() / 2;
    if 2 * theta_sum as usize * bandlimit >= half {
        return Err(InstanceError::BandwidthBudget {
            bandlimit,
            theta_sum,
            half,
        });
    }
    Ok(())
}

/// Draws a nonzero function, re-rolling (and logging) zero draws.
fn nonzero<R: Rng>(
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Result<SampledFunction>,
) -> Result<SampledFunction> {
    loop {
        let f = draw(rng)?;
        if f.max_abs() > 0.0 {
            return Ok(f);
        }
        log::warn!("zero function drawn; re-rolling");
    }
}

/// `m` random trigonometric polynomials with every frequency in `[-B, B]^d`.
pub fn generate_instance(config: &ExperimentConfig, k: usize) -> Result<Vec<SampledFunction>> {
    let theta_sum: i64 = config.theta.entries().iter().map(|t| t.abs()).sum();
    check_budget(&config.grid, theta_sum, config.bandlimit)?;
    let mut rng = instance_rng(config.seed, k);
    (0..config.theta.m())
        .map(|_| {
            nonzero(&mut rng, |r| {
                Ok(grid::random_trig_poly(
                    config.grid,
                    config.bandlimit,
                    None,
                    r,
                )?)
            })
        })
        .collect()
}

/// Data for Young checks: functions on `R^d` embedded in the torus with
/// supports small enough that no `x - θ_i y` wraps around.
#[derive(Clone, Debug)]
pub struct CompactInstance {
    pub fs: Vec<SampledFunction>,
    pub g: SampledFunction,
}

/// Window radii `(a, b)` for `f_i` and `g`: `a = b = 0.95 L / (2 (1 + max|θ|))`,
/// which gives `a + max|θ| b < L/2`.
pub fn compact_radii(grid: &TorusGrid, theta_max: i64) -> (f64, f64) {
    let b = 0.95 * grid.period() as f64 / (2.0 * (1.0 + theta_max as f64));
    (b, b)
}

/// Random trig polynomial times a smooth bump window of the given radius at the origin.
pub fn windowed_poly<R: Rng>(
    grid: TorusGrid,
    radius: f64,
    bandlimit: usize,
    rng: &mut R,
) -> Result<SampledFunction> {
    let poly = grid::random_trig_poly(grid, bandlimit, None, rng)?;
    let window = SampledFunction::from_centered_fn(grid, |y| {
        let t2: f64 = y.iter().map(|v| (v / radius).powi(2)).sum();
        Complex64::new(bump_profile(t2, Smoothness::Infinite), 0.0)
    });
    Ok(poly.mul(&window)?.with_bandlimit(None))
}

pub fn generate_compact_instance(config: &ExperimentConfig, k: usize) -> Result<CompactInstance> {
    let (a, b) = compact_radii(&config.grid, config.theta.max_abs());
    if a + config.theta.max_abs() as f64 * b > config.grid.period() as f64 / 2.0 {
        return Err(InstanceError::NoRoom);
    }
    let mut rng = instance_rng(config.seed, k);
    let fs = (0..config.theta.m())
        .map(|_| {
            nonzero(&mut rng, |r| {
                windowed_poly(config.grid, a, config.bandlimit, r)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let g = nonzero(&mut rng, |r| {
        windowed_poly(config.grid, b, config.bandlimit, r)
    })?;
    Ok(CompactInstance { fs, g })
}
