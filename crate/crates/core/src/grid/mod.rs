//! Complex-valued functions sampled on the uniform torus `[0, L)^d`.
//!
//! The torus has integer period `L` and a dyadic number `n` of samples per
//! unit length, so unit cubes `u + [0,1)^d` are exact blocks of `n^d`
//! samples. All integrals are rectangle-rule sums with weight `h^d`.

mod io;

pub use io::{read_binary, write_binary, write_csv};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::Exponent;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("exponent {0} is not admissible here")]
    BadExponent(Exponent),
    #[error("frequency {freq:?} exceeds the alias-free limit {limit}")]
    Aliasing { freq: Vec<i64>, limit: i64 },
    #[error("expected a {expected}-dimensional vector, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dilation factor must be a nonzero integer")]
    ZeroDilation,
    #[error("malformed function file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GridError>;

/// Uniform lattice on the torus `[0, L)^d` with `n` points per unit length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    period: usize,
    points_per_unit: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, period: usize, points_per_unit: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GridError::InvalidGrid("dimension must be positive".into()));
        }
        if period < 2 {
            return Err(GridError::InvalidGrid(format!(
                "period L = {period} must be >= 2"
            )));
        }
        if !points_per_unit.is_power_of_two() {
            return Err(GridError::InvalidGrid(format!(
                "points per unit n = {points_per_unit} must be a power of two"
            )));
        }
        let n_axis = period * points_per_unit;
        if n_axis.checked_pow(dim as u32).is_none() {
            return Err(GridError::InvalidGrid("grid too large".into()));
        }
        Ok(TorusGrid {
            dim,
            period,
            points_per_unit,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Torus side length `L`.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Samples per unit length `n`.
    pub fn points_per_unit(&self) -> usize {
        self.points_per_unit
    }

    /// Samples per axis `N = L n`.
    pub fn axis_len(&self) -> usize {
        self.period * self.points_per_unit
    }

    pub fn len(&self) -> usize {
        self.axis_len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample spacing `h = 1/n`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.points_per_unit as f64
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Torus volume `L^d`.
    pub fn volume(&self) -> f64 {
        (self.period as f64).powi(self.dim as i32)
    }

    /// Number of unit cubes `L^d`.
    pub fn cube_count(&self) -> usize {
        self.period.pow(self.dim as u32)
    }

    /// Row-major lattice coordinates of a flat index (last axis fastest).
    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let n = self.axis_len();
        let mut c = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            c[a] = index % n;
            index /= n;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        let n = self.axis_len();
        coords.iter().fold(0, |acc, &c| acc * n + c % n)
    }

    /// Point `x_k = k h` in `[0, L)^d`.
    pub fn point(&self, index: usize) -> Vec<f64> {
        let h = self.spacing();
        self.coords(index)
            .into_iter()
            .map(|c| c as f64 * h)
            .collect()
    }

    /// Point represented in `[-L/2, L/2)^d`, the fundamental domain used for
    /// functions that live near the origin.
    pub fn centered_point(&self, index: usize) -> Vec<f64> {
        let n = self.axis_len();
        let h = self.spacing();
        self.coords(index)
            .into_iter()
            .map(|c| centered(c, n) as f64 * h)
            .collect()
    }

    /// Index of the unit cube containing a sample, in row-major order over `L^d` cubes.
    pub fn cube_of(&self, index: usize) -> usize {
        let n = self.points_per_unit;
        self.coords(index)
            .into_iter()
            .fold(0, |acc, c| acc * self.period + c / n)
    }

    /// Cube coordinates lifted to `[-L/2, L/2)^d`.
    pub fn cube_lifted(&self, cube: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.dim];
        let mut rest = cube;
        for a in (0..self.dim).rev() {
            c[a] = centered(rest % self.period, self.period);
            rest /= self.period;
        }
        c
    }

    /// Maps an integer vector to its cube index modulo `L`.
    pub fn cube_index(&self, u: &[i64]) -> usize {
        let l = self.period as i64;
        u.iter().fold(0usize, |acc, &c| {
            acc * self.period + c.rem_euclid(l) as usize
        })
    }

    pub fn check_dim(&self, v: &[i64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(GridError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// Representative of `c mod n` in `[-n/2, n/2)`.
pub(crate) fn centered(c: usize, n: usize) -> i64 {
    let c = c as i64;
    let n = n as i64;
    if c >= n - n / 2 {
        c - n
    } else {
        c
    }
}

/// Samples of a complex function on a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: TorusGrid,
    values: Vec<Complex64>,
    bandlimit: Option<usize>,
}

impl SampledFunction {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(SampledFunction {
            grid,
            values,
            bandlimit: None,
        })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: TorusGrid, c: Complex64) -> Self {
        SampledFunction {
            grid,
            values: vec![c; grid.len()],
            bandlimit: Some(0),
        }
    }

    /// Samples `f(x_k)` with `x_k ∈ [0, L)^d`.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        SampledFunction {
            grid,
            values,
            bandlimit: None,
        }
    }

    /// Samples `f` at the representative of each point in `[-L/2, L/2)^d`.
    pub fn from_centered_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|k| f(&grid.centered_point(k)))
            .collect();
        SampledFunction {
            grid,
            values,
            bandlimit: None,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Largest frequency index `|k|` per axis present, when known.
    pub fn bandlimit(&self) -> Option<usize> {
        self.bandlimit
    }

    pub fn with_bandlimit(mut self, b: Option<usize>) -> Self {
        self.bandlimit = b;
        self
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            bandlimit: None,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.map(|v| v * c);
        out.bandlimit = self.bandlimit;
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.map(|v| v.conj());
        out.bandlimit = self.bandlimit;
        out
    }

    /// `|f|` as a complex-valued function.
    pub fn modulus(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(SampledFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            bandlimit: None,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a + b)?;
        out.bandlimit = match (self.bandlimit, other.bandlimit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a * b)?;
        out.bandlimit = match (self.bandlimit, other.bandlimit) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Rectangle-rule `L^p` norm over one period, or the sample maximum for `p = inf`.
pub fn lp_norm(f: &SampledFunction, p: Exponent) -> Result<f64> {
    if !p.is_at_least_one() {
        return Err(GridError::BadExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    Ok(lp_norm_f64(f.values(), f.grid.cell_volume(), p.to_f64()))
}

/// `(w Σ |v|^p)^{1/p}` for a real `p > 0`.
pub(crate) fn lp_norm_f64(values: &[Complex64], weight: f64, p: f64) -> f64 {
    if p == 2.0 {
        return (weight * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    }
    let s: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    (weight * s).powf(1.0 / p)
}

/// Weak `L^p` quasinorm `sup_α α |{|f| > α}|^{1/p}`.
///
/// The distribution function of a sampled function is a step function, so
/// the supremum is attained as `α` increases to one of the sample moduli:
/// with moduli sorted `m_1 >= m_2 >= ...` it equals `max_k m_k (k h^d)^{1/p}`.
pub fn weak_lp_norm(f: &SampledFunction, p: Exponent) -> Result<f64> {
    if p.is_infinite() || !p.is_at_least_one() {
        return Err(GridError::BadExponent(p));
    }
    let mut mags: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let w = f.grid.cell_volume();
    let inv_p = 1.0 / p.to_f64();
    Ok(mags
        .iter()
        .enumerate()
        .map(|(k, &m)| m * ((k + 1) as f64 * w).powf(inv_p))
        .fold(0.0, f64::max))
}

/// `|{x : |f(x)| > s}|` by sample counting.
pub fn distribution_function(f: &SampledFunction, s: f64) -> f64 {
    let count = f.values.iter().filter(|v| v.norm() > s).count();
    count as f64 * f.grid.cell_volume()
}

/// Table of `e^{2πi k/N}` for `k = 0..N`.
pub(crate) fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Samples `x ↦ Σ c_k e^{2πi k·x/L}`; keys are integer frequency indices `k`,
/// i.e. frequencies `ξ = k/L`.
///
/// Frequencies must satisfy `|k_a| <= N/2 - 1` on every axis.
pub fn make_trig_poly(
    grid: TorusGrid,
    coefficients: &BTreeMap<Vec<i64>, Complex64>,
) -> Result<SampledFunction> {
    let n = grid.axis_len();
    let limit = n as i64 / 2 - 1;
    let mut band = 0usize;
    for k in coefficients.keys() {
        grid.check_dim(k)?;
        if k.iter().any(|c| c.abs() > limit) {
            return Err(GridError::Aliasing {
                freq: k.clone(),
                limit,
            });
        }
        band = band.max(
            k.iter()
                .map(|c| c.unsigned_abs() as usize)
                .max()
                .unwrap_or(0),
        );
    }
    let roots = roots_of_unity(n);
    let terms: Vec<(Vec<usize>, Complex64)> = coefficients
        .iter()
        .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
        .map(|(k, &c)| {
            (
                k.iter().map(|&v| v.rem_euclid(n as i64) as usize).collect(),
                c,
            )
        })
        .collect();
    let values = (0..grid.len())
        .map(|idx| {
            let x = grid.coords(idx);
            terms
                .iter()
                .map(|(k, c)| {
                    // phase index Σ k_a x_a mod N, exact in integers
                    let ph = k
                        .iter()
                        .zip(&x)
                        .fold(0usize, |acc, (&ka, &xa)| (acc + ka * xa) % n);
                    c * roots[ph]
                })
                .sum()
        })
        .collect();
    Ok(SampledFunction {
        grid,
        values,
        bandlimit: Some(band),
    })
}

/// Random trigonometric polynomial with frequencies in `[-B, B]^d`.
///
/// `terms` frequencies are drawn uniformly from the box (repeats accumulate);
/// `None` fills the whole box. Coefficients are uniform in the unit square.
pub fn random_trig_poly<R: Rng + ?Sized>(
    grid: TorusGrid,
    bandlimit: usize,
    terms: Option<usize>,
    rng: &mut R,
) -> Result<SampledFunction> {
    let b = bandlimit as i64;
    let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
    let draw = |rng: &mut R| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    match terms {
        None => {
            let side = (2 * b + 1) as usize;
            for flat in 0..side.pow(grid.dim() as u32) {
                let mut k = vec![0i64; grid.dim()];
                let mut rest = flat;
                for a in (0..grid.dim()).rev() {
                    k[a] = (rest % side) as i64 - b;
                    rest /= side;
                }
                coeffs.insert(k, draw(rng));
            }
        }
        Some(t) => {
            for _ in 0..t {
                let k: Vec<i64> = (0..grid.dim()).map(|_| rng.gen_range(-b..=b)).collect();
                let c = draw(rng);
                *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
    }
    let f = make_trig_poly(grid, &coeffs)?;
    Ok(f.with_bandlimit(Some(bandlimit)))
}

/// `x ↦ f(x - s h)` for a lattice shift `s` (in samples).
pub fn translate(f: &SampledFunction, shift: &[i64]) -> Result<SampledFunction> {
    let grid = f.grid;
    grid.check_dim(shift)?;
    let n = grid.axis_len() as i64;
    let values = (0..grid.len())
        .map(|idx| {
            let src: Vec<usize> = grid
                .coords(idx)
                .iter()
                .zip(shift)
                .map(|(&c, &s)| (c as i64 - s).rem_euclid(n) as usize)
                .collect();
            f.values[grid.index(&src)]
        })
        .collect();
    Ok(SampledFunction {
        grid,
        values,
        bandlimit: f.bandlimit,
    })
}

/// `x ↦ f(θ x)` with torus wraparound, for a nonzero integer `θ`.
pub fn scale_arg(f: &SampledFunction, theta: i64) -> Result<SampledFunction> {
    if theta == 0 {
        return Err(GridError::ZeroDilation);
    }
    let grid = f.grid;
    let n = grid.axis_len() as i64;
    let values = (0..grid.len())
        .map(|idx| {
            let src: Vec<usize> = grid
                .coords(idx)
                .iter()
                .map(|&c| (c as i64 * theta).rem_euclid(n) as usize)
                .collect();
            f.values[grid.index(&src)]
        })
        .collect();
    let bandlimit = f.bandlimit.map(|b| b * theta.unsigned_abs() as usize);
    Ok(SampledFunction {
        grid,
        values,
        bandlimit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(1, 4, 32).is_ok());
        assert!(TorusGrid::new(0, 4, 32).is_err());
        assert!(TorusGrid::new(1, 1, 32).is_err());
        assert!(TorusGrid::new(1, 4, 24).is_err());
        let g = TorusGrid::new(2, 3, 4).unwrap();
        assert_eq!(g.axis_len(), 12);
        assert_eq!(g.len(), 144);
        for k in [0, 5, 143, 77] {
            assert_eq!(g.index(&g.coords(k)), k);
        }
        assert_eq!(g.cube_count(), 9);
    }

    #[test]
    fn centered_representatives() {
        assert_eq!(centered(0, 8), 0);
        assert_eq!(centered(3, 8), 3);
        assert_eq!(centered(4, 8), -4);
        assert_eq!(centered(7, 8), -1);
        assert_eq!(centered(1, 3), 1);
        assert_eq!(centered(2, 3), -1);
        let g = TorusGrid::new(1, 4, 2).unwrap();
        let lifted: Vec<i64> = (0..4).map(|u| g.cube_lifted(u)[0]).collect();
        assert_eq!(lifted, vec![0, 1, -2, -1]);
        assert_eq!(g.cube_index(&[-1]), 3);
    }

    #[test]
    fn lp_norm_examples() {
        let g = TorusGrid::new(1, 4, 16).unwrap();
        let one = SampledFunction::constant(g, c(1.0));
        assert!((lp_norm(&one, e("2")).unwrap() - 2.0).abs() < 1e-15);
        let ind = SampledFunction::from_fn(g, |x| c(if x[0] < 1.0 { 1.0 } else { 0.0 }));
        for p in ["1", "3/2", "2", "7"] {
            assert!((lp_norm(&ind, e(p)).unwrap() - 1.0).abs() < 1e-14);
        }
        assert_eq!(lp_norm(&ind, Exponent::INFINITY).unwrap(), 1.0);
        assert!(lp_norm(&ind, e("1/2")).is_err());
    }

    #[test]
    fn parseval_for_trig_polys() {
        // ‖f‖_2^2 = L^d Σ |c_k|^2 when 2B < N
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 2] {
            let g = TorusGrid::new(d, 4, 8).unwrap();
            let mut coeffs = BTreeMap::new();
            for _ in 0..6 {
                let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-5..=5)).collect();
                coeffs.insert(
                    k,
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                );
            }
            let f = make_trig_poly(g, &coeffs).unwrap();
            let parseval = (g.volume() * coeffs.values().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
            let got = lp_norm(&f, e("2")).unwrap();
            assert!(
                (got - parseval).abs() <= 1e-12 * parseval,
                "{got} vs {parseval}"
            );
        }
    }

    #[test]
    fn weak_norm_examples() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let ind = SampledFunction::from_fn(g, |x| c(if x[0] < 2.0 { 1.0 } else { 0.0 }));
        assert!((weak_lp_norm(&ind, e("2")).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let k = SampledFunction::constant(g, c(3.0));
        assert!((weak_lp_norm(&k, e("3")).unwrap() - 3.0 * 4f64.powf(1.0 / 3.0)).abs() < 1e-13);
        assert!(weak_lp_norm(&k, Exponent::INFINITY).is_err());
    }

    #[test]
    fn weak_norm_equals_sup_over_jumps() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_trig_poly(g, 5, None, &mut rng).unwrap();
        let p = 2.5;
        // α just below each sample modulus
        let sup = f
            .values()
            .iter()
            .map(|v| {
                let a = v.norm() * (1.0 - 1e-12);
                a * distribution_function(&f, a).powf(1.0 / p)
            })
            .fold(0.0, f64::max);
        let w = weak_lp_norm(&f, e("5/2")).unwrap();
        assert!((w - sup).abs() <= 1e-9 * w);
    }

    #[test]
    fn distribution_examples() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let f = SampledFunction::from_fn(g, |x| c(1.0 + x[0]));
        assert_eq!(distribution_function(&f, 0.0), 4.0);
        assert_eq!(distribution_function(&f, f.max_abs()), 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let v = distribution_function(&f, i as f64 * 0.06);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn trig_poly_examples() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0], c(1.0));
        let f = make_trig_poly(g, &coeffs).unwrap();
        assert!(f.values().iter().all(|v| (v - c(1.0)).norm() < 1e-15));

        let z = Complex64::new(0.3, -0.7);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![3], z);
        coeffs.insert(vec![-3], z.conj());
        let f = make_trig_poly(g, &coeffs).unwrap();
        assert!(f.values().iter().all(|v| v.im.abs() < 1e-15));

        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![16], c(1.0));
        assert!(matches!(
            make_trig_poly(g, &coeffs),
            Err(GridError::Aliasing { .. })
        ));

        let a = random_trig_poly(g, 4, Some(5), &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_trig_poly(g, 4, Some(5), &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert!(a
            .values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    #[test]
    fn translate_and_scale() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_trig_poly(g, 3, None, &mut rng).unwrap();
        assert_eq!(translate(&f, &[0]).unwrap(), f);
        let back = translate(&translate(&f, &[1]).unwrap(), &[-1]).unwrap();
        assert_eq!(back, f);

        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![1], Complex64::new(0.5, 0.25));
        coeffs.insert(vec![-2], Complex64::new(-1.0, 0.0));
        let p = make_trig_poly(g, &coeffs).unwrap();
        let scaled = scale_arg(&p, 3).unwrap();
        let direct = SampledFunction::from_fn(g, |x| {
            coeffs
                .iter()
                .map(|(k, c)| {
                    c * Complex64::from_polar(1.0, 2.0 * PI * k[0] as f64 * 3.0 * x[0] / 4.0)
                })
                .sum()
        });
        assert!(scaled.max_abs_diff(&direct) < 1e-12);
        assert!(matches!(scale_arg(&p, 0), Err(GridError::ZeroDilation)));
    }
}
