//! Analytic kernels `K`, their samples on the torus, and the block-norm
//! constants `B_p = Σ_u ‖χ_{Q_u} K‖_{L^s}` over unit cubes `Q_u = u + [0,1)^d`.
//!
//! `s = p'` for `1 <= p < 2` and `s = 2` for `p >= 2`; [`b_constant`] picks
//! the exponent itself.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exponents::{self, parse_rational, Exponent, ExponentError};
use crate::grid::{self, GridError, SampledFunction, TorusGrid};

/// Samples per unit cell per axis used by [`b_constant`].
pub const DEFAULT_CUBE_RESOLUTION: usize = 1 << 12;

/// Image shells `s ∈ [-S, S]^d` summed when periodizing an unbounded kernel.
pub const PERIODIZATION_SHELLS: i64 = 4;

/// Largest relative kernel mass allowed outside the periodization cutoff.
pub const PERIODIZATION_TAIL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("unknown kernel {0:?}")]
    UnknownKernel(String),
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel support radius {radius} exceeds L/2 = {limit}")]
    SupportTooWide { radius: f64, limit: f64 },
    #[error(
        "periodization tail {tail:.3e} of the kernel mass lies beyond the cutoff of {shells} shells \
         (limit {PERIODIZATION_TAIL:.0e}); shrink the kernel or enlarge L"
    )]
    PeriodizationTail { tail: f64, shells: i64 },
    #[error("block norms in L^{exponent_used} are not summable: {reason}")]
    Divergent {
        exponent_used: Exponent,
        reason: String,
    },
    #[error("kernel is not integrable in dimension {0}")]
    NotIntegrable(usize),
    #[error("kernel has unbounded support")]
    UnboundedSupport,
    #[error("truncation radius must be >= 1")]
    BadTruncation,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    /// `(1 - t^2)^k`, which is `C^{k-1}`.
    Finite(u32),
    /// `exp(1 - 1/(1 - t^2))`.
    Infinite,
}

/// Closed-form kernel descriptors on `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    /// Indicator of `[0, a)^d`.
    CubeIndicator { side: Rational64 },
    /// Normalized Gaussian `(2πσ²)^{-d/2} e^{-|y|²/2σ²}`.
    Gaussian { sigma: f64 },
    /// Radial bump of the given radius around `(c, .., c)`, peak value 1.
    Bump {
        radius: f64,
        center: f64,
        smoothness: Smoothness,
    },
    /// `min(1, |y|^{-a})`; integrable iff `a > d`.
    PowerTail { exponent: f64 },
}

impl KernelSpec {
    pub fn cube(side: Rational64) -> Result<Self> {
        if !side.is_positive() {
            return Err(KernelError::InvalidParameter(format!(
                "cube side {side} must be positive"
            )));
        }
        Ok(KernelSpec::CubeIndicator { side })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(KernelError::InvalidParameter(format!(
                "sigma {sigma} must be positive"
            )));
        }
        Ok(KernelSpec::Gaussian { sigma })
    }

    pub fn bump(radius: f64, center: f64, smoothness: Smoothness) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0 && center.is_finite()) {
            return Err(KernelError::InvalidParameter(format!(
                "bump radius {radius} must be positive and center {center} finite"
            )));
        }
        if smoothness == Smoothness::Finite(0) {
            return Err(KernelError::InvalidParameter(
                "bump order must be >= 1".into(),
            ));
        }
        Ok(KernelSpec::Bump {
            radius,
            center,
            smoothness,
        })
    }

    /// The descriptor admits any `a > 0` so that non-summable configurations
    /// can be reported by [`b_constant`]; sampling requires `a > d`.
    pub fn power_tail(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(KernelError::InvalidParameter(format!(
                "tail exponent {exponent} must be positive"
            )));
        }
        Ok(KernelSpec::PowerTail { exponent })
    }

    /// Builds a kernel from a CLI/config name and `key=value` parameters.
    pub fn from_name_params(name: &str, params: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| params.get(k).map(String::as_str);
        let float = |k: &str, default: Option<f64>| -> Result<f64> {
            match get(k) {
                Some(v) => v.trim().parse().map_err(|_| {
                    KernelError::InvalidParameter(format!("{k} = {v:?} is not a number"))
                }),
                None => default
                    .ok_or_else(|| KernelError::InvalidParameter(format!("missing parameter {k}"))),
            }
        };
        match name.trim() {
            "cube" | "cube_indicator" => {
                let side = get("side").unwrap_or("1");
                let side = parse_rational(side).ok_or_else(|| {
                    KernelError::InvalidParameter(format!("side = {side:?} is not rational"))
                })?;
                Self::cube(side)
            }
            "gaussian" => Self::gaussian(float("sigma", None)?),
            "bump" => {
                let smoothness = match get("order").map(str::trim) {
                    None | Some("inf") => Smoothness::Infinite,
                    Some(v) => Smoothness::Finite(
                        v.parse()
                            .map_err(|_| KernelError::InvalidParameter(format!("order = {v:?}")))?,
                    ),
                };
                Self::bump(
                    float("radius", None)?,
                    float("center", Some(0.0))?,
                    smoothness,
                )
            }
            "power_tail" => Self::power_tail(float("a", None)?),
            other => Err(KernelError::UnknownKernel(other.to_string())),
        }
    }

    /// Radius of the smallest origin-centred sup-norm ball holding the support.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            KernelSpec::CubeIndicator { side } => Some(ratio_f64(side)),
            KernelSpec::Bump { radius, center, .. } => Some(center.abs() + radius),
            KernelSpec::Gaussian { .. } | KernelSpec::PowerTail { .. } => None,
        }
    }

    pub fn is_integrable(&self, d: usize) -> bool {
        match *self {
            KernelSpec::PowerTail { exponent } => exponent > d as f64,
            _ => true,
        }
    }

    pub fn evaluate(&self, y: &[f64]) -> f64 {
        match *self {
            KernelSpec::CubeIndicator { side } => {
                let a = ratio_f64(side);
                if y.iter().all(|&t| (0.0..a).contains(&t)) {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::Gaussian { sigma } => {
                let d = y.len() as i32;
                let r2: f64 = y.iter().map(|t| t * t).sum();
                (2.0 * PI * sigma * sigma).powf(-0.5 * d as f64)
                    * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            KernelSpec::Bump {
                radius,
                center,
                smoothness,
            } => {
                let t2: f64 = y.iter().map(|&t| ((t - center) / radius).powi(2)).sum();
                bump_profile(t2, smoothness)
            }
            KernelSpec::PowerTail { exponent } => {
                let r: f64 = y.iter().map(|t| t * t).sum::<f64>().sqrt();
                if r < 1.0 {
                    1.0
                } else {
                    r.powf(-exponent)
                }
            }
        }
    }

    /// Relative kernel mass outside `[-ρ, ρ]^d`, or an upper bound for it.
    fn tail_fraction(&self, d: usize, rho: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => {
                (d as f64 * libm::erfc(rho / (std::f64::consts::SQRT_2 * sigma))).min(1.0)
            }
            KernelSpec::PowerTail { exponent } => {
                let df = d as f64;
                let sphere = 2.0 * PI.powf(df / 2.0) / libm::tgamma(df / 2.0);
                let ball = PI.powf(df / 2.0) / libm::tgamma(df / 2.0 + 1.0);
                let total = ball + sphere / (exponent - df);
                let tail = sphere * rho.max(1.0).powf(df - exponent) / (exponent - df);
                (tail / total).min(1.0)
            }
            _ => 0.0,
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::CubeIndicator { side } => write!(f, "cube(side={side})"),
            KernelSpec::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            KernelSpec::Bump {
                radius,
                center,
                smoothness,
            } => match smoothness {
                Smoothness::Infinite => {
                    write!(f, "bump(radius={radius},center={center},order=inf)")
                }
                Smoothness::Finite(k) => {
                    write!(f, "bump(radius={radius},center={center},order={k})")
                }
            },
            KernelSpec::PowerTail { exponent } => write!(f, "power_tail(a={exponent})"),
        }
    }
}

/// Radial bump profile as a function of `t² = |y|²/R²`; zero for `t >= 1`.
pub fn bump_profile(t2: f64, smoothness: Smoothness) -> f64 {
    if t2 >= 1.0 {
        return 0.0;
    }
    match smoothness {
        Smoothness::Finite(k) => (1.0 - t2).powi(k as i32),
        Smoothness::Infinite => (1.0 - 1.0 / (1.0 - t2)).exp(),
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A kernel together with its samples on a torus grid.
#[derive(Clone, Debug)]
pub struct SampledKernel {
    spec: KernelSpec,
    samples: SampledFunction,
}

impl SampledKernel {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn samples(&self) -> &SampledFunction {
        &self.samples
    }

    pub fn grid(&self) -> &TorusGrid {
        self.samples.grid()
    }

    pub fn has_compact_support(&self) -> bool {
        self.spec.support_radius().is_some()
    }
}

/// Samples `K` on the torus.
///
/// Compactly supported kernels must fit in `[-L/2, L/2]^d` and are sampled
/// without overlap. Unbounded kernels are periodized over
/// [`PERIODIZATION_SHELLS`] image shells and rejected when the mass beyond
/// that cutoff exceeds [`PERIODIZATION_TAIL`].
pub fn sample_kernel(spec: &KernelSpec, grid: TorusGrid) -> Result<SampledKernel> {
    let d = grid.dim();
    if !spec.is_integrable(d) {
        return Err(KernelError::NotIntegrable(d));
    }
    let half = grid.period() as f64 / 2.0;
    let samples = match spec.support_radius() {
        Some(radius) => {
            if radius > half {
                return Err(KernelError::SupportTooWide {
                    radius,
                    limit: half,
                });
            }
            SampledFunction::from_centered_fn(grid, |y| Complex64::new(spec.evaluate(y), 0.0))
        }
        None => {
            let l = grid.period() as f64;
            let rho = (PERIODIZATION_SHELLS as f64 + 0.5) * l;
            let tail = spec.tail_fraction(d, rho);
            if tail > PERIODIZATION_TAIL {
                return Err(KernelError::PeriodizationTail {
                    tail,
                    shells: PERIODIZATION_SHELLS,
                });
            }
            let images = lattice_box(d, -PERIODIZATION_SHELLS, PERIODIZATION_SHELLS + 1);
            SampledFunction::from_centered_fn(grid, |y| {
                let mut shifted = vec![0.0; d];
                let v: f64 = images
                    .iter()
                    .map(|s| {
                        for a in 0..d {
                            shifted[a] = y[a] + s[a] as f64 * l;
                        }
                        spec.evaluate(&shifted)
                    })
                    .sum();
                Complex64::new(v, 0.0)
            })
        }
    };
    Ok(SampledKernel {
        spec: spec.clone(),
        samples,
    })
}

/// All integer vectors in `[lo, hi)^d`, lexicographic.
pub(crate) fn lattice_box(d: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let side = (hi - lo).max(0) as usize;
    (0..side.pow(d as u32))
        .map(|mut flat| {
            let mut v = vec![0; d];
            for a in (0..d).rev() {
                v[a] = lo + (flat % side) as i64;
                flat /= side;
            }
            v
        })
        .collect()
}

/// Result of [`b_constant`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BConstant {
    pub p: Exponent,
    /// `p'` for `p < 2`, otherwise 2.
    pub exponent_used: Exponent,
    pub trunc: u32,
    /// `Σ_{u ∈ [-U, U)^d} ‖χ_{Q_u} K‖_{L^s}`.
    pub value: f64,
    /// Contribution of the outermost shell `[-U,U)^d \ [-(U-1), U-1)^d`.
    pub last_shell: f64,
    /// Partial sums for truncation radii `1..=U`.
    pub partial_sums: Vec<f64>,
}

/// Norm exponent for `B_p`: `p'` when `1 <= p < 2`, else 2.
pub fn block_exponent(p: Exponent) -> Result<Exponent> {
    let two = Exponent::integer(2)?;
    if !p.is_at_least_one() {
        return Err(ExponentError::BelowOne(p).into());
    }
    Ok(if p < two { exponents::dual(p)? } else { two })
}

pub fn b_constant(spec: &KernelSpec, d: usize, p: Exponent, trunc: u32) -> Result<BConstant> {
    b_constant_with_resolution(spec, d, p, trunc, resolution_for_dim(d))
}

/// Per-axis resolution used by [`b_constant`]: [`DEFAULT_CUBE_RESOLUTION`] in
/// one dimension, coarser above so a cube costs at most about `2^18` evaluations.
pub fn resolution_for_dim(d: usize) -> usize {
    match d {
        0 | 1 => DEFAULT_CUBE_RESOLUTION,
        2 => 512,
        _ => 64,
    }
}

/// [`b_constant`] with an explicit per-axis quadrature resolution per unit cell.
pub fn b_constant_with_resolution(
    spec: &KernelSpec,
    d: usize,
    p: Exponent,
    trunc: u32,
    resolution: usize,
) -> Result<BConstant> {
    if trunc == 0 {
        return Err(KernelError::BadTruncation);
    }
    if d == 0 || resolution == 0 {
        return Err(KernelError::InvalidParameter(
            "dimension and resolution must be positive".into(),
        ));
    }
    let s = block_exponent(p)?;
    if let KernelSpec::PowerTail { exponent } = *spec {
        // far cubes have norm ~ |u|^{-a} whatever s is; Σ_u |u|^{-a} converges iff a > d
        if exponent <= d as f64 {
            return Err(KernelError::Divergent {
                exponent_used: s,
                reason: format!("cube norms decay like |u|^-{exponent} and d = {d}"),
            });
        }
    }
    let u_max = trunc as i64;
    let cubes = lattice_box(d, -u_max, u_max);
    let norms: Vec<f64> = cubes
        .par_iter()
        .map(|u| cube_block_norm(spec, u, s, resolution))
        .collect();
    let mut by_shell = vec![0.0; trunc as usize + 1];
    for (u, nrm) in cubes.iter().zip(&norms) {
        by_shell[shell_of(u) as usize] += nrm;
    }
    let mut partial_sums = Vec::with_capacity(trunc as usize);
    let mut acc = 0.0;
    for shell in &by_shell[1..] {
        acc += shell;
        partial_sums.push(acc);
    }
    Ok(BConstant {
        p,
        exponent_used: s,
        trunc,
        value: acc,
        last_shell: by_shell[trunc as usize],
        partial_sums,
    })
}

/// Smallest `k >= 1` with `u ∈ [-k, k)^d`.
fn shell_of(u: &[i64]) -> i64 {
    u.iter().map(|&c| (c + 1).max(-c)).max().unwrap_or(1).max(1)
}

/// `‖χ_{Q_u} K‖_{L^s}` on the analytic kernel.
fn cube_block_norm(spec: &KernelSpec, u: &[i64], s: Exponent, resolution: usize) -> f64 {
    if let KernelSpec::CubeIndicator { side } = *spec {
        // exact overlap volume of Q_u with [0, a)^d
        let mut vol = Rational64::one();
        for &c in u {
            let lo = Rational64::from_integer(c).max(Rational64::zero());
            let hi = Rational64::from_integer(c + 1).min(side);
            vol *= (hi - lo).max(Rational64::zero());
        }
        if vol.is_zero() {
            return 0.0;
        }
        return if s.is_infinite() {
            1.0
        } else {
            ratio_f64(vol).powf(1.0 / s.to_f64())
        };
    }
    let d = u.len();
    let m = resolution;
    let mut y = vec![0.0; d];
    if s.is_infinite() {
        // maximum over the closed cube's node lattice; the kernels here are continuous
        let side = m + 1;
        let mut best: f64 = 0.0;
        for flat in 0..side.pow(d as u32) {
            let mut rest = flat;
            for a in (0..d).rev() {
                y[a] = u[a] as f64 + (rest % side) as f64 / m as f64;
                rest /= side;
            }
            best = best.max(spec.evaluate(&y).abs());
        }
        return best;
    }
    let sf = s.to_f64();
    let mut acc = 0.0;
    for flat in 0..m.pow(d as u32) {
        let mut rest = flat;
        for a in (0..d).rev() {
            y[a] = u[a] as f64 + ((rest % m) as f64 + 0.5) / m as f64;
            rest /= m;
        }
        acc += spec.evaluate(&y).abs().powf(sf);
    }
    (acc / (m as f64).powi(d as i32)).powf(1.0 / sf)
}

/// On-grid block norms `(h^d Σ_{y ∈ Q_u} |K(y)|^s)^{1/s}`, one per torus cube.
pub fn grid_block_norms(k: &SampledFunction, s: Exponent) -> Result<Vec<f64>> {
    if !s.is_at_least_one() {
        return Err(ExponentError::BelowOne(s).into());
    }
    let g = k.grid();
    let mut acc = vec![0.0; g.cube_count()];
    let sf = s.to_f64();
    for (idx, v) in k.values().iter().enumerate() {
        let c = g.cube_of(idx);
        if s.is_infinite() {
            acc[c] = f64::max(acc[c], v.norm());
        } else if sf == 2.0 {
            acc[c] += v.norm_sqr();
        } else {
            acc[c] += v.norm().powf(sf);
        }
    }
    if !s.is_infinite() {
        let w = g.cell_volume();
        for a in &mut acc {
            *a = (w * *a).powf(1.0 / sf);
        }
    }
    Ok(acc)
}

/// Sum of [`grid_block_norms`]: the on-grid counterpart of `B`.
pub fn grid_b_constant(k: &SampledFunction, s: Exponent) -> Result<f64> {
    Ok(grid_block_norms(k, s)?.iter().sum())
}

/// `K_ℓ(x) = K(x) e^{2πi x·ℓ}` on the grid.
pub fn modulate(k: &SampledFunction, ell: &[i64]) -> Result<SampledFunction> {
    let g = *k.grid();
    g.check_dim(ell)?;
    let n = g.points_per_unit();
    let roots = grid::roots_of_unity(n);
    let ell_mod: Vec<usize> = ell
        .iter()
        .map(|&l| l.rem_euclid(n as i64) as usize)
        .collect();
    let values = k
        .values()
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            // x·ℓ = Σ c_a ℓ_a / n, so the phase only depends on c_a ℓ_a mod n
            let ph = g
                .coords(idx)
                .iter()
                .zip(&ell_mod)
                .fold(0usize, |acc, (&c, &l)| (acc + (c % n) * l) % n);
            v * roots[ph]
        })
        .collect();
    Ok(SampledFunction::new(g, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn cube_indicator_samples() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let k = sample_kernel(&KernelSpec::cube(r(1)).unwrap(), g).unwrap();
        for (idx, v) in k.samples().values().iter().enumerate() {
            let x = g.point(idx)[0];
            assert_eq!(v.re, if x < 1.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn bump_support_and_rejections() {
        let g = TorusGrid::new(1, 4, 16).unwrap();
        let spec = KernelSpec::bump(0.75, 0.5, Smoothness::Infinite).unwrap();
        let k = sample_kernel(&spec, g).unwrap();
        for (idx, v) in k.samples().values().iter().enumerate() {
            let y = g.centered_point(idx)[0];
            if (y - 0.5).abs() >= 0.75 {
                assert_eq!(v.re, 0.0);
            }
        }
        let wide = KernelSpec::bump(2.5, 0.0, Smoothness::Finite(2)).unwrap();
        assert!(matches!(
            sample_kernel(&wide, g),
            Err(KernelError::SupportTooWide { .. })
        ));
        let huge = KernelSpec::gaussian(5.0).unwrap();
        assert!(matches!(
            sample_kernel(&huge, g),
            Err(KernelError::PeriodizationTail { .. })
        ));
        let slow = KernelSpec::power_tail(2.0).unwrap();
        assert!(matches!(
            sample_kernel(&slow, g),
            Err(KernelError::PeriodizationTail { .. })
        ));
        let bad = KernelSpec::power_tail(0.5).unwrap();
        assert!(matches!(
            sample_kernel(&bad, g),
            Err(KernelError::NotIntegrable(1))
        ));
    }

    #[test]
    fn gaussian_mass_matches_erf() {
        // periodized samples integrate to erf((S+1/2)L/(σ√2)) ≈ 1
        for sigma in [0.25, 0.5] {
            let g = TorusGrid::new(1, 4, 32).unwrap();
            let k = sample_kernel(&KernelSpec::gaussian(sigma).unwrap(), g).unwrap();
            let mass: f64 =
                k.samples().values().iter().map(|v| v.re).sum::<f64>() * g.cell_volume();
            let rho = 4.5 * 4.0;
            let want = libm::erf(rho / (std::f64::consts::SQRT_2 * sigma));
            assert!((mass - want).abs() < 1e-10, "sigma {sigma}: {mass}");
        }
    }

    #[test]
    fn b_constant_cube_indicators() {
        for p in ["1", "3/2", "2", "5", "inf"] {
            let p = e(p);
            if p.is_infinite() {
                continue;
            }
            let b1 = b_constant(&KernelSpec::cube(r(1)).unwrap(), 1, p, 3).unwrap();
            assert_eq!(b1.value, 1.0);
            let b2 = b_constant(&KernelSpec::cube(r(2)).unwrap(), 1, p, 3).unwrap();
            assert_eq!(b2.value, 2.0);
        }
        let half = b_constant(
            &KernelSpec::cube(Rational64::new(1, 2)).unwrap(),
            1,
            e("2"),
            2,
        )
        .unwrap();
        assert!((half.value - 0.5f64.sqrt()).abs() < 1e-15);
        let two_d = b_constant_with_resolution(&KernelSpec::cube(r(2)).unwrap(), 2, e("4/3"), 2, 8)
            .unwrap();
        assert_eq!(two_d.value, 4.0);
        assert_eq!(two_d.exponent_used, e("4"));
    }

    #[test]
    fn exponent_selection() {
        assert_eq!(block_exponent(e("1")).unwrap(), Exponent::INFINITY);
        assert_eq!(block_exponent(e("3/2")).unwrap(), e("3"));
        assert_eq!(block_exponent(e("2")).unwrap(), e("2"));
        assert_eq!(block_exponent(e("7")).unwrap(), e("2"));
        assert!(block_exponent(e("1/2")).is_err());
    }

    #[test]
    fn partial_sums_monotone_and_tails() {
        for spec in [
            KernelSpec::gaussian(1.0).unwrap(),
            KernelSpec::bump(2.5, 0.3, Smoothness::Infinite).unwrap(),
            KernelSpec::power_tail(3.0).unwrap(),
        ] {
            let b = b_constant_with_resolution(&spec, 1, e("3/2"), 10, 512).unwrap();
            assert!(b.partial_sums.windows(2).all(|w| w[0] <= w[1]), "{spec}");
            assert_eq!(*b.partial_sums.last().unwrap(), b.value);
            if !matches!(spec, KernelSpec::PowerTail { .. }) {
                assert!(b.last_shell < 1e-12, "{spec}: {}", b.last_shell);
            }
        }
    }

    #[test]
    fn power_tail_divergence_is_typed() {
        let spec = KernelSpec::power_tail(1.0).unwrap();
        assert!(matches!(
            b_constant(&spec, 1, e("3/2"), 4),
            Err(KernelError::Divergent { .. })
        ));
        let spec = KernelSpec::power_tail(1.5).unwrap();
        assert!(matches!(
            b_constant_with_resolution(&spec, 2, e("2"), 4, 8),
            Err(KernelError::Divergent { .. })
        ));
        assert!(b_constant_with_resolution(&spec, 1, e("2"), 4, 64).is_ok());
    }

    #[test]
    fn modulation() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let k = sample_kernel(
            &KernelSpec::bump(1.5, 0.0, Smoothness::Finite(3)).unwrap(),
            g,
        )
        .unwrap();
        let k = k.samples();
        assert_eq!(&modulate(k, &[0]).unwrap(), k);
        for ell in [-3, 1, 5] {
            let m = modulate(k, &[ell]).unwrap();
            for (a, b) in m.values().iter().zip(k.values()) {
                assert!((a.norm() - b.norm()).abs() < 1e-15);
            }
            let s = e("3");
            let lhs = grid_block_norms(&m, s).unwrap();
            let rhs = grid_block_norms(k, s).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() <= 1e-14 * b.max(1.0));
            }
        }
        // e^{2πi x} sampled at x = 1/8 is e^{iπ/4}
        let one = SampledFunction::constant(g, Complex64::new(1.0, 0.0));
        let m = modulate(&one, &[1]).unwrap();
        assert!((m.values()[1] - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn grid_blocks_match_analytic_for_single_cube() {
        let g = TorusGrid::new(1, 4, 16).unwrap();
        let spec = KernelSpec::cube(r(1)).unwrap();
        let k = sample_kernel(&spec, g).unwrap();
        for p in ["1", "3/2", "2", "4"] {
            let s = block_exponent(e(p)).unwrap();
            let on_grid = grid_b_constant(k.samples(), s).unwrap();
            let analytic = b_constant(&spec, 1, e(p), 2).unwrap().value;
            assert_eq!(on_grid, analytic);
        }
    }

    #[test]
    fn parse_kernel_params() {
        let mut p = BTreeMap::new();
        p.insert("radius".to_string(), "1.5".to_string());
        assert_eq!(
            KernelSpec::from_name_params("bump", &p).unwrap(),
            KernelSpec::Bump {
                radius: 1.5,
                center: 0.0,
                smoothness: Smoothness::Infinite
            }
        );
        p.insert("order".to_string(), "3".to_string());
        assert!(matches!(
            KernelSpec::from_name_params("bump", &p).unwrap(),
            KernelSpec::Bump {
                smoothness: Smoothness::Finite(3),
                ..
            }
        ));
        let mut c = BTreeMap::new();
        c.insert("side".to_string(), "3/2".to_string());
        assert_eq!(
            KernelSpec::from_name_params("cube", &c).unwrap(),
            KernelSpec::CubeIndicator {
                side: Rational64::new(3, 2)
            }
        );
        assert!(KernelSpec::from_name_params("gaussian", &BTreeMap::new()).is_err());
        assert!(KernelSpec::from_name_params("sinc", &BTreeMap::new()).is_err());
    }
}
