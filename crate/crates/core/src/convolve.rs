//! The multilinear convolution
//! `f⊗g(x) = ∫ f_1(x - θ_1 y) ... f_m(x - θ_m y) g(y) dy`
//! on the torus, a spectral evaluation path for `m = 2`, and Young-type
//! inequality checks with the explicit endpoint constants.

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::exponents::{self, Exponent, ExponentError, Regime, RegimeLabel};
use crate::grid::{self, GridError, SampledFunction, TorusGrid};

#[derive(Debug, Error)]
pub enum ConvolveError {
    #[error("invalid theta: {0}")]
    BadTheta(String),
    #[error("theta entry {0} is not an integer; rescale with ThetaVector::from_rationals")]
    NotRepresentable(Rational64),
    #[error("expected {expected} functions, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("spectral evaluation supports d = 1 and m = 2 only")]
    Unsupported,
    #[error("product bandwidth {band} reaches the Nyquist limit {nyquist}")]
    Aliasing { band: usize, nyquist: usize },
    #[error("exponents ({p}, r = {r}) lie outside both regimes")]
    OutOfRange { p: Exponent, r: Exponent },
    #[error("exponent p_j = 1 is only admitted when p <= 1")]
    UnitExponentInCaseA,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

pub type Result<T> = std::result::Result<T, ConvolveError>;

/// Distinct nonzero integer dilations `(θ_1, ..., θ_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaVector {
    entries: Vec<i64>,
}

impl ThetaVector {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(ConvolveError::BadTheta("need at least one entry".into()));
        }
        if entries.contains(&0) {
            return Err(ConvolveError::BadTheta(format!(
                "{entries:?} has a zero entry"
            )));
        }
        for (i, a) in entries.iter().enumerate() {
            if entries[i + 1..].contains(a) {
                return Err(ConvolveError::BadTheta(format!(
                    "{entries:?} has repeated entry {a}"
                )));
            }
        }
        Ok(ThetaVector { entries })
    }

    /// Splits rational dilations as `θ_i = k_i / D` with a common denominator
    /// `D`, returning the integer vector `k` and `D`. See [`mconv_rational`].
    pub fn from_rationals(thetas: &[Rational64]) -> Result<(Self, i64)> {
        let d = thetas.iter().fold(1i64, |acc, t| lcm(acc, *t.denom()));
        let ks = thetas
            .iter()
            .map(|t| (t * Rational64::from_integer(d)).to_integer())
            .collect();
        Ok((Self::new(ks)?, d))
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn max_abs(&self) -> i64 {
        self.entries.iter().map(|t| t.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for ThetaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.entries.iter().map(i64::to_string).collect();
        write!(f, "({})", s.join(","))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn check_inputs(
    fs: &[&SampledFunction],
    g: &SampledFunction,
    theta: &ThetaVector,
) -> Result<TorusGrid> {
    if fs.len() != theta.m() {
        return Err(ConvolveError::Arity {
            expected: theta.m(),
            got: fs.len(),
        });
    }
    let grid = *g.grid();
    if fs.iter().any(|f| *f.grid() != grid) {
        return Err(GridError::GridMismatch.into());
    }
    Ok(grid)
}

/// Direct quadrature `h^d Σ_y Π f_i(x - θ_i y) g(y)` at every grid point.
///
/// `x - θ_i y` is an exact index relabeling modulo the axis length, so the
/// only rounding is in the products and the sum, which runs over `y` in
/// lattice order.
pub fn mconv(
    fs: &[&SampledFunction],
    g: &SampledFunction,
    theta: &ThetaVector,
) -> Result<SampledFunction> {
    let grid = check_inputs(fs, g, theta)?;
    let d = grid.dim();
    let n = grid.axis_len() as i64;
    let w = grid.cell_volume();
    let support: Vec<(Vec<i64>, Complex64)> = g
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != Complex64::zero())
        .map(|(j, v)| (grid.coords(j).iter().map(|&c| c as i64).collect(), *v))
        .collect();
    let thetas = theta.entries();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|xi| {
            let x: Vec<i64> = grid.coords(xi).iter().map(|&c| c as i64).collect();
            let mut acc = Complex64::zero();
            for (y, gv) in &support {
                let mut prod = *gv;
                for (f, &t) in fs.iter().zip(thetas) {
                    let mut idx = 0usize;
                    for a in 0..d {
                        idx = idx * n as usize + (x[a] - t * y[a]).rem_euclid(n) as usize;
                    }
                    prod *= f.values()[idx];
                }
                acc += prod;
            }
            acc * w
        })
        .collect();
    Ok(SampledFunction::new(grid, values)?)
}

/// [`mconv`] for rational dilations `θ_i = k_i / D`.
///
/// Substituting `y = D y'` gives integer dilations `k_i` against
/// `D^d g(D y')`. That function is built by exact relabeling from the copy
/// of `g` on the centred cell `[-L/2, L/2)^d`, so `g` is read as a function
/// on `R^d` supported there.
pub fn mconv_rational(
    fs: &[&SampledFunction],
    g: &SampledFunction,
    thetas: &[Rational64],
) -> Result<SampledFunction> {
    let (theta, den) = ThetaVector::from_rationals(thetas)?;
    if den == 1 {
        return mconv(fs, g, &theta);
    }
    let grid = *g.grid();
    let n = grid.axis_len() as i64;
    let scale = (den as f64).powi(grid.dim() as i32);
    let values = (0..grid.len())
        .map(|idx| {
            let mut src = Vec::with_capacity(grid.dim());
            for &c in &grid.coords(idx) {
                let c = grid::centered(c, grid.axis_len()) * den;
                if c < -n / 2 || c >= n - n / 2 {
                    return Complex64::zero();
                }
                src.push(c.rem_euclid(n) as usize);
            }
            g.values()[grid.index(&src)] * scale
        })
        .collect();
    let g_scaled = SampledFunction::new(grid, values)?;
    mconv(fs, &g_scaled, &theta)
}

/// Largest `|k|` over nonzero normalized DFT coefficients.
fn spectral_band(coeffs: &[Complex64]) -> usize {
    let n = coeffs.len();
    let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 1e-13 * peak)
        .map(|(k, _)| grid::centered(k, n).unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

fn forward_dft(f: &SampledFunction, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = f.values().len();
    let mut buf = f.values().to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    buf
}

/// `Σ_{k1,k2} f̂_1(k1) f̂_2(k2) L ĝ(θ_1 k1 + θ_2 k2) e^{2πi x (k1+k2)/L}` on a
/// one-dimensional torus, with `f̂` the normalized DFT coefficients.
///
/// Inputs must be band-limited so that neither `k1 + k2` nor
/// `θ_1 k1 + θ_2 k2` reaches the Nyquist index; the declared bandlimit is
/// used when present, otherwise the band is read off the spectrum.
pub fn mconv_spectral(
    f1: &SampledFunction,
    f2: &SampledFunction,
    g: &SampledFunction,
    theta: &ThetaVector,
) -> Result<SampledFunction> {
    let grid = check_inputs(&[f1, f2], g, theta)?;
    if grid.dim() != 1 || theta.m() != 2 {
        return Err(ConvolveError::Unsupported);
    }
    let n = grid.axis_len();
    let nyquist = n / 2;
    let mut planner = FftPlanner::new();
    let c1 = forward_dft(f1, &mut planner);
    let c2 = forward_dft(f2, &mut planner);
    let cg = forward_dft(g, &mut planner);
    let b1 = f1.bandlimit().unwrap_or_else(|| spectral_band(&c1));
    let b2 = f2.bandlimit().unwrap_or_else(|| spectral_band(&c2));
    let [t1, t2] = [theta.entries()[0], theta.entries()[1]];
    for band in [
        b1 + b2,
        t1.unsigned_abs() as usize * b1 + t2.unsigned_abs() as usize * b2,
    ] {
        if band >= nyquist {
            return Err(ConvolveError::Aliasing { band, nyquist });
        }
    }
    let l = grid.period() as f64;
    let ni = n as i64;
    let mut out = vec![Complex64::zero(); n];
    for k1 in -(b1 as i64)..=b1 as i64 {
        let a = c1[k1.rem_euclid(ni) as usize];
        for k2 in -(b2 as i64)..=b2 as i64 {
            let b = c2[k2.rem_euclid(ni) as usize];
            let s = cg[(t1 * k1 + t2 * k2).rem_euclid(ni) as usize];
            out[(k1 + k2).rem_euclid(ni) as usize] += a * b * s * l;
        }
    }
    // unnormalized inverse DFT: out[x] = Σ_s c_s e^{2πi x s/N}
    planner.plan_fft_inverse(n).process(&mut out);
    Ok(SampledFunction::new(grid, out)?)
}

/// How the `g` factor of a Young bound is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GNorm {
    /// `‖g‖_{L^{r,∞}}`, used for `1 < p < r'`.
    Weak,
    /// `‖g‖_{L^r}`, used for `p <= 1`.
    Strong,
}

/// Which constant multiplies the product of norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YoungConstant {
    /// `Π |θ_i|^{-d/(p_i r')}` at `p = 1`, `q = r`.
    Endpoint,
    /// `|θ_a - θ_b|^{-d/r'}` at a `q = 1` vertex; `a` carries reciprocal 1 and
    /// `b` carries `1/r'` (0-based indices).
    Vertex { a: usize, b: usize },
    /// Not explicit; the ratio is reported against 1.
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YoungCheckResult {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub regime: RegimeLabel,
    /// `‖f⊗g‖_{L^q}`.
    pub lhs: f64,
    /// `‖f_i‖_{L^{p_i}}`.
    pub f_norms: Vec<f64>,
    pub g_norm: f64,
    pub g_norm_kind: GNorm,
    pub constant: f64,
    pub constant_kind: YoungConstant,
    /// `lhs / (constant · Π ‖f_i‖ · ‖g‖)`; zero when `lhs` is zero.
    pub ratio: f64,
    pub pass: bool,
}

impl YoungCheckResult {
    /// `Π ‖f_i‖_{p_i} · ‖g‖`.
    pub fn norm_product(&self) -> f64 {
        self.f_norms.iter().product::<f64>() * self.g_norm
    }

    /// Ratio against another constant.
    pub fn ratio_against(&self, constant: f64) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / (constant * self.norm_product())
        }
    }
}

/// Picks the explicit constant for `(ps, r)` when one is known.
pub fn young_constant(
    theta: &ThetaVector,
    ps: &[Exponent],
    r: Exponent,
    d: usize,
) -> Result<(YoungConstant, f64)> {
    if ps.len() != theta.m() {
        return Err(ConvolveError::Arity {
            expected: theta.m(),
            got: ps.len(),
        });
    }
    let p = exponents::holder_exponent(ps)?;
    let r_dual = exponents::dual(r)?;
    let q = exponents::young_exponent(p, r)?;
    let inv_rd = r_dual.reciprocal();
    let df = d as f64;
    let t = theta.entries();
    if p.reciprocal().is_one() {
        let expo: f64 = ps
            .iter()
            .zip(t)
            .map(|(pi, &ti)| (ti.abs() as f64).ln() * -df * ratio_f64(pi.reciprocal() * inv_rd))
            .sum();
        return Ok((YoungConstant::Endpoint, expo.exp()));
    }
    if q.reciprocal().is_one() {
        let recips: Vec<Rational64> = ps.iter().map(Exponent::reciprocal).collect();
        let ones: Vec<usize> = (0..recips.len()).filter(|&i| recips[i].is_one()).collect();
        let others: Vec<usize> = (0..recips.len())
            .filter(|&i| !recips[i].is_zero())
            .collect();
        let pair = if inv_rd.is_one() {
            // r = inf: two coordinates equal 1, the rest 0
            (ones.len() == 2 && others.len() == 2).then(|| (ones[0], ones[1]))
        } else {
            let b = others.iter().copied().find(|&i| recips[i] == inv_rd);
            match (ones.as_slice(), b) {
                ([a], Some(b)) if others.len() == 2 => Some((*a, b)),
                _ => None,
            }
        };
        if let Some((a, b)) = pair {
            let gap = (t[a] - t[b]).abs() as f64;
            return Ok((
                YoungConstant::Vertex { a, b },
                gap.powf(-df * ratio_f64(inv_rd)),
            ));
        }
    }
    Ok((YoungConstant::Empirical, 1.0))
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Evaluates `‖f⊗g‖_q` against `C Π ‖f_i‖_{p_i} ‖g‖`, with the weak norm of
/// `g` for `1 < p < r'` and the strong norm for `p <= 1`.
pub fn young_check(
    fs: &[&SampledFunction],
    g: &SampledFunction,
    theta: &ThetaVector,
    ps: &[Exponent],
    r: Exponent,
    tolerance: f64,
) -> Result<YoungCheckResult> {
    let grid = check_inputs(fs, g, theta)?;
    let (constant_kind, constant) = young_constant(theta, ps, r, grid.dim())?;
    let p = exponents::holder_exponent(ps)?;
    let regime = exponents::classify_regime(p, r)?;
    let g_norm_kind = match regime.tag {
        Regime::CaseA => {
            if ps.iter().any(|pi| pi.reciprocal().is_one()) {
                return Err(ConvolveError::UnitExponentInCaseA);
            }
            GNorm::Weak
        }
        Regime::CaseB => GNorm::Strong,
        Regime::OutOfRange => return Err(ConvolveError::OutOfRange { p, r }),
    };
    let q = regime.q.ok_or(ConvolveError::OutOfRange { p, r })?;
    let out = mconv(fs, g, theta)?;
    let lhs = grid::lp_norm(&out, q)?;
    let f_norms = fs
        .iter()
        .zip(ps)
        .map(|(f, &pi)| grid::lp_norm(f, pi))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let g_norm = match g_norm_kind {
        GNorm::Weak => grid::weak_lp_norm(g, r)?,
        GNorm::Strong => grid::lp_norm(g, r)?,
    };
    let denom = constant * f_norms.iter().product::<f64>() * g_norm;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / denom };
    Ok(YoungCheckResult {
        p,
        q,
        r,
        regime,
        lhs,
        f_norms,
        g_norm,
        g_norm_kind,
        constant,
        constant_kind,
        ratio,
        pass: ratio <= 1.0 + tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    fn indicator(grid: TorusGrid, lo: f64, hi: f64) -> SampledFunction {
        SampledFunction::from_fn(grid, |x| {
            Complex64::new(if (lo..hi).contains(&x[0]) { 1.0 } else { 0.0 }, 0.0)
        })
    }

    #[test]
    fn theta_validation() {
        assert!(ThetaVector::new(vec![1, 2, 3]).is_ok());
        assert!(ThetaVector::new(vec![1, 0]).is_err());
        assert!(ThetaVector::new(vec![2, 2]).is_err());
        assert!(ThetaVector::new(vec![]).is_err());
        let (t, d) =
            ThetaVector::from_rationals(&[Rational64::new(1, 2), Rational64::new(2, 3)]).unwrap();
        assert_eq!((t.entries(), d), (&[3, 4][..], 6));
    }

    #[test]
    fn triangle_from_indicators() {
        // (χ_[0,1) * χ_[0,1))(x) = 1 - |x - 1| on [0, 2]; the rectangle rule
        // is exact at grid points up to the half-open endpoint convention
        let g = TorusGrid::new(1, 4, 16).unwrap();
        let f = indicator(g, 0.0, 1.0);
        let out = mconv(&[&f], &f, &ThetaVector::new(vec![1]).unwrap()).unwrap();
        let h = g.spacing();
        for (idx, v) in out.values().iter().enumerate() {
            let x = g.point(idx)[0];
            // samples y_j = jh with 0 <= jh < 1 and 0 <= x - jh < 1
            let count = (0..g.axis_len())
                .filter(|&j| {
                    let y = j as f64 * h;
                    y < 1.0 && x - y >= 0.0 && x - y < 1.0
                })
                .count();
            assert!((v.re - count as f64 * h).abs() < 1e-14);
            let tri = (1.0 - (x - 1.0).abs()).max(0.0);
            assert!((v.re - tri).abs() <= h + 1e-14, "x = {x}");
        }
        // the discrete peak sits one sample left of x = 1
        let peak = out.values()[g.index(&[15])].re;
        assert!((peak - 1.0).abs() < 1e-14);
        assert!(out.max_abs() <= 1.0 + 1e-14);
    }

    #[test]
    fn delta_g_approximates_product() {
        let mut prev = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let g = TorusGrid::new(1, 4, n).unwrap();
            let f1 = SampledFunction::from_fn(g, |x| {
                Complex64::new((std::f64::consts::PI * x[0] / 2.0).sin(), 0.0)
            });
            let f2 = SampledFunction::from_fn(g, |x| {
                Complex64::new((std::f64::consts::PI * x[0] / 2.0).cos(), 0.0)
            });
            // unit mass in the cell [0, h)
            let mut dv = vec![Complex64::zero(); g.len()];
            dv[0] = Complex64::new(1.0 / g.spacing(), 0.0);
            let delta = SampledFunction::new(g, dv).unwrap();
            let out = mconv(&[&f1, &f2], &delta, &ThetaVector::new(vec![1, 2]).unwrap()).unwrap();
            let want = f1.mul(&f2).unwrap();
            let err = out.max_abs_diff(&want);
            assert!(err <= prev);
            prev = err;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn rational_theta_matches_integer_rescaling() {
        // θ = (1/2, 1) against g equals θ = (1, 2) against 2 g(2y)
        let grid = TorusGrid::new(1, 4, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f1 = grid::random_trig_poly(grid, 3, None, &mut rng).unwrap();
        let f2 = grid::random_trig_poly(grid, 3, None, &mut rng).unwrap();
        let g = SampledFunction::from_centered_fn(grid, |y| {
            Complex64::new(
                if y[0].abs() < 0.75 {
                    1.0 - y[0].abs()
                } else {
                    0.0
                },
                0.0,
            )
        });
        let a =
            mconv_rational(&[&f1, &f2], &g, &[Rational64::new(1, 2), Rational64::one()]).unwrap();
        let g2 = SampledFunction::from_centered_fn(grid, |y| {
            let t = 2.0 * y[0];
            Complex64::new(
                if t.abs() < 0.75 {
                    2.0 * (1.0 - t.abs())
                } else {
                    0.0
                },
                0.0,
            )
        });
        let b = mconv(&[&f1, &f2], &g2, &ThetaVector::new(vec![1, 2]).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    fn random_triple(seed: u64, grid: TorusGrid, band: usize) -> [SampledFunction; 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        [
            grid::random_trig_poly(grid, band, None, &mut rng).unwrap(),
            grid::random_trig_poly(grid, band, None, &mut rng).unwrap(),
            grid::random_trig_poly(grid, band, None, &mut rng).unwrap(),
        ]
    }

    #[test]
    fn spectral_agrees_with_direct() {
        let grid = TorusGrid::new(1, 4, 16).unwrap();
        for (seed, theta) in [(1u64, vec![1, 2]), (2, vec![-1, 3]), (3, vec![2, -5])] {
            let [f1, f2, g] = random_triple(seed, grid, 3);
            let theta = ThetaVector::new(theta).unwrap();
            let a = mconv(&[&f1, &f2], &g, &theta).unwrap();
            let b = mconv_spectral(&f1, &f2, &g, &theta).unwrap();
            let scale = a.max_abs().max(1.0);
            assert!(a.max_abs_diff(&b) <= 1e-10 * scale, "seed {seed}");
        }
    }

    #[test]
    fn spectral_degenerate_cases() {
        let grid = TorusGrid::new(1, 4, 16).unwrap();
        let [f1, f2, _] = random_triple(9, grid, 4);
        let theta = ThetaVector::new(vec![1, 3]).unwrap();
        // g ≡ c: only θ1 k1 + θ2 k2 = 0 contributes
        let c = Complex64::new(0.5, -0.25);
        let g = SampledFunction::constant(grid, c);
        let out = mconv_spectral(&f1, &f2, &g, &theta).unwrap();
        let mut planner = FftPlanner::new();
        let c1 = forward_dft(&f1, &mut planner);
        let c2 = forward_dft(&f2, &mut planner);
        let n = grid.axis_len() as i64;
        let want = SampledFunction::from_fn(grid, |x| {
            let mut acc = Complex64::zero();
            for k2 in -4i64..=4 {
                let k1 = -3 * k2;
                if k1.abs() > 4 {
                    continue;
                }
                let ph = 2.0 * std::f64::consts::PI * (k1 + k2) as f64 * x[0] / 4.0;
                acc += c1[k1.rem_euclid(n) as usize]
                    * c2[k2.rem_euclid(n) as usize]
                    * c
                    * 4.0
                    * Complex64::from_polar(1.0, ph);
            }
            acc
        });
        assert!(out.max_abs_diff(&want) < 1e-12);
        // f2 ≡ 1: a single multiplier acting on f1
        let one = SampledFunction::constant(grid, Complex64::one()).with_bandlimit(Some(0));
        let [_, _, g] = random_triple(10, grid, 3);
        let a = mconv_spectral(&f1, &one, &g, &theta).unwrap();
        let b = mconv(&[&f1, &one], &g, &theta).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        let single = mconv(&[&f1], &g, &ThetaVector::new(vec![1]).unwrap()).unwrap();
        assert!(a.max_abs_diff(&single) < 1e-12);
    }

    #[test]
    fn spectral_rejects_aliasing() {
        let grid = TorusGrid::new(1, 4, 4).unwrap();
        let [f1, f2, g] = random_triple(4, grid, 3);
        let theta = ThetaVector::new(vec![1, 2]).unwrap();
        assert!(matches!(
            mconv_spectral(&f1, &f2, &g, &theta),
            Err(ConvolveError::Aliasing { .. })
        ));
        let g2 = TorusGrid::new(2, 2, 2).unwrap();
        let z = SampledFunction::zeros(g2);
        assert!(matches!(
            mconv_spectral(&z, &z, &z, &theta),
            Err(ConvolveError::Unsupported)
        ));
    }

    #[test]
    fn multilinearity_exact() {
        let grid = TorusGrid::new(1, 2, 8).unwrap();
        let [f1, f2, g] = random_triple(5, grid, 2);
        let theta = ThetaVector::new(vec![1, -2]).unwrap();
        let base = mconv(&[&f1, &f2], &g, &theta).unwrap();
        let doubled = f1.scale(Complex64::new(2.0, 0.0));
        let out = mconv(&[&doubled, &f2], &g, &theta).unwrap();
        for (a, b) in out.values().iter().zip(base.values()) {
            assert_eq!(*a, b * 2.0);
        }
    }

    proptest! {
        #[test]
        fn translation_covariance(seed in 0u64..1000, shift in -20i64..20) {
            let grid = TorusGrid::new(1, 2, 8).unwrap();
            let [f1, f2, g] = random_triple(seed, grid, 3);
            let theta = ThetaVector::new(vec![2, -3]).unwrap();
            let base = mconv(&[&f1, &f2], &g, &theta).unwrap();
            let t1 = grid::translate(&f1, &[shift]).unwrap();
            let t2 = grid::translate(&f2, &[shift]).unwrap();
            let moved = mconv(&[&t1, &t2], &g, &theta).unwrap();
            let want = grid::translate(&base, &[shift]).unwrap();
            prop_assert_eq!(moved.values(), want.values());
        }

        #[test]
        fn additivity_in_g(seed in 0u64..1000) {
            let grid = TorusGrid::new(1, 2, 8).unwrap();
            let [f1, g1, g2] = random_triple(seed, grid, 3);
            let theta = ThetaVector::new(vec![3]).unwrap();
            let a = mconv(&[&f1], &g1.add(&g2).unwrap(), &theta).unwrap();
            let b = mconv(&[&f1], &g1, &theta).unwrap().add(&mconv(&[&f1], &g2, &theta).unwrap()).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }

        #[test]
        fn modulus_monotonicity(seed in 0u64..500) {
            let grid = TorusGrid::new(1, 2, 8).unwrap();
            let [f1, f2, g] = random_triple(seed, grid, 2);
            let (f2, g) = (f2.modulus(), g.modulus());
            let theta = ThetaVector::new(vec![1, 2]).unwrap();
            let q = e("2");
            let a = grid::lp_norm(&mconv(&[&f1, &f2], &g, &theta).unwrap(), q).unwrap();
            let b = grid::lp_norm(&mconv(&[&f1.modulus(), &f2], &g, &theta).unwrap(), q).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn constants() {
        let theta = ThetaVector::new(vec![1, 2, 3]).unwrap();
        let two = e("2");
        // p = 1 with p_i = (3,3,3), r = 2: Π θ_i^{-1/6}
        let (kind, c) = young_constant(&theta, &[e("3"), e("3"), e("3")], two, 1).unwrap();
        assert_eq!(kind, YoungConstant::Endpoint);
        assert!((c - 6f64.powf(-1.0 / 6.0)).abs() < 1e-15);
        // vertex (1/r', 0, 1): a = 2, b = 0, constant |3 - 1|^{-1/2}
        let (kind, c) = young_constant(&theta, &[two, Exponent::INFINITY, e("1")], two, 1).unwrap();
        assert_eq!(kind, YoungConstant::Vertex { a: 2, b: 0 });
        assert!((c - 0.5f64.sqrt()).abs() < 1e-15);
        // r = inf vertex (0, 1, 1)
        let (kind, c) = young_constant(
            &theta,
            &[Exponent::INFINITY, e("1"), e("1")],
            Exponent::INFINITY,
            1,
        )
        .unwrap();
        assert_eq!(kind, YoungConstant::Vertex { a: 1, b: 2 });
        assert_eq!(c, 1.0);
        let (kind, _) = young_constant(&theta, &[e("4"), e("4"), e("4")], two, 1).unwrap();
        assert_eq!(kind, YoungConstant::Empirical);
    }

    #[test]
    fn young_check_zero_and_regimes() {
        let grid = TorusGrid::new(1, 4, 8).unwrap();
        let [f1, f2, f3] = random_triple(1, grid, 2);
        let theta = ThetaVector::new(vec![1, 2, 3]).unwrap();
        let zero = SampledFunction::zeros(grid);
        let res = young_check(
            &[&f1, &f2, &f3],
            &zero,
            &theta,
            &[e("3"), e("3"), e("3")],
            e("2"),
            1e-9,
        )
        .unwrap();
        assert_eq!(res.lhs, 0.0);
        assert!(res.pass);
        assert_eq!(res.g_norm_kind, GNorm::Strong);
        // 1/p = 3/4 with r = 4/3 (r' = 4): 1 < p = 4/3 < 4 is the weak regime
        let res = young_check(
            &[&f1, &f2, &f3],
            &f1,
            &theta,
            &[e("4"), e("4"), e("4")],
            e("4/3"),
            1e-9,
        )
        .unwrap();
        assert_eq!(res.g_norm_kind, GNorm::Weak);
        assert_eq!(res.regime.tag, Regime::CaseA);
        // 1/p = 2 beyond the lower edge r'/(1+r') = 2/3 for r = 2
        assert!(matches!(
            young_check(
                &[&f1, &f2, &f3],
                &f1,
                &theta,
                &[e("3/2"), e("3/2"), e("3/2")],
                e("2"),
                1e-9
            ),
            Err(ConvolveError::OutOfRange { .. } | ConvolveError::Exponent(_))
        ));
    }
}
