//! The operators `T_ℓ(f)(x) = ∫ Π f_i(x - θ_i y) K(y) e^{2πi ℓ·y} dy` and the
//! square function `T = (Σ_ℓ |T_ℓ|²)^{1/2}`.
//!
//! On the grid, `T_ℓ` only depends on `ℓ mod n`, and summing `|T_ℓ(x)|²`
//! over one residue system equals `h^d Σ_s |P_x(s)|²` where
//! `P_x(s) = Σ_u G_x(s + u)` is the 1-periodization of
//! `G_x(y) = Π f_i(x - θ_i y) K(y)` over unit cubes. That is the "exact"
//! square function below.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::convolve::{self, ConvolveError, ThetaVector};
use crate::exponents::{self, Exponent, ExponentError};
use crate::grid::{self, GridError, SampledFunction, TorusGrid};
use crate::kernels::{self, KernelError, SampledKernel};
use crate::tolerances::INEQUALITY_SLACK;

#[derive(Debug, Error)]
pub enum SqfnError {
    #[error("the exact square function needs a compactly supported kernel")]
    UnboundedKernel,
    #[error("lattice radius {radius} aliases: 2R+1 must not exceed n = {n}")]
    LatticeAliasing { radius: usize, n: usize },
    #[error("coefficient sequence is empty")]
    EmptySequence,
    #[error("frequencies {0:?} and {1:?} coincide modulo n")]
    AliasedSequence(Vec<i64>, Vec<i64>),
    #[error("exponent precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Convolve(#[from] ConvolveError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

pub type Result<T> = std::result::Result<T, SqfnError>;

/// Frequencies `ℓ ∈ Z^d` with `‖ℓ‖_∞ <= R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModulationLattice {
    pub dim: usize,
    pub radius: usize,
}

impl ModulationLattice {
    pub fn new(dim: usize, radius: usize) -> Self {
        ModulationLattice { dim, radius }
    }

    pub fn count(&self) -> usize {
        (2 * self.radius + 1).pow(self.dim as u32)
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let r = self.radius as i64;
        kernels::lattice_box(self.dim, -r, r + 1)
    }
}

#[derive(Clone, Debug)]
pub struct SquareFunctionResult {
    pub truncated: SampledFunction,
    pub exact: SampledFunction,
    pub lattice: ModulationLattice,
    /// `min_x truncated² / exact²` over points where `exact > 0`.
    pub captured_mass: f64,
}

fn check_fs(fs: &[&SampledFunction], k: &SampledKernel, theta: &ThetaVector) -> Result<TorusGrid> {
    if fs.len() != theta.m() {
        return Err(ConvolveError::Arity {
            expected: theta.m(),
            got: fs.len(),
        }
        .into());
    }
    let grid = *k.grid();
    if fs.iter().any(|f| *f.grid() != grid) {
        return Err(GridError::GridMismatch.into());
    }
    Ok(grid)
}

pub fn t_ell(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    ell: &[i64],
    theta: &ThetaVector,
) -> Result<SampledFunction> {
    check_fs(fs, k, theta)?;
    let kl = kernels::modulate(k.samples(), ell)?;
    Ok(convolve::mconv(fs, &kl, theta)?)
}

/// `(Σ_{‖ℓ‖_∞ <= R} |T_ℓ|²)^{1/2}` pointwise; requires `2R + 1 <= n` so the
/// lattice points are distinct residues.
pub fn square_function_truncated(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
    lattice: ModulationLattice,
) -> Result<SampledFunction> {
    let grid = check_fs(fs, k, theta)?;
    let n = grid.points_per_unit();
    if 2 * lattice.radius + 1 > n {
        return Err(SqfnError::LatticeAliasing {
            radius: lattice.radius,
            n,
        });
    }
    grid.check_dim(&vec![0; lattice.dim])?;
    let mut acc = vec![0.0; grid.len()];
    for ell in lattice.points() {
        let t = t_ell(fs, k, &ell, theta)?;
        for (a, v) in acc.iter_mut().zip(t.values()) {
            *a += v.norm_sqr();
        }
    }
    let values = acc
        .into_iter()
        .map(|s| Complex64::new(s.sqrt(), 0.0))
        .collect();
    Ok(SampledFunction::new(grid, values)?)
}

/// Per-point quantities shared by the exact square function, the cube
/// majorant and the chain verifiers.
struct PointScan {
    /// `h^d Σ_{y ∈ Q_u} |G_x(y)|²` per torus cube.
    cube_sq: Vec<f64>,
    /// `h^d Σ_s |P_x(s)|²`.
    exact_sq: f64,
}

struct ScanContext<'a> {
    grid: TorusGrid,
    fs: Vec<&'a [Complex64]>,
    thetas: Vec<i64>,
    /// `(y coords, K(y), cube of y, residue index of y)` over the kernel support.
    support: Vec<(Vec<i64>, Complex64, usize, usize)>,
}

impl<'a> ScanContext<'a> {
    fn new(fs: &[&'a SampledFunction], k: &SampledKernel, theta: &ThetaVector) -> Result<Self> {
        let grid = check_fs(fs, k, theta)?;
        if !k.has_compact_support() {
            return Err(SqfnError::UnboundedKernel);
        }
        let n = grid.points_per_unit();
        let support = k
            .samples()
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != Complex64::zero())
            .map(|(j, v)| {
                let c = grid.coords(j);
                let res = c.iter().fold(0usize, |acc, &ca| acc * n + ca % n);
                (
                    c.iter().map(|&ca| ca as i64).collect(),
                    *v,
                    grid.cube_of(j),
                    res,
                )
            })
            .collect();
        Ok(ScanContext {
            grid,
            fs: fs.iter().map(|f| f.values()).collect(),
            thetas: theta.entries().to_vec(),
            support,
        })
    }

    /// `Π f_i(x - θ_i y)`.
    fn product(&self, x: &[i64], y: &[i64]) -> Complex64 {
        let n = self.grid.axis_len() as i64;
        let mut prod = Complex64::new(1.0, 0.0);
        for (f, &t) in self.fs.iter().zip(&self.thetas) {
            let idx = x.iter().zip(y).fold(0usize, |acc, (&xa, &ya)| {
                acc * n as usize + (xa - t * ya).rem_euclid(n) as usize
            });
            prod *= f[idx];
        }
        prod
    }

    fn scan(&self, xi: usize) -> PointScan {
        let w = self.grid.cell_volume();
        let x: Vec<i64> = self.grid.coords(xi).iter().map(|&c| c as i64).collect();
        let mut cube_sq = vec![0.0; self.grid.cube_count()];
        let mut residues =
            vec![Complex64::zero(); self.grid.points_per_unit().pow(self.grid.dim() as u32)];
        for (y, kv, cube, res) in &self.support {
            let gv = self.product(&x, y) * kv;
            cube_sq[*cube] += gv.norm_sqr();
            residues[*res] += gv;
        }
        cube_sq.iter_mut().for_each(|c| *c *= w);
        let exact_sq = w * residues.iter().map(|p| p.norm_sqr()).sum::<f64>();
        PointScan { cube_sq, exact_sq }
    }

    fn scan_all(&self) -> Vec<PointScan> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|xi| self.scan(xi))
            .collect()
    }

    fn cube_in_range(&self, cube: usize, trunc: Option<usize>) -> bool {
        match trunc {
            None => true,
            Some(u) => self
                .grid
                .cube_lifted(cube)
                .iter()
                .all(|&c| c >= -(u as i64) && c < u as i64),
        }
    }
}

fn real_function(grid: TorusGrid, values: impl Iterator<Item = f64>) -> Result<SampledFunction> {
    Ok(SampledFunction::new(
        grid,
        values.map(|v| Complex64::new(v, 0.0)).collect(),
    )?)
}

/// The full square function over one residue system of `ℓ mod n`, through
/// the periodization of `G_x` over unit cubes.
pub fn square_function_exact(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
) -> Result<SampledFunction> {
    let ctx = ScanContext::new(fs, k, theta)?;
    let scans = ctx.scan_all();
    real_function(ctx.grid, scans.iter().map(|s| s.exact_sq.sqrt()))
}

/// `Σ_u (∫_{Q_u} |G_x(y)|² dy)^{1/2}` over cubes in `[-U, U)^d`
/// (all torus cubes when `trunc` is `None`).
pub fn cube_majorant(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
    trunc: Option<usize>,
) -> Result<SampledFunction> {
    let ctx = ScanContext::new(fs, k, theta)?;
    let scans = ctx.scan_all();
    let keep: Vec<bool> = (0..ctx.grid.cube_count())
        .map(|c| ctx.cube_in_range(c, trunc))
        .collect();
    real_function(
        ctx.grid,
        scans.iter().map(|s| {
            s.cube_sq
                .iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(c, _)| c.sqrt())
                .sum()
        }),
    )
}

/// Exact square function and cube majorant from one pass over the grid.
pub fn exact_and_majorant(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
) -> Result<(SampledFunction, SampledFunction)> {
    let ctx = ScanContext::new(fs, k, theta)?;
    let scans = ctx.scan_all();
    let exact = real_function(ctx.grid, scans.iter().map(|s| s.exact_sq.sqrt()))?;
    let major = real_function(
        ctx.grid,
        scans
            .iter()
            .map(|s| s.cube_sq.iter().map(|c| c.sqrt()).sum()),
    )?;
    Ok((exact, major))
}

/// Truncated and exact square functions with the captured-mass ratio.
pub fn square_function(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
    lattice: ModulationLattice,
) -> Result<SquareFunctionResult> {
    let truncated = square_function_truncated(fs, k, theta, lattice)?;
    let exact = square_function_exact(fs, k, theta)?;
    let captured_mass = captured_mass(&truncated, &exact);
    Ok(SquareFunctionResult {
        truncated,
        exact,
        lattice,
        captured_mass,
    })
}

/// `min_x truncated²/exact²`, ignoring points where `exact` vanishes.
pub fn captured_mass(truncated: &SampledFunction, exact: &SampledFunction) -> f64 {
    let peak = exact.max_abs();
    truncated
        .values()
        .iter()
        .zip(exact.values())
        .filter(|(_, e)| e.re > 1e-12 * peak)
        .map(|(t, e)| (t.re / e.re).powi(2))
        .fold(1.0, f64::min)
}

/// Both sides of `Σ_ℓ a_ℓ T_ℓ(x) = ∫ Π f_i(x - θ_i y) K(y) â(y) dy`.
#[derive(Clone, Debug)]
pub struct DualityWitness {
    pub sumside: SampledFunction,
    pub integralside: SampledFunction,
    /// `‖a‖_{ℓ²}`.
    pub a_norm: f64,
}

impl DualityWitness {
    /// `max |sumside - integralside| / max |integralside|`.
    pub fn relative_discrepancy(&self) -> f64 {
        let scale = self.integralside.max_abs().max(self.sumside.max_abs());
        if scale == 0.0 {
            0.0
        } else {
            self.sumside.max_abs_diff(&self.integralside) / scale
        }
    }
}

/// `â(y) = Σ_ℓ a_ℓ e^{2πi ℓ·y}` on the grid.
pub fn fourier_series(
    grid: TorusGrid,
    a: &BTreeMap<Vec<i64>, Complex64>,
) -> Result<SampledFunction> {
    let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
    let mut acc = SampledFunction::zeros(grid);
    for (ell, c) in a {
        acc = acc.add(&kernels::modulate(&one, ell)?.scale(*c))?;
    }
    Ok(acc)
}

/// Evaluates both sides of the duality identity. The frequencies of `a` must
/// be distinct modulo `n`, which makes `â` orthonormal on every unit cube.
pub fn duality_witness(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
    a: &BTreeMap<Vec<i64>, Complex64>,
) -> Result<DualityWitness> {
    let grid = check_fs(fs, k, theta)?;
    if a.is_empty() {
        return Err(SqfnError::EmptySequence);
    }
    let n = grid.points_per_unit() as i64;
    let mut seen: BTreeMap<Vec<i64>, &Vec<i64>> = BTreeMap::new();
    for ell in a.keys() {
        grid.check_dim(ell)?;
        let res: Vec<i64> = ell.iter().map(|l| l.rem_euclid(n)).collect();
        if let Some(prev) = seen.insert(res, ell) {
            return Err(SqfnError::AliasedSequence(prev.clone(), ell.clone()));
        }
    }
    let a_norm = a.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut sumside = SampledFunction::zeros(grid);
    for (ell, c) in a {
        sumside = sumside.add(&t_ell(fs, k, ell, theta)?.scale(*c))?;
    }
    let weighted = k.samples().mul(&fourier_series(grid, a)?)?;
    let integralside = convolve::mconv(fs, &weighted, theta)?;
    Ok(DualityWitness {
        sumside,
        integralside,
        a_norm,
    })
}

/// Values of a chain `Q1 <= Q2 <= ...` with the slack used to judge it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub values: Vec<f64>,
    /// Largest chain member; slack is `factor × scale`.
    pub scale: f64,
    pub pass: bool,
    /// `Σ_u (h^d Σ_{Q_u} |K|²)^{1/2}`, the grid counterpart of `B_2` (case 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_grid: Option<f64>,
    /// `(Σ_{n,u} A_{n,u}, ∫∫ |G_x(y)|² dy dx)` computed independently (case 2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bookkeeping: Option<(f64, f64)>,
}

impl ChainReport {
    fn new(values: Vec<f64>) -> Self {
        let scale = values.iter().copied().fold(0.0, f64::max);
        let mut r = ChainReport {
            values,
            scale,
            pass: false,
            b_grid: None,
            bookkeeping: None,
        };
        r.pass = r.holds(INEQUALITY_SLACK);
        r
    }

    /// Every link `Q_i <= Q_{i+1} + factor × scale`.
    pub fn holds(&self, factor: f64) -> bool {
        self.min_margin() >= -factor * self.scale
    }

    /// `min_i (Q_{i+1} - Q_i)`.
    pub fn min_margin(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Relative error of the `A_{n,u}` total-mass identity, if recorded.
    pub fn bookkeeping_error(&self) -> Option<f64> {
        self.bookkeeping
            .map(|(a, b)| if b == 0.0 { a.abs() } else { (a - b).abs() / b })
    }
}

fn lp_of(values: &[f64], weight: f64, p: f64) -> f64 {
    (weight * values.iter().map(|v| v.powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// `Q2 = Σ_u (∫ (∫_{Q_u} |G_x|² dy)^{p/2} dx)^{1/p}`.
fn q2(scans: &[PointScan], w: f64, p: f64) -> f64 {
    let cubes = scans.first().map_or(0, |s| s.cube_sq.len());
    (0..cubes)
        .map(|u| {
            let col: Vec<f64> = scans.iter().map(|s| s.cube_sq[u].sqrt()).collect();
            lp_of(&col, w, p)
        })
        .sum()
}

fn chain_exponent(ps: &[Exponent]) -> Result<Exponent> {
    if ps.iter().any(|p| p.is_infinite()) {
        return Err(SqfnError::Precondition("all p_j must be finite".into()));
    }
    Ok(exponents::holder_exponent(ps)?)
}

/// The four members of the Minkowski chain for `p >= 2`:
/// `‖T‖_p <= Q2 <= Q3 <= B_2 Π ‖f_i‖_{p_i}` with the grid `B_2`.
pub fn verify_case1_chain(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
    ps: &[Exponent],
) -> Result<ChainReport> {
    let p = chain_exponent(ps)?;
    let two = Exponent::integer(2)?;
    if p < two || ps.iter().any(|pj| *pj < two) {
        return Err(SqfnError::Precondition(format!(
            "case 1 needs 2 <= p_j and 2 <= p, got p = {p}"
        )));
    }
    if ps.len() != fs.len() {
        return Err(ConvolveError::Arity {
            expected: fs.len(),
            got: ps.len(),
        }
        .into());
    }
    let ctx = ScanContext::new(fs, k, theta)?;
    let w = ctx.grid.cell_volume();
    let pf = p.to_f64();
    let scans = ctx.scan_all();
    let exact: Vec<f64> = scans.iter().map(|s| s.exact_sq.sqrt()).collect();
    let q1 = lp_of(&exact, w, pf);
    let q2 = q2(&scans, w, pf);
    // H(y) = ∫ |Π f_i(x - θ_i y)|^p dx for y in supp K
    let h_pow: Vec<f64> = ctx
        .support
        .par_iter()
        .map(|(y, _, _, _)| {
            let s: f64 = (0..ctx.grid.len())
                .map(|xi| {
                    let x: Vec<i64> = ctx.grid.coords(xi).iter().map(|&c| c as i64).collect();
                    ctx.product(&x, y).norm().powf(pf)
                })
                .sum();
            (w * s).powf(2.0 / pf)
        })
        .collect();
    let mut q3_cubes = vec![0.0; ctx.grid.cube_count()];
    for ((_, kv, cube, _), hp) in ctx.support.iter().zip(&h_pow) {
        q3_cubes[*cube] += w * kv.norm_sqr() * hp;
    }
    let q3: f64 = q3_cubes.iter().map(|c| c.sqrt()).sum();
    let b_grid = kernels::grid_b_constant(k.samples(), two)?;
    let mut norms = 1.0;
    for (f, pj) in fs.iter().zip(ps) {
        norms *= grid::lp_norm(f, *pj)?;
    }
    let mut report = ChainReport::new(vec![q1, q2, q3, b_grid * norms]);
    report.b_grid = Some(b_grid);
    Ok(report)
}

/// The constant-free prefix `‖T‖_p <= Q2 <= Σ_u (Σ_n A_{n,u}^{p/2})^{1/p}` for
/// `1 <= p < 2`, with `A_{n,u} = ∫_{P_n} ∫_{Q_u} |G_x(y)|² dy dx`.
pub fn verify_case2_prefix(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
    ps: &[Exponent],
) -> Result<ChainReport> {
    let p = chain_exponent(ps)?;
    if !p.is_at_least_one() || p >= Exponent::integer(2)? {
        return Err(SqfnError::Precondition(format!(
            "case 2 needs 1 <= p < 2, got p = {p}"
        )));
    }
    if ps.len() != fs.len() {
        return Err(ConvolveError::Arity {
            expected: fs.len(),
            got: ps.len(),
        }
        .into());
    }
    let ctx = ScanContext::new(fs, k, theta)?;
    let grid = ctx.grid;
    let w = grid.cell_volume();
    let pf = p.to_f64();
    let scans = ctx.scan_all();
    let exact: Vec<f64> = scans.iter().map(|s| s.exact_sq.sqrt()).collect();
    let q1 = lp_of(&exact, w, pf);
    let q2 = q2(&scans, w, pf);
    let cubes = grid.cube_count();
    // a[n][u], with cells P_n indexed like cubes
    let mut a = vec![vec![0.0; cubes]; cubes];
    for (xi, s) in scans.iter().enumerate() {
        let cell = grid.cube_of(xi);
        for (u, c) in s.cube_sq.iter().enumerate() {
            a[cell][u] += w * c;
        }
    }
    let q3: f64 = (0..cubes)
        .map(|u| {
            (0..cubes)
                .map(|n| a[n][u].powf(pf / 2.0))
                .sum::<f64>()
                .powf(1.0 / pf)
        })
        .sum();
    let a_total: f64 = a.iter().flatten().sum();
    let direct: f64 = (0..grid.len())
        .into_par_iter()
        .map(|xi| {
            let x: Vec<i64> = grid.coords(xi).iter().map(|&c| c as i64).collect();
            ctx.support
                .iter()
                .map(|(y, kv, _, _)| (ctx.product(&x, y) * kv).norm_sqr())
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * w
        * w;
    let mut report = ChainReport::new(vec![q1, q2, q3]);
    report.bookkeeping = Some((a_total, direct));
    Ok(report)
}

/// `‖T(f)‖_p / (B Π ‖f_j‖_{p_j})`, the empirical size of the constant in
/// the square function bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Ratio {
    pub p: Exponent,
    pub lhs: f64,
    /// `B_2` for `p >= 2`, `B_p` otherwise, from the analytic kernel.
    pub b: f64,
    pub b_exponent: Exponent,
    pub f_norms: Vec<f64>,
    pub ratio: f64,
}

pub fn theorem1_ratio(
    fs: &[&SampledFunction],
    k: &SampledKernel,
    theta: &ThetaVector,
    ps: &[Exponent],
) -> Result<Theorem1Ratio> {
    let p = chain_exponent(ps)?;
    let two = Exponent::integer(2)?;
    if ps.iter().any(|pj| *pj < two) {
        return Err(SqfnError::Precondition("needs 2 <= p_j < inf".into()));
    }
    if ps.len() != fs.len() {
        return Err(ConvolveError::Arity {
            expected: fs.len(),
            got: ps.len(),
        }
        .into());
    }
    let grid = *k.grid();
    let exact = square_function_exact(fs, k, theta)?;
    let lhs = grid::lp_norm(&exact, p)?;
    // the kernel sits inside [-L/2, L/2]^d, so cubes up to ceil(L/2) cover it
    let trunc = grid.period().div_ceil(2) as u32;
    let bc = kernels::b_constant_with_resolution(
        k.spec(),
        grid.dim(),
        p,
        trunc,
        kernels::resolution_for_dim(grid.dim()),
    )?;
    let f_norms = fs
        .iter()
        .zip(ps)
        .map(|(f, pj)| grid::lp_norm(f, *pj))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let denom = bc.value * f_norms.iter().product::<f64>();
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / denom };
    Ok(Theorem1Ratio {
        p,
        lhs,
        b: bc.value,
        b_exponent: bc.exponent_used,
        f_norms,
        ratio,
    })
}
