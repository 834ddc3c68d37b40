//! Configuration, random instances, the ratio search and the check suite.

pub mod config;
pub mod instance;
pub mod report;
pub mod search;

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::convolve::{self, ConvolveError, YoungConstant};
use crate::exponents::{self, Exponent, ExponentError};
use crate::grid::{self, GridError, SampledFunction};
use crate::kernels::{self, KernelError, SampledKernel};
use crate::sqfn::{self, SqfnError};

pub use config::{ConfigError, ExperimentConfig, Tolerances};
pub use instance::{generate_compact_instance, generate_instance, instance_seed, InstanceError};
pub use report::{Aggregate, Record, VerificationReport};
pub use search::{ratio_search, Objective, SearchTrace};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
    #[error("unknown objective {0:?}; expected theorem1 or young")]
    UnknownObjective(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Convolve(#[from] ConvolveError),
    #[error(transparent)]
    Sqfn(#[from] SqfnError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub const CHECKS: &[&str] = &[
    "bconst",
    "young",
    "claim21",
    "duality",
    "case1",
    "case2prefix",
    "theorem1",
    "vertices",
    "hull",
];

/// RNG stream for duality coefficient sequences, apart from instance data.
const DUALITY_STREAM: u64 = 2;

/// Runs the named checks in order and collects their records.
pub fn run_suite(config: &ExperimentConfig, checks: &[String]) -> Result<VerificationReport> {
    if let Some(bad) = checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(HarnessError::UnknownCheck(bad.clone()));
    }
    let mut records = Vec::new();
    for check in checks {
        log::info!("running {check}");
        let mut recs = match check.as_str() {
            "bconst" => check_bconst(config)?,
            "young" => per_instance(config, check_young)?,
            "claim21" => per_instance(config, check_claim21)?,
            "duality" => per_instance(config, check_duality)?
                .into_iter()
                .flatten()
                .collect(),
            "case1" => per_instance(config, check_case1)?,
            "case2prefix" => per_instance(config, check_case2)?,
            "theorem1" => per_instance(config, check_theorem1)?,
            "vertices" => check_vertices(config)?,
            "hull" => check_hull(config)?,
            _ => unreachable!("names validated above"),
        };
        records.append(&mut recs);
    }
    Ok(VerificationReport::new(config.digest(), records))
}

/// Evaluates `f` on every instance in parallel, keeping instance order.
fn per_instance<T: Send>(
    config: &ExperimentConfig,
    f: impl Fn(&ExperimentConfig, usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..config.instances)
        .into_par_iter()
        .map(|k| f(config, k))
        .collect()
}

fn kernel(config: &ExperimentConfig) -> Result<SampledKernel> {
    Ok(kernels::sample_kernel(&config.kernel, config.grid)?)
}

fn refs(fs: &[SampledFunction]) -> Vec<&SampledFunction> {
    fs.iter().collect()
}

/// `Π ‖f_i‖_∞ · B_2(grid)`, the size of the right side of the pointwise bound.
fn pointwise_scale(fs: &[SampledFunction], k: &SampledKernel) -> Result<f64> {
    let b2 = kernels::grid_b_constant(k.samples(), Exponent::integer(2)?)?;
    Ok(fs.iter().map(SampledFunction::max_abs).product::<f64>() * b2)
}

/// Index maximizing `lhs(x) - rhs(x)`.
fn worst_point(lhs: &[f64], rhs: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..lhs.len() {
        if lhs[i] - rhs[i] > lhs[best] - rhs[best] {
            best = i;
        }
    }
    best
}

fn max_ratio(lhs: &[f64], rhs: &[f64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .filter(|(_, r)| **r > 0.0)
        .map(|(l, r)| l / r)
        .fold(0.0, f64::max)
}

fn moduli(f: &SampledFunction) -> Vec<f64> {
    f.values().iter().map(|v| v.norm()).collect()
}

fn check_bconst(config: &ExperimentConfig) -> Result<Vec<Record>> {
    let p = exponents::holder_exponent(&config.theorem1)?;
    let b = kernels::b_constant(&config.kernel, config.grid.dim(), p, config.trunc)?;
    let monotone = b.partial_sums.windows(2).all(|w| w[0] <= w[1]);
    let mut r = Record::new("bconst", config.seed, b.last_shell, b.value, 0.0);
    r.pass = monotone && b.value.is_finite();
    r.constant = Some(b.value);
    r.note = Some(format!(
        "p={} exponent_used={} U={}",
        b.p, b.exponent_used, b.trunc
    ));
    Ok(vec![r])
}

fn check_young(config: &ExperimentConfig, k: usize) -> Result<Record> {
    let inst = generate_compact_instance(config, k)?;
    let tol = config.tolerances.inequality_slack;
    let res = convolve::young_check(
        &refs(&inst.fs),
        &inst.g,
        &config.theta,
        &config.young,
        config.r,
        tol,
    )?;
    let rhs = res.constant * res.norm_product();
    let mut r = Record::new(
        "young",
        instance_seed(config.seed, k),
        res.lhs,
        rhs,
        tol * rhs,
    );
    r.ratio = res.ratio;
    r.pass = res.pass;
    r.constant = Some(res.constant);
    r.asserted = res.constant_kind != YoungConstant::Empirical;
    r.note = Some(match res.constant_kind {
        YoungConstant::Endpoint => format!("endpoint p=1 q={}", res.q),
        YoungConstant::Vertex { a, b } => format!("vertex a={} b={} q={}", a + 1, b + 1, res.q),
        YoungConstant::Empirical => format!("empirical q={}", res.q),
    });
    Ok(r)
}

fn check_claim21(config: &ExperimentConfig, k: usize) -> Result<Record> {
    let fs = generate_instance(config, k)?;
    let kern = kernel(config)?;
    let (exact, major) = sqfn::exact_and_majorant(&refs(&fs), &kern, &config.theta)?;
    let scale = pointwise_scale(&fs, &kern)?;
    let (e, m) = (moduli(&exact), moduli(&major));
    let x = worst_point(&e, &m);
    let tol = config.tolerances;
    let mut r = Record::new(
        "claim21",
        instance_seed(config.seed, k),
        e[x],
        m[x],
        tol.inequality_slack * scale,
    );
    r.ratio = max_ratio(&e, &m);
    let occupied = kernels::grid_block_norms(kern.samples(), Exponent::integer(2)?)?
        .iter()
        .filter(|b| **b > 0.0)
        .count();
    if occupied == 1 {
        // one cube: the bound is an equality
        let gap = exact.max_abs_diff(&major);
        r.pass &= gap <= tol.exact * scale;
        r.note = Some(format!("single cube, max |exact - majorant| = {gap:e}"));
    }
    Ok(r)
}

/// Unit-norm sequence on distinct frequencies of `[-R', R']^d`, where
/// `R' = min(R, (n-1)/2)` keeps them distinct modulo `n`.
fn random_sequence(config: &ExperimentConfig, k: usize) -> BTreeMap<Vec<i64>, Complex64> {
    let mut rng = instance::instance_rng(config.seed, k);
    rng.set_stream(DUALITY_STREAM);
    let radius = config
        .lattice_radius
        .min((config.grid.points_per_unit() - 1) / 2) as i64;
    let mut pool = kernels::lattice_box(config.grid.dim(), -radius, radius + 1);
    pool.shuffle(&mut rng);
    pool.truncate(config.duality_terms.max(1));
    let mut a: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
    for ell in pool {
        a.insert(
            ell,
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    let norm = a.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        a.values_mut().for_each(|c| *c /= norm);
    }
    a
}

fn check_duality(config: &ExperimentConfig, k: usize) -> Result<Vec<Record>> {
    let fs = generate_instance(config, k)?;
    let kern = kernel(config)?;
    let a = random_sequence(config, k);
    let w = sqfn::duality_witness(&refs(&fs), &kern, &config.theta, &a)?;
    let major = sqfn::cube_majorant(&refs(&fs), &kern, &config.theta, None)?;
    let seed = instance_seed(config.seed, k);
    let tol = config.tolerances;

    let data = w.integralside.max_abs().max(w.sumside.max_abs());
    let disc = w.sumside.max_abs_diff(&w.integralside);
    let mut identity = Record::new("duality/identity", seed, disc, tol.duality * data, 0.0);
    identity.ratio = w.relative_discrepancy();
    identity.note = Some(format!("{} terms", a.len()));

    let lhs = moduli(&w.sumside);
    let rhs: Vec<f64> = moduli(&major).iter().map(|m| w.a_norm * m).collect();
    let x = worst_point(&lhs, &rhs);
    let scale = pointwise_scale(&fs, &kern)? * w.a_norm;
    let mut bound = Record::new(
        "duality/bound",
        seed,
        lhs[x],
        rhs[x],
        tol.inequality_slack * scale,
    );
    bound.ratio = max_ratio(&lhs, &rhs);
    Ok(vec![identity, bound])
}

fn chain_record(check: &str, seed: u64, chain: &sqfn::ChainReport, slack_factor: f64) -> Record {
    let first = chain.values[0];
    let last = *chain.values.last().expect("nonempty chain");
    let mut r = Record::new(check, seed, first, last, slack_factor * chain.scale);
    r.pass = chain.holds(slack_factor);
    r.chain = Some(chain.values.clone());
    r
}

fn check_case1(config: &ExperimentConfig, k: usize) -> Result<Record> {
    let fs = generate_instance(config, k)?;
    let kern = kernel(config)?;
    let chain = sqfn::verify_case1_chain(&refs(&fs), &kern, &config.theta, &config.case1)?;
    let mut r = chain_record(
        "case1",
        instance_seed(config.seed, k),
        &chain,
        config.tolerances.inequality_slack,
    );
    r.constant = chain.b_grid;
    Ok(r)
}

fn check_case2(config: &ExperimentConfig, k: usize) -> Result<Record> {
    let fs = generate_instance(config, k)?;
    let kern = kernel(config)?;
    let chain = sqfn::verify_case2_prefix(&refs(&fs), &kern, &config.theta, &config.case2)?;
    let tol = config.tolerances;
    let mut r = chain_record(
        "case2prefix",
        instance_seed(config.seed, k),
        &chain,
        tol.inequality_slack,
    );
    let err = chain.bookkeeping_error().unwrap_or(0.0);
    r.pass &= err <= tol.bookkeeping;
    r.note = Some(format!("bookkeeping relative error {err:e}"));
    Ok(r)
}

fn check_theorem1(config: &ExperimentConfig, k: usize) -> Result<Record> {
    let fs = generate_instance(config, k)?;
    let kern = kernel(config)?;
    let t = sqfn::theorem1_ratio(&refs(&fs), &kern, &config.theta, &config.theorem1)?;
    let rhs = t.b * t.f_norms.iter().product::<f64>();
    let mut r = Record::new("theorem1", instance_seed(config.seed, k), t.lhs, rhs, 0.0);
    r.ratio = t.ratio;
    r.constant = Some(t.b);
    r.asserted = false;
    r.pass = t.ratio.is_finite();
    r.note = Some(format!("B exponent {}", t.b_exponent));
    Ok(r)
}

/// The vertex sets need three functions; smaller `m` is recorded, not judged.
fn below_three(check: &str, config: &ExperimentConfig, m: usize) -> Record {
    let mut r = Record::new(check, config.seed, 0.0, 0.0, 0.0);
    r.asserted = false;
    r.note = Some(format!("skipped: m={m} < 3"));
    r
}

fn check_vertices(config: &ExperimentConfig) -> Result<Vec<Record>> {
    let m = config.theta.m();
    if m < 3 {
        return Ok(vec![below_three("vertices", config, m)]);
    }
    let r = config.r;
    let verts = exponents::endpoint_vertices(m, r)?;
    let expected = if r.is_infinite() {
        m * (m - 1) / 2
    } else {
        m * (m - 1)
    };
    let level = Rational64::from_integer(1) + exponents::dual(r)?.reciprocal();
    let on_slice = verts
        .iter()
        .all(|v| v.sum() == level && exponents::is_slice_vertex(v));
    let slice = exponents::slice_vertices(m, level);
    let same_set = slice.len() == verts.len() && verts.iter().all(|v| slice.contains(v));
    let mut rec = Record::new(
        "vertices",
        config.seed,
        verts.len() as f64,
        expected as f64,
        0.0,
    );
    rec.pass = verts.len() == expected && on_slice && same_set;
    rec.note = Some(format!("m={m} r={r}"));
    Ok(vec![rec])
}

fn check_hull(config: &ExperimentConfig) -> Result<Vec<Record>> {
    let m = config.theta.m();
    if m < 3 {
        return Ok(vec![below_three("hull", config, m)]);
    }
    let (q, r) = (config.q, config.r);
    let theta = exponents::interpolation_parameter(q, r)?;
    let level = q.reciprocal() + exponents::dual(r)?.reciprocal();
    let mut out = Vec::new();
    for (idx, z) in exponents::slice_vertices(m, level).iter().enumerate() {
        let dec = exponents::hull_decompose(z, q, r)?;
        let ok = match dec {
            Some((j, i)) => exponents::recombine(m, q, r, j, i)? == *z,
            None => false,
        };
        let mut rec = Record::new("hull", idx as u64, if ok { 1.0 } else { 0.0 }, 1.0, 0.0);
        rec.pass = ok;
        rec.ratio = rec.lhs;
        rec.note = Some(match dec {
            Some((j, i)) => format!(
                "Z=({}) = (1-t)U{} + tV{} with t={}",
                z.to_strings().join(","),
                j + 1,
                i + 1,
                theta
            ),
            None => format!("Z=({}) has no decomposition", z.to_strings().join(",")),
        });
        out.push(rec);
    }
    Ok(out)
}

/// Truncated and exact square functions with the cube majorant, for CSV dumps.
pub fn evaluate_square_function(
    config: &ExperimentConfig,
    k: usize,
) -> Result<(SampledFunction, SampledFunction, SampledFunction)> {
    let fs = generate_instance(config, k)?;
    let kern = kernel(config)?;
    let lattice = sqfn::ModulationLattice::new(config.grid.dim(), config.lattice_radius);
    let trunc = sqfn::square_function_truncated(&refs(&fs), &kern, &config.theta, lattice)?;
    let (exact, major) = sqfn::exact_and_majorant(&refs(&fs), &kern, &config.theta)?;
    Ok((trunc, exact, major))
}

/// CSV with columns `x1..xd,truncated,exact,majorant`.
pub fn square_function_csv(
    trunc: &SampledFunction,
    exact: &SampledFunction,
    major: &SampledFunction,
) -> String {
    use std::fmt::Write as _;
    let g = trunc.grid();
    let cols: Vec<String> = (1..=g.dim()).map(|a| format!("x{a}")).collect();
    let mut s = format!("{},truncated,exact,majorant\n", cols.join(","));
    for idx in 0..g.len() {
        let x: Vec<String> = g.point(idx).iter().map(f64::to_string).collect();
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e}",
            x.join(","),
            trunc.values()[idx].re,
            exact.values()[idx].re,
            major.values()[idx].re
        );
    }
    s
}

/// `‖f‖_p` for every function of an instance, for CLI summaries.
pub fn instance_norms(fs: &[SampledFunction], ps: &[Exponent]) -> Result<Vec<f64>> {
    Ok(fs
        .iter()
        .zip(ps)
        .map(|(f, p)| grid::lp_norm(f, *p))
        .collect::<std::result::Result<Vec<_>, _>>()?)
}
