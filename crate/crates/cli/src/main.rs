use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mlsq_core::convolve::{self, YoungCheckResult, YoungConstant};
use mlsq_core::exponents::{self, Exponent};
use mlsq_core::harness::{self, instance_seed, ExperimentConfig, Objective, VerificationReport};
use mlsq_core::kernels::{self, KernelSpec};

#[derive(Parser)]
#[command(
    name = "mlsq",
    version,
    about = "Checks multilinear square-function and Young-type inequalities on a discretized torus"
)]
struct Cli {
    /// Overrides the seed of the config or subcommand.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Endpoint vertices of the exponent polytope, as exact reciprocals.
    Vertices {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: Exponent,
    },
    /// Kernel block-norm constant B_p truncated to [-U, U)^d.
    Bconst {
        #[arg(long)]
        kernel: String,
        /// Comma separated `key=value` kernel parameters.
        #[arg(long, default_value = "")]
        param: String,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        trunc: u32,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Quadrature points per unit per axis.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Multilinear Young inequality on random compactly supported data.
    Young {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        theta: String,
        /// Comma separated exponents p_1..p_m.
        #[arg(long)]
        p: String,
        #[arg(long)]
        r: Exponent,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        period: usize,
        #[arg(long, default_value_t = 32)]
        points_per_unit: usize,
        #[arg(long, default_value_t = 2)]
        bandlimit: usize,
        #[arg(long)]
        slack: Option<f64>,
    },
    /// Pointwise bound, duality and chain checks from a config file.
    SqfnVerify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Truncated, exact and majorant square functions of one instance, as CSV.
    SqfnEval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        instance: usize,
    },
    /// Searches for inputs with a large ratio.
    RatioSearch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        objective: Objective,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Runs a list of checks; defaults to `[run] checks`, then to all of them.
    Suite {
        #[arg(long)]
        config: PathBuf,
        /// Comma separated check names.
        #[arg(long)]
        checks: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns false when an asserted check failed.
fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Vertices { m, r } => {
            let verts = exponents::endpoint_vertices(*m, *r)?;
            let text = match cli.format {
                Format::Json => {
                    let rows: Vec<Vec<String>> = verts.iter().map(|v| v.to_strings()).collect();
                    json_text(&json!({ "m": m, "r": r.to_string(), "vertices": rows }))
                }
                Format::Csv => {
                    let mut s = (1..=*m)
                        .map(|i| format!("x{i}"))
                        .collect::<Vec<_>>()
                        .join(",");
                    s.push('\n');
                    for v in &verts {
                        let _ = writeln!(s, "{}", v.to_strings().join(","));
                    }
                    s
                }
            };
            emit(cli, "vertices", &text)?;
            Ok(true)
        }
        Command::Bconst {
            kernel,
            param,
            p,
            trunc,
            dim,
            resolution,
        } => {
            let spec = KernelSpec::from_name_params(kernel, &parse_params(param)?)?;
            let res = resolution.unwrap_or_else(|| kernels::resolution_for_dim(*dim));
            let b = kernels::b_constant_with_resolution(&spec, *dim, *p, *trunc, res)?;
            let text = match cli.format {
                Format::Json => json_text(&json!({
                    "p": b.p.to_string(),
                    "exponent_used": b.exponent_used.to_string(),
                    "U": b.trunc,
                    "value": b.value,
                    "last_shell": b.last_shell,
                })),
                Format::Csv => format!(
                    "p,exponent_used,U,value,last_shell\n{},{},{},{:e},{:e}\n",
                    b.p, b.exponent_used, b.trunc, b.value, b.last_shell
                ),
            };
            emit(cli, "bconst", &text)?;
            Ok(true)
        }
        Command::Young {
            m,
            theta,
            p,
            r,
            instances,
            dim,
            period,
            points_per_unit,
            bandlimit,
            slack,
        } => {
            let thetas = harness::config::parse_int_list(theta).map_err(anyhow::Error::msg)?;
            let ps = harness::config::parse_exponent_list(p).map_err(anyhow::Error::msg)?;
            if thetas.len() != *m || ps.len() != *m {
                bail!("--theta and --p need {m} entries each");
            }
            let text = format!(
                "[grid]\ndim={dim}\nperiod={period}\npoints_per_unit={points_per_unit}\n\
                 [kernel]\nname=cube\n[theta]\nvalues={theta}\n[exponents]\nyoung={p}\nr={r}\n\
                 [run]\nseed={}\ninstances={instances}\nbandlimit={bandlimit}\n",
                cli.seed.unwrap_or(0)
            );
            let mut config = ExperimentConfig::parse(&text)?;
            if let Some(s) = slack {
                config.tolerances.inequality_slack = *s;
            }
            let mut rows = Vec::with_capacity(*instances);
            for k in 0..*instances {
                let inst = harness::generate_compact_instance(&config, k)?;
                let fs: Vec<_> = inst.fs.iter().collect();
                let res = convolve::young_check(
                    &fs,
                    &inst.g,
                    &config.theta,
                    &config.young,
                    config.r,
                    config.tolerances.inequality_slack,
                )?;
                rows.push((instance_seed(config.seed, k), res));
            }
            let ok = rows
                .iter()
                .all(|(_, r)| r.pass || r.constant_kind == YoungConstant::Empirical);
            let text = match cli.format {
                Format::Json => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|(seed, r)| json!({ "instance_seed": seed, "result": r }))
                        .collect();
                    json_text(&json!(items))
                }
                Format::Csv => young_csv(&rows),
            };
            emit(cli, "young", &text)?;
            Ok(ok)
        }
        Command::SqfnVerify { config } => {
            let config = load(config, cli.seed)?;
            let checks: Vec<String> = ["claim21", "duality", "case1", "case2prefix"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            report(cli, &harness::run_suite(&config, &checks)?)
        }
        Command::SqfnEval { config, instance } => {
            let config = load(config, cli.seed)?;
            let (t, e, m) = harness::evaluate_square_function(&config, *instance)?;
            emit(cli, "sqfn", &harness::square_function_csv(&t, &e, &m))?;
            Ok(true)
        }
        Command::RatioSearch {
            config,
            objective,
            budget,
        } => {
            let config = load(config, cli.seed)?;
            let trace = harness::ratio_search(&config, *objective, *budget)?;
            let text = match cli.format {
                Format::Json => {
                    json_text(&json!({ "config_digest": config.digest(), "trace": trace }))
                }
                Format::Csv => {
                    let mut s = String::from("evaluation,best_ratio\n");
                    for (i, v) in trace.curve.iter().enumerate() {
                        let _ = writeln!(s, "{},{v:e}", i + 1);
                    }
                    s
                }
            };
            emit(cli, "search", &text)?;
            Ok(true)
        }
        Command::Suite { config, checks } => {
            let config = load(config, cli.seed)?;
            let checks: Vec<String> = match checks {
                Some(list) => list
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
                None if !config.checks.is_empty() => config.checks.clone(),
                None => harness::CHECKS.iter().map(|s| s.to_string()).collect(),
            };
            report(cli, &harness::run_suite(&config, &checks)?)
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let config =
        ExperimentConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match seed {
        Some(s) => config.with_seed(s),
        None => config,
    })
}

fn parse_params(s: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let Some((k, v)) = item.split_once('=') else {
            bail!("kernel parameter {item:?} is not key=value");
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn young_csv(rows: &[(u64, YoungCheckResult)]) -> String {
    let mut s = String::from(
        "instance_seed,p,q,r,lhs,g_norm,g_norm_kind,constant,constant_kind,ratio,pass\n",
    );
    for (seed, r) in rows {
        let kind = match r.constant_kind {
            YoungConstant::Endpoint => "endpoint".to_string(),
            YoungConstant::Vertex { a, b } => format!("vertex({};{})", a + 1, b + 1),
            YoungConstant::Empirical => "empirical".to_string(),
        };
        let gk = serde_json::to_value(r.g_norm_kind).expect("serializes");
        let _ = writeln!(
            s,
            "{seed},{},{},{},{:e},{:e},{},{:e},{kind},{:e},{}",
            r.p,
            r.q,
            r.r,
            r.lhs,
            r.g_norm,
            gk.as_str().unwrap_or(""),
            r.constant,
            r.ratio,
            r.pass
        );
    }
    s
}

/// Writes `<stem>.json|csv` under `--out`, or prints to stdout.
fn emit(cli: &Cli, stem: &str, text: &str) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let ext = match cli.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            let path = dir.join(format!("{stem}.{ext}"));
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn report(cli: &Cli, rep: &VerificationReport) -> Result<bool> {
    match &cli.out {
        Some(dir) => rep
            .write(dir)
            .with_context(|| format!("writing report to {}", dir.display()))?,
        None => match cli.format {
            Format::Json => print!("{}", rep.to_json()),
            Format::Csv => print!("{}", rep.to_csv()),
        },
    }
    for a in &rep.aggregates {
        eprintln!(
            "{:<18} {:>4}/{:<4} max ratio {:.6e}",
            a.check, a.pass_count, a.count, a.max_ratio
        );
    }
    Ok(!rep.failed())
}
