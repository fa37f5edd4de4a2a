//! Subcommand implementations. Every command writes its artifact
//! atomically and prints a short human summary; computed cross-checks
//! that fail surface as verification failures with exit code 1.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use ostar_core::moments::{
    distribution, dyadic_profile, dyadic_weight_inequality_holds, exponent_fit, markov_check,
    moment_sum, moment_via_tuples, p_k_count, ratio_table, MomentRecord,
};
use ostar_core::multfunc::{average, kappa_fit, MultFuncSpec};
use ostar_core::sieves::{OmegaStarTable, SieveConfig};
use ostar_core::verify::{
    decomposition_campaign, gk_campaign, lcm_identity_campaign, profile_enumeration_campaign,
    psi_campaign, tuple_profile_campaign, CheckReport,
};

use crate::output::{csv, json_rows, sig12, write_atomic};

/// A failed verification: the computation ran, the claimed property did
/// not hold. Distinct from usage and resource errors.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub struct Ctx {
    pub seed: u64,
    pub budget: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub sieve: SieveConfig,
}

impl Ctx {
    /// Writes to `--out` if given, otherwise prints to stdout.
    fn emit(&self, content: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_atomic(path, content.as_bytes()),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

pub fn cmd_omega(ctx: &Ctx, x: u64, dump: Option<&Path>) -> Result<()> {
    let table = OmegaStarTable::build(x, &ctx.sieve)?;
    let s1 = moment_sum(&table, 1)?;
    let (max, argmax) = table.max_and_argmax();
    println!("x = {x}");
    println!("S_1 = {}", s1.sum);
    println!("max omega_star = {max} at n = {argmax}");
    if let Some(path) = dump {
        table.dump_to_path(path)?;
        println!("table dumped to {}", path.display());
    }
    Ok(())
}

fn moment_rows_csv(records: &[MomentRecord]) -> String {
    csv(
        "x,k,sum,ratio",
        records
            .iter()
            .map(|r| format!("{},{},{},{}", r.x, r.k, r.sum, sig12(r.ratio))),
    )
}

fn moment_rows_json(records: &[MomentRecord]) -> String {
    json_rows(
        records
            .iter()
            .map(|r| {
                json!({
                    "x": r.x,
                    "k": r.k,
                    "sum": r.sum.to_string(),
                    "ratio": sig12(r.ratio),
                })
            })
            .collect(),
    )
}

pub fn cmd_moments(ctx: &Ctx, x_grid: &[u64], ks: &[u32]) -> Result<()> {
    let x_max = *x_grid.last().expect("validated grid");
    let table = OmegaStarTable::build(x_max, &ctx.sieve)?;
    let records = ratio_table(&table, ks, x_grid)?;
    let content = match ctx.format {
        OutputFormat::Csv => moment_rows_csv(&records),
        OutputFormat::Json => moment_rows_json(&records),
    };
    ctx.emit(&content)
}

pub fn cmd_pk(ctx: &Ctx, x: u64, k: u32) -> Result<()> {
    let count = p_k_count(x, k, ctx.budget, &ctx.sieve)?;
    let tuple_route = moment_via_tuples(x, k, ctx.budget, &ctx.sieve)?;
    let table = OmegaStarTable::build(x, &ctx.sieve)?;
    let table_route = moment_sum(&table, k)?.sum;
    println!("P_{k}({x}) = {count}");
    println!("identity check: {tuple_route} = {table_route}");
    if tuple_route != table_route {
        bail!(VerificationFailed(format!(
            "tuple route {tuple_route} != table route {table_route} at x={x}, k={k}"
        )));
    }
    println!("moment/tuple identity holds");
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VerifyCheck {
    /// Alternating gcd-product identity on random tuples.
    LcmIdentity,
    /// Subset decomposition invariants and chain products on random tuples.
    Decomposition,
    /// Profile consistency, M_i gcds and both D routes on random tuples.
    TupleProfiles,
    /// Exhaustive prime-power profile enumeration and counting.
    ProfileEnumeration,
    /// Injectivity of the pairwise-minima map, exhaustive.
    PsiInjectivity,
    /// Exact profile-weight sums at primes against the closed form.
    GkAtPrimes,
    /// Everything above at its default parameters.
    All,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_verify(
    ctx: &Ctx,
    check: VerifyCheck,
    ks: Option<Vec<u32>>,
    trials: u64,
    primes: &[u64],
    max_exp: u32,
    t_max: u64,
) -> Result<()> {
    let ks_or = |default: Vec<u32>| ks.clone().unwrap_or(default);
    let mut reports: Vec<CheckReport> = Vec::new();
    let run = |check: VerifyCheck, reports: &mut Vec<CheckReport>| -> Result<()> {
        match check {
            VerifyCheck::LcmIdentity => {
                for k in ks_or((2..=6).collect()) {
                    reports.push(lcm_identity_campaign(k as usize, trials, ctx.seed, t_max)?);
                }
            }
            VerifyCheck::Decomposition => {
                for k in ks_or((2..=6).collect()) {
                    reports.push(decomposition_campaign(k as usize, trials, ctx.seed, t_max)?);
                }
            }
            VerifyCheck::TupleProfiles => {
                for k in ks_or((2..=8).collect()) {
                    reports.push(tuple_profile_campaign(k as usize, trials, ctx.seed, t_max)?);
                }
            }
            VerifyCheck::ProfileEnumeration => {
                for k in ks_or((2..=6).collect()) {
                    reports.push(profile_enumeration_campaign(k as usize, primes, max_exp)?);
                }
            }
            VerifyCheck::PsiInjectivity => {
                for k in ks_or((3..=12).collect()) {
                    reports.push(psi_campaign(k as usize)?);
                }
            }
            VerifyCheck::GkAtPrimes => {
                for k in ks_or((2..=6).collect()) {
                    reports.push(gk_campaign(k as usize, primes)?);
                }
            }
            VerifyCheck::All => unreachable!("expanded below"),
        }
        Ok(())
    };
    if check == VerifyCheck::All {
        for c in [
            VerifyCheck::LcmIdentity,
            VerifyCheck::Decomposition,
            VerifyCheck::TupleProfiles,
            VerifyCheck::ProfileEnumeration,
            VerifyCheck::PsiInjectivity,
            VerifyCheck::GkAtPrimes,
        ] {
            run(c, &mut reports)?;
        }
    } else {
        run(check, &mut reports)?;
    }

    for r in &reports {
        println!(
            "{} k={} trials={} failures={} -> {}",
            r.check,
            r.k,
            r.trials,
            r.failures,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    let mut content = serde_json::to_string_pretty(&reports)?;
    content.push('\n');
    if let Some(path) = &ctx.out {
        write_atomic(path, content.as_bytes())?;
    } else {
        print!("{content}");
    }
    let failed: u64 = reports.iter().map(|r| r.failures).sum();
    if failed > 0 {
        bail!(VerificationFailed(format!("{failed} failing trials")));
    }
    Ok(())
}

pub fn cmd_distribution(ctx: &Ctx, x: u64, y_grid: Option<Vec<u64>>, ks: &[u32]) -> Result<()> {
    let table = OmegaStarTable::build(x, &ctx.sieve)?;
    let y_grid = y_grid.unwrap_or_else(|| {
        // doubling grid up to the largest counter
        let max = table.counts().iter().copied().max().unwrap_or(1) as u64;
        let mut g = vec![];
        let mut y = 2;
        while y <= max {
            g.push(y);
            y *= 2;
        }
        if g.is_empty() {
            g.push(2);
        }
        g
    });
    let records = distribution(&table, &y_grid)?;
    let content = match ctx.format {
        OutputFormat::Csv => csv(
            "x,y,count",
            records
                .iter()
                .map(|r| format!("{},{},{}", r.x, r.y, r.count)),
        ),
        OutputFormat::Json => json_rows(
            records
                .iter()
                .map(|r| json!({ "x": r.x, "y": r.y, "count": r.count }))
                .collect(),
        ),
    };
    ctx.emit(&content)?;
    let markov = markov_check(&table, ks, &y_grid)?;
    println!("markov check (k in {ks:?}): {}", if markov { "pass" } else { "FAIL" });
    if !markov {
        bail!(VerificationFailed(format!("markov inequality violated at x={x}")));
    }
    Ok(())
}

pub fn cmd_profile(ctx: &Ctx, x: u64, j: u32) -> Result<()> {
    let table = OmegaStarTable::build(x, &ctx.sieve)?;
    let profile = dyadic_profile(&table, j)?;
    let content = match ctx.format {
        OutputFormat::Csv => csv(
            "level,count,weight_j",
            profile
                .levels
                .iter()
                .map(|l| format!("{},{},{}", l.level, l.count, sig12(l.weight))),
        ),
        OutputFormat::Json => json_rows(
            profile
                .levels
                .iter()
                .map(|l| json!({ "level": l.level, "count": l.count, "weight_j": sig12(l.weight) }))
                .collect(),
        ),
    };
    ctx.emit(&content)?;
    match profile.argmax_level {
        Some(l) => println!("argmax level = {l}"),
        None => println!("argmax level = none (no counts above 1)"),
    }
    let exact = dyadic_weight_inequality_holds(&table, j)?;
    println!("level-weight inequality: {}", if exact { "pass" } else { "FAIL" });
    if !exact {
        bail!(VerificationFailed(format!("level-weight inequality failed at x={x}, j={j}")));
    }
    Ok(())
}

/// Accepts a builtin name (`unit`, ...), inline JSON, or a path to a JSON
/// spec file.
pub fn parse_func_spec(s: &str) -> Result<MultFuncSpec> {
    match s {
        "unit" => return Ok(MultFuncSpec::Unit),
        "squarefree" => return Ok(MultFuncSpec::SquarefreeIndicator),
        _ => {}
    }
    if let Some(l) = s.strip_prefix("tau_l:") {
        return Ok(MultFuncSpec::TauL { l: l.parse().context("tau_l order")? });
    }
    if let Some(p) = s.strip_prefix("phi_ratio_power:") {
        return Ok(MultFuncSpec::PhiRatioPower { s: p.parse().context("power")? });
    }
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        std::fs::read_to_string(s).with_context(|| format!("reading spec file {s:?}"))?
    };
    serde_json::from_str(&text).context("parsing function spec JSON")
}

pub fn cmd_wirsing(ctx: &Ctx, spec: &MultFuncSpec, x_grid: &[u64]) -> Result<()> {
    let series = average(spec, x_grid, &ctx.sieve)?;
    // kappa_hat per row: fitted over the points up to that row; blank
    // until two points are available.
    let mut kappas: Vec<Option<f64>> = Vec::with_capacity(series.points.len());
    for i in 0..series.points.len() {
        let prefix = ostar_core::multfunc::AverageSeries {
            points: series.points[..=i].to_vec(),
        };
        kappas.push(kappa_fit(&prefix).map(|f| f.slope));
    }
    let content = match ctx.format {
        OutputFormat::Csv => csv(
            "x,sum,kappa_hat",
            series.points.iter().zip(&kappas).map(|(&(x, s), k)| {
                format!(
                    "{},{},{}",
                    x,
                    sig12(s),
                    k.map(sig12).unwrap_or_default()
                )
            }),
        ),
        OutputFormat::Json => json_rows(
            series
                .points
                .iter()
                .zip(&kappas)
                .map(|(&(x, s), k)| {
                    json!({ "x": x, "sum": sig12(s), "kappa_hat": k.map(sig12) })
                })
                .collect(),
        ),
    };
    ctx.emit(&content)
}

/// Reads a moments CSV back and fits the growth exponent per moment order.
pub fn cmd_fit(ctx: &Ctx, input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "x,k,sum,ratio" {
        bail!("expected header x,k,sum,ratio in {}", input.display());
    }
    let mut records: Vec<MomentRecord> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            bail!("malformed row {line:?}");
        }
        records.push(MomentRecord {
            x: fields[0].parse().context("x field")?,
            k: fields[1].parse().context("k field")?,
            sum: fields[2].parse().context("sum field")?,
            ratio: 0.0, // not needed for the fit
        });
    }
    let mut ks: Vec<u32> = records.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut rows_csv = Vec::new();
    let mut rows_json = Vec::new();
    for k in ks {
        let mut group: Vec<MomentRecord> =
            records.iter().filter(|r| r.k == k).cloned().collect();
        group.sort_by_key(|r| r.x);
        match exponent_fit(&group) {
            Some(fit) => {
                println!("k = {k}: slope = {:.6}, intercept = {:.6}", fit.slope, fit.intercept);
                rows_csv.push(format!("{},{},{}", k, sig12(fit.slope), sig12(fit.intercept)));
                rows_json.push(json!({
                    "k": k,
                    "slope": sig12(fit.slope),
                    "intercept": sig12(fit.intercept),
                }));
            }
            None => bail!("fit rejected for k = {k}: need at least two grid points"),
        }
    }
    let content = match ctx.format {
        OutputFormat::Csv => csv("k,slope,intercept", rows_csv),
        OutputFormat::Json => json_rows(rows_json),
    };
    match &ctx.out {
        Some(path) => write_atomic(path, content.as_bytes()),
        None => Ok(()), // slopes already printed
    }
}
