//! `nekho`: command-line front end for the resonance-geometry toolkit.
//!
//! Subcommands cover the full pipeline: exponent/constant evaluation,
//! comparison with the classical exponents, maximal-lattice enumeration,
//! steepness spot-checks, resonance-atlas emission, parameter-relation and
//! covering-lemma verification, long-time integration, and trap tracing.
//!
//! Exit codes: 0 success, 1 verification failure (some check reported
//! "fail"), 2 usage or configuration error. Reports are JSON with sorted
//! keys and fixed float formatting, written atomically; identical config and
//! seed give byte-identical output.

mod config;
mod jsonfmt;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nekhoroshev_core::atlas::{
    coverage_check, fast_drift_disc, sample_block_points,
    sample_nonresonant_points, verify_diameter_lemma, verify_geometry, verify_nonoverlap,
    verify_small_divisors, AtlasContext, CoverageReport, DiameterReport, DivisorReport, Geometry,
    NonOverlapReport,
};
use nekhoroshev_core::constants::{
    derived_constants, epsilon_scales, exponents, nekhoroshev_1977_exponents,
    verify_parameter_relations, RelationCheck, RelationReport,
};
use nekhoroshev_core::dynamics::{
    confinement_report, drift_metrics, integrate, resonance_trace, Trajectory,
};
use nekhoroshev_core::lattice::{enumerate_maximal_lattices, Lattice};
use nekhoroshev_core::steepness::{check_steepness, SamplingConfig, Verdict};

use config::{parse_f64_list, ReportHeader, RunConfig};

const DEFAULT_BUDGET: u128 = 50_000_000;

#[derive(Parser)]
#[command(name = "nekho", version, about = "Resonance geometry and stability toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelProfileArgs {
    /// Model JSON file (h, f, domain).
    #[arg(long)]
    model: PathBuf,
    /// Steepness profile JSON file (indices, coefficients, delta, sigma,
    /// optional explicit envelope).
    #[arg(long)]
    profile: PathBuf,
}

#[derive(Args, Clone)]
struct ScaledGeometryArgs {
    /// Cutoff K of the scaled geometry.
    #[arg(long, default_value_t = 4.0)]
    k: f64,
    /// Covering margin m of the scaled geometry.
    #[arg(long, default_value_t = 0.08)]
    margin: f64,
    /// Enumeration and flood-fill budget.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent table and explicit constants for a model and profile.
    Constants {
        #[command(flatten)]
        mp: ModelProfileArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Improved exponents next to the classical nested ones.
    #[command(name = "compare-1977")]
    Compare1977 {
        #[command(flatten)]
        mp: ModelProfileArgs,
        /// Reject n < 5 instead of collapsing the nesting.
        #[arg(long)]
        strict: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate maximal K-lattices of one dimension.
    Lattices {
        #[arg(short)]
        n: usize,
        #[arg(short = 'K')]
        k: u32,
        #[arg(short)]
        j: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample the steepness inequality on random points and frames.
    Steepness {
        #[command(flatten)]
        mp: ModelProfileArgs,
        /// Domain sample count.
        #[arg(long, default_value_t = 25)]
        samples: usize,
        /// Comma-separated xi grid; defaults to delta * {1/4, 1/2, 1}.
        #[arg(long)]
        xi: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random frames per (point, dimension).
        #[arg(long, default_value_t = 4)]
        frames: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify a grid of action points into resonant blocks (scaled mode).
    Atlas {
        #[command(flatten)]
        mp: ModelProfileArgs,
        #[command(flatten)]
        geo: ScaledGeometryArgs,
        /// Grid points per axis over the domain ball.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// CSV output path (point, block dimension, lattice basis).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify the parameter relations and the covering-lemma suites.
    Verify {
        #[command(flatten)]
        mp: ModelProfileArgs,
        #[command(flatten)]
        geo: ScaledGeometryArgs,
        /// Evaluate the relations at eps = fraction * eps_star.
        #[arg(long, default_value_t = 0.5)]
        eps_fraction: f64,
        /// Explicit eps overriding --eps-fraction.
        #[arg(long)]
        eps: Option<f64>,
        /// Clamp for the relation-suite enumeration cutoff.
        #[arg(long, default_value_t = 5)]
        k_max: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Integrate the flow and compare action drift against the bound.
    Simulate {
        #[command(flatten)]
        mp: ModelProfileArgs,
        /// Comma-separated descending eps grid.
        #[arg(long)]
        eps: String,
        /// Comma-separated initial actions; defaults to the domain center.
        #[arg(long)]
        i0: Option<String>,
        /// Comma-separated initial angles; defaults to zero.
        #[arg(long)]
        phi0: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        stride: usize,
        /// Trajectory CSV path; one file per eps with an index suffix.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Trace resonance-trap episodes along one trajectory (scaled mode).
    Trace {
        #[command(flatten)]
        mp: ModelProfileArgs,
        #[command(flatten)]
        geo: ScaledGeometryArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        i0: Option<String>,
        #[arg(long)]
        phi0: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 50_000)]
        steps: usize,
        #[arg(long, default_value_t = 20)]
        stride: usize,
        /// Episode CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Combined report: constants, comparison, enumeration counts, and the
    /// verification suites.
    Report {
        #[command(flatten)]
        mp: ModelProfileArgs,
        #[command(flatten)]
        geo: ScaledGeometryArgs,
        #[arg(long, default_value_t = 0.5)]
        eps_fraction: f64,
        #[arg(long, default_value_t = 5)]
        k_max: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Constants { mp, output } => cmd_constants(&mp, output.as_deref()),
        Command::Compare1977 { mp, strict, output } => {
            cmd_compare(&mp, strict, output.as_deref())
        }
        Command::Lattices { n, k, j, budget, output } => {
            cmd_lattices(n, k, j, budget, output.as_deref())
        }
        Command::Steepness { mp, samples, xi, seed, frames, output } => {
            cmd_steepness(&mp, samples, xi.as_deref(), seed, frames, output.as_deref())
        }
        Command::Atlas { mp, geo, grid, csv, output } => {
            cmd_atlas(&mp, &geo, grid, csv.as_deref(), output.as_deref())
        }
        Command::Verify { mp, geo, eps_fraction, eps, k_max, seed, output } => {
            cmd_verify(&mp, &geo, eps_fraction, eps, k_max, seed, output.as_deref())
        }
        Command::Simulate { mp, eps, i0, phi0, dt, steps, stride, csv, output } => cmd_simulate(
            &mp,
            &eps,
            i0.as_deref(),
            phi0.as_deref(),
            dt,
            steps,
            stride,
            csv.as_deref(),
            output.as_deref(),
        ),
        Command::Trace { mp, geo, eps, i0, phi0, dt, steps, stride, csv, output } => cmd_trace(
            &mp,
            &geo,
            eps,
            i0.as_deref(),
            phi0.as_deref(),
            dt,
            steps,
            stride,
            csv.as_deref(),
            output.as_deref(),
        ),
        Command::Report { mp, geo, eps_fraction, k_max, seed, output } => {
            cmd_report(&mp, &geo, eps_fraction, k_max, seed, output.as_deref())
        }
    }
}

struct Loaded {
    model: nekhoroshev_core::model::HamiltonianModel,
    profile: nekhoroshev_core::steepness::SteepnessProfile,
    spec: config::ProfileSpec,
    env: nekhoroshev_core::constants::AnalyticityEnvelope,
}

fn load(mp: &ModelProfileArgs) -> Result<Loaded> {
    let model = config::load_model(&mp.model)?;
    let (profile, spec) = config::load_profile(&mp.profile)?;
    if profile.n != model.n {
        bail!("profile dimension {} does not match model dimension {}", profile.n, model.n);
    }
    let env = config::resolve_envelope(&model, &profile, &spec)?;
    Ok(Loaded { model, profile, spec, env })
}

fn base_config(name: &str, mp: &ModelProfileArgs, seed: u64, budget: u128) -> RunConfig {
    let mut cfg = RunConfig::new(name, seed, budget);
    cfg.model_path = Some(mp.model.clone());
    cfg.profile_path = Some(mp.profile.clone());
    cfg
}

fn emit_report<T: Serialize>(output: Option<&std::path::Path>, report: &T) -> Result<()> {
    let text = jsonfmt::to_canonical_string(report)?;
    jsonfmt::emit(output, &text)
}

fn cmd_constants(mp: &ModelProfileArgs, output: Option<&std::path::Path>) -> Result<u8> {
    let loaded = load(mp)?;
    let cfg = base_config("constants", mp, 0, DEFAULT_BUDGET);
    cfg.validate()?;
    let table = exponents(loaded.profile.n, &loaded.profile.alphas)?;
    let consts = derived_constants(&loaded.profile, &loaded.env)?;

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        profile: config::ProfileSpec,
        envelope: nekhoroshev_core::constants::AnalyticityEnvelope,
        exponents: nekhoroshev_core::constants::ExponentTable,
        constants: nekhoroshev_core::constants::ConstantSet,
    }
    emit_report(
        output,
        &Out {
            header: ReportHeader::for_config(&cfg)?,
            profile: loaded.spec,
            envelope: loaded.env,
            exponents: table,
            constants: consts,
        },
    )?;
    Ok(0)
}

fn cmd_compare(mp: &ModelProfileArgs, strict: bool, output: Option<&std::path::Path>) -> Result<u8> {
    let loaded = load(mp)?;
    let mut cfg = base_config("compare-1977", mp, 0, DEFAULT_BUDGET);
    cfg.options.insert("strict".into(), strict as u64 as f64);
    cfg.validate()?;
    let table = exponents(loaded.profile.n, &loaded.profile.alphas)?;
    let old = nekhoroshev_1977_exponents(loaded.profile.n, &loaded.profile.alphas, strict)?;

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        exponents: nekhoroshev_core::constants::ExponentTable,
        classical: nekhoroshev_core::constants::Exponents1977,
    }
    emit_report(
        output,
        &Out { header: ReportHeader::for_config(&cfg)?, exponents: table, classical: old },
    )?;
    Ok(0)
}

fn cmd_lattices(
    n: usize,
    k: u32,
    j: usize,
    budget: u128,
    output: Option<&std::path::Path>,
) -> Result<u8> {
    let mut cfg = RunConfig::new("lattices", 0, budget);
    cfg.options.insert("n".into(), n as f64);
    cfg.options.insert("K".into(), k as f64);
    cfg.options.insert("j".into(), j as f64);
    cfg.validate()?;
    let lattices = enumerate_maximal_lattices(n, k, j, budget)?;

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        n: usize,
        k: u32,
        j: usize,
        count: usize,
        lattices: Vec<Lattice>,
    }
    let count = lattices.len();
    emit_report(
        output,
        &Out { header: ReportHeader::for_config(&cfg)?, n, k, j, count, lattices },
    )?;
    if output.is_some() {
        println!("{count}");
    }
    Ok(0)
}

fn cmd_steepness(
    mp: &ModelProfileArgs,
    samples: usize,
    xi: Option<&str>,
    seed: u64,
    frames: usize,
    output: Option<&std::path::Path>,
) -> Result<u8> {
    use rand::{Rng, SeedableRng};
    let loaded = load(mp)?;
    let mut cfg = base_config("steepness", mp, seed, DEFAULT_BUDGET);
    cfg.options.insert("samples".into(), samples as f64);
    cfg.options.insert("frames".into(), frames as f64);
    cfg.validate()?;

    let delta = loaded.profile.delta;
    let xi_grid = match xi {
        Some(s) => parse_f64_list(s)?,
        None => vec![delta / 4.0, delta / 2.0, delta],
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let domain = &loaded.model.domain;
    let n = loaded.model.n;
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            // uniform direction, uniform radius fraction: fine for spot checks
            let dir: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let r = domain.radius * rng.gen::<f64>();
            domain.center.iter().zip(&dir).map(|(&c, &d)| c + d / norm * r).collect()
        })
        .collect();
    let h = loaded.model.h.clone();
    let omega = move |i: &[f64]| h.gradient(i);
    let sampling = SamplingConfig { frames_per_dim: frames, seed, ..Default::default() };
    let report = check_steepness(&omega, &loaded.profile, &points, &xi_grid, &sampling)?;
    let failed = matches!(report.verdict, Verdict::Counterexample { .. });

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        xi_grid: Vec<f64>,
        report: nekhoroshev_core::steepness::SteepnessReport,
    }
    emit_report(
        output,
        &Out { header: ReportHeader::for_config(&cfg)?, xi_grid, report },
    )?;
    Ok(if failed { 1 } else { 0 })
}

/// Cube grid over the domain ball, clipped to the ball.
fn domain_grid(domain: &nekhoroshev_core::model::DomainBall, g: usize) -> Vec<Vec<f64>> {
    let n = domain.n();
    let g = g.max(2);
    let mut pts = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| -1.0 + 2.0 * i as f64 / (g - 1) as f64).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            pts.push(domain.center.iter().zip(&x).map(|(&c, &v)| c + domain.radius * v).collect());
        }
        let mut d = n;
        loop {
            if d == 0 {
                return pts;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < g {
                break;
            }
            idx[d] = 0;
        }
    }
}

fn scaled_context(loaded: &Loaded, geo_args: &ScaledGeometryArgs) -> Result<AtlasContext> {
    let geometry = Geometry::scaled(
        &loaded.profile,
        &loaded.env,
        loaded.model.domain.clone(),
        geo_args.k,
        geo_args.margin,
        geo_args.budget,
    )?;
    Ok(AtlasContext::new(geometry, loaded.model.h.clone())?)
}

fn lattice_label(basis: &[Vec<i64>]) -> String {
    basis
        .iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_atlas(
    mp: &ModelProfileArgs,
    geo_args: &ScaledGeometryArgs,
    grid: usize,
    csv: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
) -> Result<u8> {
    let loaded = load(mp)?;
    let mut cfg = base_config("atlas", mp, 0, geo_args.budget);
    cfg.k = Some(geo_args.k);
    cfg.margin = Some(geo_args.margin);
    cfg.options.insert("grid".into(), grid as f64);
    cfg.validate()?;

    let ctx = scaled_context(&loaded, geo_args)?;
    let points = domain_grid(&loaded.model.domain, grid);
    let coverage = coverage_check(&ctx, &points)?;

    if let Some(path) = csv {
        let n = loaded.model.n;
        let mut text = String::new();
        for v in 1..=n {
            text.push_str(&format!("i{v},"));
        }
        text.push_str("dim,lattice\n");
        for rec in &coverage.records {
            for v in &rec.point {
                text.push_str(&format!("{:.16e},", v));
            }
            text.push_str(&format!("{},{}\n", rec.dim, lattice_label(&rec.lattice)));
        }
        jsonfmt::write_atomic(path, &text)?;
    }

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        geometry: Geometry,
        total: usize,
        by_dim: Vec<usize>,
        uniqueness_violations: usize,
    }
    emit_report(
        output,
        &Out {
            header: ReportHeader::for_config(&cfg)?,
            geometry: ctx.geometry.clone(),
            total: coverage.total,
            by_dim: coverage.by_dim.clone(),
            uniqueness_violations: coverage.uniqueness_violations,
        },
    )?;
    Ok(if coverage.uniqueness_violations == 0 { 0 } else { 1 })
}

/// One named pass/fail record of the verification suites.
#[derive(Serialize)]
struct SuiteRecord {
    name: String,
    pass: bool,
    detail: String,
}

fn record(records: &mut Vec<SuiteRecord>, name: impl Into<String>, pass: bool, detail: String) {
    records.push(SuiteRecord { name: name.into(), pass, detail });
}

fn relation_records(records: &mut Vec<SuiteRecord>, prefix: &str, checks: &[RelationCheck]) {
    for c in checks {
        let scope = c
            .lattice
            .as_ref()
            .map(|b| format!(" [{}]", lattice_label(b)))
            .unwrap_or_default();
        record(
            records,
            format!("{prefix}: {}{}", c.name, scope),
            c.pass,
            format!("slack {:.6e}", c.slack),
        );
    }
}

#[derive(Serialize)]
struct VerifyOut {
    header: ReportHeader,
    eps: f64,
    relations: RelationReport,
    geometry_checks: Vec<RelationCheck>,
    diameter: Vec<DiameterReport>,
    divisors: Vec<DivisorReport>,
    nonoverlap: Vec<NonOverlapReport>,
    coverage: CoverageSummary,
    records: Vec<SuiteRecord>,
    all_pass: bool,
}

#[derive(Serialize)]
struct CoverageSummary {
    total: usize,
    by_dim: Vec<usize>,
    uniqueness_violations: usize,
}

fn run_verify(
    loaded: &Loaded,
    geo_args: &ScaledGeometryArgs,
    eps_fraction: f64,
    eps_override: Option<f64>,
    k_max: u32,
    seed: u64,
    cfg: &RunConfig,
) -> Result<VerifyOut> {
    let n = loaded.profile.n;
    let table = exponents(n, &loaded.profile.alphas)?;
    let consts = derived_constants(&loaded.profile, &loaded.env)?;
    let eps = match eps_override {
        Some(e) => e,
        None => {
            if !(eps_fraction > 0.0) {
                bail!("eps fraction must be positive, got {eps_fraction}");
            }
            let e = (consts.ln_eps_star + eps_fraction.ln()).exp();
            if e == 0.0 {
                bail!(
                    "eps_star underflows f64 (ln eps_star = {:.3}); pass --eps explicitly",
                    consts.ln_eps_star
                );
            }
            e
        }
    };
    let mut records: Vec<SuiteRecord> = Vec::new();

    // relation suite at eps, over every enumerable maximal lattice
    let scales = epsilon_scales(&consts, &table, &loaded.env, &loaded.profile, eps)?;
    let k_cut = (scales.k.floor() as u32).clamp(1, k_max);
    let mut sample: Vec<Lattice> = Vec::new();
    for j in 1..=n - 1 {
        sample.extend(enumerate_maximal_lattices(n, k_cut, j, cfg.budget)?);
    }
    let relations =
        verify_parameter_relations(&consts, &table, &loaded.env, &loaded.profile, eps, &sample)?;
    relation_records(&mut records, "relation", &relations.checks);

    // scaled-geometry suites
    let ctx = scaled_context(loaded, geo_args)?;
    let geo = &ctx.geometry;
    let mut geo_lattices: Vec<Lattice> = Vec::new();
    for row in &ctx.frames {
        geo_lattices.extend(row.iter().map(|f| f.lattice.clone()));
    }
    let geometry_checks = verify_geometry(geo, &geo_lattices);
    relation_records(&mut records, "geometry", &geometry_checks);

    // diameter lemma on sampled fast-drift discs (dims 1..n-2)
    let mut diameter = Vec::new();
    for j in 1..=n.saturating_sub(2) {
        for (fi, frame) in ctx.frames[j - 1].iter().enumerate().take(3) {
            let anchors = sample_block_points(&ctx, frame, 2, seed.wrapping_add(fi as u64))?;
            for anchor in &anchors {
                let step = frame.disc_radius / 4.0;
                let disc = fast_drift_disc(&ctx, anchor, frame, step)?;
                let rep = verify_diameter_lemma(&disc, geo);
                record(
                    &mut records,
                    format!("diameter: dim {j} [{}]", lattice_label(&frame.lattice.basis)),
                    rep.pass,
                    format!("measured {:.6e} bound {:.6e}", rep.measured_max, rep.bound),
                );
                diameter.push(rep);
            }
        }
    }

    // small-divisor floors: block points against alpha_L, nonresonant points
    // against lambda_1
    let mut divisors = Vec::new();
    for j in 1..=n - 1 {
        for (fi, frame) in ctx.frames[j - 1].iter().enumerate().take(2) {
            let pts = sample_block_points(&ctx, frame, 3, seed.wrapping_add(100 + fi as u64))?;
            if pts.is_empty() {
                continue;
            }
            let rep = verify_small_divisors(
                &pts,
                Some(&frame.lattice),
                geo.k_cutoff,
                frame.divisor_floor,
                &ctx.h,
                cfg.budget,
            )?;
            record(
                &mut records,
                format!("small divisors: block dim {j} [{}]", lattice_label(&frame.lattice.basis)),
                rep.violations == 0,
                format!("min divisor {:.6e} floor {:.6e}", rep.min_divisor, rep.floor),
            );
            divisors.push(rep);
        }
    }
    let d0 = sample_nonresonant_points(&ctx, 5, seed.wrapping_add(1000))?;
    if !d0.is_empty() {
        let rep =
            verify_small_divisors(&d0, None, geo.k_cutoff, geo.lambda[0], &ctx.h, cfg.budget)?;
        record(
            &mut records,
            "small divisors: nonresonant block",
            rep.violations == 0,
            format!("min divisor {:.6e} floor {:.6e}", rep.min_divisor, rep.floor),
        );
        divisors.push(rep);
    }

    // non-overlap of same-dimension extended blocks
    let mut nonoverlap = Vec::new();
    for j in 1..=n - 1 {
        let row = &ctx.frames[j - 1];
        let mut pairs = 0;
        'outer: for a in 0..row.len() {
            for b in 0..row.len() {
                if a == b {
                    continue;
                }
                if pairs >= 4 {
                    break 'outer;
                }
                let anchors =
                    sample_block_points(&ctx, &row[a], 2, seed.wrapping_add(2000 + a as u64))?;
                if anchors.is_empty() {
                    continue;
                }
                let step = row[a].disc_radius / 4.0;
                let rep = verify_nonoverlap(&ctx, &row[a], &row[b], &anchors, step)?;
                record(
                    &mut records,
                    format!(
                        "non-overlap: dim {j} [{}] vs [{}]",
                        lattice_label(&row[a].lattice.basis),
                        lattice_label(&row[b].lattice.basis)
                    ),
                    rep.violations == 0,
                    format!("min ratio {:.6e}", rep.min_ratio),
                );
                nonoverlap.push(rep);
                pairs += 1;
            }
        }
    }

    // covering + same-dimension uniqueness on a coarse grid
    let grid_points = domain_grid(&loaded.model.domain, 9);
    let coverage: CoverageReport = coverage_check(&ctx, &grid_points)?;
    record(
        &mut records,
        "coverage: every grid point labeled",
        coverage.labeled == coverage.total,
        format!("{}/{}", coverage.labeled, coverage.total),
    );
    record(
        &mut records,
        "coverage: same-dimension uniqueness in D - m",
        coverage.uniqueness_violations == 0,
        format!("{} violations", coverage.uniqueness_violations),
    );

    let all_pass = records.iter().all(|r| r.pass);
    Ok(VerifyOut {
        header: ReportHeader::for_config(cfg)?,
        eps,
        relations,
        geometry_checks,
        diameter,
        divisors,
        nonoverlap,
        coverage: CoverageSummary {
            total: coverage.total,
            by_dim: coverage.by_dim,
            uniqueness_violations: coverage.uniqueness_violations,
        },
        records,
        all_pass,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    mp: &ModelProfileArgs,
    geo_args: &ScaledGeometryArgs,
    eps_fraction: f64,
    eps_override: Option<f64>,
    k_max: u32,
    seed: u64,
    output: Option<&std::path::Path>,
) -> Result<u8> {
    let loaded = load(mp)?;
    let mut cfg = base_config("verify", mp, seed, geo_args.budget);
    cfg.k = Some(geo_args.k);
    cfg.margin = Some(geo_args.margin);
    cfg.options.insert("eps_fraction".into(), eps_fraction);
    cfg.options.insert("k_max".into(), k_max as f64);
    if let Some(e) = eps_override {
        cfg.eps_grid = vec![e];
    }
    cfg.validate()?;
    let out = run_verify(&loaded, geo_args, eps_fraction, eps_override, k_max, seed, &cfg)?;
    let ok = out.all_pass;
    for r in &out.records {
        eprintln!("{}: {} ({})", if r.pass { "pass" } else { "FAIL" }, r.name, r.detail);
    }
    emit_report(output, &out)?;
    Ok(if ok { 0 } else { 1 })
}

fn initial_conditions(
    loaded: &Loaded,
    i0: Option<&str>,
    phi0: Option<&str>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = loaded.model.n;
    let i0 = match i0 {
        Some(s) => parse_f64_list(s)?,
        None => loaded.model.domain.center.clone(),
    };
    let phi0 = match phi0 {
        Some(s) => parse_f64_list(s)?,
        None => vec![0.0; n],
    };
    if i0.len() != n || phi0.len() != n {
        bail!("initial conditions must have {n} components");
    }
    Ok((i0, phi0))
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.initial_i.len();
    let mut text = String::from("t,");
    for v in 1..=n {
        text.push_str(&format!("i{v},"));
    }
    for v in 1..=n {
        text.push_str(&format!("phi{v},"));
    }
    text.push_str("energy\n");
    for (s, e) in traj.states.iter().zip(&traj.energy) {
        text.push_str(&format!("{:.16e},", s.t));
        for v in &s.i {
            text.push_str(&format!("{:.16e},", v));
        }
        for v in &s.phi {
            text.push_str(&format!("{:.16e},", v));
        }
        text.push_str(&format!("{:.16e}\n", e));
    }
    text
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    mp: &ModelProfileArgs,
    eps: &str,
    i0: Option<&str>,
    phi0: Option<&str>,
    dt: f64,
    steps: usize,
    stride: usize,
    csv: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
) -> Result<u8> {
    let loaded = load(mp)?;
    let eps_grid = parse_f64_list(eps)?;
    let mut cfg = base_config("simulate", mp, 0, DEFAULT_BUDGET);
    cfg.eps_grid = eps_grid.clone();
    cfg.options.insert("dt".into(), dt);
    cfg.options.insert("steps".into(), steps as f64);
    cfg.options.insert("stride".into(), stride as f64);
    cfg.validate()?;
    let (i0, phi0) = initial_conditions(&loaded, i0, phi0)?;

    let table = exponents(loaded.profile.n, &loaded.profile.alphas)?;
    let consts = derived_constants(&loaded.profile, &loaded.env)?;
    let report = confinement_report(
        &loaded.model,
        &consts,
        &table,
        |e| epsilon_scales(&consts, &table, &loaded.env, &loaded.profile, e),
        loaded.env.sigma,
        &eps_grid,
        &i0,
        &phi0,
        dt,
        steps,
        stride,
    )?;

    if let Some(csv_path) = csv {
        for (idx, &e) in eps_grid.iter().enumerate() {
            let traj = integrate(&loaded.model, e, &i0, &phi0, dt, steps, stride)?;
            let mut path = csv_path.as_os_str().to_owned();
            if eps_grid.len() > 1 {
                path.push(format!(".{idx}"));
            }
            jsonfmt::write_atomic(&PathBuf::from(path), &trajectory_csv(&traj))?;
        }
    }

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        i0: Vec<f64>,
        phi0: Vec<f64>,
        confinement: nekhoroshev_core::dynamics::ConfinementReport,
    }
    emit_report(
        output,
        &Out { header: ReportHeader::for_config(&cfg)?, i0, phi0, confinement: report },
    )?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace(
    mp: &ModelProfileArgs,
    geo_args: &ScaledGeometryArgs,
    eps: f64,
    i0: Option<&str>,
    phi0: Option<&str>,
    dt: f64,
    steps: usize,
    stride: usize,
    csv: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
) -> Result<u8> {
    let loaded = load(mp)?;
    let mut cfg = base_config("trace", mp, 0, geo_args.budget);
    cfg.eps_grid = vec![eps];
    cfg.k = Some(geo_args.k);
    cfg.margin = Some(geo_args.margin);
    cfg.options.insert("dt".into(), dt);
    cfg.options.insert("steps".into(), steps as f64);
    cfg.options.insert("stride".into(), stride as f64);
    cfg.validate()?;
    let (i0, phi0) = initial_conditions(&loaded, i0, phi0)?;

    let ctx = scaled_context(&loaded, geo_args)?;
    let traj = integrate(&loaded.model, eps, &i0, &phi0, dt, steps, stride)?;
    let metrics = drift_metrics(&traj, None);
    let trace = resonance_trace(&traj, &ctx)?;

    if let Some(path) = csv {
        let mut text = String::from(
            "t_start,t_end,dim,lattice,diameter,max_normal_excursion,normal_bound,residual\n",
        );
        for ep in &trace.episodes {
            text.push_str(&format!(
                "{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                ep.t_start,
                ep.t_end,
                ep.dim,
                lattice_label(&ep.lattice),
                ep.diameter,
                ep.max_normal_excursion,
                ep.normal_bound,
                ep.decomposition_residual,
            ));
        }
        jsonfmt::write_atomic(path, &text)?;
    }

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        eps: f64,
        max_drift: f64,
        max_energy_error: f64,
        trace: nekhoroshev_core::dynamics::TrapTrace,
    }
    emit_report(
        output,
        &Out {
            header: ReportHeader::for_config(&cfg)?,
            eps,
            max_drift: metrics.max_drift,
            max_energy_error: metrics.max_energy_error,
            trace,
        },
    )?;
    Ok(0)
}

fn cmd_report(
    mp: &ModelProfileArgs,
    geo_args: &ScaledGeometryArgs,
    eps_fraction: f64,
    k_max: u32,
    seed: u64,
    output: Option<&std::path::Path>,
) -> Result<u8> {
    let loaded = load(mp)?;
    let mut cfg = base_config("report", mp, seed, geo_args.budget);
    cfg.k = Some(geo_args.k);
    cfg.margin = Some(geo_args.margin);
    cfg.options.insert("eps_fraction".into(), eps_fraction);
    cfg.options.insert("k_max".into(), k_max as f64);
    cfg.validate()?;

    let n = loaded.profile.n;
    let table = exponents(n, &loaded.profile.alphas)?;
    let consts = derived_constants(&loaded.profile, &loaded.env)?;
    let classical = nekhoroshev_1977_exponents(n, &loaded.profile.alphas, false)?;
    let mut lattice_counts: BTreeMap<String, usize> = BTreeMap::new();
    for j in 1..=n - 1 {
        let count =
            enumerate_maximal_lattices(n, geo_args.k.floor() as u32, j, cfg.budget)?.len();
        lattice_counts.insert(format!("dim {j}"), count);
    }
    let verify = run_verify(&loaded, geo_args, eps_fraction, None, k_max, seed, &cfg)?;
    let ok = verify.all_pass;

    #[derive(Serialize)]
    struct Out {
        header: ReportHeader,
        profile: config::ProfileSpec,
        envelope: nekhoroshev_core::constants::AnalyticityEnvelope,
        exponents: nekhoroshev_core::constants::ExponentTable,
        constants: nekhoroshev_core::constants::ConstantSet,
        classical: nekhoroshev_core::constants::Exponents1977,
        lattice_counts: BTreeMap<String, usize>,
        verify: VerifyOut,
    }
    emit_report(
        output,
        &Out {
            header: ReportHeader::for_config(&cfg)?,
            profile: loaded.spec.clone(),
            envelope: loaded.env.clone(),
            exponents: table,
            constants: consts,
            classical,
            lattice_counts,
            verify,
        },
    )?;
    Ok(if ok { 0 } else { 1 })
}
