//! Experiment CLI: run filter-curve dumps, 1D deconvolution and 2D inverse
//! source benchmarks from TOML configs, writing CSV/JSON artifacts, and
//! compare report CSVs for regression checks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use taureg::config::{hash_hex, ExperimentKind, FileConfig};
use taureg::error::{Error, Result};
use taureg::experiments::{
    field_csv, run_deconv, run_filters, run_isp, signal_csv, spectrum_csv, trace_csv,
    DeconvConfig, IspConfig,
};
use taureg::report::{compare_reports, ExperimentReport};

#[derive(Parser)]
#[command(name = "taureg", version, about = "Spectral-filter regularization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML config file; omitted fields fall back to documented defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also dump parameter-selection traces as CSV.
    #[arg(long)]
    trace: bool,
    /// Data-parallel (tau, rule) execution; 1 = sequential.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Dump filter curves q_tau(alpha, sigma) as CSV.
    Filters(RunArgs),
    /// Run the 1D periodic deconvolution benchmark.
    Deconv1d(RunArgs),
    /// Run the 2D multi-frequency inverse source benchmark.
    Isp2d(RunArgs),
    /// Compare two report CSVs row by row.
    Compare {
        a: PathBuf,
        b: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Filters(args) => cmd_filters(&args),
        Command::Deconv1d(args) => cmd_deconv(&args),
        Command::Isp2d(args) => cmd_isp(&args),
        Command::Compare { a, b } => cmd_compare(&a, &b),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(args: &RunArgs, kind: ExperimentKind) -> Result<(Option<FileConfig>, String)> {
    match &args.config {
        Some(path) => {
            let cfg = FileConfig::load(path)?;
            if cfg.experiment != kind {
                return Err(Error::Config(
                    "config selects a different experiment than the subcommand".into(),
                ));
            }
            let hash = cfg.hash.clone();
            Ok((Some(cfg), hash))
        }
        None => Ok((None, hash_hex(b"defaults"))),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn rule_tag(rule: &str) -> String {
    rule.replace(':', "_")
}

fn cmd_filters(args: &RunArgs) -> Result<()> {
    let (cfg, _) = load_config(args, ExperimentKind::Filters)?;
    let fcfg = cfg.and_then(|c| c.filters).unwrap_or_default();
    ensure_out(&args.out)?;
    let csv = run_filters(&fcfg)?;
    let path = args.out.join("filters.csv");
    std::fs::write(&path, csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_deconv(args: &RunArgs) -> Result<()> {
    let (cfg, hash) = load_config(args, ExperimentKind::Deconv1d)?;
    let mut dcfg: DeconvConfig = cfg
        .and_then(|c| c.deconv1d)
        .ok_or_else(|| Error::Config("deconv1d needs --config with a [deconv1d] table".into()))?;
    if let Some(seed) = args.seed {
        dcfg.seed = seed;
    }
    ensure_out(&args.out)?;
    let out = run_deconv(&dcfg, &hash, args.jobs)?;

    out.report.write_csv(&args.out.join("report.csv"))?;
    for sel in &out.selections {
        let tag = format!("tau{}_{}", sel.tau, rule_tag(&sel.rule.to_string()));
        std::fs::write(
            args.out.join(format!("signals_{tag}.csv")),
            signal_csv(&out.truth, &out.noisy, &sel.reconstruction),
        )?;
        if args.trace && !sel.trace.is_empty() {
            std::fs::write(args.out.join(format!("trace_{tag}.csv")), trace_csv(&sel.trace))?;
        }
    }
    let metadata = serde_json::json!({
        "experiment": "deconv1d",
        "config": dcfg,
        "config_hash": out.report.config_hash,
        "seed": out.report.seed,
        "code_version": out.report.code_version,
        "rows": out.report.rows.iter().map(|r| serde_json::json!({
            "tau": r.tau,
            "rule": r.rule,
            "alpha": r.alpha,
            "relative_error": r.relative_error,
        })).collect::<Vec<_>>(),
    });
    std::fs::write(
        args.out.join("metadata.json"),
        serde_json::to_string_pretty(&metadata).expect("json"),
    )?;
    println!("wrote report and {} signal files to {}", out.selections.len(), args.out.display());
    Ok(())
}

fn cmd_isp(args: &RunArgs) -> Result<()> {
    let (cfg, hash) = load_config(args, ExperimentKind::Isp2d)?;
    let mut icfg: IspConfig = cfg.and_then(|c| c.isp2d).unwrap_or_default();
    if let Some(seed) = args.seed {
        icfg.seed = seed;
    }
    ensure_out(&args.out)?;
    let out = run_isp(&icfg, &hash, args.jobs)?;

    out.report.write_csv(&args.out.join("report.csv"))?;
    std::fs::write(
        args.out.join("spectrum.csv"),
        spectrum_csv(&out.problem.spectrum),
    )?;
    std::fs::write(
        args.out.join("field_truth.csv"),
        field_csv(&out.problem.geometry, &out.problem.truth),
    )?;
    for sel in &out.selections {
        let tag = format!("tau{}_{}", sel.tau, rule_tag(&sel.rule.to_string()));
        std::fs::write(
            args.out.join(format!("field_{tag}.csv")),
            field_csv(&out.problem.geometry, &sel.field),
        )?;
        if args.trace && !sel.trace.is_empty() {
            std::fs::write(args.out.join(format!("trace_{tag}.csv")), trace_csv(&sel.trace))?;
        }
    }
    let metadata = serde_json::json!({
        "experiment": "isp2d",
        "config": icfg,
        "config_hash": out.report.config_hash,
        "seed": out.report.seed,
        "code_version": out.report.code_version,
        "noise_std": out.problem.noise_std,
        "cells": out.problem.geometry.cells().len(),
        "retained_singular_values": out.problem.system.rank(),
        "rows": out.report.rows.iter().map(|r| serde_json::json!({
            "tau": r.tau,
            "rule": r.rule,
            "alpha": r.alpha,
            "relative_error": r.relative_error,
        })).collect::<Vec<_>>(),
    });
    std::fs::write(
        args.out.join("metadata.json"),
        serde_json::to_string_pretty(&metadata).expect("json"),
    )?;
    println!("wrote report, spectrum and fields to {}", args.out.display());
    Ok(())
}

fn cmd_compare(a: &Path, b: &Path) -> Result<()> {
    let ra = ExperimentReport::read_csv("a", a)?;
    let rb = ExperimentReport::read_csv("b", b)?;
    let summary = compare_reports(&ra, &rb)?;
    println!("tau,rule,abs_dalpha,rel_dalpha,abs_derror,rel_derror");
    for (tau, rule, da, rda, de, rde) in &summary.rows {
        println!("{tau},{rule},{da:e},{rda:e},{de:e},{rde:e}");
    }
    println!(
        "max_abs_delta = {:e}, max_rel_delta = {:e}",
        summary.max_abs_delta, summary.max_rel_delta
    );
    Ok(())
}
