use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use quasiprob::io::{write_density2d_csv, write_density_csv, write_state_csv};
use quasiprob::protocol::{discrepancy_statistic, Lab};
use quasiprob::{
    l1_distance, pushforward_linear, quadrature_distribution, wigner_with_residue, Fixture,
    QuadratureSpec, SignedDensity2D, WaveFunction,
};
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::CliError;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(dir.join(name))
}

/// JSON has no infinities; `-inf` log capital is written as a string.
fn log_value(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn build(cfg: &ExperimentConfig, fixture: &Fixture) -> Result<WaveFunction, CliError> {
    Ok(fixture.build(&cfg.grid()?, cfg.grid.hbar)?)
}

pub fn cmd_state(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let psi = build(cfg, &cfg.state.fixture)?;
    let mut out = create(&cfg.out, "state.csv")?;
    write_state_csv(&psi, &mut out)?;
    out.flush()?;
    println!("state {}", cfg.state.fixture);
    println!("norm {:.6}", psi.norm_squared());
    println!("edge amplitude {:.3e}", psi.edge_amplitude());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerSummary {
    pub state: String,
    pub hbar: f64,
    pub mass: f64,
    pub negative_volume: f64,
    /// `2 pi hbar int int W^2`, one for a pure state.
    pub purity: f64,
    /// `W` at the grid node nearest the origin.
    pub w_origin: f64,
    pub imaginary_residue: f64,
}

fn nearest(grid: &quasiprob::Grid1D, v: f64) -> usize {
    (grid.position(v).round().max(0.0) as usize).min(grid.len() - 1)
}

pub fn wigner_summary(fixture: &Fixture, w: &SignedDensity2D, hbar: f64, residue: f64) -> WignerSummary {
    let (i, j) = (nearest(w.x_grid(), 0.0), nearest(w.p_grid(), 0.0));
    WignerSummary {
        state: fixture.to_string(),
        hbar,
        mass: w.total_mass(),
        negative_volume: w.negative_volume(),
        purity: 2.0 * std::f64::consts::PI * hbar * w.square_integral(),
        w_origin: w.values()[[i, j]],
        imaginary_residue: residue,
    }
}

pub fn cmd_wigner(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let psi = build(cfg, &cfg.state.fixture)?;
    let (w, residue) = wigner_with_residue(&psi)?;
    let mut out = create(&cfg.out, "wigner.csv")?;
    write_density2d_csv(&w, &mut out)?;
    out.flush()?;
    let summary = wigner_summary(&cfg.state.fixture, &w, cfg.grid.hbar, residue);
    write_json(&cfg.out, "wigner_summary.json", &summary)?;
    println!("state {}", summary.state);
    println!("mass {:.9}", summary.mass);
    println!("negative volume {:.6e}", summary.negative_volume);
    println!("purity {:.9}", summary.purity);
    println!("W(0,0) {:.9}", summary.w_origin);
    Ok(())
}

pub fn cmd_quadrature(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let spec = QuadratureSpec::new(cfg.quadrature.a, cfg.quadrature.b)?;
    let psi = build(cfg, &cfg.state.fixture)?;
    let spectral = quadrature_distribution(&psi, spec)?;
    let (w, _) = wigner_with_residue(&psi)?;
    let image = pushforward_linear(&w, spec.a, spec.b)?;
    let mut out = create(&cfg.out, "quadrature.csv")?;
    write_density_csv(spectral.as_signed(), &mut out)?;
    out.flush()?;
    let mut out = create(&cfg.out, "pushforward.csv")?;
    write_density_csv(&image, &mut out)?;
    out.flush()?;
    let mean = spectral.expectation(|z| z);
    let var = spectral.expectation(|z| (z - mean) * (z - mean));
    println!("state {} observable {} x + {} p", cfg.state.fixture, spec.a, spec.b);
    println!("mean {mean:.9} variance {var:.9}");
    println!("L1(pushforward, spectral) {:.3e}", l1_distance(&image, spectral.as_signed()));
    Ok(())
}

/// Cross-route distance for one state and direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionReport {
    pub state: String,
    pub a: f64,
    pub b: f64,
    pub l1: f64,
    pub pass: bool,
}

/// `W` with its sign flipped on `[x0, x1] x [p0, p1]`, renormalized.
pub fn corrupt(w: &SignedDensity2D, region: [f64; 4]) -> Result<SignedDensity2D, CliError> {
    let [x0, x1, p0, p1] = region;
    let mut v = w.values().clone();
    let mut flipped = 0usize;
    for (i, x) in w.x_grid().points().enumerate() {
        if !(x0..=x1).contains(&x) {
            continue;
        }
        for (j, p) in w.p_grid().points().enumerate() {
            if (p0..=p1).contains(&p) {
                v[[i, j]] = -v[[i, j]];
                flipped += 1;
            }
        }
    }
    if flipped == 0 {
        return Err(CliError::Config(format!("corrupt region {region:?} contains no grid cell")));
    }
    Ok(SignedDensity2D::normalized(*w.x_grid(), *w.p_grid(), v)?)
}

/// L1 distance between the image of `w` under each direction and the
/// spectral quadrature density of `psi`.
pub fn verify_cross_route(
    fixture: &Fixture,
    psi: &WaveFunction,
    w: &SignedDensity2D,
    quads: &[QuadratureSpec],
    tolerance: f64,
) -> Result<Vec<DirectionReport>, CliError> {
    quads
        .iter()
        .map(|q| {
            q.validate()?;
            let image = pushforward_linear(w, q.a, q.b)?;
            let spectral = quadrature_distribution(psi, *q)?;
            let l1 = l1_distance(&image, spectral.as_signed());
            Ok(DirectionReport {
                state: fixture.to_string(),
                a: q.a,
                b: q.b,
                l1,
                pass: l1 < tolerance,
            })
        })
        .collect()
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let quads = cfg.verify_quads();
    let mut reports = Vec::new();
    for fixture in cfg.verify_states() {
        let psi = build(cfg, &fixture)?;
        let (mut w, _) = wigner_with_residue(&psi)?;
        if let Some(region) = cfg.verify.corrupt_region {
            w = corrupt(&w, region)?;
        }
        reports.extend(verify_cross_route(&fixture, &psi, &w, &quads, cfg.verify.tolerance)?);
    }
    let mut out = create(&cfg.out, "verify.csv")?;
    writeln!(out, "state,a,b,l1,pass")?;
    for r in &reports {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e},{}", r.state, r.a, r.b, r.l1, r.pass)?;
    }
    out.flush()?;
    let failed: Vec<&DirectionReport> = reports.iter().filter(|r| !r.pass).collect();
    let worst = reports.iter().map(|r| r.l1).fold(0.0, f64::max);
    println!(
        "{} directions checked, worst L1 {worst:.3e}, tolerance {:.0e}",
        reports.len(),
        cfg.verify.tolerance
    );
    for r in &failed {
        println!("FAIL {} at ({:.6}, {:.6}): L1 {:.3e}", r.state, r.a, r.b, r.l1);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} of {} directions exceed the tolerance",
            failed.len(),
            reports.len()
        )))
    }
}

struct RunResult {
    final_log_capital: f64,
    max_log_capital: f64,
    final_discrepancy: f64,
    clipped: usize,
    forfeited: Option<usize>,
    discrepancy: Option<Vec<f64>>,
    jsonl: Option<Vec<u8>>,
}

pub fn cmd_protocol(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let p = &cfg.protocol;
    let setup = cfg.setup();
    let lab = Lab::new(cfg.grid()?, cfg.grid.hbar)?;
    let bound = setup.resolved_bound(&lab)?;
    let results = quasiprob::protocol::run_many(cfg.seed, p.runs, |seed| {
        let mut t = setup.run_with_bound(&lab, seed, bound)?;
        t.config = serde_json::to_value(cfg).map_err(|e| quasiprob::Error::Io(e.to_string()))?;
        let d = discrepancy_statistic(&t, p.discrepancy)?;
        let keep = seed.stream == 0 || p.all_transcripts;
        let jsonl = if keep {
            let mut buf = Vec::new();
            t.write_jsonl(&mut buf)?;
            Some(buf)
        } else {
            None
        };
        Ok(RunResult {
            final_log_capital: t.final_log_capital(),
            max_log_capital: t.max_log_capital(),
            final_discrepancy: d.last().copied().unwrap_or(0.0),
            clipped: t.rounds.iter().filter(|r| r.clipped).count(),
            forfeited: t.forfeited_by_forecaster,
            discrepancy: (seed.stream == 0).then_some(d),
            jsonl,
        })
    })?;

    for (i, r) in results.iter().enumerate() {
        if let Some(buf) = &r.jsonl {
            let name = if p.all_transcripts {
                format!("transcript_{i:04}.jsonl")
            } else {
                "transcript.jsonl".to_string()
            };
            let mut out = create(&cfg.out, &name)?;
            out.write_all(buf)?;
            out.flush()?;
        }
    }
    let first = &results[0];
    let mut out = create(&cfg.out, "discrepancy.csv")?;
    writeln!(out, "n,discrepancy")?;
    for (n, d) in first.discrepancy.iter().flatten().enumerate() {
        writeln!(out, "{},{:.16e}", n + 1, d)?;
    }
    out.flush()?;
    let mut out = create(&cfg.out, "runs.csv")?;
    writeln!(out, "run,final_log_capital,max_log_capital,final_discrepancy,clipped_rounds,forfeited_round")?;
    for (i, r) in results.iter().enumerate() {
        writeln!(
            out,
            "{i},{:.16e},{:.16e},{:.16e},{},{}",
            r.final_log_capital,
            r.max_log_capital,
            r.final_discrepancy,
            r.clipped,
            r.forfeited.map_or(String::new(), |n| n.to_string())
        )?;
    }
    out.flush()?;

    let n = results.len() as f64;
    let mean_capital = results.iter().map(|r| r.final_log_capital.exp()).sum::<f64>() / n;
    let mut finals: Vec<f64> = results.iter().map(|r| r.final_log_capital).collect();
    finals.sort_by(f64::total_cmp);
    let median = finals[finals.len() / 2];
    let above = |c: f64| results.iter().filter(|r| r.max_log_capital >= c.ln()).count() as f64 / n;
    let summary = json!({
        "protocol": p.id,
        "rounds": p.rounds,
        "runs": p.runs,
        "seed": cfg.seed,
        "bound": bound,
        "final_log_capital": log_value(first.final_log_capital),
        "max_log_capital": log_value(first.max_log_capital),
        "forfeited_by_forecaster": first.forfeited,
        "clipped_rounds": first.clipped,
        "discrepancy_file": "discrepancy.csv",
        "final_discrepancy": first.final_discrepancy,
        "mean_final_capital": log_value(mean_capital),
        "median_final_log_capital": log_value(median),
        "fraction_sup_capital_at_least_10": above(10.0),
        "forfeited_runs": results.iter().filter(|r| r.forfeited.is_some()).count(),
        "config": cfg,
    });
    write_json(&cfg.out, "summary.json", &summary)?;
    println!(
        "protocol {}: {} runs x {} rounds, log K_N = {:.6} (first run), median {:.6}",
        p.id, p.runs, p.rounds, first.final_log_capital, median
    );
    if let Some(n) = first.forfeited {
        println!("forecaster forfeited in round {n}");
    }
    Ok(())
}
