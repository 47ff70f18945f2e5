//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p quasiprob-cli --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use quasiprob::protocol::*;
use quasiprob::*;
use quasiprob_cli::commands::verify_cross_route;

const N_POINTS: usize = 1024;
const HBAR: f64 = 1.0;

/// Negative volume of the first excited Fock Wigner function, fixed by the
/// midpoint oracle below and by `2 exp(-1/2) - 1`.
const FOCK1_NEGATIVE_VOLUME: f64 = 0.213_061_319_4;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn grid() -> Grid1D {
    Grid1D::new(-12.0, 12.0, N_POINTS).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn wigner_integrity() -> Outcome {
    let (mut mass, mut residue, mut purity) = (0.0f64, 0.0f64, 0.0f64);
    for f in Fixture::catalog() {
        let psi = f.build(&grid(), HBAR).map_err(err)?;
        let (w, r) = wigner_with_residue(&psi).map_err(err)?;
        let target = 1.0 / (2.0 * PI * HBAR);
        mass = mass.max((w.total_mass() - 1.0).abs());
        residue = residue.max(r);
        purity = purity.max((w.square_integral() - target).abs() / target);
    }
    check(
        mass < 1e-6 && residue < 1e-10 && purity < 1e-3,
        format!("max |mass - 1| {mass:.2e}, residue {residue:.2e}, purity rel {purity:.2e}"),
    )
}

fn fock1_wigner(x: f64, p: f64) -> f64 {
    let r2 = x * x + p * p;
    -(1.0 - 2.0 * r2) * (-r2).exp() / PI
}

fn negativity_witness() -> Outcome {
    let m = 3000;
    let h = 12.0 / m as f64;
    let mut oracle = 0.0;
    for i in 0..m {
        let x = -6.0 + (i as f64 + 0.5) * h;
        for j in 0..m {
            let p = -6.0 + (j as f64 + 0.5) * h;
            oracle -= fock1_wigner(x, p).min(0.0) * h * h;
        }
    }
    let gauss = wigner(&gaussian_state(&grid(), 0.0, 0.0, 1.0, HBAR).map_err(err)?).map_err(err)?;
    let fock1 = wigner(&fock_state(&grid(), 1, HBAR).map_err(err)?).map_err(err)?;
    let (g, f) = (gauss.negative_volume(), fock1.negative_volume());
    check(
        g < 1e-8
            && f > 0.05
            && (f - FOCK1_NEGATIVE_VOLUME).abs() < 1e-3
            && (oracle - FOCK1_NEGATIVE_VOLUME).abs() < 1e-4,
        format!("gauss {g:.2e}, fock1 {f:.6} (pinned {FOCK1_NEGATIVE_VOLUME}, oracle {oracle:.6})"),
    )
}

fn cross_route() -> Outcome {
    let sweep = QuadratureSpec::sweep(12);
    let has = |a: f64, b: f64| sweep.iter().any(|q| q.a == a && q.b == b);
    if !(has(1.0, 0.0) && has(0.0, 1.0)) {
        return Err("sweep misses an axis direction".into());
    }
    let mut worst = 0.0f64;
    let mut count = 0;
    for f in Fixture::catalog() {
        let psi = f.build(&grid(), HBAR).map_err(err)?;
        let w = wigner(&psi).map_err(err)?;
        for r in verify_cross_route(&f, &psi, &w, &sweep, 1e-3).map_err(err)? {
            worst = worst.max(r.l1);
            count += 1;
        }
    }
    check(worst < 1e-3, format!("{count} state-directions, worst L1 {worst:.2e}"))
}

fn marginals() -> Outcome {
    let mut worst = 0.0f64;
    for f in Fixture::catalog() {
        let psi = f.build(&grid(), HBAR).map_err(err)?;
        let w = wigner(&psi).map_err(err)?;
        let x = SignedDensity1D::new(*psi.grid(), psi.density()).map_err(err)?;
        let phi = fourier_state(&psi).map_err(err)?;
        let p = SignedDensity1D::new(*phi.grid(), phi.density()).map_err(err)?;
        worst = worst.max(l1_distance(&marginal_x(&w).map_err(err)?, &x));
        worst = worst.max(l1_distance(&p, &marginal_p(&w).map_err(err)?));
    }
    check(worst < 1e-4, format!("worst L1 {worst:.2e}"))
}

fn lab() -> Lab {
    Lab::new(grid(), HBAR).unwrap()
}

fn ground_state(rounds: usize, reality: RealitySpec) -> ProtocolSetup {
    ProtocolSetup {
        protocol: 1,
        rounds,
        experimenter: Schedule {
            states: vec![Fixture::Fock { n: 0 }],
            quads: vec![QuadratureSpec { a: 1.0, b: 0.0 }],
        },
        forecaster: ForecasterSpec::Honest,
        skeptic: SkepticSpec::Lln {
            statistic: Statistic::Identity,
            bound: Bound::Auto,
            depth: 8,
        },
        reality,
    }
}

fn batch(lab: &Lab, s: &ProtocolSetup, seed: u64, runs: usize) -> Result<Vec<Transcript>, String> {
    let c = s.resolved_bound(lab).map_err(err)?;
    run_many(seed, runs, |rs| s.run_with_bound(lab, rs, c)).map_err(err)
}

fn martingale_ville() -> Outcome {
    let lab = lab();
    let runs = batch(&lab, &ground_state(50, RealitySpec::Faithful), 1001, 2000)?;
    let k: Vec<f64> = runs.iter().map(|t| t.final_log_capital().exp()).collect();
    let n = k.len() as f64;
    let mean = k.iter().sum::<f64>() / n;
    let se = (k.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let high = runs.iter().filter(|t| t.max_log_capital() >= 10f64.ln()).count() as f64 / n;
    check(
        (mean - 1.0).abs() < 3.0 * se && high <= 0.13,
        format!("mean K_N {mean:.4} (se {se:.4}), sup K >= 10 in {:.2}% of runs", 100.0 * high),
    )
}

fn forcing() -> Outcome {
    let lab = lab();
    let rounds = 2000;
    let base = ground_state(rounds, RealitySpec::Faithful);
    let c = base.resolved_bound(&lab).map_err(err)?.ok_or("no bound")?;
    let shifted = ground_state(rounds, RealitySpec::Shifted { delta: 0.3 * c });
    let forced = batch(&lab, &shifted, 1002, 200)?
        .iter()
        .filter(|t| t.final_log_capital() > 5.0)
        .count();
    let limit = 5.0 * c / (rounds as f64).sqrt();
    let mut bounded = 0;
    for t in batch(&lab, &base, 1003, 200)? {
        let d = discrepancy_statistic(&t, Statistic::Identity).map_err(err)?;
        if d.last().is_some_and(|d| d.abs() < limit) {
            bounded += 1;
        }
    }
    check(
        forced >= 198 && bounded >= 190,
        format!("C {c:.4}: shifted log K_N > 5 in {forced}/200, faithful |D_N| < {limit:.4} in {bounded}/200"),
    )
}

fn commitment() -> Outcome {
    let lab = lab();
    let sweep = QuadratureSpec::sweep(12);
    let lln = SkepticSpec::Lln {
        statistic: Statistic::Square,
        bound: Bound::Auto,
        depth: 8,
    };
    let setup = |state: Fixture, forecaster, rounds| ProtocolSetup {
        protocol: 2,
        rounds,
        experimenter: Schedule {
            states: vec![state],
            quads: sweep.clone(),
        },
        forecaster,
        skeptic: lln.clone(),
        reality: RealitySpec::Faithful,
    };

    let mut worst = 0.0f64;
    let mut honest_rounds = 0;
    for state in Fixture::catalog() {
        let t = setup(state, ForecasterSpec::Honest, 120)
            .run(&lab, RunSeed::new(1004, 0))
            .map_err(err)?;
        if t.forfeited_by_forecaster.is_some() || t.rounds.len() != 120 {
            return Err(format!("honest forecaster for {state} stopped early"));
        }
        t.check().map_err(err)?;
        discrepancy_statistic(&t, Statistic::Square).map_err(err)?;
        let mut memo = BTreeMap::new();
        for r in &t.rounds {
            let key = (r.forecast_hash.clone(), r.a.to_bits(), r.b.to_bits());
            if memo.contains_key(&key) {
                continue;
            }
            let forecast = r.forecast.as_ref().ok_or("round without forecast")?;
            let spectral = lab
                .quadrature(&state, QuadratureSpec { a: r.a, b: r.b })
                .map_err(err)?;
            let d = l1_distance(forecast.as_signed(), spectral.as_signed());
            worst = worst.max(d);
            memo.insert(key, d);
        }
        honest_rounds += t.rounds.len();
    }

    let claim = ForecasterSpec::Claim {
        state: Fixture::Fock { n: 0 },
    };
    let t = setup(Fixture::Fock { n: 1 }, claim, 2000)
        .run(&lab, RunSeed::new(1005, 0))
        .map_err(err)?;
    let log_k = t.final_log_capital();
    check(
        worst < 1e-3 && log_k > 1e6f64.ln(),
        format!(
            "honest: {honest_rounds} rounds, worst derived-vs-spectral L1 {worst:.2e}; dishonest log K_N {log_k:.2} (need > {:.2})",
            1e6f64.ln()
        ),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        files.insert(
            path.file_name().unwrap().to_string_lossy().into_owned(),
            std::fs::read(&path).unwrap(),
        );
    }
    files
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 6] = [
        &["state", "--state", "fock-cat:0,1"],
        &["wigner", "--state", "fock:1"],
        &["quadrature", "--state", "gauss-cat:2,0.7", "--a", "-0.6", "--b", "0.8"],
        &["verify", "--state", "fock:2", "--directions", "6"],
        &["protocol", "--rounds", "300", "--runs", "3", "--set", "protocol.all_transcripts=true"],
        &[
            "protocol",
            "--protocol",
            "2",
            "--rounds",
            "100",
            "--set",
            "protocol.experimenter={states=[\"fock:1\"],quads=[{a=1.0,b=0.0},{a=0.0,b=1.0}]}",
        ],
    ];
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut files = 0;
    for (k, args) in commands.iter().enumerate() {
        let out = tmp.path().join(format!("c{k}"));
        let invoke = || {
            let mut argv = vec!["quasiprob".to_string()];
            argv.extend(args.iter().map(|s| s.to_string()));
            argv.extend(["--seed".into(), "17".into(), "--out".into(), out.display().to_string()]);
            quasiprob_cli::run(argv)
        };
        let code = invoke();
        if code != 0 {
            return Err(format!("{} exited with {code}", args[0]));
        }
        let first = snapshot(&out);
        std::fs::remove_dir_all(&out).map_err(err)?;
        invoke();
        if first != snapshot(&out) {
            return Err(format!("{} output differs between reruns", args[0]));
        }
        files += first.len();
    }
    check(true, format!("{} commands, {files} files byte-identical", commands.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("wigner integrity", wigner_integrity),
        ("negativity witness", negativity_witness),
        ("cross-route agreement", cross_route),
        ("marginals", marginals),
        ("martingale and Ville", martingale_ville),
        ("forcing", forcing),
        ("phase-space commitment", commitment),
        ("determinism", determinism),
    ];
    let mut lines = Vec::new();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        let line = format!(
            "{tag} {}. {name}: {detail} [{:.1}s]",
            k + 1,
            start.elapsed().as_secs_f64()
        );
        println!("{line}");
        lines.push(line);
    }
    println!();
    for line in &lines {
        println!("{line}");
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
