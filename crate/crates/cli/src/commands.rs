use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use eoswap::references::{
    FW_T_PARALLEL, FW_T_SEQUENTIAL, INVERSE_FW_T_PARALLEL, INVERSE_FW_T_SEQUENTIAL,
};
use eoswap::rl::{curve_to_csv, train, AgentConfig, CurveRow, EnvSpec, TrainingOutcome};
use eoswap::{
    parse, serialize, transform_conjugate, transform_invert, GateSequence, LayoutKind, Reference,
    RewardConfig, RunManifest, Structure, SubspaceUnitaries, Target, EXACT_EPS,
};

use crate::{BenchArgs, OptimizeArgs, RunArgs, OUTPUT_ROOT_VAR};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_EXACT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type CmdResult = Result<u8, Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: e.into(),
    }
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        error: e.into(),
    }
}

/// A path if one exists, otherwise the name of a bundled reference.
fn load_sequence(arg: &str) -> Result<(String, GateSequence), Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {arg}"))
            .map_err(usage)?;
        let seq = parse(&text)
            .with_context(|| format!("parsing {arg}"))
            .map_err(usage)?;
        return Ok((arg.to_string(), seq));
    }
    match arg.parse::<Reference>() {
        Ok(r) => Ok((format!("{} (bundled)", r.name()), r.sequence())),
        Err(_) => Err(usage(anyhow!("{arg}: no such file or bundled reference"))),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn verify(arg: &str, target: Target) -> CmdResult {
    let (name, seq) = load_sequence(arg)?;
    let us = seq.unitary();
    let d = target.distance(&us.logical_columns());
    let t = seq.timing();
    let (r0, r1) = us.unitarity_residuals();
    println!("sequence    {name}");
    println!("layout      {} {}", seq.layout().name(), seq.structure());
    println!("target      {target}");
    println!("d           {d:.6e}");
    println!("T_s         {:.6}", t.t_sequential);
    println!("T_p         {:.6}", t.t_parallel);
    println!(
        "pulses      {} nonzero of {}",
        t.n_pulses_nonzero,
        seq.len()
    );
    println!("time_steps  {}", t.n_time_steps);
    println!("unitarity   spin0 {r0:.6e}  spin1 {r1:.6e}");
    let exact = d < EXACT_EPS;
    println!("exact       {}", if exact { "yes" } else { "no" });
    Ok(if exact { EXIT_OK } else { EXIT_NOT_EXACT })
}

pub fn time(arg: &str) -> CmdResult {
    let (name, seq) = load_sequence(arg)?;
    let t = seq.timing();
    println!("sequence    {name}");
    println!("T_s         {:.6}", t.t_sequential);
    println!("T_p         {:.6}", t.t_parallel);
    println!(
        "pulses      {} nonzero of {}",
        t.n_pulses_nonzero,
        seq.len()
    );
    println!("time_steps  {}", t.n_time_steps);
    for (k, group) in t.step_groups.iter().enumerate() {
        let mut line = String::new();
        for &i in group {
            let p = &seq.pulses()[i];
            let _ = write!(
                line,
                "  {} {:.6}",
                seq.pair(i),
                eoswap::sequence::canonical_alpha(p.alpha)
            );
        }
        println!("step {:>3}:{line}", k + 1);
    }
    Ok(EXIT_OK)
}

pub fn transform(arg: &str, invert: bool, out: Option<&Path>) -> CmdResult {
    let (_, seq) = load_sequence(arg)?;
    let result = if invert {
        transform_invert(&seq)
    } else {
        transform_conjugate(&seq)
    };
    write_or_print(out, &serialize(&result))?;
    if let Some(p) = out {
        let t = result.timing();
        eprintln!(
            "wrote {} (T_s {:.6}, T_p {:.6})",
            p.display(),
            t.t_sequential,
            t.t_parallel
        );
    }
    Ok(EXIT_OK)
}

fn matrix_json(n: usize, entry: impl Fn(usize, usize) -> (f64, f64)) -> serde_json::Value {
    let part = |k: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if k == 0 { entry(i, j).0 } else { entry(i, j).1 })
                    .collect()
            })
            .collect()
    };
    serde_json::json!({ "re": part(0), "im": part(1) })
}

fn unitaries_json(seq: &GateSequence, us: &SubspaceUnitaries) -> serde_json::Value {
    let t = seq.timing();
    serde_json::json!({
        "layout": seq.layout().name(),
        "structure": seq.structure().to_string(),
        "d_cnot": Target::Cnot.distance(&us.logical_columns()),
        "d_cz": Target::Cz.distance(&us.logical_columns()),
        "t_sequential": t.t_sequential,
        "t_parallel": t.t_parallel,
        "spin0": matrix_json(5, |i, j| (us.spin0[(i, j)].re, us.spin0[(i, j)].im)),
        "spin1": matrix_json(9, |i, j| (us.spin1[(i, j)].re, us.spin1[(i, j)].im)),
    })
}

pub fn export_unitaries(arg: &str, out: Option<&Path>) -> CmdResult {
    let (_, seq) = load_sequence(arg)?;
    let json = unitaries_json(&seq, &seq.unitary());
    let text = serde_json::to_string_pretty(&json).expect("json value serializes") + "\n";
    write_or_print(out, &text)?;
    Ok(EXIT_OK)
}

pub fn export_references(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(runtime)?;
    for r in Reference::ALL {
        let path = dir.join(format!("{}.seq", r.name()));
        fs::write(&path, r.text())
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime)?;
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}

/// Builds the environment and agent configs, rejecting bad combinations
/// before anything runs.
fn configs(run: &RunArgs, steps: u64) -> Result<(EnvSpec, AgentConfig), Failure> {
    let structure = run.structure.unwrap_or(match run.layout.kind() {
        LayoutKind::Grid2D => Structure::seven_block(),
        _ => Structure::five_brick(),
    });
    if structure == Structure::Free {
        return Err(usage(anyhow!(
            "optimization needs FIVE_BRICK_n or SEVEN_BLOCK_n, not FREE"
        )));
    }
    structure.check_layout(&run.layout).map_err(usage)?;
    let reward = RewardConfig {
        target: run.target,
        big_n: run.big_n,
        gamma: run.gamma,
        time_mode: run.time_mode,
    };
    reward.validate().map_err(usage)?;
    let mut env = EnvSpec::new(run.layout.clone(), structure, reward);
    env.powell_objective = run.powell_objective.into();
    env.episode_length = run.episode_length;
    let agent = AgentConfig {
        total_training_steps: steps,
        rng_seed: run.seed,
        log_interval: run.log_interval,
        batch_size: run.batch_size,
        buffer_capacity: run.buffer_capacity,
        record_wall_time: run.wall_clock,
        ..AgentConfig::default()
    };
    agent.validate().map_err(usage)?;
    if env.episode_length == 0 {
        return Err(usage(anyhow!("episode length must be positive")));
    }
    Ok((env, agent))
}

fn prepare_dir(
    out: Option<PathBuf>,
    default_name: String,
    force: bool,
) -> Result<PathBuf, Failure> {
    let dir = out.unwrap_or_else(|| {
        let root =
            std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
        root.join(default_name)
    });
    if dir.join("manifest.json").exists() && !force {
        return Err(usage(anyhow!(
            "{} already holds a run; pass --force to overwrite",
            dir.display()
        )));
    }
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(runtime)?;
    Ok(dir)
}

fn exact_file_name(ts: f64, tp: f64) -> String {
    format!("Ts_{ts:.6}_Tp_{tp:.6}.seq")
}

/// Known exact times for the layout and target, printed next to results.
fn reference_lines(layout: LayoutKind, target: Target) -> Vec<(&'static str, f64, Option<f64>)> {
    match (layout, target) {
        (LayoutKind::Linear11, Target::Cnot) => vec![
            ("FW", FW_T_SEQUENTIAL, Some(FW_T_PARALLEL)),
            (
                "inverse FW",
                INVERSE_FW_T_SEQUENTIAL,
                Some(INVERSE_FW_T_PARALLEL),
            ),
        ],
        (LayoutKind::Linear11, Target::Cz) => vec![("fastest CZ", 16.0, Some(11.5))],
        (LayoutKind::Linear33, Target::Cnot) => vec![
            ("33 with four SWAPs per side", 26.0, None),
            ("33 best", 24.0, None),
        ],
        (LayoutKind::Grid2D, Target::Cnot) => vec![("2D best", 20.0, Some(FW_T_PARALLEL))],
        _ => Vec::new(),
    }
}

fn summarize(outcome: &TrainingOutcome, env: &EnvSpec) {
    println!("best d      {:.6e}", outcome.best_d);
    match outcome.log.last() {
        Some(row) if row.best_ts.is_some() => {
            println!("best T_s    {:.6}", row.best_ts.unwrap_or_default());
            println!("best T_p    {:.6}", row.best_tp.unwrap_or_default());
        }
        _ => println!("no exact sequence found"),
    }
    for (label, ts, tp) in reference_lines(env.layout.kind(), env.reward.target) {
        match tp {
            Some(tp) => println!("reference   {label}: T_s {ts:.6}, T_p {tp:.6}"),
            None => println!("reference   {label}: T_s {ts:.6}"),
        }
    }
}

pub fn optimize(args: OptimizeArgs) -> CmdResult {
    let (env, agent) = match &args.manifest {
        Some(path) => {
            let m = RunManifest::load(path)
                .with_context(|| format!("loading {}", path.display()))
                .map_err(usage)?;
            if m.command != "optimize" {
                return Err(usage(anyhow!(
                    "{} is a {} manifest, not an optimize manifest",
                    path.display(),
                    m.command
                )));
            }
            (m.env, m.agent)
        }
        None => configs(&args.run, args.steps)?,
    };
    let default_name = format!(
        "optimize-{}-{}-seed{}-steps{}",
        env.layout.name().to_ascii_lowercase(),
        env.reward.target.to_string().to_ascii_lowercase(),
        agent.rng_seed,
        agent.total_training_steps
    );
    let dir = prepare_dir(args.out, default_name, args.force)?;
    let mut manifest = RunManifest::new("optimize", env.clone(), agent.clone());
    for (role, file) in [
        ("manifest", "manifest.json"),
        ("training_log", "training_log.csv"),
        ("checkpoint", "checkpoint.json"),
        ("best_sequence", "best.seq"),
        ("exact_sequences", "exact"),
    ] {
        manifest.artifacts.insert(role.into(), file.into());
    }
    manifest.save(&dir.join("manifest.json")).map_err(runtime)?;

    let outcome = train(&agent, &env).map_err(runtime)?;
    outcome
        .log
        .save(&dir.join("training_log.csv"))
        .map_err(runtime)?;
    outcome
        .checkpoint
        .save(&dir.join("checkpoint.json"))
        .map_err(runtime)?;
    let best = GateSequence::from_alphas(&env.layout, env.structure, &outcome.best_alphas)
        .map_err(runtime)?;
    fs::write(dir.join("best.seq"), serialize(&best))
        .context("writing best.seq")
        .map_err(runtime)?;
    let exact_dir = dir.join("exact");
    if exact_dir.exists() {
        fs::remove_dir_all(&exact_dir)
            .context("clearing old exact sequences")
            .map_err(runtime)?;
    }
    fs::create_dir_all(&exact_dir)
        .context("creating exact/")
        .map_err(runtime)?;
    for find in &outcome.exact {
        let seq =
            GateSequence::from_alphas(&env.layout, env.structure, &find.alphas).map_err(runtime)?;
        let name = exact_file_name(find.eval.t_sequential, find.eval.t_parallel);
        fs::write(exact_dir.join(&name), serialize(&seq))
            .with_context(|| format!("writing {name}"))
            .map_err(runtime)?;
    }
    println!("run         {}", dir.display());
    println!("steps       {}", agent.total_training_steps);
    println!("exact found {}", outcome.exact.len());
    summarize(&outcome, &env);
    Ok(EXIT_OK)
}

pub fn bench(args: BenchArgs) -> CmdResult {
    let max_steps = args.grid.iter().copied().max().unwrap_or(0);
    let (env, agent) = configs(&args.run, max_steps)?;
    let default_name = format!(
        "bench-{}-{}-seed{}",
        env.layout.name().to_ascii_lowercase(),
        env.reward.target.to_string().to_ascii_lowercase(),
        agent.rng_seed
    );
    let dir = prepare_dir(args.out, default_name, args.force)?;
    let mut manifest = RunManifest::new("bench", env.clone(), agent.clone());
    manifest.grid = Some(args.grid.clone());
    manifest
        .artifacts
        .insert("manifest".into(), "manifest.json".into());
    manifest
        .artifacts
        .insert("curve".into(), "curve.csv".into());
    manifest.save(&dir.join("manifest.json")).map_err(runtime)?;

    let mut rows = Vec::with_capacity(args.grid.len());
    for &steps in &args.grid {
        let cfg = AgentConfig {
            total_training_steps: steps,
            ..agent.clone()
        };
        let mut row = CurveRow::new(steps, cfg.rng_seed);
        match train(&cfg, &env) {
            Ok(out) => {
                let last = out.log.last().cloned();
                row.best_d = Some(out.best_d);
                row.best_ts = last.as_ref().and_then(|r| r.best_ts);
                row.best_tp = last.as_ref().and_then(|r| r.best_tp);
            }
            Err(e) => row.status = e.to_string(),
        }
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        println!(
            "steps {:>7}  best_d {}  best_Ts {}  best_Tp {}  {}",
            steps,
            row.best_d
                .map_or_else(|| "-".to_string(), |x| format!("{x:.6e}")),
            fmt(row.best_ts),
            fmt(row.best_tp),
            row.status
        );
        rows.push(row);
    }
    fs::write(dir.join("curve.csv"), curve_to_csv(&rows))
        .context("writing curve.csv")
        .map_err(runtime)?;
    println!("reference   FW T_s {FW_T_SEQUENTIAL:.6}, T_p {FW_T_PARALLEL:.6}; inverse FW T_s {INVERSE_FW_T_SEQUENTIAL:.6}, T_p {INVERSE_FW_T_PARALLEL:.6}");
    println!("curve       {}", dir.join("curve.csv").display());
    Ok(EXIT_OK)
}
