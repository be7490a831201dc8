//! One function per subcommand. Each returns whether its own checks passed.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use simplex_pa::bicoupling::{scaled_fixed_degrees, scaling_limit_cdf, scaling_statistic, simulate_bi};
use simplex_pa::export::{snapshot_json, write_bi_trajectory, write_limit_samples, write_tail_table, TailRow};
use simplex_pa::limitlaw::{pgf_numeric, sample_limit_degree, LimitSample};
use simplex_pa::model::{DegreeVector, GrowthState};
use simplex_pa::recursion::{marginal_closed_form, marginal_tail, marginalize, solve_joint_pmf, solve_marginal_pmf};
use simplex_pa::regvar::{empirical_tail_box, tail_measure_box, TailConfig, XSampler, DEFAULT_Z_BIG};
use simplex_pa::rng::{clock_rng, selection_rng, stream_rng};
use simplex_pa::stats::MeanVar;
use simplex_pa::{par, validate, ModelParams, SCHEMA};

use crate::config::{Format, RunConfig};

const SHARD: u64 = 10_000;

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(cfg: &RunConfig, value: &T) -> Result<()> {
    let mut w = sink(cfg)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn vector_label(v: &DegreeVector) -> String {
    v.as_slice().iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn limit_draws(p: &ModelParams, samples: u64, seed: u64) -> Vec<LimitSample> {
    let shards = par::shard_sizes(samples, SHARD);
    par::map_indexed(shards.len() as u64, |s| {
        let mut rng = stream_rng(seed, s);
        (0..shards[s as usize]).map(|_| sample_limit_degree(p, &mut rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

pub fn simulate(cfg: &RunConfig) -> Result<bool> {
    let p = &cfg.params;
    let runs = par::map_indexed(cfg.replicates, |r| {
        let mut g = GrowthState::new(p.clone());
        g.run(cfg.n, &mut selection_rng(cfg.seed, r));
        let invariants = json!({
            "simplex_count": g.simplex_count(),
            "expected_simplex_count": p.simplex_count(cfg.n),
            "degree_sum": g.degree_sum(),
            "recounted_degree_sum": g.recount_degree_sum(),
            "expected_degree_sum": p.degree_sum(cfg.n),
        });
        let holds = g.simplex_count() as u64 == p.simplex_count(cfg.n)
            && g.degree_sum() == p.degree_sum(cfg.n)
            && g.recount_degree_sum() == p.degree_sum(cfg.n);
        (snapshot_json(&g), invariants, holds, g.degree_counts())
    });
    let all_hold = runs.iter().all(|r| r.2);
    match cfg.format {
        Format::Json => {
            let reps: Vec<_> = runs
                .iter()
                .enumerate()
                .map(|(r, (snap, inv, holds, _))| json!({"replicate": r, "invariants_hold": holds, "invariants": inv, "snapshot": snap}))
                .collect();
            write_json(cfg, &json!({"schema": SCHEMA, "command": "simulate", "seed": cfg.seed, "replicates": reps}))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(cfg)?);
            w.write_record(["replicate", "vector", "count"])?;
            for (r, (_, _, _, counts)) in runs.iter().enumerate() {
                for (v, c) in counts.iter() {
                    w.write_record([r.to_string(), vector_label(v), c.to_string()])?;
                }
            }
            w.flush()?;
        }
    }
    eprintln!(
        "simulate: k={} delta={} n={} replicates={} simplices={} invariants {}",
        p.k(),
        p.delta(),
        cfg.n,
        cfg.replicates,
        p.simplex_count(cfg.n),
        if all_hold { "hold" } else { "VIOLATED" }
    );
    Ok(all_hold)
}

pub fn recursion(cfg: &RunConfig) -> Result<bool> {
    let p = &cfg.params;
    let cap = cfg.cap.unwrap_or(30);
    let joint = solve_joint_pmf(p, cap)?;
    let marginal = solve_marginal_pmf(p, cap)?;
    let from_joint = marginalize(&joint, 0);
    let mismatch = marginal
        .iter()
        .map(|(i, q)| (q - from_joint.get(&i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    let consistent = mismatch <= 1e-10;
    let base = DegreeVector::from(p.minimal_vector());
    let base_p = joint.get(&base);

    match cfg.format {
        Format::Json => {
            let joint_rows: Vec<_> = joint.entries().iter().map(|(v, q)| json!({"vector": v, "p": q})).collect();
            let marginal_rows: Vec<_> = marginal
                .iter()
                .map(|(i, q)| json!({"i": i, "p": q, "closed_form": marginal_closed_form(p, i)}))
                .collect();
            write_json(
                cfg,
                &json!({
                    "schema": SCHEMA,
                    "command": "recursion",
                    "k": p.k(),
                    "delta": p.delta(),
                    "cap": cap,
                    "base_case": {"vector": base, "p": base_p},
                    "total_mass": joint.total_mass(),
                    "tail_mass_beyond_cap": marginal_tail(p, cap),
                    "consistency": {"max_abs_diff": mismatch, "consistent": consistent},
                    "joint": joint_rows,
                    "marginal": marginal_rows,
                }),
            )?;
        }
        Format::Csv => joint.write_csv(sink(cfg)?)?,
    }
    eprintln!("p({}) = {}", vector_label(&base), (base_p * 1e12).round() / 1e12);
    eprintln!("recursion: cap={cap} entries={} mass={:.6}", joint.len(), joint.total_mass());
    if !consistent {
        eprintln!("recursion: marginal mismatch {mismatch:e} exceeds 1e-10");
    }
    Ok(consistent)
}

pub fn limit_sample(cfg: &RunConfig) -> Result<bool> {
    let p = &cfg.params;
    let draws = limit_draws(p, cfg.samples, cfg.seed);
    match cfg.format {
        Format::Csv => write_limit_samples(p.k(), &draws, sink(cfg)?)?,
        Format::Json => write_json(
            cfg,
            &json!({"schema": SCHEMA, "command": "limit-sample", "k": p.k(), "delta": p.delta(), "seed": cfg.seed, "samples": draws}),
        )?,
    }
    let means: Vec<String> = (0..=p.k())
        .map(|i| format!("{:.3}", draws.iter().map(|s| s.d[i] as f64).collect::<MeanVar>().mean()))
        .collect();
    eprintln!("limit-sample: {} draws, coordinate means [{}]", draws.len(), means.join(", "));
    Ok(true)
}

fn grid(k: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for _ in 0..=k {
        points = points
            .into_iter()
            .flat_map(|p: Vec<f64>| [0.3, 0.6, 0.9].map(|x| [p.clone(), vec![x]].concat()))
            .collect();
    }
    points
}

#[derive(Serialize)]
struct PgfRow {
    x: Vec<f64>,
    quadrature: f64,
    table: f64,
    tail_bound: f64,
    monte_carlo: f64,
    se: f64,
}

pub fn pgf(cfg: &RunConfig) -> Result<bool> {
    let p = &cfg.params;
    let cap = cfg.cap.unwrap_or(match p.k() {
        0 => 400,
        1 => 200,
        2 => 60,
        _ => 25,
    });
    let table = solve_joint_pmf(p, cap)?;
    let tail = marginal_tail(p, cap);
    let draws = limit_draws(p, cfg.samples, cfg.seed);
    let mut rows = Vec::new();
    for x in grid(p.k()) {
        let table_sum: f64 = table
            .entries()
            .iter()
            .map(|(v, q)| q * x.iter().zip(v.as_slice()).map(|(&xi, &vi)| xi.powi(vi as i32)).product::<f64>())
            .sum();
        let mc: MeanVar = draws
            .iter()
            .map(|s| x.iter().zip(&s.d).map(|(&xi, &di)| xi.powf(di as f64)).product::<f64>())
            .collect();
        rows.push(PgfRow {
            quadrature: pgf_numeric(p, &x)?,
            table: table_sum,
            tail_bound: x[0].powi(cap as i32 + 1) * tail,
            monte_carlo: mc.mean(),
            se: mc.se(),
            x,
        });
    }
    match cfg.format {
        Format::Json => write_json(cfg, &json!({"schema": SCHEMA, "command": "pgf", "k": p.k(), "delta": p.delta(), "cap": cap, "rows": rows}))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(cfg)?);
            let mut header: Vec<String> = (0..=p.k()).map(|i| format!("x_{i}")).collect();
            header.extend(["quadrature", "table", "tail_bound", "monte_carlo", "se"].map(String::from));
            w.write_record(&header)?;
            for r in &rows {
                let mut rec: Vec<String> = r.x.iter().map(f64::to_string).collect();
                rec.extend([r.quadrature, r.table, r.tail_bound, r.monte_carlo, r.se].map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    let worst = rows.iter().map(|r| (r.quadrature - r.table).abs() - r.tail_bound).fold(f64::NEG_INFINITY, f64::max);
    eprintln!("pgf: {} points, max |quadrature - table| beyond tail bound {worst:e}", rows.len());
    Ok(true)
}

pub fn tail(cfg: &RunConfig) -> Result<bool> {
    let p = &cfg.params;
    let k = p.k();
    let mut boxes = vec![vec![1.0; k + 1]];
    for i in 0..=k {
        let mut x = vec![1.0; k + 1];
        x[i] = 2.0;
        boxes.push(x);
    }
    let sampler = XSampler::new(p, DEFAULT_Z_BIG)?;
    let shards = par::shard_sizes(cfg.samples, SHARD);
    let inner: Vec<_> = par::map_indexed(shards.len() as u64, |s| {
        let mut rng = stream_rng(cfg.seed, (1 << 32) + s);
        (0..shards[s as usize]).map(|_| sampler.sample(&mut rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let draws = limit_draws(p, cfg.samples, cfg.seed);
    let mut rows = Vec::new();
    for x in &boxes {
        let est = tail_measure_box(p, x, &inner, TailConfig::default())?;
        for h in [10.0, 100.0, 1000.0] {
            rows.push(TailRow { x: x.clone(), h, empirical: empirical_tail_box(p, &draws, h, x)?, quadrature: est.quadrature, se: est.se });
        }
    }
    match cfg.format {
        Format::Csv => write_tail_table(k, &rows, sink(cfg)?)?,
        Format::Json => write_json(cfg, &json!({"schema": SCHEMA, "command": "tail", "k": k, "delta": p.delta(), "rows": rows}))?,
    }
    eprintln!("tail: {} boxes, {} limit draws, {} inner draws", boxes.len(), draws.len(), inner.len());
    Ok(true)
}

pub fn bi(cfg: &RunConfig) -> Result<bool> {
    let p = &cfg.params;
    if cfg.n == 0 {
        bail!("bi needs --n of at least 1");
    }
    let trajs = par::map_indexed(cfg.replicates, |r| {
        simulate_bi(p, cfg.n, &mut selection_rng(cfg.seed, r), &mut clock_rng(cfg.seed, r))
    });
    match cfg.format {
        Format::Csv => {
            if trajs.len() != 1 {
                bail!("CSV trajectories are written for a single replicate");
            }
            write_bi_trajectory(&trajs[0], sink(cfg)?)?;
        }
        Format::Json => {
            let reps = trajs
                .iter()
                .enumerate()
                .map(|(r, t)| -> Result<_> {
                    let stat = scaling_statistic(t, cfg.n)?;
                    Ok(json!({
                        "replicate": r,
                        "T_n": t.jump_time(cfg.n)?,
                        "scaling_statistic": stat,
                        "limit_cdf_at_statistic": scaling_limit_cdf(p, stat),
                        "label1_scaled_degrees": scaled_fixed_degrees(t, cfg.n, 1)?,
                        "total_value": t.total_value(),
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            write_json(cfg, &json!({"schema": SCHEMA, "command": "bi", "k": p.k(), "delta": p.delta(), "n": cfg.n, "seed": cfg.seed, "replicates": reps}))?;
        }
    }
    eprintln!("bi: {} replicate(s) of {} events", trajs.len(), cfg.n);
    Ok(true)
}

pub fn validate(cfg: &RunConfig) -> Result<bool> {
    let report = validate::run(&cfg.suites, cfg.seed)?;
    for s in &report.suites {
        eprintln!("{}", validate::summary_line(s));
    }
    match cfg.format {
        Format::Json => write_json(cfg, &report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(cfg)?);
            w.write_record(["suite", "check", "measured", "bound", "tolerance", "seed", "passed", "gating"])?;
            for s in &report.suites {
                for c in &s.checks {
                    w.write_record([
                        s.suite.clone(),
                        c.name.clone(),
                        c.measured.to_string(),
                        format!("{:?}", c.bound).to_lowercase(),
                        c.tolerance.to_string(),
                        c.seed.to_string(),
                        c.passed.to_string(),
                        c.gating.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(report.passed)
}
