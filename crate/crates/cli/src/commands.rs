use crate::config::{Config, Resolved};
use crate::manifest::{Outputs, RunManifest, SNAPSHOT_FILE};
use crate::{
    CalibrateArgs, Cli, Command, Failure, ReadoutArgs, RegionMapArgs, ThresholdArgs, TrajectoryArgs,
};
use jpo_core::chain::{calibrate, synthetic_dataset, CalibrationDataset};
use jpo_core::device::{instability_threshold, QubitState};
use jpo_core::dynamics::{
    cell_point, fastest_rate, integrate, map_region, write_trajectory, JumpSchedule, RegionGrid,
    RegionMap, SimulationConfig,
};
use jpo_core::readout::{
    analyze, discrimination_map, error_budget, rectified_analyze, report_text, run_both,
    write_histogram_2d, write_histograms, write_records_binary, write_records_text, write_s_curves,
    CycleConfig, DetectionMode,
};
use jpo_core::rng::{derive_seed, Domain};
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufReader, Write};
use std::time::Instant;

/// Flux biases and probe powers of the synthetic calibration sweep.
const SYNTHETIC_FLUXES_OVER_PI: [f64; 5] = [0.12, 0.16, 0.185, 0.22, 0.26];
const SYNTHETIC_POWERS_DBM: (f64, f64, usize) = (-30.0, 0.0, 16);

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(Failure::Usage)?,
        None => Config::default(),
    };
    let mut resolved = config.resolve(cli.seed).map_err(Failure::Usage)?;
    if let Command::Threshold(args) = &cli.command {
        return threshold(&resolved, args);
    }
    if let Command::Readout(ReadoutArgs { shots: Some(n), .. }) = &cli.command {
        if *n == 0 {
            return Err(Failure::Usage("--shots must be at least 1".into()));
        }
        resolved.cycle.n_shots = *n;
    }

    let started = Instant::now();
    let mut out = Outputs::new(&cli.out)?;
    out.write_text(SNAPSHOT_FILE, &config.to_toml())?;
    match &cli.command {
        Command::RegionMap(args) => region_map(&resolved, cli.seed, args, &mut out)?,
        Command::Readout(args) => readout(&resolved, cli.seed, args, &mut out)?,
        Command::Trajectory(args) => trajectory(&resolved, cli.seed, args, &mut out)?,
        Command::Calibrate(args) => calibration(&resolved, cli.seed, args, &mut out)?,
        Command::Threshold(_) => unreachable!(),
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        command: std::env::args().collect(),
        config_path: cli.config.as_ref().map(|p| p.display().to_string()),
        rng_seed: cli.seed,
        output_dir: out.dir().display().to_string(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        config,
        derived: resolved.derived(),
        outputs: out.files().to_vec(),
    };
    manifest.write(out.dir())?;
    Ok(())
}

fn parse_grid(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("--grid expects NxM with N, M >= 2, got `{text}`"));
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a < 2 || b < 2 {
        return Err(bad());
    }
    Ok((a, b))
}

fn region_map(
    r: &Resolved,
    seed: u64,
    args: &RegionMapArgs,
    out: &mut Outputs,
) -> Result<(), Failure> {
    let (delta_points, epsilon_points) = parse_grid(&args.grid)?;
    if args.shots_per_cell == 0 {
        return Err(Failure::Usage("--shots-per-cell must be at least 1".into()));
    }
    let grid = RegionGrid {
        delta_min: args.delta_min,
        delta_max: args.delta_max,
        delta_points,
        epsilon_min: args.epsilon_min,
        epsilon_max: args.epsilon_max,
        epsilon_points,
    };
    grid.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if !(args.duration > 0.0) {
        return Err(Failure::Usage("--duration must be positive".into()));
    }

    // Large |δ| and ε corners are stiffer than the operating point.
    let dt = match args.dt {
        Some(dt) if dt > 0.0 => dt,
        Some(_) => return Err(Failure::Usage("--dt must be positive".into())),
        None => {
            let rate = (0..grid.len())
                .map(|index| {
                    let (row, column) = grid.cell(index);
                    let point = cell_point(&r.point, grid.delta(column), grid.epsilon(row));
                    fastest_rate(&point, 0.0)
                })
                .fold(0.0, f64::max);
            r.simulation.dt.min(0.05 / rate)
        }
    };

    for state in [QubitState::Ground, QubitState::Excited] {
        let mut sum: Option<RegionMap> = None;
        for k in 0..args.shots_per_cell {
            let config = SimulationConfig {
                t_end: args.duration,
                dt,
                rng_seed: derive_seed(seed, Domain::RegionMap, k as u64),
                ..r.simulation.clone()
            };
            let map = map_region(&grid, &r.point, &config, state, 0.5)?;
            sum = Some(match sum {
                None => map,
                Some(mut acc) => {
                    for (a, b) in acc.photons.iter_mut().zip(&map.photons) {
                        *a += b;
                    }
                    acc.failures.extend(map.failures);
                    acc
                }
            });
        }
        let map = sum.expect("at least one pass");
        let scale = 1.0 / args.shots_per_cell as f64;
        let name = format!("region_q{}.dat", state.index());
        let mut w = out.create(&name)?;
        writeln!(
            w,
            "# qubit state {}, {} trajectories per cell, |A|^2 averaged over the second half of {:e} s",
            state.index(),
            args.shots_per_cell,
            args.duration
        )?;
        for f in &map.failures {
            writeln!(
                w,
                "# failed cell row {} column {}: {}",
                f.row, f.column, f.message
            )?;
        }
        writeln!(w, "delta_ground_over_gamma epsilon_over_gamma photons")?;
        for row in 0..grid.epsilon_points {
            for column in 0..grid.delta_points {
                writeln!(
                    w,
                    "{:.6} {:.6} {:.6e}",
                    grid.delta(column),
                    grid.epsilon(row),
                    map.at(row, column) * scale
                )?;
            }
        }
        w.flush()?;
    }

    // Boundary on the same detuning axis: the |1⟩ detuning is offset by −2χ.
    let p = &r.point;
    let offset = (p.detuning(QubitState::Excited) - p.detuning(QubitState::Ground)) / p.gamma;
    let mut w = out.create("boundary.dat")?;
    writeln!(w, "# instability boundary, beta = {}", p.beta)?;
    writeln!(
        w,
        "delta_ground_over_gamma eps_lower_q0_over_gamma eps_upper_q0_over_gamma eps_lower_q1_over_gamma eps_upper_q1_over_gamma"
    )?;
    let fine = 4 * (grid.delta_points - 1) + 1;
    let step = (grid.delta_max - grid.delta_min) / (fine - 1) as f64;
    for k in 0..fine {
        let d = grid.delta_min + k as f64 * step;
        let [l0, u0] = branches(d, p.beta);
        let [l1, u1] = branches(d + offset, p.beta);
        writeln!(w, "{d:.6} {l0:.6e} {u0:.6e} {l1:.6e} {u1:.6e}")?;
    }
    w.flush()?;

    if let Some(shots) = args.discrimination_shots {
        if shots == 0 {
            return Err(Failure::Usage(
                "--discrimination-shots must be at least 1".into(),
            ));
        }
        let cycle = CycleConfig {
            n_shots: shots,
            ..r.cycle.clone()
        };
        let sim = SimulationConfig {
            dt,
            ..r.simulation.clone()
        };
        let map = discrimination_map(
            &grid,
            &r.point,
            &cycle,
            &r.qubit,
            &r.detection,
            &sim,
            DetectionMode::Amplitude,
            seed,
        )?;
        let mut w = out.create("discrimination.dat")?;
        writeln!(w, "# {shots} readout cycles per state and cell")?;
        for f in &map.failures {
            writeln!(
                w,
                "# failed cell row {} column {}: {}",
                f.row, f.column, f.message
            )?;
        }
        writeln!(
            w,
            "delta_ground_over_gamma epsilon_over_gamma discrimination"
        )?;
        for row in 0..grid.epsilon_points {
            for column in 0..grid.delta_points {
                writeln!(
                    w,
                    "{:.6} {:.6} {:.6}",
                    grid.delta(column),
                    grid.epsilon(row),
                    map.at(row, column)
                )?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// Both branches in units of Γ; NaN where no boundary exists.
fn branches(delta_over_gamma: f64, beta: f64) -> [f64; 2] {
    match instability_threshold(delta_over_gamma, beta, 1.0) {
        Ok(b) => [b.lower, b.upper],
        Err(_) => [f64::NAN, f64::NAN],
    }
}

fn readout(r: &Resolved, seed: u64, args: &ReadoutArgs, out: &mut Outputs) -> Result<(), Failure> {
    let mut records = run_both(
        &r.cycle,
        &r.qubit,
        &r.point,
        &r.detection,
        &r.simulation,
        seed,
    )?;
    let analysis = if args.rectified {
        rectified_analyze(&records)?
    } else {
        analyze(&records)?
    };
    let budget = error_budget(&records, &analysis);
    analysis.apply(&mut records);

    if args.binary {
        let mut w = out.create("records.bin")?;
        write_records_binary(&mut w, &records)?;
        w.flush()?;
    } else {
        let mut w = out.create("records.txt")?;
        write_records_text(&mut w, &records)?;
        w.flush()?;
    }
    let report = report_text(&analysis, Some(&budget));
    out.write_text("report.toml", &report)?;
    let mut w = out.create("histogram_1d.dat")?;
    write_histograms(&mut w, &analysis)?;
    w.flush()?;
    for state in [QubitState::Ground, QubitState::Excited] {
        let mut w = out.create(&format!("histogram_2d_q{}.dat", state.index()))?;
        write_histogram_2d(&mut w, &analysis, state)?;
        w.flush()?;
    }
    let mut w = out.create("s_curves.dat")?;
    write_s_curves(&mut w, &analysis)?;
    w.flush()?;
    print!("{report}");
    Ok(())
}

fn states(spec: &str) -> Result<Vec<QubitState>, Failure> {
    match spec {
        "0" => Ok(vec![QubitState::Ground]),
        "1" => Ok(vec![QubitState::Excited]),
        "both" => Ok(vec![QubitState::Ground, QubitState::Excited]),
        other => Err(Failure::Usage(format!(
            "--state expects 0, 1 or both, got `{other}`"
        ))),
    }
}

fn trajectory(
    r: &Resolved,
    seed: u64,
    args: &TrajectoryArgs,
    out: &mut Outputs,
) -> Result<(), Failure> {
    if args.average == 0 {
        return Err(Failure::Usage("--average must be at least 1".into()));
    }
    for state in states(&args.state)? {
        let schedule = JumpSchedule::fixed(state);
        let name = format!("trajectory_q{}.dat", state.index());
        // Same stream layout as the readout cycles: key = run·2 + state.
        let config_for = |k: usize| SimulationConfig {
            rng_seed: derive_seed(seed, Domain::Dynamics, 2 * k as u64 + state.index() as u64),
            ..r.simulation.clone()
        };
        if args.average == 1 {
            let traj = integrate(&config_for(0), &r.point, &schedule)?;
            let mut w = out.create(&name)?;
            let echo = format!(
                "qubit state {}\nsingle trajectory, seed {seed}",
                state.index()
            );
            write_trajectory(&mut w, &traj, &echo)?;
            w.flush()?;
            continue;
        }
        let (times, sum, sum_sq) = (0..args.average)
            .into_par_iter()
            .map(|k| -> Result<_, jpo_core::Error> {
                let t = integrate(&config_for(k), &r.point, &schedule)?;
                let photons: Vec<f64> = t.photons().collect();
                let squares = photons.iter().map(|p| p * p).collect();
                Ok((t.times, photons, squares))
            })
            .try_reduce_with(|a, b| {
                let add = |x: Vec<f64>, y: Vec<f64>| x.iter().zip(&y).map(|(p, q)| p + q).collect();
                Ok((a.0, add(a.1, b.1), add(a.2, b.2)))
            })
            .expect("at least one trajectory")?;
        let n = args.average as f64;
        let mut w = out.create(&name)?;
        writeln!(
            w,
            "# qubit state {}, mean of {} trajectories, seed {seed}",
            state.index(),
            args.average
        )?;
        writeln!(w, "time_s mean_photons sd_photons")?;
        for i in 0..times.len() {
            let mean = sum[i] / n;
            let var = (sum_sq[i] / n - mean * mean).max(0.0);
            writeln!(w, "{:.6e} {:.9e} {:.9e}", times[i], mean, var.sqrt())?;
        }
        w.flush()?;
    }
    Ok(())
}

fn calibration(
    r: &Resolved,
    seed: u64,
    args: &CalibrateArgs,
    out: &mut Outputs,
) -> Result<(), Failure> {
    let dataset = match (&args.dataset, args.synthesize) {
        (Some(path), _) => {
            let file = File::open(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            CalibrationDataset::parse(BufReader::new(file))
                .and_then(|d| d.series().map(|_| d))
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(att)) => {
            if !(args.noise_fraction >= 0.0) {
                return Err(Failure::Usage(
                    "--noise-fraction must be non-negative".into(),
                ));
            }
            let fluxes: Vec<f64> = SYNTHETIC_FLUXES_OVER_PI
                .iter()
                .map(|f| f * std::f64::consts::PI)
                .collect();
            let (lo, hi, n) = SYNTHETIC_POWERS_DBM;
            let powers: Vec<f64> = (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect();
            let d = synthetic_dataset(&r.device, &fluxes, att, &powers, args.noise_fraction, seed)?;
            let mut w = out.create("calibration_dataset.dat")?;
            d.write(&mut w)?;
            w.flush()?;
            d
        }
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let report = calibrate(
        &dataset,
        &r.device,
        args.s11_db,
        r.detection.resonator_frequency,
    )?;
    let text = report.to_text();
    out.write_text("calibration.toml", &text)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{text}");
    Ok(())
}

fn threshold(r: &Resolved, args: &ThresholdArgs) -> Result<(), Failure> {
    if args.points < 2 || !(args.delta_max > args.delta_min) {
        return Err(Failure::Usage(
            "need --points >= 2 and --delta-max > --delta-min".into(),
        ));
    }
    let beta = r.point.beta;
    println!("# instability boundary of the quiet state, beta = {beta}");
    println!("delta_over_gamma eps_lower_over_gamma eps_upper_over_gamma");
    for k in 0..args.points {
        let d = args.delta_min
            + (args.delta_max - args.delta_min) * k as f64 / (args.points - 1) as f64;
        let [lo, hi] = branches(d, beta);
        println!("{d:.6} {lo:.9e} {hi:.9e}");
    }
    Ok(())
}
