use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rfpca::compositional::{composition_with_flags, CompositionCurve};
use rfpca::io::{
    fmt_f64, read_counts_csv, read_model_json, read_trajectories_csv, to_json_writer, write_model_json,
    write_proportions_csv, write_trajectories_csv, ManifoldDoc,
};
use rfpca::rfpca::{mode_of_variation, select_num_components};
use rfpca::simgen::theoretical_fve;
use rfpca::trajectory::uniform_grid;
use rfpca::{
    compute_fve, fit_l2_fpca, fit_rfpca, gen_samples, geodesic_fve_l2, smooth_counts, sqrt_embed, to_proportions,
    truncate_representation, Error, FrechetConfig, L2Chart, ManifoldKind, ManifoldSpec, Point, Result, SimConfig,
    TrajectorySample,
};
use serde::Serialize;

use crate::{Baseline, ChartArg, Command, CompositionalArgs, FitArgs, FveArgs, ReconstructArgs, SimulateArgs};

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Reconstruct(args) => reconstruct(args),
        Command::Fve(args) => fve(args),
        Command::Compositional(args) => compositional(args),
    }
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| with_path(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| with_path(path, e))
}

fn finish(mut writer: BufWriter<File>, path: &Path) -> Result<()> {
    writer.flush().map_err(|e| with_path(path, e))
}

/// `data.csv` becomes `data.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

#[derive(Serialize)]
struct Truth<'a> {
    manifold: ManifoldDoc,
    seed: u64,
    n: usize,
    m: usize,
    components: usize,
    decay_base: f64,
    grid: Vec<f64>,
    mean: Vec<&'a [f64]>,
    /// `[k][m][d0]`.
    eigenfunctions: &'a [Vec<Vec<f64>>],
    /// `[n][k]`.
    scores: &'a [Vec<f64>],
    theoretical_fve: Vec<f64>,
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let config =
        SimConfig { m: args.m, n_components: args.components, ..SimConfig::new(args.manifold, args.n, args.seed) };
    let data = gen_samples(&config)?;
    let out = create(&args.out)?;
    write_trajectories_csv(out.get_ref(), &data.samples)?;
    finish(out, &args.out)?;

    let truth_path = args.truth.clone().unwrap_or_else(|| sibling(&args.out, "truth.json"));
    let truth = Truth {
        manifold: (&config.manifold).into(),
        seed: config.seed,
        n: config.n,
        m: config.m,
        components: config.n_components,
        decay_base: config.decay_base,
        grid: uniform_grid(config.m),
        mean: data.mean_curve.iter().map(Point::as_slice).collect(),
        eigenfunctions: &data.eigenfunctions,
        scores: &data.scores,
        theoretical_fve: theoretical_fve(&config),
    };
    let writer = create(&truth_path)?;
    to_json_writer(writer.get_ref(), &truth)?;
    finish(writer, &truth_path)
}

fn read_samples(path: &Path, spec: &ManifoldSpec) -> Result<Vec<TrajectorySample>> {
    read_trajectories_csv(open(path)?, spec)
}

fn check_orthant(samples: &[TrajectorySample]) -> Result<()> {
    for s in samples {
        for (row, p) in s.points.iter().enumerate() {
            if let Some(column) = p.coords.iter().position(|&x| x < -rfpca::compositional::ORTHANT_TOLERANCE) {
                return Err(Error::NegativeCoordinate { row, column, value: p.coords[column] });
            }
        }
    }
    Ok(())
}

fn fit(args: &FitArgs) -> Result<()> {
    if !(args.gamma > 0.0 && args.gamma < 1.0) {
        return Err(Error::GammaOutOfRange(args.gamma));
    }
    if args.compositional && args.manifold.kind() != ManifoldKind::Sphere {
        return Err(Error::InvalidConfig("compositional data live on a sphere".into()));
    }
    let samples = read_samples(&args.input, &args.manifold)?;
    if args.compositional {
        check_orthant(&samples)?;
    }
    let mut model = fit_rfpca(&args.manifold, &samples, &FrechetConfig::default(), args.kmax)?;
    model.compositional = args.compositional;
    let selection = select_num_components(&model, args.gamma)?;
    for w in model.warnings.iter().chain(&selection.warning) {
        eprintln!("warning: {w}");
    }
    let out = create(&args.out)?;
    write_model_json(out.get_ref(), &model)?;
    finish(out, &args.out)?;

    println!("manifold {} n {} m {}", model.spec, model.scores.len(), model.m());
    println!("K eigenvalue FVE");
    for (k, (lambda, f)) in model.eigenvalues.iter().zip(&model.fve).enumerate() {
        println!("{} {} {}", k + 1, fmt_f64(*lambda), fmt_f64(*f));
    }
    println!("K* {} gamma {}", selection.k, fmt_f64(args.gamma));
    Ok(())
}

fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let model = read_model_json(open(&args.model)?)?;
    let curves: Vec<TrajectorySample> = match args.mode {
        Some(k) => {
            let minus = mode_of_variation(&model, k, -args.scale)?;
            let plus = mode_of_variation(&model, k, args.scale)?;
            vec![
                TrajectorySample::new(format!("mode{k}_minus"), model.grid.clone(), minus)?,
                TrajectorySample::new("mean", model.grid.clone(), model.mean_curve.clone())?,
                TrajectorySample::new(format!("mode{k}_plus"), model.grid.clone(), plus)?,
            ]
        }
        None => model
            .subject_ids
            .iter()
            .zip(&model.scores)
            .map(|(id, scores)| {
                let (_, points) = truncate_representation(&model, scores, args.k)?;
                TrajectorySample::new(id.clone(), model.grid.clone(), points)
            })
            .collect::<Result<_>>()?,
    };
    let out = create(&args.out)?;
    write_trajectories_csv(out.get_ref(), &curves)?;
    finish(out, &args.out)?;

    if model.compositional {
        let mut flagged = 0;
        let compositions: Vec<CompositionCurve> = curves
            .iter()
            .map(|c| {
                let (comp, flags) = composition_with_flags(c);
                flagged += flags.iter().filter(|&&f| f).count();
                comp
            })
            .collect();
        if flagged > 0 {
            eprintln!("warning: {flagged} reconstructed points left the nonnegative orthant and were clamped");
        }
        let path = args.composition_out.clone().unwrap_or_else(|| sibling(&args.out, "composition.csv"));
        let out = create(&path)?;
        write_proportions_csv(out.get_ref(), &compositions)?;
        finish(out, &path)?;
    }
    Ok(())
}

fn fve(args: &FveArgs) -> Result<()> {
    let model = read_model_json(open(&args.model)?)?;
    let spec = model.spec;
    let samples = read_samples(&args.input, &spec)?;
    let k_max = model.k_max();
    let l2 = match args.baseline {
        Some(Baseline::L2) => {
            let chart = match args.l2_chart {
                ChartArg::Ambient => L2Chart::Ambient,
                ChartArg::Lonlat => L2Chart::LonLat,
            };
            Some(fit_l2_fpca(&spec, &samples, k_max, chart)?)
        }
        None => None,
    };
    let mut rows = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let r = compute_fve(&spec, &samples, &model, k)?;
        let mut row = format!("{k} {} {}", fmt_f64(r.uk), fmt_f64(r.fve));
        if let Some(l2) = &l2 {
            let b = geodesic_fve_l2(&spec, &samples, l2, &model.mean_curve, k)?;
            row.push_str(&format!(" {} {}", fmt_f64(b.uk), fmt_f64(b.fve)));
        }
        rows.push(row);
    }
    let header = if l2.is_some() { "K U_R FVE_R U_L FVE_L" } else { "K U_R FVE_R" };
    println!("{header}");
    for row in rows {
        println!("{row}");
    }
    Ok(())
}

fn compositional(args: &CompositionalArgs) -> Result<()> {
    if args.grid < 2 {
        return Err(Error::InvalidConfig("grid must have at least 2 points".into()));
    }
    let panels = read_counts_csv(open(&args.counts)?)?;
    let mut samples = Vec::with_capacity(panels.len());
    for panel in &panels {
        let lo = panel.times.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = panel.times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let eval: Vec<f64> = uniform_grid(args.grid).iter().map(|u| lo + (hi - lo) * u).collect();
        let smoothed = smooth_counts(panel, args.bandwidth, &eval)?;
        samples.push(sqrt_embed(&to_proportions(&smoothed)?)?);
    }
    let out = create(&args.out)?;
    write_trajectories_csv(out.get_ref(), &samples)?;
    finish(out, &args.out)
}
