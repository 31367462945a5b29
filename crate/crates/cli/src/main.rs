mod args;

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use nalgebra::DVector;
use serde_json::{json, Value};

use args::*;
use gsis_core::experiment::{
    ingest_signals_csv, run_circulant_experiment, run_model_comparison, ExperimentConfig,
    GeneratorRule,
};
use gsis_core::graph::{build_circulant, build_standard_shift};
use gsis_core::io;
use gsis_core::kernels::{make_kernel, KernelFamily};
use gsis_core::krylov::DegeneratePolicy;
use gsis_core::sampling::{
    dynamic_sampler, reconstruct_direct, reconstruct_krylov, subset_sampler, KrylovOptions,
    SamplingScheme,
};
use gsis_core::spaces::{
    bandlimited_space, canonical_generator, frame_bounds, gsis_from_generators, krylov_subspace,
    riesz_bounds, uncertainty_check, GeneratorFamily,
};
use gsis_core::spectral::diagonalize_simultaneously;
use gsis_core::{DiagonalizeOptions, Graph, ShiftKind, ShiftSet, SpectralDecomposition};

struct Setup {
    graph: Arc<Graph>,
    shifts: ShiftSet,
    decomp: Arc<SpectralDecomposition>,
}

fn shift_kind(choice: ShiftChoice) -> ShiftKind {
    match choice {
        ShiftChoice::Adjacency => ShiftKind::Adjacency,
        ShiftChoice::Laplacian => ShiftKind::Laplacian,
        ShiftChoice::NormalizedLaplacian => ShiftKind::NormalizedLaplacian,
    }
}

fn setup(args: &GraphArgs) -> Result<Setup> {
    let (graph, shifts) = if let Some(n) = args.circulant {
        build_circulant(n, &args.q)?
    } else {
        let graph = match (&args.edges, args.path) {
            (Some(path), _) => io::read_edge_list(path)
                .with_context(|| format!("reading {}", path.display()))?,
            (None, Some(n)) => Graph::path(n)?,
            (None, None) => bail!("one of --edges, --circulant or --path is required"),
        };
        let graph = Arc::new(graph);
        let shift = build_standard_shift(&graph, shift_kind(args.shift))?;
        (graph, ShiftSet::single(shift))
    };
    let opts = DiagonalizeOptions { tol: args.tol, seed: args.seed, ..DiagonalizeOptions::default() };
    let decomp = Arc::new(diagonalize_simultaneously(&shifts, &opts)?);
    Ok(Setup { graph, shifts, decomp })
}

fn generator_family(args: &GeneratorArgs, n: usize) -> Result<GeneratorFamily> {
    if let Some(vertices) = &args.deltas {
        return Ok(GeneratorFamily::deltas(n, vertices)?);
    }
    if args.generator.is_empty() {
        bail!("provide --deltas or at least one --generator file");
    }
    let phis = args
        .generator
        .iter()
        .map(|p| io::read_vector_csv(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratorFamily::new(phis)?)
}

fn parse_range(text: &str) -> Result<Vec<usize>> {
    let (a, b) = text.split_once(':').ok_or_else(|| anyhow!("expected a range a:b, got {text:?}"))?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if a > b {
        bail!("empty range {text:?}");
    }
    Ok((a..=b).collect())
}

fn parse_rule(text: &str) -> Result<GeneratorRule> {
    let (kind, rest) = text.split_once(':').ok_or_else(|| anyhow!("expected rule:value, got {text:?}"))?;
    Ok(match kind {
        "adaptive" => GeneratorRule::Adaptive { k: rest.parse()? },
        "nonadaptive" => GeneratorRule::Nonadaptive { k: rest.parse()? },
        "fixed" => GeneratorRule::Fixed {
            vertices: rest.split(',').map(|v| v.trim().parse()).collect::<Result<_, _>>()?,
        },
        other => bail!("unknown generator rule {other:?}"),
    })
}

fn kernel_family(choice: FamilyChoice, params: &[f64]) -> Result<KernelFamily> {
    let want = |count: usize| {
        if params.len() == count {
            Ok(())
        } else {
            Err(anyhow!("this family takes {count} parameter(s), got {}", params.len()))
        }
    };
    Ok(match choice {
        FamilyChoice::Diffusion => {
            want(1)?;
            KernelFamily::Diffusion { sigma: params[0] }
        }
        FamilyChoice::Regularization => {
            want(1)?;
            KernelFamily::Regularization { sigma: params[0] }
        }
        FamilyChoice::Spline => {
            want(1)?;
            KernelFamily::Spline { alpha: params[0] }
        }
        FamilyChoice::RandomWalk => {
            want(2)?;
            if params[1] < 1.0 || params[1].fract() != 0.0 {
                bail!("random-walk steps p must be a positive integer, got {}", params[1]);
            }
            KernelFamily::RandomWalk { a: params[0], p: params[1] as u32 }
        }
    })
}

fn write_vector(v: &DVector<f64>, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        io::write_vector_csv(v, File::create(path)?)?;
    }
    Ok(())
}

fn print(value: Value) -> Result<()> {
    let text = serde_json::to_string_pretty(&value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Graph { graph, out } => {
            let s = setup(&graph)?;
            if let Some(dir) = &out {
                io::write_decomposition(&s.decomp, dir)?;
            }
            let mut summary = io::decomposition_json(&s.decomp);
            summary["edges"] = json!(s.graph.edge_count());
            summary["commutativity_residual"] = json!(s.shifts.commutativity_residual());
            summary["reconstruction_residuals"] = json!(s.decomp.relative_residuals(&s.shifts));
            print(summary)
        }
        Command::Space(cmd) => space(cmd),
        Command::Kernel(KernelCommand::Make { graph, family, param, out }) => {
            let s = setup(&graph)?;
            let base = build_standard_shift(&s.graph, ShiftKind::NormalizedLaplacian)?;
            // Circulant shifts are diagonalized jointly with L^sym; otherwise use L^sym's own basis.
            let decomp = if graph.circulant.is_some() {
                s.decomp
            } else {
                let opts = DiagonalizeOptions { tol: graph.tol, seed: graph.seed, ..DiagonalizeOptions::default() };
                Arc::new(diagonalize_simultaneously(&ShiftSet::single(base.clone()), &opts)?)
            };
            let family = kernel_family(family, &param)?;
            let kernel = make_kernel(&decomp, family, &base)?;
            let meta = serde_json::to_value(family)?;
            if let Some(dir) = &out {
                io::write_kernel(&kernel, meta.clone(), dir)?;
            }
            print(json!({
                "family": meta,
                "spectral_diag": kernel.spectral_diag().as_slice(),
                "omega_k": kernel.omega_k(),
            }))
        }
        Command::Sample(cmd) => sample(cmd),
        Command::Reconstruct(cmd) => reconstruct(cmd),
        Command::Experiment(ExperimentCommand::DampedCosine(a)) => {
            let config = ExperimentConfig {
                n: a.n,
                q: a.q,
                amp: a.amp,
                decay: a.decay,
                freq: a.freq,
                sigma: a.sigma,
                trials: a.trials,
                p_values: parse_range(&a.p_range)?,
                levels: parse_range(&a.level_range)?,
                seed: a.seed,
                delta: a.delta,
            };
            let table = run_circulant_experiment(&config)?;
            if let Some(dir) = &a.out {
                table.write_outputs(&config, dir)?;
            }
            let best = table
                .re_log
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, *v)))
                .min_by(|x, y| x.2.total_cmp(&y.2))
                .expect("nonempty grid");
            print(json!({
                "levels": table.levels,
                "p_values": table.p_values,
                "best": {"n": table.levels[best.0], "P": table.p_values[best.1], "re_log": best.2},
                "re_log": table.re_log,
                "re_raw": table.re_raw,
            }))
        }
        Command::ModelCompare(a) => {
            let graph = Arc::new(io::read_edge_list(&a.graph)?);
            let shifts = ShiftSet::single(build_standard_shift(&graph, ShiftKind::NormalizedLaplacian)?);
            let decomp = diagonalize_simultaneously(&shifts, &DiagonalizeOptions::default())?;
            let dataset = ingest_signals_csv(&a.signals, graph.order())?;
            let rule = parse_rule(&a.generators)?;
            let levels = parse_range(&a.levels)?;
            let cmp = run_model_comparison(&shifts, &decomp, &dataset, &rule, &levels)?;
            let value = json!({
                "signals": dataset.len(),
                "rule": rule,
                "levels": cmp.levels,
                "f_k": cmp.f_k,
                "f_b": cmp.f_b,
            });
            if let Some(path) = &a.out {
                serde_json::to_writer_pretty(File::create(path)?, &serde_json::to_value(&cmp)?)?;
            }
            print(value)
        }
    }
}

fn space(cmd: SpaceCommand) -> Result<()> {
    match cmd {
        SpaceCommand::Bandlimited { graph, omega, out } => {
            let s = setup(&graph)?;
            let space = bandlimited_space(&s.decomp, &omega)?;
            if let Some(path) = &out {
                io::write_matrix_csv(space.basis(), File::create(path)?)?;
            }
            print(json!({
                "dim": space.dim(),
                "omega": space.omega(),
                "shift_invariant": space.is_shift_invariant(&s.shifts, 1e-9),
            }))
        }
        SpaceCommand::Gsis { graph, generators, support_tol, levels, out } => {
            let s = setup(&graph)?;
            let family = generator_family(&generators, s.graph.order())?;
            let space = gsis_from_generators(&s.decomp, &family, support_tol)?;
            if let Some(path) = &out {
                io::write_matrix_csv(space.basis(), File::create(path)?)?;
            }
            let mut value = json!({
                "dim": space.dim(),
                "omega": space.omega(),
                "provenance": space.provenance(),
                "adapted_basis": !s.decomp.assumption1_holds(),
            });
            if let Some(level) = levels {
                value["krylov_dims"] = json!(krylov_subspace(&s.shifts, &family, level, None)?.dims);
            }
            print(value)
        }
        SpaceCommand::Bounds { graph, omega, frame_level } => {
            let s = setup(&graph)?;
            let cg = canonical_generator(&s.decomp, &omega, graph.seed)?;
            let riesz = riesz_bounds(&s.decomp, &cg.t, &cg.phi0, &cg.omega)?;
            let frame = frame_bounds(&s.decomp, &cg.phi0, frame_level)?;
            print(json!({
                "omega": cg.omega,
                "direction": cg.direction.as_slice(),
                "phi0": cg.phi0.as_slice(),
                "riesz": riesz,
                "frame": frame,
            }))
        }
        SpaceCommand::Uncertainty { graph, generators, support_tol } => {
            let s = setup(&graph)?;
            let family = generator_family(&generators, s.graph.order())?;
            if family.len() != 1 {
                bail!("the uncertainty check takes a single generator");
            }
            let report = uncertainty_check(&s.shifts, &s.decomp, &family.generators()[0], support_tol)?;
            print(serde_json::to_value(report)?)
        }
    }
}

fn sample(cmd: SampleCommand) -> Result<()> {
    let (scheme, signal, noise, out) = match cmd {
        SampleCommand::Subset { graph, vertices, signal, noise, out } => {
            let s = setup(&graph)?;
            (subset_sampler(&vertices, s.graph.order())?, signal, noise, out)
        }
        SampleCommand::Dynamic { graph, state, i0, snapshots, signal, noise, out } => {
            let s = setup(&graph)?;
            let d = match &state {
                Some(path) => io::read_matrix_csv(path)?,
                None => s.shifts.shift(0).clone(),
            };
            (dynamic_sampler(&s.decomp, &d, i0, snapshots)?, signal, noise, out)
        }
    };
    let x = io::read_vector_csv(&signal).with_context(|| format!("reading {}", signal.display()))?;
    let obs = scheme.observe(&x, noise.sigma, noise.noise_seed)?;
    write_vector(&obs.y, out.as_deref())?;
    print(json!({
        "scheme": scheme.provenance(),
        "y": obs.y.as_slice(),
        "noise": obs.noise,
    }))
}

fn reconstruct(cmd: ReconstructCommand) -> Result<()> {
    match cmd {
        ReconstructCommand::Direct { graph, omega, vertices, observations, out } => {
            let s = setup(&graph)?;
            let scheme = subset_sampler(&vertices, s.graph.order())?;
            let y = io::read_vector_csv(&observations)?;
            let x = reconstruct_direct(&s.decomp, &omega, &scheme, &y)?;
            write_vector(&x, out.as_deref())?;
            print(json!({
                "x": x.as_slice(),
                "residual_norm": (&y - scheme.matrix() * &x).norm(),
            }))
        }
        ReconstructCommand::Krylov {
            graph,
            generators,
            vertices,
            observations,
            delta,
            max_level,
            drop_degenerate,
            out,
        } => {
            let s = setup(&graph)?;
            let family = generator_family(&generators, s.graph.order())?;
            let scheme: SamplingScheme = subset_sampler(&vertices, s.graph.order())?;
            let y = io::read_vector_csv(&observations)?;
            let options = KrylovOptions {
                delta,
                max_level,
                policy: if drop_degenerate { DegeneratePolicy::Drop } else { DegeneratePolicy::Error },
                record_levels: false,
            };
            let r = reconstruct_krylov(&s.shifts, &family, &scheme, &y, &options)?;
            write_vector(&r.x_out, out.as_deref())?;
            print(json!({
                "x": r.x_out.as_slice(),
                "residual_norm": r.residual_norm,
                "depth": r.depth,
                "dims": r.dims_trace,
                "residuals": r.residual_trace,
                "degenerate_drops": r.degenerate_drops,
            }))
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = run(Cli::parse()) {
        log::debug!("{err:?}");
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
