//! Command-line front end: config ingestion, orchestration of the library
//! modules, spectrum caching, and CSV/JSON emission for tables and plot
//! data. Identical config and seed produce byte-identical outputs.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use radonlab::config::RunConfig;
use radonlab::flow::fit_scaling_exponent;
use radonlab::geom::{Geodesic, SpherePoint};
use radonlab::norms::{verify_report, VerifyOptions, VerifyReport};
use radonlab::quad::sphere_grid;
use radonlab::radon::{check_hypotheses_field, find_critical_points, RadonField};
use radonlab::spectral::{cluster_table, eigensolve_cached};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "radonlab",
    version,
    about = "Radon transforms, Hamiltonian flows, spectral clusters and \
             localized norms on the round 2-sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radon transform of the potential: grid samples, critical points,
    /// and the hypothesis verdict at each base point.
    Radon(RunArgs),
    /// Hamiltonian flow on geodesic space: trajectories, sup flow
    /// averages, and the fitted occupancy scaling exponent.
    Flow(RunArgs),
    /// Schroedinger spectrum: eigenvalue table with cluster labels and
    /// shifts; results are cached on disk.
    Spectrum(RunArgs),
    /// Full verification pipeline: hypotheses, spectrum, localized mass
    /// and norm tables, and a machine-readable verdict.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Spectrum cache directory (overrides the config).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized scan jitter (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

/// Effective run context after CLI overrides.
struct Ctx {
    cfg: RunConfig,
    hash: String,
    out: PathBuf,
    cache: PathBuf,
}

impl Ctx {
    fn new(args: &RunArgs) -> anyhow::Result<Ctx> {
        let mut cfg = RunConfig::load(&args.config)?;
        if let Some(out) = &args.out {
            cfg.out_dir = out.clone();
        }
        if let Some(cache) = &args.cache {
            cfg.cache_dir = cache.clone();
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(threads) = args.threads {
            // ignore the error if a global pool already exists (tests)
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
        let hash = cfg.hash();
        let out = cfg.out_dir.clone();
        let cache = cfg.cache_dir.clone();
        fs::create_dir_all(&out)?;
        fs::create_dir_all(&cache)?;
        Ok(Ctx {
            cfg,
            hash,
            out,
            cache,
        })
    }

    fn csv_header(&self) -> String {
        format!("# radonlab v{VERSION} config={}\n", self.hash)
    }

    fn write_csv(&self, name: &str, columns: &str, rows: &[String]) -> anyhow::Result<()> {
        let path = self.out.join(name);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        f.write_all(self.csv_header().as_bytes())?;
        writeln!(f, "{columns}")?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
        f.flush()?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, payload: &T) -> anyhow::Result<()> {
        let path = self.out.join(name);
        let doc = serde_json::json!({
            "version": VERSION,
            "config_hash": self.hash,
            "report": payload,
        });
        fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn cmd_radon(ctx: &Ctx) -> anyhow::Result<()> {
    let v = ctx.cfg.resolve_potential()?;
    let points = ctx.cfg.resolve_points()?;
    let field = RadonField::from_potential(&v);

    // lat-long samples of the transform
    let n_theta = ctx.cfg.grid;
    let n_phi = 2 * ctx.cfg.grid;
    let mut rows = Vec::with_capacity((n_theta + 1) * n_phi);
    for i in 0..=n_theta {
        let theta = std::f64::consts::PI * i as f64 / n_theta as f64;
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let p = SpherePoint::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            )
            .unwrap_or_else(|_| SpherePoint::z_axis());
            let p = if i == 0 {
                SpherePoint::z_axis()
            } else if i == n_theta {
                SpherePoint::z_axis().antipode()
            } else {
                p
            };
            rows.push(format!("{theta},{phi},{}", field.eval(&p)));
        }
    }
    ctx.write_csv("radon_grid.csv", "theta,phi,value", &rows)?;

    let seeds = sphere_grid(500.max(ctx.cfg.scan_count));
    let search = find_critical_points(&field, &seeds);
    let crit_rows: Vec<String> = search
        .points
        .iter()
        .map(|c| {
            let p = c.location.vec();
            format!(
                "{},{},{},{},{},{},{:?}",
                p.x, p.y, p.z, c.value, c.hessian_eigs[0], c.hessian_eigs[1], c.kind
            )
        })
        .collect();
    ctx.write_csv(
        "critical_points.csv",
        "x,y,z,value,hess_eig1,hess_eig2,kind",
        &crit_rows,
    )?;

    let reports: Vec<_> = points
        .iter()
        .map(|x0| check_hypotheses_field(&field, x0))
        .collect();
    ctx.write_json("hypotheses.json", &reports)?;
    ctx.write_json("critical_search.json", &search)?;
    Ok(())
}

fn cmd_flow(ctx: &Ctx) -> anyhow::Result<()> {
    let v = ctx.cfg.resolve_potential()?;
    let points = ctx.cfg.resolve_points()?;
    let field = RadonField::from_potential(&v);
    let scan = sphere_grid(ctx.cfg.flow_scan.max(2000));

    for (i, x0) in points.iter().enumerate() {
        // a trajectory seeded on a geodesic through x0
        let n0 = SpherePoint::from_vec(Geodesic::from_normal(x0).frame().0)?;
        let tau = ctx.cfg.tau0.max(1.0);
        let traj = radonlab::flow::integrate_flow(&field, &n0, (-tau, tau), ctx.cfg.dt)?;
        let traj_rows: Vec<String> = traj
            .times
            .iter()
            .zip(&traj.points)
            .zip(&traj.field_values)
            .map(|((t, n), e)| {
                let nv = n.vec();
                format!("{t},{},{},{},{e}", nv.x, nv.y, nv.z)
            })
            .collect();
        ctx.write_csv(
            &format!("trajectory_{i}.csv"),
            "tau,n1,n2,n3,energy",
            &traj_rows,
        )?;

        let fit = fit_scaling_exponent(
            &field,
            x0,
            &ctx.cfg.radii,
            ctx.cfg.tau0,
            &scan,
            ctx.cfg.dt,
        )?;
        let avg_rows: Vec<String> = fit
            .radii
            .iter()
            .zip(&fit.sup_averages)
            .map(|(r, s)| format!("{r},{s}"))
            .collect();
        ctx.write_csv(
            &format!("flow_averages_{i}.csv"),
            "r,sup_average",
            &avg_rows,
        )?;
        ctx.write_json(&format!("scaling_{i}.json"), &fit)?;
    }
    Ok(())
}

fn cmd_spectrum(ctx: &Ctx) -> anyhow::Result<()> {
    let v = ctx.cfg.resolve_potential()?;
    let l_max = ctx.cfg.l_max.unwrap_or(20).max(v.effective_degree());
    let (pairs, warm) = eigensolve_cached(&ctx.cache, &v, l_max)?;
    eprintln!(
        "spectrum: l_max={l_max}, dim={}, cache {}",
        pairs.len(),
        if warm { "hit (no recompute)" } else { "miss (solved and stored)" }
    );

    let table = cluster_table(&pairs, &v, l_max)?;
    let mut cluster_size = vec![0usize; l_max + 1];
    for p in &pairs {
        if p.cluster <= l_max {
            cluster_size[p.cluster] += 1;
        }
    }
    let rows: Vec<String> = pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let free = (p.cluster * (p.cluster + 1)) as f64;
            format!(
                "{k},{},{},{},{},{}",
                p.lambda_sq,
                p.lambda,
                p.cluster,
                cluster_size[p.cluster],
                p.lambda_sq - free
            )
        })
        .collect();
    ctx.write_csv(
        "spectrum.csv",
        "index,lambda_sq,lambda,cluster,cluster_size,shift",
        &rows,
    )?;
    ctx.write_json("cluster_shifts.json", &table)?;
    Ok(())
}

/// Machine-readable verdict block consumed by tests.
#[derive(Serialize)]
struct Verdict {
    point_index: usize,
    h1: bool,
    h2: bool,
    improvement_claimed: bool,
    c0_empirical: f64,
    m_slope: f64,
    fitted_exponents_per_p: Vec<(f64, f64)>,
    control_slope: f64,
}

fn emit_verify(ctx: &Ctx, i: usize, report: &VerifyReport) -> anyhow::Result<()> {
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                r.lambda, r.p, r.r, r.x_index, r.ball_mass, r.m_value, r.lp_local,
                r.lp_global, r.bound_rhs
            )
        })
        .collect();
    ctx.write_csv(
        &format!("verify_rows_{i}.csv"),
        "lambda,p,r,x_index,ball_mass,m_value,lp_local,lp_global,bound_rhs",
        &rows,
    )?;
    let control: Vec<String> = report
        .control_rows
        .iter()
        .map(|c| format!("{},{},{}", c.lambda, c.r, c.m_value))
        .collect();
    ctx.write_csv(&format!("control_{i}.csv"), "lambda,r,m_value", &control)?;
    let verdict = Verdict {
        point_index: i,
        h1: report.hypotheses.h1_pass,
        h2: report.hypotheses.h2_pass,
        improvement_claimed: report.improvement_claimed,
        c0_empirical: report.c0_empirical,
        m_slope: report.m_slope,
        fitted_exponents_per_p: report
            .lp_slopes
            .iter()
            .map(|s| (s.p, s.fitted))
            .collect(),
        control_slope: report.control_slope,
    };
    eprintln!(
        "verify point {i}: spectrum cache {}",
        if report.warm_cache { "hit" } else { "miss" }
    );
    ctx.write_json(&format!("verdict_{i}.json"), &verdict)?;
    ctx.write_json(&format!("verify_full_{i}.json"), report)?;
    Ok(())
}

fn cmd_verify(ctx: &Ctx) -> anyhow::Result<()> {
    let v = ctx.cfg.resolve_potential()?;
    let points = ctx.cfg.resolve_points()?;
    let opts = VerifyOptions {
        r0: ctx.cfg.r0,
        alpha: ctx.cfg.alpha,
        scan_count: ctx.cfg.scan_count,
        pairs_per_cluster: ctx.cfg.pairs_per_cluster,
        cache_dir: ctx.cache.clone(),
        ..VerifyOptions::default()
    };
    let lambda_range = (ctx.cfg.lambda_range[0], ctx.cfg.lambda_range[1]);
    let mut failures: Vec<String> = Vec::new();
    for (i, x0) in points.iter().enumerate() {
        let opts = VerifyOptions {
            x_index: i,
            ..opts.clone()
        };
        match verify_report(&v, x0, lambda_range, &ctx.cfg.p_list, &opts) {
            Ok(report) => emit_verify(ctx, i, &report)?,
            Err(e) => {
                eprintln!("verify failed at point {i}: {e}");
                failures.push(format!("point {i}: {e}"));
            }
        }
    }
    if !failures.is_empty() {
        ctx.write_json("failure_manifest.json", &failures)?;
        anyhow::bail!("{} of {} points failed; see failure_manifest.json",
            failures.len(), points.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&Ctx) -> anyhow::Result<()>) = match &cli.command {
        Command::Radon(a) => (a, cmd_radon),
        Command::Flow(a) => (a, cmd_flow),
        Command::Spectrum(a) => (a, cmd_spectrum),
        Command::Verify(a) => (a, cmd_verify),
    };
    let ctx = match Ctx::new(args) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match run(&ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
