use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use frozenrb::config::{self, Overrides, StudyConfig};
use frozenrb::study::{online_system, reduced_run};
use frozenrb::{load_model, report, run_detailed, run_offline, run_study, save_model, Scheme};

#[derive(Parser)]
#[command(name = "frozenrb", version, about = "Reduced-basis study of 2-D Burgers with and without freezing")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML key/value file overriding the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// paper-burgers, paper-burgers-half or smoke.
    #[arg(long, global = true, default_value = "paper-burgers")]
    preset: String,
    /// Seed for the test parameters.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    nx: Option<usize>,
    #[arg(long, global = true)]
    ny: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Frozen,
    Unfrozen,
}

#[derive(Subcommand)]
enum Command {
    /// Detailed frozen and unfrozen runs at one parameter.
    Simulate {
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Snapshot collection, POD-Greedy and EI-Greedy; writes <out>/model.
    Offline,
    /// One reduced run against its detailed counterpart.
    Online {
        #[arg(long)]
        mu: Option<f64>,
        /// Basis size; defaults to the largest in the sweep.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "frozen")]
        scheme: SchemeArg,
        /// Model directory; defaults to <out>/model.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Error sweep over N for both schemes; writes CSV tables and errors.svg.
    Study {
        /// Model directory; defaults to <out>/model.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn resolve_config(c: &Common) -> anyhow::Result<StudyConfig> {
    let mut cfg = config::load(c.config.as_deref(), &c.preset)?;
    cfg.apply(Overrides { seed: c.seed, output_dir: c.out.clone(), nx: c.nx, ny: c.ny, ..Overrides::default() });
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = resolve_config(&cli.common)?;
    let out = cfg.output_dir.clone();
    match cli.command {
        Command::Simulate { mu } => {
            let mu = mu.unwrap_or(cfg.detailed_mu);
            let dir = out.join("detailed");
            let run = run_detailed(&cfg, mu, &dir)?;
            let g = run.frozen.group.last().copied().unwrap_or_default();
            println!(
                "mu = {mu}: {} steps, g^K = ({:.6}, {:.6}), frames in {}",
                cfg.steps,
                g.0[0],
                g.0[1],
                dir.display()
            );
        }
        Command::Offline => {
            let model = run_offline(&cfg)?;
            let dir = out.join("model");
            save_model(&model, &dir)?;
            for s in Scheme::ALL {
                let sm = model.scheme(s);
                println!(
                    "{}: N = {}, M = {}, L = {}",
                    s.tag(),
                    sm.basis.len(),
                    sm.ei.len(),
                    sm.ei.restricted_dofs().len()
                );
            }
            println!("model written to {}", dir.display());
        }
        Command::Online { mu, n, scheme, model } => {
            let model = load_model(&model.unwrap_or_else(|| out.join("model")))?;
            let scheme = match scheme {
                SchemeArg::Frozen => Scheme::Frozen,
                SchemeArg::Unfrozen => Scheme::Unfrozen,
            };
            let mcfg = &model.config;
            let mu = mu.unwrap_or(cfg.detailed_mu);
            let n = n.unwrap_or(mcfg.n_max());
            let Some(sys) = online_system(&model, scheme, n)? else {
                bail!("model has no {} basis with N = {n} and M = {}", scheme.tag(), mcfg.m_for(n));
            };
            let p = frozenrb_core::BurgersParams::new(mu, mcfg.velocity)?;
            let u0 = mcfg.initial_field()?;
            let detailed = match scheme {
                Scheme::Frozen => frozenrb_core::freezing::solve_frozen(&p, &u0, mcfg.t_end, mcfg.steps)?.states,
                Scheme::Unfrozen => frozenrb_core::freezing::solve_unfrozen(&p, &u0, mcfg.t_end, mcfg.steps)?,
            };
            let run = reduced_run(&model, scheme, &sys, mu, &detailed)?;
            std::fs::create_dir_all(&out).with_context(|| out.display().to_string())?;
            let path = out.join(format!("online_{}.csv", scheme.tag()));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["step", "g1", "g2", "l2_error"])?;
            for (k, (g, e)) in run.trajectory.group.iter().zip(&run.errors).enumerate() {
                w.write_record([k.to_string(), g.0[0].to_string(), g.0[1].to_string(), e.to_string()])?;
            }
            w.flush()?;
            let ops = run.ops_per_step();
            println!(
                "{} mu = {mu}, N = {n}, M = {}, L = {}: max error {:e}, {} flops + {} point evaluations per step",
                scheme.tag(),
                sys.m(),
                sys.l(),
                run.max_error(),
                ops.flops,
                ops.point_evals
            );
        }
        Command::Study { model } => {
            let model = load_model(&model.unwrap_or_else(|| out.join("model")))?;
            let mut model = model;
            model.config.seed = cfg.seed;
            model.config.test_count = cfg.test_count;
            let res = run_study(&model)?;
            let dir = out.join("study");
            report::write_study(&res, &dir)?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "scheme,n,m,max_error")?;
            for r in &res.records {
                writeln!(stdout, "{},{},{},{:e}", r.scheme.tag(), r.n, r.m, r.max_error())?;
            }
            writeln!(stdout, "results in {}", dir.display())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
