use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use robust_alloc::allocation::{exhaustive_allocate, greedy_allocate, random_allocate, AllocConfig, Method};
use robust_alloc::complete_info::{bound_probabilities_mc, draw_shocks, enumerate_nash};
use robust_alloc::equilibrium::{solve_from, solve_greatest, solve_least, SolverConfig};
use robust_alloc::estimation::{
    bins_by_covariate, fit_mle, gof_chisq, FirstStageConfig, FirstStageMethod, FitReport, OptimizerConfig,
    CHI_SQUARE_CRITICAL_005,
};
use robust_alloc::io::{self, GameConfig, RunManifest};
use robust_alloc::sim::{self, DgpSpec, RegretConfig};
use robust_alloc::welfare::{welfare_bounds, Objective};
use robust_alloc::{Allocation, Error, Game, Result, ShockDistribution};

/// Robust treatment allocation for network games with complementarities.
#[derive(Debug, Parser, Serialize)]
#[command(name = "robust-alloc", version)]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "ROBUST_ALLOC_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Least and greatest equilibrium CCP profiles.
    SolveEquilibrium(SolveArgs),
    /// Welfare bounds across equilibrium selections for one allocation.
    WelfareBounds(WelfareArgs),
    /// Capacity-constrained allocation against the least equilibrium.
    Allocate(AllocateArgs),
    /// Two-step quasi-maximum likelihood from an observed panel.
    Estimate(EstimateArgs),
    /// Synthetic network, covariates and observed play from a DGP file.
    Simulate(SimulateArgs),
    /// Regret of estimate-then-allocate against the true optimum.
    EvaluateRegret(RegretArgs),
    /// Chi-square goodness of fit of an estimated model by covariate bins.
    Gof(GofArgs),
    /// Submodularity ratio, curvature and greedy guarantee factor.
    Diagnose(DiagnoseArgs),
    /// Per-unit choice probability bounds in the complete-information game.
    CompleteInfo(CompleteInfoArgs),
    /// Welfare table comparing original, random and robust allocations.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GameArgs {
    /// Edge list (`src,dst`) or dense 0/1 matrix.
    #[arg(long)]
    pub network: PathBuf,
    /// `unit_id,x1..xK`.
    #[arg(long)]
    pub covariates: PathBuf,
    /// Parameter JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub directed: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// `unit_id,d`; untreated when omitted.
    #[arg(long)]
    pub allocation: Option<PathBuf>,
    /// Also iterate from this `unit_id,sigma` profile.
    #[arg(long)]
    pub start: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct WelfareArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long)]
    pub allocation: Option<PathBuf>,
    #[arg(long, default_value = "engagement")]
    pub objective: Objective,
    /// Also report the upper bound with the literal first-term case split.
    #[arg(long)]
    pub strict_corollary: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long)]
    pub kappa: usize,
    #[arg(long, default_value = "greedy")]
    pub method: Method,
    #[arg(long, default_value = "engagement")]
    pub objective: Objective,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random allocations to draw with `--method random`.
    #[arg(long, default_value_t = 500)]
    pub draws: usize,
    #[arg(long)]
    pub stop_if_nonpositive: bool,
    #[arg(long)]
    pub warm_start: bool,
    #[arg(long, default_value_t = 2_000_000)]
    pub exhaustive_budget: u128,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PanelArgs {
    /// `unit_id,y,d,x1..xK`.
    #[arg(long)]
    pub panel: PathBuf,
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub directed: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: PanelArgs,
    #[arg(long, default_value = "frequency")]
    pub first_stage: FirstStageMethod,
    /// Profile used by `--first-stage oracle`.
    #[arg(long)]
    pub oracle_ccp: Option<PathBuf>,
    #[arg(long, default_value = "logistic")]
    pub shock: ShockDistribution,
    /// Decimal places for frequency-estimator type cells.
    #[arg(long, default_value_t = 1)]
    pub frequency_decimals: u32,
    #[arg(long, default_value_t = 1e-8)]
    pub gradient_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Covariate (1-based) used to bin units for the fit table.
    #[arg(long, default_value_t = 1)]
    pub gof_column: usize,
    /// Bin cut points for the fit table; no table when omitted.
    #[arg(long, value_delimiter = ',')]
    pub gof_cuts: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// DGP JSON.
    #[arg(long)]
    pub dgp: PathBuf,
    /// Seed for the observed shock draw.
    #[arg(long, default_value_t = 0)]
    pub shock_seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct RegretArgs {
    #[arg(long)]
    pub dgp: PathBuf,
    /// Target game files; generated from the DGP when omitted.
    #[arg(long, requires_all = ["target_covariates", "target_config"])]
    pub target_network: Option<PathBuf>,
    #[arg(long)]
    pub target_covariates: Option<PathBuf>,
    #[arg(long)]
    pub target_config: Option<PathBuf>,
    /// Size of the generated target.
    #[arg(long, default_value_t = 8)]
    pub target_n: usize,
    #[arg(long)]
    pub kappa: usize,
    #[arg(long, value_delimiter = ',', default_value = "500,2000")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "oracle")]
    pub first_stage: FirstStageMethod,
    #[arg(long, default_value = "engagement")]
    pub objective: Objective,
    /// Allocate with the true parameters instead of estimates.
    #[arg(long)]
    pub true_theta: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GofArgs {
    #[command(flatten)]
    pub data: PanelArgs,
    /// `fit.json` written by `estimate`.
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub column: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub cuts: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value = "engagement")]
    pub objective: Objective,
    /// Largest treated set considered; defaults to all units.
    #[arg(long)]
    pub max_set_size: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CompleteInfoArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long)]
    pub allocation: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the full equilibrium set of the first draw.
    #[arg(long)]
    pub nash_debug: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Allocation in use before targeting.
    #[arg(long)]
    pub original: Option<PathBuf>,
    /// Observed panel for the sample average.
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Capacity; defaults to the number treated in `--original`.
    #[arg(long)]
    pub kappa: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "engagement")]
    pub objective: Objective,
    /// Also search all allocations as a check on greedy.
    #[arg(long)]
    pub exhaustive: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

struct Run {
    out: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl Run {
    fn new(cli: &Cli, name: &str, seed: Option<u64>) -> Result<Self> {
        let config = serde_json::to_value(&cli.command)?;
        std::fs::create_dir_all(&cli.out).map_err(|e| Error::Io {
            path: cli.out.clone(),
            source: e,
        })?;
        Ok(Run {
            out: cli.out.clone(),
            manifest: RunManifest::start(name, config, seed),
            started: Instant::now(),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        if !path.exists() {
            return Err(Error::InvalidInput(format!("input file {} does not exist", path.display())));
        }
        self.manifest.add_input(path)
    }

    fn inputs(&mut self, game: &GameArgs) -> Result<()> {
        self.input(&game.network)?;
        self.input(&game.covariates)?;
        self.input(&game.config)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn emit(&mut self, name: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<PathBuf> {
        let p = self.path(name);
        write(&p)?;
        self.manifest.add_output(&p)?;
        Ok(p)
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.emit(name, |p| io::write_json(p, value))
    }

    fn finish(mut self) -> Result<()> {
        self.manifest.finish(self.started.elapsed());
        let p = self.path(&format!("{}.manifest.json", self.manifest.command));
        io::write_json(&p, &self.manifest)
    }
}

fn load_game(run: &mut Run, g: &GameArgs) -> Result<Game> {
    run.inputs(g)?;
    io::load_game(&g.network, &g.covariates, &g.config, g.directed)
}

fn load_allocation(run: &mut Run, path: Option<&Path>, n: usize) -> Result<Allocation> {
    match path {
        Some(p) => {
            run.input(p)?;
            let a = io::read_allocation(p, None)?;
            if a.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "allocation rows vs network size",
                    expected: n,
                    found: a.len(),
                });
            }
            Ok(a)
        }
        None => Ok(Allocation::zeros(n, 0)),
    }
}

fn interval(lo: f64, hi: f64) -> String {
    format!("[{lo:.4}, {hi:.4}]")
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::SolveEquilibrium(a) => solve(cli, a),
        Command::WelfareBounds(a) => welfare(cli, a),
        Command::Allocate(a) => allocate(cli, a),
        Command::Estimate(a) => estimate(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::EvaluateRegret(a) => regret(cli, a),
        Command::Gof(a) => gof(cli, a),
        Command::Diagnose(a) => diagnose(cli, a),
        Command::CompleteInfo(a) => complete_info(cli, a),
        Command::Report(a) => report(cli, a),
    }
}

fn solve(cli: &Cli, a: &SolveArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "solve-equilibrium", None)?;
    let game = load_game(&mut run, &a.game)?;
    let alloc = load_allocation(&mut run, a.allocation.as_deref(), game.n())?;
    let cfg = a.solver.config();
    let least = solve_least(&game, &alloc, &cfg)?;
    let greatest = solve_greatest(&game, &alloc, &cfg)?;
    let custom = match &a.start {
        Some(p) => {
            run.input(p)?;
            Some(solve_from(&game, &alloc, &io::read_ccp(p)?, &cfg)?)
        }
        None => None,
    };
    run.emit("least_ccp.csv", |p| io::write_ccp(p, &least.profile))?;
    run.emit("greatest_ccp.csv", |p| io::write_ccp(p, &greatest.profile))?;
    if let Some(c) = &custom {
        run.emit("custom_ccp.csv", |p| io::write_ccp(p, &c.profile))?;
    }
    #[derive(Serialize)]
    struct Reports<'a> {
        least: &'a robust_alloc::FixedPointReport,
        greatest: &'a robust_alloc::FixedPointReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        custom: Option<&'a robust_alloc::FixedPointReport>,
    }
    run.json(
        "equilibrium.json",
        &Reports {
            least: &least,
            greatest: &greatest,
            custom: custom.as_ref(),
        },
    )?;
    println!(
        "least: {} iterations, greatest: {} iterations, max gap {:.3e}",
        least.iterations,
        greatest.iterations,
        least.profile.distance(&greatest.profile)
    );
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn welfare(cli: &Cli, a: &WelfareArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "welfare-bounds", None)?;
    let game = load_game(&mut run, &a.game)?;
    let alloc = load_allocation(&mut run, a.allocation.as_deref(), game.n())?;
    let b = welfare_bounds(&game, &alloc, a.objective, &a.solver.config(), a.strict_corollary)?;
    run.json("welfare_bounds.json", &b)?;
    match b.literal_upper {
        Some(u) => println!("{} {}  (literal upper {u:.4})", a.objective, interval(b.lower, b.upper)),
        None => println!("{} {}", a.objective, interval(b.lower, b.upper)),
    }
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn alloc_config(a: &AllocateArgs) -> AllocConfig {
    AllocConfig {
        solver: a.solver.config(),
        stop_if_nonpositive: a.stop_if_nonpositive,
        warm_start: a.warm_start,
        exhaustive_budget: a.exhaustive_budget,
    }
}

fn allocate(cli: &Cli, a: &AllocateArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "allocate", Some(a.seed))?;
    let game = load_game(&mut run, &a.game)?;
    let cfg = alloc_config(a);
    match a.method {
        Method::Greedy | Method::Exhaustive => {
            let result = if a.method == Method::Greedy {
                greedy_allocate(&game, a.kappa, a.objective, &cfg)
            } else {
                exhaustive_allocate(&game, a.kappa, a.objective, &cfg)
            };
            let result = match result {
                Err(Error::Aborted { partial, cause }) => {
                    run.emit("allocation.csv", |p| io::write_allocation(p, &partial.allocation))?;
                    run.json("allocation.json", &partial)?;
                    run.finish()?;
                    return Err(*cause);
                }
                other => other?,
            };
            run.emit("allocation.csv", |p| io::write_allocation(p, &result.allocation))?;
            run.json("allocation.json", &result)?;
            println!("{} {}", a.method, interval(result.welfare_lower, result.welfare_upper));
        }
        Method::Random => {
            let summary = random_allocate(&game, a.kappa, a.objective, a.seed, a.draws, &cfg)?;
            if let Some(first) = summary.draws.first() {
                run.emit("allocation.csv", |p| io::write_allocation(p, &first.allocation))?;
            }
            run.json("allocation.json", &summary)?;
            println!("random (mean of {}) {}", a.draws, interval(summary.mean_lower, summary.mean_upper));
        }
    }
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn load_panel(run: &mut Run, d: &PanelArgs) -> Result<robust_alloc::ObservedPanel> {
    run.input(&d.panel)?;
    run.input(&d.network)?;
    let net = io::read_network(&d.network, None, d.directed)?;
    io::read_panel(&d.panel, net)
}

fn gof_bins(panel: &robust_alloc::ObservedPanel, column: usize, cuts: &[f64]) -> Result<Vec<usize>> {
    let k = panel.covariates().k();
    if column == 0 || column > k {
        return Err(Error::InvalidInput(format!("covariate column {column} outside 1..={k}")));
    }
    Ok(bins_by_covariate(panel, column - 1, cuts))
}

fn print_gof(t: &robust_alloc::GofTable) {
    println!("bin  units  observed  expected  chi2   (critical {:.3})", t.critical_value);
    for r in &t.rows {
        println!(
            "{:>3}  {:>5}  {:>8.1}  {:>8.2}  {:>6.2}{}",
            r.bin,
            r.units,
            r.observed,
            r.expected,
            r.statistic,
            if r.flagged { "  *" } else { "" }
        );
    }
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "estimate", None)?;
    let panel = load_panel(&mut run, &a.data)?;
    let oracle = match &a.oracle_ccp {
        Some(p) => {
            run.input(p)?;
            Some(io::read_ccp(p)?)
        }
        None => None,
    };
    let optimizer = OptimizerConfig {
        gradient_tol: a.gradient_tol,
        max_iter: a.max_iter,
        ..OptimizerConfig::default()
    };
    let fs = FirstStageConfig {
        frequency_decimals: a.frequency_decimals,
        oracle,
        logit: optimizer,
        ..FirstStageConfig::default()
    };
    let fit = fit_mle(&panel, a.first_stage, &fs, a.shock, &optimizer)?;
    let gof = if a.gof_cuts.is_empty() {
        None
    } else {
        Some(gof_chisq(&panel, &fit, &gof_bins(&panel, a.gof_column, &a.gof_cuts)?)?)
    };
    #[derive(Serialize)]
    struct FitOutput<'a> {
        #[serde(flatten)]
        fit: &'a FitReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        gof: Option<&'a robust_alloc::GofTable>,
    }
    run.json("fit.json", &FitOutput { fit: &fit, gof: gof.as_ref() })?;
    run.json("game_hat.json", &GameConfig::new(&fit.theta_hat, fit.shock))?;
    run.emit("sigma_hat.csv", |p| io::write_ccp(p, &fit.sigma_hat))?;
    println!(
        "theta_hat = {:?}  loglik {:.6}  |grad| {:.2e}  iterations {}",
        fit.theta_hat.to_vec(),
        fit.loglik,
        fit.gradient_norm,
        fit.iterations
    );
    if let Some(t) = &gof {
        print_gof(t);
    }
    run.finish()?;
    if !fit.converged {
        eprintln!("error: optimizer stopped after {} iterations without converging", fit.iterations);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<ExitCode> {
    run_simulate(cli, a).map(|_| ExitCode::SUCCESS)
}

fn run_simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    run_input_dgp(cli, &a.dgp).and_then(|(mut run, dgp)| {
        run.manifest.seed = Some(dgp.seed);
        let setup = sim::training_setup(&dgp)?;
        let panel = setup.panel(a.shock_seed)?;
        run.emit("network.csv", |p| io::write_network(p, setup.game.network()))?;
        run.emit("covariates.csv", |p| io::write_covariates(p, setup.game.covariates()))?;
        run.json("game.json", &GameConfig::new(setup.game.theta(), setup.game.shock()))?;
        run.emit("panel.csv", |p| io::write_panel(p, &panel))?;
        run.emit("sigma.csv", |p| io::write_ccp(p, &setup.sigma))?;
        run.emit("treatment.csv", |p| io::write_allocation(p, &setup.treatment))?;
        let adopters = panel.y().iter().filter(|y| **y).count();
        println!("simulated {} units, {} adopters", panel.n(), adopters);
        run.finish()
    })
}

fn run_input_dgp(cli: &Cli, path: &Path) -> Result<(Run, DgpSpec)> {
    let name = match cli.command {
        Command::EvaluateRegret(_) => "evaluate-regret",
        _ => "simulate",
    };
    let mut run = Run::new(cli, name, None)?;
    run.input(path)?;
    let dgp: DgpSpec = io::read_json(path)?;
    Ok((run, dgp))
}

fn regret(cli: &Cli, a: &RegretArgs) -> Result<ExitCode> {
    let (mut run, dgp) = run_input_dgp(cli, &a.dgp)?;
    run.manifest.seed = Some(a.seed);
    let target = match (&a.target_network, &a.target_covariates, &a.target_config) {
        (Some(n), Some(c), Some(g)) => {
            let args = GameArgs {
                network: n.clone(),
                covariates: c.clone(),
                config: g.clone(),
                directed: false,
            };
            load_game(&mut run, &args)?
        }
        _ => {
            let mut spec = dgp.with_n(a.target_n);
            spec.seed = robust_alloc::rng::child_seed(dgp.seed, 1_000_003);
            sim::generate_game(&spec)?
        }
    };
    let cfg = RegretConfig {
        first_stage: a.first_stage,
        objective: a.objective,
        use_true_theta: a.true_theta,
        ..RegretConfig::default()
    };
    let summary = sim::evaluate_regret(&dgp, &a.n_grid, &target, a.kappa, a.reps, a.seed, &cfg)?;
    run.emit("regret.csv", |p| io::write_regret_rows(p, &summary.rows))?;
    run.json(
        "regret_summary.json",
        &serde_json::json!({
            "optimal_welfare": summary.optimal_welfare,
            "kappa": a.kappa,
            "stats": summary.stats,
        }),
    )?;
    println!("n_train  mean      q10       median    q90");
    for s in &summary.stats {
        println!("{:>7}  {:.6}  {:.6}  {:.6}  {:.6}", s.n_train, s.mean, s.q10, s.median, s.q90);
    }
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn gof(cli: &Cli, a: &GofArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "gof", None)?;
    let panel = load_panel(&mut run, &a.data)?;
    run.input(&a.fit)?;
    let fit: FitReport = io::read_json(&a.fit)?;
    let table = gof_chisq(&panel, &fit, &gof_bins(&panel, a.column, &a.cuts)?)?;
    debug_assert_eq!(table.critical_value, CHI_SQUARE_CRITICAL_005);
    run.json("gof.json", &table)?;
    print_gof(&table);
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn diagnose(cli: &Cli, a: &DiagnoseArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "diagnose", None)?;
    let game = load_game(&mut run, &a.game)?;
    let report = sim::diagnose_game(&game, a.objective, a.max_set_size, &a.solver.config())?;
    run.json("diagnostics.json", &report)?;
    println!(
        "gamma_hat {:.6}  xi_hat {:.6}  guarantee factor {:.6}",
        report.gamma_hat, report.xi_hat, report.guarantee_factor
    );
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn complete_info(cli: &Cli, a: &CompleteInfoArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "complete-info", Some(a.seed))?;
    let game = load_game(&mut run, &a.game)?;
    let alloc = load_allocation(&mut run, a.allocation.as_deref(), game.n())?;
    let bounds = bound_probabilities_mc(&game, &alloc, a.draws, a.seed)?;
    run.emit("unit_bounds.csv", |p| io::write_unit_bounds(p, &bounds))?;
    if a.nash_debug {
        let eps = draw_shocks(&game, a.seed, 0);
        let set = enumerate_nash(&game, &alloc, &eps)?;
        run.json("nash_set.json", &set)?;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    println!("mean unit bounds {}", interval(mean(&bounds.lower), mean(&bounds.upper)));
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct ReportRow {
    method: String,
    lower: f64,
    upper: f64,
}

#[derive(Debug, Serialize)]
struct Table {
    sample_average: Option<f64>,
    kappa: usize,
    rows: Vec<ReportRow>,
    /// Robust lower bound minus the baseline lower bound.
    gain_level: f64,
    gain_percent: f64,
    baseline: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive_lower: Option<f64>,
}

fn report(cli: &Cli, a: &ReportArgs) -> Result<ExitCode> {
    let mut run = Run::new(cli, "report", Some(a.seed))?;
    let game = load_game(&mut run, &a.game)?;
    let original = match &a.original {
        Some(p) => Some(load_allocation(&mut run, Some(p), game.n())?),
        None => None,
    };
    let sample_average = match &a.panel {
        Some(p) => {
            run.input(p)?;
            let panel = io::read_panel(p, game.network().clone())?;
            Some(panel.y().iter().filter(|y| **y).count() as f64 / panel.n() as f64)
        }
        None => None,
    };
    let kappa = a
        .kappa
        .or_else(|| original.as_ref().map(Allocation::treated_count))
        .ok_or_else(|| Error::InvalidInput("report needs --kappa or --original".into()))?;
    let cfg = AllocConfig {
        solver: a.solver.config(),
        ..AllocConfig::default()
    };
    let mut rows = Vec::new();
    if let Some(o) = &original {
        let b = welfare_bounds(&game, o, a.objective, &cfg.solver, false)?;
        rows.push(ReportRow {
            method: "original".into(),
            lower: b.lower,
            upper: b.upper,
        });
    }
    let random = random_allocate(&game, kappa, a.objective, a.seed, a.draws, &cfg)?;
    rows.push(ReportRow {
        method: "random".into(),
        lower: random.mean_lower,
        upper: random.mean_upper,
    });
    let robust = greedy_allocate(&game, kappa, a.objective, &cfg)?;
    rows.push(ReportRow {
        method: "robust".into(),
        lower: robust.welfare_lower,
        upper: robust.welfare_upper,
    });
    let exhaustive_lower = if a.exhaustive {
        Some(exhaustive_allocate(&game, kappa, a.objective, &cfg)?.welfare_lower)
    } else {
        None
    };
    let base = &rows[0];
    let gain_level = robust.welfare_lower - base.lower;
    let table = Table {
        sample_average,
        kappa,
        gain_level,
        gain_percent: 100.0 * gain_level / base.lower,
        baseline: base.method.clone(),
        rows,
        exhaustive_lower,
    };
    run.emit("robust_allocation.csv", |p| io::write_allocation(p, &robust.allocation))?;
    run.json("report.json", &table)?;
    if let Some(s) = sample_average {
        println!("sample avg  {s:.4}");
    }
    for r in &table.rows {
        println!("{:<10}  {}", r.method, interval(r.lower, r.upper));
    }
    println!(
        "gain vs {}: {:.4} ({:.1}%)",
        table.baseline, table.gain_level, table.gain_percent
    );
    if let Some(e) = exhaustive_lower {
        println!("exhaustive optimum lower bound {e:.4}");
    }
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}
