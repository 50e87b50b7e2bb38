//! The five run commands behind `contactctl`. Each writes its artifacts
//! atomically plus a `manifest.json`, and reports which checks passed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::attractor::{approximate_attractor, cluster_count, graph_property_check, retraction_probe, TrappingSpec};
use crate::config::{ExperimentConfig, Format, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::flow::{check_first_lyapunov, check_second_lyapunov, energy_residual, integrate, Direction};
use crate::hj::{constant_bounds, one_sided_gradients, solve_hj, GridFunction, HjOptions};
use crate::io::write_atomic;
use crate::model::{check_assumptions, ContactHamiltonian, HamiltonianModel, MonotoneSign, PhasePoint, SampleBox};
use crate::structure::{detect_connections, find_equilibria, verify_theorem_b, TheoremBVerdict};

pub const MANIFEST: &str = "manifest.json";

/// Energy identity tolerance, relative to `max(1, |H(z0)|)`.
const ENERGY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    /// Not applicable to this model or configuration.
    Skipped,
    /// Diagnostic only, never fails a run.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn verdict(name: &str, ok: bool, detail: String) -> Self {
        let status = if ok { CheckStatus::Passed } else { CheckStatus::Failed };
        Self { name: name.into(), status, detail }
    }

    fn with_status(name: &str, status: CheckStatus, detail: String) -> Self {
        Self { name: name.into(), status, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub schema_version: u32,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
    pub checks: Vec<Check>,
    pub failures: Vec<String>,
    /// Excluded from reproducibility comparisons.
    pub wall_time_seconds: f64,
}

impl Manifest {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A loaded config together with its output settings.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: ExperimentConfig,
    pub config_text: String,
    /// Directory the config was read from; relative paths resolve here.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl RunContext {
    pub fn from_file(path: &Path, out: Option<PathBuf>, format: Option<Format>) -> Result<Self> {
        let (config, config_text) = ExperimentConfig::load(path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self::new(config, config_text, base_dir, out, format))
    }

    pub fn from_text(text: &str, base_dir: &Path, out: Option<PathBuf>, format: Option<Format>) -> Result<Self> {
        let config = ExperimentConfig::parse(text)?;
        Ok(Self::new(config, text.to_string(), base_dir.to_path_buf(), out, format))
    }

    fn new(
        config: ExperimentConfig,
        config_text: String,
        base_dir: PathBuf,
        out: Option<PathBuf>,
        format: Option<Format>,
    ) -> Self {
        let out_dir = out.unwrap_or_else(|| base_dir.join(&config.output.directory));
        let formats = match format {
            Some(f) => vec![f],
            None => config.output.formats.clone(),
        };
        Self {
            config,
            config_text,
            base_dir,
            out_dir,
            formats,
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Simulate,
    SolveHj,
    Attractor,
    Analyze,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Simulate => "simulate",
            Command::SolveHj => "solve-hj",
            Command::Attractor => "attractor",
            Command::Analyze => "analyze",
        }
    }
}

/// Runs `cmd` and writes the manifest. Errors from the modules propagate
/// before any manifest is written.
pub fn run(cmd: Command, ctx: &RunContext) -> Result<Manifest> {
    let start = Instant::now();
    let mut out = Output::new(ctx);
    let seed = match cmd {
        Command::Check => cmd_check(ctx, &mut out)?,
        Command::Simulate => cmd_simulate(ctx, &mut out)?,
        Command::SolveHj => cmd_solve_hj(ctx, &mut out)?,
        Command::Attractor => cmd_attractor(ctx, &mut out)?,
        Command::Analyze => cmd_analyze(ctx, &mut out)?,
    };
    let failures = out
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Failed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    let manifest = Manifest {
        command: cmd.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        config_sha256: sha256_hex(ctx.config_text.as_bytes()),
        seed,
        artifacts: out.artifacts,
        checks: out.checks,
        failures,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    write_atomic(&ctx.out_dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Output<'a> {
    dir: &'a Path,
    artifacts: Vec<String>,
    checks: Vec<Check>,
}

impl<'a> Output<'a> {
    fn new(ctx: &'a RunContext) -> Self {
        Self {
            dir: &ctx.out_dir,
            artifacts: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.artifacts.push(name.into());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(name, text.as_bytes())
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn cmd_check(ctx: &RunContext, out: &mut Output) -> Result<Option<u64>> {
    let model = ctx.config.model()?;
    let grid = ctx.config.grid()?;
    let (lo, hi) = constant_bounds(&model, &grid)?;
    let c = &ctx.config.check;
    let u_min = c.u_min.unwrap_or(lo - 1.0);
    let u_max = c.u_max.unwrap_or(hi + 1.0);
    let u_far = match model.monotone_sign() {
        MonotoneSign::Minus => lo,
        MonotoneSign::Plus => hi,
    };
    let p_radius = c.p_radius.unwrap_or_else(|| 2.0 * model.coercivity_radius(0.0, u_far).max(0.5));
    let report = check_assumptions(&model, SampleBox { p_radius, u_min, u_max }, c.density, &c.requests)?;
    out.json("assumptions.json", &report)?;
    for (name, v) in [("H1", &report.h1), ("H2", &report.h2), ("H3", &report.h3), ("monotone", &report.monotone)] {
        out.check(Check::verdict(name, v.is_verified(), verdict_detail(v)));
    }
    out.check(Check::with_status("H4", CheckStatus::Skipped, verdict_detail(&report.h4)));
    Ok(None)
}

fn verdict_detail(v: &crate::model::Verdict) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

fn cmd_simulate(ctx: &RunContext, out: &mut Output) -> Result<Option<u64>> {
    let model = ctx.config.model()?;
    let init = ctx
        .config
        .flow
        .initial
        .as_ref()
        .ok_or_else(|| Error::Config("simulate needs flow.initial".into()))?;
    let z0 = PhasePoint::new(&init.x, &init.p, init.u)?;
    let cfg = ctx.config.integrator();
    let mut traj = integrate(&model, &z0, &cfg)?;
    let uref = match &ctx.config.grid.u_file {
        Some(path) => Some(GridFunction::load(&ctx.base_dir.join(path))?),
        None => None,
    };
    if let Some(gf) = &uref {
        traj.attach_second_lyapunov(gf);
    }
    if ctx.wants(Format::Csv) {
        out.write("trajectory.csv", traj.to_csv().as_bytes())?;
    }
    if ctx.wants(Format::Json) {
        out.write("trajectory.json", traj.to_json()?.as_bytes())?;
    }

    let energy = energy_residual(&model, &traj);
    let tol = ENERGY_TOL * traj.h_values[0].abs().max(1.0);
    out.check(Check::verdict(
        "energy_identity",
        energy.residual <= tol && energy.sign_preserved,
        format!(
            "residual {:e} (tolerance {tol:e}), sign preserved: {}",
            energy.residual, energy.sign_preserved
        ),
    ));
    let attracting = match model.monotone_sign() {
        MonotoneSign::Minus => Direction::Forward,
        MonotoneSign::Plus => Direction::Backward,
    };
    if cfg.direction == attracting {
        let v = check_first_lyapunov(&model, &traj)?;
        out.check(Check::verdict(
            "first_lyapunov",
            v.holds,
            format!("worst margin {:e} over {} steps", v.max_violation, v.checked),
        ));
        if let Some(gf) = &uref {
            let v = check_second_lyapunov(&model, &traj, gf)?;
            out.check(Check::verdict(
                "second_lyapunov",
                v.holds,
                format!("worst margin {:e} over {} pairs", v.max_violation, v.checked),
            ));
        }
    } else {
        out.check(Check::with_status(
            "first_lyapunov",
            CheckStatus::Skipped,
            "orbit runs against the attracting direction".into(),
        ));
    }
    out.check(Check::with_status(
        "termination",
        CheckStatus::Info,
        serde_json::to_string(&traj.termination)?,
    ));
    Ok(None)
}

/// Loads `grid.u_file` when given, otherwise solves and records the solve.
fn obtain_solution(ctx: &RunContext, model: &HamiltonianModel, out: &mut Output) -> Result<GridFunction> {
    match &ctx.config.grid.u_file {
        Some(path) => {
            let gf = GridFunction::load(&ctx.base_dir.join(path))?;
            if gf.grid().dim() != model.dim() {
                return Err(Error::Config(format!(
                    "grid.u_file is on T^{}, model is on T^{}",
                    gf.grid().dim(),
                    model.dim()
                )));
            }
            Ok(gf)
        }
        None => {
            let gf = solve_hj(model, &ctx.config.grid()?, &HjOptions::default())?;
            hj_checks(model, &gf, out)?;
            Ok(gf)
        }
    }
}

fn hj_checks(model: &HamiltonianModel, gf: &GridFunction, out: &mut Output) -> Result<()> {
    let (lo, hi) = constant_bounds(model, gf.grid())?;
    let (min, max) = gf
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    out.check(Check::verdict(
        "hj_sandwich",
        min >= lo && max <= hi,
        format!("values in [{min}, {max}], bounds [{lo}, {hi}]"),
    ));
    let grads = one_sided_gradients(gf);
    let g = grads.max_gradient_norm();
    out.check(Check::verdict(
        "hj_gradient_bound",
        g <= gf.lipschitz_bound(),
        format!("max one-sided gradient {g}, bound {}", gf.lipschitz_bound()),
    ));
    if let Some(stats) = gf.stats() {
        out.check(Check::verdict(
            "hj_monotone_iteration",
            stats.max_monotone_increase <= 1e-12,
            format!("largest increase between checks {:e}", stats.max_monotone_increase),
        ));
    }
    out.check(Check::with_status(
        "hj_residual",
        CheckStatus::Info,
        format!("residual norm {:e}", gf.residual_norm()),
    ));
    Ok(())
}

#[derive(Serialize)]
struct HjReport<'a> {
    kind: crate::hj::SolutionKind,
    n: usize,
    spacing: f64,
    bounds: (f64, f64),
    lipschitz_bound: f64,
    residual_norm: f64,
    grid_slack: f64,
    stats: Option<&'a crate::hj::SolveStats>,
}

fn cmd_solve_hj(ctx: &RunContext, out: &mut Output) -> Result<Option<u64>> {
    let model = ctx.config.model()?;
    let gf = solve_hj(&model, &ctx.config.grid()?, &HjOptions::default())?;
    hj_checks(&model, &gf, out)?;
    out.write("u.bin", &gf.to_bytes()?)?;
    if ctx.wants(Format::Csv) {
        out.write("u.csv", gf.to_csv().as_bytes())?;
    }
    if ctx.wants(Format::Json) {
        let report = HjReport {
            kind: gf.kind(),
            n: gf.grid().points_per_axis(),
            spacing: gf.grid().spacing(),
            bounds: gf.bounds(),
            lipschitz_bound: gf.lipschitz_bound(),
            residual_norm: gf.residual_norm(),
            grid_slack: gf.grid_slack(),
            stats: gf.stats(),
        };
        out.json("hj.json", &report)?;
    }
    Ok(None)
}

#[derive(Serialize)]
struct AttractorSummary {
    t: f64,
    delta: f64,
    n_samples: usize,
    seed: u64,
    max_abs_h: f64,
    h_bound: f64,
    max_f: f64,
    f_bound: f64,
    clusters: crate::attractor::ClusterReport,
}

fn cmd_attractor(ctx: &RunContext, out: &mut Output) -> Result<Option<u64>> {
    let model = ctx.config.model()?;
    let seed = ctx.config.seed()?;
    let a = &ctx.config.attractor;
    let gf = obtain_solution(ctx, &model, out)?;
    let spec = TrappingSpec::new(&model, gf, a.delta)?.with_energy_band(a.energy_band);
    let cloud = approximate_attractor(
        &model,
        &spec,
        ctx.config.attractor_time(),
        a.n_samples,
        seed,
        &ctx.config.integrator(),
    )?;
    out.check(Check::verdict(
        "energy_decay",
        cloud.max_abs_h <= cloud.h_bound,
        format!("max |H| {:e}, bound {:e}", cloud.max_abs_h, cloud.h_bound),
    ));
    out.check(Check::verdict(
        "second_lyapunov_decay",
        cloud.max_f <= cloud.f_bound,
        format!("max F {:e}, bound {:e}", cloud.max_f, cloud.f_bound),
    ));
    let graph = graph_property_check(&cloud.points);
    out.check(Check::verdict(
        "graph_property",
        graph.injective,
        match graph.witness {
            Some((a, b)) => format!("u differs over nearby points {a:?} and {b:?}"),
            None => "projection to (x, p) is injective on the cloud".into(),
        },
    ));
    let clusters = cluster_count(&cloud.points, a.cluster_factor);
    out.check(Check::with_status(
        "cluster_count",
        CheckStatus::Info,
        format!("{} cluster(s) at linkage {:e}", clusters.clusters, clusters.linkage_scale),
    ));
    if a.retraction_samples > 0 {
        let v = retraction_probe(&model, &spec, a.retraction_samples, a.retraction_steps, seed)?;
        out.check(Check::verdict(
            "retraction",
            v.contained,
            format!("{} deformation points, max H {:e}, max F {:e}", v.checked, v.max_h, v.max_f),
        ));
    }
    if ctx.wants(Format::Csv) {
        out.write("attractor.csv", cloud.to_csv(&model).as_bytes())?;
    }
    if ctx.wants(Format::Json) {
        out.json(
            "attractor.json",
            &AttractorSummary {
                t: cloud.t,
                delta: cloud.delta,
                n_samples: cloud.n_samples,
                seed,
                max_abs_h: cloud.max_abs_h,
                h_bound: cloud.h_bound,
                max_f: cloud.max_f,
                f_bound: cloud.f_bound,
                clusters,
            },
        )?;
    }
    Ok(Some(seed))
}

fn cmd_analyze(ctx: &RunContext, out: &mut Output) -> Result<Option<u64>> {
    let model = ctx.config.model()?;
    let s = &ctx.config.structure;
    let eqs = find_equilibria(&model, s.seed_density)?;
    out.check(Check::with_status(
        "H4",
        if eqs.nondegenerate() {
            CheckStatus::Passed
        } else {
            CheckStatus::Skipped
        },
        eqs.anomaly
            .clone()
            .unwrap_or_else(|| format!("{} non-degenerate equilibria", eqs.equilibria.len())),
    ));
    let mut flow = ctx.config.integrator();
    flow.t_final = s.t_max;
    let graph = detect_connections(&model, &eqs, s.eps, &flow)?;
    if ctx.wants(Format::Json) {
        out.write("graph.json", graph.to_json()?.as_bytes())?;
    }
    if ctx.wants(Format::Csv) {
        let mut csv = String::from("source,target,orbits\n");
        for e in &graph.edges {
            csv.push_str(&format!("{},{},{}\n", e.source, e.target, e.orbits.len()));
        }
        out.write("edges.csv", csv.as_bytes())?;
    }
    if !graph.undecided.is_empty() {
        out.check(Check::with_status(
            "undecided_seeds",
            CheckStatus::Info,
            format!("{} shooting seed(s) without a limit equilibrium", graph.undecided.len()),
        ));
    }

    let verdict = if eqs.nondegenerate() {
        let seed = ctx.config.seed()?;
        let a = &ctx.config.attractor;
        let gf = obtain_solution(ctx, &model, out)?;
        let spec = TrappingSpec::new(&model, gf, a.delta)?.with_energy_band(a.energy_band);
        let cloud = approximate_attractor(
            &model,
            &spec,
            ctx.config.attractor_time(),
            a.n_samples,
            seed,
            &ctx.config.integrator(),
        )?;
        let clusters = cluster_count(&cloud.points, a.cluster_factor);
        verify_theorem_b(&graph, &cloud.points, s.tol_struct, Some(clusters.clusters))
    } else {
        verify_theorem_b(&graph, &[], s.tol_struct, None)
    };
    let status = match &verdict {
        TheoremBVerdict::NotApplicable { .. } => CheckStatus::Skipped,
        v if v.passed() => CheckStatus::Passed,
        _ => CheckStatus::Failed,
    };
    out.check(Check::with_status("structure", status, serde_json::to_string(&verdict)?));
    if ctx.wants(Format::Json) {
        out.json("structure.json", &verdict)?;
    }
    Ok(ctx.config.attractor.seed.filter(|_| eqs.nondegenerate()))
}
