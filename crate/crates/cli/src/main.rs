//! `ftsm`: kernels, sample paths, characteristic functions and verification checks.

mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ftsm_core::charfn::{
    cf_fsm, cf_ftsm, cf_rescaled_long, cf_rescaled_short, cf_ts, codifference, codifference_asymptotic_constant,
};
use ftsm_core::exec::{try_map_indexed, Execution};
use ftsm_core::kernel::{KernelParams, KernelValue, Regime};
use ftsm_core::measure::{InnerMeasure, MeasureSpec};
use ftsm_core::series::{FbmApprox, Path, ProcessKind, Provenance, SeriesSimulator, TailCorrection};
use ftsm_core::verify::{run_suite, PassRule, Suite, VerificationReport};

use config::{config_err, parse_config, ConfigError, Resolver, Span};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "ftsm", version, about = "Fractional tempered stable motion toolkit")]
struct Cli {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: FTSM_THREADS, then all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel values K(t,s) as t,s,K rows, or C_{H,α,p} constants with --p.
    Kernel(KernelArgs),
    /// Sample paths on an even grid as rep,t,value rows.
    Simulate(SimulateArgs),
    /// Characteristic function on a y grid as y,re,im rows.
    Cf(CfArgs),
    /// Codifference of unit increments at lag t with its large-t asymptote.
    Codiff(CodiffArgs),
    /// Monte Carlo and deterministic checks; exit status 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long = "H", allow_negative_numbers = true)]
    hurst: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// `rho1`, `rho2`, `rho2(a)`, `x:w,x:w` or `{x=..,w=..},...`
    #[arg(long)]
    rho: Option<String>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long = "H", allow_negative_numbers = true)]
    hurst: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Grid of t values, `a:b:n` or `log:a:b:n`; replaces --t.
    #[arg(long = "t-grid")]
    t_grid: Option<Span>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Evaluate at s = t·k/n for k = 0..n instead of a single --s.
    #[arg(long = "s-n")]
    s_n: Option<usize>,
    /// Comma-separated exponents p; prints the C_{H,α,p} table.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// One of ts, ftsm, fsm, fbm, coupled, or a comma list sharing drivers (e.g. ftsm,ts).
    #[arg(long)]
    kind: Option<String>,
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Number of grid steps on [0, T].
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Series truncation level.
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    /// Rescaling level for `coupled`.
    #[arg(long)]
    h: Option<f64>,
    /// gaussian or none.
    #[arg(long)]
    tail: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Provenance sidecar (default: <out>.json when --out is given).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CfArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// ts, ftsm, fsm, short or long.
    #[arg(long)]
    process: Option<String>,
    #[arg(long = "y-grid", allow_hyphen_values = true)]
    y_grid: Option<Span>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CodiffArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    theta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta2: Option<f64>,
    /// Lags t ≥ 1, `a:b:n` or `log:a:b:n`.
    #[arg(long = "t-grid")]
    t_grid: Option<Span>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// covariance, qv, lrd, gauss, cf, holder, fbm, limits or all.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report array here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let cfg = Resolver::new(file);
    setup_threads(&cfg, cli.threads)?;
    match cli.command {
        Command::Kernel(a) => kernel_cmd(&cfg, a),
        Command::Simulate(a) => simulate_cmd(&cfg, a),
        Command::Cf(a) => cf_cmd(&cfg, a),
        Command::Codiff(a) => codiff_cmd(&cfg, a),
        Command::Verify(a) => verify_cmd(&cfg, a),
    }
}

/// Sizes the global pool. The thread count is not recorded: results do not depend on it.
fn setup_threads(cfg: &Resolver, flag: Option<usize>) -> Result<()> {
    let env = match std::env::var("FTSM_THREADS") {
        Ok(s) if !s.trim().is_empty() => {
            Some(s.trim().parse::<usize>().map_err(|e| config_err(format!("FTSM_THREADS = {s:?}: {e}")))?)
        }
        _ => None,
    };
    let file = cfg.peek::<usize>("threads", None)?;
    let n = flag.or(file).or(env);
    if n == Some(0) {
        return Err(config_err("threads must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the thread pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

struct Model {
    params: KernelParams,
    rho: InnerMeasure,
}

fn resolve_params(cfg: &Resolver, hurst: Option<f64>, alpha: Option<f64>) -> Result<KernelParams> {
    let h = cfg.req("H", hurst)?;
    let a = cfg.req("alpha", alpha)?;
    config::kernel_params(h, a)
}

fn resolve_model(cfg: &Resolver, m: ModelArgs) -> Result<Model> {
    let params = resolve_params(cfg, m.hurst, m.alpha)?;
    let spec = match m.rho {
        Some(s) => Some(s.parse::<MeasureSpec>().map_err(|e| config_err(format!("setting rho = {s:?}: {e}")))?),
        None => None,
    };
    let spec = cfg.or("rho", spec, MeasureSpec::Rho2 { alpha: None })?;
    let rho = config::measure(&spec, params.alpha())?;
    Ok(Model { params, rho })
}

fn warn_regime(params: &KernelParams) {
    if params.regime() == Regime::Rough {
        eprintln!(
            "warning: H = {} < 1/α = {}: sample paths are unbounded on every interval and K(t,s) is infinite at s = 0 and s = t",
            params.hurst(),
            1.0 / params.alpha()
        );
    }
}

/// Header comment lines carrying the version and every resolved setting.
fn header(command: &str, cfg: &Resolver) -> String {
    let mut s = format!("# ftsm {VERSION} {command}\n");
    for (k, v) in cfg.resolved() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn fmt_kernel(v: KernelValue) -> String {
    match v {
        KernelValue::Finite(x) => x.to_string(),
        KernelValue::Infinite => "inf".into(),
    }
}

fn kernel_cmd(cfg: &Resolver, a: KernelArgs) -> Result<ExitCode> {
    let params = resolve_params(cfg, a.hurst, a.alpha)?;
    let out = cfg.peek("out", a.out)?;
    warn_regime(&params);
    let mut body = String::new();
    if let Some(ps) = cfg.get::<String>("p", a.p)? {
        body.push_str("H,alpha,p,C\n");
        for p in ps.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let p: f64 = p.parse().map_err(|e| config_err(format!("setting p: {p:?}: {e}")))?;
            let c = if params.lp_integrable(p) {
                params.kernel_lp_const(p)?.to_string()
            } else {
                "inf".into()
            };
            let _ = writeln!(body, "{},{},{},{}", params.hurst(), params.alpha(), p, c);
        }
        emit(out.as_ref(), &(header("kernel", cfg) + &body))?;
        return Ok(ExitCode::SUCCESS);
    }
    let ts = match cfg.get::<Span>("t-grid", a.t_grid)? {
        Some(span) => span.points(),
        None => vec![cfg.req::<f64>("t", a.t)?],
    };
    let s_n = cfg.get::<usize>("s-n", a.s_n)?;
    let s_single = if s_n.is_none() { Some(cfg.req::<f64>("s", a.s)?) } else { None };
    if s_n == Some(0) {
        return Err(config_err("s-n must be at least 1"));
    }
    body.push_str("t,s,K\n");
    let mut infinite = 0usize;
    for &t in &ts {
        let ss: Vec<f64> = match (s_single, s_n) {
            (Some(s), _) => vec![s],
            (None, Some(n)) => (0..=n).map(|k| t * k as f64 / n as f64).collect(),
            (None, None) => unreachable!("s or s-n is resolved above"),
        };
        for s in ss {
            let k = params.kernel_eval(t, s).map_err(|e| config_err(e.to_string()))?;
            infinite += usize::from(k.is_infinite());
            let _ = writeln!(body, "{t},{s},{}", fmt_kernel(k));
        }
    }
    if infinite > 0 {
        eprintln!("warning: {infinite} kernel value(s) are infinite and written as inf");
    }
    emit(out.as_ref(), &(header("kernel", cfg) + &body))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SimKind {
    Series(ProcessKind),
    Fbm,
}

fn parse_kinds(s: &str) -> Result<Vec<SimKind>> {
    let mut kinds = Vec::new();
    for k in s.split(',').map(str::trim) {
        let kind = match k {
            "ts" => SimKind::Series(ProcessKind::Ts),
            "ftsm" => SimKind::Series(ProcessKind::Ftsm),
            "fsm" => SimKind::Series(ProcessKind::Fsm),
            "coupled" => SimKind::Series(ProcessKind::CoupledDiff),
            "fbm" => SimKind::Fbm,
            other => return Err(config_err(format!("unknown kind {other:?}; expected ts, ftsm, fsm, fbm or coupled"))),
        };
        if kinds.contains(&kind) {
            return Err(config_err(format!("kind {k:?} is listed twice")));
        }
        kinds.push(kind);
    }
    Ok(kinds)
}

fn kind_label(k: SimKind) -> String {
    match k {
        SimKind::Series(ProcessKind::CoupledDiff) => "coupled".into(),
        SimKind::Series(p) => p.to_string(),
        SimKind::Fbm => "fbm".into(),
    }
}

#[derive(Serialize)]
struct Sidecar {
    version: &'static str,
    command: &'static str,
    config: BTreeMap<String, String>,
    kinds: Vec<String>,
    regime: Regime,
    unbounded_regime: bool,
    grid: Vec<f64>,
    provenance: Provenance,
    /// Per replication, the heuristic size of the neglected series terms for each kind.
    tail_bounds: Vec<Vec<f64>>,
}

fn simulate_cmd(cfg: &Resolver, a: SimulateArgs) -> Result<ExitCode> {
    let model = resolve_model(cfg, a.model)?;
    let kinds = parse_kinds(&cfg.req::<String>("kind", a.kind)?)?;
    let horizon = cfg.or("T", a.horizon, 1.0)?;
    let grid_n = cfg.or("grid-n", a.grid_n, 100usize)?;
    let terms = cfg.or("terms", a.terms, 1000usize)?;
    let seed = cfg.or("seed", a.seed, 0u64)?;
    let reps = cfg.or("reps", a.reps, 1u64)?;
    let tail = match cfg.or::<String>("tail", a.tail, "gaussian".into())?.as_str() {
        "gaussian" => TailCorrection::Gaussian,
        "none" => TailCorrection::None,
        other => return Err(config_err(format!("unknown tail {other:?}; expected gaussian or none"))),
    };
    let coupled = kinds.contains(&SimKind::Series(ProcessKind::CoupledDiff));
    let h = if coupled { Some(cfg.req::<f64>("h", a.h)?) } else { None };
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(config_err(format!("T = {horizon} must be positive")));
    }
    if grid_n == 0 || terms == 0 || reps == 0 {
        return Err(config_err("grid-n, terms and reps must be at least 1"));
    }
    if let Some(h) = h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(config_err(format!("h = {h} must be positive")));
        }
    }
    if coupled && !model.rho.is_symmetric() {
        return Err(config_err("kind coupled needs a symmetric rho"));
    }
    if kinds.contains(&SimKind::Series(ProcessKind::Fsm)) && !model.rho.is_symmetric() && (model.params.alpha() - 1.0).abs() < 1e-12
    {
        return Err(config_err("kind fsm at alpha = 1 needs a symmetric rho"));
    }
    let out = cfg.peek("out", a.out)?;
    let json = cfg.peek("json", a.json)?;
    warn_regime(&model.params);

    let grid: Vec<f64> = (0..=grid_n).map(|k| horizon * k as f64 / grid_n as f64).collect();
    let sim = SeriesSimulator::new(model.params, model.rho.clone(), horizon, grid.clone(), terms, tail)
        .map_err(|e| config_err(e.to_string()))?;
    let fbm = if kinds.contains(&SimKind::Fbm) {
        Some(FbmApprox::new(model.params, terms, grid.clone()).map_err(|e| config_err(e.to_string()))?)
    } else {
        None
    };
    let paths: Vec<Vec<Path>> = try_map_indexed(reps, Execution::Auto, |r| -> ftsm_core::Result<Vec<Path>> {
        let driver = if kinds.iter().any(|k| matches!(k, SimKind::Series(_))) { Some(sim.driver(seed, r)?) } else { None };
        kinds
            .iter()
            .map(|k| match k {
                SimKind::Series(ProcessKind::CoupledDiff) => {
                    sim.coupled_short_time_diff(driver.as_ref().expect("driver"), h.expect("h"))
                }
                SimKind::Series(p) => sim.simulate(*p, driver.as_ref().expect("driver")),
                SimKind::Fbm => Ok(fbm.as_ref().expect("fbm").simulate(seed, r)),
            })
            .collect()
    })?;

    let labels: Vec<String> = kinds.iter().map(|k| kind_label(*k)).collect();
    let mut body = header("simulate", cfg);
    if labels.len() == 1 {
        body.push_str("rep,t,value\n");
    } else {
        let _ = writeln!(body, "rep,t,{}", labels.join(","));
    }
    for (r, rep_paths) in paths.iter().enumerate() {
        for (j, t) in grid.iter().enumerate() {
            let _ = write!(body, "{r},{t}");
            for p in rep_paths {
                let _ = write!(body, ",{}", p.values[j]);
            }
            body.push('\n');
        }
    }
    emit(out.as_ref(), &body)?;

    let sidecar_path = json.or_else(|| {
        out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = sidecar_path {
        let first = &paths[0][0];
        let sidecar = Sidecar {
            version: VERSION,
            command: "simulate",
            config: cfg.resolved(),
            kinds: labels,
            regime: model.params.regime(),
            unbounded_regime: first.unbounded_regime,
            grid,
            provenance: Provenance { rep: 0, ..first.provenance.clone() },
            tail_bounds: paths.iter().map(|ps| ps.iter().map(|p| p.tail_bound).collect()).collect(),
        };
        let text = serde_json::to_string_pretty(&sidecar)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cf_cmd(cfg: &Resolver, a: CfArgs) -> Result<ExitCode> {
    let model = resolve_model(cfg, a.model)?;
    let process = cfg.req::<String>("process", a.process)?;
    let ys = cfg.req::<Span>("y-grid", a.y_grid)?.points();
    let needs_t = matches!(process.as_str(), "ts" | "ftsm" | "fsm" | "short");
    let needs_h = matches!(process.as_str(), "short" | "long");
    if !needs_t && !needs_h {
        return Err(config_err(format!("unknown process {process:?}; expected ts, ftsm, fsm, short or long")));
    }
    let t = if needs_t { cfg.or("t", a.t, 1.0)? } else { 1.0 };
    let h = if needs_h { cfg.req::<f64>("h", a.h)? } else { 1.0 };
    if !(t > 0.0 && t.is_finite()) || !(h > 0.0 && h.is_finite()) {
        return Err(config_err("t and h must be positive"));
    }
    let out = cfg.peek("out", a.out)?;
    let (p, rho) = (&model.params, &model.rho);
    let mut body = header("cf", cfg);
    body.push_str("y,re,im\n");
    for y in ys {
        let v = match process.as_str() {
            "ts" => cf_ts(y, t, rho, p.alpha()),
            "ftsm" => cf_ftsm(y, t, p, rho),
            "fsm" => cf_fsm(y, t, p, rho),
            "short" => cf_rescaled_short(y, t, p, rho, h),
            _ => cf_rescaled_long(y, p, rho, h),
        }?;
        let _ = writeln!(body, "{y},{},{}", v.re, v.im);
    }
    emit(out.as_ref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn codiff_cmd(cfg: &Resolver, a: CodiffArgs) -> Result<ExitCode> {
    let model = resolve_model(cfg, a.model)?;
    let theta1 = cfg.req::<f64>("theta1", a.theta1)?;
    let theta2 = cfg.req::<f64>("theta2", a.theta2)?;
    let span = cfg.req::<Span>("t-grid", a.t_grid)?;
    if span.lo < 1.0 {
        return Err(config_err(format!("t-grid starts at {} < 1", span.lo)));
    }
    let out = cfg.peek("out", a.out)?;
    let (p, rho) = (&model.params, &model.rho);
    // the asymptote is unavailable at α = 1
    let constant = codifference_asymptotic_constant(theta1, theta2, p, rho).ok();
    let exponent = 2.0 * (p.g_exponent() - 1.0);
    let mut body = header("codiff", cfg);
    body.push_str("t,re,im,asym_re,asym_im\n");
    for t in span.points() {
        let v = codifference(theta1, theta2, t, p, rho)?;
        match constant {
            Some(c) => {
                let asym = c * t.powf(exponent);
                let _ = writeln!(body, "{t},{},{},{},{}", v.re, v.im, asym.re, asym.im);
            }
            None => {
                let _ = writeln!(body, "{t},{},{},,", v.re, v.im);
            }
        }
    }
    emit(out.as_ref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn rule_text(r: &PassRule) -> String {
    match r {
        PassRule::ZScore(l) => format!("|z|<={l:.3}"),
        PassRule::Absolute(l) => format!("|err|<={l}"),
        PassRule::Relative(l) => format!("rel<={l}"),
    }
}

fn table(reports: &[VerificationReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = format!(
        "{:<width$}  {:>13}  {:>13}  {:>10}  {:>8}  {:<12}  {}\n",
        "name", "theoretical", "estimate", "std_error", "z", "rule", "result"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<width$}  {:>13.6e}  {:>13.6e}  {:>10.3e}  {:>8.3}  {:<12}  {}",
            r.name,
            r.theoretical,
            r.estimate,
            r.std_error,
            r.z_score,
            rule_text(&r.rule),
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    let _ = writeln!(s, "{} checks, {} failed", reports.len(), failed);
    s
}

fn verify_cmd(cfg: &Resolver, a: VerifyArgs) -> Result<ExitCode> {
    let suite_name = cfg.or::<String>("suite", a.suite, "all".into())?;
    let suite: Suite = suite_name.parse().map_err(|e: ftsm_core::Error| config_err(e.to_string()))?;
    let seed = cfg.or("seed", a.seed, 7u64)?;
    let json = cfg.peek("json", a.json)?;
    let reports = run_suite(suite, seed, Execution::Auto)?;
    let text = serde_json::to_string_pretty(&reports)? + "\n";
    match &json {
        Some(p) => {
            std::fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            print!("{}", table(&reports));
        }
        None => {
            print!("{text}");
            eprint!("{}", table(&reports));
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
