//! Batch runner: configuration, suite orchestration, `explain`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{dictionary_suite, find_killing_spinor, standard};
use crate::deform::deform_suite;
use crate::homogeneous::{build_geometry, curvature_suite, FrameGeometry, MetricKind};
use crate::opcalc::{default_window, hermitian_derivative_suite, weitzenboeck_suite, Mode};
use crate::par;
use crate::rarita::rarita_suite;
use crate::report::{Assertion, Observation, Provenance, RunReport, SuiteReport, Tolerances};
use crate::su3_model::{algebra_identity_suite, model, IdentityResidual};

pub const SEED_ENV: &str = "NKSPIN_SEED";
pub const DEFAULT_SEED: u64 = 1729;
/// Largest irreducible `V_{j1} ⊗ V_{j2}` dimension accepted in a window.
pub const MAX_MODE_DIM: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricChoice {
    NearlyKahler,
    RoundProduct,
    Both,
}

impl MetricChoice {
    pub fn kinds(self) -> Vec<MetricKind> {
        match self {
            MetricChoice::NearlyKahler => vec![MetricKind::NearlyKahler],
            MetricChoice::RoundProduct => vec![MetricKind::RoundProduct],
            MetricChoice::Both => vec![MetricKind::NearlyKahler, MetricKind::RoundProduct],
        }
    }
}

impl FromStr for MetricChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown metric `{s}` (nearly_kahler, round_product, both)"))
    }
}

/// Suites in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Curvature,
    Algebra,
    PropSuite,
    Weitzenboeck,
    Rarita,
    Deform,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Curvature, Suite::Algebra, Suite::PropSuite, Suite::Weitzenboeck, Suite::Rarita, Suite::Deform];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Curvature => "curvature",
            Suite::Algebra => "algebra",
            Suite::PropSuite => "prop_suite",
            Suite::Weitzenboeck => "weitzenboeck",
            Suite::Rarita => "rarita",
            Suite::Deform => "deform",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite `{s}` (valid: {})", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Text,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(format!("unknown format `{s}` (json, text)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricChoice,
    pub suites: Vec<Suite>,
    pub mode_window: Vec<Mode>,
    pub tolerances: Tolerances,
    /// `None` falls back to `NKSPIN_SEED`, then to the built-in default.
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Run independent suites concurrently.
    pub parallel: bool,
    /// Random instances per pointwise identity.
    pub identity_instances: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            metric: MetricChoice::Both,
            suites: Suite::ALL.to_vec(),
            mode_window: default_window(),
            tolerances: Tolerances::default(),
            seed: None,
            output: None,
            format: Format::Json,
            parallel: false,
            identity_instances: 100,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.tolerances.validate().map_err(ConfigError::Invalid)?;
        if self.suites.is_empty() {
            return Err(ConfigError::Invalid("no suites selected".into()));
        }
        if self.mode_window.is_empty() {
            return Err(ConfigError::Invalid("empty mode window".into()));
        }
        if let Some(m) = self.mode_window.iter().find(|m| m.dim() > MAX_MODE_DIM) {
            return Err(ConfigError::Invalid(format!("mode {m} has dimension {} > {MAX_MODE_DIM}", m.dim())));
        }
        if self.identity_instances == 0 {
            return Err(ConfigError::Invalid("identity_instances must be positive".into()));
        }
        Ok(())
    }

    /// Sorted, deduplicated suites.
    pub fn ordered_suites(&self) -> Vec<Suite> {
        let mut s = self.suites.clone();
        s.sort();
        s.dedup();
        s
    }

    fn window(&self) -> Vec<Mode> {
        let mut w = Vec::new();
        for m in &self.mode_window {
            if !w.contains(m) {
                w.push(*m);
            }
        }
        w
    }
}

/// Flag > config file > `NKSPIN_SEED` > default.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<u64, ConfigError> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|_| ConfigError::Invalid(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        None => Ok(DEFAULT_SEED),
    }
}

fn split_seed(seed: u64, suite: Suite, metric: &str) -> u64 {
    // FNV-1a over the labels, xor the user seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in suite.name().bytes().chain(*b"/").chain(metric.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ seed
}

fn identity_provenance(id: &str) -> Provenance {
    match id {
        "eq2.23-hodge-chain" | "Jstar2" => Provenance::Derived,
        _ => Provenance::Published,
    }
}

/// Pointwise SU(3) and Killing-spinor identities. Metric independent.
pub fn algebra_suite(seed: u64, n: usize, tol: f64) -> SuiteReport {
    let m = model();
    let cl = standard();
    let mut rep = SuiteReport::new("algebra", "su3_model");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<IdentityResidual> = algebra_identity_suite(m, &mut rng, n);
    match find_killing_spinor(m, cl) {
        Ok(k) => {
            rep.observe(Observation::new("orientation-nu", "fiber", k.nu));
            rows.extend(dictionary_suite(m, cl, &k, &mut rng, n));
        }
        Err(e) => rep.assert(Assertion::count("killing-spinor", "fiber", 0, 1, Provenance::Published).with_note(&e.to_string())),
    }
    for r in rows {
        let space = format!("pointwise[{}]", r.instances);
        if r.id.ends_with("-literal") {
            rep.observe(Observation::new(&r.id, &space, r.max_residual).with_note("statement evaluated without the orientation sign"));
        } else {
            rep.assert(Assertion::residual(&r.id, &space, r.max_residual, tol, identity_provenance(&r.id)));
        }
    }
    rep
}

fn run_one(suite: Suite, geom: &FrameGeometry, cfg: &RunConfig, seed: u64, window: &[Mode]) -> SuiteReport {
    let label = geom.kind.label();
    let tol = &cfg.tolerances;
    let s = split_seed(seed, suite, label);
    match suite {
        Suite::Curvature => curvature_suite(geom, &mut ChaCha8Rng::seed_from_u64(s), tol.identity),
        Suite::Algebra => unreachable!("algebra does not depend on the metric"),
        Suite::PropSuite => {
            if geom.su3.is_none() {
                let mut r = SuiteReport::new("prop_suite", label);
                r.observe(Observation::new("not-applicable", "all", "no SU(3)-structure"));
                r
            } else {
                hermitian_derivative_suite(geom, window, tol.operator)
            }
        }
        Suite::Weitzenboeck => weitzenboeck_suite(geom, window, tol.operator),
        Suite::Rarita => rarita_suite(geom, window, tol),
        Suite::Deform => deform_suite(geom, window, tol, s),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("geometry: {0}")]
    Geometry(String),
}

/// Execute every selected suite. The seed must already be resolved.
pub fn run(cfg: &RunConfig, seed: u64) -> Result<RunReport, RunError> {
    cfg.validate()?;
    let suites = cfg.ordered_suites();
    let window = cfg.window();
    let mut geoms = Vec::new();
    for k in cfg.metric.kinds() {
        geoms.push(build_geometry(k).map_err(|e| RunError::Geometry(e.to_string()))?);
    }
    let mut jobs: Vec<(Suite, Option<usize>)> = Vec::new();
    for &s in &suites {
        if s == Suite::Algebra {
            jobs.push((s, None));
        } else {
            jobs.extend((0..geoms.len()).map(|g| (s, Some(g))));
        }
    }
    let exec = |&(s, g): &(Suite, Option<usize>)| match g {
        None => algebra_suite(split_seed(seed, s, "su3_model"), cfg.identity_instances, cfg.tolerances.identity),
        Some(g) => run_one(s, &geoms[g], cfg, seed, &window),
    };
    let reports = if cfg.parallel { par::map(&jobs, exec) } else { jobs.iter().map(exec).collect() };
    let mut echoed = serde_json::to_value(cfg).expect("config serializes");
    echoed["seed"] = seed.into();
    echoed["output"] = serde_json::Value::Null;
    Ok(RunReport::new(echoed, reports))
}

// ---------------------------------------------------------------------------
// explain

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct IdentityEntry {
    pub id: String,
    pub citation: String,
    pub anchor: String,
    pub construction: String,
}

pub fn registry() -> &'static [IdentityEntry] {
    static R: std::sync::OnceLock<Vec<IdentityEntry>> = std::sync::OnceLock::new();
    R.get_or_init(|| serde_json::from_str(include_str!("../data/identities.json")).expect("identity registry parses"))
}

#[derive(Debug, thiserror::Error)]
#[error("unknown identity `{id}`; valid ids: {}", valid.join(", "))]
pub struct UnknownIdentity {
    pub id: String,
    pub valid: Vec<String>,
}

/// Exact id, or the longest registered id followed by `-`.
pub fn lookup(id: &str) -> Result<&'static IdentityEntry, UnknownIdentity> {
    let reg = registry();
    if let Some(e) = reg.iter().find(|e| e.id == id) {
        return Ok(e);
    }
    reg.iter()
        .filter(|e| id.len() > e.id.len() && id.starts_with(&e.id) && id.as_bytes()[e.id.len()] == b'-')
        .max_by_key(|e| e.id.len())
        .ok_or_else(|| UnknownIdentity { id: id.to_string(), valid: reg.iter().map(|e| e.id.clone()).collect() })
}

pub fn explain(id: &str) -> Result<String, UnknownIdentity> {
    let e = lookup(id)?;
    let mut s = format!("{id}\n  source:       {}\n", e.citation);
    if e.anchor.is_empty() {
        s.push_str("  anchor:       (none; consistency check of the implementation)\n");
    } else {
        s.push_str(&format!("  anchor:       ${}$\n", e.anchor));
    }
    s.push_str(&format!("  construction: {}\n", e.construction));
    Ok(s)
}

// ---------------------------------------------------------------------------
// command line

#[derive(Parser, Debug)]
#[command(name = "nkspin", version, about = "Verification runner for spinor identities on the nearly Kähler S³×S³")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run verification suites and write a report.
    Run(RunArgs),
    /// Print the source, anchor and test construction of an identity.
    Explain {
        /// Identity id, e.g. eq2.6 or thmA.
        id: Option<String>,
        /// List all known ids.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// nearly_kahler, round_product or both.
    #[arg(long, value_parser = MetricChoice::from_str)]
    pub metric: Option<MetricChoice>,
    /// Comma-separated suite names.
    #[arg(long, value_delimiter = ',', value_parser = Suite::from_str)]
    pub suites: Option<Vec<Suite>>,
    /// Semicolon-separated modes, e.g. "0,0;1/2,0;1/2,1/2".
    #[arg(long)]
    pub mode_window: Option<String>,
    /// Tolerance override `key=value`; keys identity, operator, rank, eigen.
    #[arg(long = "tolerance")]
    pub tolerance: Vec<String>,
    /// RNG seed; falls back to NKSPIN_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// json or text.
    #[arg(long, value_parser = Format::from_str)]
    pub format: Option<Format>,
    /// Run independent suites concurrently.
    #[arg(long)]
    pub parallel: bool,
    /// Disable the data-parallel kernels.
    #[arg(long)]
    pub sequential: bool,
}

pub fn parse_window(s: &str) -> Result<Vec<Mode>, String> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse::<Mode>()).collect()
}

fn apply_tolerance(t: &mut Tolerances, kv: &str) -> Result<(), String> {
    let (k, v) = kv.split_once('=').ok_or_else(|| format!("tolerance `{kv}` is not key=value"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("tolerance `{kv}`: bad number"))?;
    match k.trim() {
        "identity" => t.identity = v,
        "operator" => t.operator = v,
        "rank" => t.rank = v,
        "eigen" => t.eigen = v,
        other => return Err(format!("unknown tolerance `{other}` (identity, operator, rank, eigen)")),
    }
    Ok(())
}

/// Merge the config file and flags, then resolve the seed.
pub fn build_config(args: &RunArgs, env_seed: Option<&str>) -> Result<(RunConfig, u64), ConfigError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = args.metric {
        cfg.metric = m;
    }
    if let Some(s) = &args.suites {
        cfg.suites = s.clone();
    }
    if let Some(w) = &args.mode_window {
        cfg.mode_window = parse_window(w).map_err(ConfigError::Invalid)?;
    }
    for kv in &args.tolerance {
        apply_tolerance(&mut cfg.tolerances, kv).map_err(ConfigError::Invalid)?;
    }
    if args.output.is_some() {
        cfg.output = args.output.clone();
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if args.parallel {
        cfg.parallel = true;
    }
    cfg.validate()?;
    let seed = resolve_seed(args.seed, cfg.seed, env_seed)?;
    Ok((cfg, seed))
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    }
}

/// Entry point; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Explain { list: true, .. } => {
            for e in registry() {
                println!("{:<32} {}", e.id, e.citation);
            }
            0
        }
        Command::Explain { id: Some(id), .. } => match explain(&id) {
            Ok(s) => {
                print!("{s}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Command::Explain { id: None, .. } => {
            eprintln!("error: give an identity id or --list");
            2
        }
        Command::Run(args) => {
            let env = std::env::var(SEED_ENV).ok();
            let (cfg, seed) = match build_config(&args, env.as_deref()) {
                Ok(x) => x,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            if args.sequential {
                par::set_enabled(false);
            }
            let report = match run(&cfg, seed) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            let out = render(&report, cfg.format);
            match &cfg.output {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, &out) {
                        eprintln!("error: cannot write {}: {e}", p.display());
                        return 2;
                    }
                }
                None => print!("{out}"),
            }
            for s in &report.suites {
                for a in s.failures() {
                    eprintln!("FAIL {} [{}] {} {}: value {:e}, expected {:e} ± {:e}", s.suite, s.metric, a.id, a.space, a.value, a.expected, a.tolerance);
                }
            }
            if report.pass {
                0
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2), Some("3")).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2), Some("3")).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, Some("3")).unwrap(), 3);
        assert_eq!(resolve_seed(None, None, None).unwrap(), DEFAULT_SEED);
        assert!(resolve_seed(None, None, Some("x")).is_err());
    }

    #[test]
    fn config_rejects_unknown() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"suites":["bogus"]}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"colour":1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"tolerances":{"identity":-1}}"#).unwrap();
        assert!(c.validate().is_err());
        let c: RunConfig = serde_json::from_str(r#"{"mode_window":["0,0","1/2,1/2"],"metric":"round_product"}"#).unwrap();
        assert_eq!(c.mode_window, vec![Mode::new(0, 0), Mode::new(1, 1)]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("nkspin-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(&p, r#"{"metric":"round_product","seed":5,"suites":["rarita"]}"#).unwrap();
        let args = RunArgs { config: Some(p.clone()), metric: Some(MetricChoice::NearlyKahler), tolerance: vec!["rank=1e-7".into()], ..Default::default() };
        let (cfg, seed) = build_config(&args, Some("9")).unwrap();
        assert_eq!(cfg.metric, MetricChoice::NearlyKahler);
        assert_eq!(cfg.suites, vec![Suite::Rarita]);
        assert_eq!(cfg.tolerances.rank, 1e-7);
        assert_eq!(seed, 5);
        let bad = RunArgs { tolerance: vec!["rank=0".into()], ..Default::default() };
        assert!(build_config(&bad, None).is_err());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn explain_lookup() {
        assert!(explain("eq2.6").unwrap().contains(r"\psi^- \cdot \kappa = 4\kappa"));
        assert!(explain("thmA").unwrap().contains(r"\dim \ker Q = b_3(M)"));
        assert_eq!(lookup("lemma4.1-trace").unwrap().id, "lemma4.1");
        assert_eq!(lookup("eq2.23-hodge-chain").unwrap().id, "eq2.23-hodge-chain");
        assert_eq!(lookup("eq2.5-literal").unwrap().id, "eq2.5");
        let e = explain("bogus").unwrap_err();
        assert!(e.to_string().contains("thmB"));
        assert!(lookup("eq2").is_err());
    }

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("0,0; 1/2,0").unwrap(), vec![Mode::new(0, 0), Mode::new(1, 0)]);
        assert!(parse_window("1/3,0").is_err());
    }
}
