//! Command-line front end: flag and config handling, suite orchestration, spectra and report output.

use crate::boundary_charges::verify_symmetry_suite;
use crate::hecke_algebra::verify_hecke_suite_sampled;
use crate::params::ModelParams;
use crate::quantum_algebra::verify_algebra_suite;
use crate::reflection_k::{verify_reflection_suite, LeftBoundaryKind, RightBoundary};
use crate::report::{Cluster, Cx, ParamsSnapshot, SpectrumReport, VerificationReport};
use crate::spin_chain::{build_hamiltonian, verify_chain_suite, ChainSpec, HamiltonianRoute};
use crate::tensor_core::{Operator, C64};
use crate::yang_baxter::{verify_ybe_suite, Gauge};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Largest Hilbert space accepted by `spectrum`.
pub const SPECTRUM_CAP: usize = 4096;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => m,
        }
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "hecke-boundary", version, about = "Verify U_q(gl_n) open-chain identities and compute spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run verification suites and emit a report per suite.
    Verify(RunArgs),
    /// Diagonalise the open-chain Hamiltonian.
    Spectrum(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GaugeArg {
    Homogeneous,
    Principal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LeftArg {
    Identity,
    TransposeShift,
    AffineLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RightArg {
    Explicit,
    Ansatz,
    Diagonal,
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Hecke,
    Ybe,
    Reflection,
    Algebra,
    Chain,
    Symmetry,
}

impl Suite {
    const EACH: [Suite; 6] = [Suite::Hecke, Suite::Ybe, Suite::Reflection, Suite::Algebra, Suite::Chain, Suite::Symmetry];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long, value_parser = parse_complex_arg, allow_hyphen_values = true)]
    pub mu: Option<C64>,
    #[arg(long, value_parser = parse_complex_arg, allow_hyphen_values = true)]
    pub m: Option<C64>,
    #[arg(long, value_parser = parse_complex_arg, allow_hyphen_values = true)]
    pub zeta: Option<C64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub gauge: Option<GaugeArg>,
    #[arg(long, value_enum)]
    pub left: Option<LeftArg>,
    #[arg(long, value_enum)]
    pub right: Option<RightArg>,
    #[arg(long = "diag-block")]
    pub diag_block: Option<usize>,
    #[arg(long, value_parser = parse_complex_arg, allow_hyphen_values = true)]
    pub xi: Option<C64>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record wall-clock milliseconds per check (output is then not reproducible).
    #[arg(long)]
    pub timings: bool,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub gauge: Gauge,
    pub left: LeftBoundaryKind,
    pub right: RightArg,
    pub diag_block: usize,
    pub xi: C64,
    pub suite: Suite,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::default(),
            samples: 5,
            seed: 0,
            tol: 1e-9,
            gauge: Gauge::Homogeneous,
            left: LeftBoundaryKind::Identity,
            right: RightArg::Explicit,
            diag_block: 1,
            xi: C64::new(0.3, 0.0),
            suite: Suite::All,
            out: None,
            format: Format::Json,
            timings: false,
        }
    }
}

impl RunConfig {
    pub fn right_boundary(&self) -> RightBoundary {
        match self.right {
            RightArg::Explicit => RightBoundary::Explicit,
            RightArg::Ansatz => RightBoundary::Ansatz,
            RightArg::Diagonal => RightBoundary::Diagonal { l: self.diag_block, xi: self.xi },
            RightArg::Trivial => RightBoundary::Trivial,
        }
    }

    pub fn chain_spec(&self) -> ChainSpec {
        ChainSpec::new(self.params, self.gauge, self.right_boundary(), self.left)
    }

    pub fn snapshot(&self) -> ParamsSnapshot {
        let mut s = ParamsSnapshot::from_params(&self.params, self.samples, self.seed, self.tol);
        s.gauge = self.gauge.name().into();
        s.left = self.left.name().into();
        s.right = self.right_boundary().name().into();
        s.diag_block = self.diag_block;
        s.xi = self.xi.into();
        s
    }

    fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Invalid(format!("tol = {} must be positive and finite", self.tol)));
        }
        if self.diag_block < 1 || self.diag_block >= self.params.n {
            return Err(CliError::Invalid(format!(
                "diag-block L = {} must satisfy 1 <= L < n = {}",
                self.diag_block, self.params.n
            )));
        }
        Ok(())
    }
}

/// Parse "a", "bi", "a+bi", "a-bi", "i", "-i" with optional exponents.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse complex number '{s}' (expected a+bi)");
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not a leading sign or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn parse_complex_arg(s: &str) -> Result<C64, String> {
    parse_complex(s)
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T, CliError> {
    T::from_str(v, false).map_err(|_| CliError::Invalid(format!("config key '{key}': invalid value '{v}'")))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Invalid(format!("config key '{key}': invalid value '{v}'")))
}

/// Apply a key=value config text onto `cfg`. Keys match the long flag names.
pub fn apply_config_text(cfg: &mut RunConfig, text: &str) -> Result<(), CliError> {
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("config line {}: expected key=value", ln + 1)))?;
        let key = k.trim().replace('_', "-");
        let v = v.trim();
        let cx = |v: &str| parse_complex(v).map_err(CliError::Invalid);
        match key.as_str() {
            "n" => cfg.params.n = parse_num(&key, v)?,
            "sites" => cfg.params.sites = parse_num(&key, v)?,
            "mu" => cfg.params.mu = cx(v)?,
            "m" => cfg.params.m = cx(v)?,
            "zeta" => cfg.params.zeta = cx(v)?,
            "samples" => cfg.samples = parse_num(&key, v)?,
            "seed" => cfg.seed = parse_num(&key, v)?,
            "tol" => cfg.tol = parse_num(&key, v)?,
            "gauge" => cfg.gauge = gauge_of(parse_enum(&key, v)?),
            "left" => cfg.left = left_of(parse_enum(&key, v)?),
            "right" => cfg.right = parse_enum(&key, v)?,
            "diag-block" => cfg.diag_block = parse_num(&key, v)?,
            "xi" => cfg.xi = cx(v)?,
            "suite" => cfg.suite = parse_enum(&key, v)?,
            "out" => cfg.out = Some(PathBuf::from(v)),
            "format" => cfg.format = parse_enum(&key, v)?,
            "timings" => cfg.timings = parse_num(&key, v)?,
            _ => return Err(CliError::Invalid(format!("unknown config key '{}'", k.trim()))),
        }
    }
    Ok(())
}

fn gauge_of(g: GaugeArg) -> Gauge {
    match g {
        GaugeArg::Homogeneous => Gauge::Homogeneous,
        GaugeArg::Principal => Gauge::Principal,
    }
}

fn left_of(l: LeftArg) -> LeftBoundaryKind {
    match l {
        LeftArg::Identity => LeftBoundaryKind::Identity,
        LeftArg::TransposeShift => LeftBoundaryKind::TransposeShift,
        LeftArg::AffineLimit => LeftBoundaryKind::AffineLimit,
    }
}

/// Defaults, then the config file, then explicit flags.
pub fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        apply_config_text(&mut cfg, &text)?;
    }
    macro_rules! set {
        ($field:expr, $v:expr) => {
            if let Some(v) = $v {
                $field = v;
            }
        };
    }
    set!(cfg.params.n, args.n);
    set!(cfg.params.sites, args.sites);
    set!(cfg.params.mu, args.mu);
    set!(cfg.params.m, args.m);
    set!(cfg.params.zeta, args.zeta);
    set!(cfg.samples, args.samples);
    set!(cfg.seed, args.seed);
    set!(cfg.tol, args.tol);
    set!(cfg.gauge, args.gauge.map(gauge_of));
    set!(cfg.left, args.left.map(left_of));
    set!(cfg.right, args.right);
    set!(cfg.diag_block, args.diag_block);
    set!(cfg.xi, args.xi);
    set!(cfg.suite, args.suite);
    set!(cfg.format, args.format);
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    cfg.timings |= args.timings;
    cfg.validate()?;
    Ok(cfg)
}

/// Run one suite.
pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<VerificationReport, CliError> {
    let p = &cfg.params;
    let (s, seed, tol) = (cfg.samples, cfg.seed, cfg.tol);
    let spec = cfg.chain_spec();
    let mut r = match suite {
        Suite::Hecke => verify_hecke_suite_sampled(p, s, seed, tol)?,
        Suite::Ybe => verify_ybe_suite(p, s, seed, tol)?,
        Suite::Reflection => verify_reflection_suite(p, s, seed, tol, cfg.diag_block, cfg.xi)?,
        Suite::Algebra => verify_algebra_suite(p, s, seed, tol)?,
        Suite::Chain => verify_chain_suite(&spec, s, seed, tol)?,
        Suite::Symmetry => verify_symmetry_suite(&spec, s, seed, tol)?,
        Suite::All => return Err(CliError::Invalid("suite 'all' is not a single suite".into())),
    };
    r.params = cfg.snapshot();
    if !cfg.timings {
        r.strip_timings();
    }
    Ok(r)
}

/// Every requested suite, in a fixed order.
pub fn run_verify(cfg: &RunConfig) -> Result<Vec<VerificationReport>, CliError> {
    let suites: Vec<Suite> = if cfg.suite == Suite::All { Suite::EACH.to_vec() } else { vec![cfg.suite] };
    suites.into_iter().map(|s| run_suite(cfg, s)).collect()
}

/// Eigenvalues of H sorted by (re, im), clustered within an absolute tolerance.
pub fn run_spectrum(cfg: &RunConfig) -> Result<SpectrumReport, CliError> {
    let p = &cfg.params;
    let dim = (p.n as u128).checked_pow(p.sites as u32).unwrap_or(u128::MAX);
    if dim > SPECTRUM_CAP as u128 {
        return Err(CliError::Invalid(format!("n^N = {}^{} exceeds the spectrum cap {SPECTRUM_CAP}", p.n, p.sites)));
    }
    let h = build_hamiltonian(&cfg.chain_spec(), HamiltonianRoute::HeckeForm)?;
    Ok(spectrum_of(&h, cfg.snapshot()))
}

pub fn spectrum_of(h: &Operator, params: ParamsSnapshot) -> SpectrumReport {
    let hn = h.norm().max(f64::MIN_POSITIVE);
    let hermitian_defect = (h - &h.adjoint()).norm() / hn;
    let mut ev = eigenvalues(h);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let cluster_tol = 1e-6 * scale;
    let clusters = cluster(&ev, cluster_tol);
    SpectrumReport { params, eigenvalues: ev.iter().map(|&z| z.into()).collect(), clusters, cluster_tol, hermitian_defect }
}

#[cfg(not(feature = "lapack"))]
fn eigenvalues(h: &Operator) -> Vec<C64> {
    h.matrix().clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

#[cfg(feature = "lapack")]
fn eigenvalues(h: &Operator) -> Vec<C64> {
    extern crate openblas_src;
    let n = h.side();
    // nalgebra storage is column-major, as LAPACK expects
    let mut a: Vec<C64> = h.matrix().as_slice().to_vec();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut dummy = vec![C64::new(0.0, 0.0); 1];
    let mut dummy2 = vec![C64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0; 2 * n];
    let mut query = vec![C64::new(0.0, 0.0); 1];
    let mut info = 0;
    let ni = n as i32;
    // SAFETY: buffers sized per the zgeev contract; no eigenvectors requested
    unsafe {
        lapack::zgeev(b'N', b'N', ni, &mut a, ni, &mut w, &mut dummy, 1, &mut dummy2, 1, &mut query, -1, &mut rwork, &mut info);
    }
    let lwork = (query[0].re as usize).max(2 * n);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zgeev(b'N', b'N', ni, &mut a, ni, &mut w, &mut dummy, 1, &mut dummy2, 1, &mut work, lwork as i32, &mut rwork, &mut info);
    }
    assert_eq!(info, 0, "zgeev failed to converge");
    w
}

/// Connected components of the graph |a − b| ≤ tol.
pub fn cluster(ev: &[C64], tol: f64) -> Vec<Cluster> {
    let n = ev.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in 0..n {
        for b in a + 1..n {
            if ev[b].re - ev[a].re > tol {
                break;
            }
            if (ev[a] - ev[b]).norm() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<C64>> = Default::default();
    for (k, &z) in ev.iter().enumerate() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(z);
    }
    let mut out: Vec<Cluster> = groups
        .into_values()
        .map(|g| {
            let c = g.iter().sum::<C64>() / g.len() as f64;
            Cluster { value: Cx::from(c), multiplicity: g.len() }
        })
        .collect();
    out.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    out
}

pub fn emit_verify(reports: &[VerificationReport], format: Format) -> String {
    match format {
        // one JSON object per suite, one per line
        Format::Json => reports
            .iter()
            .map(|r| serde_json::to_string(r).expect("reports serialise") + "\n")
            .collect(),
        Format::Text => reports.iter().map(|r| r.to_text()).collect(),
    }
}

pub fn emit_spectrum(report: &SpectrumReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(report).expect("reports serialise") + "\n",
        Format::Text => report.to_text(),
    }
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("cannot write stdout: {e}"))),
    }
}

/// Entry point with injectable streams. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_INVALID,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let result = match &cli.command {
        Command::Verify(args) => resolve(args).and_then(|cfg| {
            let reports = run_verify(&cfg)?;
            write_output(cfg.out.as_deref(), &emit_verify(&reports, cfg.format), stdout)?;
            Ok(if reports.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
        }),
        Command::Spectrum(args) => resolve(args).and_then(|cfg| {
            let rep = run_spectrum(&cfg)?;
            write_output(cfg.out.as_deref(), &emit_spectrum(&rep, cfg.format), stdout)?;
            Ok(EXIT_PASS)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
