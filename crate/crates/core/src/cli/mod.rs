//! Command-line front end. The binary is a thin wrapper around [`main_with`].

pub mod certificate;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::warn;
use rayon::prelude::*;

use crate::apps::{butterfly, daubechies};
use crate::candidates::bracket;
use crate::linalg::Vector;
use crate::pipeline::{compute, ComputeOptions, FlatnessOptions};
use crate::polytope::RunStatus;
use crate::reduction;
use crate::words::{product_name, ProductWord};

pub use certificate::{verify_certificate, CertificateFile, VerifyReport};
pub use format::{format_family, parse_family, FamilyFile};

pub const EXIT_TERMINATED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "jsr", version, about = "Joint spectral radius by invariant polytopes")]
pub struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute and certify the JSR of a family file.
    Compute {
        file: PathBuf,
        /// Write the certificate here (JSON).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Recheck a certificate with fresh membership programs.
    Verify {
        certificate: PathBuf,
        /// Family file the certificate must have been computed from.
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Lower and upper JSR bounds from short products.
    Bounds {
        file: PathBuf,
        /// Longest necklace for the lower bound.
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Longest product for the upper bound.
        #[arg(long, default_value_t = 6)]
        l: usize,
    },
    /// Hölder exponent of the Daubechies wavelet of order N.
    Daubechies {
        n: Option<usize>,
        /// Sweep N = 2..=NMAX and print a tab-separated table.
        #[arg(long, value_name = "NMAX")]
        table: Option<usize>,
        /// Sweep the whole range up to 20.
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        flags: Flags,
    },
    /// Regularity of the Butterfly scheme at omega = 1/16.
    Butterfly {
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Longest candidate word examined.
    #[arg(long)]
    pub nbar: Option<usize>,
    /// First balancing depth.
    #[arg(long)]
    pub kbalance: Option<usize>,
    /// Iteration limit of the polytope construction.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Interior margin of the membership test.
    #[arg(long)]
    pub delta_int: Option<f64>,
    /// Add extra vertices along axes flatter than this.
    #[arg(long)]
    pub epsilon_flat: Option<f64>,
    /// Extra vertices `AXIS:VALUE` (one-based axis), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub extras: Vec<String>,
    /// Run on the transposed family.
    #[arg(long)]
    pub adjoint: bool,
    /// Screen each level in parallel.
    #[arg(long)]
    pub parallel: bool,
    /// Seed of the irreducibility trials.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed balancing factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Candidate words, one-based letters, words separated by `;`.
    #[arg(long)]
    pub words: Option<String>,
    /// Keep the raw balancing factors.
    #[arg(long)]
    pub no_snap: bool,
}

pub fn parse_extras(specs: &[String], dim: usize) -> anyhow::Result<Vec<Vector>> {
    let mut pairs = Vec::new();
    for s in specs {
        let (axis, value) = s
            .split_once(':')
            .with_context(|| format!("extra vertex `{s}` is not AXIS:VALUE"))?;
        let axis: usize = axis.trim().parse().with_context(|| format!("bad axis in `{s}`"))?;
        let value = format::parse_number(value.trim()).with_context(|| format!("bad value in `{s}`"))?;
        if axis == 0 || axis > dim {
            bail!("axis {axis} outside 1..={dim}");
        }
        pairs.push((axis, value));
    }
    Ok(daubechies::extras_as_vectors(dim, &pairs))
}

pub fn parse_words(s: &str) -> anyhow::Result<Vec<ProductWord>> {
    let mut out = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let letters = part
            .split_whitespace()
            .map(|t| t.parse::<usize>().with_context(|| format!("bad letter `{t}`")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        out.push(ProductWord::from_one_based(&letters)?);
    }
    if out.is_empty() {
        bail!("no candidate words given");
    }
    Ok(out)
}

impl Flags {
    /// Options for a family of dimension `dim`.
    pub fn options(&self, dim: usize) -> anyhow::Result<ComputeOptions> {
        let mut o = ComputeOptions::default();
        if let Some(n) = self.nbar {
            o.candidates.n_bar = n;
        }
        if let Some(k) = self.kbalance {
            o.k_balance = k;
            o.k_balance_max = o.k_balance_max.max(k);
        }
        if let Some(k) = self.kmax {
            o.polytope.k_max = k;
        }
        if let Some(d) = self.delta_int {
            if !(d > 0.0 && d < 1.0) {
                bail!("--delta-int must lie in (0, 1)");
            }
            o.polytope.delta_int = d;
        }
        if let Some(e) = self.epsilon_flat {
            o.flatness = Some(FlatnessOptions {
                epsilon: e,
                ..FlatnessOptions::default()
            });
        }
        o.extras = parse_extras(&self.extras, dim)?;
        o.adjoint = self.adjoint;
        o.polytope.parallel = self.parallel;
        if !self.alpha.is_empty() {
            o.alpha = Some(self.alpha.clone());
        }
        if let Some(w) = &self.words {
            o.words = Some(parse_words(w)?);
        }
        o.snap = !self.no_snap;
        Ok(o)
    }
}

fn exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Terminated => EXIT_TERMINATED,
        RunStatus::MaxIterations => EXIT_MAX_ITERATIONS,
    }
}

/// Shortest decimal within `1e-9` relative, so `0.9999999999998` prints as `1`.
pub fn display_rounded(x: f64) -> String {
    for digits in 0..=12 {
        let s = format!("{x:.digits$}");
        let y: f64 = s.parse().unwrap_or(f64::NAN);
        if (y - x).abs() <= 1e-9 * x.abs().max(1e-300) {
            return s;
        }
    }
    format!("{x}")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| display_rounded(*x)).collect();
    format!("({})", parts.join(", "))
}

pub fn cmd_compute(
    file: &std::path::Path,
    out_path: Option<&std::path::Path>,
    flags: &Flags,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let parsed = parse_family(&text).with_context(|| format!("parsing {}", file.display()))?;
    let family = parsed.family;
    let mut opts = flags.options(family.dim())?;
    if opts.words.is_none() {
        opts.words = parsed.candidates;
    }
    let start = Instant::now();
    let mut warnings = Vec::new();
    if let Some(w) = reduction::irreducibility_check(&family, 4, flags.seed)? {
        let msg = format!(
            "family is reducible: common invariant subspace of dimension {} (split it for a smaller problem)",
            w.dim()
        );
        warn!("{msg}");
        warnings.push(msg);
    }
    let report = compute(&family, &opts)?;
    warnings.extend(report.warnings.iter().cloned());
    let cert = report.certificate;
    let labels = family.labels().to_vec();
    let status = cert.status;
    writeln!(out, "status: {:?} after {} iterations", status, cert.iterations)?;
    match status {
        RunStatus::Terminated => writeln!(out, "jsr = {:.15}", cert.jsr)?,
        RunStatus::MaxIterations => writeln!(out, "jsr >= {:.15} (not certified)", cert.jsr)?,
    }
    let smp: Vec<String> = cert.smp_words.iter().map(|w| product_name(w, &labels)).collect();
    writeln!(out, "smp: {}", smp.join(", "))?;
    if !cert.near_words.is_empty() {
        let near: Vec<String> = cert.near_words.iter().map(|w| product_name(w, &labels)).collect();
        writeln!(out, "near-maximal: {}", near.join(", "))?;
    }
    match &report.balancing {
        Some(b) => writeln!(out, "balancing: alpha = {} at depth {}", fmt_vec(&cert.alpha), b.k_used)?,
        None => writeln!(out, "balancing: alpha = {}", fmt_vec(&cert.alpha))?,
    }
    writeln!(out, "vertices: {} (each with its negative)", cert.vertex_count())?;
    if status == RunStatus::Terminated {
        writeln!(out, "invariance residual: {:.3e}", cert.max_invariance_residual)?;
    }
    for w in &warnings {
        writeln!(out, "warning: {w}")?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    if let Some(p) = out_path {
        let file = CertificateFile::new(&family, &opts, cert, warnings, elapsed);
        std::fs::write(p, file.to_json()?).with_context(|| format!("writing {}", p.display()))?;
        writeln!(out, "certificate: {}", p.display())?;
    }
    Ok(exit_code(status))
}

pub fn cmd_verify(cert_path: &std::path::Path, family: Option<&std::path::Path>, out: &mut dyn Write) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(cert_path).with_context(|| format!("reading {}", cert_path.display()))?;
    let file = CertificateFile::from_json(&text).context("reading certificate")?;
    let expected = match family {
        Some(p) => Some(parse_family(&std::fs::read_to_string(p)?)?.family),
        None => None,
    };
    let r = verify_certificate(&file, expected.as_ref())?;
    writeln!(out, "status recorded: {:?}", file.certificate.status)?;
    writeln!(out, "input hash: {}", if r.hash_ok { "ok" } else { "MISMATCH" })?;
    writeln!(out, "invariance residual: {:.3e} (limit {:.1e})", r.residual, r.residual_limit)?;
    writeln!(out, "smp spectral gap: {:.3e} (limit {:.1e})", r.spectral_gap, r.spectral_limit)?;
    writeln!(out, "{}", if r.passed() { "PASS" } else { "FAIL" })?;
    Ok(if r.passed() { EXIT_TERMINATED } else { EXIT_ERROR })
}

pub fn cmd_bounds(file: &std::path::Path, k: usize, l: usize, out: &mut dyn Write) -> anyhow::Result<i32> {
    let parsed = parse_family(&std::fs::read_to_string(file)?)?;
    let b = bracket(&parsed.family, k, l)?;
    writeln!(
        out,
        "{:.15} <= jsr <= {:.15}",
        b.lower, b.upper
    )?;
    writeln!(
        out,
        "lower from {}, upper from products of length {}",
        product_name(&b.lower_word, parsed.family.labels()),
        b.upper_length
    )?;
    Ok(EXIT_TERMINATED)
}

fn extras_label(opts: &ComputeOptions, report_extras: &[Vector]) -> String {
    if report_extras.is_empty() && opts.extras.is_empty() {
        return "none".into();
    }
    let src = if opts.extras.is_empty() { report_extras } else { &opts.extras };
    src.iter()
        .map(|v| {
            let (i, x) = v
                .iter()
                .enumerate()
                .find(|(_, x)| **x != 0.0)
                .map_or((0, 0.0), |(i, x)| (i, *x));
            format!("{}e{}", display_rounded(x), i + 1)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_daubechies(
    n: Option<usize>,
    table: Option<usize>,
    full: bool,
    flags: &Flags,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let nmax = if full { Some(20) } else { table };
    if let Some(nmax) = nmax {
        if !(2..=20).contains(&nmax) {
            bail!("table limit {nmax} outside 2..=20");
        }
        let rows: Vec<anyhow::Result<(usize, daubechies::HolderResult, ComputeOptions)>> = (2..=nmax)
            .into_par_iter()
            .map(|n| {
                let opts = flags.options(n - 1)?;
                let h = daubechies::daubechies_holder(n, &opts)?;
                Ok((n, h, opts))
            })
            .collect();
        writeln!(out, "N\tsmp\textra\titerations\tvertices\talpha\tstatus")?;
        let mut code = EXIT_TERMINATED;
        for row in rows {
            let (n, h, opts) = row?;
            let c = &h.report.certificate;
            writeln!(
                out,
                "{n}\t{}\t{}\t{}\t{}\t{:.10}\t{:?}",
                h.smp_names().join(" and "),
                extras_label(&opts, &h.report.extras),
                c.iterations,
                c.vertex_count(),
                h.alpha,
                c.status
            )?;
            code = code.max(exit_code(c.status));
        }
        return Ok(code);
    }
    let n = n.context("give an order N or --table NMAX")?;
    if !(2..=20).contains(&n) {
        bail!("order {n} outside 2..=20");
    }
    let opts = flags.options(n - 1)?;
    let h = daubechies::daubechies_holder(n, &opts)?;
    let c = &h.report.certificate;
    writeln!(out, "N = {n}")?;
    writeln!(out, "smp: {}", h.smp_names().join(", "))?;
    writeln!(out, "rho = {:.15}", c.jsr)?;
    writeln!(out, "iterations: {}, vertices: {}", c.iterations, c.vertex_count())?;
    writeln!(out, "status: {:?}", c.status)?;
    writeln!(out, "alpha = {:.15}", h.alpha)?;
    Ok(exit_code(c.status))
}

pub fn cmd_butterfly(flags: &Flags, out: &mut dyn Write) -> anyhow::Result<i32> {
    let opts = flags.options(11)?;
    let r = butterfly::butterfly_analysis(&opts)?;
    let q = &r.quotient.certificate;
    writeln!(out, "exact split: {}", if r.split.ok() { "ok" } else { "FAILED" })?;
    writeln!(out, "invariant subspace dimension: {}", r.orbit_dim)?;
    writeln!(
        out,
        "quotient: {:?}, alpha = {}, {} iterations, {} vertices",
        q.status,
        fmt_vec(&q.alpha),
        q.iterations,
        q.vertex_count()
    )?;
    for (i, b) in r.blocks.iter().enumerate() {
        let how = match &b.method {
            butterfly::BlockMethod::NormBound(nm) => format!("{nm:?} norm bound"),
            butterfly::BlockMethod::Polytope(c) => format!("polytope with {} vertices", c.vertex_count()),
        };
        writeln!(out, "block G{}: jsr = {} by {how}", i + 1, display_rounded(b.jsr))?;
    }
    writeln!(out, "rho = {}, alpha = {}", display_rounded(r.jsr), display_rounded(r.regularity))?;
    let ok = r.split.ok() && q.status == RunStatus::Terminated;
    Ok(if ok { EXIT_TERMINATED } else { exit_code(q.status).max(EXIT_ERROR) })
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Compute { file, out: path, flags } => cmd_compute(file, path.as_deref(), flags, out),
        Command::Verify { certificate, family } => cmd_verify(certificate, family.as_deref(), out),
        Command::Bounds { file, k, l } => cmd_bounds(file, *k, *l, out),
        Command::Daubechies { n, table, full, flags } => cmd_daubechies(*n, *table, *full, flags, out),
        Command::Butterfly { flags } => cmd_butterfly(flags, out),
    }
}

/// Parses arguments, runs, and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_TERMINATED };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
