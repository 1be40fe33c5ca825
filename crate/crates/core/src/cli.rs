//! The `gsp4` command-line tool.
//!
//! Exit codes: 0 on success, 1 on domain errors (one-line diagnostic on
//! stderr), 2 on usage errors.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::eigenform::{
    check_distinct_sources, lambda_stream_on, load_newform, EigenformSpec, LambdaStream, NewformFormat, NewformGL2,
    SpecFile,
};
use crate::hecke::{
    decompose_tp, eigenvalue_from_decomposition, eigenvalue_scale, family_contributions, lambda_normalized,
    normalized_sum, verify_disjoint, verify_double_coset, HeckeDecomposition, MAX_DECOMPOSITION_PRIME,
};
use crate::matrix::{parse_rational, Mat4, Rational};
use crate::satake::{dirichlet_coeffs, spin_roots, ExactRational, SatakeParams, SpinFactor};
use crate::sums::{self, is_prime, product_moment_check, per_prime_rows, sieve, sign_change_report, PrimeSumReport};
use crate::symplectic::{
    factorize, is_local_member, is_member, SimilitudeMatrix, SubgroupSpec, ValuationPattern,
};

/// Entries of a representative read from JSON must stay below this so integer
/// products cannot overflow.
const MAX_REP_ENTRY: i64 = 100_000;

/// Largest cutoff accepted for prime sums; the sieve keeps every prime below it.
const MAX_CUTOFF: f64 = 1e9;

#[derive(Parser, Debug)]
#[command(name = "gsp4", version, about = "Hecke operators and eigenvalue sign changes for genus-2 Siegel forms")]
struct Cli {
    /// Global seed mixed into every synthetic source.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Omit timestamps so identical inputs give byte-identical output.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Right-coset representatives of T(p).
    Decompose {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a decomposition file: count, disjointness, double-coset membership.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// μ_F(p) from the coset sum and from the closed form.
    Eigenvalue {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        weight: i32,
        #[command(flatten)]
        satake: SatakeArgs,
    },
    /// Dirichlet coefficients a(p^r) of a local spin factor.
    Lfactor {
        #[arg(long)]
        prime: u64,
        /// A root `re[,im]` (or `a/b` with --exact); repeat up to four times.
        #[arg(long = "root", allow_hyphen_values = true)]
        roots: Vec<String>,
        #[command(flatten)]
        satake: OptionalSatake,
        #[arg(long, default_value_t = 12)]
        rmax: usize,
        #[arg(long)]
        exact: bool,
    },
    /// q-expansion of Δ.
    Delta {
        #[arg(long)]
        nterms: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Newform file tooling.
    Newform {
        #[command(subcommand)]
        command: NewformCommand,
    },
    /// Per-prime λ(p) of an eigenform spec as CSV.
    Stream {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_cutoff)]
        pmax: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prime sums and the sign-change report for a pair of specs.
    Sums(SumsArgs),
    /// Run an experiment config.
    Density {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Membership of a matrix in a congruence subgroup.
    Member {
        /// File with four rows of four rationals.
        #[arg(long)]
        matrix: PathBuf,
        /// `kind:N`, e.g. `paramodular:4`.
        #[arg(long)]
        group: String,
    },
}

#[derive(Subcommand, Debug)]
enum NewformCommand {
    /// Parse a newform file and run the Deligne check.
    Check {
        file: PathBuf,
        #[arg(long)]
        format: Option<NewformFormat>,
    },
}

#[derive(Args, Debug)]
struct SatakeArgs {
    #[arg(long, allow_hyphen_values = true)]
    a0: String,
    #[arg(long, allow_hyphen_values = true)]
    a1: String,
    #[arg(long, allow_hyphen_values = true)]
    a2: String,
    /// Read the parameters as exact rationals `a/b`.
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct OptionalSatake {
    #[arg(long, allow_hyphen_values = true, requires_all = ["a1", "a2"], conflicts_with = "roots")]
    a0: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "a0")]
    a1: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "a0")]
    a2: Option<String>,
}

#[derive(Args, Debug)]
struct SumsArgs {
    /// `specF.json,specG.json`; constant λ ≡ 1 streams when omitted.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long, value_parser = parse_cutoff)]
    x: u64,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Second-moment constant of F (defaults to its class).
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-prime CSV `p,lambda_f,lambda_g,sign`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Cutoffs accept integer or float syntax (`1000000`, `1e6`).
fn parse_cutoff(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v.is_finite() && v >= 2.0 && v.fract() == 0.0 && v <= MAX_CUTOFF) {
        return Err(format!("`{s}` must be an integer in [2, {MAX_CUTOFF:e}]"));
    }
    Ok(v as u64)
}

/// JSON mirror of an experiment. Paths are relative to the config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec_f: PathBuf,
    pub spec_g: PathBuf,
    pub x: f64,
    pub c: f64,
    pub m: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.c > 0.0 && self.c < 4.0, "c = {} must lie in (0, 4)", self.c);
        ensure!(
            self.x >= 100.0 && self.x.fract() == 0.0 && self.x <= MAX_CUTOFF,
            "x = {} must be an integer in [100, {MAX_CUTOFF:e}]",
            self.x
        );
        ensure!(matches!(self.m, 1 | 2), "m = {} must be 1 or 2", self.m);
        ensure!(self.epsilon >= 0.0, "epsilon must be non-negative");
        Ok(())
    }

    pub fn cutoff(&self) -> u64 {
        self.x as u64
    }
}

/// Runs the tool on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Decompose { prime, out } => {
            let dec = decompose_tp(*prime)?;
            emit(out.as_deref(), &to_json(&dec)?)
        }
        Command::Verify { input } => verify(input),
        Command::Eigenvalue { prime, weight, satake } => eigenvalue(*prime, *weight, satake),
        Command::Lfactor { prime, roots, satake, rmax, exact } => lfactor(*prime, roots, satake, *rmax, *exact),
        Command::Delta { nterms, out } => emit(out.as_deref(), &NewformGL2::delta(*nterms)?.to_qexp_text()),
        Command::Newform { command: NewformCommand::Check { file, format } } => newform_check(file, *format),
        Command::Stream { spec, pmax, out } => stream(spec, *pmax, cli.seed, out.as_deref()),
        Command::Sums(args) => run_sums(args, cli),
        Command::Density { config, out } => density(config, out.as_deref(), cli),
        Command::Member { matrix, group } => member(matrix, group),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(input: &Path) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("{}", input.display()))?;
    let dec: HeckeDecomposition = serde_json::from_str(&text).with_context(|| format!("{}", input.display()))?;
    let p = dec.prime;
    ensure!(is_prime(p), "prime = {p} is not prime");
    ensure!(p <= MAX_DECOMPOSITION_PRIME, "prime = {p} exceeds {MAX_DECOMPOSITION_PRIME}");
    ensure!(
        dec.reps.iter().all(|r| r.matrix.entries().all(|(_, v)| v.abs() <= MAX_REP_ENTRY)),
        "matrix entries exceed {MAX_REP_ENTRY} in absolute value"
    );
    let expected = HeckeDecomposition::expected_len(p);
    let count_ok = dec.reps.len() as u64 == expected;
    let well_formed = dec.is_well_formed();
    let disjoint = verify_disjoint(&dec);
    let double_coset = verify_double_coset(&dec);
    let summary = json!({
        "prime": p,
        "count": dec.reps.len(),
        "expected": expected,
        "familyCounts": dec.family_counts(),
        "wellFormed": well_formed,
        "disjoint": disjoint,
        "doubleCoset": double_coset,
    });
    print!("{}", to_json(&summary)?);
    ensure!(count_ok && disjoint && double_coset, "verification failed for T({p})");
    Ok(())
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || anyhow!("`{s}` is not a complex number `re[,im]`");
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    ensure!(re.is_finite() && im.is_finite(), bad());
    Ok(Complex64::new(re, im))
}

fn parse_exact(s: &str) -> Result<Rational> {
    parse_rational(s.trim()).ok_or_else(|| anyhow!("`{s}` is not a rational `a/b`"))
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn checked_prime(p: u64) -> Result<()> {
    ensure!(is_prime(p), "p = {p} is not prime");
    Ok(())
}

fn eigenvalue(p: u64, k: i32, args: &SatakeArgs) -> Result<()> {
    let dec = decompose_tp(p)?;
    let out = if args.exact {
        let a = [parse_exact(&args.a0)?, parse_exact(&args.a1)?, parse_exact(&args.a2)?];
        ensure!(!a[0].is_zero(), "a0 must be non-zero");
        let one = Rational::one();
        let via = normalized_sum(&dec, [&a[0], &a[1], &a[2]]);
        let closed = a[0].clone() * (one.clone() + &a[1]) * (one + &a[2]);
        let families = family_contributions(&dec, [&a[0], &a[1], &a[2]]).map(ExactRational);
        json!({
            "prime": p,
            "weight": k,
            "scale": eigenvalue_scale(p, k),
            "normalizedViaCosets": ExactRational(via.clone()),
            "normalizedClosedForm": ExactRational(closed.clone()),
            "families": families,
            "equal": via == closed,
        })
    } else {
        let s = SatakeParams::new(parse_complex(&args.a0)?, parse_complex(&args.a1)?, parse_complex(&args.a2)?);
        let via = eigenvalue_from_decomposition(&dec, &s, k);
        let closed = s.a0 * (Complex64::one() + s.a1) * (Complex64::one() + s.a2) * eigenvalue_scale(p, k);
        let families = family_contributions(&dec, [&s.a0, &s.a1, &s.a2]).map(pair);
        // relative to the scale when the closed form vanishes
        let rel = (via - closed).norm() / closed.norm().max(eigenvalue_scale(p, k));
        json!({
            "prime": p,
            "weight": k,
            "scale": eigenvalue_scale(p, k),
            "viaCosets": pair(via),
            "closedForm": pair(closed),
            "relativeError": rel,
            "families": families,
            "lambda": pair(lambda_normalized(&s)),
        })
    };
    print!("{}", to_json(&out)?);
    Ok(())
}

fn lfactor(p: u64, roots: &[String], satake: &OptionalSatake, rmax: usize, exact: bool) -> Result<()> {
    checked_prime(p)?;
    ensure!(rmax <= 200, "rmax must be at most 200");
    let triple = match (&satake.a0, &satake.a1, &satake.a2) {
        (Some(a0), Some(a1), Some(a2)) => Some([a0, a1, a2]),
        _ => None,
    };
    ensure!(roots.len() <= 4, "at most four roots");
    ensure!(triple.is_some() || !roots.is_empty(), "give --root values or --a0/--a1/--a2");
    let out = if exact {
        let roots: Vec<Rational> = match triple {
            Some(t) => {
                let [a0, a1, a2] = [parse_exact(t[0])?, parse_exact(t[1])?, parse_exact(t[2])?];
                vec![a0.clone(), a0.clone() * &a1, a0.clone() * &a2, a0 * a1 * a2]
            }
            None => roots.iter().map(|r| parse_exact(r)).collect::<Result<_>>()?,
        };
        let f = SpinFactor::new(p, roots);
        let coeffs: Vec<ExactRational> = dirichlet_coeffs(&f, rmax).into_iter().map(ExactRational).collect();
        json!({
            "prime": p,
            "roots": f.roots.into_iter().map(ExactRational).collect::<Vec<_>>(),
            "coefficients": coeffs,
        })
    } else {
        let f = match triple {
            Some(t) => spin_roots(p, &SatakeParams::new(parse_complex(t[0])?, parse_complex(t[1])?, parse_complex(t[2])?)),
            None => SpinFactor::new(p, roots.iter().map(|r| parse_complex(r)).collect::<Result<_>>()?),
        };
        json!({
            "prime": p,
            "roots": f.roots.iter().copied().map(pair).collect::<Vec<_>>(),
            "coefficients": dirichlet_coeffs(&f, rmax).into_iter().map(pair).collect::<Vec<_>>(),
        })
    };
    print!("{}", to_json(&out)?);
    Ok(())
}

fn newform_check(file: &Path, format: Option<NewformFormat>) -> Result<()> {
    let format = format.unwrap_or_else(|| NewformFormat::from_path(file));
    let f = load_newform(file, format)?;
    for w in &f.warnings {
        eprintln!("warning: p = {}: |a(p)| p^(-(k-1)/2) = {:.6} exceeds 2", w.p, w.normalized.abs());
    }
    let summary = json!({
        "label": f.label,
        "level": f.level,
        "weight": f.weight,
        "primes": f.coeffs.len(),
        "maxPrime": f.max_prime(),
        "ramanujan": f.is_ramanujan(),
        "violations": f.warnings,
    });
    print!("{}", to_json(&summary)?);
    Ok(())
}

fn load_spec(path: &Path, seed: Option<u64>) -> Result<EigenformSpec> {
    let file = SpecFile::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.resolve(base, seed).with_context(|| format!("{}", path.display()))
}

fn stream(spec: &Path, pmax: u64, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let spec = load_spec(spec, seed)?;
    let table = sieve(pmax);
    let s = lambda_stream_on(&spec, &table, pmax)?;
    let mut text = String::from("p,lambda\n");
    for (p, l) in &s.values {
        let _ = writeln!(text, "{p},{l}");
    }
    emit(out, &text)
}

fn timestamp(deterministic: bool) -> Option<String> {
    (!deterministic).then(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("unix:{secs}")
    })
}

fn write_csv(path: &Path, rows: &[(u64, f64, f64)]) -> Result<()> {
    let mut text = String::from("p,lambda_f,lambda_g,sign\n");
    for &(p, f, g) in rows {
        let q = f * g;
        let sign = if q > 0.0 { 1 } else if q < 0.0 { -1 } else { 0 };
        let _ = writeln!(text, "{p},{f},{g},{sign}");
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

struct Experiment {
    f: LambdaStream,
    g: LambdaStream,
    table: sums::PrimeTable,
    excluded: BTreeSet<u64>,
}

fn prepare(spec_f: &EigenformSpec, spec_g: &EigenformSpec, x: u64) -> Result<Experiment> {
    let table = sieve(x);
    let excluded: BTreeSet<u64> = spec_f.ramified().union(spec_g.ramified()).copied().collect();
    let f = lambda_stream_on(spec_f, &table, x)?;
    let g = lambda_stream_on(spec_g, &table, x)?;
    Ok(Experiment { f, g, table, excluded })
}

fn run_sums(args: &SumsArgs, cli: &Cli) -> Result<()> {
    let x = args.x;
    let (exp, default_m) = match &args.pair {
        Some(pair) => {
            let (a, b) = pair.split_once(',').ok_or_else(|| anyhow!("--pair expects `specF.json,specG.json`"))?;
            let spec_f = load_spec(Path::new(a.trim()), cli.seed)?;
            let spec_g = load_spec(Path::new(b.trim()), cli.seed)?;
            let m = spec_f.class().m();
            (prepare(&spec_f, &spec_g, x)?, m)
        }
        None => {
            let table = sieve(x);
            let one = LambdaStream::constant(1.0, &table, x);
            (Experiment { f: one.clone(), g: one, table, excluded: BTreeSet::new() }, 1)
        }
    };
    let m = args.m.unwrap_or(default_m);
    ensure!(matches!(m, 1 | 2), "m = {m} must be 1 or 2");
    let mut report = sign_change_report(&exp.f, &exp.g, &exp.table, x, args.c, m, &exp.excluded)?;
    report.generated_at = timestamp(cli.deterministic);
    if let Some(csv) = &args.csv {
        write_csv(csv, &per_prime_rows(&exp.f, &exp.g, &exp.table, x, &exp.excluded)?)?;
    }
    emit(args.out.as_deref(), &to_json(&report)?)
}

/// Output of `density`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityOutput {
    pub spec_f: String,
    pub spec_g: String,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub report: PrimeSumReport,
    pub product_moment: sums::ProductMomentOutcome,
}

fn density(config: &Path, out: Option<&Path>, cli: &Cli) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let seed = cli.seed.or(cfg.seed);
    let spec_f = load_spec(&base.join(&cfg.spec_f), seed)?;
    let spec_g = load_spec(&base.join(&cfg.spec_g), seed)?;
    check_distinct_sources(&spec_f, &spec_g)?;
    let x = cfg.cutoff();
    let exp = prepare(&spec_f, &spec_g, x)?;
    let mut report = sign_change_report(&exp.f, &exp.g, &exp.table, x, cfg.c, cfg.m, &exp.excluded)?;
    report.generated_at = timestamp(cli.deterministic);
    let product_moment = product_moment_check(&exp.f, &exp.g, &exp.table, x, cfg.c, cfg.m, cfg.epsilon, &exp.excluded)?;
    if let Some(csv) = &cfg.csv {
        write_csv(&base.join(csv), &per_prime_rows(&exp.f, &exp.g, &exp.table, x, &exp.excluded)?)?;
    }
    let output = DensityOutput {
        spec_f: spec_f.label.clone(),
        spec_g: spec_g.label.clone(),
        seed,
        epsilon: cfg.epsilon,
        report,
        product_moment,
    };
    let target = out.map(Path::to_path_buf).or_else(|| cfg.out.as_ref().map(|o| base.join(o)));
    emit(target.as_deref(), &to_json(&output)?)
}

fn member(matrix: &Path, group: &str) -> Result<()> {
    let text = fs::read_to_string(matrix).with_context(|| format!("{}", matrix.display()))?;
    let m: Mat4<Rational> = text.parse().with_context(|| format!("{}", matrix.display()))?;
    let g = SimilitudeMatrix::new(m)?;
    let spec: SubgroupSpec = group.parse()?;
    let local = factorize(spec.level())
        .into_iter()
        .map(|(p, _)| {
            let pat = ValuationPattern::for_level(spec.kind, spec.level(), p)?;
            Ok(json!({ "prime": p, "exponent": pat.exponent(), "member": is_local_member(&g, &pat) }))
        })
        .collect::<Result<Vec<_>>>()?;
    let out = json!({
        "group": spec.to_string(),
        "mu": ExactRational(g.mu().clone()),
        "member": is_member(&g, &spec),
        "local": local,
    });
    print!("{}", to_json(&out)?);
    Ok(())
}
