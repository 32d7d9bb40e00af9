//! Command implementations behind the `fqgroups` binary.
//!
//! Every command returns an [`Outcome`] holding its exit code and output
//! instead of printing, so the commands can be driven from tests.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | proven impossible, or a certificate failed verification |
//! | 2 | nothing found within the caps (inconclusive) |
//! | 3 | malformed input |

mod cache;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Value};

pub use cache::{write_atomically, CacheError, CorpusCache};

use fqgroups::math::group::{enumerate_abelian_groups, FiniteAbelianGroup};
use fqgroups::realize::{
    coprime_batches, realize, realize_f4, realize_f7_cyclic, realize_general, verify_certificate, CertificateJson,
    F7Outcome, RealizationCertificate, RealizeError, RealizeOptions,
};
use fqgroups::weil::{
    format_corpus, predicates, search_with_source, validate, ClassSource, NoCache, Requirements, SearchLimit,
    WeilError, WeilPolynomial,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IMPOSSIBLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_MALFORMED: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn json(code: i32, v: &Value) -> Self {
        let mut stdout = serde_json::to_string_pretty(v).expect("JSON value serializes");
        stdout.push('\n');
        Outcome { code, stdout, stderr: String::new() }
    }

    fn malformed(msg: impl std::fmt::Display) -> Self {
        Outcome { code: EXIT_MALFORMED, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }

    fn with_stderr(mut self, msg: impl std::fmt::Display) -> Self {
        self.stderr.push_str(&format!("{msg}\n"));
        self
    }
}

#[derive(Parser, Debug)]
#[command(name = "fqgroups", version, about = "Groups of rational points of abelian varieties over finite fields")]
pub struct Cli {
    /// Directory holding cached enumerations.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for enumeration.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a Weil polynomial and report its invariants.
    Validate(ValidateArgs),
    /// Find isogeny classes with a given number of points.
    Search(SearchArgs),
    /// Build a certificate for an abelian variety with a given group.
    Realize(RealizeArgs),
    /// Build pairwise coprime batches of certificates over F_2.
    Batches(BatchesArgs),
    /// Recheck a certificate.
    Verify(VerifyArgs),
    /// Enumerate all Weil polynomials of one dimension, filling the cache.
    Enumerate(EnumerateArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ValidateArgs {
    #[arg(long)]
    pub q: Option<u64>,
    /// Coefficients, leading first.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "label")]
    pub coeffs: Option<String>,
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub points: String,
    #[arg(long)]
    pub max_dim: usize,
    #[arg(long)]
    pub ordinary: bool,
    #[arg(long)]
    pub square_free: bool,
    #[arg(long)]
    pub irreducible: bool,
    /// Prime field and no real roots.
    #[arg(long)]
    pub cs: bool,
    #[arg(long, conflicts_with = "first")]
    pub all: bool,
    #[arg(long)]
    pub first: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct RealizeArgs {
    #[arg(long)]
    pub q: u64,
    /// Cyclic factor orders, e.g. `2,4`; `1` for the trivial group.
    #[arg(long)]
    pub group: String,
    /// Dimension cap for each search.
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BatchesArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub max_dim: usize,
    /// Directory for one certificate file per batch and group.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long)]
    pub cert: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub g: usize,
}

/// Shared command state.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub cache: Option<CorpusCache>,
}

impl Context {
    fn source(&self) -> &dyn ClassSource {
        match &self.cache {
            Some(c) => c,
            None => &NoCache,
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> Outcome {
    let ctx = match &cli.cache_dir {
        Some(dir) => match CorpusCache::new(dir) {
            Ok(cache) => Context { cache: Some(cache) },
            Err(e) => return Outcome::malformed(format!("cache directory {}: {e}", dir.display())),
        },
        None => Context::default(),
    };
    let dispatch = || match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Search(a) => cmd_search(&ctx, a),
        Command::Realize(a) => cmd_realize(a),
        Command::Batches(a) => cmd_batches(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Enumerate(a) => cmd_enumerate(&ctx, a),
    };
    match cli.jobs {
        Some(0) => Outcome::malformed("--jobs must be positive"),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(dispatch),
            Err(e) => Outcome::malformed(e),
        },
        None => dispatch(),
    }
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn parse_list(text: &str) -> Result<Vec<BigInt>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<BigInt>().map_err(|_| format!("not an integer: {t:?}")))
        .collect()
}

fn class_summary(w: &WeilPolynomial) -> Value {
    json!({
        "coeffs": strings(&w.coefficients()),
        "g": w.dimension(),
        "label": w.label(),
        "p_rank": w.p_rank(),
        "points": w.point_count().to_string(),
    })
}

pub fn cmd_validate(args: &ValidateArgs) -> Outcome {
    let parsed = match (&args.coeffs, &args.label) {
        (Some(c), None) => {
            let Some(q) = args.q else { return Outcome::malformed("--coeffs needs --q") };
            match parse_list(c) {
                Ok(coeffs) => validate(&coeffs, q),
                Err(e) => return Outcome::malformed(e),
            }
        }
        (None, Some(label)) => WeilPolynomial::from_label(label).and_then(|w| match args.q {
            Some(q) if q != w.q() => Err(WeilError::MalformedLabel(format!("{label} is not over F_{q}"))),
            _ => Ok(w),
        }),
        _ => return Outcome::malformed("give exactly one of --coeffs and --label"),
    };
    let w = match parsed {
        Ok(w) => w,
        Err(e) => {
            let report = json!({ "valid": false, "error": e.to_string() });
            return Outcome::json(EXIT_MALFORMED, &report).with_stderr(format!("error: {e}"));
        }
    };
    let p = predicates(&w);
    let mut report = class_summary(&w);
    report["valid"] = json!(true);
    report["q"] = json!(w.q().to_string());
    report["predicates"] = json!({
        "almost_ordinary": p.almost_ordinary,
        "cs": p.cs,
        "has_real_root": p.has_real_root,
        "irreducible": p.irreducible,
        "ordinary": p.ordinary,
        "square_free": p.square_free,
    });
    Outcome::json(EXIT_OK, &report)
}

pub fn cmd_search(ctx: &Context, args: &SearchArgs) -> Outcome {
    let m: BigInt = match args.points.parse() {
        Ok(m) if m >= BigInt::from(1) => m,
        _ => return Outcome::malformed(format!("--points must be a positive integer, got {:?}", args.points)),
    };
    let required = Requirements {
        square_free: args.square_free,
        ordinary: args.ordinary,
        cs: args.cs,
        irreducible: args.irreducible,
    };
    let limit = match args.first {
        Some(0) => return Outcome::malformed("--first must be positive"),
        Some(k) => SearchLimit::First(k),
        None => SearchLimit::All,
    };
    let base = json!({
        "max_dim": args.max_dim,
        "points": m.to_string(),
        "q": args.q.to_string(),
    });
    match search_with_source(ctx.source(), args.q, &m, args.max_dim, required, limit) {
        Ok(outcome) => {
            let mut report = base;
            report["exhaustive"] = json!(outcome.exhaustive);
            report["hits"] = outcome.hits.iter().map(class_summary).collect();
            Outcome::json(EXIT_OK, &report)
        }
        Err(WeilError::NotFoundWithinCap { .. }) => {
            let mut report = base;
            report["exhaustive"] = json!(true);
            report["hits"] = json!([]);
            Outcome::json(EXIT_INCONCLUSIVE, &report)
                .with_stderr(format!("no class with {m} points up to dimension {}", args.max_dim))
        }
        Err(e) => Outcome::malformed(e),
    }
}

fn parse_group(text: &str) -> Result<FiniteAbelianGroup, String> {
    let orders = parse_list(text)?;
    if orders.iter().any(|d| d < &BigInt::from(1)) {
        return Err("group orders must be positive".to_string());
    }
    FiniteAbelianGroup::from_cyclic_orders(&orders).map_err(|e| e.to_string())
}

/// Emits `cert` to `out` if given, otherwise to stdout.
fn emit_certificate(cert: &RealizationCertificate, out: Option<&PathBuf>) -> Outcome {
    let text = cert.to_json().to_pretty_string();
    match out {
        Some(path) => match write_atomically(path, text.as_bytes()) {
            Ok(()) => Outcome { code: EXIT_OK, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome::malformed(format!("{}: {e}", path.display())),
        },
        None => Outcome { code: EXIT_OK, stdout: text, stderr: String::new() },
    }
}

fn realize_failure(e: RealizeError) -> Outcome {
    match e {
        RealizeError::ObstructionExists(r) => {
            let report = json!({
                "status": "obstructed",
                "q": r.q.to_string(),
                "group": strings(r.group.invariant_factors()),
                "exponent": r.exponent.to_string(),
                "reason": r.reason.to_string(),
                "bound": r.bound.to_string(),
            });
            Outcome::json(EXIT_IMPOSSIBLE, &report).with_stderr(r)
        }
        RealizeError::NotFound { .. } | RealizeError::InsufficientSupply { .. } => {
            let report = json!({ "status": "inconclusive", "error": e.to_string() });
            Outcome::json(EXIT_INCONCLUSIVE, &report).with_stderr(e)
        }
        RealizeError::Weil(WeilError::NotPrimePower(_)) => Outcome::malformed(e),
        e => {
            let report = json!({ "status": "inconclusive", "error": e.to_string() });
            Outcome::json(EXIT_INCONCLUSIVE, &report).with_stderr(e)
        }
    }
}

pub fn cmd_realize(args: &RealizeArgs) -> Outcome {
    let g = match parse_group(&args.group) {
        Ok(g) => g,
        Err(e) => return Outcome::malformed(e),
    };
    let options = RealizeOptions { g_cap: args.max_dim };
    let result = match args.q {
        2 | 3 | 5 => realize(&g, args.q, &options),
        4 => realize_f4(&g, &options),
        7 if g.is_cyclic() => {
            let n = match u64::try_from(g.order()) {
                Ok(n) => n,
                Err(_) => return Outcome::malformed("group order too large"),
            };
            match realize_f7_cyclic(n, &options) {
                Ok(F7Outcome::Realized(c)) => Ok(c),
                Ok(F7Outcome::Exceptional { n, alternative: Some(c) }) => {
                    return emit_certificate(&c, args.out.as_ref()).with_stderr(format!(
                        "note: no ordinary square-free class over F_7 has {n} points; using a non-ordinary one"
                    ))
                }
                Ok(F7Outcome::Exceptional { n, alternative: None }) => {
                    let report = json!({
                        "status": "inconclusive",
                        "error": format!("no ordinary square-free class over F_7 has {n} points"),
                    });
                    return Outcome::json(EXIT_INCONCLUSIVE, &report);
                }
                Err(e) => Err(e),
            }
        }
        q => realize_general(&g, q, &options),
    };
    match result {
        Ok(c) => emit_certificate(&c, args.out.as_ref()),
        Err(e) => realize_failure(e),
    }
}

fn group_file_stem(g: &FiniteAbelianGroup) -> String {
    if g.is_trivial() {
        "1".to_string()
    } else {
        strings(g.invariant_factors()).join("x")
    }
}

pub fn cmd_batches(args: &BatchesArgs) -> Outcome {
    if args.n == 0 || args.count == 0 {
        return Outcome::malformed("--n and --count must be positive");
    }
    let batches = match coprime_batches(args.n, args.count, args.max_dim) {
        Ok(b) => b,
        Err(e) => return realize_failure(e),
    };
    if let Some(dir) = &args.out {
        if let Err(e) = fs::create_dir_all(dir) {
            return Outcome::malformed(format!("{}: {e}", dir.display()));
        }
    }
    let polys: Vec<_> = batches.iter().map(|b| b.polynomial().map(|w| w.poly().to_rational())).collect();
    let mut coprime = true;
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if let (Some(a), Some(b)) = (&polys[i], &polys[j]) {
                coprime &= a.gcd(b).degree() == Some(0);
            }
        }
    }
    let mut report_batches = Vec::new();
    for (j, batch) in batches.iter().enumerate() {
        let mut certs = Vec::new();
        for cert in &batch.certificates {
            let json = cert.to_json();
            match &args.out {
                Some(dir) => {
                    let path = dir.join(format!("batch{j}_{}.json", group_file_stem(cert.target())));
                    if let Err(e) = write_atomically(&path, json.to_pretty_string().as_bytes()) {
                        return Outcome::malformed(format!("{}: {e}", path.display()));
                    }
                    certs.push(json!(path.display().to_string()));
                }
                None => certs.push(serde_json::to_value(&json).expect("certificate serializes")),
            }
        }
        report_batches.push(json!({
            "certificates": certs,
            "factors": batch.factors.iter().map(class_summary).collect::<Vec<_>>(),
            "polynomial": batch.polynomial().map(|w| strings(&w.coefficients())),
        }));
    }
    let groups: Vec<Vec<String>> =
        enumerate_abelian_groups(args.n).iter().map(|g| strings(g.invariant_factors())).collect();
    let report = json!({
        "batches": report_batches,
        "groups": groups,
        "n": args.n.to_string(),
        "pairwise_coprime": coprime,
    });
    Outcome::json(EXIT_OK, &report)
}

pub fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let text = match fs::read_to_string(&args.cert) {
        Ok(t) => t,
        Err(e) => return Outcome::malformed(format!("{}: {e}", args.cert.display())),
    };
    let cert = match CertificateJson::parse(&text) {
        Ok(c) => c,
        Err(e) => return Outcome::malformed(format!("{}: {e}", args.cert.display())),
    };
    let report = verify_certificate(&cert);
    if report.passed() {
        return Outcome::json(EXIT_OK, &json!({ "verified": true }));
    }
    let diff = serde_json::to_string_pretty(&report.mismatches).expect("mismatches serialize");
    let mut out = Outcome::json(EXIT_IMPOSSIBLE, &json!({ "verified": false }));
    out.stderr = format!("{diff}\n");
    out
}

pub fn cmd_enumerate(ctx: &Context, args: &EnumerateArgs) -> Outcome {
    let result = match &ctx.cache {
        Some(cache) => cache.load_or_enumerate(args.q, args.g).map_err(|e| e.to_string()),
        None => fqgroups::weil::enumerate(args.q, args.g).map_err(|e| e.to_string()),
    };
    match result {
        Ok(all) => Outcome { code: EXIT_OK, stdout: format_corpus(args.q, args.g, &all), stderr: String::new() },
        Err(e) => Outcome::malformed(e),
    }
}
