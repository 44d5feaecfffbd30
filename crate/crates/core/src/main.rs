use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use szlenk_lab::orlicz::{self, OrliczParams};
use szlenk_lab::report::{self, Fault, OutputFormat, RunConfig, Suite};
use szlenk_lab::szlenk::{self, CertifyOptions, CurveBudget};
use szlenk_lab::tsirelson;
use szlenk_lab::vecspace::parse_vec_json;
use szlenk_lab::{Error, Result, Space, SparseVec};

#[derive(Parser)]
#[command(name = "szlenk-lab", version, about = "Exotic sequence-space norms and Szlenk-derivation certificates")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Root seed of every sampled check.
    #[arg(long, global = true, default_value_t = 20240521)]
    seed: u64,
    /// Overrides the sample count of sampled checks.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Largest support handled by the exhaustive oracles.
    #[arg(long = "oracle-cap", global = true, default_value_t = 9)]
    oracle_cap: usize,
    /// A file path, or `json`/`csv` to print that format to stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of a vector given as `[[index, value], …]`.
    Norm {
        #[arg(long)]
        space: String,
        /// JSON vector, or `@path` to read it from a file.
        #[arg(long)]
        vec: String,
        /// Exact rational arithmetic (Tsirelson only).
        #[arg(long)]
        exact: bool,
        /// Include the attaining partition tree.
        #[arg(long)]
        witness: bool,
        #[command(flatten)]
        orlicz: OrliczArgs,
    },
    /// Runs a verification suite and reports one record per check.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Use floating point in the Tsirelson oracle comparison.
        #[arg(long)]
        inexact: bool,
        #[arg(long = "inject-fault", hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Radius curves r(ε), R(ε) over an ε grid.
    Curves {
        #[arg(long)]
        space: String,
        /// `a:b:step`
        #[arg(long = "eps-grid", default_value = "0.1:1.9:0.1")]
        eps_grid: String,
        /// Certificate constructions per ε; 0 keeps only analytic values.
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[command(flatten)]
        orlicz: OrliczArgs,
    },
    /// Builds and validates a membership certificate for a point of s_ε B.
    Certify {
        #[arg(long)]
        space: String,
        #[arg(long, alias = "point")]
        vec: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        pairs: usize,
        #[arg(long = "max-support", default_value_t = 200)]
        max_support: usize,
        #[command(flatten)]
        orlicz: OrliczArgs,
    },
    /// The quartic-quadratic Orlicz norm and its minimization analysis.
    Orlicz {
        #[command(flatten)]
        params: OrliczArgs,
        #[arg(value_enum)]
        action: OrliczAction,
        #[arg(long)]
        vec: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Dimension of the reference vector; defaults to the first n with nα_n² > 1.
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Args, Clone, Copy)]
struct OrliczArgs {
    #[arg(long = "A", default_value_t = 1.0)]
    a: f64,
    #[arg(long = "B", default_value_t = 1.0)]
    b: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrliczAction {
    Norm,
    Kkt,
    Claim,
    Demo,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SwapV1v2,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) | Error::CheckFailed(_) | Error::Bracket(_) => 1,
        Error::Io(_) | Error::Csv(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<bool> {
    report::init_threads_from_env()?;
    let cfg = config(&cli.common)?;
    match cli.command {
        Command::Norm {
            space,
            vec,
            exact,
            witness,
            orlicz,
        } => norm(&cfg, &space, &vec, exact, witness, orlicz),
        Command::Verify {
            suite,
            inexact,
            inject_fault,
        } => {
            let suite: Suite = suite.parse()?;
            let cfg = RunConfig {
                exact_mode: !inexact,
                fault: inject_fault.map(|_| Fault::SwapV1V2),
                ..cfg
            };
            let rep = report::run_verify_suite(suite, &cfg)?;
            match cfg.output_format {
                OutputFormat::Json => write_json(&cfg, &serde_json::to_value(&rep)?)?,
                OutputFormat::Csv => with_output(&cfg, |w| {
                    let mut c = csv::Writer::from_writer(w);
                    c.write_record(["id", "anchor", "status", "tolerance", "measured"])?;
                    for r in &rep.records {
                        let status = serde_json::to_value(r.status)?;
                        c.write_record([
                            r.id.as_str(),
                            r.anchor.as_str(),
                            status.as_str().unwrap_or_default(),
                            &report::sig12(r.tolerance),
                            &serde_json::to_string(&r.measured)?,
                        ])?;
                    }
                    c.flush()?;
                    Ok(())
                })?,
            }
            Ok(rep.passed)
        }
        Command::Curves {
            space,
            eps_grid,
            budget,
            orlicz,
        } => {
            let space = parse_space(&space, orlicz)?;
            let grid = szlenk::parse_eps_grid(&eps_grid)?;
            let budget = CurveBudget {
                constructions: budget,
                ..CurveBudget::default()
            };
            let curve = szlenk::build_curve(space, &grid, &budget)?;
            with_output(&cfg, |w| report::emit_curve(&curve, cfg.output_format, w))?;
            Ok(curve.invariant_violations().is_empty())
        }
        Command::Certify {
            space,
            vec,
            eps,
            pairs,
            max_support,
            orlicz,
        } => {
            require_json(&cfg)?;
            let space = parse_space(&space, orlicz)?;
            let x0 = read_vec(&vec)?;
            let cert = szlenk::certify(space, &x0, eps, &CertifyOptions { pairs, max_support })?;
            let check = szlenk::certificate_report(&cert, cfg.tolerance.max(szlenk_lab::vecspace::DEFAULT_TOL))?;
            write_json(&cfg, &json!({ "certificate": cert, "validation": check }))?;
            Ok(check.valid)
        }
        Command::Orlicz {
            params,
            action,
            vec,
            eps,
            mu,
            n,
        } => {
            require_json(&cfg)?;
            let p = OrliczParams::new(params.a, params.b)?;
            let ared = p.reduced();
            let n = match n {
                Some(n) => n,
                None => orlicz::first_n_above_one(ared)?,
            };
            let (value, passed) = match action {
                OrliczAction::Norm => {
                    let v = read_vec(vec.as_deref().ok_or_else(|| Error::Domain("orlicz norm needs --vec".into()))?)?;
                    let closed = orlicz::closed_form_norm(&v, &p);
                    let oracle = if v.is_zero() { 0.0 } else { orlicz::luxemburg_oracle(&v, &p)? };
                    let gap = (closed - oracle).abs();
                    (json!({ "A": p.a, "B": p.b, "norm": closed, "luxemburg": oracle, "discrepancy": gap }), gap < 1e-10)
                }
                OrliczAction::Kkt => {
                    let rep = orlicz::kkt_minimize(mu, n, ared, 1e-8)?;
                    let ok = rep.passed;
                    (serde_json::to_value(rep)?, ok)
                }
                OrliczAction::Claim => {
                    let rep = orlicz::claim_check(n, ared, cfg.samples.unwrap_or(10_000), cfg.seed, 1e-10)?;
                    let ok = rep.passed;
                    (serde_json::to_value(rep)?, ok)
                }
                OrliczAction::Demo => {
                    let rep = orlicz::not_a_ball_demo(ared, eps, cfg.samples.unwrap_or(1000), 2, cfg.seed)?;
                    let ok = rep.passed;
                    (serde_json::to_value(rep)?, ok)
                }
            };
            write_json(&cfg, &value)?;
            Ok(passed)
        }
    }
}

fn config(c: &Common) -> Result<RunConfig> {
    let (path, format) = match c.out.as_deref() {
        None => (None, c.format.map(Format::into).unwrap_or(OutputFormat::Json)),
        Some(word @ ("json" | "csv")) => (None, word.parse()?),
        Some(path) => {
            let by_ext = match Path::new(path).extension().and_then(|e| e.to_str()) {
                Some(ext) if ext.eq_ignore_ascii_case("csv") => OutputFormat::Csv,
                _ => OutputFormat::Json,
            };
            (Some(path.to_string()), c.format.map(Format::into).unwrap_or(by_ext))
        }
    };
    let cfg = RunConfig {
        seed: c.seed,
        tolerance: c.tol,
        oracle_cap: c.oracle_cap,
        output_path: path,
        output_format: format,
        samples: c.samples,
        ..RunConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

fn parse_space(tag: &str, o: OrliczArgs) -> Result<Space> {
    match tag.parse()? {
        Space::Orlicz(_) => Ok(Space::Orlicz(OrliczParams::new(o.a, o.b)?)),
        s => Ok(s),
    }
}

fn read_vec(arg: &str) -> Result<SparseVec> {
    match arg.strip_prefix('@') {
        Some(path) => parse_vec_json(&std::fs::read_to_string(path)?),
        None => parse_vec_json(arg),
    }
}

fn require_json(cfg: &RunConfig) -> Result<()> {
    match cfg.output_format {
        OutputFormat::Json => Ok(()),
        OutputFormat::Csv => Err(Error::Domain("this command only writes JSON".into())),
    }
}

fn with_output(cfg: &RunConfig, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &cfg.output_path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json(cfg: &RunConfig, value: &Value) -> Result<()> {
    with_output(cfg, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn norm(cfg: &RunConfig, tag: &str, raw: &str, exact: bool, with_witness: bool, o: OrliczArgs) -> Result<bool> {
    let space = parse_space(tag, o)?;
    let v = read_vec(raw)?;
    let mut doc = json!({ "space": space, "vec": v.entries() });
    if exact {
        if space != Space::Tsirelson {
            return Err(Error::Domain("--exact is available for tsirelson only".into()));
        }
        let res = tsirelson::t_norm_exact(&v.to_rational());
        doc["value"] = json!(num_traits::ToPrimitive::to_f64(&res.value));
        doc["exact"] = json!(res.value.to_string());
        if with_witness {
            doc["witness"] = serde_json::to_value(&res.witness)?;
        }
    } else {
        let res = match space {
            Space::Tsirelson => Some(tsirelson::t_norm(&v)),
            Space::Schlumprecht => Some(szlenk_lab::schlumprecht::s_norm(&v)),
            Space::Baernstein => Some(szlenk_lab::baernstein::b_norm(&v)),
            Space::Orlicz(_) => None,
        };
        doc["value"] = json!(space.norm(&v));
        if with_witness {
            doc["witness"] = match res {
                Some(r) => serde_json::to_value(&r.witness)?,
                None => json!({ "node": "closed_form" }),
            };
        }
    }
    match cfg.output_format {
        OutputFormat::Json => write_json(cfg, &doc)?,
        OutputFormat::Csv => with_output(cfg, |w| {
            writeln!(w, "space,value")?;
            writeln!(w, "{},{}", space.tag(), report::sig12(doc["value"].as_f64().unwrap_or(f64::NAN)))?;
            Ok(())
        })?,
    }
    Ok(true)
}
