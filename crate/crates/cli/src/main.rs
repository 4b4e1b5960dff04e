use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use tauberlab::bridge::{self, HypothesisSide, Side};
use tauberlab::decomposition::{check_lemma21, decompose};
use tauberlab::extremal::{self, Lemma42Grid};
use tauberlab::mollifier::{check_derivative_bounds, BumpSpec, Mollifier};
use tauberlab::numeric::linear_grid;
use tauberlab::rate::{check_hypotheses, EnvelopeSpec, InverseOptions, MkVariant, RateExpr};
use tauberlab::semigroup::{self, DiagonalSystem, FitWindow, TimeGrid};
use tauberlab::suite::{self, SuiteConfig};
use tauberlab::{SampledSignal, VerificationReport};

const STANDARD_M: &str = r#"{"kind":"const","c":2}"#;
const STANDARD_K: &str = r#"{"kind":"power_shift","c0":2,"a":1,"alpha":1}"#;

#[derive(Parser, Debug)]
#[command(name = "tauberlab", version, about = "Decay-rate verification suites")]
struct Cli {
    /// Output directory
    #[arg(long, global = true, env = "TAUBERLAB_OUT", default_value = "tauberlab-out")]
    out: PathBuf,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct RateArgs {
    /// Rate M as JSON or @file
    #[arg(long = "M", default_value = STANDARD_M)]
    m_rate: String,
    /// Rate K as JSON or @file
    #[arg(long = "K", default_value = STANDARD_K)]
    k_rate: String,
    /// Derivative order
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Exponent p (number or "inf")
    #[arg(long, default_value = "inf")]
    p: String,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    /// Use M(s)·log((2+s)M(s)K(s)) instead of M(s)·log K(s)
    #[arg(long)]
    general: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Envelope tables and hypothesis scans
    Rates {
        #[command(flatten)]
        rates: RateArgs,
        /// Emit the envelope table
        #[arg(long)]
        envelope: bool,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Bump function derivative bounds
    Mollifier {
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 64)]
        boxes: usize,
        #[arg(long, default_value_t = 1 << 14)]
        grid: usize,
        #[arg(long, default_value_t = 6)]
        j_max: usize,
        /// Also write psi.csv and phi.csv
        #[arg(long)]
        export: bool,
    },
    /// Split a signal into J1 + J2
    Decompose {
        /// Signal file (.csv with t,re,im or binary); defaults to sin t
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Also scan the J1 majorant constant
        #[arg(long)]
        lemma21: bool,
    },
    /// Roots-of-unity measures and the extremal function
    Extremal {
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, default_value_t = 40)]
        k: u32,
        /// Number or "auto"
        #[arg(long, default_value = "auto")]
        delta: String,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long)]
        verify_lemma42: bool,
        /// Build an extremal function with this many terms
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        eps0: f64,
    },
    /// Fourier/Laplace hypothesis conversions
    Bridge {
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, default_value_t = 1.0)]
        cf: f64,
        #[arg(long, default_value_t = 0.0)]
        cf_prime: f64,
        /// Treat the input as the Fourier side and convert with this eps
        #[arg(long)]
        from_fourier: Option<f64>,
        #[arg(long)]
        equivalence: bool,
    },
    /// Diagonal semigroup orbits against the envelope
    Semigroup {
        /// System JSON; defaults to a seeded random system
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        modes: usize,
        #[arg(long, default_value_t = 1e3)]
        horizon: f64,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Every check with a fixed seed
    Suite {
        /// Run every module (the only mode; kept for scripts)
        #[arg(long)]
        all: bool,
    },
}

enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn classify(e: tauberlab::Error) -> Failure {
    use tauberlab::Error as E;
    match e {
        E::InvalidRate(_) | E::InvalidParameter(_) | E::Domain(_) | E::Format(_) | E::Io(_) => config(e),
        _ => Failure::Run(e.into()),
    }
}

fn read_arg(s: &str) -> anyhow::Result<String> {
    match s.strip_prefix('@') {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p)),
        None => Ok(s.to_string()),
    }
}

fn parse_rate(s: &str) -> anyhow::Result<RateExpr> {
    let text = read_arg(s)?;
    serde_json::from_str(&text).with_context(|| format!("parsing rate expression {}", text))
}

fn parse_p(s: &str) -> anyhow::Result<f64> {
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    s.parse().with_context(|| format!("p must be a number or inf, got {}", s))
}

fn build_spec(a: &RateArgs) -> anyhow::Result<EnvelopeSpec> {
    let spec = EnvelopeSpec::new(parse_rate(&a.m_rate)?, parse_rate(&a.k_rate)?)
        .order(a.m)
        .p(parse_p(&a.p)?)
        .c1(a.c1)
        .variant(if a.general { MkVariant::General } else { MkVariant::Standard });
    spec.validate()?;
    Ok(spec)
}

struct Output {
    dir: PathBuf,
    reports: Vec<VerificationReport>,
    extra: Vec<(String, Value)>,
}

impl Output {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            reports: Vec::new(),
            extra: Vec::new(),
        })
    }

    fn write(&self, name: &str, body: &str) -> anyhow::Result<()> {
        std::fs::write(self.dir.join(name), body).with_context(|| format!("writing {}", name))
    }

    fn report(&mut self, r: VerificationReport) -> anyhow::Result<()> {
        self.write(&format!("{}.csv", r.name), &r.to_csv())?;
        println!("{:<24} {} observed {}", r.name, if r.pass { "pass" } else { "FAIL" }, r.observed);
        for n in &r.notes {
            println!("  note: {}", n);
        }
        self.reports.push(r);
        Ok(())
    }

    fn finish(self, config: Value) -> anyhow::Result<bool> {
        let pass = self.reports.iter().all(|r| r.pass);
        let mut summary = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "pass": pass,
            "reports": self.reports.iter().map(|r| json!({
                "name": r.name,
                "pass": r.pass,
                "observed": r.observed,
                "worst_point": r.worst_point,
                "skipped": r.skipped,
                "observations": r.observations,
                "notes": r.notes,
            })).collect::<Vec<_>>(),
        });
        for (k, v) in &self.extra {
            summary[k.as_str()] = v.clone();
        }
        self.write("summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
        Ok(pass)
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let echo = json!({ "command": format!("{:?}", cli.cmd), "seed": cli.seed });
    let mut out = Output::new(&cli.out).map_err(config)?;
    match &cli.cmd {
        Cmd::Rates { rates, envelope, t_max, grid, tol } => {
            let spec = build_spec(rates).map_err(config)?;
            if *envelope {
                let opts = InverseOptions::with_tol(*tol);
                let mut csv = String::from("t,envelope\n");
                for t in linear_grid(0.0, *t_max, *grid) {
                    let e = spec.envelope(t, opts).map_err(classify)?;
                    csv.push_str(&format!("{},{}\n", tauberlab::report::fmt_num(t), tauberlab::report::fmt_num(e)));
                }
                out.write("envelope.csv", &csv).map_err(config)?;
            }
            out.report(check_hypotheses(&spec, t_max.max(2.0), 128).map_err(classify)?).map_err(config)?;
        }
        Cmd::Mollifier { eps, boxes, grid, j_max, export } => {
            let m = Mollifier::build(&BumpSpec::new(*eps, *boxes, *grid).map_err(classify)?).map_err(classify)?;
            if *export {
                out.write("psi.csv", &m.psi.to_csv()).map_err(config)?;
                out.write("phi.csv", &m.phi_signal(40.0, 0.05).to_csv()).map_err(config)?;
            }
            out.report(check_derivative_bounds(&m, *j_max).map_err(classify)?.report).map_err(config)?;
        }
        Cmd::Decompose { input, r, m, dt, lemma21 } => {
            let f = match input {
                Some(p) => SampledSignal::read(p).map_err(classify)?,
                None => SampledSignal::from_real_fn(0.0, *dt, (500.0 / dt) as usize + 1, f64::sin),
            };
            let moll = Mollifier::build(&BumpSpec::default()).map_err(classify)?;
            let phi = moll.phi_signal(220.0, f.dt);
            let d = decompose(&f, &phi, *r, *m).map_err(classify)?;
            out.write("j1.csv", &d.j1.to_csv()).map_err(config)?;
            out.write("j2.csv", &d.j2.to_csv()).map_err(config)?;
            out.extra.push(("valid_until".into(), json!(d.valid_until)));
            if *lemma21 {
                let hi = (0.5 * f.t_end()).max(f.t0);
                let rep = check_lemma21(&f, None, &phi, *m, &[1.0, 2.0, 4.0, 8.0], (f.t0 + 5.0, hi), 200)
                    .map_err(classify)?;
                out.report(rep).map_err(config)?;
            }
        }
        Cmd::Extremal { rates, k, delta, beta, verify_lemma42, n_max, eps0 } => {
            let spec = build_spec(rates).map_err(config)?;
            let delta = if delta == "auto" {
                extremal::auto_delta(&spec)
            } else {
                delta.parse().map_err(|_| config(anyhow::anyhow!("delta must be a number or auto")))?
            };
            let p = extremal::make_params(*k, delta, *beta, rates.c1, &spec).map_err(classify)?;
            out.write("measure.json", &serde_json::to_string_pretty(&p).map_err(config)?).map_err(config)?;
            if *verify_lemma42 {
                out.report(extremal::verify_lemma42(&spec, &p, &Lemma42Grid::default()).map_err(classify)?)
                    .map_err(config)?;
            }
            if let Some(n) = n_max {
                let fs = extremal::build_extremal(&spec, delta, *beta, rates.c1, *eps0, *n).map_err(classify)?;
                out.write("extremal.json", &fs.to_json().map_err(classify)?).map_err(config)?;
                for d in &fs.diagnostics {
                    println!("  note: {}", d);
                }
                out.report(extremal::checkpoint_bounds(&fs).map_err(classify)?).map_err(config)?;
                out.report(extremal::fhat_scan(&spec, &fs, &Default::default()).map_err(classify)?)
                    .map_err(config)?;
            }
        }
        Cmd::Bridge { rates, cf, cf_prime, from_fourier, equivalence } => {
            let spec = build_spec(rates).map_err(config)?;
            let converted = match from_fourier {
                Some(eps) => {
                    let h = HypothesisSide::new(
                        Side::Fourier,
                        spec.m_rate.clone(),
                        spec.k_rate.clone(),
                        spec.p.0,
                        spec.order,
                        *cf,
                        *cf_prime,
                    )
                    .map_err(classify)?;
                    bridge::fourier_to_laplace(&h, *eps).map_err(classify)?
                }
                None => {
                    let h = HypothesisSide::laplace_from(&spec, *cf, *cf_prime).map_err(classify)?;
                    bridge::laplace_to_fourier(&h).map_err(classify)?
                }
            };
            for f in &converted.flags {
                println!("  flag: {}", f);
            }
            out.write("converted.json", &converted.to_json().map_err(classify)?).map_err(config)?;
            if *equivalence {
                let rep = bridge::theorem_equivalence_check(&spec, *cf, *cf_prime, &Default::default())
                    .map_err(classify)?;
                out.report(rep).map_err(config)?;
            }
        }
        Cmd::Semigroup { system, modes, horizon, grid } => {
            use tauberlab::Complex64;
            let sys = match system {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(config)?;
                    DiagonalSystem::from_json(&text).map_err(classify)?
                }
                None => {
                    let mut rng = suite::seeded_rng(cli.seed);
                    suite::random_system(&mut rng, *modes).map_err(classify)?
                }
            };
            let (m, k) = semigroup::fit_m_k(&sys, &FitWindow::default()).map_err(classify)?;
            let spec = EnvelopeSpec::new(m, k);
            let x = vec![Complex64::new(1.0, 0.0); sys.len()];
            let trace = semigroup::orbit_trace(&sys, &x, &spec, *horizon, *grid).map_err(classify)?;
            out.write("orbit.csv", &semigroup::orbit_trace_csv(&trace).map_err(classify)?).map_err(config)?;
            out.write("system.json", &sys.to_json().map_err(classify)?).map_err(config)?;
            let tg = TimeGrid { horizon: *horizon, n: *grid, ..TimeGrid::default() };
            out.report(semigroup::corollary_check(&sys, &x, &spec, &tg).map_err(classify)?).map_err(config)?;
        }
        Cmd::Suite { all: _ } => {
            let cfg = SuiteConfig { seed: cli.seed, ..SuiteConfig::default() };
            let res = suite::run_suite(&cfg).map_err(classify)?;
            suite::write_suite(&res, &cli.out).map_err(classify)?;
            for c in res.summary["checks"].as_array().into_iter().flatten() {
                let ok = c["pass"].as_bool().unwrap_or(false);
                println!("{:<24} {}", c["name"].as_str().unwrap_or("?"), if ok { "pass" } else { "FAIL" });
            }
            return Ok(res.pass);
        }
    }
    out.finish(echo).map_err(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
    }
}
