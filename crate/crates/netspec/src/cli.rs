//! The `slh` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use slh_core::dissipation::{
    check_bounded_real, check_dissipation, check_positive_real, stability_certificate, AmplitudeGrid, CertificateReport,
    CheckOptions, DecayBound, ExosystemClass, LemmaOptions, Network, SupplyRate,
};
use slh_core::dynamics::{decay_fit, expectation_trace, mean_drift_matrix, EvolveOptions};
use slh_core::generator::generator;
use slh_core::standard::coherent_state_checked;
use slh_core::{Complex64, DensityMatrix, FactorKind, HilbertSpace, Operator, StateVector, CERTIFICATE_TOL};
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::elaborate::{load, Model};
use crate::parser::parse_document;
use crate::printer::print_document;

#[derive(Debug, Parser)]
#[command(name = "slh", version, about = "Compose SLH networks, check dissipation certificates and simulate")]
struct Cli {
    /// Certificate tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Real and imaginary amplitude values for grid checks, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Option<Vec<f64>>,
    /// Write the report (the CSV trace for `simulate`) to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a document in canonical form.
    Fmt { file: PathBuf },
    /// Print the top-level triple.
    Compose { file: PathBuf },
    /// Apply the top-level generator to an observable.
    Generator {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        observable: String,
    },
    /// Check a certificate for the top-level system.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
    /// Integrate the master equation and trace an expectation value.
    Simulate(SimulateArgs),
    /// Mean-quadrature drift matrix and its eigenvalues.
    Poles { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RateKind {
    Natural,
    Passivity,
    Gain,
    Stability,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NetworkKind {
    Series,
    Lft,
}

#[derive(Debug, Subcommand)]
enum CheckKind {
    /// Dissipation inequality over an exosystem class.
    Dissipation {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        storage: String,
        #[arg(long, value_enum, default_value = "natural")]
        rate: RateKind,
        /// Exosystem class name; defaults to scalar amplitudes on the grid.
        #[arg(long)]
        exo: Option<String>,
        #[arg(long, value_enum, default_value = "series")]
        network: NetworkKind,
        /// Passivity: entries of `Z`; gain: diagonal output weights.
        #[arg(long, allow_hyphen_values = true)]
        z: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        n: Vec<String>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        c: f64,
    },
    /// Positive-real lemma.
    Pr {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        storage: String,
        #[arg(long, allow_hyphen_values = true)]
        n: Vec<String>,
        /// Direct-coupling plant operators.
        #[arg(long, allow_hyphen_values = true)]
        k: Vec<String>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Bounded-real lemma.
    Br {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        storage: String,
        /// Diagonal output weights, one per output; defaults to 1.
        #[arg(long, allow_hyphen_values = true)]
        z: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        n: Vec<String>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Exponential stability `𝒢(V) + cV − λ ≤ 0`.
    Stability {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        storage: String,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
    },
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    observable: String,
    /// Final time.
    #[arg(long)]
    t: f64,
    #[arg(long)]
    dt: f64,
    /// Initial factor state `label=basis:K` or `label=coherent:ALPHA`;
    /// unlisted factors start in basis state 0.
    #[arg(long, allow_hyphen_values = true)]
    init: Vec<String>,
    /// Attach the bound `e^{−ct}⟨V(0)⟩ + λ/c`.
    #[arg(long)]
    bound_c: Option<f64>,
    #[arg(long, default_value_t = 0.0, requires = "bound_c", allow_hyphen_values = true)]
    bound_lambda: f64,
    /// Fit `⟨V(t)⟩ ≈ A e^{−ct} + B`.
    #[arg(long)]
    fit: bool,
    #[arg(long, default_value_t = 25)]
    positivity_stride: usize,
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Source(String),
    #[error("error[E301]: cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("error[E302]: {0}")]
    Core(#[from] slh_core::Error),
}

type Outcome = std::result::Result<Output, Failure>;

struct Output {
    report: String,
    /// Alternate payload written to `--out` instead of the report.
    file_payload: Option<String>,
    holds: bool,
}

impl Output {
    fn ok(report: String) -> Self {
        Output {
            report,
            file_payload: None,
            holds: true,
        }
    }
}

/// C-style `%.6e`; magnitudes below `1e-12` print as zero so round-off noise
/// does not leak into reports.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return slh_core::dynamics::format_sci(x);
    }
    let x = if x.abs() < 1e-12 { 0.0 } else { x };
    let s = format!("{x:.6e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn csci(z: Complex64) -> String {
    let im = sci(z.im);
    if im.starts_with('-') {
        format!("{}{im}i", sci(z.re))
    } else {
        format!("{}+{im}i", sci(z.re))
    }
}

fn read(path: &PathBuf) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_model(path: &PathBuf) -> std::result::Result<Model, Failure> {
    let src = read(path)?;
    load(&src).map_err(|d| Failure::Source(d.render(&path.display().to_string())))
}

fn operand(model: &Model, flag: &str, text: &str) -> std::result::Result<Operator, Failure> {
    model.operator(text).map_err(|d: Diagnostic| Failure::Source(d.render(flag)))
}

fn operands(model: &Model, flag: &str, texts: &[String]) -> std::result::Result<Vec<Operator>, Failure> {
    texts.iter().map(|t| operand(model, flag, t)).collect()
}

fn sparse(out: &mut String, title: &str, op: &Operator) {
    let _ = writeln!(out, "{title}:");
    let m = op.matrix();
    let mut any = false;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > 1e-12 {
                any = true;
                let _ = writeln!(out, "  ({i},{j}) {}", csci(z));
            }
        }
    }
    if !any {
        out.push_str("  0\n");
    }
}

fn witness_line(model: &Model, storage: &Operator, witness: &StateVector) -> String {
    let mut parts = Vec::new();
    if let Ok(v) = witness.expectation(storage) {
        parts.push(format!("<V> = {}", sci(v.re)));
    }
    for f in witness.space().factors() {
        if let Some((name, op)) = model.scope.population(f.label()) {
            if let Ok(v) = witness.expectation(&op) {
                parts.push(format!("<{name}> = {}", sci(v.re)));
            }
        }
    }
    parts.join(", ")
}

fn certificate(out: &mut String, model: &Model, storage: &Operator, cert: &CertificateReport) {
    let _ = writeln!(out, "certificate: {}", cert.kind);
    let _ = writeln!(out, "method: {}", cert.method);
    let _ = writeln!(out, "holds: {}", if cert.holds { "yes" } else { "no" });
    let _ = writeln!(out, "tolerance: {}", sci(cert.tol));
    let _ = writeln!(out, "margin: {}", sci(cert.worst_margin));
    let _ = writeln!(out, "witness: {}", witness_line(model, storage, &cert.witness));
    if !cert.samples.is_empty() {
        let _ = writeln!(out, "samples: {}", cert.samples.len());
        if let Some(s) = cert.worst_sample.map(|k| &cert.samples[k]) {
            let amps: Vec<String> = s.amplitudes.iter().map(|z| csci(*z)).collect();
            let _ = writeln!(out, "worst sample: {} amplitudes [{}]", s.index, amps.join(", "));
        }
    }
}

fn cross_check(out: &mut String, grid: &Option<CertificateReport>) {
    if let Some(g) = grid {
        let _ = writeln!(
            out,
            "grid cross-check: holds {}, margin {}, samples {}",
            if g.holds { "yes" } else { "no" },
            sci(g.worst_margin),
            g.samples.len()
        );
    }
}

struct Globals {
    tol: f64,
    grid: AmplitudeGrid,
}

fn check(kind: CheckKind, g: &Globals) -> Outcome {
    let options = CheckOptions::with_tol(g.tol);
    let lemma = LemmaOptions {
        check: options,
        grid: Some(g.grid.clone()),
    };
    let mut out = String::new();
    let holds = match kind {
        CheckKind::Dissipation {
            file,
            storage,
            rate,
            exo,
            network,
            z,
            n,
            g: gain,
            lambda,
            c,
        } => {
            let model = load_model(&file)?;
            let v = operand(&model, "--storage", &storage)?;
            let plant = model.top();
            let network = match network {
                NetworkKind::Series => Network::Series,
                NetworkKind::Lft => Network::Lft,
            };
            let class = match exo {
                Some(name) => model
                    .class(&name)
                    .ok_or_else(|| Failure::Usage(format!("error[E303]: `{name}` is not an exosystem")))?,
                None => ExosystemClass::ScalarAmplitudes {
                    channels: match network {
                        Network::Series => plant.channels(),
                        Network::Lft => 2,
                    },
                    grid: g.grid.clone(),
                    coupling: None,
                },
            };
            let n_ops = operands(&model, "--n", &n)?;
            let rate = match rate {
                RateKind::Natural => SupplyRate::Natural { storage: v.clone() },
                RateKind::Passivity => SupplyRate::Passivity {
                    z: operands(&model, "--z", &z)?,
                    n: n_ops,
                    lambda,
                },
                RateKind::Gain => SupplyRate::Gain {
                    z: diagonal_weights(&model, &z, n_ops.len(), plant.channels())?,
                    n: n_ops,
                    g: gain,
                    lambda,
                },
                RateKind::Stability => SupplyRate::StabilityForm { c, lambda },
            };
            let natural = matches!(rate, SupplyRate::Natural { .. });
            let report = check_dissipation(plant, network, &class, &v, &rate, options)?;
            let _ = writeln!(out, "system: {}", model.top_name());
            certificate(&mut out, &model, &v, &report);
            if natural {
                let _ = writeln!(out, "equality margin: {}", sci(report.equality_margin()));
            }
            report.holds
        }
        CheckKind::Pr {
            file,
            storage,
            n,
            k,
            lambda,
        } => {
            let model = load_model(&file)?;
            let v = operand(&model, "--storage", &storage)?;
            let n = operands(&model, "--n", &n)?;
            let k = operands(&model, "--k", &k)?;
            let report = check_positive_real(model.top(), &v, &k, &n, lambda, &lemma)?;
            let _ = writeln!(out, "system: {}", model.top_name());
            certificate(&mut out, &model, &v, &report.certificate);
            cross_check(&mut out, &report.grid);
            report.certificate.holds
        }
        CheckKind::Br {
            file,
            storage,
            z,
            n,
            g: gain,
            lambda,
        } => {
            let model = load_model(&file)?;
            let v = operand(&model, "--storage", &storage)?;
            let n = operands(&model, "--n", &n)?;
            let z = diagonal_weights(&model, &z, n.len(), model.top().channels())?;
            let report = check_bounded_real(model.top(), &v, &z, &n, gain, lambda, &lemma)?;
            let _ = writeln!(out, "system: {}", model.top_name());
            certificate(&mut out, &model, &v, &report.certificate);
            let _ = writeln!(out, "gamma min eigenvalue: {}", sci(report.gamma_min));
            if let Some(r) = report.kernel_residual {
                let _ = writeln!(out, "kernel residual: {}", sci(r));
            }
            cross_check(&mut out, &report.grid);
            report.certificate.holds
        }
        CheckKind::Stability {
            file,
            storage,
            c,
            lambda,
        } => {
            let model = load_model(&file)?;
            let v = operand(&model, "--storage", &storage)?;
            let report = stability_certificate(model.top(), &v, c, lambda, options)?;
            let _ = writeln!(out, "system: {}", model.top_name());
            certificate(&mut out, &model, &v, &report.certificate);
            let _ = writeln!(out, "bound: <V(t)> <= exp(-{} t) <V(0)> + {}", sci(c), sci(lambda / c));
            report.certificate.holds
        }
    };
    Ok(Output {
        report: out,
        file_payload: None,
        holds,
    })
}

/// `Z = diag(z_1, …, z_p)` with `p = m`, defaulting each weight to 1.
fn diagonal_weights(
    model: &Model,
    z: &[String],
    outputs: usize,
    channels: usize,
) -> std::result::Result<Vec<Vec<Operator>>, Failure> {
    if outputs != channels {
        return Err(Failure::Usage(format!(
            "error[E303]: diagonal output weights need one output per channel ({outputs} outputs, {channels} channels)"
        )));
    }
    let weights = if z.is_empty() {
        vec![Operator::real(1.0); outputs]
    } else if z.len() == outputs {
        operands(model, "--z", z)?
    } else {
        return Err(Failure::Usage(format!(
            "error[E303]: {} output weights for {outputs} outputs",
            z.len()
        )));
    };
    Ok((0..outputs)
        .map(|i| {
            (0..channels)
                .map(|j| if i == j { weights[i].clone() } else { Operator::real(0.0) })
                .collect()
        })
        .collect())
}

fn initial_state(model: &Model, space: &HilbertSpace, specs: &[String], warn: &mut String) -> std::result::Result<DensityMatrix, Failure> {
    let bad = |s: &str, why: &str| Failure::Usage(format!("error[E303]: invalid --init `{s}`: {why}"));
    let mut chosen: Vec<(String, String)> = Vec::new();
    for s in specs {
        let (label, state) = s.split_once('=').ok_or_else(|| bad(s, "expected label=basis:K or label=coherent:ALPHA"))?;
        if space.factor(label).is_none() {
            return Err(bad(s, "no such factor in the simulated space"));
        }
        chosen.push((label.to_string(), state.to_string()));
    }
    let mut psi: Option<StateVector> = None;
    for f in space.factors() {
        let spec = chosen.iter().rev().find(|(l, _)| l == f.label()).map(|(_, s)| s.as_str()).unwrap_or("basis:0");
        let one = HilbertSpace::single(f.clone());
        let state = if let Some(k) = spec.strip_prefix("basis:") {
            let k: usize = k.parse().map_err(|_| bad(spec, "basis index must be a non-negative integer"))?;
            StateVector::basis(one, k)?
        } else if let Some(alpha) = spec.strip_prefix("coherent:") {
            if f.kind() != FactorKind::Fock {
                return Err(bad(spec, "coherent states need an oscillator factor"));
            }
            let alpha = model
                .scope
                .eval_text(alpha)
                .map_err(|d| Failure::Source(d.render("--init")))?
                .as_scalar()
                .ok_or_else(|| bad(spec, "amplitude must be a number"))?;
            let (state, w) = coherent_state_checked(f, alpha);
            if let Some(w) = w {
                let _ = writeln!(
                    warn,
                    "warning: coherent amplitude |α|² = {} exceeds {}/4 levels of `{}`; discarded weight {}",
                    sci(w.mean_occupation),
                    w.levels,
                    f.label(),
                    sci(w.discarded_weight)
                );
            }
            state
        } else {
            return Err(bad(spec, "expected basis:K or coherent:ALPHA"));
        };
        psi = Some(match psi {
            None => state,
            Some(p) => p.tensor(&state)?,
        });
    }
    Ok(match psi {
        Some(p) => p.density(),
        None => StateVector::basis(HilbertSpace::scalar(), 0)?.density(),
    })
}

fn simulate(args: SimulateArgs, warn: &mut String) -> Outcome {
    let model = load_model(&args.file)?;
    let v = operand(&model, "--observable", &args.observable)?;
    let g = model.top();
    let space = g.space().union(v.space())?;
    let rho0 = initial_state(&model, &space, &args.init, warn)?;
    let opts = EvolveOptions {
        dt: args.dt,
        positivity_stride: args.positivity_stride.max(1),
    };
    let bound = args.bound_c.map(|c| DecayBound {
        c,
        lambda: args.bound_lambda,
    });
    let trace = expectation_trace(g, &v, &rho0, args.t, opts, bound)?;
    let mut out = String::new();
    let _ = writeln!(out, "system: {}", model.top_name());
    let _ = writeln!(out, "observable: {}", args.observable.trim());
    let init = if args.init.is_empty() { "basis:0".to_string() } else { args.init.join(" ") };
    let _ = writeln!(out, "initial: {init}");
    let _ = writeln!(out, "steps: {}", trace.stats.steps);
    let _ = writeln!(out, "dt: {}", sci(args.dt));
    let _ = writeln!(out, "initial value: {}", sci(trace.values[0]));
    let _ = writeln!(out, "final value: {}", sci(*trace.values.last().expect("non-empty trace")));
    let _ = writeln!(out, "max trace drift: {}", sci(trace.stats.max_trace_drift));
    let _ = writeln!(out, "min eigenvalue: {}", sci(trace.stats.min_eigenvalue));
    let mut holds = true;
    if let Some(b) = &trace.bound {
        holds = b.respected();
        let _ = writeln!(
            out,
            "bound: c = {}, lambda = {}, respected: {}, max excess {}, violations {}",
            sci(b.bound.c),
            sci(b.bound.lambda),
            if holds { "yes" } else { "no" },
            sci(b.max_excess),
            b.violations.len()
        );
    }
    if args.fit {
        let fit = decay_fit(&trace)?;
        let _ = writeln!(out, "fit: rate = {}, offset = {}", sci(fit.rate), sci(fit.offset));
    }
    let csv = trace.to_csv();
    Ok(Output {
        report: out,
        file_payload: Some(csv),
        holds,
    })
}

fn poles(file: PathBuf) -> Outcome {
    let model = load_model(&file)?;
    let d = mean_drift_matrix(model.top())?;
    let mut out = String::new();
    let _ = writeln!(out, "system: {}", model.top_name());
    out.push_str("drift matrix (q, p):\n");
    for row in d.matrix {
        let _ = writeln!(out, "  {} {}", sci(row[0]), sci(row[1]));
    }
    let _ = writeln!(out, "offset: {} {}", sci(d.offset[0]), sci(d.offset[1]));
    out.push_str("eigenvalues:\n");
    for e in d.eigenvalues {
        let _ = writeln!(out, "  {}", csci(e));
    }
    let _ = writeln!(out, "residual: {}", sci(d.residual));
    Ok(Output::ok(out))
}

fn compose(file: PathBuf) -> Outcome {
    let model = load_model(&file)?;
    let g = model.top();
    let mut out = String::new();
    let _ = writeln!(out, "system: {}", model.top_name());
    let _ = writeln!(out, "space: {}", g.space());
    let _ = writeln!(out, "channels: {}", g.channels());
    for i in 0..g.channels() {
        for j in 0..g.channels() {
            sparse(&mut out, &format!("S[{i},{j}]"), &g.scattering(i, j));
        }
    }
    for i in 0..g.channels() {
        sparse(&mut out, &format!("L[{i}]"), &g.coupling(i));
    }
    sparse(&mut out, "H", &g.hamiltonian());
    Ok(Output::ok(out))
}

fn run(cli: Cli, warn: &mut String) -> Outcome {
    let globals = Globals {
        tol: cli.tol.unwrap_or(CERTIFICATE_TOL),
        grid: cli.grid.clone().map(AmplitudeGrid::new).unwrap_or_default(),
    };
    if globals.tol.is_nan() || globals.tol < 0.0 {
        return Err(Failure::Usage("error[E303]: --tol must be non-negative".into()));
    }
    if globals.grid.values.is_empty() {
        return Err(Failure::Usage("error[E303]: --grid must list at least one value".into()));
    }
    match cli.command {
        Command::Fmt { file } => {
            let src = read(&file)?;
            let doc = parse_document(&src).map_err(|d| Failure::Source(d.render(&file.display().to_string())))?;
            Ok(Output::ok(print_document(&doc)))
        }
        Command::Compose { file } => compose(file),
        Command::Generator { file, observable } => {
            let model = load_model(&file)?;
            let x = operand(&model, "--observable", &observable)?;
            let gx = generator(model.top(), &x)?;
            let mut out = String::new();
            let _ = writeln!(out, "system: {}", model.top_name());
            let _ = writeln!(out, "observable: {}", observable.trim());
            let _ = writeln!(out, "space: {}", gx.space());
            sparse(&mut out, "G(X)", &gx);
            Ok(Output::ok(out))
        }
        Command::Check { kind } => check(kind, &globals),
        Command::Simulate(args) => simulate(args, warn),
        Command::Poles { file } => poles(file),
    }
}

/// Runs one invocation; `argv[0]` is the program name. Returns the exit code:
/// 0 on success, 1 when a check fails, 2 on input errors.
pub fn run_command_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let out_path = cli.out.clone();
    let mut warn = String::new();
    let result = run(cli, &mut warn);
    let _ = stderr.write_all(warn.as_bytes());
    match result {
        Ok(output) => {
            if let Some(path) = out_path {
                let payload = output.file_payload.as_deref().unwrap_or(&output.report);
                if let Err(e) = std::fs::write(&path, payload) {
                    let _ = writeln!(stderr, "error[E301]: cannot write {}: {e}", path.display());
                    return 2;
                }
                let _ = stdout.write_all(output.report.as_bytes());
            } else {
                let _ = stdout.write_all(output.report.as_bytes());
                if let Some(csv) = &output.file_payload {
                    let _ = writeln!(stdout);
                    let _ = stdout.write_all(csv.as_bytes());
                }
            }
            if output.holds {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            2
        }
    }
}

pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_command_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
