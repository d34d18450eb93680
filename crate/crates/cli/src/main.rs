//! Command-line front end. Every subcommand emits a deterministic JSON
//! report (config echo and version included) on stdout or `--out`;
//! timestamps go to stderr so identical configs produce byte-identical
//! reports.
//!
//! Exit codes: 0 success, 2 invalid input, 3 verification failure
//! (for example a counterexample in an estimate suite), 4 search budget
//! exhausted.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use engel::distcalc::{check_engel, standard_flag, DiffForm, DistributionFrame, VectorField};
use engel::estimates::{run_lemma_suite, ObstacleModel};
use engel::exactnum::parse_rational;
use engel::horizontal::{integrate_horizontal_d, integrate_horizontal_e, verify_tangency};
use engel::kobayashi::{finsler_report, SearchConfig};
use engel::moduli::{affine_bijection_exists, TripleSet};
use engel::obstacles::{Membership, ShellSet};
use engel::poly::{parse_point, parse_unipoly, PolyCurve};
use engel::steering::hermite_steer;
use engel::suite;
use engel::transport::{cartan_prolong, compose_shears, pullback_flag, standard_contact,
                       ProlongationChart, ShearDescriptor};

#[derive(Parser)]
#[command(name = "engel", version, about = "Exact tools for holomorphic Engel structures on C^4")]
struct Cli {
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format (only `json` is supported)
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive and verify the flag W ⊂ D ⊂ E of a rank-2 frame
    Flag {
        /// Use the standard frame {∂_w, ∂_x + z∂_y + w∂_z}
        #[arg(long, default_value_t = true)]
        standard: bool,
        /// JSON file with two vector fields to use instead
        #[arg(long)]
        frame: Option<PathBuf>,
    },
    /// Evaluate tangency residuals of a curve against model forms
    Tangency {
        /// JSON file with the curve
        #[arg(long)]
        curve: PathBuf,
        /// `standard-d`, `standard-e`, `standard-w`, or a JSON file of 1-forms
        #[arg(long, default_value = "standard-d")]
        forms: String,
    },
    /// Integrate horizontal data into an exactly tangent curve
    Integrate {
        /// `d` (free w, x) or `e` (free w, x, z)
        #[arg(long, default_value = "d")]
        model: String,
        /// Coefficients of w(ζ), constant term first, e.g. "0,1/2"
        #[arg(long, default_value = "0")]
        w: String,
        /// Coefficients of x(ζ)
        #[arg(long, default_value = "0")]
        x: String,
        /// Coefficients of z(ζ) (model `e` only)
        #[arg(long)]
        z: Option<String>,
        #[arg(long, default_value = "0")]
        y0: String,
        #[arg(long, default_value = "0")]
        z0: String,
    },
    /// Exact shell membership with witness layer
    Member {
        /// A | B | K3 | KW | Ln | CR
        #[arg(long)]
        set: String,
        /// Comma-separated exact coordinates, e.g. "1,0,0,0"
        #[arg(long)]
        point: String,
        /// Annulus half-width for K3 (default 1/2)
        #[arg(long)]
        epsilon: Option<String>,
        /// Slab count for Ln
        #[arg(long)]
        n: Option<u32>,
        /// Marked value for CR
        #[arg(long = "R")]
        r: Option<String>,
    },
    /// Sample admissible discs and check the derivative estimates
    LemmaVerify {
        /// A | B
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Two-sided directed Finsler bounds at a point and direction
    Finsler {
        #[arg(long)]
        point: String,
        #[arg(long)]
        dir: String,
        /// A | B
        #[arg(long, default_value = "B")]
        obstacle: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
    /// Plan a horizontal path between exact points
    Steer {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Pull the standard flag back under a composition of shears
    Pullback {
        /// JSON file with an ordered list of shear descriptors
        #[arg(long)]
        shears: PathBuf,
        /// Only `standard` is supported
        #[arg(long, default_value = "standard")]
        flag: String,
    },
    /// Cartan-prolong the standard contact structure
    Prolong {
        /// `0`, `inf`, or `both`
        #[arg(long, default_value = "both")]
        chart: String,
    },
    /// Affine-bijection obstruction between {0,1,R·i} and {0,1,R'·i}
    ModuliCheck {
        #[arg(long = "R")]
        r: String,
        #[arg(long = "Rprime")]
        rprime: String,
    },
    /// Run every acceptance suite and print one line per criterion
    ReproduceAll {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn invalid(message: impl fmt::Display) -> Self {
        CliError { code: 2, message: message.to_string() }
    }

    fn verification(message: impl fmt::Display) -> Self {
        CliError { code: 3, message: message.to_string() }
    }

    fn budget(message: impl fmt::Display) -> Self {
        CliError { code: 4, message: message.to_string() }
    }
}

impl From<engel::Error> for CliError {
    fn from(e: engel::Error) -> Self {
        match e {
            engel::Error::Verification(_) => CliError::verification(e),
            _ => CliError::invalid(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::invalid(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::invalid(e)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn envelope(command: &str, config: Value, result: Value) -> Value {
    json!({
        "tool": "engel",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    if cli.format != "json" {
        return Err(CliError::invalid(format!("unsupported format `{}`", cli.format)));
    }
    match &cli.command {
        Command::Flag { standard, frame } => {
            let d = match frame {
                Some(path) => {
                    let fields: Vec<VectorField> = read_json(path)?;
                    if fields.len() != 2 {
                        return Err(CliError::invalid("frame file must hold exactly two fields"));
                    }
                    DistributionFrame::new(fields, 2)?
                }
                None if *standard => engel::distcalc::standard_d_frame(),
                None => return Err(CliError::invalid("pass --standard or --frame")),
            };
            let config = json!({"standard": frame.is_none(), "frame": frame});
            match check_engel(&d)? {
                Ok(flag) => Ok(envelope("flag", config, to_value(&flag)?)),
                Err(failure) => Err(CliError::verification(format!(
                    "frame is not Engel: {failure}"
                ))),
            }
        }
        Command::Tangency { curve, forms } => {
            let curve: PolyCurve = read_json(curve)?;
            let form_list: Vec<DiffForm> = match forms.as_str() {
                "standard-d" => engel::distcalc::standard_d_forms().to_vec(),
                "standard-e" => vec![engel::distcalc::standard_e_form()],
                "standard-w" => engel::distcalc::standard_w_forms().to_vec(),
                path => read_json(&PathBuf::from(path))?,
            };
            let report = verify_tangency(&curve, &form_list)?;
            let residuals: Vec<Value> = report
                .residuals
                .iter()
                .map(|(idx, r)| Ok(json!({"form": idx, "residual": to_value(r)?})))
                .collect::<Result<_, CliError>>()?;
            Ok(envelope(
                "tangency",
                json!({"forms": forms}),
                json!({"tangent": report.ok, "residuals": residuals}),
            ))
        }
        Command::Integrate { model, w, x, z, y0, z0 } => {
            let wp = parse_unipoly(w)?;
            let xp = parse_unipoly(x)?;
            let y0v = y0.parse()?;
            let z0v = z0.parse()?;
            let config = json!({"model": model, "w": w, "x": x, "z": z, "y0": y0, "z0": z0});
            let disc = match model.as_str() {
                "d" => integrate_horizontal_d(wp, xp, y0v, z0v),
                "e" => {
                    let zp = parse_unipoly(z.as_deref().unwrap_or("0"))?;
                    integrate_horizontal_e(wp, xp, zp, y0v)
                }
                other => return Err(CliError::invalid(format!("unknown model `{other}`"))),
            };
            Ok(envelope(
                "integrate",
                config,
                json!({
                    "curve": to_value(disc.curve())?,
                    "degenerate": disc.is_degenerate(),
                }),
            ))
        }
        Command::Member { set, point, epsilon, n, r } => {
            let shell = build_shell(set, epsilon.as_deref(), *n, r.as_deref())?;
            let p = parse_point(point)?;
            let membership = shell.membership_exact(&p)?;
            let result = match membership {
                Membership::In { layer } => json!({"in": true, "layer": layer}),
                Membership::Out => json!({"in": false}),
            };
            Ok(envelope(
                "member",
                json!({"set": set, "point": point, "epsilon": epsilon, "n": n, "R": r}),
                result,
            ))
        }
        Command::LemmaVerify { model, samples, seed } => {
            let model = parse_model(model)?;
            let report = run_lemma_suite(model, *samples, *seed)?;
            let value = envelope(
                "lemma-verify",
                json!({"model": format!("{model:?}"), "samples": samples, "seed": seed}),
                to_value(&report)?,
            );
            if !report.all_passed() {
                emit(cli, &value)?;
                return Err(CliError::verification(format!(
                    "estimate counterexample at sample indices {:?}",
                    report.failures
                )));
            }
            Ok(value)
        }
        Command::Finsler { point, dir, obstacle, seed, degree, restarts } => {
            let p = parse_point(point)?;
            let v = parse_point(dir)?;
            let model = parse_model(obstacle)?;
            let cfg = SearchConfig {
                degree: *degree,
                restarts: *restarts,
                seed: *seed,
                ..SearchConfig::default()
            };
            let bound = finsler_report(&p, &v, model, &cfg)?;
            let value = envelope(
                "finsler",
                json!({
                    "point": point, "dir": dir, "obstacle": obstacle,
                    "seed": seed, "degree": degree, "restarts": restarts,
                }),
                to_value(&bound)?,
            );
            if !bound.upper.is_finite() {
                emit(cli, &value)?;
                return Err(CliError::budget("no feasible disc within the search budget"));
            }
            Ok(value)
        }
        Command::Steer { from, to } => {
            let p = parse_point(from)?;
            let q = parse_point(to)?;
            let path = hermite_steer(&p, &q)?;
            let ok = engel::steering::path_endpoint_check(&path, &p, &q) && path.is_tangent();
            if !ok {
                return Err(CliError::verification("planned path failed its exact checks"));
            }
            Ok(envelope(
                "steer",
                json!({"from": from, "to": to}),
                json!({"segments": to_value(&path.segments)?, "verified": ok}),
            ))
        }
        Command::Pullback { shears, flag } => {
            if flag != "standard" {
                return Err(CliError::invalid("only --flag standard is supported"));
            }
            let descriptors: Vec<ShearDescriptor> = read_json(shears)?;
            let ambient = engel::poly::Ambient::wxyz();
            let phi = compose_shears(&ambient, &descriptors)?;
            let pulled = pullback_flag(&phi, &standard_flag())?;
            Ok(envelope(
                "pullback",
                json!({"shears": shears, "flag": flag, "count": descriptors.len()}),
                to_value(&pulled)?,
            ))
        }
        Command::Prolong { chart } => {
            let contact = standard_contact();
            let charts: Vec<ProlongationChart> = match chart.as_str() {
                "0" => vec![ProlongationChart::Zero],
                "inf" => vec![ProlongationChart::Infinity],
                "both" => vec![ProlongationChart::Zero, ProlongationChart::Infinity],
                other => return Err(CliError::invalid(format!("unknown chart `{other}`"))),
            };
            let mut results = serde_json::Map::new();
            for c in charts {
                let (_, flag) = cartan_prolong(&contact, c)?;
                let key = match c {
                    ProlongationChart::Zero => "chart0",
                    ProlongationChart::Infinity => "chartInf",
                };
                results.insert(key.to_string(), to_value(&flag)?);
            }
            Ok(envelope("prolong", json!({"chart": chart}), Value::Object(results)))
        }
        Command::ModuliCheck { r, rprime } => {
            let r = parse_rational(r)?;
            let rp = parse_rational(rprime)?;
            let s = TripleSet::standard(&r)?;
            let t = TripleSet::standard(&rp)?;
            let witness = affine_bijection_exists(&s, &t);
            Ok(envelope(
                "moduli-check",
                json!({"R": r.to_string(), "Rprime": rp.to_string()}),
                json!({"witness": witness.as_ref().map(to_value).transpose()?}),
            ))
        }
        Command::ReproduceAll { seed } => {
            let reports = suite::run_all(*seed);
            let mut all_passed = true;
            for rep in &reports {
                let status = if rep.passed { "PASS" } else { "FAIL" };
                eprintln!("{status} {} ({} ms): {}", rep.name, rep.millis, rep.details);
                all_passed &= rep.passed;
            }
            let value = envelope(
                "reproduce-all",
                json!({"seed": seed}),
                json!({"criteria": to_value(&reports)?, "all_passed": all_passed}),
            );
            if !all_passed {
                emit(cli, &value)?;
                return Err(CliError::verification("at least one criterion failed"));
            }
            Ok(value)
        }
    }
}

fn build_shell(
    set: &str,
    epsilon: Option<&str>,
    n: Option<u32>,
    r: Option<&str>,
) -> Result<ShellSet, CliError> {
    Ok(match set {
        "A" => ShellSet::a(),
        "B" => ShellSet::b(),
        "K3" => match epsilon {
            Some(e) => ShellSet::k3(parse_rational(e)?)?,
            None => ShellSet::k3_default(),
        },
        "KW" => ShellSet::kw(),
        "Ln" => ShellSet::ln(n.ok_or_else(|| CliError::invalid("Ln requires --n"))?)?,
        "CR" => {
            let r = r.ok_or_else(|| CliError::invalid("CR requires --R"))?;
            ShellSet::cr(parse_rational(r)?)?
        }
        other => return Err(CliError::invalid(format!("unknown set `{other}`"))),
    })
}

fn parse_model(s: &str) -> Result<ObstacleModel, CliError> {
    match s {
        "A" | "a" => Ok(ObstacleModel::AComplement),
        "B" | "b" => Ok(ObstacleModel::BComplement),
        other => Err(CliError::invalid(format!("unknown obstacle model `{other}`"))),
    }
}

fn emit(cli: &Cli, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::SystemTime::now();
    match run(&cli) {
        Ok(value) => {
            if emit(&cli, &value).is_err() {
                return ExitCode::from(2);
            }
            if let Ok(elapsed) = started.elapsed() {
                eprintln!("# completed in {} ms", elapsed.as_millis());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
