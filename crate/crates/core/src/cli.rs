//! Command-line front end. Results go to stdout (or `--out`) as JSON with an
//! embedded run manifest; scans can also be written as CSV.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{assemble_gamma, PointConfig, Vec3};
use crate::resolvent::{self, Resolvent};
use crate::resonance::{self, CertifyOptions, SearchBox};
use crate::spectral;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "deltaspec", version, about = "Spectral analysis of the Laplacian with point interactions")]
pub struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write scan data as CSV (certify, scan-det, resonances).
    #[arg(long, global = true, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// JSON file with `alpha` and `points`.
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Negative eigenvalues with multiplicities and kernel vectors.
    Spectrum {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = spectral::DEFAULT_TOL)]
        tol: f64,
    },
    /// Classify the threshold z = 0.
    ClassifyZero {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = spectral::DEFAULT_TOL)]
        tol: f64,
    },
    /// Singular Laurent coefficients of Γ(z)⁻¹ at z = 0.
    Laurent {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = spectral::LAURENT_DEFAULT_RADIUS)]
        radius: f64,
        #[arg(long, default_value_t = spectral::LAURENT_DEFAULT_NODES)]
        nodes: usize,
    },
    /// Zeros of det Γ in a box of the z-plane.
    Resonances {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(
            long = "box",
            num_args = 4,
            required = true,
            allow_negative_numbers = true,
            value_names = ["RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"]
        )]
        bounds: Vec<f64>,
        #[arg(long, default_value_t = resonance::DEFAULT_TOL)]
        tol: f64,
    },
    /// Real-axis non-singularity certificate.
    Certify {
        #[command(flatten)]
        cfg: ConfigArg,
        /// End of the scan: `auto` for z_star, or a number.
        #[arg(long, default_value = "auto")]
        zmax: ZMax,
        /// Grid step; defaults to 1e-2·min(1, d_min).
        #[arg(long)]
        grid: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
    },
    /// Resolvent kernel R(z²; x, x').
    Resolvent {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, value_name = "RE,IM")]
        z: Complex64,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, value_name = "X,Y,Z")]
        x: Vec3,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, value_name = "X,Y,Z")]
        xp: Vec3,
        /// Also report the finite-difference Helmholtz residual with this step.
        #[arg(long, value_name = "H")]
        check_helmholtz: Option<f64>,
    },
    /// det Γ and σ_min(Γ) along the real or imaginary axis.
    ScanDet {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZMax {
    Auto,
    Value(f64),
}

impl std::str::FromStr for ZMax {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(ZMax::Auto);
        }
        s.parse::<f64>()
            .map(ZMax::Value)
            .map_err(|_| format!("expected `auto` or a number, got `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Real,
    Imag,
}

fn parse_numbers(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let parts: std::result::Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match parts {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(format!("expected {n} comma-separated finite numbers, got `{s}`")),
    }
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let v = parse_numbers(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let v = parse_numbers(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<PointConfig> {
    let text = fs::read_to_string(path)?;
    PointConfig::from_json_str(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub parameters: BTreeMap<String, Value>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str, config: &Path, parameters: BTreeMap<String, Value>) -> Self {
        Self {
            command: command.to_string(),
            config_path: config.display().to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }
}

/// A finished command: its JSON body and optional CSV table.
struct Output {
    manifest: RunManifest,
    body: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
}

/// 17 significant digits, always with a `.` decimal separator.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::Spectrum { cfg, tol } => {
            let pc = parse_config(&cfg.config)?;
            let report = spectral::negative_eigenvalues(&pc, *tol)?;
            log::info!("{} eigenvalue(s)", report.eigenvalues.len());
            Ok(Output {
                manifest: RunManifest::new("spectrum", &cfg.config, params(&[("tol", json!(tol))])),
                body: to_value(&report)?,
                csv: None,
            })
        }
        Command::ClassifyZero { cfg, tol } => {
            let pc = parse_config(&cfg.config)?;
            let class = spectral::classify_zero(&pc, *tol)?;
            Ok(Output {
                manifest: RunManifest::new("classify-zero", &cfg.config, params(&[("tol", json!(tol))])),
                body: to_value(&class)?,
                csv: None,
            })
        }
        Command::Laurent { cfg, radius, nodes } => {
            let pc = parse_config(&cfg.config)?;
            let coeffs = spectral::laurent_at_zero(&pc, *radius, *nodes)?;
            if !coeffs.stable {
                log::warn!("Laurent coefficients did not stabilize (change {:.3e})", coeffs.change);
            }
            Ok(Output {
                manifest: RunManifest::new(
                    "laurent",
                    &cfg.config,
                    params(&[("radius", json!(radius)), ("nodes", json!(nodes))]),
                ),
                body: to_value(&coeffs)?,
                csv: None,
            })
        }
        Command::Resonances { cfg, bounds, tol } => {
            let pc = parse_config(&cfg.config)?;
            let b = SearchBox::new(bounds[0], bounds[1], bounds[2], bounds[3])?;
            let set = resonance::find_resonances(&pc, &b, *tol)?;
            log::info!("{} zero(s) of det Γ in the box", set.total_count);
            let rows = set
                .roots
                .iter()
                .chain(&set.excluded)
                .map(|r| {
                    vec![
                        fmt_f64(r.z.re),
                        fmt_f64(r.z.im),
                        r.multiplicity.to_string(),
                        format!("{:?}", r.kind),
                    ]
                })
                .collect();
            Ok(Output {
                manifest: RunManifest::new(
                    "resonances",
                    &cfg.config,
                    params(&[("box", json!(bounds)), ("tol", json!(tol))]),
                ),
                body: to_value(&set)?,
                csv: Some((vec!["re_z", "im_z", "multiplicity", "kind"], rows)),
            })
        }
        Command::Certify { cfg, zmax, grid, margin } => {
            let pc = parse_config(&cfg.config)?;
            let opts = CertifyOptions {
                grid_step: *grid,
                margin: *margin,
                z_max: match zmax {
                    ZMax::Auto => None,
                    ZMax::Value(v) => Some(*v),
                },
                ..Default::default()
            };
            let cert = resonance::certify_real_axis(&pc, &opts)?;
            if !cert.verdict {
                log::warn!(
                    "certificate failed at {} grid point(s); covers z_star: {}",
                    cert.failures.len(),
                    cert.covers_z_star
                );
            }
            let rows = cert
                .z_grid
                .iter()
                .zip(cert.sigma_min.iter().zip(&cert.cholesky_ok))
                .map(|(z, (s, ok))| vec![fmt_f64(*z), fmt_f64(*s), ok.to_string()])
                .collect();
            let zmax_param = match zmax {
                ZMax::Auto => json!("auto"),
                ZMax::Value(v) => json!(v),
            };
            Ok(Output {
                manifest: RunManifest::new(
                    "certify",
                    &cfg.config,
                    params(&[("zmax", zmax_param), ("grid", json!(grid)), ("margin", json!(margin))]),
                ),
                body: to_value(&cert)?,
                csv: Some((vec!["z", "sigma_min", "cholesky_ok"], rows)),
            })
        }
        Command::Resolvent { cfg, z, x, xp, check_helmholtz } => {
            let pc = parse_config(&cfg.config)?;
            let res = Resolvent::new(&pc, *z)?;
            let free = res.free_part(x, xp)?;
            let corr = res.correction(x, xp)?;
            let mut body = json!({
                "z": z,
                "x": x,
                "xp": xp,
                "value": free + corr,
                "free_part": free,
                "correction": corr,
            });
            if let Some(h) = check_helmholtz {
                let r = resolvent::helmholtz_residual_at_energy(&res, z * z, x, xp, *h)?;
                body["helmholtz_residual"] = json!(r);
            }
            Ok(Output {
                manifest: RunManifest::new(
                    "resolvent",
                    &cfg.config,
                    params(&[
                        ("z", json!(z)),
                        ("x", json!(x)),
                        ("xp", json!(xp)),
                        ("check_helmholtz", json!(check_helmholtz)),
                    ]),
                ),
                body,
                csv: None,
            })
        }
        Command::ScanDet { cfg, axis, from, to, step } => {
            let pc = parse_config(&cfg.config)?;
            if !(step > &0.0) || !step.is_finite() || !(from <= to) {
                return Err(Error::Domain(format!(
                    "need from <= to and step > 0, got from = {from}, to = {to}, step = {step}"
                )));
            }
            let count = ((to - from) / step + 1e-9).floor() as usize + 1;
            let mut points = Vec::with_capacity(count);
            let mut rows = Vec::with_capacity(count);
            for k in 0..count {
                let t = from + k as f64 * step;
                let z = match axis {
                    Axis::Real => Complex64::new(t, 0.0),
                    Axis::Imag => Complex64::new(0.0, t),
                };
                let gamma = assemble_gamma(&pc, z).entries;
                let det = linalg::det(&gamma)?;
                let sigma = linalg::min_singular_value(&gamma)?;
                rows.push(vec![
                    fmt_f64(t),
                    fmt_f64(det.re),
                    fmt_f64(det.im),
                    fmt_f64(det.norm()),
                    fmt_f64(sigma),
                ]);
                points.push(json!({
                    "z": t,
                    "re_det": det.re,
                    "im_det": det.im,
                    "abs_det": det.norm(),
                    "sigma_min": sigma,
                }));
            }
            Ok(Output {
                manifest: RunManifest::new(
                    "scan-det",
                    &cfg.config,
                    params(&[
                        ("axis", json!(axis)),
                        ("from", json!(from)),
                        ("to", json!(to)),
                        ("step", json!(step)),
                    ]),
                ),
                body: json!({ "axis": axis, "points": points }),
                csv: Some((vec!["z", "re_det", "im_det", "abs_det", "sigma_min"], rows)),
            })
        }
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::NumericalFailure(format!("csv: {other:?}")),
    }
}

fn finish(cli: &Cli, out: Output, stdout: &mut dyn Write) -> Result<()> {
    let mut doc = match out.body {
        Value::Object(map) => Value::Object(map),
        other => json!({ "result": other }),
    };
    doc["manifest"] = to_value(&out.manifest)?;
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    match (&cli.csv, out.csv) {
        (Some(path), Some((header, rows))) => write_csv(path, &header, &rows)?,
        (Some(_), None) => log::warn!("--csv ignored: `{}` produces no table", out.manifest.command),
        _ => {}
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command).and_then(|out| finish(&cli, out, stdout)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DOMAIN
        }
    }
}
