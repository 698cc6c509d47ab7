//! Command-line surface: parameter input, sweeps, tables and
//! machine-readable output.
//!
//! Output is deterministic: floats are printed with 17 significant digits,
//! rows in a fixed order, CSV with LF line endings. JSON output is one
//! top-level object `{config, rows, reports}`.

use clap::{Args, Parser, Subcommand};
use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use crate::model::{self, ScatteringParams, Spin};
use crate::textfmt::{float17, float17_json, json_escape};
use crate::verify::{self, CheckStatus};
use crate::waves::{self, Branch, PartialWaveConfig};

const EXIT_CODES_HELP: &str = "Exit codes:\n  0  success\n  2  bad arguments or config file\n  3  domain error (invalid physical parameters or geometry)\n  4  verification failure";

#[derive(Parser, Debug)]
#[command(
    name = "conescatter",
    about = "Phase shifts, wave fields and scattering amplitudes for a spin-1/2 particle on a rotating conical background (natural units, hbar = c = 1)",
    after_help = EXIT_CODES_HELP,
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: CommonOpts,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonOpts {
    /// Config file with key=value lines (flags override it)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Particle mass m > 0
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mass: Option<f64>,

    /// Energy E > 0
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub energy: Option<f64>,

    /// Frame rotation frequency varpi >= 0
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub varpi: Option<f64>,

    /// Deficit parameter q >= 1
    #[arg(
        long,
        global = true,
        conflicts_with = "alpha",
        allow_hyphen_values = true
    )]
    pub q: Option<f64>,

    /// Cone angle parameter alpha = 1/q in (0, 1]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,

    /// Spin projection, +1 or -1
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub spin: Option<i64>,

    /// Highest partial-wave channel
    #[arg(long, global = true)]
    pub lmax: Option<i64>,

    /// Observation radius
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r: Option<f64>,

    /// Observation azimuth grid min:max:count (radians, in [0, 2pi))
    #[arg(long, global = true)]
    pub angles: Option<String>,

    /// Radial grid min:max:count (field command)
    #[arg(long, global = true)]
    pub radii: Option<String>,

    /// Output format: csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Output path (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-channel phase shifts: rotational (exact and linearized) and
    /// topological contributions
    PhaseShifts,
    /// Scattering amplitude and differential cross section over the angle
    /// grid
    Amplitude,
    /// Wave field over a polar grid
    Field,
    /// Run the verification suite
    Verify {
        /// Parameter grid: "default", "params" (from flags) or "none"
        #[arg(long, default_value = "default")]
        grid: String,
        /// Scale factor applied to every tolerance before pass/fail
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ScatteringParams,
    pub wave_cfg: PartialWaveConfig,
    pub angles: (f64, f64, usize),
    pub radii: (f64, f64, usize),
    pub radius: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn bad_args(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
    fn domain(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: msg.into(),
        }
    }
}

fn parse_range(s: &str, what: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::bad_args(format!(
            "{what} must be min:max:count, got '{s}'"
        )));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::bad_args(format!("bad {what} min '{}'", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::bad_args(format!("bad {what} max '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::bad_args(format!("bad {what} count '{}'", parts[2])))?;
    if count < 1 {
        return Err(CliError::bad_args(format!("{what} count must be >= 1")));
    }
    if min > max {
        return Err(CliError::bad_args(format!("{what} min must be <= max")));
    }
    Ok((min, max, count))
}

fn merge_config_file(opts: &mut CommonOpts, path: &PathBuf) -> Result<(), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::bad_args(format!("cannot read config {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::bad_args(format!(
                "config line {} is not key=value: '{line}'",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim().to_string();
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| CliError::bad_args(format!("config {key}: bad number '{v}'")))
        };
        // flags override the file: only fill fields still unset
        match key {
            "mass" => opts.mass = opts.mass.or(Some(parse_f64(&value)?)),
            "energy" => opts.energy = opts.energy.or(Some(parse_f64(&value)?)),
            "varpi" => opts.varpi = opts.varpi.or(Some(parse_f64(&value)?)),
            // q and alpha name the same parameter: either flag beats both
            // file keys
            "q" => {
                if opts.alpha.is_none() {
                    opts.q = opts.q.or(Some(parse_f64(&value)?));
                }
            }
            "alpha" => {
                if opts.q.is_none() {
                    opts.alpha = opts.alpha.or(Some(parse_f64(&value)?));
                }
            }
            "spin" => {
                let v = value
                    .parse::<i64>()
                    .map_err(|_| CliError::bad_args(format!("config spin: bad value '{value}'")))?;
                opts.spin = opts.spin.or(Some(v));
            }
            "lmax" => {
                let v = value
                    .parse::<i64>()
                    .map_err(|_| CliError::bad_args(format!("config lmax: bad value '{value}'")))?;
                opts.lmax = opts.lmax.or(Some(v));
            }
            "r" => opts.r = opts.r.or(Some(parse_f64(&value)?)),
            "angles" => opts.angles = opts.angles.take().or(Some(value)),
            "radii" => opts.radii = opts.radii.take().or(Some(value)),
            "format" => opts.format = opts.format.take().or(Some(value)),
            "out" => opts.out = opts.out.take().or(Some(PathBuf::from(value))),
            other => {
                return Err(CliError::bad_args(format!("unknown config key '{other}'")));
            }
        }
    }
    Ok(())
}

pub fn resolve_config(opts: &CommonOpts) -> Result<RunConfig, CliError> {
    let mut opts = opts.clone();
    if let Some(path) = opts.config.clone() {
        merge_config_file(&mut opts, &path)?;
    }
    if opts.q.is_some() && opts.alpha.is_some() {
        return Err(CliError::bad_args("--q and --alpha are mutually exclusive"));
    }
    let q = match (opts.q, opts.alpha) {
        (Some(q), None) => q,
        (None, Some(alpha)) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(CliError::bad_args(format!(
                    "alpha must lie in (0, 1], got {alpha}"
                )));
            }
            1.0 / alpha
        }
        (None, None) => 1.0,
        (Some(_), Some(_)) => unreachable!(),
    };
    let spin =
        Spin::from_int(opts.spin.unwrap_or(1)).map_err(|e| CliError::bad_args(e.to_string()))?;
    let params = ScatteringParams::new(
        opts.mass.unwrap_or(1.0),
        opts.energy.unwrap_or(1.0),
        opts.varpi.unwrap_or(0.0),
        q,
        spin,
    )
    .map_err(|e| CliError::domain(e.to_string()))?;

    let angles = parse_range(opts.angles.as_deref().unwrap_or("0.0:6.2:32"), "angles")?;
    if !(angles.0 >= 0.0 && angles.1 < 2.0 * PI) {
        return Err(CliError::bad_args(format!(
            "angle bounds must lie in [0, 2pi), got {}:{}",
            angles.0, angles.1
        )));
    }
    let radii = parse_range(opts.radii.as_deref().unwrap_or("10.0:40.0:4"), "radii")?;

    let wave_cfg = PartialWaveConfig {
        l_max: opts.lmax.unwrap_or(30),
        ..Default::default()
    };
    wave_cfg
        .validate()
        .map_err(|e| CliError::bad_args(e.to_string()))?;

    let format = match opts.format.as_deref().unwrap_or("csv") {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        other => {
            return Err(CliError::bad_args(format!(
                "format must be csv or json, got '{other}'"
            )))
        }
    };

    Ok(RunConfig {
        params,
        wave_cfg,
        angles,
        radii,
        radius: opts.r.unwrap_or(35.0),
        format,
        out: opts.out,
    })
}

fn grid_values(range: (f64, f64, usize)) -> Vec<f64> {
    let (min, max, count) = range;
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|k| min + (max - min) * k as f64 / (count as f64 - 1.0))
        .collect()
}

/// One output row: ordered (key, csv value, json value) triples.
type Row = Vec<(&'static str, String, String)>;

fn num_cell(v: f64) -> (String, String) {
    (float17(v), float17_json(v))
}

fn config_json(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    format!(
        "{{\"mass\":{},\"energy\":{},\"varpi\":{},\"q\":{},\"spin\":{},\"lmax\":{},\"r\":{},\"angles\":[{},{},{}],\"radii\":[{},{},{}],\"format\":\"{}\"}}",
        float17_json(p.mass),
        float17_json(p.energy),
        float17_json(p.varpi),
        float17_json(p.q),
        p.spin.sign() as i64,
        cfg.wave_cfg.l_max,
        float17_json(cfg.radius),
        float17_json(cfg.angles.0),
        float17_json(cfg.angles.1),
        cfg.angles.2,
        float17_json(cfg.radii.0),
        float17_json(cfg.radii.1),
        cfg.radii.2,
        match cfg.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    )
}

fn emit(cfg: &RunConfig, rows: &[Row], reports_json: &str) -> Result<(), CliError> {
    let text = match cfg.format {
        OutputFormat::Csv => {
            let mut out = String::new();
            if let Some(first) = rows.first() {
                let header: Vec<&str> = first.iter().map(|(k, _, _)| *k).collect();
                out.push_str(&header.join(","));
                out.push('\n');
            }
            for row in rows {
                let cells: Vec<&str> = row.iter().map(|(_, csv, _)| csv.as_str()).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let mut out = String::new();
            out.push_str("{\"config\":");
            out.push_str(&config_json(cfg));
            out.push_str(",\"rows\":[");
            for (i, row) in rows.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('{');
                for (j, (k, _, json)) in row.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&format!("\"{}\":{}", json_escape(k), json));
                }
                out.push('}');
            }
            out.push_str("],\"reports\":");
            out.push_str(reports_json);
            out.push_str("}\n");
            out
        }
    };
    match &cfg.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_phase_shifts(cfg: &RunConfig) -> Result<i32, CliError> {
    let p = &cfg.params;
    let d = model::derive(p).map_err(|e| CliError::domain(e.to_string()))?;
    let l_lo = (-(cfg.wave_cfg.l_max + 1)).max(model::min_propagating_l(p));
    let mut rows = Vec::new();
    for l in l_lo..=cfg.wave_cfg.l_max {
        let eta_l = match model::channel_wavenumber(p, &d, l) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("note: skipping l={l}: {e}");
                continue;
            }
        };
        let exact = eta_l - d.wavenumber;
        let linear = model::wavenumber_shift_linear(p, &d, l).unwrap_or(f64::NAN);
        let topo = model::topological_shift(&d, l, p.spin, p.q).value;
        let (c1, j1) = num_cell(eta_l);
        let (c2, j2) = num_cell(exact);
        let (c3, j3) = num_cell(linear);
        let (c4, j4) = num_cell(topo);
        rows.push(vec![
            ("l", l.to_string(), l.to_string()),
            ("eta_l", c1, j1),
            ("delta_eta_exact", c2, j2),
            ("delta_eta_approx", c3, j3),
            ("delta_topology", c4, j4),
        ]);
    }
    emit(cfg, &rows, "[]")?;
    Ok(0)
}

fn cmd_amplitude(cfg: &RunConfig) -> Result<i32, CliError> {
    let p = &cfg.params;
    let d = model::derive(p).map_err(|e| CliError::domain(e.to_string()))?;
    let azimuths = grid_values(cfg.angles);
    let sweep = waves::cross_section_sweep(p, &d, &cfg.wave_cfg, &azimuths, cfg.radius);
    let mut rows = Vec::new();
    for entry in &sweep.entries {
        let theta = entry.azimuth + PI;
        match &entry.outcome {
            Ok(rec) => {
                let (c0, j0) = num_cell(entry.azimuth);
                let (c1, j1) = num_cell(theta);
                let (c2, j2) = num_cell(rec.delta_theta);
                let (c3, j3) = num_cell(rec.f.re);
                let (c4, j4) = num_cell(rec.f.im);
                let (c5, j5) = num_cell(rec.dsigma);
                let branch = match rec.branch {
                    Branch::Generic => "generic",
                    Branch::Forward => "forward",
                };
                rows.push(vec![
                    ("phi", c0, j0),
                    ("theta", c1, j1),
                    ("delta_theta", c2, j2),
                    ("re_f", c3, j3),
                    ("im_f", c4, j4),
                    ("dsigma", c5, j5),
                    ("branch", branch.to_string(), format!("\"{branch}\"")),
                ]);
            }
            Err(e) => {
                eprintln!("note: skipping phi={}: {e}", float17(entry.azimuth));
            }
        }
    }
    emit(cfg, &rows, "[]")?;
    Ok(0)
}

fn cmd_field(cfg: &RunConfig) -> Result<i32, CliError> {
    let p = &cfg.params;
    let d = model::derive(p).map_err(|e| CliError::domain(e.to_string()))?;
    let azimuths = grid_values(cfg.angles);
    let radii = grid_values(cfg.radii);
    let mut rows = Vec::new();
    for &r in &radii {
        if r >= d.max_radius {
            eprintln!(
                "note: skipping r={}: outside the rotating-frame domain (max radius {})",
                float17(r),
                float17(d.max_radius)
            );
            continue;
        }
        for &phi in &azimuths {
            match waves::partial_wave_field(p, &d, &cfg.wave_cfg, r, phi) {
                Ok(value) => {
                    let (c0, j0) = num_cell(r);
                    let (c1, j1) = num_cell(phi);
                    let (c2, j2) = num_cell(value.re);
                    let (c3, j3) = num_cell(value.im);
                    let (c4, j4) = num_cell(value.norm_sqr());
                    rows.push(vec![
                        ("r", c0, j0),
                        ("phi", c1, j1),
                        ("re", c2, j2),
                        ("im", c3, j3),
                        ("abs2", c4, j4),
                    ]);
                }
                Err(e) => {
                    eprintln!("note: skipping r={}, phi={}: {e}", float17(r), float17(phi));
                }
            }
        }
    }
    emit(cfg, &rows, "[]")?;
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig, grid_kind: &str, tol_scale: f64) -> Result<i32, CliError> {
    let grid = match grid_kind {
        "default" => verify::default_grid(),
        "params" => vec![cfg.params],
        "none" => Vec::new(),
        other => {
            return Err(CliError::bad_args(format!(
                "grid must be default, params or none, got '{other}'"
            )))
        }
    };
    let mut reports = verify::run_suite(&grid, &cfg.wave_cfg);
    if tol_scale != 1.0 {
        for rep in reports.iter_mut() {
            if rep.status != CheckStatus::Skipped {
                rep.tolerance *= tol_scale;
                rep.status = if rep.measured_error <= rep.tolerance {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                };
            }
        }
    }
    let mut rows = Vec::new();
    for rep in &reports {
        let context = rep
            .context
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        let (c2, j2) = num_cell(rep.measured_error);
        let (c3, j3) = num_cell(rep.tolerance);
        rows.push(vec![
            (
                "name",
                rep.name.clone(),
                format!("\"{}\"", json_escape(&rep.name)),
            ),
            (
                "status",
                rep.status.as_str().to_string(),
                format!("\"{}\"", rep.status.as_str()),
            ),
            ("measured_error", c2, j2),
            ("tolerance", c3, j3),
            (
                "context",
                context.clone(),
                format!("\"{}\"", json_escape(&context)),
            ),
        ]);
    }
    emit(cfg, &rows, &verify::reports_to_json(&reports))?;
    let failed = reports
        .iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .count();
    if failed > 0 {
        eprintln!("{failed} verification check(s) failed");
        return Ok(4);
    }
    Ok(0)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let cfg = match resolve_config(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    let result = match &cli.command {
        Command::PhaseShifts => cmd_phase_shifts(&cfg),
        Command::Amplitude => cmd_amplitude(&cfg),
        Command::Field => cmd_field(&cfg),
        Command::Verify { grid, tol_scale } => cmd_verify(&cfg, grid, *tol_scale),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> CommonOpts {
        CommonOpts::default()
    }

    #[test]
    fn defaults_resolve() {
        let cfg = resolve_config(&opts()).map_err(|e| e.message).unwrap();
        assert_eq!(cfg.params.q, 1.0);
        assert_eq!(cfg.wave_cfg.l_max, 30);
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn alpha_maps_to_q() {
        let mut o = opts();
        o.alpha = Some(0.5);
        let cfg = resolve_config(&o).map_err(|e| e.message).unwrap();
        assert!((cfg.params.q - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bad_angles_rejected() {
        let mut o = opts();
        o.angles = Some("0:7.0:8".into());
        assert_eq!(resolve_config(&o).err().map(|e| e.code), Some(2));
        o.angles = Some("1:0.5:8".into());
        assert_eq!(resolve_config(&o).err().map(|e| e.code), Some(2));
        o.angles = Some("0:1:0".into());
        assert_eq!(resolve_config(&o).err().map(|e| e.code), Some(2));
    }

    #[test]
    fn invalid_physics_is_domain_error() {
        let mut o = opts();
        o.q = Some(0.5);
        assert_eq!(resolve_config(&o).err().map(|e| e.code), Some(3));
    }

    #[test]
    fn config_file_merge_and_override() {
        let dir = std::env::temp_dir().join("conescatter_cli_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "# comment\nq = 1.5\nmass=2.0\nlmax = 12\n").unwrap();
        let mut o = opts();
        o.config = Some(path.clone());
        o.mass = Some(3.0); // flag wins over file
        let cfg = resolve_config(&o).map_err(|e| e.message).unwrap();
        assert_eq!(cfg.params.q, 1.5);
        assert_eq!(cfg.params.mass, 3.0);
        assert_eq!(cfg.wave_cfg.l_max, 12);

        fs::write(&path, "nonsense=1\n").unwrap();
        assert_eq!(resolve_config(&o).err().map(|e| e.code), Some(2));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn alpha_flag_overrides_q_from_file() {
        let dir = std::env::temp_dir().join("conescatter_cli_test_alpha");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "q=1.5\n").unwrap();
        let mut o = opts();
        o.config = Some(path);
        o.alpha = Some(0.5);
        let cfg = resolve_config(&o).map_err(|e| e.message).unwrap();
        assert!((cfg.params.q - 2.0).abs() < 1e-15);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn grid_values_endpoints() {
        let g = grid_values((0.0, 1.0, 5));
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[4], 1.0);
        assert_eq!(grid_values((2.0, 9.0, 1)), vec![2.0]);
    }
}
