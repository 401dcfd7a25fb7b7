//! Experiment runner: reproduces the desk-scale checks from a flat
//! key=value config file and/or command-line flags, and writes CSV data
//! plus a JSON summary per run. Reruns with the same config and seed
//! produce byte-identical files.

use crate::convolution::{
    admissible_mesh, convergence_sweep, convolve, offdiagonal_mass, write_convergence_csv,
    ConvergenceRow, SweepOptions, SweepProbe,
};
use crate::error::{Error, Result};
use crate::fit::{log_grid, ls_line, loglog_order};
use crate::geometry::{ManifoldModel, Point};
use crate::kernels::{
    euclidean_kernel_r, expansion_remainder, fmt17, reference_kernel, reference_kernel_entry,
    CutoffProfile, OperatorSpec, TrigPolynomial,
};
use crate::laplace::{
    cut_locus_coefficient, expansion_report, brute_force_integral, CriticalManifold,
    CutLocusOptions, IntegrandSpec, RectDomain,
};
use crate::rng::SplitMix64;
use crate::transmutation::{
    cosine_transmute_check, riesz_identity_check, transmuted_kernel_matrix, write_check_csv,
    CheckRow,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Expand,
    Convolve,
    Transmute,
    Riesz,
    LaplaceDemo,
    CutLocus,
    Bounds,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Expand => "expand",
            Experiment::Convolve => "convolve",
            Experiment::Transmute => "transmute",
            Experiment::Riesz => "riesz",
            Experiment::LaplaceDemo => "laplace-demo",
            Experiment::CutLocus => "cutlocus",
            Experiment::Bounds => "bounds",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "expand" => Experiment::Expand,
            "convolve" => Experiment::Convolve,
            "transmute" => Experiment::Transmute,
            "riesz" => Experiment::Riesz,
            "laplace-demo" => Experiment::LaplaceDemo,
            "cutlocus" => Experiment::CutLocus,
            "bounds" => Experiment::Bounds,
            other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ManifoldModel,
    pub operator: OperatorSpec,
    pub nu: usize,
    pub tmin: f64,
    pub tmax: f64,
    pub tcount: usize,
    pub partitions: Vec<usize>,
    pub resolution: usize,
    pub safety: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ragged: bool,
    pub timings: bool,
}

fn parse_model(s: &str) -> Result<ManifoldModel> {
    let bad = || Error::Config(format!("bad model spec '{s}'"));
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "circle" => {
            let r: f64 = rest.parse().map_err(|_| bad())?;
            if r <= 0.0 {
                return Err(bad());
            }
            Ok(ManifoldModel::circle(r))
        }
        "torus" => {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(bad());
            }
            let l1: f64 = parts[0].parse().map_err(|_| bad())?;
            let l2: f64 = parts[1].parse().map_err(|_| bad())?;
            if l1 <= 0.0 || l2 <= 0.0 {
                return Err(bad());
            }
            Ok(ManifoldModel::torus(l1, l2))
        }
        "sphere" => {
            let r: f64 = rest.parse().map_err(|_| bad())?;
            if r <= 0.0 {
                return Err(bad());
            }
            Ok(ManifoldModel::sphere(r))
        }
        _ => Err(bad()),
    }
}

fn parse_operator(s: &str) -> Result<OperatorSpec> {
    if s == "laplace" {
        return Ok(OperatorSpec::laplace());
    }
    if let Some(rest) = s.strip_prefix("schroedinger") {
        // coefficients a0,a1,b1,a2,b2,...; bare "schroedinger" means cos(theta)
        let rest = rest.strip_prefix(':').unwrap_or("");
        if rest.is_empty() {
            return Ok(OperatorSpec::schroedinger(TrigPolynomial::cosine()));
        }
        let vals: Vec<f64> = rest
            .split(',')
            .map(|p| {
                p.parse()
                    .map_err(|_| Error::Config(format!("bad potential coefficient '{p}'")))
            })
            .collect::<Result<_>>()?;
        let a0 = vals[0];
        let mut cos_coeffs = Vec::new();
        let mut sin_coeffs = Vec::new();
        for pair in vals[1..].chunks(2) {
            cos_coeffs.push(pair[0]);
            sin_coeffs.push(pair.get(1).copied().unwrap_or(0.0));
        }
        return Ok(OperatorSpec::schroedinger(TrigPolynomial::new(
            a0, cos_coeffs, sin_coeffs,
        )));
    }
    Err(Error::Config(format!("bad operator spec '{s}'")))
}

const CONFIG_KEYS: &[&str] = &[
    "experiment",
    "model",
    "operator",
    "nu",
    "tmin",
    "tmax",
    "tcount",
    "partitions",
    "resolution",
    "safety",
    "seed",
    "out",
    "ragged",
    "timings",
];

fn default_pairs() -> BTreeMap<String, String> {
    let mut kv = BTreeMap::new();
    kv.insert("model".into(), "circle:1".into());
    kv.insert("operator".into(), "laplace".into());
    kv.insert("nu".into(), "1".into());
    kv.insert("tmin".into(), "1e-3".into());
    kv.insert("tmax".into(), "1e-1".into());
    kv.insert("tcount".into(), "7".into());
    kv.insert("partitions".into(), "8,16,32,64".into());
    kv.insert("resolution".into(), "64".into());
    kv.insert("safety".into(), "0.9".into());
    kv.insert("seed".into(), "42".into());
    kv.insert("out".into(), "out".into());
    kv.insert("ragged".into(), "false".into());
    kv.insert("timings".into(), "false".into());
    kv
}

fn parse_config_file(path: &Path, kv: &mut BTreeMap<String, String>) -> Result<()> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        kv.insert(key.to_string(), value.trim().to_string());
    }
    Ok(())
}

/// Parse flags of the form `--key value`; `--config FILE` loads the file
/// first, then remaining flags override it, which overrides the defaults.
pub fn parse_args(args: &[String]) -> Result<ExperimentConfig> {
    let mut kv = default_pairs();
    // first pass: locate --config
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            let path = args
                .get(i + 1)
                .ok_or_else(|| Error::Config("--config needs a file".into()))?;
            parse_config_file(Path::new(path), &mut kv)?;
        }
        i += 1;
    }
    // second pass: flags
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected a --flag, got '{arg}'")))?;
        if key == "config" {
            i += 2;
            continue;
        }
        if key == "ragged" || key == "timings" {
            // boolean flags may omit the value
            if let Some(next) = args.get(i + 1) {
                if !next.starts_with("--") {
                    kv.insert(key.to_string(), next.clone());
                    i += 2;
                    continue;
                }
            }
            kv.insert(key.to_string(), "true".into());
            i += 1;
            continue;
        }
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown flag '--{key}'")));
        }
        let value = args
            .get(i + 1)
            .ok_or_else(|| Error::Config(format!("flag '--{key}' needs a value")))?;
        kv.insert(key.to_string(), value.clone());
        i += 2;
    }
    build_config(&kv)
}

fn build_config(kv: &BTreeMap<String, String>) -> Result<ExperimentConfig> {
    let get = |k: &str| kv.get(k).cloned().unwrap_or_default();
    let experiment = Experiment::parse(
        kv.get("experiment")
            .ok_or_else(|| Error::Config("missing required key 'experiment'".into()))?,
    )?;
    let parse_f64 = |k: &str| -> Result<f64> {
        get(k)
            .parse()
            .map_err(|_| Error::Config(format!("bad numeric value for '{k}'")))
    };
    let parse_usize = |k: &str| -> Result<usize> {
        get(k)
            .parse()
            .map_err(|_| Error::Config(format!("bad integer value for '{k}'")))
    };
    let parse_bool = |k: &str| -> Result<bool> {
        match get(k).as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(Error::Config(format!("bad boolean '{other}' for '{k}'"))),
        }
    };
    let partitions: Vec<usize> = get("partitions")
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad partition size '{p}'")))
        })
        .collect::<Result<_>>()?;
    let model = parse_model(&get("model"))?;
    let operator = parse_operator(&get("operator"))?;
    operator.validate_on(&model).map_err(|e| Error::Config(e.to_string()))?;
    let tmin = parse_f64("tmin")?;
    let tmax = parse_f64("tmax")?;
    if !(tmin > 0.0 && tmax > tmin) {
        return Err(Error::Config("need 0 < tmin < tmax".into()));
    }
    let safety = parse_f64("safety")?;
    if !(0.0 < safety && safety < 1.0) {
        return Err(Error::Config("safety must lie in (0,1)".into()));
    }
    Ok(ExperimentConfig {
        experiment,
        model,
        operator,
        nu: parse_usize("nu")?,
        tmin,
        tmax,
        tcount: parse_usize("tcount")?.max(2),
        partitions,
        resolution: parse_usize("resolution")?,
        safety,
        seed: parse_usize("seed")? as u64,
        out_dir: PathBuf::from(get("out")),
        ragged: parse_bool("ragged")?,
        timings: parse_bool("timings")?,
    })
}

#[derive(Debug, Serialize)]
struct Summary {
    experiment: String,
    params: BTreeMap<String, String>,
    results: Value,
    pass: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub pass: bool,
    pub summary_path: PathBuf,
    pub files: Vec<PathBuf>,
}

fn params_map(config: &ExperimentConfig) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("model".into(), config.model.name());
    p.insert("operator".into(), config.operator.label());
    p.insert("nu".into(), config.nu.to_string());
    p.insert("tmin".into(), format!("{}", config.tmin));
    p.insert("tmax".into(), format!("{}", config.tmax));
    p.insert("tcount".into(), config.tcount.to_string());
    p.insert(
        "partitions".into(),
        config
            .partitions
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    p.insert("resolution".into(), config.resolution.to_string());
    p.insert("safety".into(), format!("{}", config.safety));
    p.insert("seed".into(), config.seed.to_string());
    p.insert("ragged".into(), config.ragged.to_string());
    p
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(contents)?;
    w.flush()?;
    Ok(())
}

/// Run one experiment; writes CSV report files plus `summary.json` into the
/// configured output directory, deterministically for a fixed config.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    fs::create_dir_all(&config.out_dir)?;
    let (results, pass, files) = match config.experiment {
        Experiment::Expand => run_expand(config)?,
        Experiment::Convolve => run_convolve(config)?,
        Experiment::Transmute => run_transmute(config)?,
        Experiment::Riesz => run_riesz(config)?,
        Experiment::LaplaceDemo => run_laplace_demo(config)?,
        Experiment::CutLocus => run_cutlocus(config)?,
        Experiment::Bounds => run_bounds(config)?,
    };
    let summary = Summary {
        experiment: config.experiment.name().to_string(),
        params: params_map(config),
        results,
        pass,
    };
    let summary_path = config.out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write_file(&summary_path, text.as_bytes())?;
    Ok(RunOutput { pass, summary_path, files })
}

/// Seeded sample pair at a moderate fraction of the injectivity radius.
fn sample_pair(config: &ExperimentConfig) -> (Point, Point, f64) {
    let mut rng = SplitMix64::new(config.seed);
    let model = &config.model;
    let x = model.random_point(&mut rng);
    let d = 0.5f64.min(0.5 * model.injectivity_radius());
    let chart = model.chart_at(&x);
    let y = match model.dim() {
        1 => chart.map(&[d]),
        _ => {
            let psi = rng.uniform(0.0, 2.0 * PI);
            chart.map(&[d * psi.cos(), d * psi.sin()])
        }
    };
    (x, y, model.distance(&x, &y))
}

fn run_expand(config: &ExperimentConfig) -> Result<(Value, bool, Vec<PathBuf>)> {
    let (x, y, d) = sample_pair(config);
    let ts = log_grid(config.tmin, config.tmax, config.tcount);
    let mut csv = String::from("t,remainder\n");
    let mut remainders = Vec::new();
    for &t in &ts {
        let r = expansion_remainder(&config.model, &config.operator, config.nu, t, &x, &y)?;
        remainders.push(r.abs());
        csv.push_str(&format!("{},{}\n", fmt17(t), fmt17(r)));
    }
    let max_remainder = remainders.iter().cloned().fold(0.0f64, f64::max);
    let expected = (config.nu + 1) as f64;
    // flat models with the pure Laplacian have an exact truncated series;
    // the remainder sits at the wrap-around image scale and carries no
    // power-law to fit
    let degenerate = max_remainder < 1e-20;
    let order = if degenerate {
        Value::Null
    } else {
        Value::from(loglog_order(&ts, &remainders))
    };
    let pass = if degenerate {
        true
    } else {
        (order.as_f64().unwrap() - expected).abs() <= 0.25
    };
    let path = config.out_dir.join("expand.csv");
    write_file(&path, csv.as_bytes())?;
    let results = json!({
        "pair_distance": d,
        "fitted_order": order,
        "expected_order": expected,
        "max_remainder": max_remainder,
        "degenerate_expansion": degenerate,
    });
    Ok((results, pass, vec![path]))
}

fn run_convolve(config: &ExperimentConfig) -> Result<(Value, bool, Vec<PathBuf>)> {
    let grid = Arc::new(config.model.build_grid(config.resolution)?);
    let profile = CutoffProfile::default_for(&config.model);
    let probe = match config.model {
        ManifoldModel::Sphere2 { .. } => SweepProbe::FromNode(0),
        _ => SweepProbe::AllPairs,
    };
    let opts = SweepOptions {
        safety: config.safety,
        probe,
        ragged: if config.ragged { Some(0.2) } else { None },
        seed: config.seed,
    };
    let sweep = convergence_sweep(
        &config.model,
        &config.operator,
        config.nu,
        &profile,
        config.tmax,
        &config.partitions,
        &grid,
        &opts,
    )?;
    let rows: Vec<ConvergenceRow> = sweep
        .rows
        .iter()
        .map(|r| ConvergenceRow {
            runtime_ms: if config.timings { r.runtime_ms } else { 0.0 },
            ..r.clone()
        })
        .collect();
    let mut buf = Vec::new();
    write_convergence_csv(&rows, &mut buf).map_err(|e| Error::Io(e.to_string()))?;
    let path = config.out_dir.join("convergence.csv");
    write_file(&path, &buf)?;
    let monotone = sweep
        .rows
        .windows(2)
        .all(|w| w[1].rel_error_vs_p_delta < w[0].rel_error_vs_p_delta);
    let pass = if config.nu >= 1 {
        (sweep.fitted_order - config.nu as f64).abs() <= 0.3 && monotone
    } else {
        true
    };
    let results = json!({
        "fitted_order": sweep.fitted_order,
        "monotone": monotone,
        "admissible_mesh": admissible_mesh(&config.model, config.safety),
        "rows": sweep.rows.iter().map(|r| json!({
            "mesh": r.mesh,
            "sup_error": r.sup_error,
            "rel_pDelta": r.rel_error_vs_p_delta,
            "rel_e": r.rel_error_vs_e,
        })).collect::<Vec<_>>(),
    });
    Ok((results, pass, vec![path]))
}

fn run_transmute(config: &ExperimentConfig) -> Result<(Value, bool, Vec<PathBuf>)> {
    let mut rows = Vec::new();
    let mut worst_cosine = 0.0f64;
    let mut lambdas = vec![0.0];
    lambdas.extend(log_grid(1e-2, 1e3, 13));
    for &lambda in &lambdas {
        for &t in &log_grid(1e-3, 1.0, 5) {
            let (q, e) = cosine_transmute_check(lambda, t)?;
            worst_cosine = worst_cosine.max((q - e).abs() / e.max(1.0));
            rows.push(CheckRow { case: "cosine".into(), param1: lambda, param2: t, lhs: q, rhs: e });
        }
    }
    // kernel reconstructions on the circle
    let circle = ManifoldModel::circle(1.0);
    let grid = Arc::new(circle.build_grid(config.resolution)?);
    let mut kernel_sup = 0.0f64;
    for (op, t) in [
        (OperatorSpec::laplace(), 0.2),
        (OperatorSpec::schroedinger(TrigPolynomial::cosine()), 0.5),
    ] {
        let reference = reference_kernel(&circle, &op, t, &grid)?;
        let trans = transmuted_kernel_matrix(&circle, &op, t, &grid)?;
        let mut sup = 0.0f64;
        for (a, b) in trans.values.iter().zip(&reference.values) {
            sup = sup.max((a - b).abs());
        }
        kernel_sup = kernel_sup.max(sup);
        rows.push(CheckRow {
            case: format!("kernel-{}", op.label()),
            param1: t,
            param2: grid.len() as f64,
            lhs: sup,
            rhs: 1e-7,
        });
    }
    let mut buf = Vec::new();
    write_check_csv(&rows, &mut buf).map_err(|e| Error::Io(e.to_string()))?;
    let path = config.out_dir.join("transmute.csv");
    write_file(&path, &buf)?;
    let pass = worst_cosine <= 1e-8 && kernel_sup <= 1e-7;
    let results = json!({
        "max_cosine_error": worst_cosine,
        "max_kernel_sup_error": kernel_sup,
    });
    Ok((results, pass, vec![path]))
}

fn run_riesz(config: &ExperimentConfig) -> Result<(Value, bool, Vec<PathBuf>)> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for j in 1..=3usize {
        for &r in &[0.0, 0.5, 1.0, 2.0] {
            for &t in &[0.1, 0.5, 1.0] {
                let (lhs, rhs) = riesz_identity_check(j, t, r)?;
                if rhs.abs() > 1e-250 {
                    worst = worst.max((lhs - rhs).abs() / rhs.abs());
                }
                rows.push(CheckRow {
                    case: format!("riesz-{j}"),
                    param1: r,
                    param2: t,
                    lhs,
                    rhs,
                });
            }
        }
    }
    let mut buf = Vec::new();
    write_check_csv(&rows, &mut buf).map_err(|e| Error::Io(e.to_string()))?;
    let path = config.out_dir.join("riesz.csv");
    write_file(&path, &buf)?;
    let pass = worst < 1e-6;
    Ok((json!({ "max_rel_err": worst }), pass, vec![path]))
}

fn run_laplace_demo(config: &ExperimentConfig) -> Result<(Value, bool, Vec<PathBuf>)> {
    // Gaussian toy: exact 1/2 at every t
    let gauss = IntegrandSpec::new(
        RectDomain::new(vec![-12.0, -12.0], vec![12.0, 12.0]),
        |v: &[f64]| v[0] * v[0] + v[1] * v[1],
        |_t: f64, _v: &[f64]| 1.0,
    );
    let gauss_gamma = CriticalManifold::point(vec![0.0, 0.0]);
    let gauss_report = expansion_report(&gauss, &gauss_gamma, &[1e-3, 1e-2, 0.1, 1.0])?;
    let gauss_lead = gauss_report.components[0].coeff_leading;
    let mut gauss_exact = true;
    for &t in &[1e-3, 1e-2, 0.1, 1.0] {
        let i = brute_force_integral(&gauss, t)?;
        gauss_exact &= (i - 0.5).abs() <= 1e-12;
    }

    // circular valley in polar coordinates
    let valley = IntegrandSpec::new(
        RectDomain::new(vec![0.2, 0.0], vec![2.0, 2.0 * PI]),
        |v: &[f64]| (v[0] - 1.0) * (v[0] - 1.0),
        |_t: f64, _v: &[f64]| 1.0,
    )
    .with_measure(|v: &[f64]| v[0]);
    let valley_gamma = CriticalManifold::closed_curve(24, |psi| vec![1.0, psi]);
    let valley_report = expansion_report(&valley, &valley_gamma, &[1e-3, 2e-3, 4e-3])?;

    // decay for amplitudes supported away from the critical set
    let bump = IntegrandSpec::new(
        RectDomain::new(vec![-3.0], vec![3.0]),
        |v: &[f64]| v[0] * v[0],
        |_t: f64, v: &[f64]| {
            let s = (v[0].abs() - 1.0) / 0.5;
            if (0.0..1.0).contains(&s) {
                (-1.0 / (s * (1.0 - s)).max(1e-300)).exp()
            } else {
                0.0
            }
        },
    );
    let ts = [0.05, 0.04, 0.03, 0.02];
    let logs: Vec<f64> = ts
        .iter()
        .map(|&t| brute_force_integral(&bump, t).map(|v| v.ln()))
        .collect::<Result<_>>()?;
    let inv_t: Vec<f64> = ts.iter().map(|&t| 1.0 / t).collect();
    let (_, decay_slope) = ls_line(&inv_t, &logs);

    let mut files = Vec::new();
    for (name, report) in [
        ("laplace_gaussian.csv", &gauss_report),
        ("laplace_valley.csv", &valley_report),
    ] {
        let mut buf = Vec::new();
        report.write_csv(&mut buf).map_err(|e| Error::Io(e.to_string()))?;
        let path = config.out_dir.join(name);
        write_file(&path, &buf)?;
        files.push(path);
    }
    let table_path = config.out_dir.join("laplace_tables.txt");
    write_file(
        &table_path,
        format!(
            "gaussian toy\n{}\nvalley toy\n{}",
            gauss_report.render_table(),
            valley_report.render_table()
        )
        .as_bytes(),
    )?;
    files.push(table_path);

    let valley_rel = valley_report.components[0].rel_err;
    let pass = gauss_exact
        && (gauss_lead - 0.5).abs() <= 1e-10
        && valley_rel < 0.01
        && decay_slope < 0.0;
    let results = json!({
        "gaussian_leading": gauss_lead,
        "gaussian_exact_all_t": gauss_exact,
        "valley_leading": valley_report.components[0].coeff_leading,
        "valley_fitted": valley_report.components[0].coeff_fitted,
        "valley_rel_err": valley_rel,
        "decay_slope": decay_slope,
    });
    Ok((results, pass, files))
}

fn antipodal_pair(model: &ManifoldModel) -> (Point, Point) {
    match model {
        ManifoldModel::Circle { .. } => (Point::angle(0.0), Point::angle(PI)),
        ManifoldModel::Sphere2 { .. } => (Point::sphere(0.0, 0.0), Point::sphere(PI, 0.0)),
        ManifoldModel::FlatTorus2 { lengths } => {
            (Point::uv(0.0, 0.0), Point::uv(0.5 * lengths[0], 0.5 * lengths[1]))
        }
    }
}

fn run_cutlocus(config: &ExperimentConfig) -> Result<(Value, bool, Vec<PathBuf>)> {
    use crate::convolution::Partition;
    let model = &config.model;
    let op = &config.operator;
    let (x, y) = antipodal_pair(model);
    let steps = config.partitions.first().copied().unwrap_or(8);
    let partition = Partition::equidistant(1.0, steps)?;
    let comps = cut_locus_coefficient(model, op, &x, &y, &partition, config.nu, &CutLocusOptions::default())?;
    let family_dim = comps.iter().map(|c| c.dim).max().unwrap_or(0);
    let total: f64 = comps.iter().map(|c| c.coefficient).sum();
    // spectral extrapolation of (4 pi t)^{d/2} p/e as t -> 0
    let ts = log_grid(config.tmin, config.tmax, config.tcount);
    let qs: Vec<f64> = ts
        .iter()
        .map(|&t| crate::laplace::scaled_kernel_ratio(model, op, t, &x, &y, family_dim))
        .collect::<Result<_>>()?;
    let (fitted_total, _) = ls_line(&ts, &qs);
    let rel = (fitted_total - total).abs() / total.abs().max(1e-300);
    // per-component fitted share: components of a symmetric pair are equal
    let mut csv = String::from("component,dim,coeff_leading,coeff_fitted,rel_err\n");
    for (i, c) in comps.iter().enumerate() {
        let share = fitted_total * c.coefficient / total;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            i,
            c.dim,
            fmt17(c.coefficient),
            fmt17(share),
            fmt17(rel)
        ));
    }
    let path = config.out_dir.join("cutlocus.csv");
    write_file(&path, csv.as_bytes())?;
    let pass = rel <= 0.05;
    let results = json!({
        "components": comps.iter().map(|c| json!({"dim": c.dim, "coefficient": c.coefficient})).collect::<Vec<_>>(),
        "total_coefficient": total,
        "spectral_fitted": fitted_total,
        "rel_err": rel,
    });
    Ok((results, pass, vec![path]))
}

fn run_bounds(config: &ExperimentConfig) -> Result<(Value, bool, Vec<PathBuf>)> {
    let model = &config.model;
    let op = OperatorSpec::laplace();
    let grid = Arc::new(model.build_grid(config.resolution)?);
    let n = grid.len();
    let dim = model.dim();
    let mut csv = String::from("check,model,param,value,threshold,pass\n");
    let push_row = |csv: &mut String, check: &str, param: f64, value: f64, thr: f64, ok: bool| {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            check,
            model.name(),
            fmt17(param),
            fmt17(value),
            fmt17(thr),
            ok
        ));
    };

    // normalization and symmetry of the reference kernel
    let mut norm_dev = 0.0f64;
    let mut sym_dev = 0.0f64;
    for &t in &[0.25, 0.5, 1.0] {
        let km = reference_kernel(model, &op, t, &grid)?;
        for i in 0..n {
            let mass: f64 = (0..n).map(|j| km.get(i, j) * grid.weights[j]).sum();
            norm_dev = norm_dev.max((mass - 1.0).abs());
        }
        sym_dev = sym_dev.max(km.max_asymmetry());
    }
    let norm_ok = norm_dev <= 1e-8;
    let sym_ok = sym_dev <= 1e-10;
    push_row(&mut csv, "normalization", 0.0, norm_dev, 1e-8, norm_ok);
    push_row(&mut csv, "symmetry", 0.0, sym_dev, 1e-10, sym_ok);

    // Chapman-Kolmogorov on the grid (measured, reported)
    let t_ck = 0.5;
    let s_ck = 0.2;
    let a = reference_kernel(model, &op, s_ck, &grid)?;
    let b = reference_kernel(model, &op, t_ck - s_ck, &grid)?;
    let ab = convolve(&a, &b, &grid)?;
    let direct = reference_kernel(model, &op, t_ck, &grid)?;
    let mut ck_dev = 0.0f64;
    for (x, y) in ab.values.iter().zip(&direct.values) {
        ck_dev = ck_dev.max((x - y).abs() / y.abs().max(1e-300));
    }
    let ck_ok = ck_dev <= 1e-6;
    push_row(&mut csv, "chapman_kolmogorov", t_ck, ck_dev, 1e-6, ck_ok);

    // semigroup domination for the cosine potential (circle only)
    let mut dom_dev: Option<f64> = None;
    if matches!(model, ManifoldModel::Circle { .. }) {
        let potential = TrigPolynomial::cosine();
        let vmin = potential.min_value();
        let op_v = OperatorSpec::schroedinger(potential);
        let mut worst = f64::NEG_INFINITY;
        for &t in &[0.05, 0.1, 0.5, 1.0] {
            let pv = reference_kernel(model, &op_v, t, &grid)?;
            let pd = reference_kernel(model, &op, t, &grid)?;
            let bound = (-t * vmin).exp();
            for (lv, ld) in pv.values.iter().zip(&pd.values) {
                worst = worst.max(lv - bound * ld);
            }
        }
        dom_dev = Some(worst);
        push_row(&mut csv, "domination", 0.0, worst, 1e-9, worst <= 1e-9);
    }

    // Gaussian bound envelopes: fitted constants for eps <= p/e <= C envelope
    let mut eps_fit = f64::INFINITY;
    let mut c_fit = 0.0f64;
    for &t in &log_grid(1e-3, 1.0, 5) {
        let ratios: Vec<f64> = (0..n)
            .map(|i| -> Result<f64> {
                let mut worst_local = f64::INFINITY;
                for j in 0..n {
                    let p = reference_kernel_entry(model, &op, t, &grid.nodes[i], &grid.nodes[j])?;
                    let e = euclidean_kernel_r(
                        dim,
                        t,
                        model.distance(&grid.nodes[i], &grid.nodes[j]),
                    )?;
                    let ratio = p / e;
                    worst_local = worst_local.min(ratio);
                    let envelope =
                        ratio * t.powi(dim as i32 + 1) * (4.0 * PI * t).powf(-(dim as f64) / 2.0);
                    if envelope > c_fit {
                        c_fit = envelope;
                    }
                }
                Ok(worst_local)
            })
            .collect::<Result<_>>()?;
        for r in ratios {
            eps_fit = eps_fit.min(r);
        }
    }
    let eps_ok = eps_fit > 0.0;
    push_row(&mut csv, "gaussian_lower_eps", 0.0, eps_fit, 0.0, eps_ok);
    push_row(&mut csv, "gaussian_upper_C", 0.0, c_fit, f64::INFINITY, true);

    // off-diagonal mass decay rate (reported)
    let sep = 0.5 * model.injectivity_radius();
    let t_od = 0.1;
    let ds = t_od * admissible_mesh(model, 0.5) / 2.0;
    let od = offdiagonal_mass(model, t_od, 0.3 * t_od, 0.3 * t_od + ds, sep, &grid)?;
    let od_rate = if od > 0.0 {
        od.ln() / (-sep * sep / (4.0 * ds))
    } else {
        f64::INFINITY
    };
    push_row(&mut csv, "offdiagonal_decay_rate", sep, od_rate, 0.5, od_rate >= 0.5);

    let path = config.out_dir.join("bounds.csv");
    write_file(&path, csv.as_bytes())?;
    let pass = norm_ok && sym_ok && ck_ok && eps_ok && dom_dev.is_none_or(|d| d <= 1e-9);
    let results = json!({
        "normalization_dev": norm_dev,
        "symmetry_dev": sym_dev,
        "chapman_kolmogorov_dev": ck_dev,
        "domination_dev": dom_dev,
        "gaussian_lower_eps": eps_fit,
        "gaussian_upper_C": c_fit,
        "offdiagonal_decay_rate": od_rate,
    });
    Ok((results, pass, vec![path]))
}
