use std::io::Write;
use std::path::Path;

use covbreak::cusum::{run_test, LambdaSettings, TestConfig};
use covbreak::generators::{break_panel, simulate, Model, ModelSpec};
use covbreak::limit::{normal_coverage, normal_quantile, OmegaLaw, Statistic};
use covbreak::linalg::vech_len;
use covbreak::longrun::{BartlettConfig, BartlettWindow};
use covbreak::segment::{binary_segment, SegmentConfig};
use covbreak::study::{run_study, StudyDesign};
use covbreak::transforms::{all_pairs, center_log_returns, rolling_vol, TransformSpec};
use covbreak::Exec;
use serde::Serialize;

use crate::csvio::{ingest_csv, write_panel, CsvFormat};
use crate::error::{CliError, CliResult};
use crate::output::{self, Format};
use crate::{Command, CsvArgs, TestArgs, DEFAULT_SEED};

const TABLE_DIMS: [usize; 7] = [10, 15, 20, 50, 100, 200, 500];
const TABLE_PROBS: [f64; 3] = [0.90, 0.95, 0.99];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_unit_open(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must lie in (0, 1), got {v}")))
    }
}

fn format_of(args: &CsvArgs) -> CsvFormat {
    CsvFormat {
        delimiter: args.delimiter,
        header: args.header,
        labels: args.labels,
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))
        }
    }
}

fn lambda_settings(seed: Option<u64>, reps: usize, grid_points: usize) -> CliResult<LambdaSettings> {
    if reps == 0 {
        return Err(usage("--lambda-reps must be positive"));
    }
    if grid_points < 2 {
        return Err(usage("--grid-points must be at least 2"));
    }
    Ok(LambdaSettings {
        grid_points,
        replications: reps,
        seed: seed.unwrap_or(covbreak::limit::DEFAULT_SEED),
        ..LambdaSettings::default()
    })
}

fn test_config(args: &TestArgs, exec: Exec) -> CliResult<TestConfig> {
    check_unit_open("level", args.level)?;
    if let Some(delta) = args.delta {
        TransformSpec::new(delta).map_err(|e| usage(format!("--delta: {e}")))?;
    }
    let window: BartlettWindow = args.bartlett.parse().map_err(|e: covbreak::Error| usage(format!("--bartlett: {e}")))?;
    if let Some(r) = args.ridge {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(usage(format!("--ridge must be a nonnegative number, got {r}")));
        }
    }
    Ok(TestConfig {
        statistic: args.stat,
        level: args.level,
        center: !args.no_center,
        bartlett: BartlettConfig {
            window,
            ridge: args.ridge,
            ..BartlettConfig::default()
        },
        transform_delta: args.delta,
        lambda: lambda_settings(args.seed, args.lambda_reps, args.grid_points)?,
        exec,
    })
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    toml::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_pairs(specs: &[String], d: usize) -> CliResult<Vec<(usize, usize)>> {
    if specs.iter().any(|s| s == "all") {
        return Ok(all_pairs(d));
    }
    specs
        .iter()
        .map(|s| {
            let parts: Vec<&str> = s.split(',').map(str::trim).collect();
            let idx = |p: &str| -> CliResult<usize> {
                match p.parse::<usize>() {
                    Ok(i) if (1..=d).contains(&i) => Ok(i - 1),
                    _ => Err(usage(format!("--pairs: '{p}' is not a coordinate in 1..={d}"))),
                }
            };
            match parts.as_slice() {
                [k, l] => Ok((idx(k)?, idx(l)?)),
                _ => Err(usage(format!("--pairs expects 'all' or 'k,l', got '{s}'"))),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct QuantileRow {
    statistic: Statistic,
    /// `None` for the normal limit of the standardized law.
    vdim: Option<usize>,
    prob: f64,
    raw: f64,
    standardized: f64,
    /// `P(standardized law ≤ z_prob)`.
    normal_coverage: f64,
}

fn quantile_rows(
    stat: Statistic,
    vdims: &[usize],
    probs: &[f64],
    lambda: LambdaSettings,
    exec: Exec,
) -> CliResult<Vec<QuantileRow>> {
    let mut rows = Vec::new();
    for &vdim in vdims {
        let lambda_law = match stat {
            Statistic::Lambda => Some(lambda.law(vdim, exec)?),
            Statistic::Omega => None,
        };
        let omega_law = OmegaLaw::new(vdim)?;
        for &p in probs {
            let raw = match &lambda_law {
                Some(law) => law.quantile(p)?,
                None => omega_law.quantile(p)?,
            };
            rows.push(QuantileRow {
                statistic: stat,
                vdim: Some(vdim),
                prob: p,
                raw,
                standardized: stat.standardize(vdim, raw),
                normal_coverage: normal_coverage(stat, vdim, p, lambda_law.as_ref())?,
            });
        }
    }
    Ok(rows)
}

fn render_quantiles(rows: &[QuantileRow], format: Format) -> CliResult<String> {
    if format == Format::Json {
        return output::json(&rows);
    }
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.statistic.to_string(),
                r.vdim.map_or("inf".to_string(), |v| v.to_string()),
                r.prob.to_string(),
                if format == Format::Csv { r.raw.to_string() } else { format!("{:.4}", r.raw) },
                if format == Format::Csv { r.standardized.to_string() } else { format!("{:.2}", r.standardized) },
                if format == Format::Csv { r.normal_coverage.to_string() } else { format!("{:.2}", r.normal_coverage) },
            ]
        })
        .collect();
    output::rows_table(
        &["statistic", "vdim", "prob", "raw", "standardized", "normal_coverage"],
        table,
        format == Format::Csv,
    )
}

pub fn run(command: Command, exec: Exec) -> CliResult<()> {
    match command {
        Command::Test { input, test, format, out } => {
            let cfg = test_config(&test, exec)?;
            let panel = ingest_csv(&input.input, format_of(&input.csv))?;
            let report = run_test(&panel, &cfg)?;
            emit(out.as_deref(), &output::test_report(&report, format)?)
        }
        Command::Segment { input, test, min_len, max_depth, round_levels, format, out, tree } => {
            let cfg = SegmentConfig {
                test: test_config(&test, exec)?,
                min_len,
                max_depth,
                round_levels,
            };
            if cfg.min_len < covbreak::cusum::MIN_OBSERVATIONS {
                return Err(usage(format!(
                    "--min-len must be at least {}, got {min_len}",
                    covbreak::cusum::MIN_OBSERVATIONS
                )));
            }
            if cfg.max_depth == 0 {
                return Err(usage("--max-depth must be positive"));
            }
            for &l in &cfg.round_levels {
                check_unit_open("round-levels", l)?;
            }
            let panel = ingest_csv(&input.input, format_of(&input.csv))?;
            let report = binary_segment(&panel, &cfg)?;
            if let Some(path) = tree {
                emit(Some(&path), &output::json(&report)?)?;
            }
            emit(out.as_deref(), &output::segmentation(&report, format)?)
        }
        Command::Simulate { model, post, theta, n, burnin, seed, out, header, delimiter, allow_nonstationary } => {
            if n == 0 {
                return Err(usage("--n must be positive"));
            }
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let pre: ModelSpec = read_toml(&model)?;
            let panel = match post {
                Some(path) => {
                    check_unit_open("theta", theta)?;
                    let post: ModelSpec = read_toml(&path)?;
                    let pre = Model::new(&pre, allow_nonstationary)?;
                    let post = Model::new(&post, allow_nonstationary)?;
                    break_panel(&pre, &post, n, theta, burnin, seed)?
                }
                None if allow_nonstationary => Model::new(&pre, true)?.simulate(n, burnin, seed)?,
                None => simulate(&pre, n, burnin, seed)?,
            };
            let mut buf = Vec::new();
            write_panel(&mut buf, &panel, delimiter, header)?;
            emit(out.as_deref(), std::str::from_utf8(&buf).expect("utf-8"))
        }
        Command::Quantile { stat, vdim, d, prob, seed, lambda_reps, grid_points, format } => {
            let vdim = match (vdim, d) {
                (Some(v), _) if v > 0 => v,
                (None, Some(d)) if d > 0 => vech_len(d),
                _ => return Err(usage("give a positive --vdim or --d")),
            };
            for &p in &prob {
                check_unit_open("prob", p)?;
            }
            let lambda = lambda_settings(seed, lambda_reps, grid_points)?;
            let rows = quantile_rows(stat, &[vdim], &prob, lambda, exec)?;
            emit(None, &render_quantiles(&rows, format)?)
        }
        Command::Study { design, reps, seed, out, format } => {
            let mut design: StudyDesign = read_toml(&design)?;
            if let Some(r) = reps {
                design.replications = r;
            }
            if let Some(s) = seed {
                design.master_seed = s;
            }
            design.test.exec = exec;
            design.validate().map_err(|e| usage(e.to_string()))?;
            let result = run_study(&design)?;
            emit(out.as_deref(), &output::study(&result, format)?)
        }
        Command::Logreturns { prices, csv, out } => {
            let panel = ingest_csv(&prices, format_of(&csv))?;
            let returns = center_log_returns(&panel)?;
            let mut buf = Vec::new();
            write_panel(&mut buf, &returns, csv.delimiter, csv.header)?;
            emit(out.as_deref(), std::str::from_utf8(&buf).expect("utf-8"))
        }
        Command::Rollvol { input, window, pairs, out } => {
            if window == 0 {
                return Err(usage("--window must be positive"));
            }
            let panel = ingest_csv(&input.input, format_of(&input.csv))?;
            let pairs = parse_pairs(&pairs, panel.d())?;
            let series = rolling_vol(&panel, window, &pairs)?;
            emit(out.as_deref(), &output::rolling(&series)?)
        }
        Command::Tables { table, seed, lambda_reps, grid_points, format } => {
            let stats: Vec<Statistic> = match table.as_str() {
                "1" => vec![Statistic::Omega],
                "2" => vec![Statistic::Lambda],
                "all" => vec![Statistic::Omega, Statistic::Lambda],
                other => return Err(usage(format!("--table must be 1, 2 or all, got '{other}'"))),
            };
            let lambda = lambda_settings(seed, lambda_reps, grid_points)?;
            let mut rows = Vec::new();
            for stat in stats {
                rows.extend(quantile_rows(stat, &TABLE_DIMS, &TABLE_PROBS, lambda, exec)?);
                // the normal limit as the dimension grows
                for &p in &TABLE_PROBS {
                    rows.push(QuantileRow {
                        statistic: stat,
                        vdim: None,
                        prob: p,
                        raw: f64::INFINITY,
                        standardized: normal_quantile(p)?,
                        normal_coverage: p,
                    });
                }
            }
            emit(None, &render_quantiles(&rows, format)?)
        }
    }
}
