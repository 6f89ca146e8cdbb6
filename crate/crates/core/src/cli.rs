//! The `rough-mild` commands. Each writes human-readable progress to `log` and returns
//! whether the numerical work succeeded; argument parsing lives in the binary.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, ModelKind, RunConfig};
use crate::error::{Error, Result};
use crate::linalg::dist;
use crate::mild::{continue_solution, solve_with_halving, SolutionPath, SolverReport};
use crate::paths::{fbm_generate, holder_norm, p_variation, read_path_csv, write_path_csv, SampledPath};
use crate::verify::{run_suite, Suite};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "ROUGH_MILD_OUT";

const DEFAULT_OUT: &str = "rough-mild-out";

/// Largest allowed `max_j ‖u_{t_j} − P_{t_j}u₀‖ / max(1, ‖u₀‖)` for the self-test.
const SELF_TEST_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Divergence, a failed audit or a failed self-test.
    NumericalFailure,
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub model: Option<ModelKind>,
    pub hurst: Option<f64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
}

/// Loads the config file (or the defaults) and applies `o` on top.
pub fn resolve_config(o: &Overrides) -> Result<RunConfig> {
    let mut c = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = o.seed {
        c.seed = v;
    }
    if let Some(v) = o.model {
        c.model = v;
    }
    if let Some(v) = o.hurst {
        c.hurst = v;
    }
    if let Some(v) = o.n {
        c.n = v;
    }
    if let Some(v) = o.tol {
        c.tol = v;
    }
    c.validate()?;
    Ok(c)
}

/// `--out`, then the environment variable, then the config, then `rough-mild-out`.
pub fn output_dir(cli: Option<&Path>, env: Option<&str>, config: &RunConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Process exit code for an error: 2 for usage and configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Argument(_) => 2,
        _ => 1,
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    model: String,
    seed: u64,
    status: &'static str,
    failed_segment: Option<usize>,
    final_time: Option<f64>,
    solution_norm: Option<f64>,
    self_test_deviation: Option<f64>,
    segments: &'a [SolverReport],
}

impl RunReport<'_> {
    fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.16e}"));
        let mut s = format!("model = {}\nseed = {}\nstatus = {}\n", self.model, self.seed, self.status);
        s.push_str(&format!(
            "failed_segment = {}\n",
            self.failed_segment.map_or("none".to_string(), |i| i.to_string())
        ));
        s.push_str(&format!("final_time = {}\n", opt(self.final_time)));
        s.push_str(&format!("solution_norm = {}\n", opt(self.solution_norm)));
        s.push_str(&format!("self_test_deviation = {}\n", opt(self.self_test_deviation)));
        for (i, r) in self.segments.iter().enumerate() {
            s.push_str(&format!("\n[segment {i}]\n"));
            s.push_str(&r.to_text());
        }
        s
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// `max_j ‖u_{t_j} − P_{t_j} u₀‖ / max(1, ‖u₀‖)`.
fn free_evolution_deviation(config: &RunConfig, path: &SampledPath) -> Result<f64> {
    let spec = config.build_spec()?;
    let scale = spec.u0.norm().max(1.0);
    let mut worst = 0.0f64;
    for j in 0..=path.n_cells() {
        let p = spec.op.semigroup_apply(path.time(j), &spec.u0.0)?;
        worst = worst.max(dist(path.value(j), &p.0) / scale);
    }
    Ok(worst)
}

/// Solves the configured model and writes `manifest.cfg`, `report.txt` and, per the
/// configured formats, `trajectory.csv` and `report.json` into `out`. The reports are
/// written even when the iteration diverges.
pub fn cmd_simulate(config: &RunConfig, out: &Path, log: &mut dyn Write) -> Result<Status> {
    config.validate_for_simulate()?;
    let spec = config.build_spec()?;
    fs::create_dir_all(out)?;
    fs::write(out.join("manifest.cfg"), config.to_manifest())?;

    let outcome: Result<(SolutionPath, Vec<SolverReport>)> = if config.segments == 1 {
        solve_with_halving(&spec, config.horizon, config.tol, config.max_iter).map(|(s, r)| (s, vec![r]))
    } else {
        continue_solution(
            &spec,
            config.segments,
            config.horizon / config.segments as f64,
            config.tol,
            config.max_iter,
        )
    };

    let mut report = RunReport {
        model: config.model.to_string(),
        seed: config.seed,
        status: "converged",
        failed_segment: None,
        final_time: None,
        solution_norm: None,
        self_test_deviation: None,
        segments: &[],
    };
    let diverged_reports;
    let reports;
    let status = match outcome {
        Ok((sol, r)) => {
            reports = r;
            report.segments = &reports;
            report.final_time = Some(sol.path.horizon());
            report.solution_norm = Some(sol.norm.total);
            if config.formats.contains(&Format::Csv) {
                let mut w = create(&out.join("trajectory.csv"))?;
                write_path_csv(&sol.path, &mut w)?;
                w.flush()?;
            }
            let mut status = Status::Success;
            if config.self_test {
                let dev = free_evolution_deviation(config, &sol.path)?;
                report.self_test_deviation = Some(dev);
                if dev > SELF_TEST_TOL {
                    report.status = "self-test-failed";
                    status = Status::NumericalFailure;
                }
            }
            status
        }
        Err(Error::Diverged { report: r, segment }) => {
            diverged_reports = vec![*r];
            report.segments = &diverged_reports;
            report.status = "diverged";
            report.failed_segment = segment;
            Status::NumericalFailure
        }
        Err(e) => return Err(e),
    };

    if config.formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
        fs::write(out.join("report.json"), json + "\n")?;
    }
    let text = report.to_text();
    fs::write(out.join("report.txt"), &text)?;
    writeln!(log, "{text}")?;
    writeln!(log, "outputs written to {}", out.display())?;
    Ok(status)
}

/// Writes `fbm.csv` (the configured `hurst`, `n`, `horizon`, `noise_dim`, `seed`) and prints
/// its discrete Hölder norms at each of `alphas`.
pub fn cmd_fbm(config: &RunConfig, out: &Path, alphas: &[f64], log: &mut dyn Write) -> Result<Status> {
    let path = fbm_generate(config.hurst, config.n, config.horizon, config.noise_dim, config.seed)?;
    fs::create_dir_all(out)?;
    let file = out.join("fbm.csv");
    let mut w = create(&file)?;
    write_path_csv(&path, &mut w)?;
    w.flush()?;
    writeln!(log, "wrote {} ({} rows, hurst {})", file.display(), path.n_points(), config.hurst)?;
    for &a in alphas {
        let h = holder_norm(&path, a, path.full_window())?;
        writeln!(log, "holder alpha = {a}: {:.6e}", h.value)?;
    }
    Ok(Status::Success)
}

/// Discrete Hölder norm, p-variation and the embedding `‖w‖_{1/α-var} ≤ ‖w‖_{α-Höl} T^α`.
pub fn cmd_norms(file: &Path, alpha: f64, p: f64, log: &mut dyn Write) -> Result<Status> {
    let f = fs::File::open(file).map_err(|e| Error::config(format!("cannot open {}: {e}", file.display())))?;
    let path = read_path_csv(BufReader::new(f))?;
    let win = path.full_window();
    let holder = holder_norm(&path, alpha, win)?.value;
    let pvar = p_variation(&path, p, win)?;
    let emb_lhs = p_variation(&path, 1.0 / alpha, win)?;
    let emb_rhs = holder * path.horizon().powf(alpha);
    let ok = emb_lhs <= emb_rhs * (1.0 + 1e-12);
    writeln!(log, "holder alpha = {alpha}: {holder:.6e}")?;
    writeln!(log, "p-variation p = {p}: {pvar:.6e}")?;
    writeln!(
        log,
        "embedding: {}-variation {emb_lhs:.6e} <= holder * T^alpha {emb_rhs:.6e}: {}",
        1.0 / alpha,
        if ok { "satisfied" } else { "violated" }
    )?;
    Ok(if ok { Status::Success } else { Status::NumericalFailure })
}

/// Runs a verification suite, one line per check and a failure list at the end.
pub fn cmd_verify(suite: Suite, config: &RunConfig, log: &mut dyn Write) -> Result<Status> {
    let results = run_suite(suite, config);
    for r in &results {
        writeln!(log, "{r}")?;
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    if failed.is_empty() {
        writeln!(log, "all {} checks passed", results.len())?;
        return Ok(Status::Success);
    }
    writeln!(log, "{} of {} checks failed:", failed.len(), results.len())?;
    for r in failed {
        writeln!(log, "  {}/{}", r.suite, r.name)?;
    }
    Ok(Status::NumericalFailure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_precedence() {
        let mut c = RunConfig::default();
        assert_eq!(output_dir(None, None, &c), PathBuf::from(DEFAULT_OUT));
        c.out = Some("cfg".into());
        assert_eq!(output_dir(None, None, &c), PathBuf::from("cfg"));
        assert_eq!(output_dir(None, Some("env"), &c), PathBuf::from("env"));
        assert_eq!(output_dir(Some(Path::new("cli")), Some("env"), &c), PathBuf::from("cli"));
    }

    #[test]
    fn overrides_apply_and_validate() {
        let o = Overrides {
            seed: Some(9),
            hurst: Some(0.8),
            ..Overrides::default()
        };
        let c = resolve_config(&o).unwrap();
        assert_eq!((c.seed, c.hurst), (9, 0.8));
        let bad = Overrides {
            tol: Some(-1.0),
            ..Overrides::default()
        };
        assert_eq!(exit_code(&resolve_config(&bad).unwrap_err()), 2);
    }

    #[test]
    fn self_test_matches_free_evolution() {
        let dir = tempfile::tempdir().unwrap();
        let c = RunConfig::parse("noise_amp = 0\ndisable_q = true\nself_test = true\nmodes = 8\nn = 64\n").unwrap();
        let mut log = Vec::new();
        assert_eq!(cmd_simulate(&c, dir.path(), &mut log).unwrap(), Status::Success);
        let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(text.contains("status = converged"), "{text}");
    }
}
