//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed (or polystability was
//! asserted and does not hold), 2 usage or input error.

use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::catalog;
use crate::character::hilbert_character;
use crate::error::{Error, Result};
use crate::io::{self, ConvergenceRowJson, DfReport, GitReport, LevelCount, PolytopeReport, WeightTableReport, XiReport, XiTableRow};
use crate::kempfness::{self, Stability, TorusRepPoint};
use crate::momentmap::{self, VerificationReport};
use crate::polytope::MomentPolytope;
use crate::rational::format_rational;
use crate::soliton::{self, convergence_rows, EquivariantWeightTable};
use crate::stats::loglog_slope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "ksoliton", version, about = "K-stability computations on toric Fano data")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-10, allow_hyphen_values = true)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 10)]
    pub m_max: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Built-in polytope: cp1, cp2, p1xp1, bl1cp2, bl2cp2, dp6.
    #[arg(long, global = true)]
    pub example: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertices, volume, barycenter and lattice counts up to --m-max.
    Polytope,
    /// Hilbert character at level --m.
    Character {
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Discrete versus continuum DF invariant, or an estimate from a weight table.
    Df {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,160")]
        m_list: Vec<u32>,
        /// Central-fiber weight table; uses levels 1..=--m-max.
        #[arg(long)]
        weight_table: Option<PathBuf>,
    },
    /// K-optimal vector with a convergence table for --lambda.
    Xi {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,160")]
        m_list: Vec<u32>,
    },
    /// Moment-map property on random reduced structures of S².
    VerifyMomentmap {
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
    },
    /// Index rules and pointwise identities on random compatible frames.
    VerifyAppendixb {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        dims: Vec<usize>,
        /// Replace A by a J-commuting matrix; the suite must then fail.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Stability of a torus representation point (--input rep JSON, else random from --seed).
    Git {
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long)]
        assert_polystable: bool,
    },
}

/// Outcome of a command: report text and whether all checks passed.
struct Outcome {
    text: String,
    passed: bool,
    summary: Option<String>,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cfg) {
        Ok(out) => {
            if let Some(s) = &out.summary {
                eprint!("{s}");
            }
            let written = match &cfg.output {
                Some(path) => std::fs::write(path, &out.text).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            match written {
                Ok(()) if out.passed => 0,
                Ok(()) => 1,
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn read_input(cfg: &RunConfig) -> Result<String> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::validation("--input is required"))?;
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_polytope(cfg: &RunConfig) -> Result<MomentPolytope> {
    match (&cfg.example, &cfg.input) {
        (Some(name), None) => catalog::example(name),
        (None, Some(_)) => io::parse_polytope(&read_input(cfg)?),
        (Some(_), Some(_)) => Err(Error::validation("use either --example or --input, not both")),
        (None, None) => Err(Error::validation("a polytope is required: --example NAME or --input FILE")),
    }
}

fn check_config(cfg: &RunConfig) -> Result<()> {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(Error::validation("--tol must be positive"));
    }
    if cfg.m_max < 1 {
        return Err(Error::validation("--m-max must be at least 1"));
    }
    Ok(())
}

fn check_levels(m_list: &[u32]) -> Result<()> {
    if m_list.is_empty() || m_list.contains(&0) || m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("--m-list must be positive and strictly increasing"));
    }
    Ok(())
}

fn basis_lambda(dim: usize) -> Vec<i64> {
    let mut l = vec![0; dim];
    l[0] = 1;
    l
}

fn execute(cfg: &RunConfig) -> Result<Outcome> {
    check_config(cfg)?;
    match &cfg.command {
        Command::Polytope => polytope_cmd(cfg),
        Command::Character { m } => {
            let p = load_polytope(cfg)?;
            let chi = hilbert_character(&p, *m)?;
            let text = match cfg.format {
                Format::Json => io::roundtrip(&chi.to_json())?,
                Format::Csv => chi.to_csv(),
            };
            Ok(Outcome { text, passed: true, summary: None })
        }
        Command::Df { xi, lambda, m_list, weight_table } => match weight_table {
            Some(path) => weight_table_cmd(cfg, path, xi.as_deref()),
            None => df_cmd(cfg, xi.as_deref(), lambda.as_deref(), m_list),
        },
        Command::Xi { lambda, m_list } => xi_cmd(cfg, lambda.as_deref(), m_list),
        Command::VerifyMomentmap { seeds, nodes } => {
            let report = momentmap::moment_map_report(*seeds, *nodes, momentmap::reduced::DEFAULT_STEP)?;
            verification_outcome(report)
        }
        Command::VerifyAppendixb { seeds, dims, inject_fault } => {
            if dims.is_empty() || dims.contains(&0) {
                return Err(Error::validation("--dims must be positive"));
            }
            let report = momentmap::appendix_b_report(dims, *seeds, *inject_fault)?;
            verification_outcome(report)
        }
        Command::Git { delta, assert_polystable } => git_cmd(cfg, *delta, *assert_polystable),
    }
}

fn polytope_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let p = load_polytope(cfg)?;
    let levels: Vec<u32> = (1..=cfg.m_max).collect();
    let text = match cfg.format {
        Format::Csv => io::lattice_csv(&p, &levels)?,
        Format::Json => {
            let mut counts = Vec::new();
            for &m in &levels {
                counts.push(LevelCount {
                    m,
                    h0: p.lattice_points(m)?.len() as u64,
                });
            }
            let report = PolytopeReport {
                polytope: io::polytope_to_json(&p),
                vertices: p.vertices().iter().map(|v| v.iter().map(format_rational).collect()).collect(),
                volume: format_rational(&p.volume()),
                barycenter: p.barycenter().iter().map(format_rational).collect(),
                kahler_einstein: soliton::is_kahler_einstein(&p),
                lattice_counts: counts,
            };
            io::roundtrip(&report)?
        }
    };
    Ok(Outcome { text, passed: true, summary: None })
}

/// CSV rows `m,df_discrete,df_continuum,gap,slope`, the slope being the
/// log-log fit over all rows so far (empty until two usable rows exist).
pub fn convergence_study(p: &MomentPolytope, xi: &[f64], lambda: &[i64], m_list: &[u32]) -> Result<String> {
    let rows = study_rows(p, xi, lambda, m_list)?;
    let mut out = String::from("m,df_discrete,df_continuum,gap,slope\n");
    for r in rows {
        let slope = r.slope.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", r.m, r.df_discrete, r.df_continuum, r.gap, slope);
    }
    Ok(out)
}

fn study_rows(p: &MomentPolytope, xi: &[f64], lambda: &[i64], m_list: &[u32]) -> Result<Vec<ConvergenceRowJson>> {
    check_levels(m_list)?;
    let rows = convergence_rows(p, xi, lambda, m_list)?;
    let mut out = Vec::with_capacity(rows.len());
    for i in 0..rows.len() {
        let ms: Vec<f64> = rows[..=i].iter().map(|r| r.m as f64).collect();
        let gaps: Vec<f64> = rows[..=i].iter().map(|r| r.gap).collect();
        out.push(ConvergenceRowJson {
            m: rows[i].m,
            df_discrete: rows[i].df_discrete,
            df_continuum: rows[i].df_continuum,
            gap: rows[i].gap,
            slope: loglog_slope(&ms, &gaps),
        });
    }
    Ok(out)
}

fn df_cmd(cfg: &RunConfig, xi: Option<&[f64]>, lambda: Option<&[i64]>, m_list: &[u32]) -> Result<Outcome> {
    let p = load_polytope(cfg)?;
    let xi = xi.map(|x| x.to_vec()).unwrap_or_else(|| vec![0.0; p.dim()]);
    let lambda = lambda.map(|l| l.to_vec()).unwrap_or_else(|| basis_lambda(p.dim()));
    let text = match cfg.format {
        Format::Csv => convergence_study(&p, &xi, &lambda, m_list)?,
        Format::Json => {
            let rows = study_rows(&p, &xi, &lambda, m_list)?;
            let lf: Vec<f64> = lambda.iter().map(|&x| x as f64).collect();
            let report = DfReport {
                df_continuum: soliton::df_continuum(&p, &xi, &lf)?,
                xi,
                lambda,
                rows,
            };
            io::roundtrip(&report)?
        }
    };
    Ok(Outcome { text, passed: true, summary: None })
}

fn weight_table_cmd(cfg: &RunConfig, path: &PathBuf, xi: Option<&[f64]>) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let json: soliton::WeightTableJson = io::validate(&text)?;
    let table = EquivariantWeightTable::from_json(&json)?;
    let xi_bar = xi.map(|x| x.to_vec()).unwrap_or_else(|| vec![0.0; table.dim()]);
    let est = soliton::df_from_weight_table(&table, &xi_bar, cfg.m_max)?;
    let report = WeightTableReport {
        xi_bar,
        m_max: cfg.m_max,
        estimate: est.estimate,
        error_bar: est.error_bar,
        levels: est.levels,
    };
    Ok(Outcome {
        text: io::roundtrip(&report)?,
        passed: true,
        summary: None,
    })
}

fn xi_cmd(cfg: &RunConfig, lambda: Option<&[i64]>, m_list: &[u32]) -> Result<Outcome> {
    let p = load_polytope(cfg)?;
    check_levels(m_list)?;
    let lambda = lambda.map(|l| l.to_vec()).unwrap_or_else(|| basis_lambda(p.dim()));
    let r = soliton::k_optimal_vector(&p, cfg.tol)?.with_convergence_table(&p, &lambda, m_list)?;
    let report = XiReport {
        xi_star: r.xi_star.clone(),
        residual: r.residual,
        iters: r.newton_iters,
        table: r
            .convergence_table
            .iter()
            .map(|row| XiTableRow {
                m: row.m,
                df_disc: row.df_discrete,
                df_cont: row.df_continuum,
            })
            .collect(),
    };
    let text = match cfg.format {
        Format::Json => io::roundtrip(&report)?,
        Format::Csv => {
            let mut s = String::from("m,df_disc,df_cont\n");
            for row in &report.table {
                let _ = writeln!(s, "{},{},{}", row.m, row.df_disc, row.df_cont);
            }
            s
        }
    };
    Ok(Outcome { text, passed: true, summary: None })
}

fn verification_outcome(report: VerificationReport) -> Result<Outcome> {
    let mut summary = String::new();
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
    let _ = writeln!(summary, "{:<width$}  {:>12}  {:>9}  status", "check", "residual", "tol");
    for c in &report.checks {
        let status = if c.passed { "ok" } else { "FAIL" };
        let _ = writeln!(summary, "{:<width$}  {:>12.3e}  {:>9.1e}  {status}", c.name, c.residual, c.tolerance);
    }
    let failed = report.failures().count();
    let _ = writeln!(summary, "{} checks, {failed} failed", report.checks.len());
    Ok(Outcome {
        passed: report.passed,
        text: io::roundtrip(&report)?,
        summary: Some(summary),
    })
}

fn git_cmd(cfg: &RunConfig, delta: f64, assert_polystable: bool) -> Result<Outcome> {
    let rp = match &cfg.input {
        Some(_) => TorusRepPoint::from_json(&io::validate(&read_input(cfg)?)?)?,
        None => kempfness::random_rep_point(cfg.seed),
    };
    let verdict = kempfness::polystable(&rp)?;
    let lemma = if verdict.verdict == Stability::Polystable {
        Some(kempfness::sze_lemma_bound_check(&rp, delta)?)
    } else {
        None
    };
    let report = GitReport {
        rep: rp.to_json(),
        moment_map: kempfness::linear_moment_map(&rp),
        kempf_ness: kempfness::kempf_ness_minimize(&rp, cfg.tol)?,
        scaling_deviation: kempfness::scaling_expansion_check(&rp, &[0.5, 1.5, 3.0]).max_deviation,
        verdict,
        lemma,
    };
    let passed = report.lemma.as_ref().is_none_or(|l| l.holds)
        && (!assert_polystable || report.verdict.verdict == Stability::Polystable);
    Ok(Outcome {
        text: io::roundtrip(&report)?,
        passed,
        summary: None,
    })
}
