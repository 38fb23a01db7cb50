//! Experiment drivers behind the `igagauge` binary.
//!
//! Every command sweeps geometries × degrees × mesh sizes, runs the cells
//! on the rayon pool and writes one CSV (header row, floats with 12
//! significant digits) in deterministic cell order. Mesh sizes come from
//! `--elements n,...` (elements per patch and direction) or from
//! `--refine r,...` meaning `2^r` elements.

use crate::assembly::MultiplierKind;
use crate::error::{Error, Result};
use crate::geometry::{builtin_geometry, load_domain, Discretization, MultiPatchDomain, Role};
use crate::solve::{
    analytic_cube_spectrum, field_at, infsup_constant, kernel_dimension, manufactured_current,
    manufactured_field, maxwell_eigen, relative_error, source_problem, GaugeMode, SourceOptions,
};
use crate::spaces::{DiscreteSpace, SplineComplex};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Relative tolerance for matching computed against analytic eigenvalues.
pub const MATCH_TOL: f64 = 0.05;

#[derive(Parser, Debug)]
#[command(
    name = "igagauge",
    about = "Gauged multi-patch spline experiments",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Kernel dimensions with both multiplier spaces.
    KernelTable(ExperimentArgs),
    /// Smallest Maxwell eigenvalues with spurious-mode flags.
    Eigen(ExperimentArgs),
    /// Flux-density error of the manufactured source problem.
    Convergence(ExperimentArgs),
    /// Numerical inf-sup constant of the mortar coupling.
    Infsup(ExperimentArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    /// Builtin names or JSON paths (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub geometry: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub degree: Vec<usize>,
    /// Refinement levels; level r has 2^r elements per patch and direction.
    #[arg(long, value_delimiter = ',')]
    pub refine: Vec<u32>,
    /// Elements per patch and direction (overrides --refine).
    #[arg(long, value_delimiter = ',')]
    pub elements: Vec<usize>,
    /// standard or enriched (default: both where it matters).
    #[arg(long)]
    pub multiplier: Option<String>,
    /// tree or none.
    #[arg(long, default_value = "tree")]
    pub gauge: String,
    /// CSV output (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Legacy VTK file with sampled B of the last cell.
    #[arg(long)]
    pub fields: Option<PathBuf>,
    /// Eigenvalues reported per run.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
}

/// Which experiment to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    KernelTable,
    Eigen,
    Convergence,
    Infsup,
}

/// Validated sweep configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub geometries: Vec<String>,
    pub degrees: Vec<usize>,
    pub elements: Vec<usize>,
    pub multipliers: Vec<MultiplierKind>,
    pub gauge: GaugeMode,
    pub out: Option<PathBuf>,
    pub fields: Option<PathBuf>,
    pub count: usize,
}

impl ExperimentConfig {
    /// Fills per-experiment defaults and checks ranges.
    pub fn new(experiment: Experiment, args: &ExperimentArgs) -> Result<Self> {
        let (geoms, degrees, elements): (&[&str], &[usize], &[usize]) = match experiment {
            Experiment::KernelTable => (&["cube-2", "cube-4", "cube-5"], &[2, 3], &[2, 3]),
            Experiment::Eigen => (&["cube-mortar-conforming:4"], &[3], &[4]),
            Experiment::Convergence => (
                &["cube-mortar-periodic", "cube-mortar-shifted:1"],
                &[2, 3],
                &[4, 6, 8],
            ),
            Experiment::Infsup => (
                &["cube-mortar-conforming:4", "cube-mortar-conforming:5"],
                &[2, 3],
                &[2, 4, 8],
            ),
        };
        let pick = |given: &[String], default: &[&str]| {
            if given.is_empty() {
                default.iter().map(|s| s.to_string()).collect()
            } else {
                given.to_vec()
            }
        };
        let degrees = if args.degree.is_empty() {
            degrees.to_vec()
        } else {
            args.degree.clone()
        };
        if let Some(&p) = degrees.iter().find(|&&p| p < 2) {
            return Err(Error::Config(format!("degree {p} < 2")));
        }
        let elements = if !args.elements.is_empty() {
            args.elements.clone()
        } else if !args.refine.is_empty() {
            args.refine.iter().map(|&r| 1usize << r).collect()
        } else {
            elements.to_vec()
        };
        if elements.contains(&0) {
            return Err(Error::Config("zero elements".into()));
        }
        let multipliers = match &args.multiplier {
            Some(m) => vec![m.parse()?],
            None if experiment == Experiment::Convergence => vec![MultiplierKind::Enriched],
            None => vec![MultiplierKind::Standard, MultiplierKind::Enriched],
        };
        Ok(ExperimentConfig {
            experiment,
            geometries: pick(&args.geometry, geoms),
            degrees,
            elements,
            multipliers,
            gauge: args.gauge.parse()?,
            out: args.out.clone(),
            fields: args.fields.clone(),
            count: args.count,
        })
    }
}

/// Builtin name or path to a JSON domain.
pub fn resolve_geometry(name: &str) -> Result<MultiPatchDomain> {
    let path = Path::new(name);
    if path.extension().is_some_and(|e| e == "json") || path.exists() {
        load_domain(path)
    } else {
        builtin_geometry(name)
    }
}

/// Patches of the dependent subdomain.
fn dependent_patches(d: &MultiPatchDomain) -> usize {
    d.roles.iter().filter(|&&r| r == Role::Dependent).count()
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Text(s) => s.clone(),
        }
    }
}

/// Float with 12 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Header plus rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Value::render).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Result of a command: the table, human-readable notes and failed checks.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub table: Table,
    pub notes: Vec<String>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug)]
struct CellSpec {
    geometry: String,
    degree: usize,
    elements: usize,
}

fn cells(cfg: &ExperimentConfig) -> Vec<CellSpec> {
    let mut out = Vec::new();
    for g in &cfg.geometries {
        for &p in &cfg.degrees {
            for &e in &cfg.elements {
                out.push(CellSpec {
                    geometry: g.clone(),
                    degree: p,
                    elements: e,
                });
            }
        }
    }
    out
}

fn complex_for(c: &CellSpec, regularity: Option<usize>) -> Result<SplineComplex> {
    let mut disc = Discretization::new(c.degree, c.elements);
    if let Some(r) = regularity {
        disc = disc.with_regularity(r);
    }
    SplineComplex::discretize(&resolve_geometry(&c.geometry)?, &disc)
}

fn h(c: &CellSpec) -> Value {
    Value::Float(1.0 / c.elements as f64)
}

/// Kernel dimensions on `C¹` knot vectors: `dim X⁰_{h,0}` and `dim K_h` for
/// both multiplier spaces.
pub fn cmd_kernel_table(cfg: &ExperimentConfig) -> Result<Outcome> {
    let specs = cells(cfg);
    let rows: Vec<Result<(Vec<Value>, Vec<String>)>> = specs
        .par_iter()
        .map(|c| {
            let complex = complex_for(c, Some(1))?;
            let std = kernel_dimension(&complex, MultiplierKind::Standard)?;
            let enr = kernel_dimension(&complex, MultiplierKind::Enriched)?;
            let mut fails = Vec::new();
            let label = format!("{} p={} h=1/{}", c.geometry, c.degree, c.elements);
            if !std.is_clear() || !enr.is_clear() {
                fails.push(format!("{label}: ambiguous rank gap"));
            }
            let z = std.interface_internal;
            for k in [std.kernel, enr.kernel] {
                if k < std.dim_x0 || k > std.dim_x0 + z {
                    fails.push(format!(
                        "{label}: kernel {k} outside [{}, {}]",
                        std.dim_x0,
                        std.dim_x0 + z
                    ));
                }
            }
            let row = vec![
                Value::Text(c.geometry.clone()),
                Value::Int(dependent_patches(complex.domain()) as i64),
                Value::Int(c.degree as i64),
                h(c),
                Value::Int(std.dim_x0 as i64),
                Value::Int(std.kernel as i64),
                Value::Int(enr.kernel as i64),
                Value::Int(z as i64),
            ];
            Ok((row, fails))
        })
        .collect();
    let mut out = Outcome {
        table: Table {
            header: vec![
                "geometry",
                "patches",
                "p",
                "h",
                "dim_x0",
                "kernel_standard",
                "kernel_enriched",
                "interface_internal",
            ],
            rows: Vec::new(),
        },
        ..Default::default()
    };
    for r in rows {
        let (row, fails) = r?;
        out.table.rows.push(row);
        out.failures.extend(fails);
    }
    Ok(out)
}

/// Smallest eigenvalues per multiplier space, flagged against the cavity
/// spectrum of `(0, π)³`.
pub fn cmd_eigen(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut specs = Vec::new();
    for c in cells(cfg) {
        for &m in &cfg.multipliers {
            specs.push((c.clone(), m));
        }
    }
    let runs: Vec<Result<Vec<Vec<Value>>>> = specs
        .par_iter()
        .map(|(c, m)| {
            let complex = complex_for(c, None)?;
            let mut rep = maxwell_eigen(&complex, *m, cfg.gauge, cfg.count)?;
            let top = rep.eigenvalues.last().copied().unwrap_or(0.0);
            rep.flag_against(&analytic_cube_spectrum(2.0 * top + 10.0), MATCH_TOL);
            Ok(rep
                .eigenvalues
                .iter()
                .zip(&rep.spurious)
                .enumerate()
                .map(|(i, (&v, &s))| {
                    vec![
                        Value::Text(c.geometry.clone()),
                        Value::Int(c.degree as i64),
                        h(c),
                        Value::Text(m.to_string()),
                        Value::Text(cfg.gauge.to_string()),
                        Value::Int(i as i64 + 1),
                        Value::Float(v),
                        Value::Int(i64::from(s)),
                        Value::Int(rep.zero_count as i64),
                    ]
                })
                .collect())
        })
        .collect();
    let mut out = Outcome {
        table: Table {
            header: vec![
                "geometry",
                "p",
                "h",
                "multiplier",
                "gauge",
                "index",
                "eigenvalue",
                "spurious",
                "zero_count",
            ],
            rows: Vec::new(),
        },
        ..Default::default()
    };
    for ((c, m), r) in specs.iter().zip(runs) {
        let rows = r?;
        let spurious = rows.iter().filter(|r| r[7] == Value::Int(1)).count();
        out.notes.push(format!(
            "{} p={} h=1/{} {m}: {spurious} spurious",
            c.geometry, c.degree, c.elements
        ));
        out.table.rows.extend(rows);
    }
    Ok(out)
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Relative `B` error of the manufactured problem and the fitted order
/// (negated slope of `log ε` against `log(1/h)`), which should lie in
/// `[p − 0.2, p + 0.3]`.
pub fn cmd_convergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut specs = Vec::new();
    for c in cells(cfg) {
        for &m in &cfg.multipliers {
            specs.push((c.clone(), m));
        }
    }
    let runs: Vec<Result<(usize, f64)>> = specs
        .par_iter()
        .map(|(c, m)| {
            let complex = complex_for(c, None)?;
            let opts = SourceOptions {
                multiplier: *m,
                gauge: cfg.gauge,
                ..Default::default()
            };
            let sol = source_problem(&complex, &manufactured_current, opts)?;
            let err = relative_error(
                &complex,
                &sol.space,
                &sol.solution.coefficients,
                &manufactured_field,
            )?;
            Ok((sol.space.dim(), err))
        })
        .collect();
    let mut out = Outcome {
        table: Table {
            header: vec!["geometry", "p", "h", "multiplier", "dofs", "error"],
            rows: Vec::new(),
        },
        ..Default::default()
    };
    let mut series: Vec<(String, usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for ((c, m), r) in specs.iter().zip(runs) {
        let (dofs, err) = r?;
        out.table.rows.push(vec![
            Value::Text(c.geometry.clone()),
            Value::Int(c.degree as i64),
            h(c),
            Value::Text(m.to_string()),
            Value::Int(dofs as i64),
            Value::Float(err),
        ]);
        let key = format!("{} p={} {m}", c.geometry, c.degree);
        match series.iter_mut().find(|s| s.0 == key) {
            Some(s) => {
                s.2.push(c.elements as f64);
                s.3.push(err);
            }
            None => series.push((key, c.degree, vec![c.elements as f64], vec![err])),
        }
    }
    for (key, p, x, y) in series {
        if x.len() >= 2 {
            let order = -fitted_slope(&x, &y);
            out.notes.push(format!("{key}: order {order:.3}"));
            let p = p as f64;
            if x.len() >= 3 && !(p - 0.2..=p + 0.3).contains(&order) {
                out.failures.push(format!(
                    "{key}: order {order:.3} outside [{}, {}]",
                    p - 0.2,
                    p + 0.3
                ));
            }
        }
    }
    if let (Some(path), Some((c, m))) = (&cfg.fields, specs.last()) {
        let complex = complex_for(c, None)?;
        let opts = SourceOptions {
            multiplier: *m,
            gauge: cfg.gauge,
            ..Default::default()
        };
        let sol = source_problem(&complex, &manufactured_current, opts)?;
        let samples = sample_field(&complex, &sol.space, &sol.solution.coefficients, 5)?;
        write_vtk(path, &samples)?;
    }
    Ok(out)
}

/// Inf-sup constants per multiplier space.
pub fn cmd_infsup(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut specs = Vec::new();
    for c in cells(cfg) {
        for &m in &cfg.multipliers {
            specs.push((c.clone(), m));
        }
    }
    let runs: Vec<Result<(usize, crate::solve::InfSupReport)>> = specs
        .par_iter()
        .map(|(c, m)| {
            let complex = complex_for(c, None)?;
            Ok((
                dependent_patches(complex.domain()),
                infsup_constant(&complex, *m)?,
            ))
        })
        .collect();
    let mut out = Outcome {
        table: Table {
            header: vec![
                "geometry",
                "patches",
                "p",
                "h",
                "multiplier",
                "multipliers",
                "beta",
            ],
            rows: Vec::new(),
        },
        ..Default::default()
    };
    for ((c, m), r) in specs.iter().zip(runs) {
        let (patches, rep) = r?;
        if rep.beta <= 0.0 {
            out.failures.push(format!(
                "{} p={} h=1/{} {m}: beta = {}",
                c.geometry, c.degree, c.elements, rep.beta
            ));
        }
        out.table.rows.push(vec![
            Value::Text(c.geometry.clone()),
            Value::Int(patches as i64),
            Value::Int(c.degree as i64),
            h(c),
            Value::Text(m.to_string()),
            Value::Int(rep.multipliers as i64),
            Value::Float(rep.beta),
        ]);
    }
    Ok(out)
}

/// Physical points and `B` on a uniform `n³` parametric grid per patch.
pub fn sample_field(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    coefficients: &[f64],
    n: usize,
) -> Result<Vec<([f64; 3], [f64; 3])>> {
    let mut out = Vec::new();
    let t = |i: usize| {
        if n == 1 {
            0.5
        } else {
            i as f64 / (n - 1) as f64
        }
    };
    for (pi, patch) in complex.domain().patches.iter().enumerate() {
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let xi = [t(i), t(j), t(k)];
                    let x = patch.eval_map(xi)?.x;
                    let (_, b) = field_at(complex, space1, coefficients, pi, xi)?;
                    out.push((x, b));
                }
            }
        }
    }
    Ok(out)
}

/// Legacy VTK unstructured grid of vertices carrying the vector `B`.
pub fn write_vtk(path: &Path, samples: &[([f64; 3], [f64; 3])]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "# vtk DataFile Version 3.0\nsampled flux density\nASCII\nDATASET UNSTRUCTURED_GRID"
    )?;
    writeln!(f, "POINTS {} double", samples.len())?;
    for (x, _) in samples {
        writeln!(
            f,
            "{} {} {}",
            format_float(x[0]),
            format_float(x[1]),
            format_float(x[2])
        )?;
    }
    writeln!(f, "CELLS {} {}", samples.len(), 2 * samples.len())?;
    for i in 0..samples.len() {
        writeln!(f, "1 {i}")?;
    }
    writeln!(f, "CELL_TYPES {}", samples.len())?;
    for _ in samples {
        writeln!(f, "1")?;
    }
    writeln!(f, "POINT_DATA {}\nVECTORS B double", samples.len())?;
    for (_, b) in samples {
        writeln!(
            f,
            "{} {} {}",
            format_float(b[0]),
            format_float(b[1]),
            format_float(b[2])
        )?;
    }
    Ok(())
}

/// Runs a parsed command and writes its CSV.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let (experiment, args) = match &cli.command {
        Command::KernelTable(a) => (Experiment::KernelTable, a),
        Command::Eigen(a) => (Experiment::Eigen, a),
        Command::Convergence(a) => (Experiment::Convergence, a),
        Command::Infsup(a) => (Experiment::Infsup, a),
    };
    let cfg = ExperimentConfig::new(experiment, args)?;
    if cfg.fields.is_some() && experiment != Experiment::Convergence {
        return Err(Error::Config(
            "--fields is supported by the convergence command".into(),
        ));
    }
    let outcome = match experiment {
        Experiment::KernelTable => cmd_kernel_table(&cfg)?,
        Experiment::Eigen => cmd_eigen(&cfg)?,
        Experiment::Convergence => cmd_convergence(&cfg)?,
        Experiment::Infsup => cmd_infsup(&cfg)?,
    };
    match &cfg.out {
        Some(p) => outcome
            .table
            .write_csv(&mut std::io::BufWriter::new(std::fs::File::create(p)?))?,
        None => outcome.table.write_csv(&mut std::io::stdout().lock())?,
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_has_twelve_significant_digits() {
        assert_eq!(format_float(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(format_float(-0.000123), "-1.23000000000e-4");
    }

    #[test]
    fn slope_of_power_law() {
        let x = [2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-2.5)).collect();
        assert!((fitted_slope(&x, &y) + 2.5).abs() < 1e-12);
    }

    #[test]
    fn defaults_and_refinement_levels() {
        let args = ExperimentArgs {
            refine: vec![1, 2, 3],
            gauge: "tree".into(),
            ..Default::default()
        };
        let cfg = ExperimentConfig::new(Experiment::Infsup, &args).unwrap();
        assert_eq!(cfg.elements, vec![2, 4, 8]);
        assert_eq!(cfg.multipliers.len(), 2);
        let bad = ExperimentArgs {
            degree: vec![1],
            gauge: "tree".into(),
            ..Default::default()
        };
        assert!(ExperimentConfig::new(Experiment::Eigen, &bad).is_err());
    }

    #[test]
    fn csv_rendering() {
        let t = Table {
            header: vec!["a", "b"],
            rows: vec![vec![Value::Int(3), Value::Float(0.5)]],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n3,5.00000000000e-1\n");
    }
}
