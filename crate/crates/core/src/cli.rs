//! Command-line front end. Exit codes: 0 ok, 1 input error, 2 math error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::bishop::{
    nonexistence_probe, BishopError, BishopProblem, SolveConfig, INDEX_RADIUS_FRACTION,
};
use crate::circle::{CircleFunction, DEFAULT_SAMPLES};
use crate::conformal::{ConformalError, MapOptions};
use crate::maslov::{index_report_on, MaslovError};
use crate::report::{digest, ClassifyReport, FamilyReport, Output, RunReport, VerifyReport};
use crate::surface::file::{GermFile, GermFileError};
use crate::surface::{
    make_bishop_quadric, make_example_4_1, make_power, PolyZZbar, SurfaceError, SurfaceGerm,
};

#[derive(Debug, Parser)]
#[command(
    name = "bishop-discs",
    version,
    about = "Maslov-type index and Bishop discs of CR singularities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Boundary grid size.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    grid: usize,
    /// Hölder exponent of the monitored norm.
    #[arg(long, global = true, default_value_t = 0.5)]
    alpha: f64,
    /// Ball exponent δ ∈ (1/2, 1).
    #[arg(long, global = true, default_value_t = 0.75)]
    delta: f64,
    /// Picard stopping tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Primary data output (CSV for family and verify, germ file for
    /// examples, report JSON otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index by all three formulas.
    Index {
        germ: PathBuf,
        /// Circle radius for the winding number (default 0.05 × germ radius).
        #[arg(long)]
        r: Option<f64>,
    },
    /// Index, Bishop type and subharmonicity of the leading term.
    Classify { germ: PathBuf },
    /// Family of discs on equally spaced radii.
    Family {
        germ: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        r_min: f64,
        #[arg(long, default_value_t = 0.05)]
        r_max: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Also write boundary samples of every disc.
        #[arg(long)]
        boundary: Option<PathBuf>,
    },
    /// Nonexistence evidence at an index ≤ 0 point.
    Probe { germ: PathBuf },
    /// Emit a germ file.
    Examples {
        #[command(subcommand)]
        which: Example,
        /// Remainder term `MU,NU,RE[,IM]`; repeatable.
        #[arg(long = "term", global = true)]
        terms: Vec<String>,
    },
    /// Solve at one radius and report every certificate.
    Verify {
        germ: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        r: f64,
    },
}

#[derive(Debug, Subcommand)]
enum Example {
    /// `|z|² + γ(z² + z̄²)`.
    BishopQuadric {
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
    /// `(C/2)(z⁴ + z̄⁴) + ε(z³z̄ + z z̄³) + |z|⁴`.
    #[command(name = "example-4-1")]
    Example41 {
        #[arg(long, default_value_t = 0.7)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
    },
    /// `|z|^m`, `m` even.
    Power {
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
}

enum Failure {
    Input(String),
    Math(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Math(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Math(m) => m,
        }
    }
}

impl From<GermFileError> for Failure {
    fn from(e: GermFileError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<MaslovError> for Failure {
    fn from(e: MaslovError) -> Self {
        match e {
            MaslovError::InvalidRadius { .. } => Failure::Input(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

impl From<ConformalError> for Failure {
    fn from(e: ConformalError) -> Self {
        Failure::Math(e.to_string())
    }
}

impl From<BishopError> for Failure {
    fn from(e: BishopError) -> Self {
        match e {
            BishopError::InvalidConfig(_)
            | BishopError::InvalidRadius { .. }
            | BishopError::InvalidGrid(_) => Failure::Input(e.to_string()),
            BishopError::ProfileNotPositive { index, .. }
            | BishopError::IndexNotPositive { index }
                if index <= 0 =>
            {
                Failure::Math(format!(
                    "index ≤ 0 ({e}). Discs attached near the point exist only for positive index; \
                     at index ≤ 0 no such family exists, and with a real remainder the surface is \
                     locally polynomially convex there"
                ))
            }
            BishopError::Maslov(m) => m.into(),
            _ => Failure::Math(e.to_string()),
        }
    }
}

struct Ctx {
    args: Vec<String>,
    digest: Option<String>,
    started: Instant,
    timing: bool,
}

impl Ctx {
    fn report(&self, output: Output) -> RunReport {
        RunReport {
            command: self.args.clone(),
            input_digest: self.digest.clone(),
            output,
            timing_ms: self
                .timing
                .then(|| self.started.elapsed().as_secs_f64() * 1e3),
        }
    }

    fn load(&mut self, path: &Path) -> Result<SurfaceGerm, Failure> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        self.digest = Some(digest(&bytes));
        let text = String::from_utf8(bytes)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        Ok(GermFile::parse(&text)?.to_germ()?)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn parse_term(s: &str) -> Result<((u32, u32), Complex64), Failure> {
    let bad = || Failure::Input(format!("bad --term {s:?}: expected MU,NU,RE[,IM]"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if !(parts.len() == 3 || parts.len() == 4) {
        return Err(bad());
    }
    let mu = parts[0].parse().map_err(|_| bad())?;
    let nu = parts[1].parse().map_err(|_| bad())?;
    let re = parts[2].parse().map_err(|_| bad())?;
    let im = if parts.len() == 4 {
        parts[3].parse().map_err(|_| bad())?
    } else {
        0.0
    };
    Ok(((mu, nu), Complex64::new(re, im)))
}

fn execute(cli: Cli, ctx: &mut Ctx) -> Result<RunReport, Failure> {
    let opts = MapOptions {
        grid: cli.grid,
        ..MapOptions::default()
    };
    let config = SolveConfig {
        delta: cli.delta,
        tol: cli.tol,
        alpha: cli.alpha,
        ..SolveConfig::default()
    };
    config.validate()?;
    CircleFunction::constant(cli.grid, Complex64::new(0.0, 0.0))
        .map_err(|e| Failure::Input(format!("--grid: {e}")))?;

    let write_json = |rep: &RunReport, out: &Option<PathBuf>| -> Result<(), Failure> {
        if let Some(path) = out {
            let mut w = create(path)?;
            writeln!(w, "{}", rep.to_json())?;
            w.flush()?;
        }
        Ok(())
    };

    match cli.command {
        Command::Index { germ, r } => {
            let germ = ctx.load(&germ)?;
            let r = r.unwrap_or(INDEX_RADIUS_FRACTION * germ.radius());
            let rep = ctx.report(Output::Index(index_report_on(&germ, r, cli.grid)?));
            write_json(&rep, &cli.out)?;
            Ok(rep)
        }
        Command::Classify { germ } => {
            let germ = ctx.load(&germ)?;
            let idx = index_report_on(&germ, INDEX_RADIUS_FRACTION * germ.radius(), cli.grid)?;
            let remainder_real = germ.remainder_is_real();
            let verdict = if idx.index() > 0 {
                "positive index: a family of analytic discs attached to the surface shrinks to the origin, so the surface is not locally polynomially convex there"
            } else if remainder_real {
                "index ≤ 0 with real remainder: locally polynomially convex at the origin"
            } else {
                "index ≤ 0: no family of attached discs shrinking to the origin exists"
            };
            let rep = ctx.report(Output::Classify(ClassifyReport {
                degree: germ.degree(),
                index: idx.index(),
                classification: idx.classification,
                nondegenerate_class: idx.nondegenerate_class,
                gamma: idx.gamma,
                subharmonicity: germ.leading().subharmonicity_report(),
                remainder_real,
                verdict: verdict.to_string(),
            }));
            write_json(&rep, &cli.out)?;
            Ok(rep)
        }
        Command::Family {
            germ,
            r_min,
            r_max,
            steps,
            boundary,
        } => {
            let germ = ctx.load(&germ)?;
            let problem = BishopProblem::new(germ, &opts, config)?;
            let family = problem.disc_family(r_min, r_max, steps)?;
            if let Some(path) = &cli.out {
                family.write_csv(create(path)?)?;
            }
            if let Some(path) = &boundary {
                family.write_boundary_csv(create(path)?)?;
            }
            Ok(ctx.report(Output::Family(FamilyReport {
                config,
                grid: cli.grid,
                construction: problem.map().construction().clone(),
                map: problem.map().diagnostics().clone(),
                family: family.summary(),
                csv: cli.out.as_ref().map(|p| p.display().to_string()),
            })))
        }
        Command::Probe { germ } => {
            let germ = ctx.load(&germ)?;
            let rep = ctx.report(Output::Probe(nonexistence_probe(&germ)?));
            write_json(&rep, &cli.out)?;
            Ok(rep)
        }
        Command::Examples { which, terms } => {
            let mut remainder = PolyZZbar::zero();
            for t in &terms {
                let ((mu, nu), c) = parse_term(t)?;
                remainder.add_term(mu, nu, c);
            }
            let germ = match which {
                Example::BishopQuadric { gamma } => make_bishop_quadric(gamma, remainder)?,
                Example::Example41 { eps, c } => make_example_4_1(eps, c, remainder)?,
                Example::Power { m } => make_power(m, remainder)?,
            };
            let file = GermFile::from_germ(&germ);
            if let Some(path) = &cli.out {
                let mut w = create(path)?;
                writeln!(w, "{}", file.to_json())?;
                w.flush()?;
            }
            Ok(ctx.report(Output::Example(file)))
        }
        Command::Verify { germ, r } => {
            let germ = ctx.load(&germ)?;
            let problem = BishopProblem::new(germ, &opts, config)?;
            let (sol, disc) = problem.disc(r)?;
            let attachment = crate::bishop::verify_attachment(&disc, problem.germ());
            let f = CircleFunction::from_real_fn(cli.grid, |t| t.cos() + 0.5 * (3.0 * t).sin())
                .map_err(|e| Failure::Input(e.to_string()))?;
            let a = problem.a_inv(r, &f)?;
            let round_trip_error = problem.lambda(r, a.function()).sup_distance(&f) / f.sup_norm();
            if let Some(path) = &cli.out {
                disc.write_csv(create(path)?)?;
            }
            let map = problem.map().diagnostics().clone();
            let certified = attachment.certified()
                && map.certified()
                && round_trip_error < crate::bishop::ROUND_TRIP_TOL
                && sol.diagnostics.fixed_point_residual < 2.0 * config.tol;
            Ok(ctx.report(Output::Verify(VerifyReport {
                r,
                grid: cli.grid,
                construction: problem.map().construction().clone(),
                map,
                solve: sol.diagnostics,
                attachment,
                round_trip_error,
                certified,
            })))
        }
    }
}

/// Runs one command; `args` excludes the program name.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let argv = std::iter::once("bishop-discs".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let mut ctx = Ctx {
        args,
        digest: None,
        started: Instant::now(),
        timing: cli.timing,
    };
    match execute(cli, &mut ctx) {
        Ok(rep) => {
            let _ = writeln!(stdout, "{}", rep.to_json());
            0
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}
