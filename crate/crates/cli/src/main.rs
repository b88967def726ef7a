//! Command-line front end for the `hardyrp` library.
//!
//! Exit codes: 0 success, 1 certification negative, 2 input error,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardyrp::hankel::{
    certify_positive, compactness_check, default_anchors, gram_config, gram_from_measure, gram_from_symbol, gram_from_symbol_with,
    measure_symbol, os_isometry_check, rp_certify, symbol_from_measure, HankelGram,
};
use hardyrp::hardy::{BoundaryGrid, KernelCombination, SymbolFunction, DEFAULT_GRID_SIZE};
use hardyrp::kernels_appendix::{kernel_demo, kernel_demo_csv};
use hardyrp::pick::{degree_winding, multiplicity_winding, RationalPickFunction, DEFAULT_RADIUS};
use hardyrp::plot::eigencurve_svg;
use hardyrp::symbols::{f_nu, h_nu_symbol, outer_example, out_eval};
use hardyrp::{fmt17, BoundaryMeasure, Complex64, Error, QuadratureConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "hardyrp", version, about = "Hardy-space numerics: measures, outer functions, Pick functions, Hankel operators")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol_abs: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol_rel: Option<f64>,
    /// Number of boundary grid or plot points.
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ψ_ν at the given points.
    Psi {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<f64>,
    },
    /// Degree of a rational Pick function.
    Degree {
        #[arg(long)]
        pick: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Spectral parameter as `re,im`.
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        lambda: String,
        /// Initial contour radius.
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: f64,
    },
    /// SVG of the boundary eigenvalue branches.
    PlotEigencurves {
        #[arg(long)]
        pick: PathBuf,
        /// `a:b`.
        #[arg(long, default_value = "-7:7", allow_hyphen_values = true)]
        range: String,
    },
    /// Outer function values at points `re,im;re,im;...`.
    OuterEval {
        /// One of the closed-form examples `a`..`f`.
        #[arg(long, conflicts_with = "measure")]
        example: Option<char>,
        /// Evaluate F_ν for this measure instead.
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// A symbol sampled on the standard boundary grid.
    Symbol {
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SymbolKind::HNu)]
        kind: SymbolKind,
    },
    /// Gram matrix of a Hankel form on Szegö kernels.
    HankelGram(FormArgs),
    /// Positivity verdict for a Hankel form.
    CertifyPsd(FormArgs),
    /// Reflection positivity of φ = 𝓕Ψ_ν at the given times.
    RpCertify {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,4")]
        times: Vec<f64>,
    },
    /// Osterwalder–Schrader isometry check for kernel combinations.
    OsCheck {
        #[arg(long)]
        measure: PathBuf,
        /// Random kernel combinations with this many terms (seeded); 0 uses Q_i.
        #[arg(long, default_value_t = 0)]
        terms: usize,
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
    },
    /// Compactness of the Hankel operator of a Carleson measure.
    Compactness {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Approximation-identity kernel sweep.
    KernelDemo {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e2,1e3,1e4")]
        ns: Vec<f64>,
    },
    /// Boundary symbol of a Carleson measure at the given points.
    SymbolFromMeasure {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<f64>,
    },
    /// Writes an input spec (measure or Pick function) as JSON.
    WriteSpec {
        #[arg(long, value_enum)]
        kind: SpecKind,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        poles: usize,
    },
}

#[derive(Args)]
struct FormArgs {
    /// Carleson measure, or the measure ν behind `--symbol h-nu`.
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Use a symbol instead of the measure form.
    #[arg(long, value_enum)]
    symbol: Option<SymbolKind>,
    /// Anchors `re,im;re,im;...` (default: 12 built-in anchors).
    #[arg(long, allow_hyphen_values = true)]
    anchors: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Rank,
    Multiplicity,
    Degree,
    Both,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SymbolKind {
    HNu,
    NegHNu,
    Measure,
    ISgn,
    NegISgn,
    LowerHalfPlane,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpecKind {
    Lebesgue,
    WorkedPick,
    RandomPick,
    RandomMeasure,
}

/// Why a command did not succeed.
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(String, bool), Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Lib(Error::Domain(msg.into()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Result<BoundaryMeasure, Failure> {
    Ok(BoundaryMeasure::from_json_str(&read(path)?)?)
}

fn load_pick(path: &Path) -> Result<RationalPickFunction, Failure> {
    Ok(RationalPickFunction::from_json_str(&read(path)?)?)
}

fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let (re, im) = s.trim().split_once(',').ok_or_else(|| input(format!("expected `re,im`, got `{s}`")))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| input(format!("bad number `{v}`: {e}")));
    Ok(Complex64::new(p(re)?, p(im)?))
}

fn parse_points(s: &str) -> Result<Vec<Complex64>, Failure> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_complex).collect()
}

fn config(c: &Common) -> Result<QuadratureConfig, Failure> {
    let mut cfg = QuadratureConfig::default();
    if let Some(a) = c.tol_abs {
        cfg.abs_tol = a;
    }
    if let Some(r) = c.tol_rel {
        cfg.rel_tol = r;
    }
    if !(cfg.abs_tol > 0.0 && cfg.abs_tol < 1.0 && cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0) {
        return Err(input("tolerances must lie in (0, 1)"));
    }
    Ok(cfg)
}

fn grid_size(c: &Common, default: usize) -> Result<usize, Failure> {
    let n = c.grid_size.unwrap_or(default);
    if !(2..=1 << 22).contains(&n) {
        return Err(input(format!("grid size must be between 2 and 2^22, got {n}")));
    }
    Ok(n)
}

fn make_symbol(kind: SymbolKind, measure: Option<&Path>, cfg: &QuadratureConfig) -> Result<SymbolFunction, Failure> {
    let need = || measure.ok_or_else(|| input("this symbol needs --measure"));
    Ok(match kind {
        SymbolKind::HNu => h_nu_symbol(&load_measure(need()?)?, cfg)?,
        SymbolKind::NegHNu => h_nu_symbol(&load_measure(need()?)?, cfg)?.negated(),
        SymbolKind::Measure => measure_symbol(&load_measure(need()?)?)?,
        SymbolKind::ISgn => SymbolFunction::i_sgn(),
        SymbolKind::NegISgn => SymbolFunction::i_sgn().negated(),
        SymbolKind::LowerHalfPlane => SymbolFunction::lower_half_plane_example(),
    })
}

fn form_gram(args: &FormArgs, cfg: &QuadratureConfig) -> Result<HankelGram, Failure> {
    let anchors = match &args.anchors {
        Some(s) => parse_points(s)?,
        None => default_anchors(),
    };
    match args.symbol {
        None => {
            let path = args.measure.as_deref().ok_or_else(|| input("give --measure or --symbol"))?;
            Ok(gram_from_measure(&load_measure(path)?, &anchors)?)
        }
        Some(kind) => {
            // h_ν uses the tightened quadrature regardless of the global tolerances.
            let sym_cfg = if matches!(kind, SymbolKind::HNu | SymbolKind::NegHNu) { gram_config() } else { *cfg };
            let h = make_symbol(kind, args.measure.as_deref(), &sym_cfg)?;
            if kind == SymbolKind::LowerHalfPlane {
                Ok(gram_from_symbol_with(&h, &anchors, false, cfg)?)
            } else {
                Ok(gram_from_symbol(&h, &anchors)?)
            }
        }
    }
}

fn json_string(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn run(cli: &Cli) -> Outcome {
    let c = &cli.common;
    let cfg = config(c)?;
    match &cli.command {
        Command::Psi { measure, points } => {
            let nu = load_measure(measure)?;
            let mut s = String::from("p,psi\n");
            for &p in points {
                let _ = writeln!(s, "{},{}", fmt17(p), fmt17(nu.psi_big(p)?));
            }
            Ok((s, true))
        }
        Command::Degree { pick, method, lambda, radius } => {
            let f = load_pick(pick)?;
            let lambda = parse_complex(lambda)?;
            let mut obj = serde_json::Map::new();
            let mut values = Vec::new();
            if matches!(method, Method::Rank | Method::Both | Method::All) {
                let r = f.degree_rank();
                values.push(r);
                obj.insert("rank".into(), json!(r));
            }
            if matches!(method, Method::Multiplicity | Method::Both | Method::All) {
                let w = multiplicity_winding(&f, lambda, *radius)?;
                values.push(w);
                obj.insert("winding".into(), json!(w));
            }
            if matches!(method, Method::Degree | Method::All) {
                let w = degree_winding(&f, lambda, *radius)?;
                values.push(w);
                obj.insert("degree_winding".into(), json!(w));
            }
            let agree = values.windows(2).all(|w| w[0] == w[1]);
            Ok((json_string(&serde_json::Value::Object(obj)), agree))
        }
        Command::PlotEigencurves { pick, range } => {
            let f = load_pick(pick)?;
            let (a, b) = range.split_once(':').ok_or_else(|| input("range must be `a:b`"))?;
            let pa = |v: &str| v.trim().parse::<f64>().map_err(|e| input(format!("bad range bound `{v}`: {e}")));
            let (a, b) = (pa(a)?, pa(b)?);
            Ok((eigencurve_svg(&f, a, b, grid_size(c, 701)?)?, true))
        }
        Command::OuterEval { example, measure, points } => {
            let zs = parse_points(points)?;
            let eval: Box<dyn Fn(Complex64) -> hardyrp::Result<Complex64>> = match (example, measure) {
                (Some(tag), None) => {
                    let (k, _) = outer_example(*tag)?;
                    let cfg = cfg;
                    Box::new(move |z| out_eval(Complex64::new(1.0, 0.0), &k, z, &cfg))
                }
                (None, Some(path)) => {
                    let nu = load_measure(path)?;
                    Box::new(move |z| f_nu(&nu, z, &cfg))
                }
                _ => return Err(input("give exactly one of --example or --measure")),
            };
            let mut s = String::from("z_re,z_im,re,im\n");
            for z in zs {
                let v = eval(z)?;
                let _ = writeln!(s, "{},{},{},{}", fmt17(z.re), fmt17(z.im), fmt17(v.re), fmt17(v.im));
            }
            Ok((s, true))
        }
        Command::Symbol { measure, kind } => {
            let h = make_symbol(*kind, measure.as_deref(), &cfg)?;
            let grid = BoundaryGrid::standard(grid_size(c, DEFAULT_GRID_SIZE)?)?;
            Ok((h.to_grid(&grid).to_csv(), true))
        }
        Command::HankelGram(args) => Ok((form_gram(args, &cfg)?.to_csv(), true)),
        Command::CertifyPsd(args) => {
            let v = certify_positive(&form_gram(args, &cfg)?)?;
            let mut s = v.to_json();
            s.push('\n');
            Ok((s, v.psd))
        }
        Command::RpCertify { measure, times } => {
            let r = rp_certify(&load_measure(measure)?, times, &cfg)?;
            let v = serde_json::to_value(&r).map_err(|e| Failure::Io(e.to_string()))?;
            Ok((json_string(&v), r.psd))
        }
        Command::OsCheck { measure, terms, threshold } => {
            let nu = load_measure(measure)?;
            let (f, g) = if *terms == 0 {
                let q = KernelCombination::kernel(Complex64::new(0.0, 1.0))?;
                (q.clone(), q)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
                let mut mk = || {
                    KernelCombination::new(
                        (0..*terms)
                            .map(|_| {
                                (
                                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                                    Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..2.0)),
                                )
                            })
                            .collect(),
                    )
                };
                (mk()?, mk()?)
            };
            let r = os_isometry_check(&nu, &f, &g, &cfg)?;
            let v = json!({
                "f": f.terms.iter().map(|&(a, z)| [pair(a), pair(z)]).collect::<Vec<_>>(),
                "g": g.terms.iter().map(|&(a, z)| [pair(a), pair(z)]).collect::<Vec<_>>(),
                "lhs": r.lhs,
                "rhs": r.rhs,
                "deviation": r.deviation,
            });
            Ok((json_string(&v), r.deviation <= *threshold))
        }
        Command::Compactness { measure } => {
            let ok = compactness_check(&load_measure(measure)?);
            Ok((json_string(&json!({ "compact": ok })), ok))
        }
        Command::KernelDemo { p, ns } => Ok((kernel_demo_csv(&kernel_demo(*p, ns, &cfg)?), true)),
        Command::SymbolFromMeasure { measure, points } => {
            let mu = load_measure(measure)?;
            let mut s = String::from("p,re,im\n");
            for &p in points {
                let v = symbol_from_measure(&mu, p)?;
                let _ = writeln!(s, "{},{},{}", fmt17(p), fmt17(v.re), fmt17(v.im));
            }
            Ok((s, true))
        }
        Command::WriteSpec { kind, dim, poles } => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let mut s = match kind {
                SpecKind::Lebesgue => BoundaryMeasure::lebesgue_example().to_json_string()?,
                SpecKind::RandomMeasure => BoundaryMeasure::random(&mut rng, 3, true, true).to_json_string()?,
                SpecKind::WorkedPick => RationalPickFunction::worked_example().to_json()?,
                SpecKind::RandomPick => {
                    if !(1..=8).contains(dim) || *poles > 8 {
                        return Err(input("random Pick specs need 1 ≤ dim ≤ 8 and at most 8 poles"));
                    }
                    RationalPickFunction::random_regular(&mut rng, *dim, *poles).to_json()?
                }
            };
            s.push('\n');
            Ok((s, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, ok) = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Io(msg)) => {
            eprintln!("hardyrp: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Lib(e)) => {
            eprintln!("hardyrp: {e}");
            return ExitCode::from(if e.is_input_error() { 2 } else { 3 });
        }
    };
    let written = match &cli.common.out {
        Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(msg) = written {
        eprintln!("hardyrp: {msg}");
        return ExitCode::from(2);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
