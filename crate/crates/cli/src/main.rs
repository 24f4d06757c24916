//! `qembed`: jointly embed two point sets from their proximities.
//!
//! Exit codes: 0 success, 1 no embedding for these inputs (neither set
//! Euclidean, search exhausted, constants rejected), 2 invalid input,
//! 3 internal inconsistency or failed verification.

mod report;

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use qembed::embed::{embed_joint, joint_target, verify_distances, VerificationReport};
use qembed::instance::ConstantOverrides;
use qembed::pipeline::{build_f_alpha, find_constants, validate_constants, SearchCriterion, SearchOptions};
use qembed::spectral::{is_psd, DEFAULT_PSD_TOLERANCE};
use qembed::{
    build_cosine_law, load_instance, BaseCosineContext, EmbeddingConstants, Error, InstancePaths,
    ProblemInstance, Role, RunConfig,
};

#[derive(Parser)]
#[command(name = "qembed", version, about = "Joint Euclidean embedding of two point sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test both sets for Euclidean embeddability at every reference point.
    Check(InputArgs),
    /// Find constants, embed, verify, and write coordinates.
    Embed(EmbedArgs),
    /// Check a coordinate file against the shifted proximities.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// JSON run configuration; flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    dx: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    dy: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    f: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    ux: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    uy: Option<PathBuf>,
    /// Leave the origin point out of the construction.
    #[arg(long)]
    no_origin: bool,
    /// 1-based index of the reference point within the Euclidean set.
    #[arg(long)]
    reference: Option<usize>,
    /// Relative tolerance of the PSD test.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    /// The joint cosine-law matrix is PSD.
    Joint,
    /// Each of the four summands of its split is PSD.
    Split,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    c3: Option<f64>,
    #[arg(long)]
    max_doublings: Option<usize>,
    #[arg(long, value_enum, default_value = "joint")]
    criterion: Criterion,
    /// Keep only the coordinate columns of nonzero eigenvalues.
    #[arg(long)]
    truncate_rank: bool,
    /// Coordinate CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Coordinate CSV to audit.
    #[arg(long)]
    coords: PathBuf,
    /// Shift to check the rows of W against.
    #[arg(long, conflicts_with = "report")]
    epsilon: Option<f64>,
    /// Report of the run that produced the coordinates; also checks the z row.
    #[arg(long, required_unless_present = "epsilon")]
    report: Option<PathBuf>,
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NeitherSetEuclidean { .. }
            | Error::SearchExhausted { .. }
            | Error::ConstantsRejected { .. } => 1,
            Error::NotPsd { .. } | Error::NoConvergence { .. } => 3,
            _ => 2,
        };
        let message = match &e {
            Error::NotPsd { offending_discs, .. } => {
                let discs: Vec<String> = offending_discs
                    .iter()
                    .map(|d| format!("row {} center {:e} radius {:e}", d.row + 1, d.center, d.radius))
                    .collect();
                format!("internal inconsistency: {e}; offending discs: {}", discs.join("; "))
            }
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

struct Loaded {
    instance: ProblemInstance,
    reference: Option<usize>,
    tol: f64,
    constants: ConstantOverrides,
    max_doublings: Option<usize>,
}

fn load(args: &InputArgs) -> Result<Loaded, Failure> {
    let cfg = args.config.as_deref().map(RunConfig::from_json_file).transpose()?;
    let pick = |flag: &Option<PathBuf>, from_cfg: Option<&PathBuf>, name: &str| {
        flag.clone()
            .or_else(|| from_cfg.cloned())
            .ok_or_else(|| invalid(format!("--{name} is required without a config providing it")))
    };
    let paths = InstancePaths {
        dx: pick(&args.dx, cfg.as_ref().map(|c| &c.dx), "dx")?,
        dy: pick(&args.dy, cfg.as_ref().map(|c| &c.dy), "dy")?,
        f: pick(&args.f, cfg.as_ref().map(|c| &c.f), "f")?,
        ux: args.ux.clone().or_else(|| cfg.as_ref().and_then(|c| c.ux.clone())),
        uy: args.uy.clone().or_else(|| cfg.as_ref().and_then(|c| c.uy.clone())),
    };
    let include_origin = !args.no_origin && cfg.as_ref().is_none_or(|c| c.include_origin);
    let instance = load_instance(&paths, include_origin)?;
    let reference = match args.reference.or(cfg.as_ref().and_then(|c| c.reference)) {
        Some(0) => return Err(invalid("reference indices are 1-based")),
        r => r.map(|r| r - 1),
    };
    let tol = args.tol.or(cfg.as_ref().and_then(|c| c.psd_tolerance)).unwrap_or(DEFAULT_PSD_TOLERANCE);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(invalid(format!("tolerance must be finite and nonnegative, got {tol}")));
    }
    Ok(Loaded {
        instance,
        reference,
        tol,
        constants: cfg.as_ref().map(|c| c.constants).unwrap_or_default(),
        max_doublings: cfg.as_ref().and_then(|c| c.max_doublings),
    })
}

fn cmd_check(args: &InputArgs) -> Result<(), Failure> {
    let loaded = load(args)?;
    let inst = &loaded.instance;
    let mut any = false;
    for (name, d, prefix) in [("X", inst.dx(), "x"), ("Y", inst.dy(), "y")] {
        let mut verdicts = Vec::with_capacity(d.nrows());
        for a in 0..d.nrows() {
            let check = is_psd(build_cosine_law(d, a)?.entries(), loaded.tol)?;
            verdicts.push((check.is_psd, check.summary.min_eigenvalue()));
        }
        let euclidean = verdicts.iter().filter(|v| v.0).count();
        let headline = if euclidean == verdicts.len() {
            "EUCLIDEAN (all references agree)".to_string()
        } else if euclidean == 0 {
            "NOT EUCLIDEAN (all references agree)".to_string()
        } else {
            format!("INCONCLUSIVE ({euclidean} of {} references pass)", verdicts.len())
        };
        println!("{name}: {headline}");
        for (a, (psd, min)) in verdicts.iter().enumerate() {
            println!(
                "  reference {prefix}{}: {} (min eigenvalue {min:.6e})",
                a + 1,
                if *psd { "PSD" } else { "not PSD" }
            );
        }
        any |= verdicts[0].0;
    }
    if !any {
        return Err(Failure { code: 1, message: "neither set is Euclidean".into() });
    }
    let selected = if is_psd(build_cosine_law(inst.dx(), 0)?.entries(), loaded.tol)?.is_psd {
        "X"
    } else {
        "Y (sets swapped)"
    };
    println!("selected: {selected}");
    Ok(())
}

fn write_coords(w: &mut dyn Write, labels: &[Role], coords: &DMatrix<f64>) -> io::Result<()> {
    let header: Vec<String> = (1..=coords.ncols()).map(|j| format!("d{j}")).collect();
    writeln!(w, "label{}{}", if header.is_empty() { "" } else { "," }, header.join(","))?;
    for (i, label) in labels.iter().enumerate() {
        write!(w, "{label}")?;
        for v in coords.row(i).iter() {
            // adding zero turns -0 into 0
            write!(w, ",{:.16e}", v + 0.0)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|source| Failure::from(Error::Io { path: path.into(), source }))
}

fn cmd_embed(args: &EmbedArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let loaded = load(&args.input)?;
    let criterion = match args.criterion {
        Criterion::Joint => SearchCriterion::JointCosineLaw,
        Criterion::Split => SearchCriterion::SplitSummands,
    };
    let ctx = BaseCosineContext::prepare(&loaded.instance, loaded.reference, loaded.tol)?;

    let c1 = args.c1.or(loaded.constants.c1);
    let c2 = args.c2.or(loaded.constants.c2);
    let c3 = args.c3.or(loaded.constants.c3);
    let (search, validated) = match (c1, c2, c3) {
        (Some(c1), Some(c2), Some(c3)) => {
            (validate_constants(&ctx, (c1, c2, c3), loaded.tol, criterion)?, true)
        }
        _ => {
            let defaults = SearchOptions::default();
            let seed =
                (c1.unwrap_or(defaults.seed.0), c2.unwrap_or(defaults.seed.1), c3.unwrap_or(defaults.seed.2));
            let opts = SearchOptions {
                tol: loaded.tol,
                max_doublings: args.max_doublings.or(loaded.max_doublings).unwrap_or(defaults.max_doublings),
                seed,
                criterion,
            };
            (find_constants(&ctx, &opts)?, false)
        }
    };

    let embedding = embed_joint(&ctx, &search.constants, loaded.tol, args.truncate_rank)?;
    let verification = qembed::verify_embedding(&embedding);
    let passed = verification.passed;

    let mut csv = Vec::new();
    write_coords(&mut csv, &embedding.labels, &embedding.coords).expect("writing to memory");
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => io::stdout().write_all(&csv).map_err(|e| invalid(e.to_string()))?,
    }

    let summary = format!(
        "{} embeddable, zeta_f = {:e}, c = ({}, {}, {}), epsilon = {:e}, rank {}, max rel error {:.3e}: {}",
        ctx.selection.embeddable,
        ctx.zeta_f,
        search.constants.c1,
        search.constants.c2,
        search.constants.c3,
        search.constants.epsilon,
        embedding.rank,
        verification.max_rel_error,
        if passed { "PASSED" } else { "FAILED" },
    );
    if let Some(path) = &args.report {
        let rep = report::build(report::ReportInputs {
            ctx: &ctx,
            search: &search,
            validated,
            criterion,
            embedding: &embedding,
            verification,
            wall_clock_seconds: args.timing.then(|| start.elapsed().as_secs_f64()),
        });
        let mut json = serde_json::to_vec_pretty(&rep).expect("report serializes");
        json.push(b'\n');
        write_file(path, &json)?;
    }
    eprintln!("{summary}");
    if passed {
        Ok(())
    } else {
        Err(Failure { code: 3, message: "verification FAILED".into() })
    }
}

/// Reads a labeled coordinate CSV into rows keyed by label.
fn read_coords(path: &Path) -> Result<(Vec<Role>, DMatrix<f64>), Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| invalid(format!("failed to read {}: {e}", path.display())))?;
    let width = reader.headers().map_err(|e| invalid(e.to_string()))?.len();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::from(Error::ShapeMismatch(e.to_string())))?;
        if record.len() != width {
            return Err(Error::ShapeMismatch(format!(
                "row {} has {} fields, header has {width}",
                line + 1,
                record.len()
            ))
            .into());
        }
        let label: Role = record[0]
            .parse()
            .map_err(|_| Failure::from(Error::ShapeMismatch(format!("unknown label {:?}", &record[0]))))?;
        labels.push(label);
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| invalid(format!("{}: cannot parse {field:?} as a number", path.display())))?;
            values.push(v);
        }
    }
    Ok((labels.clone(), DMatrix::from_row_slice(labels.len(), width - 1, &values)))
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let loaded = load(&args.input)?;
    let inst = &loaded.instance;
    let (labels, target) = match (&args.report, args.epsilon) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|source| Failure::from(Error::Io { path: path.clone(), source }))?;
            let json: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let num = |ptr: &str| {
                json.pointer(ptr)
                    .and_then(|v| v.as_f64())
                    .ok_or_else(|| invalid(format!("report lacks {ptr}")))
            };
            let reference = num("/selection/reference_index")? as usize;
            if json.pointer("/instance/include_origin").and_then(|v| v.as_bool())
                != Some(inst.include_origin())
            {
                return Err(Error::ShapeMismatch("origin setting differs from the report".into()).into());
            }
            let ctx = BaseCosineContext::prepare(inst, Some(reference.saturating_sub(1)), loaded.tol)?;
            let constants = EmbeddingConstants::new(
                num("/constants/c1")?,
                num("/constants/c2")?,
                num("/constants/c3")?,
                ctx.zeta_f,
            )?;
            let reported = num("/constants/epsilon")?;
            if (reported - constants.epsilon).abs() > 1e-12 * constants.epsilon {
                return Err(invalid(format!(
                    "report epsilon {reported:e} does not match {:e} recomputed from the instance",
                    constants.epsilon
                )));
            }
            joint_target(&ctx, &constants)
        }
        (None, Some(eps)) => {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(invalid(format!("epsilon must be finite and nonnegative, got {eps}")));
            }
            let idx = inst.indexing();
            let w: Vec<Role> = idx.roles().into_iter().filter(|&r| r != Role::Z).collect();
            (w, build_f_alpha(inst, &idx, eps))
        }
        (None, None) => unreachable!("clap requires one of --epsilon and --report"),
    };

    let (file_labels, file_coords) = read_coords(&args.coords)?;
    let row_of: HashMap<Role, usize> = file_labels.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    if row_of.len() != file_labels.len() {
        return Err(Error::ShapeMismatch("duplicate labels in coordinate file".into()).into());
    }
    let with_z = args.report.is_none() && row_of.contains_key(&Role::Z);
    let expected = labels.len() + usize::from(with_z);
    if file_labels.len() != expected || labels.iter().any(|r| !row_of.contains_key(r)) {
        let want: Vec<String> = labels.iter().map(|r| r.to_string()).collect();
        return Err(Error::ShapeMismatch(format!(
            "expected rows {} but found {} rows",
            want.join(","),
            file_labels.len()
        ))
        .into());
    }
    let coords =
        DMatrix::from_fn(labels.len(), file_coords.ncols(), |i, j| file_coords[(row_of[&labels[i]], j)]);
    let report = verify_distances(&labels, &coords, &target);
    print_verification(&report);
    if report.passed {
        Ok(())
    } else {
        Err(Failure { code: 3, message: "verification FAILED".into() })
    }
}

fn print_verification(r: &VerificationReport) {
    println!(
        "{}: {} pairs, max abs error {:.3e}, max rel error {:.3e}",
        if r.passed { "PASSED" } else { "FAILED" },
        r.pairs_checked,
        r.max_abs_error,
        r.max_rel_error
    );
    for b in &r.blocks {
        let name =
            serde_json::to_value(b.block).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        println!("  {name}: {} pairs, max rel error {:.3e}", b.pairs, b.max_rel_error);
    }
    if let Some(w) = &r.worst_pair {
        println!("  worst pair {}-{}: distance {:.12e}, target {:.12e}", w.a, w.b, w.distance, w.target);
    }
    println!("  rank violations: X {}, Y {}", r.rank_violations_x, r.rank_violations_y);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Embed(args) => cmd_embed(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qembed: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
