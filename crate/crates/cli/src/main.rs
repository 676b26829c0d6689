use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arcmat_core::arcs::{
    dual_arc, make_bush, make_glynn, make_nrc, normalize_frame, sample_arc, Arc, Basis,
    EnumerationMode, DEFAULT_EXHAUSTIVE_BUDGET,
};
use arcmat_core::error::Error;
use arcmat_core::exactla::FqMatrix;
use arcmat_core::gf::Field;
use arcmat_core::harness::{
    run_campaign, run_goal_table, ArcSource, Budget, Campaign, CheckParams, Registry,
    VerificationReport, DEFAULT_SAMPLE_COUNT,
};
use arcmat_core::sysmat::{build_h, build_inclusion, build_l, build_m, build_pqr, fw_rank};
use arcmat_core::tangents::tangent_count;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Arcs, their system matrices, and verification campaigns over finite fields.
#[derive(Parser)]
#[command(name = "arcmat", version)]
struct Cli {
    /// Directory that receives report files in addition to standard output.
    #[arg(long, global = true, env = "ARCMAT_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Field tables and parameters.
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Build, check and transform arc files.
    Arc {
        #[command(subcommand)]
        cmd: ArcCmd,
    },
    /// Build the matrices attached to an arc.
    Matrix {
        #[command(subcommand)]
        cmd: MatrixCmd,
    },
    /// Rank of a matrix file.
    Rank { input: PathBuf },
    /// p-rank of the inclusion matrix of a-subsets versus b-subsets of an r-set, by formula.
    RankFormula {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        p: u32,
    },
    /// Run a named identity check on random instances.
    Verify(VerifyArgs),
    /// Run a verification campaign over a population of arcs.
    Campaign {
        #[command(subcommand)]
        cmd: CampaignCmd,
    },
}

#[derive(Args, Clone)]
struct FieldArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    e: u32,
}

impl FieldArgs {
    fn field(&self) -> Result<Field, Error> {
        Field::new(self.p, self.e)
    }
}

#[derive(Subcommand)]
enum FieldCmd {
    Info(FieldArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ArcType {
    Nrc,
    Glynn,
    Bush,
    Sample,
}

#[derive(Subcommand)]
enum ArcCmd {
    /// Write a built-in construction or a sampled arc.
    Gen {
        #[arg(long = "type", value_enum)]
        kind: ArcType,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long)]
        k: Option<usize>,
        /// Keep only the first SIZE members (sampled arcs: the size to draw).
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Exit 0 if the file is an arc, 1 with a degenerate subset otherwise.
    Check { input: PathBuf },
    /// The dual arc of size |S| in dimension |S| - k.
    Dual {
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// The equivalent arc whose first k + 1 members are the standard frame.
    Normalize {
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    #[value(name = "M")]
    M,
    #[value(name = "H")]
    H,
    #[value(name = "P")]
    P,
    #[value(name = "Q")]
    Q,
    #[value(name = "R")]
    R,
    #[value(name = "L")]
    L,
    #[value(name = "inclusion")]
    Inclusion,
}

#[derive(Subcommand)]
enum MatrixCmd {
    Build {
        #[arg(long, value_enum)]
        kind: MatrixKind,
        /// Arc file (all kinds except inclusion).
        #[arg(long)]
        arc: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// |G| for P, Q and R; defaults to t + k + n.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        a: Option<usize>,
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    name: String,
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct CampaignArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long)]
    size: Option<usize>,
    /// Enumerate frame-normalised arcs instead of sampling.
    #[arg(long, conflicts_with = "sample")]
    exhaustive: bool,
    /// Number of sampled arcs.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Source::Generated)]
    source: Source,
    /// Shorthand for the normal-rational-curve prefix (random curve subarcs with --sample).
    #[arg(long)]
    from_nrc_subarc: bool,
    #[arg(long)]
    max_arcs: Option<usize>,
    #[arg(long, default_value_t = Budget::default().search_nodes)]
    search_nodes: u64,
    #[arg(long, default_value_t = 1)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Generated,
    NrcPrefix,
    NrcSubarcs,
    Glynn,
}

#[derive(Subcommand)]
enum CampaignCmd {
    Perrank(CampaignArgs),
    Classify(CampaignArgs),
    Extension {
        #[command(flatten)]
        args: CampaignArgs,
        /// Gate on a weight-one vector in the column space instead of full rank.
        #[arg(long)]
        weight_one: bool,
    },
    /// Any registered campaign kind by name.
    Run {
        kind: String,
        #[command(flatten)]
        args: CampaignArgs,
    },
    GoalTable(FieldArgs),
}

/// A mathematical failure (exit 1) or a usage problem (exit 2).
enum Failure {
    Found(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Found(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn read_arc(path: &Path) -> Result<Arc, Failure> {
    Ok(Arc::parse(&read_input(path)?)?)
}

fn emit(text: &str, output: Option<&Path>) -> Outcome {
    match output {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Copies a report into the output directory, when one is configured.
fn save(cli: &Cli, name: &str, text: &str) -> Outcome {
    if let Some(dir) = &cli.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Field {
            cmd: FieldCmd::Info(args),
        } => field_info(cli, &args.field()?),
        Command::Arc { cmd } => arc_cmd(cmd),
        Command::Matrix { cmd } => matrix_cmd(cmd),
        Command::Rank { input } => {
            let m = FqMatrix::parse_dump(&read_input(input)?)?;
            println!("{}", m.rank());
            Ok(())
        }
        Command::RankFormula { r, a, b, p } => {
            println!("{}", fw_rank(*r, *a, *b, *p)?);
            Ok(())
        }
        Command::Verify(args) => verify(cli, args),
        Command::Campaign { cmd } => campaign_cmd(cli, cmd),
    }
}

fn field_info(cli: &Cli, f: &Field) -> Outcome {
    let spec = f.spec();
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&spec).expect("serializable")
        ),
        Format::Csv => println!(
            "p,e,q,modulus\n{},{},{},{}",
            spec.p,
            spec.e,
            spec.q,
            f.modulus_encoding()
        ),
        Format::Text => {
            let coeffs: Vec<String> = spec.modulus.iter().map(u32::to_string).collect();
            println!(
                "GF({}^{}) of order {}, modulus coefficients (low to high) {}",
                spec.p,
                spec.e,
                spec.q,
                coeffs.join(" ")
            );
            println!("header: {}", f.header());
        }
    }
    Ok(())
}

fn arc_cmd(cmd: &ArcCmd) -> Outcome {
    match cmd {
        ArcCmd::Gen {
            kind,
            p,
            e,
            k,
            size,
            seed,
            index,
            output,
        } => {
            let field = || -> Result<Field, Failure> {
                let p =
                    p.ok_or_else(|| Failure::Usage("--p is required for this arc type".into()))?;
                Ok(Field::new(p, *e)?)
            };
            let dim =
                || k.ok_or_else(|| Failure::Usage("--k is required for this arc type".into()));
            let arc = match kind {
                ArcType::Glynn => make_glynn(),
                ArcType::Nrc => make_nrc(&field()?, dim()?)?,
                ArcType::Bush => make_bush(&field()?, dim()?),
                ArcType::Sample => {
                    let size = size.ok_or_else(|| {
                        Failure::Usage("--size is required for sampled arcs".into())
                    })?;
                    sample_arc(&field()?, dim()?, size, *seed, *index)?
                }
            };
            let arc = match (kind, size) {
                (ArcType::Sample, _) | (_, None) => arc,
                (_, Some(s)) => arc.prefix(*s)?,
            };
            emit(&arc.to_text(), output.as_deref())
        }
        ArcCmd::Check { input } => {
            let arc = read_arc(input)?;
            let check = arc.check()?;
            if check.is_arc {
                println!(
                    "arc: {} vectors in dimension {} over GF({})",
                    arc.len(),
                    arc.k(),
                    arc.field().q()
                );
                Ok(())
            } else {
                let w = check.witness.map(|s| s.to_vec()).unwrap_or_default();
                Err(Failure::Found(format!(
                    "not an arc: members {w:?} are linearly dependent"
                )))
            }
        }
        ArcCmd::Dual { input, output } => emit(
            &dual_arc(&read_arc(input)?.recertify()?)?.to_text(),
            output.as_deref(),
        ),
        ArcCmd::Normalize { input, output } => emit(
            &normalize_frame(&read_arc(input)?.recertify()?)?.to_text(),
            output.as_deref(),
        ),
    }
}

fn matrix_cmd(cmd: &MatrixCmd) -> Outcome {
    let MatrixCmd::Build {
        kind,
        arc,
        n,
        m,
        r,
        a,
        b,
        p,
        e,
        output,
    } = cmd;
    let need = |v: &Option<usize>, flag: &str| {
        v.ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
    };
    let matrix = if let MatrixKind::Inclusion = kind {
        let p = p.ok_or_else(|| Failure::Usage("--p is required".into()))?;
        build_inclusion(
            &Field::new(p, *e)?,
            need(r, "r")?,
            need(a, "a")?,
            need(b, "b")?,
        )?
    } else {
        let path = arc
            .as_ref()
            .ok_or_else(|| Failure::Usage("--arc is required".into()))?;
        let s = read_arc(path)?.recertify()?;
        let std = Basis::standard(s.field(), s.k());
        match kind {
            MatrixKind::M => build_m(&s, *n, &std)?,
            MatrixKind::H => build_h(&s, *n, &std)?,
            MatrixKind::L => build_l(&s)?,
            MatrixKind::P | MatrixKind::Q | MatrixKind::R => {
                let g = match m {
                    Some(g) => *g,
                    None => tangent_count(&s)? + s.k() + n,
                };
                let pqr = build_pqr(&s, g, *n)?;
                match kind {
                    MatrixKind::P => pqr.p,
                    MatrixKind::Q => pqr.q,
                    _ => pqr.r,
                }
            }
            MatrixKind::Inclusion => unreachable!(),
        }
    };
    emit(&matrix.dump(), output.as_deref())
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Outcome {
    let registry = Registry::checks();
    let check = registry.get(&args.name)?;
    let params = CheckParams {
        field: args.field.field()?.spec(),
        k: args.k,
        n: args.n,
        count: args.count,
        seed: args.seed,
    };
    let res = check.run(&params)?;
    let json =
        serde_json::to_string_pretty(&serde_json::json!({ "params": params, "result": res }))
            .expect("serializable");
    match cli.format {
        Format::Json => println!("{json}"),
        Format::Csv => println!(
            "check,passed,instances\n{},{},{}",
            res.check, res.passed, res.instances
        ),
        Format::Text => println!(
            "{}: {} ({} instances)",
            res.check,
            if res.passed { "pass" } else { "FAIL" },
            res.instances
        ),
    }
    save(
        cli,
        &format!(
            "verify-{}-q{}-k{}-seed{}.json",
            args.name, params.field.q, args.k, args.seed
        ),
        &json,
    )?;
    if res.passed {
        Ok(())
    } else {
        Err(Failure::Found(format!(
            "verify {}: failure found",
            args.name
        )))
    }
}

fn campaign_of(kind: &str, a: &CampaignArgs) -> Result<Campaign, Failure> {
    let field = a.field.field()?;
    let mode = if a.exhaustive {
        EnumerationMode::Exhaustive {
            budget: DEFAULT_EXHAUSTIVE_BUDGET,
        }
    } else {
        EnumerationMode::Sample {
            count: a.sample.unwrap_or(DEFAULT_SAMPLE_COUNT),
            seed: a.seed,
        }
    };
    let source = match (a.from_nrc_subarc, a.source) {
        (true, _) if a.sample.is_some() => ArcSource::NrcSubarcs,
        (true, _) => ArcSource::NrcPrefix,
        (false, Source::Generated) => ArcSource::Generated,
        (false, Source::NrcPrefix) => ArcSource::NrcPrefix,
        (false, Source::NrcSubarcs) => ArcSource::NrcSubarcs,
        (false, Source::Glynn) => ArcSource::Glynn,
    };
    let mut c = Campaign::new(kind, &field, a.k, a.n, mode)
        .with_source(source)
        .with_instances(a.instances);
    c.size = a.size;
    c.budget = Budget {
        max_arcs: a.max_arcs,
        search_nodes: a.search_nodes,
    };
    Ok(c)
}

fn campaign_cmd(cli: &Cli, cmd: &CampaignCmd) -> Outcome {
    let (kind, args) = match cmd {
        CampaignCmd::Perrank(a) => ("perrank", a),
        CampaignCmd::Classify(a) => ("classify", a),
        CampaignCmd::Extension { args, weight_one } => (
            if *weight_one {
                "weight_one"
            } else {
                "extension_crosscheck"
            },
            args,
        ),
        CampaignCmd::Run { kind, args } => (kind.as_str(), args),
        CampaignCmd::GoalTable(f) => {
            let table = run_goal_table(&f.field()?);
            let json = serde_json::to_string_pretty(&table).expect("serializable");
            match cli.format {
                Format::Json => println!("{json}"),
                Format::Csv => {
                    println!("n,k_bound,size_cap");
                    for r in &table.rows {
                        println!("{},{},{}", r.n, r.k_bound, r.size_cap);
                    }
                }
                Format::Text => {
                    println!(
                        "q = {}, p = {}, n ranges over 0..={}",
                        table.q, table.p, table.n_max
                    );
                    for r in &table.rows {
                        println!(
                            "  n = {}: k <= {} (and k <= {})",
                            r.n, r.k_bound, r.size_cap
                        );
                    }
                    println!(
                        "aggregate bound {} (floor {})",
                        table.mds_bound, table.mds_bound_floor
                    );
                }
            }
            return save(cli, &format!("goal-table-q{}.json", table.q), &json);
        }
    };
    let campaign = campaign_of(kind, args)?;
    let report = run_campaign(&campaign, args.jobs)?;
    print_report(cli, &report)?;
    if report.all_passed() {
        Ok(())
    } else {
        let first = &report.body.failures[0];
        Err(Failure::Found(format!(
            "{} of {} arcs failed; first witness {:?}: {}",
            report.body.failures.len(),
            report.body.arcs_tested,
            first.encoding,
            first.detail
        )))
    }
}

fn print_report(cli: &Cli, report: &VerificationReport) -> Outcome {
    let json = report.to_json();
    let b = &report.body;
    match cli.format {
        Format::Json => println!("{json}"),
        Format::Csv => println!("{}\n{}", VerificationReport::csv_header(), report.csv_row()),
        Format::Text => {
            println!(
                "{} over GF({}) k={} n={} size={}: {}/{} passed{}",
                b.campaign.kind,
                b.campaign.field.q,
                b.campaign.k,
                b.campaign.n,
                b.arc_size,
                b.passes,
                b.arcs_tested,
                if b.exploratory { " (exploratory)" } else { "" }
            );
            for w in &b.failures {
                println!("witness {:?}: {}", w.encoding, w.detail);
            }
        }
    }
    let stem = format!(
        "{}-q{}-k{}-n{}-seed{}",
        b.campaign.kind,
        b.campaign.field.q,
        b.campaign.k,
        b.campaign.n,
        b.seed
            .map(|s| s.to_string())
            .unwrap_or_else(|| "exhaustive".into())
    );
    save(cli, &format!("{stem}.json"), &json)?;
    if cli.out_dir.is_some() {
        save(
            cli,
            &format!("{stem}.csv"),
            &format!(
                "{}\n{}\n",
                VerificationReport::csv_header(),
                report.csv_row()
            ),
        )?;
        for (i, w) in b.failures.iter().enumerate() {
            save(cli, &format!("{stem}-witness{i}.arc"), &w.arc)?;
        }
    }
    Ok(())
}
