use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use disint_core::document;
use disint_core::AnalysisOptions;

mod commands;

use commands::{Failure, Op, Report};

/// Disintegration of relative train track maps.
///
/// Exit status: 0 success, 1 input error, 2 verification failure.
#[derive(Parser)]
#[command(name = "disint", version)]
struct Cli {
    /// Length bound for the Nielsen path search.
    #[arg(long, global = true)]
    nielsen_bound: Option<usize>,
    /// Iterates checked when a splitting has an illegal juncture.
    #[arg(long, global = true)]
    split_depth: Option<usize>,
    /// Structured output: one JSON object, or JSON Lines for several files.
    #[arg(long, global = true)]
    json: bool,
    /// Ignored; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of input files analysed at once.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Files {
    /// Map documents; `-` reads standard input.
    #[arg(required = true)]
    files: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    General,
    Ia,
}

#[derive(Subcommand)]
enum Command {
    /// Check every clause of the normal form.
    CheckCt(Files),
    /// Nielsen path catalog and complete splittings of edge images.
    Nielsen(Files),
    /// Filtration and stratum kinds.
    Strata(Files),
    /// Almost invariant subgraphs, relations and lattice basis.
    Disintegrate(Files),
    /// Rank of the admissible lattice.
    Rank(Files),
    /// Edge images of f_a.
    Fa {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        tuple: Vec<i64>,
        #[command(flatten)]
        files: Files,
    },
    /// Compare f_a∘f_b, f_b∘f_a and f_{a+b}.
    VerifyCommute {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        a: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        b: Vec<i64>,
        #[command(flatten)]
        files: Files,
    },
    /// Coordinates of f_a, evaluated and predicted.
    Coords {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        tuple: Vec<i64>,
        #[command(flatten)]
        files: Files,
    },
    /// FPS blocks of the filtration.
    Fps(Files),
    /// Decompose a maximal rank configuration.
    Classify {
        #[arg(long, value_enum, default_value = "general")]
        mode: ModeArg,
        #[command(flatten)]
        files: Files,
    },
    /// Check the rank inequality on blocks of the filtration.
    Audit {
        /// Block boundaries j of the subgraphs G_j, e.g. 0,2,5.
        #[arg(long, value_delimiter = ',')]
        grouping: Option<Vec<usize>>,
        #[command(flatten)]
        files: Files,
    },
    /// Print the generic representative of a model family.
    #[command(subcommand)]
    Gen(Family),
    /// Graphviz rendering with strata colored by kind.
    ExportDot(Files),
}

#[derive(Subcommand)]
enum Family {
    TypeE {
        #[arg(long)]
        n: usize,
    },
    TypeC {
        #[arg(long)]
        n: usize,
        /// Homologically trivial word in x1, x2.
        #[arg(long, default_value = "x1 x2 x1' x2'")]
        w: String,
    },
}

fn split(cmd: Command) -> Result<(Op, Vec<String>), Family> {
    Ok(match cmd {
        Command::CheckCt(f) => (Op::CheckCt, f.files),
        Command::Nielsen(f) => (Op::Nielsen, f.files),
        Command::Strata(f) => (Op::Strata, f.files),
        Command::Disintegrate(f) => (Op::Disintegrate, f.files),
        Command::Rank(f) => (Op::Rank, f.files),
        Command::Fa { tuple, files } => (Op::Fa(tuple), files.files),
        Command::VerifyCommute { a, b, files } => (Op::VerifyCommute(a, b), files.files),
        Command::Coords { tuple, files } => (Op::Coords(tuple), files.files),
        Command::Fps(f) => (Op::Fps, f.files),
        Command::Classify { mode, files } => (
            Op::Classify(match mode {
                ModeArg::General => disint_core::max_rank::Mode::General,
                ModeArg::Ia => disint_core::max_rank::Mode::Ia,
            }),
            files.files,
        ),
        Command::Audit { grouping, files } => (Op::Audit(grouping), files.files),
        Command::ExportDot(f) => (Op::ExportDot, f.files),
        Command::Gen(family) => return Err(family),
    })
}

fn read_input(path: &str, stdin: &Option<String>) -> Result<String, Failure> {
    if path == "-" {
        return stdin.clone().ok_or_else(|| Failure::input("standard input is unreadable".into()));
    }
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {path}: {e}")))
}

struct Flags {
    nielsen_bound: Option<usize>,
    split_depth: Option<usize>,
    json: bool,
}

fn run_file(op: &Op, text: Result<String, Failure>, flags: &Flags) -> Result<Report, Failure> {
    let loaded = document::parse(&text?).map_err(Failure::from)?;
    let mut options: AnalysisOptions = loaded.options();
    if flags.nielsen_bound.is_some() {
        options.nielsen_bound = flags.nielsen_bound;
    }
    if let Some(k) = flags.split_depth {
        options.split_depth = k;
    }
    let a = loaded.analyze(options).map_err(Failure::from)?;
    commands::run(op, &a)
}

fn generate(family: &Family, json: bool) -> (String, u8) {
    use disint_core::free_group::Word;
    use disint_core::max_rank::{gen_type_c, gen_type_e};
    let fam = match family {
        Family::TypeE { n } => gen_type_e(*n),
        Family::TypeC { n, w } => Word::parse(w).and_then(|w| gen_type_c(*n, &w)),
    };
    match fam {
        Ok(f) => (document::to_json(&document::to_document(&f.generic, None)) + "\n", 0),
        Err(e) if json => (serde_json::json!({ "error": e.to_string() }).to_string() + "\n", 1),
        Err(e) => {
            eprintln!("disint: {e}");
            (String::new(), 1)
        }
    }
}

/// Output for one file and its exit code.
fn render(file: &str, many: bool, result: Result<Report, Failure>, flags: &Flags) -> (String, u8) {
    match result {
        Ok(r) => {
            let code = if r.failed { 2 } else { 0 };
            if flags.json {
                let mut obj = serde_json::Map::new();
                if many {
                    obj.insert("file".into(), file.into());
                }
                obj.insert("ok".into(), (!r.failed).into());
                if let serde_json::Value::Object(m) = r.json {
                    obj.extend(m);
                }
                let v = serde_json::Value::Object(obj);
                let text = if many { v.to_string() } else { serde_json::to_string_pretty(&v).unwrap() };
                (text + "\n", code)
            } else if many {
                (format!("== {file} ==\n{}", r.text), code)
            } else {
                (r.text, code)
            }
        }
        Err(f) => {
            let (code, msg) = (f.code(), f.message());
            eprintln!("disint: {file}: {msg}");
            if flags.json {
                let mut obj = serde_json::Map::new();
                if many {
                    obj.insert("file".into(), file.into());
                }
                obj.insert("ok".into(), false.into());
                obj.insert("error".into(), msg.into());
                obj.insert("exit".into(), code.into());
                if let Some(h) = f.hint() {
                    obj.insert("suggestion".into(), h);
                }
                let v = serde_json::Value::Object(obj);
                let text = if many { v.to_string() } else { serde_json::to_string_pretty(&v).unwrap() };
                (text + "\n", code)
            } else {
                (String::new(), code)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let _ = cli.seed;
    let flags = Flags { nielsen_bound: cli.nielsen_bound, split_depth: cli.split_depth, json: cli.json };
    let mut out = std::io::stdout().lock();
    let (op, files) = match split(cli.command) {
        Ok(x) => x,
        Err(family) => {
            let (text, code) = generate(&family, flags.json);
            let _ = out.write_all(text.as_bytes());
            return ExitCode::from(code);
        }
    };
    if files.iter().filter(|f| *f == "-").count() > 1 {
        eprintln!("disint: standard input can be named only once");
        return ExitCode::from(1);
    }
    let stdin = if files.iter().any(|f| f == "-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).ok().map(|_| s)
    } else {
        None
    };
    let many = files.len() > 1;
    let jobs = cli.jobs.max(1).min(files.len());
    let mut results: Vec<Option<(String, u8)>> = vec![None; files.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..jobs).map(|j| (j..files.len()).step_by(jobs).collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                let (op, files, flags, stdin) = (&op, &files, &flags, &stdin);
                scope.spawn(move || {
                    idx.into_iter()
                        .map(|i| {
                            let r = run_file(op, read_input(&files[i], stdin), flags);
                            (i, render(&files[i], many, r, flags))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let mut code = 0;
    for (text, c) in results.into_iter().flatten() {
        let _ = out.write_all(text.as_bytes());
        code = code.max(c);
    }
    ExitCode::from(code)
}
