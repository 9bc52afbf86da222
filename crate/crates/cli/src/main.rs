use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flowtwist::identity_flow;
use flowtwist::render::{
    appendix_panels, render_appendix_suite, render_trace, DiagramSpec, Orientation, RenderOptions,
};
use flowtwist::rules::{builtin_generator, parse_local_rule, validate_partition, LocalRule};
use flowtwist::symbol::{AnchoredWord, VertexShift};
use flowtwist::veelike::{builtin_bijection, compile_to_local_rule, PrefixBijection};
use flowtwist::verify::{
    apply_relation, default_relations, parse_relations, verify_embedding, Engine, Generators,
    Relation, DEFAULT_MAX_LEN,
};

#[derive(Parser)]
#[command(
    name = "flowtwist",
    version,
    about = "Exact checks of flow-preserving rewrite rules on the 0-1-2 shift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    RuleTable,
    Bijection,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::RuleTable => Engine::RuleTable,
            EngineArg::Bijection => Engine::Bijection,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Rows,
    Columns,
}

#[derive(Args)]
struct GeneratorArgs {
    /// Engine that applies the generators.
    #[arg(long, value_enum, default_value = "rule-table")]
    engine: EngineArg,
    /// Replacement for c: a built-in name (c, c_broken) or a bijection file.
    #[arg(long = "generator-c")]
    generator_c: Option<String>,
}

impl GeneratorArgs {
    fn generators(&self) -> Result<Generators> {
        match self.generator_c.as_deref() {
            None | Some("c") => Ok(Generators::standard()),
            Some(spec) => Ok(Generators::with_c(load_bijection(spec)?)?),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that a rule covers every cell of every legal window exactly once.
    Validate {
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        rule: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Apply a sequence of generators to an anchored word and print the result.
    Apply {
        #[arg(long)]
        word: String,
        #[arg(long)]
        element: String,
        #[command(flatten)]
        gens: GeneratorArgs,
    },
    /// Verify that relations act as the identity, flow included.
    Verify {
        /// Relation file, or `default` for the nine defining relations.
        #[arg(long, default_value = "default")]
        relations: String,
        #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
        max_len: usize,
        #[command(flatten)]
        gens: GeneratorArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a prefix bijection into a local rule file.
    Compile {
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        bijection: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the spacetime diagram of an element applied to a word.
    Render {
        #[arg(long)]
        word: String,
        #[arg(long)]
        element: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "rows")]
        orientation: OrientationArg,
        #[arg(long, default_value_t = 24.0)]
        scale: f64,
        #[arg(long)]
        hide_discontinuities: bool,
        #[command(flatten)]
        gens: GeneratorArgs,
    },
    /// Draw the diagram suite for the defining relations.
    Suite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "columns")]
        orientation: OrientationArg,
        #[command(flatten)]
        gens: GeneratorArgs,
    },
}

fn load_bijection(spec: &str) -> Result<PrefixBijection> {
    let bij = match builtin_bijection(spec) {
        Ok(b) => b,
        Err(_) => {
            let text =
                fs::read_to_string(spec).with_context(|| format!("reading bijection {spec}"))?;
            let name = Path::new(spec)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("custom");
            PrefixBijection::parse(&text, name)?
        }
    };
    bij.ensure_valid()?;
    Ok(bij)
}

fn load_rule(rule: Option<&Path>, builtin: Option<&str>) -> Result<LocalRule> {
    match (rule, builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading rule {}", path.display()))?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("rule");
            Ok(parse_local_rule(&text, name)?)
        }
        (None, Some(name)) => Ok(builtin_generator(name)?),
        (None, None) => bail!("either --rule or --builtin is required"),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn render_options(
    orientation: OrientationArg,
    scale: f64,
    gray: bool,
    engine: EngineArg,
) -> RenderOptions {
    RenderOptions {
        orientation: match orientation {
            OrientationArg::Rows => Orientation::Rows,
            OrientationArg::Columns => Orientation::Columns,
        },
        scale,
        show_discontinuities: gray,
        engine: engine.into(),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { rule, builtin } => {
            let rule = load_rule(rule.as_deref(), builtin.as_deref())?;
            let report = validate_partition(&rule, &VertexShift::standard());
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(status(report.ok))
        }
        Command::Apply {
            word,
            element,
            gens,
        } => {
            let word = AnchoredWord::parse(&word)?;
            let rel = Relation::new(&element)?;
            let trace = apply_relation(
                &rel,
                &identity_flow(&word),
                gens.engine.into(),
                &gens.generators()?,
            )?;
            println!("{}", serde_json::to_string_pretty(trace.final_flow())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            relations,
            max_len,
            gens,
            out,
        } => {
            if max_len == 0 {
                bail!("--max-len must be at least 1");
            }
            let relations = if relations == "default" {
                default_relations()
            } else {
                let text = fs::read_to_string(&relations)
                    .with_context(|| format!("reading {relations}"))?;
                parse_relations(&text)?
            };
            let summary =
                verify_embedding(&relations, max_len, gens.engine.into(), &gens.generators()?);
            for r in &summary.reports {
                let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
                eprintln!(
                    "{} {} read-depth {} stabilization {}{}",
                    r.verdict,
                    r.label,
                    opt(r.read_depth),
                    opt(r.stabilization_length),
                    r.witnesses
                        .first()
                        .map_or(String::new(), |w| format!(" witness {}", w.word))
                );
            }
            eprintln!(
                "{} ({} relations, max length {})",
                summary.verdict,
                summary.reports.len(),
                max_len
            );
            let json = serde_json::to_string_pretty(&summary)? + "\n";
            write_or_print(out.as_deref(), &json)?;
            Ok(status(summary.verdict.is_pass()))
        }
        Command::Compile {
            bijection,
            builtin,
            out,
        } => {
            let bij = match (bijection, builtin) {
                (Some(path), _) => load_bijection(path.to_str().context("non UTF-8 path")?)?,
                (None, Some(name)) => builtin_bijection(&name)?,
                (None, None) => bail!("either --bijection or --builtin is required"),
            };
            let rule = compile_to_local_rule(&bij)?;
            write_or_print(out.as_deref(), &rule.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render {
            word,
            element,
            out,
            orientation,
            scale,
            hide_discontinuities,
            gens,
        } => {
            let spec = DiagramSpec::new(AnchoredWord::parse(&word)?, Relation::new(&element)?)
                .with_options(render_options(
                    orientation,
                    scale,
                    !hide_discontinuities,
                    gens.engine,
                ));
            let diagram = render_trace(&spec, &gens.generators()?)?;
            fs::write(&out, &diagram.svg).with_context(|| format!("writing {}", out.display()))?;
            println!("{}", serde_json::to_string_pretty(&diagram.stats)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite {
            out,
            orientation,
            gens,
        } => {
            let options = render_options(orientation, 24.0, true, gens.engine);
            let suite = render_appendix_suite(&appendix_panels(), &options, &gens.generators()?)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for d in &suite.diagrams {
                let path = out.join(d.file_name());
                fs::write(&path, &d.diagram.svg)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!(
                "{} diagrams, {} intra-tile discontinuities",
                suite.diagrams.len(),
                suite.discontinuities
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("FLOWTWIST_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
