use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cyllens_cli::{cmd_analyze, cmd_cover, cmd_generate, cmd_verify, CliError, FieldInput, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "cyllens", version, about = "Parabolic-cylinder functionals and regularity diagnostics for sampled flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated field as `<stem>.bin` + `<stem>.hdr`.
    Generate(Common),
    /// Functional sweeps and regularity verdicts per centre.
    Analyze(Common),
    /// Inequality ratio suites; fails on assertion-tier violations.
    Verify(Common),
    /// Candidate flagging, Vitali cover and premeasure curve.
    Cover(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration; defaults apply to absent keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Field file stem (or `.hdr`/`.bin` path). Output stem for `generate`; input otherwise,
    /// where the configured generator is used when absent.
    #[arg(long)]
    field: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `generator.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `generator.name`.
    #[arg(long)]
    generator: Option<String>,
    /// Overrides `analysis.lambda`.
    #[arg(long)]
    lambda: Option<f64>,
    /// Overrides `analysis.radii`, comma separated.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Overrides `verify.suites`, comma separated.
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    /// Overrides `cover.l`.
    #[arg(long)]
    l: Option<f64>,
    /// Overrides `cover.m`.
    #[arg(long)]
    m: Option<f64>,
    /// Any config key as `section.key=value` (TOML value syntax), repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut o = Vec::new();
        if let Some(s) = self.seed {
            o.push(format!("generator.seed={s}"));
        }
        if let Some(g) = &self.generator {
            o.push(format!("generator.name={g:?}"));
        }
        if let Some(l) = self.lambda {
            o.push(format!("analysis.lambda={l:?}"));
        }
        if let Some(r) = &self.radii {
            o.push(format!("analysis.radii=[{}]", list(r)));
        }
        if let Some(s) = &self.suite {
            let names: Vec<String> = s.iter().map(|n| format!("{n:?}")).collect();
            o.push(format!("verify.suites=[{}]", names.join(", ")));
        }
        if let Some(l) = self.l {
            o.push(format!("cover.l={l:?}"));
        }
        if let Some(m) = self.m {
            o.push(format!("cover.m={m:?}"));
        }
        o.extend(self.set.iter().cloned());
        o
    }

    fn input(&self) -> FieldInput {
        match &self.field {
            Some(p) => FieldInput::File(p.clone()),
            None => FieldInput::Generator,
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (Command::Generate(c) | Command::Analyze(c) | Command::Verify(c) | Command::Cover(c)) = &cli.command;
    let cfg = RunConfig::load(c.config.as_deref(), &c.overrides())?;
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Generate(c) => {
            let stem = c.field.clone().unwrap_or_else(|| c.out.join("field"));
            let sum = cmd_generate(&cfg, &stem)?;
            println!("{sum}");
            Ok(vec![stem.with_extension("hdr"), stem.with_extension("bin")])
        }
        Command::Analyze(c) => cmd_analyze(&cfg, &c.input(), &c.out),
        Command::Verify(c) => cmd_verify(&cfg, &c.input(), &c.out),
        Command::Cover(c) => cmd_cover(&cfg, &c.input(), &c.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cyllens: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
