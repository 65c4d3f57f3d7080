//! `smaplab run ...`: runs one scenario and exits with 0 (all criteria
//! pass), 2 (a criterion failed), 3 (solver abort) or 1 (usage or I/O error).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smaplab::harness::{self, ConfigPairs, RunConfig, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "smaplab",
    version,
    about = "Radial Schrödinger map and nonlocal NLS experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its output directory.
    Run(RunArgs),
}

/// Flags override values read from `--config`.
#[derive(Debug, Args)]
struct RunArgs {
    /// Config file: `key = value` lines or a flat JSON object.
    #[arg(long)]
    config: Option<PathBuf>,
    /// nls, smap, compare, convergence or weights-audit.
    #[arg(long)]
    scenario: Option<String>,
    /// Number of cells.
    #[arg(long)]
    n: Option<String>,
    /// Outer radius.
    #[arg(long)]
    rmax: Option<String>,
    /// Time step (the NLS step; map runs subdivide it as needed).
    #[arg(long)]
    dt: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    /// Steps between outputs.
    #[arg(long = "output-every")]
    output_every: Option<String>,
    /// gauss-m1, meridian or custom.
    #[arg(long)]
    profile: Option<String>,
    /// Profile amplitude.
    #[arg(long, allow_negative_numbers = true)]
    amp: Option<String>,
    /// Nonlocal coupling K.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<String>,
    /// Local coefficient, -1, 0 or 1.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Radius of the localized virial functional.
    #[arg(long)]
    radius: Option<String>,
    /// Table for the custom profile.
    #[arg(long = "profile-file")]
    profile_file: Option<PathBuf>,
    /// Negate beta in the weight audit (fault injection).
    #[arg(long = "inject-beta-flip")]
    inject_beta_flip: bool,
}

impl RunArgs {
    fn pairs(&self) -> Result<ConfigPairs, smaplab::Error> {
        let mut pairs = match &self.config {
            Some(path) => harness::load_pairs(path)?,
            None => ConfigPairs::new(),
        };
        let flags = [
            ("scenario", self.scenario.clone()),
            ("n", self.n.clone()),
            ("rmax", self.rmax.clone()),
            ("dt", self.dt.clone()),
            ("t-final", self.t_final.clone()),
            ("output-every", self.output_every.clone()),
            ("profile", self.profile.clone()),
            ("amp", self.amp.clone()),
            ("k", self.k.clone()),
            ("lambda", self.lambda.clone()),
            ("seed", self.seed.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("radius", self.radius.clone()),
            (
                "profile-file",
                self.profile_file.as_ref().map(|p| p.display().to_string()),
            ),
            (
                "inject-beta-flip",
                self.inject_beta_flip.then(|| "true".to_string()),
            ),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.insert(key.to_string(), v);
            }
        }
        Ok(pairs)
    }
}

fn report(m: &RunManifest) {
    for c in &m.outcome.criteria {
        let tag = match (c.gate, c.pass) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        println!(
            "{tag} {} = {:e} (threshold {:e})",
            c.name, c.value, c.threshold
        );
        if let Some(note) = &c.note {
            println!("     {note}");
        }
    }
    if let Some(d) = &m.diagnosis {
        println!("diagnosis: {d}");
    }
    println!("status: {}", m.status.name());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage_error { 1 } else { 0 });
        }
    };
    let Command::Run(args) = cli.command;
    let cfg = match args.pairs().and_then(|p| RunConfig::from_pairs(&p)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match harness::execute(&cfg) {
        Ok(manifest) => {
            report(&manifest);
            ExitCode::from(manifest.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
