// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `hsbm`: generate hypergraph SBM instances, recover their clusters, and run
//! sweeps and audits. Vertex ids in every file and message are 1-based.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::UsageError;

#[derive(Debug, Parser)]
#[command(name = "hsbm", version, about = "Hypergraph stochastic block model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample an instance; writes the hypergraph to --out and the planted
    /// partition to --ground-truth (default: <out>.truth).
    Generate(Flags),
    /// Recover clusters of the hypergraph in --input.
    Recover(Flags),
    /// Monte-Carlo sweep over comma-separated parameter lists.
    Sweep(Flags),
    /// Concentration, event or threshold audit at one parameter point.
    Audit(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Key-value file of defaults; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// spectral, counting or both.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    trace: Option<String>,
    #[arg(long)]
    ground_truth: Option<String>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<String>,
    /// Drop wall-clock columns so outputs are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Sweep metrics: comma list of concentration, projector.
    #[arg(long)]
    metrics: Option<String>,
    /// Audit kind: concentration, events or threshold.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Audit every cluster subset instead of the nested suffixes (k <= 12).
    #[arg(long)]
    full_j: bool,
    /// Threshold audit: comma list of p - q values.
    #[arg(long)]
    gaps: Option<String>,
}

impl Flags {
    fn into_pairs(self) -> (Option<PathBuf>, Vec<(&'static str, Option<String>)>) {
        let flag = |b: bool| b.then(|| "true".to_string());
        (
            self.config,
            vec![
                ("n", self.n),
                ("k", self.k),
                ("d", self.d),
                ("p", self.p),
                ("q", self.q),
                ("seed", self.seed),
                ("trials", self.trials),
                ("algorithm", self.algorithm),
                ("input", self.input),
                ("out", self.out),
                ("trace", self.trace),
                ("ground-truth", self.ground_truth),
                ("workers", self.workers),
                ("no-timing", flag(self.no_timing)),
                ("metrics", self.metrics),
                ("kind", self.kind),
                ("eps", self.eps),
                ("full-j", flag(self.full_j)),
                ("gaps", self.gaps),
            ],
        )
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(f) => commands::generate(f.into_pairs()),
        Command::Recover(f) => commands::recover(f.into_pairs()),
        Command::Sweep(f) => commands::sweep(f.into_pairs()),
        Command::Audit(f) => commands::audit(f.into_pairs()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
