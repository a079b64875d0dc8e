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

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use hsbm::analysis::{
    concentration_audit, event_audit, run_sweep, threshold_scan, write_concentration_csv, write_event_csv,
    write_sweep_csv, write_threshold_csv, Algorithm, Grid, MetricSet, SpectralFamily, SweepSpec, FULL_FAMILY_MAX_K,
};
use hsbm::io::{read_hypergraph, read_partition, write_hypergraph, write_partition};
use hsbm::partition::compare_partitions;
use hsbm::recovery::{counting_recover, recover_with, RecoverOptions};
use hsbm::spectral::expected_spectrum;
use hsbm::{HsbmParams, Partition};

use crate::config::{usage, Config};

type Flags = (Option<PathBuf>, Vec<(&'static str, Option<String>)>);
type Body = Box<dyn FnOnce(&mut dyn Write) -> anyhow::Result<()>>;

fn resolve(subcommand: &'static str, flags: Flags, allowed: &[&str]) -> anyhow::Result<Config> {
    let (file, pairs) = flags;
    Config::resolve(subcommand, pairs, file.as_deref(), allowed)
}

/// Writes through a temporary sibling file renamed into place on success.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write {}", path.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Writes to `path`, or to standard output when absent.
fn emit(path: Option<&str>, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(Path::new(p), body),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn params_from(cfg: &mut Config, defaults: Option<(usize, usize, usize, f64, f64)>) -> anyhow::Result<HsbmParams> {
    let (n, k, d, p, q) = match defaults {
        Some((n, k, d, p, q)) => (
            cfg.or("n", n)?,
            cfg.or("k", k)?,
            cfg.or("d", d)?,
            cfg.or("p", p)?,
            cfg.or("q", q)?,
        ),
        None => (
            cfg.require("n")?,
            cfg.require("k")?,
            cfg.require("d")?,
            cfg.require("p")?,
            cfg.require("q")?,
        ),
    };
    let seed = cfg.or("seed", 0u64)?;
    match HsbmParams::new(n, k, d, p, q, seed) {
        Ok(params) => Ok(params),
        Err(e) => usage(e.to_string()),
    }
}

fn algorithm(cfg: &mut Config) -> anyhow::Result<Algorithm> {
    let raw: String = cfg.or("algorithm", "spectral".to_string())?;
    match raw.parse() {
        Ok(a) => Ok(a),
        Err(e) => usage(format!("{e}")),
    }
}

/// Runs `f` on a pool of `--workers` threads, or the global pool.
fn with_workers<T: Send>(cfg: &mut Config, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match cfg.get::<usize>("workers")? {
        None => Ok(f()),
        Some(0) => usage("--workers must be positive"),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build()?;
            Ok(pool.install(f))
        }
    }
}

pub fn generate(flags: Flags) -> anyhow::Result<()> {
    let mut cfg = resolve(
        "generate",
        flags,
        &["n", "k", "d", "p", "q", "seed", "out", "ground-truth"],
    )?;
    let params = params_from(&mut cfg, None)?;
    let out: String = cfg.require("out")?;
    let truth_path = cfg.or("ground-truth", format!("{out}.truth"))?;

    let (h, truth) = hsbm::hypergraph::sample_hsbm(&params)?;
    write_atomic(Path::new(&out), |w| Ok(write_hypergraph(&h, w)?))?;
    write_atomic(Path::new(&truth_path), |w| Ok(write_partition(&truth, w)?))?;

    let spec = expected_spectrum(&params);
    println!("edges={}", h.edge_count());
    println!("lambda_1={} multiplicity=1", spec.lambda1);
    if params.k > 1 {
        println!(
            "lambda_2..{}={} multiplicity={}",
            params.k, spec.lambda_mid, spec.mid_multiplicity
        );
    }
    println!(
        "lambda_{}..{}={} multiplicity={}",
        params.k + 1,
        params.n,
        spec.lambda_tail,
        spec.tail_multiplicity
    );
    println!("gap={}", spec.gap);
    Ok(())
}

fn open(path: &str) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {path}"))?,
    ))
}

pub fn recover(flags: Flags) -> anyhow::Result<()> {
    let mut cfg = resolve(
        "recover",
        flags,
        &["input", "k", "algorithm", "out", "trace", "ground-truth"],
    )?;
    let input: String = cfg.require("input")?;
    let k: usize = cfg.require("k")?;
    let algo = algorithm(&mut cfg)?;
    let out: String = cfg.require("out")?;
    let trace: Option<String> = cfg.get("trace")?;
    if trace.is_some() && !algo.spectral() {
        return usage("--trace needs the spectral algorithm");
    }
    let truth_path: Option<String> = cfg.get("ground-truth")?;

    let h = read_hypergraph(open(&input)?).with_context(|| format!("in {input}"))?;
    let truth = match &truth_path {
        Some(p) => Some(read_partition(open(p)?).with_context(|| format!("in {p}"))?),
        None => None,
    };
    if k == 0 || h.n() % k != 0 {
        anyhow::bail!("n = {} is not divisible by k = {k}", h.n());
    }
    let s = h.n() / k;

    let report = |name: &str, found: &Partition| -> anyhow::Result<()> {
        if let Some(t) = &truth {
            let c = compare_partitions(found, t)?;
            println!("algorithm={name} exact={} misclassified={}", c.exact, c.misclassified);
        }
        Ok(())
    };
    let target = |name: &str| {
        if algo == Algorithm::Both {
            format!("{out}.{name}")
        } else {
            out.clone()
        }
    };

    if algo.spectral() {
        let opts = RecoverOptions {
            truth: truth.as_ref(),
            ..Default::default()
        };
        let res = recover_with(&h, k, s, &opts)?;
        write_atomic(Path::new(&target("spectral")), |w| {
            Ok(write_partition(&res.partition, w)?)
        })?;
        if let Some(path) = &trace {
            let header = cfg.header();
            write_atomic(Path::new(path), |w| {
                w.write_all(header.as_bytes())?;
                for t in &res.traces {
                    writeln!(w, "{}", t.to_record())?;
                }
                Ok(())
            })?;
        }
        report("spectral", &res.partition)?;
    }
    if algo.counting() {
        let found = counting_recover(&h, s)?;
        write_atomic(Path::new(&target("counting")), |w| Ok(write_partition(&found, w)?))?;
        report("counting", &found)?;
    }
    Ok(())
}

pub fn sweep(flags: Flags) -> anyhow::Result<()> {
    let mut cfg = resolve(
        "sweep",
        flags,
        &[
            "n",
            "k",
            "d",
            "p",
            "q",
            "seed",
            "trials",
            "algorithm",
            "metrics",
            "out",
            "no-timing",
            "workers",
        ],
    )?;
    let grid = Grid {
        n: cfg.list("n")?,
        k: cfg.list("k")?,
        d: cfg.list("d")?,
        p: cfg.list("p")?,
        q: cfg.list("q")?,
    };
    let trials: usize = cfg.or("trials", 10)?;
    if trials == 0 {
        return usage("--trials must be positive");
    }
    let base_seed: u64 = cfg.or("seed", 0)?;
    let algorithm = algorithm(&mut cfg)?;
    let mut metrics = MetricSet::default();
    if cfg.has("metrics") {
        for m in cfg.list::<String>("metrics")? {
            match m.as_str() {
                "concentration" => metrics.concentration = true,
                "projector" => metrics.projector = true,
                "none" => {}
                other => return usage(format!("unknown metric {other:?}")),
            }
        }
    }
    let timing = !cfg.flag("no-timing");
    let out: Option<String> = cfg.get("out")?;
    let spec = SweepSpec {
        grid,
        trials,
        base_seed,
        algorithm,
        metrics,
    };
    let cells = with_workers(&mut cfg, || run_sweep(&spec))??;
    if cells.iter().all(|c| c.skipped.is_some()) {
        eprintln!("warning: every grid cell violates the model constraints; all rows are skipped");
    }
    let header = cfg.header();
    emit(out.as_deref(), |w| {
        w.write_all(header.as_bytes())?;
        Ok(write_sweep_csv(&cells, w, timing)?)
    })
}

pub fn audit(flags: Flags) -> anyhow::Result<()> {
    let mut cfg = resolve(
        "audit",
        flags,
        &[
            "kind", "n", "k", "d", "p", "q", "seed", "trials", "eps", "full-j", "gaps", "out", "workers",
        ],
    )?;
    let kind: String = cfg.or("kind", "concentration".to_string())?;
    let is = |k: &str| kind == k;
    if !(is("concentration") || is("events") || is("threshold")) {
        return usage(format!("unknown audit kind {kind:?}"));
    }
    if (cfg.has("eps") || cfg.has("full-j")) && !is("events") {
        return usage("--eps and --full-j apply only to --kind events");
    }
    if cfg.has("gaps") != is("threshold") {
        return usage("--gaps is required by, and only accepted with, --kind threshold");
    }
    if is("threshold") && cfg.has("p") {
        return usage("--kind threshold sets p from --q and --gaps; drop --p");
    }
    let gaps: Vec<f64> = if is("threshold") { cfg.list("gaps")? } else { Vec::new() };
    let params = params_from(&mut cfg, Some((120, 2, 3, 0.5, 0.1)))?;
    if is("threshold") {
        // p is q + gap at each point
        cfg.unset("p");
    }
    let trials: usize = cfg.or("trials", 100)?;
    if trials == 0 {
        return usage("--trials must be positive");
    }
    let out: Option<String> = cfg.get("out")?;

    let body: Body = match kind.as_str() {
        "concentration" => {
            let audit = with_workers(&mut cfg, || concentration_audit(&params, trials))??;
            Box::new(move |w| Ok(write_concentration_csv(&audit, w)?))
        }
        "events" => {
            let eps: f64 = cfg.or("eps", 0.05)?;
            let family = if cfg.flag("full-j") {
                if params.k > FULL_FAMILY_MAX_K {
                    return usage(format!("--full-j needs k <= {FULL_FAMILY_MAX_K}"));
                }
                SpectralFamily::Full
            } else {
                SpectralFamily::Suffixes
            };
            let audit = with_workers(&mut cfg, || event_audit(&params, trials, eps, family))??;
            Box::new(move |w| Ok(write_event_csv(&audit, w)?))
        }
        _ => {
            let points = with_workers(&mut cfg, || threshold_scan(&params, &gaps, trials))??;
            Box::new(move |w| Ok(write_threshold_csv(&points, w)?))
        }
    };
    let header = cfg.header();
    emit(out.as_deref(), |w| {
        w.write_all(header.as_bytes())?;
        body(w)
    })
}
