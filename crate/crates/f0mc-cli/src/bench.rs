//! Benchmark harness: parameter sweeps over (n, eps, strategy) on seeded
//! random DNFs, recording solver call counts and wall time as one table
//! line per run. The table feeds the call-count scaling checks.
//!
//! Spec file: `key=value` lines with comma-separated lists.
//!   n=8,12,16  eps=1.0,0.5  delta=0.3  strategy=bucketing,min
//!   formulas=3  terms=5  widths=2,5  seed=42  search=linear

use std::time::Instant;

use f0mc::counting::{self, ExecMode, SearchMode};
use f0mc::f0stream::Strategy;
use f0mc::formula::FormulaRef;
use f0mc::harness::random_dnf;
use f0mc::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct BenchSpec {
    ns: Vec<usize>,
    epss: Vec<f64>,
    delta: f64,
    strategies: Vec<Strategy>,
    formulas: usize,
    terms: usize,
    widths: (usize, usize),
    seed: u64,
    search: SearchMode,
}

fn parse_spec(text: &str) -> Result<BenchSpec> {
    let mut spec = BenchSpec {
        ns: vec![],
        epss: vec![0.8],
        delta: 0.3,
        strategies: vec![Strategy::Bucketing],
        formulas: 0,
        terms: 4,
        widths: (2, 5),
        seed: 1,
        search: SearchMode::Linear,
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            col: 1,
            msg: "expected key=value".into(),
        })?;
        let bad = |msg: String| Error::Parse { line: lineno + 1, col: 1, msg };
        let list = || value.split(',').map(str::trim).collect::<Vec<_>>();
        match key.trim() {
            "n" => {
                spec.ns = list()
                    .iter()
                    .map(|t| t.parse().map_err(|_| bad(format!("bad n '{t}'"))))
                    .collect::<Result<_>>()?
            }
            "eps" => {
                spec.epss = list()
                    .iter()
                    .map(|t| t.parse().map_err(|_| bad(format!("bad eps '{t}'"))))
                    .collect::<Result<_>>()?
            }
            "delta" => spec.delta = value.trim().parse().map_err(|_| bad("bad delta".into()))?,
            "strategy" => {
                spec.strategies = list()
                    .iter()
                    .map(|t| t.parse::<Strategy>())
                    .collect::<Result<_>>()?
            }
            "formulas" => {
                spec.formulas = value.trim().parse().map_err(|_| bad("bad formulas".into()))?
            }
            "terms" => spec.terms = value.trim().parse().map_err(|_| bad("bad terms".into()))?,
            "widths" => {
                let parts = list();
                if parts.len() != 2 {
                    return Err(bad("widths needs 'lo,hi'".into()));
                }
                spec.widths = (
                    parts[0].parse().map_err(|_| bad("bad width".into()))?,
                    parts[1].parse().map_err(|_| bad("bad width".into()))?,
                );
            }
            "seed" => spec.seed = value.trim().parse().map_err(|_| bad("bad seed".into()))?,
            "search" => {
                spec.search = match value.trim() {
                    "linear" => SearchMode::Linear,
                    "binary" => SearchMode::Binary,
                    other => return Err(bad(format!("bad search '{other}'"))),
                }
            }
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
    }
    Ok(spec)
}

pub fn run_bench(text: &str, exec: ExecMode) -> Result<String> {
    let spec = parse_spec(text)?;
    let mut out = String::new();
    for &n in &spec.ns {
        for &eps in &spec.epss {
            for &strategy in &spec.strategies {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                for f in 0..spec.formulas {
                    let phi = random_dnf(
                        &mut rng,
                        n,
                        spec.terms,
                        spec.widths.0.min(n)..=spec.widths.1.min(n),
                    );
                    let truth = if n <= f0mc::formula::DEFAULT_BRUTE_CAP {
                        f0mc::formula::brute_count(FormulaRef::Dnf(&phi))?.to_string()
                    } else {
                        "-".to_string()
                    };
                    let started = Instant::now();
                    let (estimate, rows, calls, per_row_max) = match strategy {
                        Strategy::Bucketing => {
                            let run = counting::approx_mc_dnf(
                                &phi,
                                eps,
                                spec.delta,
                                spec.seed + f as u64,
                                spec.search,
                                exec,
                            )?;
                            let per_row = run.calls_per_row.iter().copied().max().unwrap_or(0);
                            (run.estimate, run.rows.len(), run.total_calls(), per_row)
                        }
                        Strategy::Minimum => {
                            let run = counting::approx_model_count_min(
                                &phi,
                                eps,
                                spec.delta,
                                spec.seed + f as u64,
                                exec,
                            )?;
                            (run.estimate, run.rows.len(), 0, 0)
                        }
                        Strategy::Estimation => {
                            return Err(Error::InvalidParams {
                                msg: "bench sweeps cover the bucketing and minimum strategies"
                                    .into(),
                            })
                        }
                    };
                    let elapsed = started.elapsed().as_millis();
                    out.push_str(&format!(
                        "bench n={n} eps={eps} strategy={} formula={f} truth={truth} \
                         estimate={estimate} rows={rows} solver_calls={calls} \
                         per_row_max_calls={per_row_max} elapsed_ms={elapsed}\n",
                        strategy.name()
                    ));
                }
            }
        }
    }
    Ok(out)
}
