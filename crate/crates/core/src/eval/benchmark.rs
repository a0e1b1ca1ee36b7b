use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::methods::{derive_seed, Method, MethodConfig};
use super::stats::{random_baseline_test, sign_test, Direction};
use super::trial::{build_trial_universe, evaluate, sample_feedback, Treatment, TrialSetup};
use crate::error::{Error, Result};
use crate::feature_store::Dataset;

pub const DEFAULT_KBARS: [f64; 5] = [10.0, 5.0, 1.0, 0.5, 0.1];
pub const DEFAULT_RS: [usize; 5] = [2, 5, 10, 20, 30];
pub const DEFAULT_Q: usize = 20;
pub const DEFAULT_REPETITIONS: usize = 20;
pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;

/// Grid and protocol options for [`run_benchmark`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub methods: Vec<Method>,
    pub kbars: Vec<f64>,
    pub rs: Vec<usize>,
    pub q: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub significance: f64,
    pub exclude_feedback: bool,
    pub method_config: MethodConfig,
}

impl BenchmarkConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            methods: Method::DEFAULT_SET.to_vec(),
            kbars: DEFAULT_KBARS.to_vec(),
            rs: DEFAULT_RS.to_vec(),
            q: DEFAULT_Q,
            repetitions: DEFAULT_REPETITIONS,
            seed,
            significance: DEFAULT_SIGNIFICANCE,
            exclude_feedback: false,
            method_config: MethodConfig::default(),
        }
    }

    pub fn treatments(&self) -> Result<Vec<Treatment>> {
        let mut out = Vec::with_capacity(self.kbars.len() * self.rs.len());
        for &kbar in &self.kbars {
            for &r in &self.rs {
                out.push(Treatment::new(kbar, r, self.q, self.repetitions)?);
            }
        }
        Ok(out)
    }

    pub fn describe(&self) -> Vec<String> {
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let kbars: Vec<String> = self.kbars.iter().map(f64::to_string).collect();
        let rs: Vec<String> = self.rs.iter().map(usize::to_string).collect();
        vec![
            format!("methods={}", methods.join(",")),
            format!("kbar={} r={} q={}", kbars.join(","), rs.join(","), self.q),
            format!(
                "reps={} seed={} significance={} exclude_feedback={}",
                self.repetitions, self.seed, self.significance, self.exclude_feedback
            ),
            self.method_config.describe(),
        ]
    }
}

/// Hits of one method over the repetitions of one treatment. `None`
/// marks a repetition in which the method failed to fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub method: Method,
    pub treatment: Treatment,
    pub db: usize,
    pub hits: Vec<Option<usize>>,
    pub errors: Vec<String>,
}

/// Summary of one (method, treatment) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: Method,
    pub kbar: f64,
    pub r: usize,
    pub db: usize,
    /// Mean and unbiased variance over the successful repetitions.
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub p_vs_random: Option<f64>,
    pub significant: bool,
    pub failures: usize,
}

/// Sign-test comparison of two methods in one treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseEntry {
    pub kbar: f64,
    pub r: usize,
    pub first: Method,
    pub second: Method,
    /// Mean hits of `first` minus mean hits of `second` over paired runs.
    pub mean_difference: Option<f64>,
    pub first_wins: usize,
    pub second_wins: usize,
    pub ties: usize,
    pub p_value: f64,
    pub significant: bool,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<String>,
    pub results: Vec<TrialResult>,
    pub cells: Vec<CellSummary>,
    pub pairwise: Vec<PairwiseEntry>,
    /// Target category and feedback set of every repetition, per treatment.
    pub trials: Vec<Vec<(String, Vec<usize>)>>,
    pub q: usize,
}

struct Job {
    treatment: usize,
    rep: usize,
    category: String,
}

struct JobOutcome {
    category: String,
    feedback: Vec<usize>,
    db: usize,
    hits: Vec<std::result::Result<usize, String>>,
}

fn run_job(dataset: &Dataset, cfg: &BenchmarkConfig, t: &Treatment, t_idx: usize, job: &Job) -> Result<JobOutcome> {
    let trial_seed = derive_seed(cfg.seed, &[t_idx as u64, job.rep as u64]);
    let target = dataset.category_members(&job.category);
    let m = target.len();
    t.check(m).map_err(|e| e.context(format!("kbar={} r={}", t.kbar, t.r)))?;
    let db = t.db(m);
    let universe = build_trial_universe(dataset, &job.category, db, derive_seed(trial_seed, &[0]))
        .map_err(|e| e.context(format!("kbar={} r={}", t.kbar, t.r)))?;
    let feedback = sample_feedback(&target, t.r, derive_seed(trial_seed, &[1]))?;
    let setup = TrialSetup {
        dataset,
        universe: &universe,
        target: &target,
        feedback: &feedback,
        q: t.q,
        exclude_feedback: cfg.exclude_feedback,
    };
    let hits = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(pos, &method)| {
            let seed = derive_seed(trial_seed, &[2, pos as u64]);
            evaluate(&setup, method, &cfg.method_config, seed).map_err(|e| e.to_string())
        })
        .collect();
    Ok(JobOutcome {
        category: job.category.clone(),
        feedback,
        db,
        hits,
    })
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Runs every method on the full treatment grid. Within a repetition all
/// methods share the target category, universe and feedback set.
/// Repetitions run in parallel; the report does not depend on scheduling.
pub fn run_benchmark(dataset: &Dataset, cfg: &BenchmarkConfig) -> Result<Report> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods to benchmark".into()));
    }
    cfg.method_config.validate()?;
    let treatments = cfg.treatments()?;
    let categories: Vec<String> = dataset.categories().into_iter().map(str::to_owned).collect();

    let mut jobs = Vec::new();
    for t_idx in 0..treatments.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[t_idx as u64, u64::MAX]));
        let mut order: Vec<&String> = Vec::new();
        for rep in 0..cfg.repetitions {
            if order.is_empty() {
                order = categories.iter().collect();
                order.shuffle(&mut rng);
            }
            jobs.push(Job {
                treatment: t_idx,
                rep,
                category: order.pop().unwrap().clone(),
            });
        }
    }
    let outcomes: Vec<JobOutcome> = jobs
        .par_iter()
        .map(|job| run_job(dataset, cfg, &treatments[job.treatment], job.treatment, job))
        .collect::<Result<_>>()?;

    let mut results = Vec::new();
    let mut cells = Vec::new();
    let mut pairwise = Vec::new();
    let mut trials = Vec::new();
    for (t_idx, t) in treatments.iter().enumerate() {
        let outs = &outcomes[t_idx * cfg.repetitions..(t_idx + 1) * cfg.repetitions];
        trials.push(outs.iter().map(|o| (o.category.clone(), o.feedback.clone())).collect());
        let db = outs[0].db;
        let m = dataset.category_members(&outs[0].category).len();
        let per_method: Vec<Vec<Option<usize>>> = (0..cfg.methods.len())
            .map(|k| outs.iter().map(|o| o.hits[k].as_ref().ok().copied()).collect())
            .collect();
        for (k, &method) in cfg.methods.iter().enumerate() {
            let hits = per_method[k].clone();
            let errors: Vec<String> = outs.iter().filter_map(|o| o.hits[k].as_ref().err().cloned()).collect();
            let ok: Vec<f64> = hits.iter().flatten().map(|&h| h as f64).collect();
            let (mean, variance) = if ok.is_empty() {
                (None, None)
            } else {
                let (m, v) = mean_var(&ok);
                (Some(m), Some(v))
            };
            let test = random_baseline_test(&ok, db, m, t.q, cfg.significance).ok();
            cells.push(CellSummary {
                method,
                kbar: t.kbar,
                r: t.r,
                db,
                mean,
                variance,
                p_vs_random: test.map(|b| b.p_value),
                significant: test.is_some_and(|b| b.significant),
                failures: hits.len() - ok.len(),
            });
            results.push(TrialResult {
                method,
                treatment: *t,
                db,
                hits,
                errors,
            });
        }
        for a in 0..cfg.methods.len() {
            for b in 0..cfg.methods.len() {
                if a == b {
                    continue;
                }
                let pairs: Vec<(f64, f64)> = per_method[a]
                    .iter()
                    .zip(&per_method[b])
                    .filter_map(|(x, y)| Some(((*x)? as f64, (*y)? as f64)))
                    .collect();
                let st = sign_test(&pairs, cfg.significance);
                let mean_difference = (!pairs.is_empty())
                    .then(|| pairs.iter().map(|(x, y)| x - y).sum::<f64>() / pairs.len() as f64);
                pairwise.push(PairwiseEntry {
                    kbar: t.kbar,
                    r: t.r,
                    first: cfg.methods[a],
                    second: cfg.methods[b],
                    mean_difference,
                    first_wins: st.first_wins,
                    second_wins: st.second_wins,
                    ties: st.ties,
                    p_value: st.p_value,
                    significant: st.significant,
                    direction: st.direction,
                });
            }
        }
    }
    Ok(Report {
        header: cfg.describe(),
        results,
        cells,
        pairwise,
        trials,
        q: cfg.q,
    })
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.prec$}"))
}

fn p_fmt(p: Option<f64>) -> String {
    p.map_or_else(|| "-".to_owned(), |x| format!("{x:.3e}"))
}

impl Report {
    /// Summary cell for a method at `(kbar, r)`.
    pub fn cell(&self, method: Method, kbar: f64, r: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.kbar == kbar && c.r == r)
    }

    pub fn pair(&self, first: Method, second: Method, kbar: f64, r: usize) -> Option<&PairwiseEntry> {
        self.pairwise
            .iter()
            .find(|p| p.first == first && p.second == second && p.kbar == kbar && p.r == r)
    }

    fn header_lines(&self, out: &mut String) {
        for h in &self.header {
            let _ = writeln!(out, "# {h}");
        }
    }

    /// Tab-separated summary, one row per (method, kbar, r).
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        self.header_lines(&mut out);
        out.push_str("method\tkbar\tr\tdb\tmean\tvariance\tp_vs_random\tsignificant\tfailures\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.method,
                c.kbar,
                c.r,
                c.db,
                opt(c.mean, 4),
                opt(c.variance, 4),
                p_fmt(c.p_vs_random),
                c.significant,
                c.failures
            );
        }
        out
    }

    /// Tab-separated sign-test comparisons of every ordered method pair.
    pub fn pairwise_tsv(&self) -> String {
        let mut out = String::new();
        self.header_lines(&mut out);
        out.push_str("kbar\tr\tfirst\tsecond\tmean_difference\tfirst_wins\tsecond_wins\tties\tp_value\tsignificant\n");
        for p in &self.pairwise {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3e}\t{}",
                p.kbar,
                p.r,
                p.first,
                p.second,
                opt(p.mean_difference, 4),
                p.first_wins,
                p.second_wins,
                p.ties,
                p.p_value,
                p.significant
            );
        }
        out
    }

    fn grid(&self) -> (Vec<f64>, Vec<usize>) {
        let mut kbars: Vec<f64> = Vec::new();
        let mut rs: Vec<usize> = Vec::new();
        for c in &self.cells {
            if !kbars.contains(&c.kbar) {
                kbars.push(c.kbar);
            }
            if !rs.contains(&c.r) {
                rs.push(c.r);
            }
        }
        (kbars, rs)
    }

    fn methods(&self) -> Vec<Method> {
        let mut ms = Vec::new();
        for c in &self.cells {
            if !ms.contains(&c.method) {
                ms.push(c.method);
            }
        }
        ms
    }

    /// One block per method: rows kbar, columns r, entries `mean (variance)`;
    /// `*` marks a significant improvement over random selection.
    pub fn to_table(&self) -> String {
        let (kbars, rs) = self.grid();
        let mut out = String::new();
        self.header_lines(&mut out);
        for method in self.methods() {
            let _ = writeln!(out, "\n{method}");
            let mut line = format!("{:>8}", "kbar\\r");
            for r in &rs {
                let _ = write!(line, " {:>18}", r);
            }
            let _ = writeln!(out, "{line}");
            for &kbar in &kbars {
                let mut line = format!("{kbar:>8}");
                for &r in &rs {
                    let entry = match self.cell(method, kbar, r) {
                        Some(c) if c.mean.is_some() => format!(
                            "{}{:.2} ({:.2})",
                            if c.significant { "*" } else { "" },
                            c.mean.unwrap(),
                            c.variance.unwrap()
                        ),
                        _ => "-".to_owned(),
                    };
                    let _ = write!(line, " {entry:>18}");
                }
                let _ = writeln!(out, "{line}");
            }
        }
        out
    }

    /// Per treatment, a method-by-method matrix of mean hit differences
    /// (column minus row); `*` marks sign-test significance.
    pub fn pairwise_table(&self) -> String {
        let (kbars, rs) = self.grid();
        let methods = self.methods();
        let mut out = String::new();
        self.header_lines(&mut out);
        for &kbar in &kbars {
            for &r in &rs {
                let _ = writeln!(out, "\nkbar={kbar} r={r}");
                let mut line = format!("{:>12}", "");
                for m in &methods {
                    let _ = write!(line, " {:>11}", m.name());
                }
                let _ = writeln!(out, "{line}");
                for row in &methods {
                    let mut line = format!("{:>12}", row.name());
                    for col in &methods {
                        let entry = if row == col {
                            "".to_owned()
                        } else {
                            match self.pair(*col, *row, kbar, r) {
                                Some(p) if p.mean_difference.is_some() => format!(
                                    "{}{:.2}",
                                    if p.significant { "*" } else { "" },
                                    p.mean_difference.unwrap()
                                ),
                                _ => "-".to_owned(),
                            }
                        };
                        let _ = write!(line, " {entry:>11}");
                    }
                    let _ = writeln!(out, "{line}");
                }
            }
        }
        out
    }
}

/// Runs `f` on a pool capped by `RF_LAB_THREADS`, if set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("RF_LAB_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::InvalidArgument(format!("RF_LAB_THREADS must be a positive integer, got `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}
