use std::time::{Duration, Instant};

use approx::abs_diff_eq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Hypergeometric, Normal};

use rf_lab::classic::{
    fit_affine_metric, mindreader_fit, mindreader_score, rank, rui_huang_fit, rui_huang_score,
    rui_huang_weights,
};
use rf_lab::eval::{
    build_trial_universe, hypergeom_mean, hypergeom_pmf, run_benchmark, run_trial, sign_test,
    BenchmarkConfig, Method, MethodConfig,
};
use rf_lab::feature_store::{generate_synthetic, Dataset, FeatureSchema, FeedbackSet, Item, SyntheticSpec};
use rf_lab::latent::{em_fit, EmConfig, Observation};
use rf_lab::riemann::{riemann_distance, GaussianFit, RiemannModel, XiTable};

fn verdict(n: u32, name: &str, ok: bool, detail: String) {
    println!("criterion {n} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} {name} failed: {detail}");
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.2} s of {} s", t.as_secs_f64(), limit.as_secs()))
}

fn synth(categories: usize, words: usize, dims: usize, separation: f64, seed: u64) -> Dataset {
    generate_synthetic(&SyntheticSpec {
        categories,
        per_category: 50,
        schema: FeatureSchema::uniform(words, dims).unwrap(),
        separation,
        noise: 1.0,
        seed,
    })
    .unwrap()
}

#[test]
fn criterion_01_hypergeometric_suite() {
    let start = Instant::now();
    let mut worst_sum = 0.0f64;
    let mut worst_mean = 0.0f64;
    for n in 1..=60usize {
        for m in 0..=n {
            for q in 0..=n {
                let (mut s, mut mu) = (0.0, 0.0);
                for k in 0..=q {
                    let p = hypergeom_pmf(k, n, m, q);
                    s += p;
                    mu += k as f64 * p;
                }
                worst_sum = worst_sum.max((s - 1.0).abs());
                worst_mean = worst_mean.max((mu - hypergeom_mean(n, m, q)).abs());
            }
        }
    }
    let mut worst_enum = 0.0f64;
    for n in 1..=12usize {
        let subsets = 1u32 << n;
        for m in 0..=n {
            let marked = (1u32 << m) - 1;
            for q in 0..=n {
                let mut counts = vec![0u64; q + 1];
                let mut total = 0u64;
                for mask in 0..subsets {
                    if mask.count_ones() as usize == q {
                        counts[(mask & marked).count_ones() as usize] += 1;
                        total += 1;
                    }
                }
                for (k, &c) in counts.iter().enumerate() {
                    worst_enum = worst_enum.max((hypergeom_pmf(k, n, m, q) - c as f64 / total as f64).abs());
                }
            }
        }
    }
    let (fast, t) = within(start, Duration::from_secs(10));
    let ok = worst_sum <= 1e-12 && worst_mean <= 1e-12 && worst_enum <= 1e-12 && fast;
    verdict(
        1,
        "hypergeometric suite",
        ok,
        format!("max |Σp−1|={worst_sum:.1e}, max mean err={worst_mean:.1e}, max enum err={worst_enum:.1e}, {t}"),
    );
}

#[test]
fn criterion_02_random_baseline_calibration() {
    let start = Instant::now();
    let ds = synth(40, 2, 2, 1.0, 21);
    let cats: Vec<String> = ds.categories().iter().map(|c| c.to_string()).collect();
    let cfg = MethodConfig::default();
    let trials = 10_000u64;
    let hits: Vec<f64> = (0..trials)
        .map(|t| {
            let cat = &cats[(t as usize) % cats.len()];
            let target = ds.category_members(cat);
            let uni = build_trial_universe(&ds, cat, 1000, t.wrapping_mul(31) + 1).unwrap();
            run_trial(&ds, &uni, &target, Method::Random, 5, 20, t, &cfg, false).unwrap() as f64
        })
        .collect();
    let n = hits.len() as f64;
    let mean = hits.iter().sum::<f64>() / n;
    let var = hits.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let (fast, t) = within(start, Duration::from_secs(30));
    let ok = (mean - 1.0).abs() <= 3.0 * se && fast;
    verdict(2, "random baseline", ok, format!("mean={mean:.4}, se={se:.4}, {t}"));
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
}

fn xi_reference(alpha: f64, x: f64) -> f64 {
    let f = move |v: f64| (1.0 - alpha * (-v * v).exp()).sqrt();
    let (a, b) = (0.0, x.abs());
    if b == 0.0 {
        return 0.0;
    }
    let v = simpson(&f, a, b, f(a), f(0.5 * b), f(b), 1e-14, 40);
    v.copysign(x)
}

#[test]
fn criterion_03_xi_suite() {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();

    let zero = XiTable::new(0.0).unwrap();
    let ident = (0..=10_000)
        .map(|i| -5.0 + i as f64 * 1e-3)
        .map(|x| (zero.xi(x) - x).abs())
        .fold(0.0, f64::max);
    ok &= ident <= 1e-9;
    notes.push(format!("alpha=0 identity err={ident:.1e}"));

    for alpha in [0.1, 0.5, 0.9] {
        let t = XiTable::shared(alpha).unwrap();
        ok &= t.xi(0.0) == 0.0;
        let lo = (1.0 - alpha).sqrt();
        let xs: Vec<f64> = (0..=4001).map(|i| -10.0 + i as f64 * 0.005).collect();
        let bounds = xs.iter().all(|&x| {
            let v = t.xi(x).abs();
            v <= x.abs() * (1.0 + 1e-12) && v >= lo * x.abs() * (1.0 - 1e-12)
        });
        ok &= bounds;
        let err = xs
            .iter()
            .map(|&x| (t.xi(x) - xi_reference(alpha, x)).abs())
            .fold(0.0, f64::max);
        ok &= err < 1e-6;
        notes.push(format!("alpha={alpha} bounds={bounds} table err={err:.1e}"));
    }
    let (fast, t) = within(start, Duration::from_secs(5));
    verdict(3, "xi suite", ok && fast, format!("{}, {t}", notes.join(", ")));
}

fn model(sigma: Vec<f64>, alpha: f64) -> RiemannModel {
    let w = sigma.len();
    RiemannModel::from_fit(
        GaussianFit {
            mu: vec![0.0; w],
            u: DMatrix::identity(w, w),
            sigma,
        },
        alpha,
    )
    .unwrap()
}

#[test]
fn criterion_04_riemann_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let normal = Normal::new(0.0, 3.0).unwrap();
    let mut worst = 0.0f64;
    let mut bounds = true;
    for _ in 0..1000 {
        let w = rng.random_range(1..=8);
        let y: Vec<f64> = (0..w).map(|_| normal.sample(&mut rng)).collect();
        let sigma: Vec<f64> = (0..w).map(|_| rng.random_range(0.05..4.0)).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = riemann_distance(&y, &model(sigma.clone(), 1e-12)).unwrap();
        worst = worst.max((d - norm).abs());
        for alpha in [1e-12, 0.3, 0.5, 0.9] {
            let d = riemann_distance(&y, &model(sigma.clone(), alpha)).unwrap();
            bounds &= d >= norm * (1.0 - 1e-12) && d <= norm / (1.0 - alpha).sqrt() * (1.0 + 1e-12);
        }
    }
    let ok = worst <= 1e-5 && bounds;
    verdict(4, "riemann limit", ok, format!("max |D−‖y‖|={worst:.1e}, bounds hold={bounds}"));
}

#[test]
fn criterion_05_mindreader() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut worst_det = 0.0f64;
    let mut worst_q = 0.0f64;
    for _ in 0..50 {
        let dim = rng.random_range(2..=6);
        let n = dim + rng.random_range(2..=12);
        let scale: Vec<f64> = (0..dim).map(|_| rng.random_range(0.2..3.0)).collect();
        let samples: Vec<Vec<f64>> = (0..n)
            .map(|_| scale.iter().map(|s| s * normal.sample(&mut rng) + 1.5).collect())
            .collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let refs: Vec<&[f64]> = samples.iter().map(Vec::as_slice).collect();
        let m = fit_affine_metric(&refs, &weights).unwrap();
        worst_det = worst_det.max((m.metric.determinant() - 1.0).abs());
        let total: f64 = weights.iter().sum();
        for d in 0..dim {
            let mean = samples.iter().zip(&weights).map(|(s, w)| w * s[d]).sum::<f64>() / total;
            worst_q = worst_q.max((m.q[d] - mean).abs());
        }
    }
    let mut pinv = true;
    for (dim, n) in [(5usize, 3usize), (8, 2), (6, 5)] {
        let samples: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect()).collect();
        let refs: Vec<&[f64]> = samples.iter().map(Vec::as_slice).collect();
        let m = fit_affine_metric(&refs, &vec![1.0; n]).unwrap();
        pinv &= m.pseudo_inverse_used && m.rank == n - 1;
        pinv &= m.metric.iter().all(|v| v.is_finite());
    }
    let ok = worst_det <= 1e-9 && worst_q <= 1e-12 && pinv;
    verdict(
        5,
        "mindreader",
        ok,
        format!("max |det−1|={worst_det:.1e}, max q err={worst_q:.1e}, pseudo-inverse ranks ok={pinv}"),
    );
}

#[test]
fn criterion_06_rui_huang() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let w = rng.random_range(1..=10);
        let a: Vec<f64> = (0..w).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect();
        let (weights, _) = rui_huang_weights(&a).unwrap();
        worst = worst.max((weights.iter().map(|w| 1.0 / w).sum::<f64>() - 1.0).abs());
    }
    let ds = synth(6, 1, 4, 1.5, 66);
    let ids: Vec<String> = ds
        .category_members(ds.categories()[0])
        .iter()
        .take(9)
        .map(|&i| ds.item(i).id().to_string())
        .collect();
    let fb = FeedbackSet::uniform(ids);
    let rh = rui_huang_fit(&fb, &ds).unwrap();
    let mr = mindreader_fit(&fb, &ds).unwrap();
    let by_rh = rank(&ds, &|_: usize, it: &Item| rui_huang_score(it, &rh).unwrap(), ds.len()).unwrap();
    let by_mr = rank(&ds, &|_: usize, it: &Item| mindreader_score(it.features(), &mr).unwrap(), ds.len()).unwrap();
    let same = by_rh.iter().map(|r| r.index).eq(by_mr.iter().map(|r| r.index));
    let ok = worst <= 1e-9 && same;
    verdict(6, "rui-huang", ok, format!("max |Σ1/w−1|={worst:.1e}, W=1 ranking identical={same}"));
}

fn gaussian_obs(rng: &mut ChaCha8Rng, centres: &[Vec<Vec<f64>>], per: usize, sd: f64) -> Vec<Observation> {
    let noise = Normal::new(0.0, sd).unwrap();
    let mut out = Vec::new();
    for c in centres {
        for _ in 0..per {
            let words = c.iter().map(|w| w.iter().map(|m| m + noise.sample(rng)).collect()).collect();
            out.push(Observation::new(format!("o{}", out.len()), words));
        }
    }
    out
}

#[test]
fn criterion_07_mixed_em() {
    let start = Instant::now();
    let normal = Normal::new(0.0, 2.0).unwrap();

    let mut monotone = 0;
    let mut worst_drop = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centres: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|_| (0..2).map(|_| (0..2).map(|_| normal.sample(&mut rng)).collect()).collect())
            .collect();
        let x = gaussian_obs(&mut rng, &centres, 12, 1.0);
        let cfg = EmConfig {
            topics: 3,
            max_iterations: 100,
            tolerance: f64::MIN_POSITIVE,
            restarts: 1,
            seed,
            ..Default::default()
        };
        let fit = em_fit(&x, &cfg).unwrap();
        let drop = fit.trace.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        worst_drop = worst_drop.max(drop);
        if drop <= 1e-8 {
            monotone += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let x = gaussian_obs(&mut rng, &[vec![vec![1.0, -2.0], vec![0.5, 0.0, 3.0]]], 25, 1.3);
    let fit = em_fit(&x, &EmConfig { topics: 1, ..Default::default() }).unwrap();
    let n = x.len() as f64;
    let mut closed = abs_diff_eq!(fit.model.pi[0], 1.0, epsilon = 1e-10);
    closed &= fit.model.p_d_given_z.iter().all(|r| abs_diff_eq!(r[0], 1.0 / n, epsilon = 1e-10));
    for (c, dim) in [2usize, 3].into_iter().enumerate() {
        for d in 0..dim {
            let mean = x.iter().map(|o| o.words[c][d]).sum::<f64>() / n;
            let var = x.iter().map(|o| (o.words[c][d] - mean).powi(2)).sum::<f64>() / n;
            closed &= abs_diff_eq!(fit.model.mean[0][c][d], mean, epsilon = 1e-10);
            closed &= abs_diff_eq!(fit.model.var[0][c][d], var, epsilon = 1e-10);
        }
    }

    let mut recovered = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let a = vec![vec![0.0, 0.0]];
        let b = vec![vec![10.0, 0.0]];
        let x = gaussian_obs(&mut rng, &[a.clone(), b.clone()], 100, 1.0);
        let fit = em_fit(&x, &EmConfig { topics: 2, seed, ..Default::default() }).unwrap();
        let err = |m: &Vec<Vec<f64>>, t: &Vec<Vec<f64>>| {
            m[0].iter().zip(&t[0]).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
        };
        let mu = &fit.model.mean;
        let straight = err(&mu[0], &a).max(err(&mu[1], &b));
        let swapped = err(&mu[0], &b).max(err(&mu[1], &a));
        if straight.min(swapped) <= 0.5 {
            recovered += 1;
        }
    }

    let (fast, t) = within(start, Duration::from_secs(60));
    let ok = monotone == 20 && closed && recovered >= 18 && fast;
    verdict(
        7,
        "mixed em",
        ok,
        format!("monotone {monotone}/20 (max drop {worst_drop:.1e}), K=1 closed form={closed}, recovered {recovered}/20, {t}"),
    );
}

#[test]
fn criterion_08_sign_test() {
    let all: Vec<(f64, f64)> = vec![(3.0, 1.0); 20];
    let p = sign_test(&all, 0.01).p_value;
    let exact = abs_diff_eq!(p, 2.0 * 2f64.powi(-20), epsilon = 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let hits = Hypergeometric::new(1000, 50, 20).unwrap();
    let experiments = 1000;
    let false_pos = (0..experiments)
        .filter(|_| {
            let pairs: Vec<(f64, f64)> = (0..20)
                .map(|_| (hits.sample(&mut rng) as f64, hits.sample(&mut rng) as f64))
                .collect();
            sign_test(&pairs, 0.01).significant
        })
        .count();
    let rate = false_pos as f64 / experiments as f64;
    let ok = exact && rate <= 0.01;
    verdict(8, "sign test", ok, format!("p(20/20)={p:.3e}, null false-positive rate={:.1}%", rate * 100.0));
}

#[test]
fn criterion_09_qualitative_pattern() {
    let start = Instant::now();
    let ds = synth(200, 4, 8, 0.7, 7);
    let methods = vec![
        Method::Rocchio,
        Method::Mars,
        Method::MindReader,
        Method::RuiHuang,
        Method::MarsQ,
        Method::Riemann,
        Method::Latent,
    ];
    let cfg = BenchmarkConfig {
        methods: methods.clone(),
        kbars: vec![10.0, 1.0, 0.1],
        rs: vec![5, 10, 20],
        ..BenchmarkConfig::new(1)
    };
    let report = run_benchmark(&ds, &cfg).unwrap();
    let mut weak = Vec::new();
    for &m in methods.iter().filter(|&&m| m != Method::Rocchio) {
        for &k in &cfg.kbars {
            for &r in &cfg.rs {
                let c = report.cell(m, k, r).unwrap();
                if !(c.significant && c.failures == 0) {
                    weak.push(format!("{m}@kbar={k},r={r}"));
                }
            }
        }
    }
    let mean = |m| report.cell(m, 0.1, 20).unwrap().mean.unwrap_or(f64::NAN);
    let (mq, rm, lt) = (mean(Method::MarsQ), mean(Method::Riemann), mean(Method::Latent));
    let directional = rm >= mq && lt >= mq;
    let (fast, t) = within(start, Duration::from_secs(600));
    let ok = weak.is_empty() && directional && fast;
    verdict(
        9,
        "qualitative pattern",
        ok,
        format!(
            "non-significant cells: [{}]; kbar=0.1 r=20 means riemann={rm:.2} latent={lt:.2} mars-q={mq:.2}; {t}",
            weak.join(" ")
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let ds = synth(40, 2, 4, 1.0, 10);
    let cfg = BenchmarkConfig {
        methods: vec![Method::Mars, Method::RuiHuang, Method::Riemann, Method::Latent, Method::Random],
        kbars: vec![5.0, 1.0],
        rs: vec![5, 10],
        repetitions: 6,
        ..BenchmarkConfig::new(99)
    };
    let render = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let r = pool.install(|| run_benchmark(&ds, &cfg)).unwrap();
        format!("{}{}{}{}", r.to_tsv(), r.pairwise_tsv(), r.to_table(), r.pairwise_table())
    };
    let a = render(1);
    let b = render(4);
    let c = render(4);
    let ok = a == b && b == c;
    verdict(10, "determinism", ok, format!("{} bytes per report, identical={ok}", a.len()));
}
