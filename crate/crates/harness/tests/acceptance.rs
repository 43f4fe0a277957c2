//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! with its measurement and wall time, and exits non-zero if any failed.
//!
//! Run alone with `cargo test -p acos-harness --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use acos_core::algorithms::{run, AcosMode, AlgorithmSpec, Family, Optimizer};
use acos_core::benchmarks::{catalog_entry, function_error, random_rotation, Problem};
use acos_core::coordinate::{compute_weights, learning_rate, mu_eff};
use acos_core::linalg::{OrthonormalBasis, SquareMatrix};
use acos_core::operators::{
    binomial_crossover_eigen, binomial_crossover_original, pso_velocity_eigen, pso_velocity_original,
    CrossoverMask, Particle, PsoCoefficients, SearchBounds, VelocityScheme,
};
use acos_core::selector::{reward, update_probability, CoordinateSystem, OutcomeRecord, SelectorParams};
use acos_core::{Objective, RunRng};
use acos_harness::config::{Campaign, ExperimentConfig};
use acos_harness::experiment::{run_campaign, CampaignOutcome};
use acos_harness::stats::{median, midranks, wilcoxon_rank_sum};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

fn threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn campaign(json: &str) -> Campaign {
    let mut config = ExperimentConfig::from_json(json).expect("valid config");
    config.threads = threads();
    config.validate().expect("valid campaign")
}

fn unit_vec(rng: &mut RunRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_particle(rng: &mut RunRng, d: usize) -> Particle {
    Particle {
        position: unit_vec(rng, d),
        velocity: unit_vec(rng, d),
        pbest_position: unit_vec(rng, d),
        pbest_fitness: 0.0,
        fitness: 0.0,
    }
}

fn random_coeffs(rng: &mut RunRng) -> PsoCoefficients {
    let scheme = if rng.random() {
        VelocityScheme::InertiaWeight(rng.random_range(0.4..0.9))
    } else {
        VelocityScheme::Constriction(0.729)
    };
    PsoCoefficients {
        scheme,
        c1: rng.random_range(0.0..2.5),
        c2: rng.random_range(0.0..2.5),
    }
}

fn random_mask(rng: &mut RunRng, d: usize) -> CrossoverMask {
    let flags = (0..d).map(|_| rng.random()).collect();
    CrossoverMask::new(flags, rng.random_range(0..d)).unwrap()
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn c1_operator_reduction() -> Outcome {
    let mut rng = RunRng::seed_from_u64(1);
    let mut mismatches = 0;
    for k in 0..10_000 {
        let d = 1 + k % 30;
        let basis = OrthonormalBasis::identity(d);
        let p = random_particle(&mut rng, d);
        let g = unit_vec(&mut rng, d);
        let (r1, r2): (Vec<f64>, Vec<f64>) = (
            (0..d).map(|_| rng.random()).collect(),
            (0..d).map(|_| rng.random()).collect(),
        );
        let coeffs = random_coeffs(&mut rng);
        let limit: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
        for lim in [None, Some(limit.as_slice())] {
            let a = pso_velocity_original(&p, &g, &coeffs, &r1, &r2, lim).unwrap();
            let b = pso_velocity_eigen(&p, &g, &coeffs, &r1, &r2, &basis, lim).unwrap();
            mismatches += usize::from(!same_bits(&a, &b));
        }
        let (x, v) = (unit_vec(&mut rng, d), unit_vec(&mut rng, d));
        let mask = random_mask(&mut rng, d);
        let a = binomial_crossover_original(&x, &v, &mask).unwrap();
        let b = binomial_crossover_eigen(&x, &v, &mask, &basis).unwrap();
        mismatches += usize::from(!same_bits(&a, &b));
    }
    let msg = format!("{mismatches} bitwise mismatches in 10^4 inputs (3 operator pairs each)");
    if mismatches == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rotate_in(q: &OrthonormalBasis, x: &[f64]) -> Vec<f64> {
    q.to_eigen(x).unwrap()
}

fn c2_rotation_equivariance() -> Outcome {
    let mut rng = RunRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let d = 1 + k % 10;
        let q = random_rotation(d, &mut rng).unwrap();
        let p = random_particle(&mut rng, d);
        let g = unit_vec(&mut rng, d);
        let r1: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let r2: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let coeffs = random_coeffs(&mut rng);
        let eig = pso_velocity_eigen(&p, &g, &coeffs, &r1, &r2, &q, None).unwrap();
        let rotated = Particle {
            position: rotate_in(&q, &p.position),
            velocity: rotate_in(&q, &p.velocity),
            pbest_position: rotate_in(&q, &p.pbest_position),
            pbest_fitness: 0.0,
            fitness: 0.0,
        };
        let orig = pso_velocity_original(&rotated, &rotate_in(&q, &g), &coeffs, &r1, &r2, None).unwrap();
        let back = q.to_original(&orig).unwrap();
        worst = eig
            .iter()
            .zip(&back)
            .fold(worst, |m, (a, b)| m.max((a - b).abs()));

        let (x, v) = (unit_vec(&mut rng, d), unit_vec(&mut rng, d));
        let mask = random_mask(&mut rng, d);
        let eig = binomial_crossover_eigen(&x, &v, &mask, &q).unwrap();
        let orig = binomial_crossover_original(&rotate_in(&q, &x), &rotate_in(&q, &v), &mask).unwrap();
        let back = q.to_original(&orig).unwrap();
        worst = eig
            .iter()
            .zip(&back)
            .fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    let msg = format!("max deviation {worst:.3e} over 10^3 rotations, D <= 10 (tolerance 1e-12)");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Cholesky of `C + shift·I`; success means every eigenvalue of `C` is at
/// least `−shift`.
fn is_psd_after_shift(c: &SquareMatrix, shift: f64) -> bool {
    let n = c.dim();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = c[(i, j)] + if i == j { shift } else { 0.0 };
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s < 0.0 {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else if l[j * n + j] > 0.0 {
                l[i * n + j] = s / l[j * n + j];
            } else if s.abs() > 1e-300 {
                return false;
            }
        }
    }
    true
}

fn c3_frame_integrity() -> Outcome {
    let mut rng = RunRng::seed_from_u64(3);
    let problem = catalog_entry("rot_elliptic")
        .unwrap()
        .instantiate(10, &mut rng)
        .unwrap();
    let spec = AlgorithmSpec::new(Family::Jade, 10);
    let budget = spec.np as u64 * 501;
    let mut opt = Optimizer::new(spec, AcosMode::Adaptive, &problem, budget, 3).unwrap();
    let (mut worst_orth, mut bad_psd, mut frames) = (0.0f64, 0, 0);
    while !opt.is_exhausted() {
        opt.step().unwrap();
        let frame = opt.frame();
        worst_orth = worst_orth.max(frame.basis.orthonormality_error());
        bad_psd += usize::from(!is_psd_after_shift(&frame.covariance, 1e-9));
        frames += 1;
    }
    let msg = format!(
        "{frames} frames: max |B^T B - I| = {worst_orth:.2e}, {bad_psd} covariances with eigenvalue < -1e-9"
    );
    if frames == 500 && worst_orth <= 1e-9 && bad_psd == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_weight_algebra() -> Outcome {
    let mut problems = Vec::new();
    for mu in 1..=200 {
        let w = compute_weights(mu).unwrap();
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            problems.push(format!("mu={mu}: sum {sum}"));
        }
        if w.windows(2).any(|p| p[1] >= p[0]) {
            problems.push(format!("mu={mu}: not strictly decreasing"));
        }
        let me = mu_eff(&w);
        if !(1.0..=mu as f64 + 1e-12).contains(&me) {
            problems.push(format!("mu={mu}: mu_eff {me}"));
        }
    }
    let me2 = mu_eff(&compute_weights(2).unwrap());
    let c = learning_rate(me2, 10);
    if (me2 - 1.4597).abs() > 5e-4 || (c - 0.004866).abs() > 5e-7 {
        problems.push(format!("mu=2, D=10: mu_eff {me2}, c_mu {c}"));
    }
    for (me, d, want) in [(1.4597, 10, 1.4597 / 300.0), (50.0, 2, 1.0), (3.0, 1, 1.0)] {
        if (learning_rate(me, d) - want).abs() > 1e-15 {
            problems.push(format!("c_mu({me}, {d})"));
        }
    }
    if problems.is_empty() {
        Ok(format!(
            "mu = 1..200 checked; mu=2, D=10 gives mu_eff {me2:.4}, c_mu {c:.6}"
        ))
    } else {
        Err(problems.join("; "))
    }
}

fn c5_probability_closure() -> Outcome {
    let params = SelectorParams::default();
    let (eps, eta) = (params.epsilon, params.eta);
    let mut rng = RunRng::seed_from_u64(5);
    let (mut escapes, mut asym) = (0u64, 0u64);
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    for _ in 0..1_000_000 {
        let mut p = 0.5;
        for _ in 0..100 {
            let system = if rng.random() {
                CoordinateSystem::Eigen
            } else {
                CoordinateSystem::Original
            };
            let improved: bool = rng.random();
            let next = update_probability(p, OutcomeRecord { system, improved }, params);
            if !improved {
                let want = match system {
                    CoordinateSystem::Eigen => p - eta * reward(p, eps).unwrap(),
                    CoordinateSystem::Original => p + eta * reward(1.0 - p, eps).unwrap(),
                };
                asym += u64::from(next.to_bits() != want.to_bits());
            }
            p = next;
            escapes += u64::from(!(0.0..=1.0).contains(&p));
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    let msg = format!(
        "10^6 sequences x 100 updates: {escapes} values outside [0,1] (range {lo:.4}..{hi:.4}), \
         {asym} punishments differing from eta*r"
    );
    if escapes == 0 && asym == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn errors_of(outcome: &CampaignOutcome, problem: &str, alg: &str, mode: &str) -> Vec<f64> {
    outcome.errors(problem, alg, mode)
}

/// One-sided p for "a is smaller": half the two-sided value when the medians
/// point that way (the rank-sum null distribution is symmetric).
fn one_sided_less(a: &[f64], b: &[f64]) -> f64 {
    let p = wilcoxon_rank_sum(a, b, 0.05).unwrap().p;
    if median(a) < median(b) {
        p / 2.0
    } else {
        1.0 - p / 2.0
    }
}

fn c6_pso_improvement() -> Outcome {
    let c = campaign(
        r#"{"problems":[{"name":"rot_elliptic","dim":10}],
            "algorithms":[{"family":"pso-w"},{"family":"pso-w","mode":"baseline"},
                          {"family":"pso-cf"},{"family":"pso-cf","mode":"baseline"}],
            "runs":25,"budget":50000,"master_seed":6}"#,
    );
    let out = run_campaign(&c, None).unwrap();
    let mut lines = Vec::new();
    let mut ok = out.failures.is_empty();
    for fam in ["pso-w", "pso-cf"] {
        let acos = errors_of(&out, "rot_elliptic", fam, "adaptive");
        let base = errors_of(&out, "rot_elliptic", fam, "baseline");
        let p = one_sided_less(&acos, &base);
        let (ma, mb) = (median(&acos), median(&base));
        ok &= ma < mb && p < 0.05;
        lines.push(format!("{fam}: median {ma:.3e} vs {mb:.3e}, one-sided p {p:.2e}"));
    }
    let msg = lines.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_sphere_solvability() -> Outcome {
    let c = campaign(
        r#"{"problems":[{"name":"sphere","dim":10}],"algorithms":[{"family":"jade"}],
            "runs":25,"budget":100000,"master_seed":7}"#,
    );
    let out = run_campaign(&c, None).unwrap();
    let errors = errors_of(&out, "sphere", "jade", "adaptive");
    let zeros = errors.iter().filter(|e| **e == 0.0).count();
    let msg = format!("{zeros}/25 runs with floored error 0 (need >= 24)");
    if zeros >= 24 && errors.len() == 25 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_ablation_ordering() -> Outcome {
    let c = campaign(
        r#"{"problems":[{"name":"rot_elliptic","dim":10}],
            "algorithms":[{"family":"jade"},{"family":"jade","mode":"noarchive"},
                          {"family":"jade","mode":"fixed:0.5"},{"family":"jade","mode":"fixed:0"},
                          {"family":"jade","mode":"fixed:1"}],
            "runs":25,"budget":50000,"master_seed":8}"#,
    );
    let out = run_campaign(&c, None).unwrap();
    let adaptive = median(&errors_of(&out, "rot_elliptic", "jade", "adaptive"));
    let mut inversions = 0;
    let mut parts = vec![format!("adaptive {adaptive:.3e}")];
    for mode in ["noarchive", "fixed-p0.5", "fixed-p0", "fixed-p1"] {
        let m = median(&errors_of(&out, "rot_elliptic", "jade", mode));
        inversions += usize::from(adaptive > m);
        parts.push(format!("{mode} {m:.3e}"));
    }
    let msg = format!(
        "JADE medians: {}; {inversions} inversions (max 1)",
        parts.join(", ")
    );
    if inversions <= 1 && out.failures.is_empty() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn tail_p_mean(outcome: &CampaignOutcome, problem: &str) -> f64 {
    let per_run: Vec<f64> = outcome
        .records
        .iter()
        .filter(|r| r.problem == problem)
        .map(|r| {
            let generations = r.trace.len() - 1;
            let tail = (generations / 10).max(1);
            let last = &r.trace[r.trace.len() - tail..];
            last.iter().map(|t| t.p_m).sum::<f64>() / last.len() as f64
        })
        .collect();
    median(&per_run)
}

fn c9_pm_direction() -> Outcome {
    let c = campaign(
        r#"{"problems":[{"name":"rot_elliptic","dim":10},{"name":"rastrigin","dim":10}],
            "algorithms":[{"family":"jade"}],"runs":25,"budget":100000,"master_seed":9}"#,
    );
    let out = run_campaign(&c, None).unwrap();
    let rotated = tail_p_mean(&out, "rot_elliptic");
    let separable = tail_p_mean(&out, "rastrigin");
    let msg = format!(
        "median late p_m: rot_elliptic {rotated:.3} (need > 0.55), rastrigin {separable:.3} (need < 0.50)"
    );
    if rotated > 0.55 && separable < 0.50 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn enumeration_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let (n, n1) = (pooled.len(), a.len());
    let mean = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let dev = (ranks[..n1].iter().sum::<f64>() - mean).abs();
    let (mut hit, mut total) = (0u32, 0u32);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == n1 {
            let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            total += 1;
            hit += u32::from((w - mean).abs() >= dev - 1e-9);
        }
    }
    hit as f64 / total as f64
}

fn c10_wilcoxon_oracle() -> Outcome {
    let mut rng = RunRng::seed_from_u64(10);
    let (mut worst, mut cases) = (0.0f64, 0);
    for n1 in 3..=7 {
        for n2 in 3..=(10 - n1) {
            for levels in [0u32, 2, 3, 4] {
                for _ in 0..50 {
                    let mut draw = |k: usize| -> Vec<f64> {
                        (0..k)
                            .map(|_| {
                                if levels == 0 {
                                    rng.random()
                                } else {
                                    rng.random_range(0..levels) as f64
                                }
                            })
                            .collect()
                    };
                    let (a, b) = (draw(n1), draw(n2));
                    let p = wilcoxon_rank_sum(&a, &b, 0.05).unwrap().p;
                    worst = worst.max((p - enumeration_p(&a, &b)).abs());
                    cases += 1;
                }
            }
        }
    }
    let msg = format!(
        "{cases} samples with n1+n2 <= 10, ties included: max |p - p_enum| = {worst:.2e} (tolerance 0.03)"
    );
    if worst <= 0.03 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

struct Counting<'a> {
    inner: &'a Problem,
    calls: AtomicU64,
}

impl Objective for Counting<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn bounds(&self) -> &SearchBounds {
        self.inner.bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(x)
    }
}

fn cli_summary(config: &Path, out: &Path, threads: &str) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_acos"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", threads])
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    std::fs::read(out.join("summary.csv")).map_err(|e| e.to_string())
}

fn c11_determinism_and_fes() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"problems":[{"name":"rot_rastrigin","dim":5},{"name":"rot_elliptic","dim":5}],
            "algorithms":[{"family":"pso-w"},{"family":"pso-cf","mode":"fixed:0.5"},
                          {"family":"jde"},{"family":"sade","mode":"noarchive"},{"family":"jade"}],
            "runs":8,"budget":5000,"master_seed":11}"#,
    )
    .map_err(|e| e.to_string())?;
    let one = cli_summary(&config, &dir.path().join("t1"), "1")?;
    let eight = cli_summary(&config, &dir.path().join("t8"), "8")?;
    let identical = one == eight;

    let mut rng = RunRng::seed_from_u64(11);
    let problem = catalog_entry("rot_ackley")
        .unwrap()
        .instantiate(4, &mut rng)
        .unwrap();
    let mut mismatches = 0;
    let mut checked = 0;
    for family in [
        Family::PsoW,
        Family::PsoCf,
        Family::Jde,
        Family::Sade,
        Family::Jade,
    ] {
        for mode in [
            AcosMode::Adaptive,
            AcosMode::Baseline,
            AcosMode::NoArchive,
            AcosMode::FixedP(1.0),
        ] {
            for budget in [100u64, 1234, 7777] {
                let spec = AlgorithmSpec::new(family, 4);
                if budget < spec.np as u64 {
                    continue;
                }
                let counting = Counting {
                    inner: &problem,
                    calls: AtomicU64::new(0),
                };
                let r = run(spec, mode, &counting, budget, budget ^ 0x5eed).unwrap();
                let calls = counting.calls.load(Ordering::Relaxed);
                mismatches += usize::from(r.fes_used != calls || calls != budget);
                let e = function_error(r.best_fitness, problem.f_opt).unwrap();
                mismatches += usize::from(!(e.raw >= 0.0));
                checked += 1;
            }
        }
    }
    let msg = format!(
        "summary.csv at --threads 1 vs 8: {}; {checked} counting runs, {mismatches} with fes_used != calls",
        if identical { "byte-identical" } else { "DIFFERENT" }
    );
    if identical && mismatches == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "operator reduction with B=I",
            limit: Duration::from_secs(5),
            check: c1_operator_reduction,
        },
        Criterion {
            id: 2,
            name: "rotation equivariance",
            limit: Duration::from_secs(10),
            check: c2_rotation_equivariance,
        },
        Criterion {
            id: 3,
            name: "Eigen frame integrity",
            limit: Duration::from_secs(30),
            check: c3_frame_integrity,
        },
        Criterion {
            id: 4,
            name: "weights and learning rate",
            limit: Duration::from_secs(1),
            check: c4_weight_algebra,
        },
        Criterion {
            id: 5,
            name: "probability closure and asymmetry",
            limit: Duration::from_secs(10),
            check: c5_probability_closure,
        },
        Criterion {
            id: 6,
            name: "ACoS improves PSO",
            limit: Duration::from_secs(120),
            check: c6_pso_improvement,
        },
        Criterion {
            id: 7,
            name: "unimodal solvability",
            limit: Duration::from_secs(60),
            check: c7_sphere_solvability,
        },
        Criterion {
            id: 8,
            name: "ablation ordering",
            limit: Duration::from_secs(300),
            check: c8_ablation_ordering,
        },
        Criterion {
            id: 9,
            name: "p_m adaptation direction",
            limit: Duration::from_secs(180),
            check: c9_pm_direction,
        },
        Criterion {
            id: 10,
            name: "rank-sum oracle equivalence",
            limit: Duration::from_secs(10),
            check: c10_wilcoxon_oracle,
        },
        Criterion {
            id: 11,
            name: "determinism and FE accounting",
            limit: Duration::from_secs(60),
            check: c11_determinism_and_fes,
        },
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_none_or(|f| f == c.id)) {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "[{}] {:>2} {}: {} ({:.2} s, limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
