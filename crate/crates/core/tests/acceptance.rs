//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use mimome_secrecy::channel::{
    cdf_gamma_b, cdf_gamma_e, sample_channel, snr_pair_from_draw,
};
use mimome_secrecy::cli::estimate_diversity_order;
use mimome_secrecy::closed_form::{
    ergodic_secrecy_rate_approx, ergodic_secrecy_rate_quadrature, prob_nonzero_secrecy,
    sop_approx, sop_asymptotic, sop_semianalytic,
};
use mimome_secrecy::math_kernels::{mi_bpsk_approx, mi_bpsk_exact, mi_bpsk_exact_refined};
use mimome_secrecy::monte_carlo::{
    estimate_ergodic_rate, estimate_prob_nonzero, estimate_sop, trial_rng, Estimate,
};
use mimome_secrecy::{EstimatorConfig, MiModel, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn est(trials: u64, seed: u64) -> EstimatorConfig {
    EstimatorConfig {
        trials,
        seed,
        workers: 1,
        mi_model: MiModel::ApproxBpsk,
    }
}

/// Three standard errors, with the standard error floored at the binomial
/// value implied by the reference probability (an all-0 or all-1 sample has
/// a zero empirical spread).
fn band(e: &Estimate, reference: f64, bernoulli: bool) -> f64 {
    let floor = if bernoulli {
        (reference * (1.0 - reference) / e.trials as f64).max(0.0).sqrt()
    } else {
        0.0
    };
    3.0 * e.std_error.max(floor)
}

fn db_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

fn criterion_1() -> Outcome {
    let (mut band_max, mut self_err): (f64, f64) = (0.0, 0.0);
    for i in 0..200 {
        let db = -30.0 + 70.0 * i as f64 / 199.0;
        let g = 10f64.powf(db / 10.0);
        let exact = mi_bpsk_exact(g).unwrap();
        band_max = band_max.max((exact - mi_bpsk_approx(g).unwrap()).abs());
        self_err = self_err.max((exact - mi_bpsk_exact_refined(g).unwrap()).abs());
    }
    Outcome {
        pass: band_max <= 0.02 && self_err <= 1e-9,
        detail: format!("max band {band_max:.4} (limit 0.02), quadrature self-error {self_err:.1e} (limit 1e-9)"),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..20 {
        let n_rx = rng.random_range(1..=3u32);
        let n_tx = rng.random_range(1..=12 / n_rx);
        let n_eve = rng.random_range(1..=4u32);
        let cfg = SystemConfig::new(
            n_tx,
            n_rx,
            n_eve,
            rng.random_range(-10.0..20.0),
            rng.random_range(-10.0..20.0),
        );
        let closed = ergodic_secrecy_rate_approx(&cfg).unwrap();
        let quad = ergodic_secrecy_rate_quadrature(&cfg, MiModel::ApproxBpsk).unwrap();
        worst_rel = worst_rel.max(((closed - quad) / quad).abs());
    }
    let (mut misses, mut points, mut worst_z): (Vec<String>, usize, f64) = (Vec::new(), 0, 0.0);
    for n_tx in [1, 2, 4, 8, 16] {
        for snr_b_db in db_grid(-15.0, 10.0, 5.0) {
            let cfg = SystemConfig::new(n_tx, 3, 2, snr_b_db, -10.0);
            let closed = ergodic_secrecy_rate_approx(&cfg).unwrap();
            let e = estimate_ergodic_rate(&cfg, &est(1_000_000, 2000 + points as u64)).unwrap();
            let dev = (e.mean - closed).abs();
            worst_z = worst_z.max(dev / e.std_error);
            if dev > band(&e, closed, false) {
                misses.push(format!("N_A={n_tx} {snr_b_db} dB"));
            }
            points += 1;
        }
    }
    Outcome {
        pass: worst_rel <= 1e-6 && misses.is_empty(),
        detail: format!(
            "closed form vs quadrature worst rel {worst_rel:.1e} (limit 1e-6); MC {}/{points} within 3σ, worst |z| {worst_z:.2}{}",
            points - misses.len(),
            miss_list(&misses)
        ),
    }
}

fn miss_list(misses: &[String]) -> String {
    if misses.is_empty() {
        String::new()
    } else {
        format!(" [outside: {}]", misses.join(", "))
    }
}

fn criterion_3() -> Outcome {
    let (mut misses, mut points, mut worst_z): (Vec<String>, usize, f64) = (Vec::new(), 0, 0.0);
    for snr_e_db in [-10.0, 0.0, 10.0] {
        for snr_b_db in db_grid(-10.0, 20.0, 5.0) {
            let cfg = SystemConfig::new(3, 2, 2, snr_b_db, snr_e_db);
            let p = prob_nonzero_secrecy(&cfg).unwrap();
            let e = estimate_prob_nonzero(&cfg, &est(10_000_000, 3000 + points as u64)).unwrap();
            let width = band(&e, p, true);
            let dev = (e.mean - p).abs();
            worst_z = worst_z.max(3.0 * dev / width);
            if dev > width {
                misses.push(format!("γ̄_e={snr_e_db} γ̄_b={snr_b_db} dB"));
            }
            points += 1;
        }
    }
    let mut worst_reduction: f64 = 0.0;
    for (b, e) in [(0.0, 0.0), (10.0, -3.0), (-7.5, 12.0), (25.0, 25.5), (40.0, -20.0)] {
        let cfg = SystemConfig::new(1, 1, 1, b, e);
        let want = cfg.snr_b() / (cfg.snr_b() + cfg.snr_e());
        worst_reduction = worst_reduction.max((prob_nonzero_secrecy(&cfg).unwrap() - want).abs());
    }
    Outcome {
        pass: misses.is_empty() && worst_reduction <= 1e-12,
        detail: format!(
            "MC {}/{points} within 3σ at 1e7 trials, worst |z| {worst_z:.2}{}; single-antenna reduction error {worst_reduction:.1e} (limit 1e-12)",
            points - misses.len(),
            miss_list(&misses)
        ),
    }
}

fn criterion_4() -> Outcome {
    let (mut worst_rel, mut misses, mut points, mut worst_z): (f64, Vec<String>, usize, f64) =
        (0.0, Vec::new(), 0, 0.0);
    for snr_e_db in [-10.0, -6.0] {
        for n_tx in 1..=8 {
            for snr_b_db in db_grid(-15.0, 30.0, 5.0) {
                let cfg = SystemConfig::new(n_tx, 3, 2, snr_b_db, snr_e_db);
                let closed = sop_approx(&cfg, 0.5).unwrap();
                let semi = sop_semianalytic(&cfg, 0.5, MiModel::ApproxBpsk).unwrap();
                worst_rel = worst_rel.max(((closed - semi) / semi).abs());
                let e = estimate_sop(&cfg, &est(1_000_000, 4000 + points as u64), 0.5).unwrap();
                let width = band(&e, semi, true);
                let dev = (e.mean - semi).abs();
                worst_z = worst_z.max(3.0 * dev / width);
                if dev > width {
                    misses.push(format!("γ̄_e={snr_e_db} N_A={n_tx} γ̄_b={snr_b_db}"));
                }
                points += 1;
            }
        }
    }
    Outcome {
        pass: worst_rel <= 1e-6 && misses.is_empty(),
        detail: format!(
            "closed form vs semianalytic worst rel {worst_rel:.1e} (limit 1e-6); MC {}/{points} within 3σ, worst |z| {worst_z:.2}{}",
            points - misses.len(),
            miss_list(&misses)
        ),
    }
}

fn criterion_5() -> Outcome {
    let (mut worst_slope, mut worst_gap): (f64, f64) = (0.0, 0.0);
    for n_tx in 1..=8 {
        let at = |db: f64| SystemConfig::new(n_tx, 3, 2, db, -10.0);
        // Approximated MI against its own asymptote, exact MI against the exact one.
        for exact in [false, true] {
            let sop = |db: f64| {
                if exact {
                    sop_semianalytic(&at(db), 0.5, MiModel::ExactBpsk).unwrap()
                } else {
                    sop_approx(&at(db), 0.5).unwrap()
                }
            };
            let pts: Vec<(f64, f64)> = [30.0, 35.0, 40.0].iter().map(|&db| (db, sop(db))).collect();
            worst_slope = worst_slope.max(estimate_diversity_order(&pts).unwrap().abs());
            let asym = sop_asymptotic(&at(40.0), 0.5, exact).unwrap();
            worst_gap = worst_gap.max((pts[2].1 - asym).abs());
        }
    }
    Outcome {
        pass: worst_slope < 0.05 && worst_gap <= 1e-3,
        detail: format!("worst |slope| {worst_slope:.1e} (limit 0.05), worst |SOP(40 dB) - asymptote| {worst_gap:.1e} (limit 1e-3)"),
    }
}

fn criterion_6() -> Outcome {
    let (mut misses, mut points, mut worst): (Vec<String>, usize, f64) = (Vec::new(), 0, 0.0);
    for snr_e_db in db_grid(-10.0, 0.0, 1.0) {
        let cfg = SystemConfig::new(5, 2, 2, 30.0, snr_e_db);
        let asym = sop_asymptotic(&cfg, 0.5, false).unwrap();
        let e = estimate_sop(&cfg, &est(1_000_000, 6000 + points as u64), 0.5).unwrap();
        let dev = (e.mean - asym).abs();
        let tol = band(&e, asym, true) + 1e-3;
        worst = worst.max(dev / tol);
        if dev > tol {
            misses.push(format!("γ̄_e={snr_e_db} dB"));
        }
        points += 1;
    }
    Outcome {
        pass: misses.is_empty(),
        detail: format!(
            "{}/{points} points within 3σ + 1e-3, worst deviation at {:.0}% of tolerance{}",
            points - misses.len(),
            100.0 * worst,
            miss_list(&misses)
        ),
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    for (seed, cfg) in [
        (7, SystemConfig::new(3, 2, 2, 5.0, 0.0)),
        (8, SystemConfig::new(8, 3, 4, -5.0, 10.0)),
    ] {
        let (mut gb, mut ge) = (Vec::new(), Vec::new());
        for i in 0..100_000 {
            let pair = snr_pair_from_draw(&sample_channel(&mut trial_rng(seed, i), &cfg), &cfg);
            gb.push(pair.gamma_b);
            ge.push(pair.gamma_e);
        }
        worst = worst.max(ks_statistic(gb, |x| cdf_gamma_b(x, &cfg).unwrap()));
        worst = worst.max(ks_statistic(ge, |x| cdf_gamma_e(x, &cfg).unwrap()));
    }
    Outcome {
        pass: worst < 0.01,
        detail: format!("worst KS statistic {worst:.4} over 1e5 draws (limit 0.01)"),
    }
}

fn criterion_8() -> Outcome {
    let dir = std::env::temp_dir().join(format!("mimome-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("spec.json");
    std::fs::write(
        &spec,
        r#"{
  "base": {"n_tx": 4, "n_rx": 3, "n_eve": 2, "snr_b_db": 0, "snr_e_db": -6, "modulation": "bpsk"},
  "axis": "snr_b_db",
  "values": [-10, 0, 10, 20],
  "metrics": ["ergodic", "pnz", "sop"],
  "methods": ["closed_form", "monte_carlo"],
  "rs": 0.5,
  "estimator": {"trials": 50000, "seed": 8, "workers": 1, "mi_model": "exact_bpsk"}
}"#,
    )
    .unwrap();
    let run = |args: &[&str]| -> Vec<u8> {
        let out = Command::new(env!("CARGO_BIN_EXE_mimome-secrecy")).args(args).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let spec = spec.to_str().unwrap();
    let sweep: Vec<Vec<u8>> = ["1", "1", "8"]
        .iter()
        .map(|w| run(&["sweep", "--config", spec, "--workers", w]))
        .collect();
    let point = |w: &str| {
        run(&[
            "sop", "--rs", "0.5", "--n-tx", "3", "--n-rx", "2", "--n-eve", "2", "--snr-b", "10",
            "--snr-e", "-6", "--methods", "closed-form,monte-carlo", "--trials", "100000",
            "--seed", "9", "--workers", w, "--modulation", "qpsk",
        ])
    };
    let (p1, p8) = (point("1"), point("8"));
    let _ = std::fs::remove_dir_all(&dir);
    let pass = sweep[0] == sweep[1] && sweep[0] == sweep[2] && p1 == p8 && !p1.is_empty();
    Outcome {
        pass,
        detail: format!(
            "sweep output identical across runs and workers 1/8: {}; single-point output identical for workers 1/8: {}",
            sweep[0] == sweep[1] && sweep[0] == sweep[2],
            p1 == p8
        ),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("MI approximation band", criterion_1),
        ("ergodic closed form vs oracles", criterion_2),
        ("non-zero secrecy identity", criterion_3),
        ("SOP triple agreement", criterion_4),
        ("diversity-order collapse", criterion_5),
        ("asymptote vs simulation", criterion_6),
        ("distributional correctness", criterion_7),
        ("reproducibility", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} ({name}): {verdict}: {} [{:.1}s]",
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!outcome.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
