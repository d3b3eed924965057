//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Repetition counts follow the desk-scale defaults (1000, or 2000 where a
//! tighter band requires it); every tolerance is pinned here.

#![allow(clippy::needless_range_loop)]

use copula_lab::copula::{
    classify_stationary_points, rho_to_tau, tau_to_rho, CopulaSpec, StationaryClass,
};
use copula_lab::experiments::{run_study, write_outputs, StudyConfig, StudyKind};
use copula_lab::fisher::{
    gamma_shape_rate_correlation, numeric_fisher_oracle, FisherMethod,
};
use copula_lab::marginal::MarginalPrior;
use copula_lab::model::{Dataset, ModelSpec};
use copula_lab::posterior::{
    conjugate_proposal, one_step_newton_mode, posterior_mode, sir_posterior, NewtonOptions,
    Objective, PosteriorDensity, SirSizes,
};
use copula_lab::prior::CopulaPrior;
use copula_lab::special::{normal_cdf, normal_sf, student_t_cdf, UnitCoord};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MASTER_SEED: u64 = 20250817;

fn check(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn cfg(study: StudyKind, reps: usize) -> StudyConfig {
    let mut cfg = StudyConfig::new(study, MASTER_SEED);
    cfg.repetitions = reps;
    cfg
}

#[test]
fn criterion_1_tau_retention_medians() {
    let mut config = cfg(StudyKind::TauRetention, 1000);
    config.sample_sizes = vec![10, 1_000, 100_000];
    let result = run_study(&config).expect("study runs");
    let bands = [(10u64, -0.70, -0.66), (1_000, -0.19, -0.13), (100_000, -0.03, 0.03)];
    for (n, lo, hi) in bands {
        let cell = result
            .cells
            .iter()
            .find(|c| c.sample_size == n)
            .expect("cell present");
        check(
            "1 (tau retention)",
            cell.estimate >= lo && cell.estimate <= hi,
            &format!(
                "n={n}: median tau {:.4} in [{lo}, {hi}] (se {:.4}, reps {})",
                cell.estimate, cell.mc_se, cell.repetitions
            ),
        );
    }
}

#[test]
fn criterion_2_multinomial_coverage_calibration() {
    let mut config = cfg(StudyKind::MultinomialCoverage, 1000);
    config.analysis_rhos = vec![-0.9];
    config.sample_sizes = vec![10, 1_000];
    let nature = run_study(&config).expect("study runs");
    for cell in &nature.cells {
        check(
            "2 (coverage calibration)",
            (cell.estimate - 0.95).abs() <= 0.02,
            &format!(
                "rho=-0.9 n={}: coverage {:.4} within 0.95 +/- 0.02",
                cell.sample_size, cell.estimate
            ),
        );
    }

    let mut config = cfg(StudyKind::MultinomialCoverage, 1000);
    config.analysis_rhos = vec![0.9, -0.75];
    config.sample_sizes = vec![10];
    let off = run_study(&config).expect("study runs");
    let wrong_direction = off
        .cells
        .iter()
        .find(|c| c.rho == Some(0.9))
        .expect("rho=0.9 cell");
    check(
        "2 (coverage calibration)",
        wrong_direction.estimate < 0.90,
        &format!(
            "rho=+0.9 n=10: coverage {:.4} below 0.90 (direction-inaccurate prior)",
            wrong_direction.estimate
        ),
    );
    let weaker = off
        .cells
        .iter()
        .find(|c| c.rho == Some(-0.75))
        .expect("rho=-0.75 cell");
    check(
        "2 (coverage calibration)",
        weaker.estimate > 0.95,
        &format!(
            "rho=-0.75 n=10: coverage {:.4} above 0.95 (slightly weaker dependence)",
            weaker.estimate
        ),
    );
}

#[test]
fn criterion_3_gamma_coverage_calibration() {
    let mut config = cfg(StudyKind::GammaCoverage, 1000);
    config.analysis_rhos = vec![0.4];
    config.sample_sizes = vec![10, 1_000];
    let result = run_study(&config).expect("study runs");
    for cell in &result.cells {
        check(
            "3 (gamma calibration)",
            (cell.estimate - 0.95).abs() <= 0.02,
            &format!(
                "rho=0.4 n={}: coverage {:.4} within 0.95 +/- 0.02 (Laplace-proposal SIR)",
                cell.sample_size, cell.estimate
            ),
        );
    }
}

#[test]
fn criterion_4_mode_convergence() {
    // Case 1: the t-copula mode wins with probability at least 0.9 by n=1e4.
    let mut config = cfg(StudyKind::ModeConvergence, 1000);
    config.cases = vec![1];
    config.sample_sizes = vec![10_000];
    let case1 = run_study(&config).expect("study runs");
    let p1 = case1
        .cells
        .iter()
        .find(|c| c.statistic == "pr_second_closer")
        .unwrap();
    check(
        "4 (mode convergence)",
        p1.estimate >= 0.9,
        &format!("case 1 n=1e4: Pr(D2<=D1) = {:.4} >= 0.9", p1.estimate),
    );

    // Case 3 (saddle): the limit is neither 0.5 nor 1.
    let mut config = cfg(StudyKind::ModeConvergence, 2000);
    config.cases = vec![3];
    config.sample_sizes = vec![100_000];
    let case3 = run_study(&config).expect("study runs");
    let p3 = case3
        .cells
        .iter()
        .find(|c| c.statistic == "pr_second_closer")
        .unwrap();
    check(
        "4 (mode convergence)",
        (p3.estimate - 0.563).abs() <= 0.04,
        &format!("case 3 n=1e5: Pr(D2<=D1) = {:.4} within 0.563 +/- 0.04", p3.estimate),
    );

    // Case 4: the independence copula wins at small n.
    let mut config = cfg(StudyKind::ModeConvergence, 1000);
    config.cases = vec![4];
    config.sample_sizes = vec![10];
    let case4 = run_study(&config).expect("study runs");
    let p4 = case4
        .cells
        .iter()
        .find(|c| c.statistic == "pr_second_closer")
        .unwrap();
    check(
        "4 (mode convergence)",
        p4.estimate < 0.5,
        &format!("case 4 n=10: Pr(D2<=D1) = {:.4} < 0.5", p4.estimate),
    );

    // Mean |D2 - D1| decreases in n for every case: median over three seeds.
    let sizes = [10u64, 100, 1_000, 10_000];
    for case in 1..=6usize {
        let mut per_seed: Vec<Vec<f64>> = Vec::new();
        for seed_shift in 0..3u64 {
            let mut config = StudyConfig::new(StudyKind::ModeConvergence, MASTER_SEED + seed_shift);
            config.repetitions = 300;
            config.cases = vec![case];
            config.sample_sizes = sizes.to_vec();
            let result = run_study(&config).expect("study runs");
            per_seed.push(
                sizes
                    .iter()
                    .map(|&n| {
                        result
                            .cells
                            .iter()
                            .find(|c| c.sample_size == n && c.statistic == "mean_abs_diff")
                            .unwrap()
                            .estimate
                    })
                    .collect(),
            );
        }
        let medians: Vec<f64> = (0..sizes.len())
            .map(|k| {
                let mut vals = [per_seed[0][k], per_seed[1][k], per_seed[2][k]];
                vals.sort_by(f64::total_cmp);
                vals[1]
            })
            .collect();
        let monotone = medians.windows(2).all(|w| w[1] < w[0]);
        check(
            "4 (mode convergence)",
            monotone,
            &format!("case {case}: median mean|D2-D1| decreasing over n {sizes:?}: {medians:?}"),
        );
    }
}

#[test]
fn criterion_5_regression_coverage_and_areas() {
    // Case 6 at n=10: both priors essentially never cover, and the t-copula
    // prior concentrates the HPD set materially.
    let mut config = cfg(StudyKind::RegressionCoverage, 1000);
    config.cases = vec![6];
    config.sample_sizes = vec![10];
    let case6 = run_study(&config).expect("study runs");
    let ind = case6
        .cells
        .iter()
        .find(|c| c.prior.as_deref() == Some("independence"))
        .unwrap();
    let tc = case6
        .cells
        .iter()
        .find(|c| c.prior.as_deref() == Some("t-copula"))
        .unwrap();
    check(
        "5 (regression coverage)",
        ind.estimate <= 0.01 && tc.estimate <= 0.01,
        &format!(
            "case 6 n=10: coverages {:.4} (independence), {:.4} (t-copula) <= 0.01",
            ind.estimate, tc.estimate
        ),
    );
    let area_ind = ind.extra["median_area"];
    let area_tc = tc.extra["median_area"];
    check(
        "5 (regression coverage)",
        area_tc < 0.8 * area_ind,
        &format!(
            "case 6 n=10: t-copula median area {area_tc:.4} at least 20% below independence {area_ind:.4}"
        ),
    );

    // Case 1 at n=1e5: both calibrated with matching areas.
    let mut config = cfg(StudyKind::RegressionCoverage, 1000);
    config.cases = vec![1];
    config.sample_sizes = vec![100_000];
    let case1 = run_study(&config).expect("study runs");
    let ind = case1
        .cells
        .iter()
        .find(|c| c.prior.as_deref() == Some("independence"))
        .unwrap();
    let tc = case1
        .cells
        .iter()
        .find(|c| c.prior.as_deref() == Some("t-copula"))
        .unwrap();
    check(
        "5 (regression coverage)",
        (ind.estimate - 0.95).abs() <= 0.02 && (tc.estimate - 0.95).abs() <= 0.02,
        &format!(
            "case 1 n=1e5: coverages {:.4} / {:.4} within 0.95 +/- 0.02",
            ind.estimate, tc.estimate
        ),
    );
    let a1 = ind.extra["median_area"];
    let a2 = tc.extra["median_area"];
    check(
        "5 (regression coverage)",
        (a1 - a2).abs() / a1.max(a2) <= 0.02,
        &format!("case 1 n=1e5: median areas {a1:.6} and {a2:.6} within 2%"),
    );
}

#[test]
fn criterion_6a_multinomial_numeric_fisher_is_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 0x6a);
    for categories in [3usize, 4, 5] {
        let model = ModelSpec::MultinomialConditional { categories };
        for _ in 0..10 {
            let theta: Vec<f64> =
                (0..categories - 1).map(|_| 0.1 + 0.8 * rng.random::<f64>()).collect();
            let est = numeric_fisher_oracle(
                &model,
                &theta,
                FisherMethod::ScoreCovariance,
                200_000,
                &mut rng,
            )
            .expect("oracle runs");
            let d = categories - 1;
            for i in 0..d {
                for j in 0..d {
                    if i == j {
                        continue;
                    }
                    let gap = est.information[(i, j)].abs();
                    let se = est.standard_error[(i, j)];
                    assert!(
                        gap <= 3.0 * se,
                        "w={categories} theta={theta:?}: info[{i}{j}]={gap:.3e} exceeds 3 SE {se:.3e}"
                    );
                    // Propagate to the inverse: near-diagonal information
                    // maps the entry through the two inverse diagonals.
                    let inv_gap = est.inverse[(i, j)].abs();
                    let inv_se = est.inverse[(i, i)] * est.inverse[(j, j)] * se;
                    assert!(
                        inv_gap <= 3.0 * inv_se + 1e-12,
                        "w={categories}: inverse[{i}{j}]={inv_gap:.3e} exceeds 3 SE {inv_se:.3e}"
                    );
                }
            }
        }
    }
    check(
        "6a (multinomial Fisher diagonal)",
        true,
        "off-diagonals within 3 MC SE of 0 for w in {3,4,5} at 10 random interior points each",
    );
}

#[test]
fn criterion_6b_gamma_correlation_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 0x6b);
    for alpha in [0.5, 1.0, 2.0, 5.0] {
        let est = numeric_fisher_oracle(
            &ModelSpec::GammaShapeRate,
            &[alpha, 1.0],
            FisherMethod::ScoreCovariance,
            200_000,
            &mut rng,
        )
        .expect("oracle runs");
        let numeric =
            est.inverse[(0, 1)] / (est.inverse[(0, 0)] * est.inverse[(1, 1)]).sqrt();
        let analytic = gamma_shape_rate_correlation(alpha).unwrap();
        let rel = (numeric - analytic).abs() / analytic;
        check(
            "6b (gamma implied correlation)",
            rel < 0.02,
            &format!("alpha={alpha}: numeric {numeric:.4} vs analytic {analytic:.4} ({rel:.3}% of 2%)"),
        );
    }
}

#[test]
fn criterion_6c_t_copula_reference_densities() {
    let c = CopulaSpec::student_t_bivariate(0.0, 4.0).unwrap();
    let v1 = c.log_density(&[0.5, 0.99]).unwrap().exp();
    let v2 = c.log_density(&[0.85, 0.9]).unwrap().exp();
    let u = [
        UnitCoord::new(normal_cdf(-5.0)).unwrap(),
        UnitCoord::from_upper_tail(normal_sf(8.0)).unwrap(),
    ];
    let v3 = c.log_density_at(&u).unwrap().exp();
    check(
        "6c (t-copula reference points)",
        (v1 - 0.533).abs() / 0.533 < 5e-3,
        &format!("c(0.5, 0.99) = {v1:.4} within 0.5% of 0.533"),
    );
    check(
        "6c (t-copula reference points)",
        (v2 - 1.047).abs() / 1.047 < 5e-3,
        &format!("c(0.85, 0.9) = {v2:.4} within 0.5% of 1.047"),
    );
    check(
        "6c (t-copula reference points)",
        (v3 - 5054.68).abs() / 5054.68 < 1e-2,
        &format!("c at the extreme tail point = {v3:.2} within 1% of 5054.68"),
    );
}

#[test]
fn criterion_6d_rank_correlation_roundtrip() {
    let mut worst: f64 = 0.0;
    let mut rho = -0.99;
    while rho < 1.0 {
        worst = worst.max((tau_to_rho(rho_to_tau(rho).unwrap()).unwrap() - rho).abs());
        rho += 0.01;
    }
    check(
        "6d (rho-tau roundtrip)",
        worst < 1e-12,
        &format!("worst roundtrip error {worst:.2e} below 1e-12"),
    );
}

/// Grid-integration oracle of the multinomial copula posterior on (0,1)^2:
/// normalized cell masses, posterior mean of the first coordinate, and the
/// population Kendall tau of the discretized distribution.
fn grid_posterior_oracle(counts: [u64; 3], rho: f64, g: usize) -> (f64, f64) {
    let model = ModelSpec::MultinomialConditional { categories: 3 };
    let prior = CopulaPrior::new(
        vec![
            MarginalPrior::beta(20.0, 40.0).unwrap(),
            MarginalPrior::beta(30.0, 30.0).unwrap(),
        ],
        CopulaSpec::gaussian_bivariate(rho).unwrap(),
    )
    .unwrap();
    let data = Dataset::MultinomialCounts { counts: counts.to_vec() };
    let post = PosteriorDensity::new(&model, &prior, &data);
    let mut weights = vec![vec![0.0f64; g]; g];
    let mut max_lp = f64::NEG_INFINITY;
    for i in 0..g {
        let z1 = (i as f64 + 0.5) / g as f64;
        for j in 0..g {
            let z2 = (j as f64 + 0.5) / g as f64;
            let lp = post.log_pdf(&[z1, z2]);
            weights[i][j] = lp;
            max_lp = max_lp.max(lp);
        }
    }
    let mut total = 0.0;
    for row in weights.iter_mut() {
        for w in row.iter_mut() {
            *w = (*w - max_lp).exp();
            total += *w;
        }
    }
    let mut mean_z1 = 0.0;
    for (i, row) in weights.iter_mut().enumerate() {
        let z1 = (i as f64 + 0.5) / g as f64;
        for w in row.iter_mut() {
            *w /= total;
            mean_z1 += *w * z1;
        }
    }
    // Population tau of the discrete distribution via prefix sums, treating
    // each cell's mass as an atom at its center.
    let mut prefix = vec![vec![0.0f64; g + 1]; g + 1];
    for i in 0..g {
        for j in 0..g {
            prefix[i + 1][j + 1] =
                weights[i][j] + prefix[i][j + 1] + prefix[i + 1][j] - prefix[i][j];
        }
    }
    let mut tau_acc = 0.0;
    for i in 0..g {
        for j in 0..g {
            let w = weights[i][j];
            if w == 0.0 {
                continue;
            }
            let below_both = prefix[i][j];
            let same_col = prefix[i][j + 1] - prefix[i][j];
            let same_row = prefix[i + 1][j] - prefix[i][j];
            let h = below_both + 0.5 * (same_col + same_row) + 0.25 * w;
            tau_acc += w * h;
        }
    }
    (mean_z1, 4.0 * tau_acc - 1.0)
}

#[test]
fn criterion_6e_sir_matches_grid_oracle() {
    let counts = [3u64, 4, 3];
    let (oracle_mean, oracle_tau) = grid_posterior_oracle(counts, -0.9, 200);
    let model = ModelSpec::MultinomialConditional { categories: 3 };
    let independence = CopulaPrior::new(
        vec![
            MarginalPrior::beta(20.0, 40.0).unwrap(),
            MarginalPrior::beta(30.0, 30.0).unwrap(),
        ],
        CopulaSpec::independence(2).unwrap(),
    )
    .unwrap();
    let analysis = CopulaPrior::new(
        independence.marginals().to_vec(),
        CopulaSpec::gaussian_bivariate(-0.9).unwrap(),
    )
    .unwrap();
    let data = Dataset::MultinomialCounts { counts: counts.to_vec() };
    let proposal = conjugate_proposal(&model, &independence, &data).unwrap();
    let post = PosteriorDensity::new(&model, &analysis, &data);
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 0x6e);
    let sample = sir_posterior(
        |theta| post.log_pdf(theta.as_slice()),
        &proposal,
        SirSizes { proposal_size: 100_000, resample_size: 20_000, systematic: false },
        &mut rng,
    )
    .unwrap();
    let mean = sample.mean(0);
    let tau = copula_lab::kendall::kendall_tau(&sample.column(0), &sample.column(1)).unwrap();
    check(
        "6e (SIR vs grid oracle)",
        (mean - oracle_mean).abs() <= 0.01,
        &format!("posterior mean of Z1: SIR {mean:.4} vs grid {oracle_mean:.4} within 0.01"),
    );
    check(
        "6e (SIR vs grid oracle)",
        (tau - oracle_tau).abs() <= 0.02,
        &format!("posterior tau: SIR {tau:.4} vs grid {oracle_tau:.4} within 0.02"),
    );
}

#[test]
fn criterion_6f_stationary_point_classification() {
    let c1 = CopulaSpec::independence(2).unwrap();
    let c2 = CopulaSpec::student_t_bivariate(0.0, 4.0).unwrap();
    let scan = classify_stationary_points(&c1, &c2, 101).unwrap();
    let q = student_t_cdf(1.0, 4.0);
    let max_pt = scan
        .points
        .iter()
        .find(|p| p.class == StationaryClass::Maximum)
        .expect("a maximum");
    let saddle = scan
        .points
        .iter()
        .find(|p| {
            p.class == StationaryClass::Saddle
                && (p.location[0] - q).abs() < 1e-3
                && (p.location[1] - q).abs() < 1e-3
        });
    check(
        "6f (stationary classifier)",
        (max_pt.location[0] - 0.5).abs() < 1e-3 && (max_pt.location[1] - 0.5).abs() < 1e-3,
        &format!("maximum located at ({:.6}, {:.6}) within 1e-3 of (0.5, 0.5)", max_pt.location[0], max_pt.location[1]),
    );
    check(
        "6f (stationary classifier)",
        saddle.is_some(),
        &format!("saddle located within 1e-3 of ({q:.6}, {q:.6})"),
    );
}

#[test]
fn criterion_6g_one_step_newton_accuracy() {
    let model = ModelSpec::LinRegKnownVar { noise_variance: 5.0, covariates: 2 };
    let independence = CopulaSpec::independence(2).unwrap();
    let t_copula = CopulaSpec::student_t_bivariate(0.0, 4.0).unwrap();
    let marginals =
        vec![MarginalPrior::normal(0.0, 1.0).unwrap(), MarginalPrior::normal(0.0, 1.0).unwrap()];
    let prior1 = CopulaPrior::new(marginals.clone(), independence.clone()).unwrap();
    let prior2 = CopulaPrior::new(marginals.clone(), t_copula.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 0x69);
    let theta0 = [0.3, -0.2];
    let mut medians = Vec::new();
    for n in [100u64, 1_000, 10_000] {
        let mut errors = Vec::new();
        for _ in 0..40 {
            let data = model.generate_data(&theta0, n, &mut rng).unwrap();
            let p1 = PosteriorDensity::new(&model, &prior1, &data);
            let p2 = PosteriorDensity::new(&model, &prior2, &data);
            let start = model.mle(&data).unwrap().unwrap();
            let m1 = posterior_mode(&p1, &start, NewtonOptions::default()).unwrap();
            let m2 = posterior_mode(&p2, &m1.location, NewtonOptions::default()).unwrap();
            let info: DMatrix<f64> = -Objective::hessian(&p1, &m1.location).unwrap();
            let approx =
                one_step_newton_mode(&m1.location, &info, &independence, &t_copula, &marginals)
                    .unwrap();
            let shift = (&m2.location - &m1.location).norm();
            if shift > 0.0 {
                errors.push((&approx - &m2.location).norm() / shift);
            }
        }
        errors.sort_by(f64::total_cmp);
        medians.push(errors[errors.len() / 2]);
    }
    check(
        "6g (one-step Newton)",
        medians[2] < 0.10,
        &format!("median relative error at n=1e4: {:.4} below 10%", medians[2]),
    );
    check(
        "6g (one-step Newton)",
        medians[0] > medians[1] && medians[1] > medians[2],
        &format!("median relative errors decrease in n: {medians:?}"),
    );
}

#[test]
fn criterion_7_determinism_across_thread_counts() {
    let run_with_threads = |threads: usize| -> (Vec<u8>, Vec<u8>) {
        let mut config = cfg(StudyKind::TauRetention, 10);
        config.sample_sizes = vec![10];
        config.resample_size = 1_000;
        config.threads = Some(threads);
        let result = run_study(&config).expect("study runs");
        let dir = tempdir_for(&format!("determinism-{threads}"));
        let written = write_outputs(&result, &dir).expect("outputs written");
        let table = std::fs::read(&written[0]).unwrap();
        let cells = std::fs::read(&written[1]).unwrap();
        (table, cells)
    };
    let (table1, cells1) = run_with_threads(1);
    let (table8, cells8) = run_with_threads(8);
    let (table1b, cells1b) = run_with_threads(1);
    check(
        "7 (determinism)",
        table1 == table8 && cells1 == cells8,
        "CSV outputs byte-identical at thread counts 1 and 8",
    );
    check(
        "7 (determinism)",
        table1 == table1b && cells1 == cells1b,
        "CSV outputs byte-identical across re-runs with the same config and seed",
    );
}

fn tempdir_for(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("copula-lab-acceptance-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Odds and ends the criteria reference indirectly: a documented check that
/// the induced gamma correlation at the design prior's mean shape is the
/// value the diagnostic uses (the shape/rate reading of its parameters).
#[test]
fn gamma_design_prior_implied_correlation_note() {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 0x70);
    let alpha_mean = 0.2; // mean of Gamma(1000, 5000) under shape/rate
    let analytic = gamma_shape_rate_correlation(alpha_mean).unwrap();
    let est = numeric_fisher_oracle(
        &ModelSpec::GammaShapeRate,
        &[alpha_mean, 1.25],
        FisherMethod::ScoreCovariance,
        200_000,
        &mut rng,
    )
    .unwrap();
    let numeric = est.inverse[(0, 1)] / (est.inverse[(0, 0)] * est.inverse[(1, 1)]).sqrt();
    assert!(
        (numeric - analytic).abs() < 0.02,
        "limiting correlation at the design prior mean: numeric {numeric:.4} vs analytic {analytic:.4}"
    );
    // The value is ~0.436; the 0.86-0.9 range quoted elsewhere corresponds to
    // shapes near 2 rather than 0.2.
    assert!((analytic - 0.4363).abs() < 1e-3);
}
