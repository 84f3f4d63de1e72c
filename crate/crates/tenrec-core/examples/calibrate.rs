use std::time::Instant;

use tenrec_core::solver::{rc_admm_solve, wtspn_admm_solve, RcSolverConfig, WtspnSolverConfig};
use tenrec_core::synth::{generate_tucker, observe, recovery_error, ObservationSpec, TuckerSpec};
use tenrec_core::weighting::{ideal_weights, mean_fill, observation_weights, uniform_weights};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "crit5".into());
    match which.as_str() {
        "crit5" => crit5(),
        "crit4" => crit4(),
        "crit6" => crit6(),
        "timing" => timing(),
        _ => eprintln!("unknown mode"),
    }
}

// 20^3 rank-(2,2,2), 40% missing, sigma 0: wtspn uniform p=1 and rc correct ranks
fn crit5() {
    for seed in 0..5u64 {
        let tspec = TuckerSpec { shape: vec![20, 20, 20], ranks: vec![2, 2, 2], seed: 100 + seed };
        let ospec = ObservationSpec { missing_rate: 0.4, sigma_n: 0.0, seed: 200 + seed };
        let x_org = generate_tucker(&tspec).unwrap();
        let (y, mask) = observe(&x_org, &ospec).unwrap();
        let baseline = recovery_error(&mean_fill(&y, &mask).unwrap(), &x_org).unwrap();

        let weights = uniform_weights(&[20, 20, 20]).unwrap().into_uniform_gamma_spec(1.0).unwrap();
        let config = WtspnSolverConfig::new(weights);
        let t0 = Instant::now();
        let res = wtspn_admm_solve(&y, &mask, &config).unwrap();
        let wt_err = recovery_error(&res.x_hat, &x_org).unwrap();
        let wt_time = t0.elapsed().as_secs_f64();

        let rc = RcSolverConfig::new(vec![2, 2, 2]);
        let t0 = Instant::now();
        let res_rc = rc_admm_solve(&y, &mask, &rc).unwrap();
        let rc_err = recovery_error(&res_rc.x_hat, &x_org).unwrap();
        let rc_time = t0.elapsed().as_secs_f64();

        println!(
            "seed {seed}: baseline {baseline:.3e}  wtspn {wt_err:.3e} (x{:.0}, {} iters, {wt_time:.2}s)  rc {rc_err:.3e} (x{:.0}, {} iters, {rc_time:.2}s)",
            baseline / wt_err, res.iterations,
            baseline / rc_err, res_rc.iterations,
        );
    }
}

// noiseless interpolation quality vs iteration budget
fn crit4() {
    let tspec = TuckerSpec { shape: vec![15, 12, 10], ranks: vec![2, 3, 2], seed: 42 };
    let ospec = ObservationSpec { missing_rate: 0.4, sigma_n: 0.0, seed: 43 };
    let x_org = generate_tucker(&tspec).unwrap();
    let (y, mask) = observe(&x_org, &ospec).unwrap();
    let weights = uniform_weights(&[15, 12, 10]).unwrap().into_uniform_gamma_spec(1.0).unwrap();
    for (max_iter, rel_tol) in [(500usize, 1e-7f64), (1000, 1e-9), (2000, 1e-10), (4000, 1e-11), (8000, 1e-12)] {
        let mut config = WtspnSolverConfig::new(weights.clone());
        config.max_iter = max_iter;
        config.rel_tol = rel_tol;
        let res = wtspn_admm_solve(&y, &mask, &config).unwrap();
        let gap = mask.apply(&res.x_hat).unwrap().sub(&y).unwrap().max_abs();
        println!(
            "max_iter {max_iter} rel_tol {rel_tol:.0e}: iters {} converged {} interp gap {gap:.3e} ball_res {:.3e}",
            res.iterations, res.converged, res.ball_residual
        );
    }
}

// trend checks at 80% missing, sigma 0.05
fn crit6() {
    let shape = vec![20usize, 20, 20];
    let n_seeds = 5u64;
    let alphas = [1.0, 1.5, 2.0];
    let ps = [0.5, 2.0 / 3.0, 1.0];
    let mut uni_err = vec![0.0; ps.len()];
    let mut id_err = vec![vec![0.0; alphas.len()]; ps.len()];
    let mut obs_half = 0.0;
    let mut obs_one = 0.0;
    let mut rc_ok = 0.0;
    let mut rc_over = 0.0;

    for seed in 0..n_seeds {
        let tspec = TuckerSpec { shape: shape.clone(), ranks: vec![2, 2, 2], seed: 300 + seed };
        let ospec = ObservationSpec { missing_rate: 0.8, sigma_n: 0.05, seed: 400 + seed };
        let x_org = generate_tucker(&tspec).unwrap();
        let (y, mask) = observe(&x_org, &ospec).unwrap();

        for (pi, &p) in ps.iter().enumerate() {
            let w = uniform_weights(&shape).unwrap().into_uniform_gamma_spec(p).unwrap();
            let mut c = WtspnSolverConfig::new(w);
            c.sigma_n = 0.05;
            let e = recovery_error(&wtspn_admm_solve(&y, &mask, &c).unwrap().x_hat, &x_org).unwrap();
            uni_err[pi] += e / n_seeds as f64;

            for (ai, &alpha) in alphas.iter().enumerate() {
                let w = ideal_weights(&x_org, alpha).unwrap().into_uniform_gamma_spec(p).unwrap();
                let mut c = WtspnSolverConfig::new(w);
                c.sigma_n = 0.05;
                let e = recovery_error(&wtspn_admm_solve(&y, &mask, &c).unwrap().x_hat, &x_org).unwrap();
                id_err[pi][ai] += e / n_seeds as f64;
            }
        }
        for (p, acc) in [(0.5, &mut obs_half), (1.0, &mut obs_one)] {
            let mut sum = 0.0;
            for &alpha in &alphas {
                let w = observation_weights(&y, &mask, alpha).unwrap().into_uniform_gamma_spec(p).unwrap();
                let mut c = WtspnSolverConfig::new(w);
                c.sigma_n = 0.05;
                sum += recovery_error(&wtspn_admm_solve(&y, &mask, &c).unwrap().x_hat, &x_org).unwrap();
            }
            *acc += sum / (alphas.len() as f64 * n_seeds as f64);
        }
        let e = recovery_error(&rc_admm_solve(&y, &mask, &RcSolverConfig::new(vec![2, 2, 2])).unwrap().x_hat, &x_org).unwrap();
        rc_ok += e / n_seeds as f64;
        let e = recovery_error(&rc_admm_solve(&y, &mask, &RcSolverConfig::new(vec![4, 4, 4])).unwrap().x_hat, &x_org).unwrap();
        rc_over += e / n_seeds as f64;
        println!("seed {seed} done");
    }
    for (pi, &p) in ps.iter().enumerate() {
        println!("p={p:.3}: uni {:.3e}  id(alpha 1,1.5,2) {:.3e} {:.3e} {:.3e}", uni_err[pi], id_err[pi][0], id_err[pi][1], id_err[pi][2]);
    }
    println!("obs p=1/2 {obs_half:.3e}  obs p=1 {obs_one:.3e}  ratio {:.2}", obs_one / obs_half);
    println!("rc correct {rc_ok:.3e}  rc +2 {rc_over:.3e}  ratio {:.2}", rc_over / rc_ok);
}

fn timing() {
    let tspec = TuckerSpec { shape: vec![16, 16, 16, 16], ranks: vec![2, 2, 2, 2], seed: 7 };
    let ospec = ObservationSpec { missing_rate: 0.4, sigma_n: 0.0, seed: 8 };
    let x_org = generate_tucker(&tspec).unwrap();
    let (y, mask) = observe(&x_org, &ospec).unwrap();
    let weights = uniform_weights(&[16, 16, 16, 16]).unwrap().into_uniform_gamma_spec(1.0).unwrap();
    let config = WtspnSolverConfig::new(weights);
    let t0 = Instant::now();
    let res = wtspn_admm_solve(&y, &mask, &config).unwrap();
    let err = recovery_error(&res.x_hat, &x_org).unwrap();
    println!(
        "16^4 solve: {:.2}s, {} iters, err {err:.3e}",
        t0.elapsed().as_secs_f64(),
        res.iterations
    );
}
