use tenrec_core::solver::{rc_admm_solve, RcSolverConfig};
use tenrec_core::synth::{generate_tucker, observe, recovery_error, ObservationSpec, TuckerSpec};

fn main() {
    for sigma in [0.0f64] {
        for (mi, rt) in [(500usize, 1e-7f64), (2000, 1e-10), (5000, 1e-12)] {
            let mut line = format!("sigma {sigma} iters {mi}: ");
            for ranks in [vec![2usize, 2, 2], vec![3, 3, 3], vec![4, 4, 4], vec![1, 1, 1]] {
                let mut acc = 0.0;
                for seed in 0..5u64 {
                    let tspec = TuckerSpec { shape: vec![20, 20, 20], ranks: vec![2, 2, 2], seed: 300 + seed };
                    let ospec = ObservationSpec { missing_rate: 0.8, sigma_n: sigma, seed: 400 + seed };
                    let x_org = generate_tucker(&tspec).unwrap();
                    let (y, mask) = observe(&x_org, &ospec).unwrap();
                    let mut c = RcSolverConfig::new(ranks.clone());
                    c.max_iter = mi;
                    c.rel_tol = rt;
                    let e = recovery_error(&rc_admm_solve(&y, &mask, &c).unwrap().x_hat, &x_org).unwrap();
                    acc += e / 5.0;
                }
                line += &format!("r{} {:.3e}  ", ranks[0], acc);
            }
            println!("{line}");
        }
    }
}
