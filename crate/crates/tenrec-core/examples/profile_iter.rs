use std::time::Instant;
use tenrec_core::spectral::{thin_svd, weighted_sv_shrink, wspn_prox};
use tenrec_core::synth::{generate_tucker, observe, ObservationSpec, TuckerSpec};

fn main() {
    let tspec = TuckerSpec { shape: vec![16, 16, 16, 16], ranks: vec![2, 2, 2, 2], seed: 7 };
    let ospec = ObservationSpec { missing_rate: 0.4, sigma_n: 0.0, seed: 8 };
    let x = generate_tucker(&tspec).unwrap();
    let (y, _mask) = observe(&x, &ospec).unwrap();

    let reps = 200;
    let t = Instant::now();
    for m in 0..reps { std::hint::black_box(y.unfold(m % 4 + 1).unwrap()); }
    println!("unfold:      {:.3} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let unf = y.unfold(2).unwrap();
    let t = Instant::now();
    for _ in 0..reps { std::hint::black_box(unf.fold(2, &[16, 16, 16, 16]).unwrap()); }
    println!("fold:        {:.3} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let t = Instant::now();
    for _ in 0..reps { std::hint::black_box(thin_svd(&unf).unwrap()); }
    println!("thin_svd:    {:.3} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let svd = thin_svd(&unf).unwrap();
    let t = Instant::now();
    for _ in 0..reps { std::hint::black_box(svd.reconstruct()); }
    println!("reconstruct: {:.3} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let w = vec![1.0; 16];
    let t = Instant::now();
    for _ in 0..reps {
        let s = weighted_sv_shrink(&svd, &w, 1.0).unwrap();
        std::hint::black_box(s);
    }
    println!("shrink:      {:.3} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let t = Instant::now();
    for _ in 0..reps { std::hint::black_box(wspn_prox(&unf, &w, 1.0).unwrap()); }
    println!("wspn_prox:   {:.3} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let t = Instant::now();
    for _ in 0..reps {
        let s = y.zip_map(&x, |a, b| a + 0.5 * b).unwrap();
        std::hint::black_box(s);
    }
    println!("zip_map:     {:.3} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);
}
