//! Independent reference computations for the test suites.
//!
//! Everything here is deliberately written against plain slices and scalar
//! math, with no dependency on the library under test, so that agreement
//! between the two is evidence rather than tautology.

/// Position of tensor entry `idx` (zero-based) in the mode-`mode` unfolding,
/// computed by direct enumeration of the matricization index map:
/// `row = i_m`, `col = sum_{k != m} i_k * prod_{l < k, l != m} n_l`.
pub fn unfold_position(shape: &[usize], mode: usize, idx: &[usize]) -> (usize, usize) {
    assert!(mode >= 1 && mode <= shape.len());
    assert_eq!(idx.len(), shape.len());
    let m = mode - 1;
    let row = idx[m];
    let mut col = 0;
    let mut stride = 1;
    for k in 0..shape.len() {
        if k == m {
            continue;
        }
        col += idx[k] * stride;
        stride *= shape[k];
    }
    (row, col)
}

/// The scalar objective `(1/2)(y - x)^2 + w|x|^p`.
pub fn prox_objective(x: f64, y: f64, w: f64, p: f64) -> f64 {
    0.5 * (y - x) * (y - x) + w * x.abs().powf(p)
}

const GRID: usize = 1_000_000;

// x_i = i * step, so x_i^(2/3) = i^(2/3) * step^(2/3); tabulating i^(2/3)
// once keeps the million-point sweep off the slow cbrt call.
fn two_thirds_table() -> &'static [f64] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=GRID)
            .map(|i| {
                let c = (i as f64).cbrt();
                c * c
            })
            .collect()
    })
}

/// Brute-force global minimizer of `(1/2)(y - x)^2 + w|x|^p` over a
/// 10^6-point grid on `[0, |y|]`, refined by golden-section search and a
/// short Newton polish of the stationarity equation, then compared against
/// the boundary candidate `x = 0`. Ties prefer the nonzero candidate.
pub fn brute_force_prox(y: f64, w: f64, p: f64) -> f64 {
    let ay = y.abs();
    if ay == 0.0 {
        return 0.0;
    }
    if w == 0.0 {
        return y;
    }
    let step = ay / GRID as f64;

    let mut best_i = 0usize;
    let mut best_f = 0.5 * ay * ay; // objective at x = 0
    let mut consider = |i: usize, f: f64| {
        if f < best_f {
            best_f = f;
            best_i = i;
        }
    };
    if p == 1.0 {
        for i in 1..=GRID {
            let x = i as f64 * step;
            let d = ay - x;
            consider(i, 0.5 * d * d + w * x);
        }
    } else if p == 0.5 {
        let ws = w * step.sqrt();
        for i in 1..=GRID {
            let d = ay - i as f64 * step;
            consider(i, 0.5 * d * d + ws * (i as f64).sqrt());
        }
    } else if (p - 2.0 / 3.0).abs() < 1e-12 {
        let table = two_thirds_table();
        let c = step.cbrt();
        let ws = w * c * c;
        for (i, t) in table.iter().enumerate().skip(1) {
            let d = ay - i as f64 * step;
            consider(i, 0.5 * d * d + ws * t);
        }
    } else {
        for i in 1..=GRID {
            let x = i as f64 * step;
            let d = ay - x;
            consider(i, 0.5 * d * d + w * x.powf(p));
        }
    }
    if best_i == 0 {
        return 0.0;
    }

    // Golden-section refinement inside the bracketing grid cells.
    let mut lo = (best_i - 1) as f64 * step;
    let mut hi = ((best_i + 1).min(GRID)) as f64 * step;
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = prox_objective(x1, ay, w, p);
    let mut f2 = prox_objective(x2, ay, w, p);
    for _ in 0..120 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = prox_objective(x1, ay, w, p);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = prox_objective(x2, ay, w, p);
        }
    }
    let mut x = 0.5 * (lo + hi);

    // Newton polish on g'(x) = x - y + w p x^{p-1}; the objective is too
    // flat near the minimum for value-based search to localize further.
    for _ in 0..30 {
        let g1 = x - ay + w * p * x.powf(p - 1.0);
        let g2 = 1.0 + w * p * (p - 1.0) * x.powf(p - 2.0);
        if g2.abs() < 1e-300 {
            break;
        }
        let nx = x - g1 / g2;
        if !nx.is_finite() || nx <= 0.0 || nx > ay {
            break;
        }
        if (nx - x).abs() <= 1e-17 * x.abs() {
            x = nx;
            break;
        }
        x = nx;
    }

    let fx = prox_objective(x, ay, w, p);
    let f0 = 0.5 * ay * ay;
    let best = if fx <= f0 { x } else { 0.0 };
    y.signum() * best
}

/// Eigendecomposition of a dense symmetric matrix (column-major, `n x n`)
/// by the cyclic Jacobi method. Returns eigenvalues in descending order and
/// the matching eigenvectors as columns of a column-major `n x n` matrix.
pub fn jacobi_eigen_sym(n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut d = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let at = |m: &[f64], r: usize, c: usize| m[c * n + r];

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += at(&d, i, j) * at(&d, i, j);
            }
        }
        if off.sqrt() < 1e-300 || off.sqrt() < 1e-15 * frob(&d) {
            break;
        }
        for pp in 0..n {
            for qq in (pp + 1)..n {
                let apq = at(&d, pp, qq);
                if apq == 0.0 {
                    continue;
                }
                let app = at(&d, pp, pp);
                let aqq = at(&d, qq, qq);
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rotate rows/cols pp, qq of d
                for k in 0..n {
                    let dkp = at(&d, k, pp);
                    let dkq = at(&d, k, qq);
                    d[pp * n + k] = c * dkp - s * dkq;
                    d[qq * n + k] = s * dkp + c * dkq;
                }
                for k in 0..n {
                    let dpk = d[k * n + pp];
                    let dqk = d[k * n + qq];
                    d[k * n + pp] = c * dpk - s * dqk;
                    d[k * n + qq] = s * dpk + c * dqk;
                }
                for k in 0..n {
                    let vkp = v[pp * n + k];
                    let vkq = v[qq * n + k];
                    v[pp * n + k] = c * vkp - s * vkq;
                    v[qq * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| at(&d, i, i)).collect();
    order.sort_by(|&x, &y| evals[y].partial_cmp(&evals[x]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let mut sorted_vecs = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        sorted_vecs[new_col * n..(new_col + 1) * n]
            .copy_from_slice(&v[old_col * n..(old_col + 1) * n]);
    }
    (sorted_vals, sorted_vecs)
}

fn frob(m: &[f64]) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Singular values of a column-major `rows x cols` matrix, descending,
/// via Jacobi eigendecomposition of the smaller Gram matrix.
pub fn gram_singular_values(rows: usize, cols: usize, data: &[f64]) -> Vec<f64> {
    assert_eq!(data.len(), rows * cols);
    let k = rows.min(cols);
    let gram_rows = if rows <= cols { rows } else { cols };
    let mut g = vec![0.0; gram_rows * gram_rows];
    let get = |r: usize, c: usize| data[c * rows + r];
    for i in 0..gram_rows {
        for j in i..gram_rows {
            let mut s = 0.0;
            if rows <= cols {
                // M M^T
                for c in 0..cols {
                    s += get(i, c) * get(j, c);
                }
            } else {
                // M^T M
                for r in 0..rows {
                    s += get(r, i) * get(r, j);
                }
            }
            g[j * gram_rows + i] = s;
            g[i * gram_rows + j] = s;
        }
    }
    let (evals, _) = jacobi_eigen_sym(gram_rows, &g);
    evals.iter().take(k).map(|&e| e.max(0.0).sqrt()).collect()
}

/// Leading singular triple `(u, sigma, v)` of a column-major `rows x cols`
/// matrix by plain power iteration on `M^T M`.
pub fn power_iteration_top(
    rows: usize,
    cols: usize,
    data: &[f64],
    iters: usize,
) -> (Vec<f64>, f64, Vec<f64>) {
    assert_eq!(data.len(), rows * cols);
    let get = |r: usize, c: usize| data[c * rows + r];
    // fixed deterministic start
    let mut v: Vec<f64> = (0..cols).map(|j| ((j as f64 + 1.0) * 0.7391 + 0.31).sin()).collect();
    normalize(&mut v);
    let mut u = vec![0.0; rows];
    let mut sigma = 0.0;
    for _ in 0..iters {
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = (0..cols).map(|j| get(i, j) * v[j]).sum();
        }
        sigma = normalize(&mut u);
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = (0..rows).map(|i| get(i, j) * u[i]).sum();
        }
        normalize(&mut v);
    }
    (u, sigma, v)
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfold_position_matches_hand_computation() {
        // 2x2x2 tensor, mode 1: entry (1, 0, 1) -> row 1, col 0 + 1*2 = 2
        assert_eq!(unfold_position(&[2, 2, 2], 1, &[1, 0, 1]), (1, 2));
        // mode 3: entry (1, 1, 0) -> row 0, col 1 + 1*2 = 3
        assert_eq!(unfold_position(&[2, 2, 2], 3, &[1, 1, 0]), (0, 3));
    }

    #[test]
    fn brute_prox_soft_threshold_case() {
        assert!((brute_force_prox(5.0, 2.0, 1.0) - 3.0).abs() < 1e-9);
        assert_eq!(brute_force_prox(1.0, 2.0, 1.0), 0.0);
        assert!((brute_force_prox(-5.0, 2.0, 1.0) + 3.0).abs() < 1e-9);
    }

    #[test]
    fn jacobi_diagonal() {
        let a = vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let (vals, _) = jacobi_eigen_sym(3, &a);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_svals_rank1() {
        // 2x3 rank-1: [1;2] * [1,1,1]
        let m = vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        let s = gram_singular_values(2, 3, &m);
        assert!((s[0] - 15f64.sqrt()).abs() < 1e-10);
        assert!(s[1].abs() < 1e-10);
    }

    #[test]
    fn power_iteration_diag() {
        let m = vec![3.0, 0.0, 0.0, 2.0]; // diag(3,2), column-major
        let (_, sigma, _) = power_iteration_top(2, 2, &m, 200);
        assert!((sigma - 3.0).abs() < 1e-10);
    }
}
