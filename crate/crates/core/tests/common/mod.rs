#![allow(dead_code)]

use rand::Rng;

/// Direct transcription of the double-centering estimator: every mean is
/// recomputed from scratch inside the loops.
pub fn naive_dcor(alpha: &[f64], beta: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let a = |i: usize, j: usize| (alpha[i] - alpha[j]).abs();
    let b = |i: usize, j: usize| {
        beta[i]
            .iter()
            .zip(&beta[j])
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    };
    let nf = n as f64;
    let centered = |d: &dyn Fn(usize, usize) -> f64, i: usize, j: usize| {
        let mut row = 0.0;
        let mut col = 0.0;
        let mut all = 0.0;
        for k in 0..n {
            row += d(i, k);
            col += d(k, j);
            for l in 0..n {
                all += d(k, l);
            }
        }
        d(i, j) - row / nf - col / nf + all / (nf * nf)
    };
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = centered(&a, i, j);
            let y = centered(&b, i, j);
            ab += x * y;
            aa += x * x;
            bb += y * y;
        }
    }
    let cov = ab.max(0.0).sqrt() / nf;
    let var_a = aa.sqrt() / nf;
    let var_b = bb.sqrt() / nf;
    if var_a == 0.0 || var_b == 0.0 {
        0.0
    } else {
        cov / (var_a * var_b).sqrt()
    }
}

pub fn random_observations<R: Rng>(rng: &mut R, n: usize, d: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let alpha = (0..n).map(|_| rng.random::<f64>()).collect();
    let beta = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    (alpha, beta)
}

pub fn l1(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .sum()
}
