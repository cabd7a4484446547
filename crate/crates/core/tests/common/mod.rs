//! Reference implementations used as test oracles. They favour directness
//! over speed and share no code with the library.

#![allow(dead_code)]

use yidtag::synthetic::Hmm;

/// Every tag sequence of length `t` over `k` tags, in lexicographic order.
pub fn all_paths(t: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    out
}

/// Score of one path given `em[t][k]` and an (K+2)² transition matrix with
/// start K and stop K+1.
pub fn path_score(em: &[Vec<f64>], tr: &[f64], path: &[usize]) -> f64 {
    let k = em[0].len();
    let n = k + 2;
    let mut s = tr[k * n + path[0]];
    for (t, &y) in path.iter().enumerate() {
        s += em[t][y];
        if t > 0 {
            s += tr[path[t - 1] * n + y];
        }
    }
    s + tr[path[path.len() - 1] * n + k + 1]
}

pub struct Enumerated {
    pub log_z: f64,
    pub best: Vec<usize>,
    pub best_score: f64,
    /// `marginals[t][k]`
    pub marginals: Vec<Vec<f64>>,
}

/// Partition function, argmax and marginals by listing every path. Ties
/// keep the first path in lexicographic order.
pub fn enumerate_crf(em: &[Vec<f64>], tr: &[f64]) -> Enumerated {
    let (t, k) = (em.len(), em[0].len());
    let paths = all_paths(t, k);
    let scores: Vec<f64> = paths.iter().map(|p| path_score(em, tr, p)).collect();
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
    let log_z = m + z.ln();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    let mut marginals = vec![vec![0.0; k]; t];
    for (p, s) in paths.iter().zip(&scores) {
        let w = (s - log_z).exp();
        for (pos, &y) in p.iter().enumerate() {
            marginals[pos][y] += w;
        }
    }
    Enumerated {
        log_z,
        best: paths[best].clone(),
        best_score: scores[best],
        marginals,
    }
}

/// Maximum-posterior tag at each position under the true HMM, computed
/// with scaled forward-backward in probability space.
pub fn hmm_posterior_decode(hmm: &Hmm, words: &[usize]) -> Vec<usize> {
    let k = hmm.tags.len();
    let n = words.len();
    let mut alpha = vec![vec![0.0; k]; n];
    let mut scale = vec![0.0; n];
    for j in 0..k {
        alpha[0][j] = hmm.initial[j] * hmm.emission[j][words[0]];
    }
    scale[0] = alpha[0].iter().sum();
    alpha[0].iter_mut().for_each(|a| *a /= scale[0]);
    for t in 1..n {
        for j in 0..k {
            let into: f64 = (0..k).map(|i| alpha[t - 1][i] * hmm.transition[i][j]).sum();
            alpha[t][j] = into * hmm.emission[j][words[t]];
        }
        scale[t] = alpha[t].iter().sum();
        alpha[t].iter_mut().for_each(|a| *a /= scale[t]);
    }
    let mut beta = vec![vec![1.0; k]; n];
    for t in (0..n - 1).rev() {
        for i in 0..k {
            beta[t][i] = (0..k)
                .map(|j| hmm.transition[i][j] * hmm.emission[j][words[t + 1]] * beta[t + 1][j])
                .sum::<f64>()
                / scale[t + 1];
        }
    }
    (0..n)
        .map(|t| {
            let post: Vec<f64> = (0..k).map(|j| alpha[t][j] * beta[t][j]).collect();
            (0..k).fold(0, |b, j| if post[j] > post[b] { j } else { b })
        })
        .collect()
}

/// Best local alignment score by trying every pair of substrings and
/// scoring each with a global alignment.
pub fn brute_force_local(n: usize, m: usize, sub: &dyn Fn(usize, usize) -> f64, gap: f64) -> f64 {
    let mut best = 0.0f64;
    for a0 in 0..n {
        for a1 in a0 + 1..=n {
            for b0 in 0..m {
                for b1 in b0 + 1..=m {
                    best = best.max(global(a0, a1, b0, b1, sub, gap));
                }
            }
        }
    }
    best
}

fn global(a0: usize, a1: usize, b0: usize, b1: usize, sub: &dyn Fn(usize, usize) -> f64, gap: f64) -> f64 {
    let (n, m) = (a1 - a0, b1 - b0);
    let mut d = vec![vec![0.0; m + 1]; n + 1];
    for i in 1..=n {
        d[i][0] = i as f64 * gap;
    }
    for j in 1..=m {
        d[0][j] = j as f64 * gap;
    }
    for i in 1..=n {
        for j in 1..=m {
            d[i][j] = (d[i - 1][j - 1] + sub(a0 + i - 1, b0 + j - 1))
                .max(d[i - 1][j] + gap)
                .max(d[i][j - 1] + gap);
        }
    }
    d[n][m]
}

/// Sample mean and n-1 standard deviation, two-pass.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut sum = 0.0;
    for x in xs {
        sum += x;
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for x in xs {
        ss += (x - mean) * (x - mean);
    }
    (mean, (ss / (n - 1.0)).sqrt())
}
