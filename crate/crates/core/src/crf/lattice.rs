//! Linear-chain CRF dynamic programs in log space. Emissions are a
//! row-major T×K matrix; transitions are (K+2)×(K+2) with the start state
//! at index K and the stop state at K+1.

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Per-position emission scores for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub len: usize,
    pub num_tags: usize,
    pub scores: Vec<f64>,
}

impl Lattice {
    pub fn new(len: usize, num_tags: usize, scores: Vec<f64>) -> Self {
        assert!(len >= 1 && num_tags >= 1, "lattice needs at least one position and tag");
        assert_eq!(scores.len(), len * num_tags);
        Lattice { len, num_tags, scores }
    }

    pub fn zeros(len: usize, num_tags: usize) -> Self {
        Self::new(len, num_tags, vec![0.0; len * num_tags])
    }

    #[inline]
    pub fn at(&self, t: usize, k: usize) -> f64 {
        self.scores[t * self.num_tags + k]
    }
}

/// The transition matrix of a linear-chain CRF.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    pub num_tags: usize,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    /// T×K posterior tag probabilities.
    pub unary: Vec<f64>,
    /// Expected transition counts, shaped like the transition matrix.
    pub transitions: Vec<f64>,
}

impl Transitions {
    pub fn zeros(num_tags: usize) -> Self {
        let n = num_tags + 2;
        Transitions {
            num_tags,
            scores: vec![0.0; n * n],
        }
    }

    pub fn from_slice(num_tags: usize, scores: &[f64]) -> Self {
        assert_eq!(scores.len(), (num_tags + 2) * (num_tags + 2));
        Transitions {
            num_tags,
            scores: scores.to_vec(),
        }
    }

    pub fn bos(&self) -> usize {
        self.num_tags
    }

    pub fn eos(&self) -> usize {
        self.num_tags + 1
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.scores[from * (self.num_tags + 2) + to]
    }

    /// Whether a matrix entry is ever used by a path.
    pub fn is_used(num_tags: usize, from: usize, to: usize) -> bool {
        let (bos, eos) = (num_tags, num_tags + 1);
        from != eos && to != bos && !(from == bos && to == eos)
    }

    pub fn score_path(&self, lattice: &Lattice, tags: &[usize]) -> f64 {
        assert_eq!(tags.len(), lattice.len);
        let mut s = self.get(self.bos(), tags[0]) + self.get(tags[tags.len() - 1], self.eos());
        for (t, &y) in tags.iter().enumerate() {
            s += lattice.at(t, y);
            if t > 0 {
                s += self.get(tags[t - 1], y);
            }
        }
        s
    }

    /// Forward log-scores: alpha[t][k] covers BOS through tag k at t.
    pub fn forward(&self, lattice: &Lattice) -> (Vec<f64>, f64) {
        let (tn, k) = (lattice.len, self.num_tags);
        let mut alpha = vec![0.0; tn * k];
        for j in 0..k {
            alpha[j] = self.get(self.bos(), j) + lattice.at(0, j);
        }
        for t in 1..tn {
            for j in 0..k {
                let prev = &alpha[(t - 1) * k..t * k];
                alpha[t * k + j] = log_sum_exp((0..k).map(|i| prev[i] + self.get(i, j))) + lattice.at(t, j);
            }
        }
        let last = &alpha[(tn - 1) * k..];
        let log_z = log_sum_exp((0..k).map(|i| last[i] + self.get(i, self.eos())));
        (alpha, log_z)
    }

    /// Backward log-scores: beta[t][k] covers tag k at t+1 through EOS,
    /// excluding the emission at t.
    pub fn backward(&self, lattice: &Lattice) -> (Vec<f64>, f64) {
        let (tn, k) = (lattice.len, self.num_tags);
        let mut beta = vec![0.0; tn * k];
        for i in 0..k {
            beta[(tn - 1) * k + i] = self.get(i, self.eos());
        }
        for t in (0..tn - 1).rev() {
            for i in 0..k {
                let next = &beta[(t + 1) * k..(t + 2) * k];
                beta[t * k + i] = log_sum_exp((0..k).map(|j| self.get(i, j) + lattice.at(t + 1, j) + next[j]));
            }
        }
        let log_z = log_sum_exp((0..k).map(|j| self.get(self.bos(), j) + lattice.at(0, j) + beta[j]));
        (beta, log_z)
    }

    pub fn log_partition(&self, lattice: &Lattice) -> f64 {
        self.forward(lattice).1
    }

    pub fn marginals(&self, lattice: &Lattice) -> (Marginals, f64) {
        let (tn, k) = (lattice.len, self.num_tags);
        let n = k + 2;
        let (alpha, log_z) = self.forward(lattice);
        let (beta, _) = self.backward(lattice);
        let mut unary = vec![0.0; tn * k];
        for t in 0..tn {
            for j in 0..k {
                unary[t * k + j] = (alpha[t * k + j] + beta[t * k + j] - log_z).exp();
            }
        }
        let mut trans = vec![0.0; n * n];
        for j in 0..k {
            trans[self.bos() * n + j] = unary[j];
            trans[j * n + self.eos()] = unary[(tn - 1) * k + j];
        }
        for t in 0..tn.saturating_sub(1) {
            for i in 0..k {
                for j in 0..k {
                    let lp = alpha[t * k + i] + self.get(i, j) + lattice.at(t + 1, j) + beta[(t + 1) * k + j] - log_z;
                    trans[i * n + j] += lp.exp();
                }
            }
        }
        (
            Marginals {
                unary,
                transitions: trans,
            },
            log_z,
        )
    }

    /// Best path and its score; ties go to the lower tag index.
    pub fn viterbi(&self, lattice: &Lattice) -> (Vec<usize>, f64) {
        let (tn, k) = (lattice.len, self.num_tags);
        let mut delta = vec![0.0; tn * k];
        let mut back = vec![0usize; tn * k];
        for j in 0..k {
            delta[j] = self.get(self.bos(), j) + lattice.at(0, j);
        }
        for t in 1..tn {
            for j in 0..k {
                let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
                for i in 0..k {
                    let s = delta[(t - 1) * k + i] + self.get(i, j);
                    if s > best {
                        (best, arg) = (s, i);
                    }
                }
                delta[t * k + j] = best + lattice.at(t, j);
                back[t * k + j] = arg;
            }
        }
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
        for i in 0..k {
            let s = delta[(tn - 1) * k + i] + self.get(i, self.eos());
            if s > best {
                (best, arg) = (s, i);
            }
        }
        let mut path = vec![0; tn];
        path[tn - 1] = arg;
        for t in (1..tn).rev() {
            path[t - 1] = back[t * k + path[t]];
        }
        (path, best)
    }

    /// Negative log-likelihood of `gold` with gradients for the emission
    /// scores (T×K) and the transition matrix.
    pub fn nll_and_gradient(&self, lattice: &Lattice, gold: &[usize]) -> (f64, Vec<f64>, Vec<f64>) {
        let k = self.num_tags;
        let n = k + 2;
        let (m, log_z) = self.marginals(lattice);
        let loss = log_z - self.score_path(lattice, gold);
        let mut d_em = m.unary;
        let mut d_tr = m.transitions;
        for (t, &y) in gold.iter().enumerate() {
            d_em[t * k + y] -= 1.0;
            if t > 0 {
                d_tr[gold[t - 1] * n + y] -= 1.0;
            }
        }
        d_tr[self.bos() * n + gold[0]] -= 1.0;
        d_tr[gold[gold.len() - 1] * n + self.eos()] -= 1.0;
        (loss, d_em, d_tr)
    }
}
