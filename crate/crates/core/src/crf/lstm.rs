//! Bidirectional LSTM encoder over a flat parameter slice. Each direction
//! stores `Wx` (4H×D), `Wh` (4H×H) and `b` (4H) with gates ordered input,
//! forget, cell, output.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BiLstmShape {
    pub input: usize,
    pub hidden: usize,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Direction {
    /// Positions in processing order.
    order: Vec<usize>,
    /// Activated gates per processing step, 4H each.
    gates: Vec<f64>,
    cells: Vec<f64>,
    hiddens: Vec<f64>,
}

pub struct BiLstmCache {
    dirs: [Direction; 2],
}

impl BiLstmShape {
    pub fn direction_params(&self) -> usize {
        let h4 = 4 * self.hidden;
        h4 * self.input + h4 * self.hidden + h4
    }

    pub fn num_params(&self) -> usize {
        2 * self.direction_params()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.hidden
    }

    fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let h4 = 4 * self.hidden;
        let (wx, rest) = p.split_at(h4 * self.input);
        let (wh, b) = rest.split_at(h4 * self.hidden);
        (wx, wh, b)
    }

    fn run(&self, p: &[f64], x: &[f64], order: Vec<usize>) -> Direction {
        let (d, h) = (self.input, self.hidden);
        let h4 = 4 * h;
        let (wx, wh, b) = self.split(p);
        let n = order.len();
        let mut gates = vec![0.0; n * h4];
        let mut cells = vec![0.0; n * h];
        let mut hiddens = vec![0.0; n * h];
        let mut z = vec![0.0; h4];
        for (s, &t) in order.iter().enumerate() {
            let xt = &x[t * d..(t + 1) * d];
            z.copy_from_slice(b);
            for r in 0..h4 {
                let row = &wx[r * d..(r + 1) * d];
                z[r] += row.iter().zip(xt).map(|(a, b)| a * b).sum::<f64>();
                if s > 0 {
                    let hp = &hiddens[(s - 1) * h..s * h];
                    let row = &wh[r * h..(r + 1) * h];
                    z[r] += row.iter().zip(hp).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            let g = &mut gates[s * h4..(s + 1) * h4];
            for u in 0..h {
                g[u] = sigmoid(z[u]);
                g[h + u] = sigmoid(z[h + u]);
                g[2 * h + u] = z[2 * h + u].tanh();
                g[3 * h + u] = sigmoid(z[3 * h + u]);
                let c_prev = if s > 0 { cells[(s - 1) * h + u] } else { 0.0 };
                let c = g[h + u] * c_prev + g[u] * g[2 * h + u];
                cells[s * h + u] = c;
                hiddens[s * h + u] = g[3 * h + u] * c.tanh();
            }
        }
        Direction {
            order,
            gates,
            cells,
            hiddens,
        }
    }

    /// Encodes a T×D input into T×2H outputs (forward half first).
    pub fn forward(&self, params: &[f64], x: &[f64], len: usize) -> (Vec<f64>, BiLstmCache) {
        debug_assert_eq!(params.len(), self.num_params());
        let dp = self.direction_params();
        let fwd = self.run(&params[..dp], x, (0..len).collect());
        let bwd = self.run(&params[dp..], x, (0..len).rev().collect());
        let h = self.hidden;
        let mut out = vec![0.0; len * 2 * h];
        for (half, dir) in [&fwd, &bwd].into_iter().enumerate() {
            for (s, &t) in dir.order.iter().enumerate() {
                out[t * 2 * h + half * h..t * 2 * h + (half + 1) * h].copy_from_slice(&dir.hiddens[s * h..(s + 1) * h]);
            }
        }
        (out, BiLstmCache { dirs: [fwd, bwd] })
    }

    /// Accumulates parameter gradients into `d_params` and returns the
    /// gradient with respect to the input.
    pub fn backward(
        &self,
        params: &[f64],
        cache: &BiLstmCache,
        x: &[f64],
        d_out: &[f64],
        d_params: &mut [f64],
    ) -> Vec<f64> {
        let (d, h) = (self.input, self.hidden);
        let h4 = 4 * h;
        let dp = self.direction_params();
        let len = cache.dirs[0].order.len();
        let mut dx = vec![0.0; len * d];
        for (half, dir) in cache.dirs.iter().enumerate() {
            let p = &params[half * dp..(half + 1) * dp];
            let (wx, wh, _) = self.split(p);
            let gp = &mut d_params[half * dp..(half + 1) * dp];
            let (gwx, rest) = gp.split_at_mut(h4 * d);
            let (gwh, gb) = rest.split_at_mut(h4 * h);
            let mut dh_next = vec![0.0; h];
            let mut dc_next = vec![0.0; h];
            let mut dz = vec![0.0; h4];
            for s in (0..len).rev() {
                let t = dir.order[s];
                let g = &dir.gates[s * h4..(s + 1) * h4];
                for u in 0..h {
                    let c = dir.cells[s * h + u];
                    let tc = c.tanh();
                    let c_prev = if s > 0 { dir.cells[(s - 1) * h + u] } else { 0.0 };
                    let dh = d_out[t * 2 * h + half * h + u] + dh_next[u];
                    let (i, f, gg, o) = (g[u], g[h + u], g[2 * h + u], g[3 * h + u]);
                    let d_o = dh * tc;
                    let dc = dh * o * (1.0 - tc * tc) + dc_next[u];
                    dz[u] = dc * gg * i * (1.0 - i);
                    dz[h + u] = dc * c_prev * f * (1.0 - f);
                    dz[2 * h + u] = dc * i * (1.0 - gg * gg);
                    dz[3 * h + u] = d_o * o * (1.0 - o);
                    dc_next[u] = dc * f;
                }
                let xt = &x[t * d..(t + 1) * d];
                let dxt = &mut dx[t * d..(t + 1) * d];
                dh_next.iter_mut().for_each(|v| *v = 0.0);
                for r in 0..h4 {
                    let z = dz[r];
                    if z == 0.0 {
                        continue;
                    }
                    gb[r] += z;
                    for c in 0..d {
                        gwx[r * d + c] += z * xt[c];
                        dxt[c] += z * wx[r * d + c];
                    }
                    if s > 0 {
                        let hp = &dir.hiddens[(s - 1) * h..s * h];
                        for c in 0..h {
                            gwh[r * h + c] += z * hp[c];
                            dh_next[c] += z * wh[r * h + c];
                        }
                    }
                }
            }
        }
        dx
    }
}
