//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use faer::Mat;
use rand::Rng;
use pulse_squeeze_core::state::bloch_messiah::{BlochMessiahParams, Op};
use pulse_squeeze_core::{QuantumState, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Pure states of three truncated modes `(u, k, s)`, index `(n_u·N + n_k)·N + n_s`.
pub struct ThreeModeSpace {
    pub cutoff: usize,
}

impl ThreeModeSpace {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff }
    }

    pub fn dim(&self) -> usize {
        self.cutoff.pow(3)
    }

    fn index(&self, n: [usize; 3]) -> usize {
        (n[0] * self.cutoff + n[1]) * self.cutoff + n[2]
    }

    fn occupations(&self, i: usize) -> [usize; 3] {
        let c = self.cutoff;
        [i / (c * c), (i / c) % c, i % c]
    }

    /// `G v` for the anti-Hermitian generator `G` of `op` (`U = e^G`).
    fn generator(&self, op: &Op, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        let c = self.cutoff;
        for (i, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let n = self.occupations(i);
            match *op {
                Op::Phase { mode, phi } => {
                    out[i] += x * C64::new(0.0, phi * n[mode] as f64);
                }
                Op::BeamSplitter { x: mx, y: my, theta, phi } => {
                    // θ(e^{iφ} a_x† a_y − e^{−iφ} a_y† a_x)
                    if n[my] > 0 && n[mx] + 1 < c {
                        let mut m = n;
                        m[mx] += 1;
                        m[my] -= 1;
                        let amp = ((n[my] * (n[mx] + 1)) as f64).sqrt();
                        out[self.index(m)] += x * C64::from_polar(theta * amp, phi);
                    }
                    if n[mx] > 0 && n[my] + 1 < c {
                        let mut m = n;
                        m[my] += 1;
                        m[mx] -= 1;
                        let amp = ((n[mx] * (n[my] + 1)) as f64).sqrt();
                        out[self.index(m)] -= x * C64::from_polar(theta * amp, -phi);
                    }
                }
                Op::Squeezer { mode, r, psi } => {
                    // (r/2)(e^{iψ} a†² − e^{−iψ} a²)
                    if n[mode] + 2 < c {
                        let mut m = n;
                        m[mode] += 2;
                        let amp = (((n[mode] + 1) * (n[mode] + 2)) as f64).sqrt();
                        out[self.index(m)] += x * C64::from_polar(0.5 * r * amp, psi);
                    }
                    if n[mode] >= 2 {
                        let mut m = n;
                        m[mode] -= 2;
                        let amp = ((n[mode] * (n[mode] - 1)) as f64).sqrt();
                        out[self.index(m)] -= x * C64::from_polar(0.5 * r * amp, -psi);
                    }
                }
            }
        }
        out
    }

    /// `e^{sign·G} v` by a scaled Taylor series.
    fn exp_apply(&self, op: &Op, v: &[C64], sign: f64) -> Vec<C64> {
        let scale = match *op {
            Op::Phase { phi, .. } => phi.abs(),
            Op::BeamSplitter { theta, .. } => theta.abs(),
            Op::Squeezer { r, .. } => r.abs(),
        } * self.cutoff as f64;
        let steps = (scale / 0.5).ceil().max(1.0) as usize;
        let mut cur = v.to_vec();
        for _ in 0..steps {
            let mut sum = cur.clone();
            let mut term = cur.clone();
            for k in 1..200 {
                let g = self.generator(op, &term);
                let f = sign / (k as f64 * steps as f64);
                term = g.into_iter().map(|z| z * f).collect();
                let tn: f64 = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                for (s, t) in sum.iter_mut().zip(&term) {
                    *s += t;
                }
                if tn < 1e-17 {
                    break;
                }
            }
            cur = sum;
        }
        cur
    }

    /// Schrödinger evolution by the sequence (first operation first), or its inverse.
    pub fn evolve(&self, ops: &[Op], v: &[C64], inverse: bool) -> Vec<C64> {
        let mut cur = v.to_vec();
        if inverse {
            for op in ops.iter().rev() {
                cur = self.exp_apply(op, &cur, -1.0);
            }
        } else {
            for op in ops {
                cur = self.exp_apply(op, &cur, 1.0);
            }
        }
        cur
    }

    fn lower(&self, mode: usize, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (i, &x) in v.iter().enumerate() {
            let n = self.occupations(i);
            if n[mode] > 0 {
                let mut m = n;
                m[mode] -= 1;
                out[self.index(m)] += x * (n[mode] as f64).sqrt();
            }
        }
        out
    }

    fn raise(&self, mode: usize, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (i, &x) in v.iter().enumerate() {
            let n = self.occupations(i);
            if n[mode] + 1 < self.cutoff {
                let mut m = n;
                m[mode] += 1;
                out[self.index(m)] += x * ((n[mode] + 1) as f64).sqrt();
            }
        }
        out
    }

    /// `max ‖(U† a_u U − Σ row·ops)|n⟩‖` over basis states with at most two quanta.
    pub fn heisenberg_residual(&self, params: &BlochMessiahParams) -> f64 {
        let ops = params.sequence();
        let row = params.reconstruct();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            let n = self.occupations(i);
            if n.iter().sum::<usize>() > 2 {
                continue;
            }
            let mut v = vec![ZERO; self.dim()];
            v[i] = C64::new(1.0, 0.0);
            let lhs = self.evolve(&ops, &self.lower(0, &self.evolve(&ops, &v, false)), true);
            let terms = [
                (row[0], self.lower(0, &v)),
                (row[1], self.raise(0, &v)),
                (row[2], self.lower(1, &v)),
                (row[3], self.raise(1, &v)),
                (row[4], self.lower(2, &v)),
            ];
            let mut rhs = vec![ZERO; self.dim()];
            for (c, t) in &terms {
                for (r, x) in rhs.iter_mut().zip(t) {
                    *r += c * x;
                }
            }
            let err: f64 = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(err);
        }
        worst
    }

    /// Reduced density matrix of mode `u` (first `out_dim` levels) after the
    /// sequence acts on `ρ_in ⊗ |0⟩⟨0| ⊗ |0⟩⟨0|`.
    pub fn output_state(&self, params: &BlochMessiahParams, rho_in: &QuantumState, out_dim: usize) -> Mat<C64> {
        let ops = params.sequence();
        let d = rho_in.dim();
        assert!(d <= self.cutoff && out_dim <= self.cutoff);
        let (vals, vecs) = hermitian_eigen(rho_in.rho());
        let mut out = Mat::<C64>::zeros(out_dim, out_dim);
        let c = self.cutoff;
        for (k, &w) in vals.iter().enumerate() {
            if w < 1e-15 {
                continue;
            }
            let mut v = vec![ZERO; self.dim()];
            for n in 0..d {
                v[self.index([n, 0, 0])] = vecs[(n, k)];
            }
            let psi = self.evolve(&ops, &v, false);
            // Tr_{k,s} |ψ⟩⟨ψ|
            for i in 0..out_dim {
                for j in 0..out_dim {
                    let mut s = ZERO;
                    for rest in 0..c * c {
                        s += psi[i * c * c + rest] * psi[j * c * c + rest].conj();
                    }
                    out[(i, j)] += s * w;
                }
            }
        }
        out
    }
}

/// Eigenvalues (descending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &Mat<C64>) -> (Vec<f64>, Mat<C64>) {
    let e = m.as_ref().self_adjoint_eigen(faer::Side::Lower).expect("eigendecomposition");
    let n = m.nrows();
    let s = e.S();
    let u = e.U();
    let vals: Vec<f64> = (0..n).rev().map(|i| s[i].re).collect();
    let vecs = Mat::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    (vals, vecs)
}

/// `½ Σ |λ(ρ − σ)|`, padding the smaller matrix with zeros.
pub fn trace_distance(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let n = a.nrows().max(b.nrows());
    let get = |m: &Mat<C64>, i: usize, j: usize| if i < m.nrows() && j < m.ncols() { m[(i, j)] } else { ZERO };
    let d = Mat::from_fn(n, n, |i, j| {
        let x = get(a, i, j) - get(b, i, j);
        let y = (get(a, j, i) - get(b, j, i)).conj();
        (x + y) * 0.5
    });
    0.5 * hermitian_eigen(&d).0.iter().map(|l| l.abs()).sum::<f64>()
}

/// `P(2n) = (2n)! / (2ⁿ n!)² · tanhⁿ(r)² / cosh r`, odd levels empty.
pub fn squeezed_vacuum_populations(r: f64, levels: usize) -> Vec<f64> {
    let t2 = r.tanh().powi(2);
    let mut out = vec![0.0; levels];
    let mut p = 1.0 / r.cosh();
    for n in 0..levels.div_ceil(2) {
        if 2 * n < levels {
            out[2 * n] = p;
        }
        // ratio P(2n+2)/P(2n) = (2n+1)(2n+2)/(4 (n+1)²) tanh²r
        p *= ((2 * n + 1) * (2 * n + 2)) as f64 / (4.0 * ((n + 1) * (n + 1)) as f64) * t2;
    }
    out
}

/// `exp(βa† − β*a)` in a `big`-level truncation via the Hermitian generator.
pub fn displacement_oracle(beta: C64, big: usize) -> Mat<C64> {
    let h = Mat::from_fn(big, big, |i, j| {
        let ib = C64::new(0.0, 1.0) * beta;
        if i == j + 1 {
            ib * (i as f64).sqrt()
        } else if j == i + 1 {
            ib.conj() * (j as f64).sqrt()
        } else {
            ZERO
        }
    });
    let (vals, vecs) = hermitian_eigen(&h);
    let ph = Mat::from_fn(big, big, |i, k| vecs[(i, k)] * C64::from_polar(1.0, -vals[k]));
    &ph * vecs.adjoint()
}

/// `W(x, p) = (1/π) Tr[ρ D(α) Π D(α)†]`, `α = (x + ip)/√2`, Π the parity.
pub fn wigner_oracle(rho: &QuantumState, x: f64, p: f64, big: usize) -> f64 {
    let alpha = C64::new(x, p) * std::f64::consts::FRAC_1_SQRT_2;
    let d = displacement_oracle(alpha, big);
    let n = rho.dim();
    // Tr[ρ D Π D†] = Σ_{ij} ρ_ij Σ_k (−1)^k D_jk D*_ik
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            let mut t = ZERO;
            for k in 0..big {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                t += d[(j, k)] * d[(i, k)].conj() * sign;
            }
            s += rho.rho()[(i, j)] * t;
        }
    }
    s.re / std::f64::consts::PI
}

/// Random mixed state of the given rank with amplitudes decaying in `n`.
pub fn random_state(rng: &mut impl Rng, dim: usize, rank: usize) -> QuantumState {
    let mut rho = Mat::<C64>::zeros(dim, dim);
    for _ in 0..rank {
        // Amplitudes decay so the state sits well inside the truncation.
        let v: Vec<C64> = (0..dim)
            .map(|n| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.5f64.powi(n as i32))
            .collect();
        let w: f64 = rng.gen_range(0.1..1.0);
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    let tr: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    QuantumState::new(Mat::from_fn(dim, dim, |i, j| rho[(i, j)] / tr)).unwrap()
}
