//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use qbath::operator::{super_apply, tensor, HilbertSpace, Operator, SuperSign};

pub type M = DMatrix<C64>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn sx() -> M {
    M::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn sy() -> M {
    M::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    )
}

pub fn sz() -> M {
    M::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn id(n: usize) -> M {
    M::identity(n, n)
}

/// `exp(A)` by scaling and squaring of a Taylor series.
pub fn expm(a: &M) -> M {
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.1 {
        s += 1;
    }
    let scaled = a * c(1.0 / 2f64.powi(s));
    let n = a.nrows();
    let mut term = id(n);
    let mut sum = id(n);
    for k in 1..30 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(−iHt)`.
pub fn propagator(h: &M, t: f64) -> M {
    expm(&(h * C64::new(0.0, -t)))
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Small deterministic generator for test inputs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn hermitian(&mut self, n: usize) -> M {
        let mut m = M::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(self.uniform(-1.0, 1.0));
            for j in i + 1..n {
                let z = C64::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Single-spin bath of the first preset: `H_B = (ω/2) σz`, `B_z = g σx`.
pub struct SingleSpinBath {
    pub omega: f64,
    pub g: f64,
}

impl SingleSpinBath {
    pub fn h_b(&self) -> M {
        sz() * c(self.omega / 2.0)
    }

    pub fn b_z(&self) -> M {
        sx() * c(self.g)
    }

    /// `e^{−βH}/Z`.
    pub fn thermal(&self, beta: f64) -> M {
        let a = (-beta * self.omega / 2.0).exp();
        let b = (beta * self.omega / 2.0).exp();
        let z = a + b;
        M::from_row_slice(2, 2, &[c(a / z), c(0.0), c(0.0), c(b / z)])
    }

    /// Joint `H_B + S_z ⊗ B_z` on spin ⊗ bath.
    pub fn joint_window_hamiltonian(&self) -> M {
        id(2).kronecker(&self.h_b()) + (sz() * c(0.5)).kronecker(&self.b_z())
    }
}

/// Normalized eigenvector of `n·σ` for eigenvalue `sign`, by diagonalizing.
pub fn spin_ket(n: [f64; 3], sign: f64) -> [C64; 2] {
    let a = sx() * c(n[0]) + sy() * c(n[1]) + sz() * c(n[2]);
    // 2×2 eigenvector: (a01, λ − a00) unless degenerate.
    let (a00, a01) = (a[(0, 0)], a[(0, 1)]);
    let v = if a01.norm() > 1e-12 {
        [a01, c(sign) - a00]
    } else if (a00.re - sign).abs() < 1e-12 {
        [c(1.0), c(0.0)]
    } else {
        [c(0.0), c(1.0)]
    };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

/// Brute-force probabilities of a prepare–couple–measure–reset sequence in
/// the Schrödinger picture: the bath evolves freely between windows and under
/// `H_B + V` inside each window. The mixed bath state is unravelled into its
/// eigenvectors and each branch is propagated as a pure joint state.
pub fn brute_force_probabilities(
    h_b: &M,
    window_h: &M,
    rho_b: &M,
    slots: &[(f64, [f64; 3], [f64; 3])],
    delta_t: f64,
) -> Vec<(Vec<i8>, f64)> {
    let d = h_b.nrows();
    let eig = rho_b.clone().symmetric_eigen();
    let window = propagator(window_h, delta_t);
    let n = slots.len();
    let mut out = Vec::new();
    for mask in 0..(1usize << n) {
        let outcomes: Vec<i8> = (0..n)
            .map(|k| if mask >> k & 1 == 0 { 1 } else { -1 })
            .collect();
        let mut p = 0.0;
        for k in 0..d {
            let w = eig.eigenvalues[k];
            if w.abs() < 1e-15 {
                continue;
            }
            let mut bath =
                DMatrix::<C64>::from_iterator(d, 1, eig.eigenvectors.column(k).iter().cloned());
            let mut now = 0.0;
            for (slot, &(t, r, m)) in slots.iter().enumerate() {
                bath = propagator(h_b, t - now) * bath;
                let r_ket = spin_ket(r, 1.0);
                let mut joint = DMatrix::<C64>::zeros(2 * d, 1);
                for s in 0..2 {
                    for b in 0..d {
                        joint[(s * d + b, 0)] = r_ket[s] * bath[(b, 0)];
                    }
                }
                joint = &window * joint;
                let l_ket = spin_ket(m, outcomes[slot] as f64);
                let mut next = DMatrix::<C64>::zeros(d, 1);
                for s in 0..2 {
                    for b in 0..d {
                        next[(b, 0)] += l_ket[s].conj() * joint[(s * d + b, 0)];
                    }
                }
                bath = next;
                now = t + delta_t;
            }
            p += w * bath.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        out.push((outcomes, p));
    }
    out
}

/// One-sample Kolmogorov–Smirnov test of `samples` against the standard
/// normal. Returns `(D, p)` with the asymptotic distribution and Stephens'
/// finite-sample correction.
pub fn ks_standard_normal(samples: &[f64]) -> (f64, f64) {
    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::standard();
    let mut z = samples.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (d, p.clamp(0.0, 1.0))
}

/// Random Hermitian operator on `space`.
pub fn random_operator(rng: &mut Lcg, space: &HilbertSpace) -> Operator {
    Operator::new(space.clone(), rng.hermitian(space.total_dim())).unwrap()
}

/// `−i[AB, C]` against `2(A⁺B⁻ + A⁻B⁺)C` for `A`, `B` on different factors.
pub fn keystone_residue(seed: u64) -> f64 {
    let sa = HilbertSpace::new([("a", 2)]).unwrap();
    let sb = HilbertSpace::new([("b", 3)]).unwrap();
    let joint = sa.concat(&sb).unwrap();
    let mut rng = Lcg(seed);
    let a = tensor(&random_operator(&mut rng, &sa), &Operator::identity(&sb)).unwrap();
    let b = tensor(&Operator::identity(&sa), &random_operator(&mut rng, &sb)).unwrap();
    let c = random_operator(&mut rng, &joint);
    let ab = a.dot(&b).unwrap();
    let lhs = ab
        .dot(&c)
        .unwrap()
        .sub(&c.dot(&ab).unwrap())
        .unwrap()
        .scale(C64::new(0.0, -1.0));
    let pm = super_apply(
        SuperSign::Plus,
        &a,
        &super_apply(SuperSign::Minus, &b, &c).unwrap(),
    )
    .unwrap();
    let mp = super_apply(
        SuperSign::Minus,
        &a,
        &super_apply(SuperSign::Plus, &b, &c).unwrap(),
    )
    .unwrap();
    let rhs = pm.add(&mp).unwrap().scale(C64::new(2.0, 0.0));
    lhs.max_abs_diff(&rhs).unwrap()
}
