use num_complex::Complex64 as C64;

use crate::operator::{HermitianEigen, Matrix};

#[derive(Clone, Debug)]
enum Term {
    Left(Matrix),
    Right(Matrix),
    Sandwich(Matrix, Matrix),
}

/// Linear map on bath operators written as `X ↦ Σ_k L_k X R_k`.
#[derive(Clone, Debug)]
pub struct BathMap {
    dim: usize,
    terms: Vec<Term>,
}

impl BathMap {
    /// `X ↦ K X K†`.
    pub fn conjugation(k: Matrix) -> Self {
        let dim = k.nrows();
        let kd = k.adjoint();
        BathMap {
            dim,
            terms: vec![Term::Sandwich(k, kd)],
        }
    }

    /// `X ↦ L X + X R`.
    pub fn left_right(left: Matrix, right: Matrix) -> Self {
        BathMap {
            dim: left.nrows(),
            terms: vec![Term::Left(left), Term::Right(right)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for t in &self.terms {
            match t {
                Term::Left(l) => out += l * x,
                Term::Right(r) => out += x * r,
                Term::Sandwich(l, r) => out += l * x * r,
            }
        }
        out
    }

    /// `Tr[Φ(X)]` without forming `Φ(X)` for one-sided terms.
    pub fn trace_of(&self, x: &Matrix) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for t in &self.terms {
            acc += match t {
                Term::Left(l) => trace_product(l, x),
                Term::Right(r) => trace_product(x, r),
                Term::Sandwich(l, r) => trace_product(&(r * l), x),
            };
        }
        acc
    }

    /// Sum of two maps; one-sided terms are merged.
    pub fn plus(&self, other: &BathMap) -> BathMap {
        self.combine(other, 1.0)
    }

    /// Difference of two maps.
    pub fn minus(&self, other: &BathMap) -> BathMap {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &BathMap, sign: f64) -> BathMap {
        let c = C64::new(sign, 0.0);
        let mut left: Option<Matrix> = None;
        let mut right: Option<Matrix> = None;
        let mut sandwiches = Vec::new();
        let mut add = |t: &Term, c: C64| match t {
            Term::Left(l) => {
                let l = l * c;
                left = Some(left.take().map_or(l.clone(), |acc| acc + l));
            }
            Term::Right(r) => {
                let r = r * c;
                right = Some(right.take().map_or(r.clone(), |acc| acc + r));
            }
            Term::Sandwich(l, r) => sandwiches.push(Term::Sandwich(l * c, r.clone())),
        };
        for t in &self.terms {
            add(t, C64::new(1.0, 0.0));
        }
        for t in &other.terms {
            add(t, c);
        }
        let mut terms = Vec::new();
        terms.extend(left.map(Term::Left));
        terms.extend(right.map(Term::Right));
        terms.extend(sandwiches);
        BathMap {
            dim: self.dim,
            terms,
        }
    }

    /// `d² × d²` matrix acting on column-major `vec(X)`.
    pub fn superoperator(&self) -> Matrix {
        let d = self.dim;
        let mut s = Matrix::zeros(d * d, d * d);
        for col in 0..d * d {
            let mut e = Matrix::zeros(d, d);
            e[(col % d, col / d)] = C64::new(1.0, 0.0);
            let img = self.apply(&e);
            for row in 0..d * d {
                s[(row, col)] = img[(row % d, row / d)];
            }
        }
        s
    }

    /// Choi matrix `Σ_ij E_ij ⊗ Φ(E_ij)`.
    pub fn choi(&self) -> Matrix {
        let d = self.dim;
        let mut c = Matrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = Matrix::zeros(d, d);
                e[(i, j)] = C64::new(1.0, 0.0);
                let img = self.apply(&e);
                for k in 0..d {
                    for l in 0..d {
                        c[(i * d + k, j * d + l)] = img[(k, l)];
                    }
                }
            }
        }
        c
    }

    /// Smallest Choi eigenvalue and the largest deviation of
    /// `Tr Φ(E_ij)` from `δ_ij`.
    pub fn cptp_residues(&self) -> (f64, f64) {
        let choi = self.choi();
        let min_eig = HermitianEigen::new(&choi, 1e-8)
            .map(|e| e.values.min())
            .unwrap_or(f64::NEG_INFINITY);
        let d = self.dim;
        let mut tp = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut e = Matrix::zeros(d, d);
                e[(i, j)] = C64::new(1.0, 0.0);
                let expected = if i == j { 1.0 } else { 0.0 };
                tp = tp.max((self.trace_of(&e) - expected).norm());
            }
        }
        (min_eig, tp)
    }
}

fn trace_product(a: &Matrix, b: &Matrix) -> C64 {
    // Tr(AB) = Σ_ij A_ij B_ji
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}
