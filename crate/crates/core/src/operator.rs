//! Dense operators on labeled tensor-product Hilbert spaces.
//!
//! Every operator carries the [`HilbertSpace`] it acts on. Factors are
//! identified by label, never by position, so partial traces cannot silently
//! pick the wrong subsystem. The repo-wide convention is system factor first,
//! bath factors after.
//!
//! Superoperators are applied as matrix sandwiches: [`super_apply`] realizes
//!
//! * `A⁺X = (AX + XA)/2`
//! * `A⁻X = −i(AX − XA)/2`

use std::fmt;
use std::ops::Not;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<C64>;

/// Default absolute tolerance for Hermiticity and trace checks.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        for (i, f) in factors.iter().enumerate() {
            if f.dim < 2 {
                return Err(Error::InvalidSpace(format!(
                    "factor `{}` has dimension {} (< 2)",
                    f.label, f.dim
                )));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::LabelCollision(f.label.clone()));
            }
        }
        Ok(HilbertSpace { factors })
    }

    /// The trivial one-dimensional space.
    pub fn scalar() -> Self {
        HilbertSpace::default()
    }

    pub fn qubit(label: impl Into<String>) -> Self {
        HilbertSpace {
            factors: vec![Factor {
                label: label.into(),
                dim: 2,
            }],
        }
    }

    /// `n` qubits labeled `{prefix}0 … {prefix}{n-1}`.
    pub fn qubits(prefix: &str, n: usize) -> Self {
        HilbertSpace {
            factors: (0..n)
                .map(|i| Factor {
                    label: format!("{prefix}{i}"),
                    dim: 2,
                })
                .collect(),
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Concatenation `self ⊗ other`; labels must be disjoint.
    pub fn concat(&self, other: &HilbertSpace) -> Result<HilbertSpace> {
        if let Some(f) = other
            .factors
            .iter()
            .find(|f| self.position(&f.label).is_some())
        {
            return Err(Error::LabelCollision(f.label.clone()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(HilbertSpace { factors })
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "C");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}[{}]", x.label, x.dim))
            .collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// Dense complex square matrix acting on a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    data: Matrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, data: Matrix) -> Result<Self> {
        let d = space.total_dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on space {} of dimension {}",
                data.nrows(),
                data.ncols(),
                space,
                d
            )));
        }
        Ok(Operator { space, data })
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Operator {
            space: space.clone(),
            data: Matrix::identity(d, d),
        }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Operator {
            space: space.clone(),
            data: Matrix::zeros(d, d),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Same space, new entries. Panics if the shape differs.
    pub(crate) fn with_matrix(&self, data: Matrix) -> Operator {
        assert_eq!(data.shape(), self.data.shape());
        Operator {
            space: self.space.clone(),
            data,
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn dagger(&self) -> Operator {
        self.with_matrix(self.data.adjoint())
    }

    fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch(format!(
                "operators on {} and {}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    pub fn dot(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(self.with_matrix(&self.data * &other.data))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(self.with_matrix(&self.data + &other.data))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(self.with_matrix(&self.data - &other.data))
    }

    pub fn scale(&self, c: C64) -> Operator {
        self.with_matrix(&self.data * c)
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermitian_residue(&self) -> f64 {
        max_abs(&(&self.data - self.data.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residue() <= tol
    }

    /// Largest entry of `|A − B|`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(max_abs(&(&self.data - &other.data)))
    }

    pub fn hermitian_eigen(&self, tol: f64) -> Result<HermitianEigen> {
        HermitianEigen::new(&self.data, tol)
    }

    /// Eigenvalues in ascending order; errors if not Hermitian within `tol`.
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        Ok(self.hermitian_eigen(tol)?.values.iter().copied().collect())
    }

    /// Trace norm `‖A‖₁` of a Hermitian operator.
    pub fn trace_norm(&self, tol: f64) -> Result<f64> {
        Ok(self
            .hermitian_eigen(tol)?
            .values
            .iter()
            .map(|e| e.abs())
            .sum())
    }

    /// Checks Hermiticity, positivity (eigenvalues ≥ −tol) and unit trace.
    pub fn is_density(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) || (self.trace() - C64::new(1.0, 0.0)).norm() > tol {
            return false;
        }
        match self.eigenvalues(tol) {
            Ok(ev) => ev.iter().all(|&e| e >= -tol),
            Err(_) => false,
        }
    }
}

pub(crate) fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Sign of a bath or system superoperator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SuperSign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl SuperSign {
    pub fn bar(self) -> SuperSign {
        !self
    }

    pub fn as_char(self) -> char {
        match self {
            SuperSign::Plus => '+',
            SuperSign::Minus => '-',
        }
    }

    pub fn from_char(c: char) -> Option<SuperSign> {
        match c {
            '+' => Some(SuperSign::Plus),
            '-' => Some(SuperSign::Minus),
            _ => None,
        }
    }
}

impl Not for SuperSign {
    type Output = SuperSign;

    fn not(self) -> SuperSign {
        match self {
            SuperSign::Plus => SuperSign::Minus,
            SuperSign::Minus => SuperSign::Plus,
        }
    }
}

impl fmt::Display for SuperSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Kronecker product on the concatenated space.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    let space = a.space.concat(&b.space)?;
    Ok(Operator {
        space,
        data: a.data.kronecker(&b.data),
    })
}

/// Traces out every factor whose label is not in `keep`. The result keeps the
/// original relative order of the surviving factors.
pub fn partial_trace(a: &Operator, keep: &[&str]) -> Result<Operator> {
    for label in keep {
        if a.space.position(label).is_none() {
            return Err(Error::UnknownLabel(label.to_string()));
        }
    }
    let factors = a.space.factors();
    let kept: Vec<bool> = factors
        .iter()
        .map(|f| keep.contains(&f.label.as_str()))
        .collect();
    let kept_space = HilbertSpace {
        factors: factors
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| k)
            .map(|(f, _)| f.clone())
            .collect(),
    };

    // Split every full index into (kept index, traced index).
    let full = a.space.total_dim();
    let mut kept_of = vec![0usize; full];
    let mut traced_of = vec![0usize; full];
    for i in 0..full {
        let mut rem = i;
        let (mut ki, mut ti) = (0usize, 0usize);
        let (mut kstride, mut tstride) = (1usize, 1usize);
        for (f, &k) in factors.iter().zip(&kept).rev() {
            let digit = rem % f.dim;
            rem /= f.dim;
            if k {
                ki += digit * kstride;
                kstride *= f.dim;
            } else {
                ti += digit * tstride;
                tstride *= f.dim;
            }
        }
        kept_of[i] = ki;
        traced_of[i] = ti;
    }

    let dk = kept_space.total_dim();
    let mut out = Matrix::zeros(dk, dk);
    for i in 0..full {
        for j in 0..full {
            if traced_of[i] == traced_of[j] {
                out[(kept_of[i], kept_of[j])] += a.data[(i, j)];
            }
        }
    }
    Ok(Operator {
        space: kept_space,
        data: out,
    })
}

/// Eigendecomposition `H = V diag(E) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: Matrix,
}

impl HermitianEigen {
    pub fn new(h: &Matrix, tol: f64) -> Result<Self> {
        let residue = max_abs(&(h - h.adjoint()));
        if residue > tol {
            return Err(Error::NotHermitian { residue, tol });
        }
        // Symmetrize so round-off in the input cannot leak into the spectrum.
        let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
        let vectors = Matrix::from_columns(
            &order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        Ok(HermitianEigen { values, vectors })
    }

    /// `V diag(f(E)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Matrix {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.values.iter().enumerate() {
            let c = f(e);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= c);
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{−iHt}`.
    pub fn propagator(&self, t: f64) -> Matrix {
        self.map(|e| C64::from_polar(1.0, -e * t))
    }
}

/// Heisenberg-picture evolution under a fixed Hamiltonian, with the
/// eigendecomposition computed once.
#[derive(Clone, Debug)]
pub struct Evolver {
    space: HilbertSpace,
    eigen: HermitianEigen,
}

impl Evolver {
    pub fn new(h: &Operator, tol: f64) -> Result<Self> {
        Ok(Evolver {
            space: h.space.clone(),
            eigen: h.hermitian_eigen(tol)?,
        })
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// `e^{−iHt}` as an operator.
    pub fn propagator(&self, t: f64) -> Operator {
        Operator {
            space: self.space.clone(),
            data: self.eigen.propagator(t),
        }
    }

    /// `e^{iHt} A e^{−iHt}`.
    pub fn evolve(&self, a: &Operator, t: f64) -> Result<Operator> {
        if a.space != self.space {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} evolved under Hamiltonian on {}",
                a.space, self.space
            )));
        }
        Ok(a.with_matrix(self.heisenberg(&a.data, t)))
    }

    pub(crate) fn heisenberg(&self, a: &Matrix, t: f64) -> Matrix {
        if t == 0.0 {
            return a.clone();
        }
        // In the eigenbasis: (V†AV)_{jk} e^{i(E_j − E_k)t}.
        let v = &self.eigen.vectors;
        let mut inner = v.adjoint() * a * v;
        let e = &self.eigen.values;
        for j in 0..inner.nrows() {
            for k in 0..inner.ncols() {
                inner[(j, k)] *= C64::from_polar(1.0, (e[j] - e[k]) * t);
            }
        }
        v * inner * v.adjoint()
    }
}

/// Interaction-picture operator `e^{iHt} A e^{−iHt}`.
pub fn evolve(a: &Operator, h: &Operator, t: f64) -> Result<Operator> {
    Evolver::new(h, DEFAULT_TOL)?.evolve(a, t)
}

/// `A^± X`: anticommutator (`+`) or `−i/2` commutator (`−`).
pub fn super_apply(sign: SuperSign, a: &Operator, x: &Operator) -> Result<Operator> {
    a.check_same_space(x)?;
    Ok(a.with_matrix(super_apply_matrix(sign, &a.data, &x.data)))
}

pub(crate) fn super_apply_matrix(sign: SuperSign, a: &Matrix, x: &Matrix) -> Matrix {
    let ax = a * x;
    let xa = x * a;
    match sign {
        SuperSign::Plus => (ax + xa) * C64::new(0.5, 0.0),
        SuperSign::Minus => (ax - xa) * C64::new(0.0, -0.5),
    }
}
