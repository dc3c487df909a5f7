//! Spin-1/2 helpers: Cartesian axes, Pauli matrices and Bloch-vector states.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartesian axis of a spin-1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Self::ALL.get(i).copied()
    }

    pub fn unit(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl TryFrom<char> for Axis {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_lowercase() {
            'x' => Ok(Axis::X),
            'y' => Ok(Axis::Y),
            'z' => Ok(Axis::Z),
            _ => Err(Error::InvalidConfig(format!("unknown axis `{c}`"))),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Axis::try_from(c),
            _ => Err(Error::InvalidConfig(format!("unknown axis `{s}`"))),
        }
    }
}

/// Pauli matrix along `axis`.
pub fn pauli(axis: Axis) -> DMatrix<C64> {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        Axis::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
    }
}

/// `v·σ` for a real 3-vector.
pub fn pauli_dot(v: [f64; 3]) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    for axis in Axis::ALL {
        let c = v[axis.index()];
        if c != 0.0 {
            m += pauli(axis) * C64::new(c, 0.0);
        }
    }
    m
}

/// Density matrix `(1 + r·σ)/2`.
pub fn bloch_density(r: [f64; 3]) -> DMatrix<C64> {
    (DMatrix::identity(2, 2) + pauli_dot(r)) * C64::new(0.5, 0.0)
}

/// Normalized eigenvector of `n·σ` with eigenvalue `sign` (±1). `n` must be a unit vector.
pub fn bloch_ket(n: [f64; 3], sign: f64) -> [C64; 2] {
    // Spherical angles of the direction sign·n.
    let (x, y, z) = (sign * n[0], sign * n[1], sign * n[2]);
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    [
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
