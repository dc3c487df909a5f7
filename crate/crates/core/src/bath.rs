//! Spin-bath models: bath Hamiltonian, noise fields `B_α`, thermal states and
//! the qubit–bath coupling `V = Σ_α S_α ⊗ B_α` with `S_α = σ_α/2`.
//!
//! Units: ħ = k_B = 1.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{tensor, Evolver, HilbertSpace, Matrix, Operator, DEFAULT_TOL};
use crate::spin::{pauli, Axis};

/// Label of the central-spin factor. It always comes first in joint spaces.
pub const SYSTEM_LABEL: &str = "s";
/// Prefix of bath-spin labels (`b0`, `b1`, …).
pub const BATH_PREFIX: &str = "b";

/// `coeff · P_0 ⊗ P_1 ⊗ …` with one of `I X Y Z` per bath spin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub paulis: String,
}

impl PauliTerm {
    pub fn new(coeff: f64, paulis: impl Into<String>) -> Self {
        PauliTerm {
            coeff,
            paulis: paulis.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub num_spins: usize,
    #[serde(default)]
    pub hamiltonian: Vec<PauliTerm>,
    /// Noise-field terms per axis; absent axes give `B_α = 0`.
    #[serde(default)]
    pub fields: BTreeMap<Axis, Vec<PauliTerm>>,
}

/// Central-spin side of the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    /// Axes `α` for which `S_α ⊗ B_α` enters the coupling.
    pub coupling_axes: Vec<Axis>,
    /// Static `H_S = Σ_α h_α S_α`. Only used by the exact reduced dynamics;
    /// the measurement windows ignore it.
    #[serde(default)]
    pub hamiltonian: [f64; 3],
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec {
            coupling_axes: Axis::ALL.to_vec(),
            hamiltonian: [0.0; 3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    /// Inverse temperature; 0 means infinite temperature.
    pub beta: f64,
}

impl ThermalParams {
    pub fn infinite_temperature() -> Self {
        ThermalParams { beta: 0.0 }
    }
}

fn pauli_string(spec: &str, n: usize) -> Result<Matrix> {
    let chars: Vec<char> = spec.chars().collect();
    if chars.len() != n {
        return Err(Error::MalformedPauli(
            spec.to_string(),
            format!("expected {n} characters, found {}", chars.len()),
        ));
    }
    let mut m = Matrix::identity(1, 1);
    for c in chars {
        let factor = match c.to_ascii_uppercase() {
            'I' => Matrix::identity(2, 2),
            'X' => pauli(Axis::X),
            'Y' => pauli(Axis::Y),
            'Z' => pauli(Axis::Z),
            other => {
                return Err(Error::MalformedPauli(
                    spec.to_string(),
                    format!("unknown symbol `{other}`"),
                ))
            }
        };
        m = m.kronecker(&factor);
    }
    Ok(m)
}

fn sum_terms(terms: &[PauliTerm], n: usize) -> Result<Matrix> {
    let d = 1usize << n;
    let mut m = Matrix::zeros(d, d);
    for term in terms {
        if !term.coeff.is_finite() {
            return Err(Error::MalformedPauli(
                term.paulis.clone(),
                "non-finite coefficient".into(),
            ));
        }
        m += pauli_string(&term.paulis, n)? * C64::new(term.coeff, 0.0);
    }
    Ok(m)
}

/// Builds `H_B` and the three noise fields (zero where no terms are given).
pub fn build_bath(spec: &BathSpec) -> Result<(Operator, BTreeMap<Axis, Operator>)> {
    if spec.num_spins == 0 {
        return Err(Error::InvalidSpace("bath needs at least one spin".into()));
    }
    let space = HilbertSpace::qubits(BATH_PREFIX, spec.num_spins);
    let h = Operator::new(space.clone(), sum_terms(&spec.hamiltonian, spec.num_spins)?)?;
    let mut fields = BTreeMap::new();
    for axis in Axis::ALL {
        let terms = spec.fields.get(&axis).map(Vec::as_slice).unwrap_or(&[]);
        fields.insert(
            axis,
            Operator::new(space.clone(), sum_terms(terms, spec.num_spins)?)?,
        );
    }
    Ok((h, fields))
}

/// `e^{−βH}/Z`.
pub fn thermal_state(h: &Operator, params: ThermalParams) -> Result<Operator> {
    if !(params.beta >= 0.0 && params.beta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "inverse temperature must be finite and >= 0, got {}",
            params.beta
        )));
    }
    let eig = h.hermitian_eigen(DEFAULT_TOL)?;
    let e_min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    let z: f64 = eig
        .values
        .iter()
        .map(|&e| (-params.beta * (e - e_min)).exp())
        .sum();
    let rho = eig.map(|e| C64::new((-params.beta * (e - e_min)).exp() / z, 0.0));
    // Clean the anti-Hermitian round-off so the state is Hermitian to machine precision.
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    Operator::new(h.space().clone(), rho)
}

/// Interaction-picture noise field `B̂_α(t) = e^{iH_B t} B_α e^{−iH_B t}`.
pub fn bath_field_at(b: &Operator, h: &Operator, t: f64) -> Result<Operator> {
    if !b.is_hermitian(DEFAULT_TOL) {
        return Err(Error::NotHermitian {
            residue: b.hermitian_residue(),
            tol: DEFAULT_TOL,
        });
    }
    crate::operator::evolve(b, h, t)
}

/// A built bath with its Hamiltonian eigendecomposition cached.
#[derive(Clone, Debug)]
pub struct Bath {
    hamiltonian: Operator,
    fields: [Operator; 3],
    evolver: Evolver,
}

impl Bath {
    pub fn build(spec: &BathSpec) -> Result<Bath> {
        let (h, mut fields) = build_bath(spec)?;
        Bath::from_operators(
            h,
            [
                fields.remove(&Axis::X).unwrap(),
                fields.remove(&Axis::Y).unwrap(),
                fields.remove(&Axis::Z).unwrap(),
            ],
        )
    }

    pub fn from_operators(hamiltonian: Operator, fields: [Operator; 3]) -> Result<Bath> {
        for f in &fields {
            if f.space() != hamiltonian.space() {
                return Err(Error::DimensionMismatch(
                    "noise field and bath Hamiltonian live on different spaces".into(),
                ));
            }
            if !f.is_hermitian(DEFAULT_TOL) {
                return Err(Error::NotHermitian {
                    residue: f.hermitian_residue(),
                    tol: DEFAULT_TOL,
                });
            }
        }
        let evolver = Evolver::new(&hamiltonian, DEFAULT_TOL)?;
        Ok(Bath {
            hamiltonian,
            fields,
            evolver,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn field(&self, axis: Axis) -> &Operator {
        &self.fields[axis.index()]
    }

    pub fn evolver(&self) -> &Evolver {
        &self.evolver
    }

    /// `B̂_α(t)`.
    pub fn field_at(&self, axis: Axis, t: f64) -> Operator {
        let f = self.field(axis);
        f.with_matrix(self.evolver.heisenberg(f.matrix(), t))
    }

    pub(crate) fn field_matrix_at(&self, axis: Axis, t: f64) -> Matrix {
        self.evolver.heisenberg(self.field(axis).matrix(), t)
    }

    pub fn thermal_state(&self, params: ThermalParams) -> Result<Operator> {
        thermal_state(&self.hamiltonian, params)
    }

    /// True when `B_α` is exactly zero.
    pub fn field_is_zero(&self, axis: Axis) -> bool {
        self.field(axis)
            .matrix()
            .iter()
            .all(|z| *z == C64::new(0.0, 0.0))
    }
}

impl SystemSpec {
    pub fn pure_dephasing() -> Self {
        SystemSpec {
            coupling_axes: vec![Axis::Z],
            hamiltonian: [0.0; 3],
        }
    }

    pub fn couples(&self, axis: Axis) -> bool {
        self.coupling_axes.contains(&axis)
    }

    /// Noise fields seen by the central spin: `B_α` on coupled axes, zero otherwise.
    pub fn effective_fields(&self, bath: &Bath) -> [Matrix; 3] {
        Axis::ALL.map(|a| {
            if self.couples(a) {
                bath.field(a).matrix().clone()
            } else {
                Matrix::zeros(bath.dim(), bath.dim())
            }
        })
    }

    /// Whether only `S_z ⊗ B_z` couples the spin to the bath.
    pub fn is_pure_dephasing(&self, bath: &Bath) -> bool {
        [Axis::X, Axis::Y]
            .iter()
            .all(|&a| !self.couples(a) || bath.field_is_zero(a))
    }

    pub fn system_space() -> HilbertSpace {
        HilbertSpace::qubit(SYSTEM_LABEL)
    }

    pub fn hamiltonian_operator(&self) -> Operator {
        let m = crate::spin::pauli_dot(self.hamiltonian) * C64::new(0.5, 0.0);
        Operator::new(Self::system_space(), m).expect("2x2 system operator")
    }

    /// `V = Σ_α S_α ⊗ B_α` on the joint space (system first).
    pub fn coupling(&self, bath: &Bath) -> Result<Operator> {
        let joint = Self::system_space().concat(bath.space())?;
        let mut v = Operator::zeros(&joint);
        for axis in Axis::ALL {
            if !self.couples(axis) {
                continue;
            }
            let s = Operator::new(Self::system_space(), pauli(axis) * C64::new(0.5, 0.0))?;
            v = v.add(&tensor(&s, bath.field(axis))?)?;
        }
        Ok(v)
    }

    /// `H_S ⊗ 1 + 1 ⊗ H_B + V`.
    pub fn joint_hamiltonian(&self, bath: &Bath) -> Result<Operator> {
        let i_s = Operator::identity(&Self::system_space());
        let i_b = Operator::identity(bath.space());
        tensor(&self.hamiltonian_operator(), &i_b)?
            .add(&tensor(&i_s, bath.hamiltonian())?)?
            .add(&self.coupling(bath)?)
    }
}

/// Parameters of the shipped model presets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    /// Bath Larmor frequency ω.
    pub omega: f64,
    /// Coupling strength g.
    pub g: f64,
    /// Ising coupling J (P3 only).
    #[serde(default = "default_ising")]
    pub j: f64,
}

fn default_ising() -> f64 {
    0.4
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            omega: 1.0,
            g: 1.0,
            j: default_ising(),
        }
    }
}

/// Named test beds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// One bath spin, `H_B = (ω/2)σz`, `B_z = gσx`.
    P1,
    /// As P1 with `B_x = gσz`, `B_y = gσy`, `B_z = gσx`.
    P2,
    /// Three bath spins with pairwise Ising couplings, `B_z = Σ g_i σx_i`.
    P3,
}

/// Site frequencies and couplings of P3 relative to ω and g.
pub const P3_OMEGA_SCALE: [f64; 3] = [1.0, 1.3, 0.7];
pub const P3_G_SCALE: [f64; 3] = [1.0, 0.8, 0.6];

impl Preset {
    pub fn spec(self, p: PresetParams) -> BathSpec {
        let mut fields = BTreeMap::new();
        match self {
            Preset::P1 => {
                fields.insert(Axis::Z, vec![PauliTerm::new(p.g, "X")]);
                BathSpec {
                    num_spins: 1,
                    hamiltonian: vec![PauliTerm::new(p.omega / 2.0, "Z")],
                    fields,
                }
            }
            Preset::P2 => {
                fields.insert(Axis::X, vec![PauliTerm::new(p.g, "Z")]);
                fields.insert(Axis::Y, vec![PauliTerm::new(p.g, "Y")]);
                fields.insert(Axis::Z, vec![PauliTerm::new(p.g, "X")]);
                BathSpec {
                    num_spins: 1,
                    hamiltonian: vec![PauliTerm::new(p.omega / 2.0, "Z")],
                    fields,
                }
            }
            Preset::P3 => {
                let site = |i: usize, c: char| -> String {
                    (0..3).map(|k| if k == i { c } else { 'I' }).collect()
                };
                let mut hamiltonian: Vec<PauliTerm> = (0..3)
                    .map(|i| PauliTerm::new(p.omega * P3_OMEGA_SCALE[i] / 2.0, site(i, 'Z')))
                    .collect();
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    let s: String = (0..3)
                        .map(|k| if k == a || k == b { 'Z' } else { 'I' })
                        .collect();
                    hamiltonian.push(PauliTerm::new(p.j, s));
                }
                fields.insert(
                    Axis::Z,
                    (0..3)
                        .map(|i| PauliTerm::new(p.g * P3_G_SCALE[i], site(i, 'X')))
                        .collect(),
                );
                BathSpec {
                    num_spins: 3,
                    hamiltonian,
                    fields,
                }
            }
        }
    }

    /// The natural central-spin coupling for the preset.
    pub fn system(self) -> SystemSpec {
        match self {
            Preset::P1 | Preset::P3 => SystemSpec::pure_dephasing(),
            Preset::P2 => SystemSpec::default(),
        }
    }

    pub fn build(self, p: PresetParams) -> Bath {
        Bath::build(&self.spec(p)).expect("presets are well formed")
    }
}
