//! Reduced spin dynamics: exact propagation and the cumulant-series
//! prediction built from bath correlations.
//!
//! Under pure dephasing the coherence obeys
//! `ρ01(t) = ρ01(0) e^{−i h_z t} exp(Σ_{N ≤ K} (−i)^N I_N(t))` with
//! `I_N(t) = ∫_{0 ≤ t_1 ≤ … ≤ t_N ≤ t} C̃^{+…+}_{z…z}(t_N, …, t_1)`.
//! The `N = 2` term alone gives Gaussian decay `exp(−c₀ t²/2)` for a static
//! field variance `c₀`.

mod moments;
mod quadrature;

use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

pub use moments::{ModelMoments, MomentSource, MomentTable, TensorMoments};

use crate::bath::{Bath, SystemSpec, SYSTEM_LABEL};
use crate::correlations::{chain_value, FieldCache, IndexEntry};
use crate::error::{Error, Result};
use crate::operator::{
    partial_trace, super_apply_matrix, tensor, Evolver, Matrix, Operator, SuperSign, DEFAULT_TOL,
};
use crate::spin::{pauli, Axis};
use quadrature::{simplex_integrals, TupleLayout};

/// Reduced spin state `Tr_B[U(t) ρ_S ⊗ ρ_B U(t)†]` under the joint
/// Hamiltonian, at each requested time.
pub fn exact_reduced_dynamics(
    rho_s0: &Operator,
    system: &SystemSpec,
    bath: &Bath,
    rho_b: &Operator,
    times: &[f64],
) -> Result<Vec<Operator>> {
    check_spin_state(rho_s0)?;
    let rho0 = tensor(rho_s0, rho_b)?;
    let evolver = Evolver::new(&system.joint_hamiltonian(bath)?, DEFAULT_TOL)?;
    times
        .par_iter()
        .map(|&t| {
            let u = evolver.propagator(t);
            let rho = u.dot(&rho0)?.dot(&u.dagger())?;
            partial_trace(&rho, &[SYSTEM_LABEL])
        })
        .collect()
}

fn check_spin_state(rho: &Operator) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "spin state has dimension {}",
            rho.dim()
        )));
    }
    if !rho.is_density(1e-9) {
        return Err(Error::InvalidConfig(
            "spin state is not a density matrix".into(),
        ));
    }
    Ok(())
}

/// `(⟨σx⟩, ⟨σy⟩)` of a spin state.
pub fn transverse_bloch(rho: &Operator) -> (f64, f64) {
    let c = rho.matrix()[(0, 1)];
    (2.0 * c.re, -2.0 * c.im)
}

/// Quadrature controls for [`cumulant_predicted_dephasing`].
#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Largest allowed estimated quadrature error of any series term.
    pub tolerance: f64,
    /// Upper bound on quadrature grid points.
    pub max_points: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tolerance: 1e-6,
            max_points: 129,
        }
    }
}

/// Transverse Bloch components predicted by the truncated cumulant series.
#[derive(Clone, Debug, Serialize)]
pub struct DephasingPrediction {
    pub truncation: usize,
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    /// `terms[N − 1][j] = I_N(t_j)`.
    pub terms: Vec<Vec<f64>>,
    /// Estimated quadrature error of the series terms.
    pub quadrature_error: f64,
    /// Points on the finest quadrature grid used.
    pub grid_points: usize,
}

impl DephasingPrediction {
    /// Largest predicted transverse Bloch length.
    pub fn max_bloch_length(&self) -> f64 {
        self.sx
            .iter()
            .zip(&self.sy)
            .map(|(x, y)| x.hypot(*y))
            .fold(0.0, f64::max)
    }
}

/// Uniform spacing of a grid starting at zero.
fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::GridMismatch(
            "time grid must start at 0 and hold at least two points".into(),
        ));
    }
    let step = times[1];
    let uniform = step > 0.0
        && times
            .iter()
            .enumerate()
            .all(|(j, &t)| (t - j as f64 * step).abs() <= 1e-9 * step.max(t));
    if !uniform {
        return Err(Error::GridMismatch("time grid must be uniform".into()));
    }
    Ok(step)
}

/// Series terms `I_N` for `N = 1..=order` at every point of a uniform grid.
fn series_terms(source: &dyn MomentSource, grid: &[f64], order: usize) -> Result<Vec<Vec<f64>>> {
    let h = grid[1] - grid[0];
    let cumulants = source.moment_table(grid, order)?.cumulants();
    let layout = TupleLayout::new(grid.len(), order);
    Ok((1..=order)
        .map(|n| simplex_integrals(&layout, n, &cumulants.tables[n - 1], h))
        .collect())
}

fn max_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Predicts `⟨σx⟩(t)`, `⟨σy⟩(t)` from the cumulant series truncated at
/// `truncation`, which must be even. Every order up to the truncation enters,
/// so odd cumulants from a nonzero mean field are kept.
///
/// Sources without a fixed grid are integrated on successively halved grids
/// and the last two levels are combined by Richardson extrapolation, until the
/// estimated error of every term is below the tolerance. Sources on a fixed grid are
/// integrated on it, with the error estimated against the every-other-point
/// subgrid; an estimate above the tolerance is reported as a grid that is too
/// coarse.
pub fn cumulant_predicted_dephasing(
    source: &dyn MomentSource,
    rho_s0: &Operator,
    truncation: usize,
    times: &[f64],
    options: QuadratureOptions,
) -> Result<DephasingPrediction> {
    if truncation < 2 || !truncation.is_multiple_of(2) {
        return Err(Error::OddTruncation(truncation));
    }
    check_spin_state(rho_s0)?;
    let step = uniform_step(times)?;
    let intervals = times.len() - 1;

    let (terms, error, points) = match source.native_grid() {
        Some(grid) => {
            if grid.len() != times.len()
                || grid
                    .iter()
                    .zip(times)
                    .any(|(a, b)| (a - b).abs() > DEFAULT_TOL)
            {
                return Err(Error::GridMismatch(
                    "prediction times must equal the correlation grid".into(),
                ));
            }
            let fine = series_terms(source, &grid, truncation)?;
            let coarse_grid: Vec<f64> = grid.iter().step_by(2).copied().collect();
            let error = if coarse_grid.len() >= 2 {
                let coarse = series_terms(source, &coarse_grid, truncation)?;
                fine.iter()
                    .zip(&coarse)
                    .flat_map(|(f, c)| {
                        c.iter()
                            .enumerate()
                            .map(move |(j, v)| (f[2 * j] - v).abs() / 3.0)
                    })
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            if error > options.tolerance {
                return Err(Error::GridTooCoarse(format!(
                    "estimated quadrature error {error:.3e} exceeds tolerance {:.1e} on {} points",
                    options.tolerance,
                    grid.len()
                )));
            }
            (fine, error, grid.len())
        }
        None => {
            let mut refine = 1usize;
            // Raw and Richardson-extrapolated terms of the previous level.
            let mut previous: Option<(Vec<Vec<f64>>, Option<Vec<Vec<f64>>>)> = None;
            loop {
                let points = intervals * refine + 1;
                if points > options.max_points {
                    return Err(Error::GridTooCoarse(format!(
                        "no convergence to {:.1e} within {} quadrature points",
                        options.tolerance, options.max_points
                    )));
                }
                let h = step / refine as f64;
                let grid: Vec<f64> = (0..points).map(|k| k as f64 * h).collect();
                let current = series_terms(source, &grid, truncation)?;
                // Values at the output times.
                let sampled: Vec<Vec<f64>> = current
                    .iter()
                    .map(|t| (0..=intervals).map(|j| t[j * refine]).collect())
                    .collect();
                let extrapolated = previous.as_ref().map(|(prev, _)| {
                    sampled
                        .iter()
                        .zip(prev)
                        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (4.0 * x - y) / 3.0).collect())
                        .collect::<Vec<Vec<f64>>>()
                });
                if let (Some((prev, prev_extrapolated)), Some(extrapolated)) =
                    (&previous, &extrapolated)
                {
                    // Error of the raw level, and of the extrapolated one when
                    // two extrapolations are available.
                    let raw = max_change(&sampled, prev) / 3.0;
                    let refined = prev_extrapolated
                        .as_ref()
                        .map_or(f64::INFINITY, |p| max_change(extrapolated, p));
                    let error = raw.min(refined);
                    if error < options.tolerance {
                        break (extrapolated.clone(), error, points);
                    }
                }
                previous = Some((sampled, extrapolated));
                refine *= 2;
            }
        }
    };

    let rho01 = rho_s0.matrix()[(0, 1)];
    let precession = source.precession();
    let (mut sx, mut sy) = (
        Vec::with_capacity(times.len()),
        Vec::with_capacity(times.len()),
    );
    for (j, &t) in times.iter().enumerate() {
        let mut exponent = C64::new(0.0, -precession * t);
        let mut factor = C64::new(1.0, 0.0);
        for term in &terms {
            factor *= C64::new(0.0, -1.0);
            exponent += factor * term[j];
        }
        let c = rho01 * exponent.exp();
        sx.push(2.0 * c.re);
        sy.push(-2.0 * c.im);
    }
    Ok(DephasingPrediction {
        truncation,
        times: times.to_vec(),
        sx,
        sy,
        terms,
        quadrature_error: error,
        grid_points: points,
    })
}

/// One row of a comparison between exact and predicted dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub exact_x: f64,
    pub exact_y: f64,
    pub pred_x: f64,
    pub pred_y: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// `max_t |Δr(t)|` over the transverse Bloch components.
    pub max_deviation: f64,
    /// `∫ |Δr(t)| dt` by the trapezoid rule.
    pub integrated_deviation: f64,
}

impl ComparisonReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Compares exact reduced states with a prediction on the same times.
pub fn compare(exact: &[Operator], prediction: &DephasingPrediction) -> Result<ComparisonReport> {
    if exact.len() != prediction.times.len() {
        return Err(Error::GridMismatch(format!(
            "{} exact states for {} predicted times",
            exact.len(),
            prediction.times.len()
        )));
    }
    let rows: Vec<ComparisonRow> = exact
        .iter()
        .enumerate()
        .map(|(j, rho)| {
            let (exact_x, exact_y) = transverse_bloch(rho);
            let (pred_x, pred_y) = (prediction.sx[j], prediction.sy[j]);
            ComparisonRow {
                t: prediction.times[j],
                exact_x,
                exact_y,
                pred_x,
                pred_y,
                deviation: (exact_x - pred_x).hypot(exact_y - pred_y),
            }
        })
        .collect();
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let integrated_deviation = rows
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].deviation + w[1].deviation))
        .sum();
    Ok(ComparisonReport {
        rows,
        max_deviation,
        integrated_deviation,
    })
}

/// Writes `t,exact_x,…` rows to any writer.
pub fn write_comparison<W: Write>(report: &ComparisonReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reduced spin state from the time-ordered expansion in the coupling,
/// kept through second order, for any coupling axes. Needs a vanishing
/// system Hamiltonian. Integrals use the trapezoid rule with `substeps`
/// points per output interval.
pub fn second_order_series(
    rho_s0: &Operator,
    system: &SystemSpec,
    bath: &Bath,
    rho_b: &Operator,
    times: &[f64],
    substeps: usize,
) -> Result<Vec<Operator>> {
    check_spin_state(rho_s0)?;
    if system.hamiltonian != [0.0; 3] {
        return Err(Error::InvalidConfig(
            "series expansion needs a vanishing system Hamiltonian".into(),
        ));
    }
    let step = uniform_step(times)?;
    let substeps = substeps.max(1);
    let points = (times.len() - 1) * substeps + 1;
    let h = step / substeps as f64;
    let grid: Vec<f64> = (0..points).map(|k| k as f64 * h).collect();
    let cache = FieldCache::new(bath, &grid);
    let rho_b = rho_b.matrix();
    let axes: Vec<Axis> = Axis::ALL
        .into_iter()
        .filter(|&a| system.couples(a))
        .collect();
    let spin: Vec<Matrix> = axes
        .iter()
        .map(|&a| pauli(a) * C64::new(0.5, 0.0))
        .collect();
    let layout = TupleLayout::new(points, 2);
    let rho = rho_s0.matrix();

    let mut total = vec![rho.clone(); points];
    let mut add = |integrals: Vec<f64>, image: Matrix| {
        for (acc, w) in total.iter_mut().zip(integrals) {
            *acc += &image * C64::new(w, 0.0);
        }
    };
    // First order: 2 Σ_α ∫ C^+_α(t1) S_α^− ρ.
    for (a, &axis) in axes.iter().enumerate() {
        let values: Vec<f64> = grid
            .iter()
            .map(|&t| chain_value(&[IndexEntry::new(axis, SuperSign::Plus, t)], &cache, rho_b).re)
            .collect();
        let image = super_apply_matrix(SuperSign::Minus, &spin[a], rho) * C64::new(2.0, 0.0);
        add(simplex_integrals(&layout, 1, &values, h), image);
    }
    // Second order: 4 Σ ∫_{t1 ≤ t2} C^{+η}_{βα}(t2, t1) S_β^− S_α^{η̄} ρ.
    for (a, &first) in axes.iter().enumerate() {
        for sign in [SuperSign::Plus, SuperSign::Minus] {
            for (b, &second) in axes.iter().enumerate() {
                let mut values = vec![0.0; layout.count(2)];
                layout.for_each(2, |t| {
                    let entries = [
                        IndexEntry::new(first, sign, grid[t[0]]),
                        IndexEntry::new(second, SuperSign::Plus, grid[t[1]]),
                    ];
                    values[layout.rank(t)] = chain_value(&entries, &cache, rho_b).re;
                });
                let inner = super_apply_matrix(sign.bar(), &spin[a], rho);
                let image =
                    super_apply_matrix(SuperSign::Minus, &spin[b], &inner) * C64::new(4.0, 0.0);
                add(simplex_integrals(&layout, 2, &values, h), image);
            }
        }
    }
    Ok((0..times.len())
        .map(|j| rho_s0.with_matrix(total[j * substeps].clone()))
        .collect())
}
