//! Sources of the all-plus `z` moments `C^{+…+}_{z…z}` on a uniform grid.

use rayon::prelude::*;

use super::quadrature::TupleLayout;
use crate::bath::{Bath, SystemSpec};
use crate::correlations::{set_partitions, CorrelationIndex, CorrelationTensor};
use crate::error::{Error, Result};
use crate::operator::{super_apply_matrix, Matrix, Operator, SuperSign, DEFAULT_TOL};
use crate::spin::Axis;

/// Moments tabulated at every non-decreasing index tuple of a grid, one
/// table per order.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub(crate) layout: TupleLayout,
    /// `tables[n − 1]` holds order `n`, indexed by tuple rank.
    pub(crate) tables: Vec<Vec<f64>>,
}

impl MomentTable {
    pub(crate) fn zeros(points: usize, max_order: usize) -> Self {
        let layout = TupleLayout::new(points, max_order);
        let tables = (1..=max_order)
            .map(|n| vec![0.0; layout.count(n)])
            .collect();
        MomentTable { layout, tables }
    }

    pub fn points(&self) -> usize {
        self.layout.points
    }

    pub fn max_order(&self) -> usize {
        self.tables.len()
    }

    /// Moment at a non-decreasing tuple of grid indices.
    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.tables[tuple.len() - 1][self.layout.rank(tuple)]
    }

    /// Joint cumulants at every tuple, from the moments of its sub-tuples.
    pub fn cumulants(&self) -> MomentTable {
        let mut out = MomentTable::zeros(self.points(), self.max_order());
        for n in 1..=self.max_order() {
            let partitions: Vec<_> = set_partitions(n)
                .into_iter()
                .filter(|p| p.len() >= 2)
                .collect();
            let mut values = vec![0.0; self.layout.count(n)];
            let mut sub = Vec::with_capacity(n);
            self.layout.for_each(n, |t| {
                let moment = self.get(t);
                let value = if partitions.is_empty() {
                    moment
                } else {
                    let mut acc = moment;
                    for p in &partitions {
                        let mut product = 1.0;
                        for block in p {
                            sub.clear();
                            sub.extend(block.iter().map(|&k| t[k]));
                            product *= out.get(&sub);
                        }
                        acc -= product;
                    }
                    acc
                };
                values[self.layout.rank(t)] = value;
            });
            out.tables[n - 1] = values;
        }
        out
    }
}

/// Something that can tabulate `C^{+…+}_{z…z}` on a uniform grid.
pub trait MomentSource: Sync {
    /// Fixed grid the source is defined on, or `None` when any grid works.
    fn native_grid(&self) -> Option<Vec<f64>>;

    /// Moments at every non-decreasing index tuple of `grid`, orders
    /// `1..=max_order`.
    fn moment_table(&self, grid: &[f64], max_order: usize) -> Result<MomentTable>;

    /// Precession rate of the coherence from a system field along `z`.
    fn precession(&self) -> f64 {
        0.0
    }
}

/// Exact moments of a model bath.
pub struct ModelMoments<'a> {
    bath: &'a Bath,
    field: Matrix,
    rho: Matrix,
    precession: f64,
}

impl<'a> ModelMoments<'a> {
    /// Requires pure dephasing and no transverse system field.
    pub fn new(system: &SystemSpec, bath: &'a Bath, rho_b: &Operator) -> Result<Self> {
        if !system.is_pure_dephasing(bath) {
            return Err(Error::NotPureDephasing(
                "transverse noise fields couple to the spin".into(),
            ));
        }
        if system.hamiltonian[0] != 0.0 || system.hamiltonian[1] != 0.0 {
            return Err(Error::NotPureDephasing(
                "system Hamiltonian has transverse components".into(),
            ));
        }
        if rho_b.space() != bath.space() {
            return Err(Error::DimensionMismatch(
                "bath state and bath Hamiltonian live on different spaces".into(),
            ));
        }
        let [_, _, field] = system.effective_fields(bath);
        Ok(ModelMoments {
            bath,
            field,
            rho: rho_b.matrix().clone(),
            precession: system.hamiltonian[2],
        })
    }
}

impl MomentSource for ModelMoments<'_> {
    fn native_grid(&self) -> Option<Vec<f64>> {
        None
    }

    fn moment_table(&self, grid: &[f64], max_order: usize) -> Result<MomentTable> {
        let evolver = self.bath.evolver();
        let fields: Vec<Matrix> = grid
            .par_iter()
            .map(|&t| evolver.heisenberg(&self.field, t))
            .collect();
        let mut table = MomentTable::zeros(grid.len(), max_order);
        let layout = table.layout.clone();

        // Depth-first over tuples, sharing the partially applied chain.
        fn walk(
            fields: &[Matrix],
            layout: &TupleLayout,
            max_order: usize,
            tuple: &mut Vec<usize>,
            state: &Matrix,
            out: &mut Vec<(usize, usize, f64)>,
        ) {
            let start = *tuple.last().expect("non-empty");
            for i in start..fields.len() {
                let next = super_apply_matrix(SuperSign::Plus, &fields[i], state);
                tuple.push(i);
                out.push((tuple.len(), layout.rank(tuple), next.trace().re));
                if tuple.len() < max_order {
                    walk(fields, layout, max_order, tuple, &next, out);
                }
                tuple.pop();
            }
        }

        let entries: Vec<(usize, usize, f64)> = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let first = super_apply_matrix(SuperSign::Plus, &fields[i], &self.rho);
                let mut tuple = vec![i];
                let mut out = vec![(1, layout.rank(&tuple), first.trace().re)];
                if max_order > 1 {
                    walk(&fields, &layout, max_order, &mut tuple, &first, &mut out);
                }
                out
            })
            .collect();
        for (n, rank, v) in entries {
            table.tables[n - 1][rank] = v;
        }
        Ok(table)
    }

    fn precession(&self) -> f64 {
        self.precession
    }
}

/// Moments read from a correlation tensor on its own uniform grid.
///
/// The tensor holds strictly time-ordered entries only; values at tuples
/// with coinciding times are extrapolated linearly from two shifted,
/// strictly increasing tuples.
pub struct TensorMoments<'a> {
    tensor: &'a CorrelationTensor,
    grid: Vec<f64>,
}

impl<'a> TensorMoments<'a> {
    pub fn new(tensor: &'a CorrelationTensor) -> Self {
        let mut grid: Vec<f64> = tensor
            .iter()
            .filter(|(idx, _)| is_all_plus_z(idx))
            .flat_map(|(idx, _)| idx.times())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        TensorMoments { tensor, grid }
    }

    fn lookup(&self, tuple: &[usize]) -> Result<f64> {
        let n = tuple.len();
        let times: Vec<f64> = tuple.iter().map(|&i| self.grid[i]).collect();
        let idx =
            CorrelationIndex::from_parts(&vec![Axis::Z; n], &vec![SuperSign::Plus; n], &times)?;
        self.tensor.value(&idx)
    }

    fn tied_value(&self, tuple: &[usize]) -> Result<f64> {
        let n = tuple.len();
        let p = self.grid.len() as i64;
        // Shift pattern i_k + (k − anchor)·m for m = 1, 2.
        for anchor in 0..n {
            let shifted = |m: i64| -> Option<Vec<usize>> {
                tuple
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| {
                        let j = i as i64 + (k as i64 - anchor as i64) * m;
                        (0..p).contains(&j).then_some(j as usize)
                    })
                    .collect()
            };
            if let (Some(a), Some(b)) = (shifted(1), shifted(2)) {
                return Ok(2.0 * self.lookup(&a)? - self.lookup(&b)?);
            }
        }
        Err(Error::GridTooCoarse(format!(
            "cannot extrapolate order-{n} moment at coinciding times on {} grid points",
            self.grid.len()
        )))
    }
}

fn is_all_plus_z(idx: &CorrelationIndex) -> bool {
    idx.entries()
        .iter()
        .all(|e| e.axis == Axis::Z && e.sign == SuperSign::Plus)
}

impl MomentSource for TensorMoments<'_> {
    fn native_grid(&self) -> Option<Vec<f64>> {
        Some(self.grid.clone())
    }

    /// Any subset of the tensor's own grid is accepted.
    fn moment_table(&self, grid: &[f64], max_order: usize) -> Result<MomentTable> {
        let positions = grid
            .iter()
            .map(|&t| {
                self.grid
                    .iter()
                    .position(|&g| (g - t).abs() <= DEFAULT_TOL)
                    .ok_or_else(|| {
                        Error::GridMismatch(format!("time {t} is not on the tensor's grid"))
                    })
            })
            .collect::<Result<Vec<usize>>>()?;
        let on_grid = TensorMoments {
            tensor: self.tensor,
            grid: positions.iter().map(|&i| self.grid[i]).collect(),
        };
        let mut table = MomentTable::zeros(grid.len(), max_order);
        let layout = table.layout.clone();
        for n in 1..=max_order {
            let mut result = Ok(());
            let values = &mut table.tables[n - 1];
            layout.for_each(n, |t| {
                if result.is_err() {
                    return;
                }
                let strict = t.windows(2).all(|w| w[0] < w[1]);
                let v = if strict {
                    on_grid.lookup(t)
                } else {
                    on_grid.tied_value(t)
                };
                match v {
                    Ok(v) => values[layout.rank(t)] = v,
                    Err(e) => result = Err(e),
                }
            });
            result?;
        }
        Ok(table)
    }
}
