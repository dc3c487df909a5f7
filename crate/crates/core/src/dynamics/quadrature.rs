//! Nested trapezoid quadrature over time-ordered simplices on a uniform grid.
//!
//! Functions on the simplex are tabulated at non-decreasing index tuples
//! `i_1 ≤ … ≤ i_N` of a grid with `P` points, stored by multiset rank.

/// Binomial coefficients `C(n, k)` for `n < rows`, `k ≤ max_k`.
#[derive(Clone, Debug)]
pub(crate) struct Binomials {
    table: Vec<Vec<usize>>,
}

impl Binomials {
    pub(crate) fn new(rows: usize, max_k: usize) -> Self {
        let mut table = vec![vec![0usize; max_k + 1]; rows];
        for n in 0..rows {
            table[n][0] = 1;
            for k in 1..=max_k.min(n) {
                table[n][k] = table[n - 1][k - 1] + if k < n { table[n - 1][k] } else { 0 };
            }
        }
        Binomials { table }
    }

    pub(crate) fn get(&self, n: usize, k: usize) -> usize {
        if k > n {
            0
        } else {
            self.table[n][k]
        }
    }
}

/// Layout of all non-decreasing tuples of lengths `1..=max_len` over
/// `points` grid indices.
#[derive(Clone, Debug)]
pub(crate) struct TupleLayout {
    pub(crate) points: usize,
    binom: Binomials,
}

impl TupleLayout {
    pub(crate) fn new(points: usize, max_len: usize) -> Self {
        TupleLayout {
            points,
            binom: Binomials::new(points + max_len + 1, max_len + 1),
        }
    }

    /// Number of non-decreasing tuples of length `len`.
    pub(crate) fn count(&self, len: usize) -> usize {
        self.binom.get(self.points + len - 1, len)
    }

    /// Rank of a non-decreasing tuple: the strictly increasing
    /// `c_k = i_k + k` is ranked in the combinatorial number system.
    pub(crate) fn rank(&self, tuple: &[usize]) -> usize {
        tuple
            .iter()
            .enumerate()
            .map(|(k, &i)| self.binom.get(i + k, k + 1))
            .sum()
    }

    /// Calls `f` on every non-decreasing tuple of length `len`.
    pub(crate) fn for_each(&self, len: usize, mut f: impl FnMut(&[usize])) {
        if len == 0 {
            return;
        }
        let mut t = vec![0usize; len];
        loop {
            f(&t);
            // Increment like an odometer on the last position, keeping order.
            let mut k = len;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if t[k] + 1 < self.points {
                    t[k] += 1;
                    let v = t[k];
                    for slot in &mut t[k + 1..] {
                        *slot = v;
                    }
                    break;
                }
            }
        }
    }
}

/// `∫_{0 ≤ t_1 ≤ … ≤ t_N ≤ t_j} f` for every grid point `j`, with `f`
/// tabulated by rank over non-decreasing tuples of length `n`.
pub(crate) fn simplex_integrals(
    layout: &TupleLayout,
    n: usize,
    values: &[f64],
    h: f64,
) -> Vec<f64> {
    let trap = |terms: &mut dyn Iterator<Item = f64>, len: usize| -> f64 {
        if len <= 1 {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut first = 0.0;
        let mut last = 0.0;
        for (k, v) in terms.enumerate() {
            if k == 0 {
                first = v;
            }
            last = v;
            sum += v;
        }
        h * (sum - 0.5 * (first + last))
    };
    // Integrate out the earliest variable repeatedly.
    let mut current = values.to_vec();
    for len in (1..n).rev() {
        let mut next = vec![0.0; layout.count(len)];
        let mut full = vec![0usize; len + 1];
        layout.for_each(len, |rest| {
            full[1..].copy_from_slice(rest);
            let upper = rest[0];
            let mut it = (0..=upper).map(|i| {
                full[0] = i;
                current[layout.rank(&full)]
            });
            next[layout.rank(rest)] = trap(&mut it, upper + 1);
        });
        current = next;
    }
    // Cumulative trapezoid over the latest variable.
    let mut out = vec![0.0; layout.points];
    for j in 1..layout.points {
        out[j] = out[j - 1] + 0.5 * h * (current[j - 1] + current[j]);
    }
    out
}
