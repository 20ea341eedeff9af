//! One-to-one subwindow assignment maximising total payoff.
//!
//! The solver is payoff-agnostic: callers fill entry `(k, n)` with whatever
//! device `k` earns on subwindow `n` (for transport capacity, `d_k R_{k,n}`).

use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: f64 = 1e7;

/// K x N row-major payoff matrix with K <= N and finite, non-negative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if rows > cols {
            return Err(Error::Dimension(format!(
                "{rows} devices but only {cols} subwindows"
            )));
        }
        if let Some((i, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "payoff ({}, {}) = {v} is not a finite non-negative value",
                i / cols.max(1),
                i % cols.max(1)
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            for n in 0..cols {
                entries.push(f(k, n));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged payoff rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, k: usize, n: usize) -> f64 {
        self.entries[k * self.cols + n]
    }

    fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// Injective map from device index to subwindow index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    n_of_k: Vec<usize>,
}

impl Assignment {
    pub fn new(n_of_k: Vec<usize>, num_subwindows: usize) -> Result<Self> {
        let mut seen = vec![false; num_subwindows];
        for (k, &n) in n_of_k.iter().enumerate() {
            if n >= num_subwindows {
                return Err(Error::Dimension(format!(
                    "device {k} assigned to subwindow {n} of {num_subwindows}"
                )));
            }
            if std::mem::replace(&mut seen[n], true) {
                return Err(Error::InvalidParameter(format!(
                    "subwindow {n} assigned twice"
                )));
            }
        }
        Ok(Self { n_of_k })
    }

    pub fn subwindow_of(&self, k: usize) -> usize {
        self.n_of_k[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.n_of_k
    }

    pub fn len(&self) -> usize {
        self.n_of_k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_of_k.is_empty()
    }

    /// Total payoff, summed in device order.
    pub fn total(&self, payoff: &PayoffMatrix) -> f64 {
        self.n_of_k
            .iter()
            .enumerate()
            .fold(0.0, |acc, (k, &n)| acc + payoff.get(k, n))
    }
}

/// Maximum-payoff assignment via the Hungarian method (shortest augmenting
/// path form with row/column potentials), O(K^2 N).
///
/// Maximisation runs as minimisation of `max_entry - entry`. Rectangular
/// matrices are solved directly, which is equivalent to padding with
/// zero-payoff dummy devices. Among equal-cost augmenting columns the lowest
/// subwindow index is taken.
pub fn hungarian_assign(payoff: &PayoffMatrix) -> Result<Assignment> {
    let (n_rows, n_cols) = (payoff.rows, payoff.cols);
    if n_rows == 0 {
        return Ok(Assignment { n_of_k: Vec::new() });
    }
    let top = payoff.max_entry();
    let cost = |i: usize, j: usize| top - payoff.get(i - 1, j - 1);

    // 1-based; column 0 is the virtual root of each augmenting search.
    let mut u = vec![0.0; n_rows + 1];
    let mut v = vec![0.0; n_cols + 1];
    let mut row_of_col = vec![0usize; n_cols + 1];
    let mut way = vec![0usize; n_cols + 1];

    for i in 1..=n_rows {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n_cols + 1];
        let mut used = vec![false; n_cols + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n_cols {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 {
                return Err(Error::InvalidParameter(
                    "assignment search stalled on non-finite reduced costs".into(),
                ));
            }
            for j in 0..=n_cols {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut n_of_k = vec![0; n_rows];
    for j in 1..=n_cols {
        if row_of_col[j] != 0 {
            n_of_k[row_of_col[j] - 1] = j - 1;
        }
    }
    Assignment::new(n_of_k, n_cols)
}

/// Number of injections from K devices into N subwindows, N!/(N-K)!, as f64.
pub fn injection_count(devices: usize, subwindows: usize) -> f64 {
    if devices > subwindows {
        return 0.0;
    }
    ((subwindows - devices + 1)..=subwindows).fold(1.0, |acc, x| acc * x as f64)
}

/// Calls `visit` with every injection K -> N in lexicographic order.
pub fn for_each_injection(
    devices: usize,
    subwindows: usize,
    cap: f64,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    let count = injection_count(devices, subwindows);
    if devices > subwindows {
        return Err(Error::Dimension(format!(
            "{devices} devices but only {subwindows} subwindows"
        )));
    }
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    fn recurse(
        depth: usize,
        devices: usize,
        subwindows: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if depth == devices {
            visit(current);
            return;
        }
        for n in 0..subwindows {
            if used[n] {
                continue;
            }
            used[n] = true;
            current.push(n);
            recurse(depth + 1, devices, subwindows, used, current, visit);
            current.pop();
            used[n] = false;
        }
    }
    let mut used = vec![false; subwindows];
    let mut current = Vec::with_capacity(devices);
    recurse(0, devices, subwindows, &mut used, &mut current, &mut visit);
    Ok(())
}

/// Globally optimal assignment by enumeration. Ties go to the
/// lexicographically smallest assignment.
pub fn exhaustive_assign(payoff: &PayoffMatrix, cap: f64) -> Result<Assignment> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_injection(payoff.rows, payoff.cols, cap, |n_of_k| {
        let total = n_of_k
            .iter()
            .enumerate()
            .fold(0.0, |acc, (k, &n)| acc + payoff.get(k, n));
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, n_of_k.to_vec()));
        }
    })?;
    let (_, n_of_k) = best.expect("at least one injection exists when K <= N");
    Assignment::new(n_of_k, payoff.cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, k: usize, n: usize) -> PayoffMatrix {
        PayoffMatrix::from_fn(k, n, |_, _| rng.gen_range(0.0..100.0)).unwrap()
    }

    #[test]
    fn one_by_one() {
        let m = PayoffMatrix::from_rows(&[vec![4.2]]).unwrap();
        assert_eq!(hungarian_assign(&m).unwrap().as_slice(), &[0]);
    }

    #[test]
    fn two_by_two() {
        // Permutations: identity 5+3=8, swap 1+2=3.
        let m = PayoffMatrix::from_rows(&[vec![5.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let a = hungarian_assign(&m).unwrap();
        assert_eq!(a.as_slice(), &[0, 1]);
        assert_eq!(a.total(&m), 8.0);
        assert_eq!(exhaustive_assign(&m, DEFAULT_ENUMERATION_CAP).unwrap(), a);
    }

    #[test]
    fn diagonal_dominant_gives_identity() {
        let m = PayoffMatrix::from_fn(5, 5, |k, n| if k == n { 10.0 } else { 1.0 }).unwrap();
        assert_eq!(
            exhaustive_assign(&m, 1e7).unwrap().as_slice(),
            &[0, 1, 2, 3, 4]
        );
        assert_eq!(hungarian_assign(&m).unwrap().as_slice(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn all_ties_go_to_lowest_subwindows() {
        let m = PayoffMatrix::from_fn(3, 6, |_, _| 1.0).unwrap();
        assert_eq!(hungarian_assign(&m).unwrap().as_slice(), &[0, 1, 2]);
        assert_eq!(exhaustive_assign(&m, 1e7).unwrap().as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn rectangular_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let k = rng.gen_range(1..=n);
            let m = random_matrix(&mut rng, k, n);
            let h = hungarian_assign(&m).unwrap();
            let e = exhaustive_assign(&m, 1e7).unwrap();
            assert_eq!(h.total(&m), e.total(&m), "{m:?}");
        }
    }

    #[test]
    fn hundred_random_5x5() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = random_matrix(&mut rng, 5, 5);
            assert_eq!(
                hungarian_assign(&m).unwrap().total(&m),
                exhaustive_assign(&m, 1e7).unwrap().total(&m)
            );
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            PayoffMatrix::new(3, 2, vec![0.0; 6]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            PayoffMatrix::new(1, 2, vec![f64::NAN, 1.0]),
            Err(Error::InvalidParameter(_))
        ));
        let m = PayoffMatrix::from_fn(8, 12, |_, _| 1.0).unwrap();
        assert!(matches!(
            exhaustive_assign(&m, 1e7),
            Err(Error::CapExceeded { .. })
        ));
        assert!(Assignment::new(vec![0, 0], 2).is_err());
        assert!(Assignment::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn injection_counts() {
        assert_eq!(injection_count(5, 5), 120.0);
        assert_eq!(injection_count(2, 4), 12.0);
        assert_eq!(injection_count(0, 4), 1.0);
        assert_eq!(injection_count(5, 4), 0.0);
        let mut seen = 0;
        for_each_injection(3, 4, 1e7, |_| seen += 1).unwrap();
        assert_eq!(seen, 24);
    }
}
