//! Square assignment problems on dense cost matrices.
//!
//! `min_sum` solves the linear assignment problem with the Hungarian method
//! (shortest augmenting paths with potentials), `min_max` the bottleneck
//! assignment by bisection over the sorted entries with a bipartite matching
//! feasibility test. Both return the lexicographically smallest optimal
//! permutation so that results do not depend on solver internals.

/// Row-major square cost matrix.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(size: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), size * size, "cost matrix must be square");
        Self { size, entries }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                entries.push(f(i, j));
            }
        }
        Self { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn sum_cost(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.at(i, j)).sum()
    }

    pub fn max_cost(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.at(i, j)).fold(0.0, f64::max)
    }
}

/// Hungarian method on the sub-matrix given by `rows` x `cols` (equal length).
/// Returns, for each position in `rows`, the position in `cols` it is assigned.
fn hungarian(cost: &CostMatrix, rows: &[usize], cols: &[usize]) -> Vec<usize> {
    let n = rows.len();
    debug_assert_eq!(n, cols.len());
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials; column 0 is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.at(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[owner[j] - 1] = j - 1;
    }
    assign
}

fn sub_min_sum(cost: &CostMatrix, rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    let local = hungarian(cost, rows, cols);
    let total = local.iter().enumerate().map(|(a, &b)| cost.at(rows[a], cols[b])).sum();
    (total, local.iter().map(|&b| cols[b]).collect())
}

/// Relative slack under which two assignment sums count as tied.
const TIE_SLACK: f64 = 1e-13;

/// Minimum-sum assignment. Returns `(perm, total)` with row `i` matched to
/// column `perm[i]`; among optimal permutations the lexicographically smallest
/// is returned.
pub fn min_sum(cost: &CostMatrix) -> (Vec<usize>, f64) {
    let n = cost.size();
    let all: Vec<usize> = (0..n).collect();
    let (best, mut current) = sub_min_sum(cost, &all, &all);
    if n <= 1 {
        return (current, best);
    }
    let slack = TIE_SLACK * best.abs() * n as f64;
    let mut fixed = 0.0;
    let mut used = vec![false; n];
    for i in 0..n {
        let incumbent = current[i];
        let rest_rows: Vec<usize> = (i + 1..n).collect();
        for j in 0..incumbent {
            if used[j] {
                continue;
            }
            let rest_cols: Vec<usize> = (0..n).filter(|&c| !used[c] && c != j).collect();
            let (rest, tail) = sub_min_sum(cost, &rest_rows, &rest_cols);
            if fixed + cost.at(i, j) + rest <= best + slack {
                current.truncate(i);
                current.push(j);
                current.extend(tail);
                break;
            }
        }
        let j = current[i];
        used[j] = true;
        fixed += cost.at(i, j);
    }
    let total = cost.sum_cost(&current);
    (current, total)
}

/// Kuhn's augmenting path search restricted to admissible pairs.
fn augment(
    row: usize,
    admissible: &dyn Fn(usize, usize) -> bool,
    n: usize,
    seen: &mut [bool],
    col_owner: &mut [Option<usize>],
) -> bool {
    for j in 0..n {
        if seen[j] || !admissible(row, j) {
            continue;
        }
        seen[j] = true;
        let free = match col_owner[j] {
            None => true,
            Some(other) => augment(other, admissible, n, seen, col_owner),
        };
        if free {
            col_owner[j] = Some(row);
            return true;
        }
    }
    false
}

/// Whether the rows in `rows` can be perfectly matched into the columns not
/// excluded, using only admissible pairs.
fn has_perfect_matching(
    n: usize,
    rows: &[usize],
    excluded_cols: &[bool],
    admissible: &dyn Fn(usize, usize) -> bool,
) -> bool {
    let mut col_owner: Vec<Option<usize>> = vec![None; n];
    let adm = |i: usize, j: usize| !excluded_cols[j] && admissible(i, j);
    for &r in rows {
        let mut seen = vec![false; n];
        if !augment(r, &adm, n, &mut seen, &mut col_owner) {
            return false;
        }
    }
    true
}

/// Bottleneck (minimum-maximum) assignment. Returns `(perm, max_cost)`; the
/// permutation is the lexicographically smallest one attaining the bottleneck.
pub fn min_max(cost: &CostMatrix) -> (Vec<usize>, f64) {
    let n = cost.size();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut levels = cost.entries.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let all: Vec<usize> = (0..n).collect();
    let none = vec![false; n];
    let feasible = |t: f64| has_perfect_matching(n, &all, &none, &|i, j| cost.at(i, j) <= t);
    // The largest level is always feasible.
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let bottleneck = levels[lo];
    let admissible = |i: usize, j: usize| cost.at(i, j) <= bottleneck;
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let mut choice = None;
        for j in 0..n {
            if used[j] || !admissible(i, j) {
                continue;
            }
            used[j] = true;
            let ok = has_perfect_matching(n, &rest, &used, &admissible);
            used[j] = false;
            if ok {
                choice = Some(j);
                break;
            }
        }
        let choice = choice.expect("bottleneck level admits a perfect matching");
        used[choice] = true;
        perm.push(choice);
    }
    (perm, bottleneck)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute<F: Fn(&[usize]) -> f64>(n: usize, f: F) -> (Vec<usize>, f64) {
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let c = f(&perm);
            if best.as_ref().is_none_or(|(_, b)| c < *b) {
                best = Some((perm.clone(), c));
            }
            // next lexicographic permutation
            let Some(k) = (0..n.saturating_sub(1)).rev().find(|&k| perm[k] < perm[k + 1]) else {
                break;
            };
            let l = (k + 1..n).rev().find(|&l| perm[k] < perm[l]).unwrap();
            perm.swap(k, l);
            perm[k + 1..].reverse();
        }
        best.unwrap()
    }

    #[test]
    fn hungarian_matches_enumeration_on_integer_costs() {
        // Integer costs make every comparison exact, including ties.
        let mut state = 12345u64;
        for n in 1..=6 {
            for _ in 0..50 {
                let cost = CostMatrix::from_fn(n, |_, _| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    ((state >> 33) % 7) as f64
                });
                let (perm, total) = min_sum(&cost);
                let (bperm, btotal) = brute(n, |p| cost.sum_cost(p));
                assert_eq!(total, btotal);
                assert_eq!(perm, bperm, "lexicographic tie-breaking");
                let (perm, bottleneck) = min_max(&cost);
                let (bperm, bb) = brute(n, |p| cost.max_cost(p));
                assert_eq!(bottleneck, bb);
                assert_eq!(perm, bperm);
            }
        }
    }

    #[test]
    fn all_zero_costs_give_identity() {
        let cost = CostMatrix::new(4, vec![0.0; 16]);
        assert_eq!(min_sum(&cost).0, vec![0, 1, 2, 3]);
        assert_eq!(min_max(&cost).0, vec![0, 1, 2, 3]);
    }
}
