//! Maximum-weight one-to-one assignment.
//!
//! Dense solver: the O(n^2 m) shortest-augmenting-path Hungarian method with
//! potentials, on the smaller side of a rectangular matrix. The sparse entry
//! point splits the bipartite overlap graph into connected components first,
//! since zero-weight pairs never change the objective.

use std::collections::HashMap;

use crate::cluster::union_find::DisjointSet;

/// Minimum-cost assignment of every row to a distinct column; requires
/// `rows <= cols`. Returns the column of each row.
fn hungarian_min(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    debug_assert!(n <= m);
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Maximum-weight matching on a dense rectangular matrix. Rows left without
/// a column (when rows outnumber columns) map to `None`.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = weights[0].len();
    if cols == 0 {
        return vec![None; rows];
    }
    if rows <= cols {
        let cost: Vec<Vec<i64>> = weights
            .iter()
            .map(|r| r.iter().map(|&w| -w).collect())
            .collect();
        hungarian_min(&cost).into_iter().map(Some).collect()
    } else {
        let cost: Vec<Vec<i64>> = (0..cols)
            .map(|j| (0..rows).map(|i| -weights[i][j]).collect())
            .collect();
        let mut out = vec![None; rows];
        for (j, i) in hungarian_min(&cost).into_iter().enumerate() {
            out[i] = Some(j);
        }
        out
    }
}

/// Maximum-weight one-to-one matching over sparse positive `(row, col,
/// weight)` entries. Returns only matched pairs with positive weight,
/// sorted by row.
pub fn sparse_max_assignment(entries: &[(usize, usize, u64)]) -> Vec<(usize, usize)> {
    let mut row_slot: HashMap<usize, usize> = HashMap::new();
    let mut col_slot: HashMap<usize, usize> = HashMap::new();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for &(r, c, w) in entries {
        if w == 0 {
            continue;
        }
        row_slot.entry(r).or_insert_with(|| {
            rows.push(r);
            rows.len() - 1
        });
        col_slot.entry(c).or_insert_with(|| {
            cols.push(c);
            cols.len() - 1
        });
    }
    let nr = rows.len();
    let mut sets = DisjointSet::new(nr + cols.len());
    let mut weight: HashMap<(usize, usize), u64> = HashMap::new();
    for &(r, c, w) in entries {
        if w == 0 {
            continue;
        }
        let (ri, ci) = (row_slot[&r], col_slot[&c]);
        sets.union(ri, nr + ci);
        *weight.entry((ri, ci)).or_default() += w;
    }

    let mut pairs = Vec::new();
    for group in sets.groups() {
        let (g_rows, g_cols): (Vec<usize>, Vec<usize>) = group.iter().partition(|&&x| x < nr);
        let g_cols: Vec<usize> = g_cols.into_iter().map(|x| x - nr).collect();
        if g_rows.is_empty() || g_cols.is_empty() {
            continue;
        }
        if g_rows.len() == 1 || g_cols.len() == 1 {
            // Star component: the heaviest edge is optimal.
            let best = g_rows
                .iter()
                .flat_map(|&r| g_cols.iter().map(move |&c| (r, c)))
                .filter_map(|rc| weight.get(&rc).map(|&w| (rc, w)))
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
            if let Some(((r, c), _)) = best {
                pairs.push((rows[r], cols[c]));
            }
            continue;
        }
        let dense: Vec<Vec<i64>> = g_rows
            .iter()
            .map(|&r| {
                g_cols
                    .iter()
                    .map(|&c| weight.get(&(r, c)).map_or(0, |&w| w as i64))
                    .collect()
            })
            .collect();
        for (i, col) in max_weight_assignment(&dense).into_iter().enumerate() {
            if let Some(j) = col {
                if dense[i][j] > 0 {
                    pairs.push((rows[g_rows[i]], cols[g_cols[j]]));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}
