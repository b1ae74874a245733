//! Partition agreement: normalized mutual information and adjusted Rand index.

/// Contingency counts from two label sequences of equal length.
struct Contingency {
    n: usize,
    cells: Vec<usize>,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn run_lengths(mut keys: Vec<usize>) -> Vec<usize> {
    keys.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let j = keys[i..].iter().position(|&k| k != keys[i]).map_or(keys.len(), |p| i + p);
        out.push(j - i);
        i = j;
    }
    out
}

impl Contingency {
    fn new(pred: &[usize], gold: &[usize]) -> Self {
        assert_eq!(pred.len(), gold.len(), "label sequences differ in length");
        let mut pairs: Vec<(usize, usize)> = pred.iter().copied().zip(gold.iter().copied()).collect();
        pairs.sort_unstable();
        let mut cells = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let j = pairs[i..]
                .iter()
                .position(|&p| p != pairs[i])
                .map_or(pairs.len(), |p| i + p);
            cells.push(j - i);
            i = j;
        }
        Self {
            n: pred.len(),
            cells,
            left: run_lengths(pred.to_vec()),
            right: run_lengths(gold.to_vec()),
        }
    }
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information over the arithmetic mean of the two entropies.
/// Returns 1.0 when both partitions are trivial (zero entropy) or empty.
pub fn nmi(pred: &[usize], gold: &[usize]) -> f64 {
    let t = Contingency::new(pred, gold);
    if t.n == 0 {
        return 1.0;
    }
    let n = t.n as f64;
    let h_left = entropy(&t.left, n);
    let h_right = entropy(&t.right, n);
    let denom = 0.5 * (h_left + h_right);
    if denom <= 0.0 {
        return 1.0;
    }
    // MI = H(L) + H(R) - H(L, R)
    let h_joint = entropy(&t.cells, n);
    let mi = (h_left + h_right - h_joint).max(0.0);
    (mi / denom).clamp(0.0, 1.0)
}

/// Adjusted Rand index; 1.0 when the expected-index correction degenerates.
pub fn ari(pred: &[usize], gold: &[usize]) -> f64 {
    let t = Contingency::new(pred, gold);
    if t.n < 2 {
        return 1.0;
    }
    let index: f64 = t.cells.iter().map(|&c| comb2(c)).sum();
    let left: f64 = t.left.iter().map(|&c| comb2(c)).sum();
    let right: f64 = t.right.iter().map(|&c| comb2(c)).sum();
    let expected = left * right / comb2(t.n);
    let max_index = 0.5 * (left + right);
    let denom = max_index - expected;
    if denom == 0.0 {
        1.0
    } else {
        (index - expected) / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partitions() {
        let a = [0, 0, 1, 2, 2, 2];
        assert!((nmi(&a, &a) - 1.0).abs() < 1e-12);
        assert!((ari(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singletons_against_one_cluster() {
        assert_eq!(ari(&[0, 1, 2, 3], &[0, 0, 0, 0]), 0.0);
        assert_eq!(nmi(&[0, 1, 2, 3], &[0, 0, 0, 0]), 0.0);
    }

    #[test]
    fn degenerate_single_cluster() {
        assert_eq!(nmi(&[4, 4, 4], &[1, 1, 1]), 1.0);
        assert_eq!(ari(&[4, 4, 4], &[1, 1, 1]), 1.0);
        assert_eq!(nmi(&[], &[]), 1.0);
    }

    #[test]
    fn relabeling_is_invisible() {
        let gold = [0, 0, 1, 1, 2, 2, 2];
        let pred = [5, 5, 5, 9, 9, 1, 1];
        let renamed = [0, 0, 0, 7, 7, 3, 3];
        assert_eq!(nmi(&pred, &gold), nmi(&renamed, &gold));
        assert_eq!(ari(&pred, &gold), ari(&renamed, &gold));
    }
}
