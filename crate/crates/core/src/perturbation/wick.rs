//! Wick contraction patterns of a product of vertices.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Default cap on the total number of legs.
pub const DEFAULT_LEG_CAP: usize = 12;

/// One way of contracting the legs of vertices with powers `powers`.
///
/// Vertex `v` has `loops[v]` self-pairings and `unpaired[v]` legs left on the
/// background; `links` lists `(v, w, n)` with `v < w` and `n` pairings
/// between the two vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionPattern {
    pub powers: Vec<usize>,
    pub unpaired: Vec<usize>,
    pub loops: Vec<usize>,
    pub links: Vec<(usize, usize, usize)>,
    /// Number of labelled-leg contractions realizing the pattern.
    pub multiplicity: Ratio<i128>,
}

impl ContractionPattern {
    pub fn pair_count(&self) -> usize {
        self.loops.iter().sum::<usize>() + self.links.iter().map(|l| l.2).sum::<usize>()
    }
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

/// All contraction patterns of the given vertices, including those that
/// leave legs unpaired.
pub fn wick_pairings(powers: &[usize], cap: usize) -> Result<Vec<ContractionPattern>> {
    let legs: usize = powers.iter().sum();
    if legs > cap {
        return Err(Error::OrderCapExceeded { legs, cap });
    }
    let m = powers.len();
    let mut pairs = Vec::new();
    for v in 0..m {
        for w in v..m {
            pairs.push((v, w));
        }
    }
    let mut out = Vec::new();
    let mut counts = vec![0usize; pairs.len()];
    let mut remaining = powers.to_vec();
    recurse(powers, &pairs, 0, &mut counts, &mut remaining, &mut out);
    Ok(out)
}

fn recurse(
    powers: &[usize],
    pairs: &[(usize, usize)],
    at: usize,
    counts: &mut Vec<usize>,
    remaining: &mut Vec<usize>,
    out: &mut Vec<ContractionPattern>,
) {
    if at == pairs.len() {
        out.push(finish(powers, pairs, counts, remaining));
        return;
    }
    let (v, w) = pairs[at];
    let max = if v == w { remaining[v] / 2 } else { remaining[v].min(remaining[w]) };
    for n in 0..=max {
        counts[at] = n;
        if v == w {
            remaining[v] -= 2 * n;
        } else {
            remaining[v] -= n;
            remaining[w] -= n;
        }
        recurse(powers, pairs, at + 1, counts, remaining, out);
        if v == w {
            remaining[v] += 2 * n;
        } else {
            remaining[v] += n;
            remaining[w] += n;
        }
    }
    counts[at] = 0;
}

fn finish(powers: &[usize], pairs: &[(usize, usize)], counts: &[usize], remaining: &[usize]) -> ContractionPattern {
    let m = powers.len();
    let mut loops = vec![0; m];
    let mut links = Vec::new();
    let mut denom: i128 = remaining.iter().map(|&u| factorial(u)).product();
    for (&(v, w), &n) in pairs.iter().zip(counts) {
        if v == w {
            loops[v] = n;
            denom *= factorial(n) * (1i128 << n);
        } else if n > 0 {
            links.push((v, w, n));
            denom *= factorial(n);
        }
    }
    let numer: i128 = powers.iter().map(|&k| factorial(k)).product();
    ContractionPattern {
        powers: powers.to_vec(),
        unpaired: remaining.to_vec(),
        loops,
        links,
        multiplicity: Ratio::new(numer, denom),
    }
}

/// Total multiplicity per number of pairings.
pub fn count_by_pairs(patterns: &[ContractionPattern]) -> Vec<Ratio<i128>> {
    let max = patterns.iter().map(|p| p.pair_count()).max().unwrap_or(0);
    let mut out = vec![Ratio::from_integer(0); max + 1];
    for p in patterns {
        out[p.pair_count()] += p.multiplicity;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Labelled partial matchings of `n` legs, by number of pairs.
    fn brute_force(n: usize) -> Vec<i128> {
        fn go(free: &mut Vec<bool>, pairs: usize, out: &mut Vec<i128>) {
            match free.iter().position(|f| *f) {
                None => out[pairs] += 1,
                Some(i) => {
                    free[i] = false;
                    go(free, pairs, out);
                    for j in i + 1..free.len() {
                        if free[j] {
                            free[j] = false;
                            go(free, pairs + 1, out);
                            free[j] = true;
                        }
                    }
                    free[i] = true;
                }
            }
        }
        let mut out = vec![0; n / 2 + 1];
        go(&mut vec![true; n], 0, &mut out);
        out
    }

    fn ints(v: Vec<Ratio<i128>>) -> Vec<i128> {
        v.into_iter().map(|r| r.to_integer()).collect()
    }

    #[test]
    fn two_legs() {
        let p = wick_pairings(&[2], 12).unwrap();
        assert_eq!(ints(count_by_pairs(&p)), vec![1, 1]);
    }

    #[test]
    fn quartic_vertex() {
        let p = wick_pairings(&[4], 12).unwrap();
        assert_eq!(ints(count_by_pairs(&p)), vec![1, 6, 3]);
    }

    #[test]
    fn six_legs_full_pairings() {
        let p = wick_pairings(&[6], 12).unwrap();
        assert_eq!(*count_by_pairs(&p).last().unwrap(), Ratio::from_integer(15));
    }

    #[test]
    fn double_factorials() {
        for m in 1..=6 {
            let p = wick_pairings(&[2 * m], 12).unwrap();
            let df: i128 = (1..=2 * m as i128 - 1).step_by(2).product();
            assert_eq!(count_by_pairs(&p)[m], Ratio::from_integer(df));
        }
    }

    #[test]
    fn matches_brute_force_across_vertices() {
        for powers in [vec![3, 3], vec![3, 4], vec![3, 3, 4], vec![4, 4], vec![3, 3, 3, 3], vec![5, 3]] {
            let n: usize = powers.iter().sum();
            let p = wick_pairings(&powers, 12).unwrap();
            assert_eq!(ints(count_by_pairs(&p)), brute_force(n), "{powers:?}");
            assert!(p.iter().all(|q| q.multiplicity.is_integer()));
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            wick_pairings(&[4, 4, 4, 3], 12),
            Err(Error::OrderCapExceeded { legs: 15, cap: 12 })
        ));
    }
}
