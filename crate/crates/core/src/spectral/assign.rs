//! Division of meta-path graphs by high-frequency area and filter assignment.

use std::fmt;

use super::chi::chi_mode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Division {
    Low,
    Mid,
    High,
    /// Degenerate mode with fewer than three graphs: one division holds all.
    All,
}

impl fmt::Display for Division {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Division::Low => "low",
            Division::Mid => "mid",
            Division::High => "high",
            Division::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Division of each input graph, in input order.
    pub divisions: Vec<Division>,
    /// Representative graph index of each division, low to high.
    pub representatives: Vec<(Division, usize)>,
}

impl Selection {
    pub fn is_degenerate(&self) -> bool {
        self.representatives.len() == 1
    }
}

/// Ranks graphs by score ascending (ties by input order), splits the
/// ranking into three contiguous divisions whose sizes differ by at most
/// one (larger ones last) and picks the lower-median element of each.
pub fn select_representatives(scores: &[f64]) -> Result<Selection> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no valid meta-path graphs".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut divisions = vec![Division::All; n];
    if n < 3 {
        let rep = order[(n - 1) / 2];
        return Ok(Selection {
            divisions,
            representatives: vec![(Division::All, rep)],
        });
    }
    let base = n / 3;
    let extra = n % 3;
    // Remainders go to the later divisions.
    let sizes = [base, base + usize::from(extra >= 2), base + usize::from(extra >= 1)];
    let mut representatives = Vec::with_capacity(3);
    let mut start = 0;
    for (div, size) in [Division::Low, Division::Mid, Division::High].into_iter().zip(sizes) {
        for &g in &order[start..start + size] {
            divisions[g] = div;
        }
        representatives.push((div, order[start + (size - 1) / 2]));
        start += size;
    }
    Ok(Selection {
        divisions,
        representatives,
    })
}

/// Candidate whose mode is nearest to `band_max`; ties go to the smaller index.
pub fn assign_filter(band_max: f64, candidates: &[usize]) -> Result<usize> {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(usize, f64)> = None;
    for i in sorted {
        let dist = (chi_mode(i) - band_max).abs();
        match best {
            Some((_, d)) if dist >= d => {}
            _ => best = Some((i, dist)),
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidArgument("empty candidate set".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_graphs_split_in_pairs() {
        let scores = [0.6, 0.1, 0.5, 0.2, 0.4, 0.3];
        let sel = select_representatives(&scores).unwrap();
        // ranks: 1→idx1, 2→idx3, 3→idx5, 4→idx4, 5→idx2, 6→idx0
        assert_eq!(
            sel.representatives,
            vec![(Division::Low, 1), (Division::Mid, 5), (Division::High, 2)]
        );
        assert_eq!(sel.divisions[0], Division::High);
        assert_eq!(sel.divisions[3], Division::Low);
    }

    #[test]
    fn three_graphs_represent_themselves() {
        let sel = select_representatives(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            sel.representatives,
            vec![(Division::Low, 1), (Division::Mid, 2), (Division::High, 0)]
        );
    }

    #[test]
    fn two_graphs_are_degenerate() {
        let sel = select_representatives(&[0.5, 0.2]).unwrap();
        assert!(sel.is_degenerate());
        assert_eq!(sel.representatives, vec![(Division::All, 1)]);
        assert_eq!(sel.divisions, vec![Division::All; 2]);
    }

    #[test]
    fn remainders_go_to_later_divisions() {
        let sel = select_representatives(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        let count = |d| sel.divisions.iter().filter(|&&x| x == d).count();
        assert_eq!((count(Division::Low), count(Division::Mid), count(Division::High)), (2, 2, 3));
        let sel = select_representatives(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let count = |d| sel.divisions.iter().filter(|&&x| x == d).count();
        assert_eq!((count(Division::Low), count(Division::Mid), count(Division::High)), (2, 3, 3));
    }

    #[test]
    fn assignment_by_nearest_mode() {
        assert_eq!(assign_filter(0.0, &[1, 2, 4, 8]).unwrap(), 1);
        assert_eq!(assign_filter(0.65, &[1, 2, 4, 8]).unwrap(), 2);
        // modes: 32 → 1.8788 (distance 0.0212), 64 → 1.9385 (0.0385)
        assert_eq!(assign_filter(1.9, &[1, 2, 4, 8, 16, 32, 64, 128]).unwrap(), 32);
        assert_eq!(assign_filter(1.9, &[1, 2, 4, 8, 16, 64, 128]).unwrap(), 64);
        assert!(assign_filter(1.0, &[]).is_err());
    }

    #[test]
    fn ties_prefer_smaller_index() {
        // Modes of 1 and 3 are 0 and 1; 0.5 is equidistant.
        assert_eq!(assign_filter(0.5, &[3, 1]).unwrap(), 1);
    }
}
