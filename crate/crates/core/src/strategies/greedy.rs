//! Baseline strategy: always halve the current largest interval.

use super::strategy::{Split, Strategy};

/// Greedy halving of length `n`; its discrepancy is 2 for every `n >= 3`.
pub fn greedy_half(n: u32) -> Strategy<f64> {
    let mut live = vec![1.0f64];
    let mut splits = Vec::with_capacity(n.saturating_sub(1) as usize);
    for _ in 1..n.max(1) {
        let slot = live
            .iter()
            .enumerate()
            .fold(0, |best, (i, &x)| if x > live[best] { i } else { best });
        let half = live[slot] / 2.0;
        live[slot] = half;
        live.push(half);
        splits.push(Split { slot, left: half, right: half });
    }
    Strategy::new(1.0, splits).expect("halving is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving() {
        let s = greedy_half(2);
        assert_eq!(s.partition(2).unwrap(), vec![0.5, 0.5]);
        assert_eq!(s.disc_of(), 1.0);
        assert_eq!(greedy_half(3).partition(3).unwrap(), vec![0.25, 0.25, 0.5]);
        for n in 3..40 {
            assert_eq!(greedy_half(n).disc_of(), 2.0, "n={n}");
        }
        assert_eq!(greedy_half(1).len(), 1);
    }
}
