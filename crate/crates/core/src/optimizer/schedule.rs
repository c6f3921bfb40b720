//! Split schedules: the discrete skeleton of a strategy.
//!
//! Live intervals are kept in creation order. Step `t` (0-based) removes the
//! live interval at index `choices[t] < t + 1` and appends its two children.

use std::collections::HashMap;

use crate::scalar::Length;
use crate::strategies::strategy::{Split, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct SplitSchedule {
    n: u32,
    choices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("expected {expected} choices for n = {n}, got {got}")]
    Length { n: u32, expected: usize, got: usize },
    #[error("choice {choice} at step {step} exceeds the {live} live intervals")]
    Choice { step: usize, choice: usize, live: usize },
}

/// Tree induced by a schedule. Node 0 is the root; step `t` creates nodes
/// `2t + 1` and `2t + 2`. Leaves are numbered by their final live position.
#[derive(Debug, Clone)]
pub struct ScheduleTree {
    /// Leaf set of every node, as a bitmask over leaf indices.
    pub leaves: Vec<u64>,
    /// Node split at each step.
    pub split_node: Vec<usize>,
    /// Live nodes of every stage `1..=n`, in creation order.
    pub stages: Vec<Vec<usize>>,
}

impl SplitSchedule {
    pub fn new(n: u32, choices: Vec<usize>) -> Result<Self, ScheduleError> {
        let expected = n.saturating_sub(1) as usize;
        if choices.len() != expected {
            return Err(ScheduleError::Length { n, expected, got: choices.len() });
        }
        for (step, &choice) in choices.iter().enumerate() {
            if choice > step {
                return Err(ScheduleError::Choice { step, choice, live: step + 1 });
            }
        }
        Ok(SplitSchedule { n, choices })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn tree(&self) -> ScheduleTree {
        let node_count = 2 * self.choices.len() + 1;
        let mut children = vec![None; node_count];
        let mut live = vec![0usize];
        let mut stages = vec![live.clone()];
        let mut split_node = Vec::with_capacity(self.choices.len());
        for (t, &c) in self.choices.iter().enumerate() {
            let parent = live.remove(c);
            children[parent] = Some((2 * t + 1, 2 * t + 2));
            live.push(2 * t + 1);
            live.push(2 * t + 2);
            split_node.push(parent);
            stages.push(live.clone());
        }
        let mut leaves = vec![0u64; node_count];
        for (i, &leaf) in live.iter().enumerate() {
            leaves[leaf] = 1 << i;
        }
        // Children always have larger ids than their parent.
        for node in (0..node_count).rev() {
            if let Some((a, b)) = children[node] {
                leaves[node] = leaves[a] | leaves[b];
            }
        }
        ScheduleTree { leaves, split_node, stages }
    }

    /// Key identifying the schedule up to swapping the two children of any
    /// split: the timestamped tree with unordered children.
    pub fn canonical_key(&self) -> String {
        let tree = self.tree();
        let mut children: HashMap<usize, (usize, usize)> = HashMap::new();
        for (t, &p) in tree.split_node.iter().enumerate() {
            children.insert(p, (2 * t + 1, 2 * t + 2));
        }
        fn render(node: usize, children: &HashMap<usize, (usize, usize)>) -> String {
            match children.get(&node) {
                None => ".".to_string(),
                Some(&(a, b)) => {
                    let (mut x, mut y) = (render(a, children), render(b, children));
                    if y < x {
                        std::mem::swap(&mut x, &mut y);
                    }
                    // Step of this split: children ids are 2t+1, 2t+2.
                    format!("({}:{x}{y})", (a - 1) / 2)
                }
            }
        }
        render(0, &children)
    }

    /// Schedule followed by a strategy stored in slot convention.
    pub fn from_strategy<T: Length>(s: &Strategy<T>) -> Self {
        let mut live = vec![0usize];
        let mut slot_node = vec![0usize];
        let mut choices = Vec::with_capacity(s.splits().len());
        for (t, split) in s.splits().iter().enumerate() {
            let node = slot_node[split.slot];
            let idx = live.iter().position(|&x| x == node).expect("slot is live");
            choices.push(idx);
            live.remove(idx);
            live.push(2 * t + 1);
            live.push(2 * t + 2);
            slot_node[split.slot] = 2 * t + 1;
            slot_node.push(2 * t + 2);
        }
        SplitSchedule { n: s.len() as u32, choices }
    }

    /// Strategy following this schedule with the given leaf lengths.
    pub fn replay<T: Length>(&self, leaf_lengths: &[T]) -> Strategy<T> {
        assert_eq!(leaf_lengths.len(), self.n.max(1) as usize, "one length per leaf");
        let tree = self.tree();
        let length = |node: usize| {
            let mask = tree.leaves[node];
            let mut it = (0..leaf_lengths.len()).filter(|i| mask >> i & 1 == 1);
            let first = leaf_lengths[it.next().expect("node has a leaf")].clone();
            it.fold(first, |acc, i| acc.add_len(&leaf_lengths[i]))
        };
        let mut slot_of = vec![0usize; tree.leaves.len()];
        let mut splits = Vec::with_capacity(tree.split_node.len());
        for (t, &p) in tree.split_node.iter().enumerate() {
            let slot = slot_of[p];
            slot_of[2 * t + 1] = slot;
            slot_of[2 * t + 2] = t + 1;
            splits.push(Split { slot, left: length(2 * t + 1), right: length(2 * t + 2) });
        }
        Strategy::new(length(0), splits).expect("leaf sums define a valid strategy")
    }
}

/// Every raw schedule of length `n` in lexicographic order of `choices`.
pub fn raw_schedules(n: u32) -> impl Iterator<Item = SplitSchedule> {
    let steps = n.saturating_sub(1) as usize;
    let mut next = Some(vec![0usize; steps]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        // Odometer where digit t ranges over 0..=t.
        let mut t = steps;
        while t > 0 {
            t -= 1;
            if succ[t] < t {
                succ[t] += 1;
                next = Some(succ);
                break;
            }
            succ[t] = 0;
        }
        Some(SplitSchedule { n, choices: current })
    })
}

/// Schedules deduplicated under child symmetry; each class is represented by
/// its lexicographically smallest `choices` list. Output is sorted.
pub fn enumerate_schedules(n: u32) -> Vec<SplitSchedule> {
    let mut seen = std::collections::HashSet::new();
    raw_schedules(n).filter(|s| seen.insert(s.canonical_key())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_counts() {
        assert_eq!(raw_schedules(1).count(), 1);
        assert_eq!(raw_schedules(2).count(), 1);
        assert_eq!(raw_schedules(3).count(), 2);
        assert_eq!(raw_schedules(5).count(), 24);
        assert_eq!(raw_schedules(6).count(), 120);
    }

    #[test]
    fn dedup_counts() {
        assert_eq!(enumerate_schedules(2).len(), 1);
        assert_eq!(enumerate_schedules(3).len(), 1);
        // Step 3 splits either the untouched root child or a grandchild.
        assert_eq!(enumerate_schedules(4).len(), 2);
        assert!(enumerate_schedules(6).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tree_and_replay() {
        let s = SplitSchedule::new(3, vec![0, 0]).unwrap();
        let tree = s.tree();
        assert_eq!(tree.stages, vec![vec![0], vec![1, 2], vec![2, 3, 4]]);
        assert_eq!(tree.leaves[0], 0b111);
        assert_eq!(tree.leaves[1], 0b110);
        let strat = s.replay(&[2.0, 1.0, 1.0]);
        assert_eq!(strat.partition(2).unwrap(), vec![2.0, 2.0]);
        assert_eq!(SplitSchedule::from_strategy(&strat), s);
        assert!(SplitSchedule::new(3, vec![0, 2]).is_err());
        assert!(SplitSchedule::new(3, vec![0]).is_err());
    }

    #[test]
    fn symmetric_schedules_share_a_key() {
        let a = SplitSchedule::new(3, vec![0, 0]).unwrap();
        let b = SplitSchedule::new(3, vec![0, 1]).unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());
        let c = SplitSchedule::new(4, vec![0, 0, 0]).unwrap();
        let d = SplitSchedule::new(4, vec![0, 0, 1]).unwrap();
        assert_ne!(c.canonical_key(), d.canonical_key());
    }
}
