use rand::seq::index;

use crate::stochastic::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Terminal: the target carries no bootstrap term.
    pub done: bool,
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Insert, evicting the oldest transition when full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// `batch` distinct transitions chosen uniformly at random.
    pub fn sample(&self, batch: usize, rng: &mut SimRng) -> Vec<&Transition> {
        assert!(batch <= self.items.len(), "batch larger than buffer contents");
        index::sample(rng, self.items.len(), batch)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }

    /// Transitions oldest first.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(self.items[..split].iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::make_rng;

    fn t(i: usize) -> Transition {
        Transition {
            state: vec![i as f64],
            action: i,
            reward: 0.0,
            next_state: vec![],
            done: false,
        }
    }

    #[test]
    fn keeps_most_recent_capacity_items() {
        let mut b = ReplayBuffer::new(5);
        for i in 0..13 {
            b.push(t(i));
        }
        assert_eq!(b.len(), 5);
        let kept: Vec<usize> = b.iter_oldest_first().map(|x| x.action).collect();
        assert_eq!(kept, vec![8, 9, 10, 11, 12]);
    }

    #[test]
    fn sample_is_distinct_and_reproducible() {
        let mut b = ReplayBuffer::new(100);
        for i in 0..50 {
            b.push(t(i));
        }
        let draw = |seed| {
            let mut rng = make_rng(seed);
            b.sample(20, &mut rng).iter().map(|x| x.action).collect::<Vec<_>>()
        };
        let a = draw(3);
        assert_eq!(a, draw(3));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 20);
    }
}
