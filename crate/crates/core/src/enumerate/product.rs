use std::ops::Range;

/// Lazy Cartesian product over per-position index ranges, enumerated in row-major order
/// (leftmost position varies slowest).
///
/// `next` accepts a prefix check: when it rejects position `p` with the current prefix,
/// every tuple sharing that prefix is skipped without being materialized.
#[derive(Clone, Debug)]
pub struct LazyProduct {
    ranges: Vec<Range<u32>>,
    cursor: Vec<u32>,
    /// Number of leading positions already accepted by the prefix check.
    valid: usize,
    started: bool,
    done: bool,
    /// Prefix-check generation the `valid` count was computed under.
    generation: u64,
}

impl LazyProduct {
    /// Returns `None` if any range is empty (the product has no tuples).
    pub fn new(ranges: Vec<Range<u32>>) -> Option<Self> {
        if ranges.iter().any(|r| r.is_empty()) {
            return None;
        }
        let cursor = ranges.iter().map(|r| r.start).collect();
        Some(LazyProduct { ranges, cursor, valid: 0, started: false, done: false, generation: 0 })
    }

    pub fn arity(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<u32>] {
        &self.ranges
    }

    /// Number of tuples in the product.
    pub fn len(&self) -> u64 {
        self.ranges.iter().map(|r| (r.end - r.start) as u64).product()
    }

    pub fn is_exhausted(&self) -> bool {
        self.done
    }

    /// Increments position `p` (resetting everything right of it), carrying leftwards.
    /// Returns the leftmost changed position.
    fn advance(&mut self, mut p: usize) -> Option<usize> {
        for i in p + 1..self.ranges.len() {
            self.cursor[i] = self.ranges[i].start;
        }
        loop {
            self.cursor[p] += 1;
            if self.cursor[p] < self.ranges[p].end {
                return Some(p);
            }
            self.cursor[p] = self.ranges[p].start;
            if p == 0 {
                self.done = true;
                return None;
            }
            p -= 1;
        }
    }

    /// Next tuple whose every prefix passes `check(position, cursor)`. `generation` must
    /// change whenever the check may have become stricter, so held prefixes are re-validated.
    pub fn next_with<F>(&mut self, generation: u64, mut check: F) -> Option<&[u32]>
    where
        F: FnMut(usize, &[u32]) -> bool,
    {
        if self.done {
            return None;
        }
        let k = self.ranges.len();
        if k == 0 {
            self.done = true;
            return Some(&self.cursor);
        }
        if generation != self.generation {
            self.generation = generation;
            self.valid = 0;
        }
        if self.started {
            let p = self.advance(k - 1)?;
            self.valid = self.valid.min(p);
        }
        self.started = true;
        while self.valid < k {
            let p = self.valid;
            if check(p, &self.cursor[..=p]) {
                self.valid += 1;
            } else {
                let q = self.advance(p)?;
                self.valid = self.valid.min(q);
            }
        }
        Some(&self.cursor)
    }

    pub fn next_tuple(&mut self) -> Option<&[u32]> {
        self.next_with(0, |_, _| true)
    }
}
