//! Lane execution: rayon when the `parallel` feature is on, plain iteration otherwise.
//!
//! Results are always collected in lane order, so the output of a computation
//! never depends on the execution mode.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential execution when built without the `parallel` feature.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `range`, returning results in index order.
    pub fn map<T, F>(self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return range.into_par_iter().map(f).collect();
        }
        range.map(f).collect()
    }

    /// Lowest index for which `f` returns `Some`, with its value.
    pub fn find_first<T, F>(self, range: Range<usize>, f: F) -> Option<T>
    where
        T: Send,
        F: Fn(usize) -> Option<T> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return range.into_par_iter().find_map_first(f);
        }
        range.into_iter().find_map(f)
    }
}

/// Splits `total` items into `lanes` near-equal chunk sizes (first chunks take the remainder).
pub fn chunk_sizes(total: u64, lanes: usize) -> Vec<u64> {
    let lanes = lanes.max(1) as u64;
    let base = total / lanes;
    let extra = total % lanes;
    (0..lanes).map(|i| base + u64::from(i < extra)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_both_modes() {
        let seq = Exec::Sequential.map(0..100, |i| i * i);
        let par = Exec::Parallel.map(0..100, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[9], 81);
    }

    #[test]
    fn find_first_takes_lowest_index() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let hit = exec.find_first(0..1000, |i| (i % 7 == 3 && i > 10).then_some(i));
            assert_eq!(hit, Some(17));
        }
    }

    #[test]
    fn chunks_cover_total() {
        let c = chunk_sizes(10, 3);
        assert_eq!(c, vec![4, 3, 3]);
        assert_eq!(chunk_sizes(5, 0), vec![5]);
    }
}
