//! Data-parallel execution helper for batch verification work.
//!
//! Campaigns and probes fan independent API calls out through an
//! [`Executor`]; results come back in input order so aggregation is
//! identical whichever mode ran. Without the `parallel` feature the
//! parallel mode degrades to sequential execution and rayon is not linked.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Up to `workers` items in flight at once.
    Parallel { workers: usize },
}

impl ExecMode {
    pub fn with_limit(workers: usize) -> ExecMode {
        if workers <= 1 {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel { workers }
        }
    }
}

#[derive(Debug)]
pub struct Executor {
    mode: ExecMode,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn new(mode: ExecMode) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = match mode {
                ExecMode::Parallel { workers } => Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .expect("build worker pool"),
                ),
                ExecMode::Sequential => None,
            };
            Self { mode, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self { mode }
        }
    }

    pub fn sequential() -> Self {
        Self::new(ExecMode::Sequential)
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    /// Applies `f` to every item, preserving input order in the output.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let items: Vec<u64> = (0..500).collect();
        let seq = Executor::sequential().map(&items, |&x| x * x);
        let par = Executor::new(ExecMode::with_limit(4)).map(&items, |&x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[3], 9);
    }

    #[test]
    fn limit_one_is_sequential() {
        assert_eq!(ExecMode::with_limit(1), ExecMode::Sequential);
        assert_eq!(ExecMode::with_limit(0), ExecMode::Sequential);
        assert_eq!(ExecMode::with_limit(4), ExecMode::Parallel { workers: 4 });
    }
}
