//! Sample-level execution. With the `parallel` feature (default) independent
//! samples are spread over the rayon pool; without it everything runs on the
//! calling thread. Results always come back in index order, so the output
//! never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether this build can actually run in parallel.
    pub fn available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Evaluates `f(scratch, i)` for `i in 0..count`. `init` builds one
    /// scratch value per worker.
    pub fn map_init<S, T, I, F>(self, count: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..count).into_par_iter().map_init(init, |s, i| f(s, i)).collect(),
            _ => {
                let mut scratch = init();
                (0..count).map(|i| f(&mut scratch, i)).collect()
            }
        }
    }

    /// Applies `f(i, &mut items[i])` to every item.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x)),
            _ => items.iter_mut().enumerate().for_each(|(i, x)| f(i, x)),
        }
    }

    pub fn map<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.map_init(count, || (), |_, i| f(i))
    }

    /// Sizes the global worker pool. Only the first call has an effect, and
    /// the sequential build ignores it.
    pub fn set_threads(threads: usize) -> Result<()> {
        if threads == 0 {
            return Err(Error::InvalidParameter("thread count must be at least 1".into()));
        }
        #[cfg(feature = "parallel")]
        {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let f = |s: &mut Vec<u64>, i: usize| {
            s.push(i as u64);
            (i as u64).wrapping_mul(0x9e37_79b9)
        };
        let a = Execution::Parallel.map_init(1000, Vec::new, f);
        let b = Execution::Sequential.map_init(1000, Vec::new, f);
        assert_eq!(a, b);
        assert_eq!(Execution::Sequential.map(3, |i| i * 2), vec![0, 2, 4]);
    }
}
