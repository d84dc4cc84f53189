//! Execution strategy for the data-parallel kernels.
//!
//! Rayon is only linked with the `parallel` feature. Without it,
//! [`Strategy::Parallel`] silently runs sequentially, so call sites never need
//! their own `cfg` switches.

/// How the heavy kernels (row reduction, operator matrices, batches) run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

impl Strategy {
    /// Whether this strategy actually fans out on this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Strategy::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, U, F>(self, items: Vec<T>, f: F) -> Vec<U>
    where
        T: Send,
        U: Send,
        F: Fn(T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Strategy::Parallel {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
        items.into_iter().map(f).collect()
    }

    /// Applies `f` to every element of `items` in place.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Strategy::Parallel {
            use rayon::prelude::*;
            items.par_iter_mut().for_each(f);
            return;
        }
        items.iter_mut().for_each(f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Strategy::Sequential.map(xs.clone(), |x| x * x);
        let b = Strategy::Parallel.map(xs, |x| x * x);
        assert_eq!(a, b);
        let mut v = vec![1u64; 100];
        Strategy::Parallel.for_each_mut(&mut v, |x| *x += 1);
        assert!(v.iter().all(|&x| x == 2));
    }
}
