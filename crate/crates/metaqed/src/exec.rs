//! Order-preserving data-parallel helpers.
//!
//! Every map returns results in input order, so reductions performed by the
//! caller are identical for parallel and sequential execution.

/// Selects how independent work items are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Data-parallel when the `parallel` feature is enabled.
    #[default]
    Auto,
    Sequential,
}

impl Execution {
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Auto {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Auto {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<usize> = (0..1000).collect();
        let a = Execution::Auto.map(&items, |&i| i * i);
        let b = Execution::Sequential.map(&items, |&i| i * i);
        assert_eq!(a, b);
        assert_eq!(Execution::Auto.map_range(17, |i| i), (0..17).collect::<Vec<_>>());
    }
}
