// SPDX-License-Identifier: Apache-2.0

//! Execution policy for the data-parallel loops of the crate.
//!
//! Every parallel loop here produces results in a fixed order, so outputs are
//! bit-identical between [`Execution::Parallel`] and [`Execution::Sequential`].
//! Without the `parallel` feature the parallel variant runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg_attr(feature = "parallel", default)]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..len`, preserving index order in the output.
pub fn map_indices<R, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Runs `f(chunk_index, chunk)` over consecutive `chunk_len` sized pieces.
pub fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && data.len() > chunk_len {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_agree() {
        let a = map_indices(Execution::Sequential, 1000, |i| i * i);
        let b = map_indices(Execution::Parallel, 1000, |i| i * i);
        assert_eq!(a, b);

        let mut x = vec![0usize; 4096];
        let mut y = x.clone();
        for_each_chunk_mut(Execution::Sequential, &mut x, 64, |c, s| {
            s.iter_mut().enumerate().for_each(|(i, v)| *v = c * 64 + i)
        });
        for_each_chunk_mut(Execution::Parallel, &mut y, 64, |c, s| {
            s.iter_mut().enumerate().for_each(|(i, v)| *v = c * 64 + i)
        });
        assert_eq!(x, y);
        assert_eq!(x[4095], 4095);
    }
}
