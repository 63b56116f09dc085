#[cfg(feature = "parallel")]
use rayon::prelude::*;

use alloc::vec::Vec;

/// Execution strategy for conversion and kernels.
///
/// `Parallel` distributes work over the current rayon pool. Without the
/// `parallel` feature it runs sequentially. Both strategies produce
/// identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    #[inline]
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    pub(crate) fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel. Output order is always
/// index order.
pub(crate) fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Visits `data` in chunks of `chunk` elements with a per-worker state built
/// by `init`, collecting one result per chunk in chunk order.
pub(crate) fn map_chunks_mut<T, S, R, I, F>(
    exec: Exec,
    data: &mut [T],
    chunk: usize,
    init: I,
    f: F,
) -> Vec<R>
where
    T: Send,
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return data
            .par_chunks_mut(chunk)
            .enumerate()
            .map_init(&init, |state, (idx, c)| f(state, idx, c))
            .collect();
    }
    let _ = exec;
    let mut state = init();
    data.chunks_mut(chunk)
        .enumerate()
        .map(|(idx, c)| f(&mut state, idx, c))
        .collect()
}

/// Runs `f` over `0..n` split into fixed blocks of `block` indices. The
/// block boundaries never depend on the thread count.
pub(crate) fn map_blocks<S, R, I, F>(exec: Exec, n: usize, block: usize, init: I, f: F) -> Vec<R>
where
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, core::ops::Range<usize>) -> R + Sync + Send,
{
    let blocks = n.div_ceil(block);
    let range = |b: usize| b * block..((b + 1) * block).min(n);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..blocks)
            .into_par_iter()
            .map_init(&init, |state, b| f(state, range(b)))
            .collect();
    }
    let _ = exec;
    let mut state = init();
    (0..blocks).map(|b| f(&mut state, range(b))).collect()
}
