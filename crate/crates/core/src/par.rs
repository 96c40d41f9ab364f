//! Row scheduling shared by the stencil kernels.
//!
//! Every kernel writes a fresh output buffer and only reads its input, so the
//! parallel and sequential paths produce bit-identical results.

/// How a kernel distributes its rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Row-parallel on the current rayon pool. Falls back to sequential when
    /// the crate is built without the `parallel` feature.
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

/// Calls `f(row_index, row)` for each `width`-sized row of `out`.
pub(crate) fn for_each_row<F>(exec: Exec, out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    debug_assert!(width > 0 && out.len().is_multiple_of(width));
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            out.par_chunks_mut(width)
                .enumerate()
                .for_each(|(y, row)| f(y, row));
        }
        _ => {
            for (y, row) in out.chunks_mut(width).enumerate() {
                f(y, row);
            }
        }
    }
}
