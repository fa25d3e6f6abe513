//! Batch map helpers. With the `parallel` feature (default) independent work
//! items fan out over rayon; without it the same entry points run
//! sequentially. Items must be independently seeded so results do not depend
//! on scheduling; outputs always come back in input order.

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn par_map_indexed<O: Send>(n: usize, f: impl Fn(usize) -> O + Sync + Send) -> Vec<O> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map_indexed<O: Send>(n: usize, f: impl Fn(usize) -> O + Sync + Send) -> Vec<O> {
    seq_map_indexed(n, f)
}

/// Always-sequential twin of [`par_map_indexed`]; the bench suite compares
/// the two on identical workloads.
pub fn seq_map_indexed<O: Send>(n: usize, f: impl Fn(usize) -> O + Sync + Send) -> Vec<O> {
    (0..n).map(f).collect()
}

/// Maps over a slice of inputs, parallel when enabled.
#[cfg(feature = "parallel")]
pub fn par_map<I: Sync, O: Send>(items: &[I], f: impl Fn(&I) -> O + Sync + Send) -> Vec<O> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<I: Sync, O: Send>(items: &[I], f: impl Fn(&I) -> O + Sync + Send) -> Vec<O> {
    items.iter().map(f).collect()
}
