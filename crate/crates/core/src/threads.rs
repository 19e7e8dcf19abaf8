//! Worker pool sizing. `GRAPHSPARSE_THREADS` caps the number of workers used
//! for per-sample work; results never depend on the worker count.

use std::sync::OnceLock;

pub const THREADS_ENV: &str = "GRAPHSPARSE_THREADS";

/// Below this many samples the per-sample loops stay on the calling thread.
pub(crate) const PARALLEL_MIN_SAMPLES: usize = 4096;

fn parse_threads(value: Option<&str>) -> Option<usize> {
    value?.trim().parse::<usize>().ok().filter(|&n| n > 0)
}

/// The pool used by the library, sized from the environment on first use.
pub(crate) fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new().thread_name(|i| format!("graphsparse-{i}"));
        if let Some(n) = parse_threads(std::env::var(THREADS_ENV).ok().as_deref()) {
            builder = builder.num_threads(n);
        }
        builder.build().expect("failed to build worker pool")
    })
}

pub fn worker_count() -> usize {
    pool().current_num_threads()
}

/// Fills `out[i] = f(i)`, in parallel for large inputs.
pub(crate) fn fill<T: Send>(out: &mut [T], f: impl Fn(usize) -> T + Sync + Send) {
    if out.len() < PARALLEL_MIN_SAMPLES || worker_count() == 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
        return;
    }
    use rayon::prelude::*;
    pool().install(|| out.par_iter_mut().enumerate().for_each(|(i, slot)| *slot = f(i)));
}
