//! Seeded replica runner.

use crate::error::{Error, Result};
use crate::rng::{experiment_id, replica_seed};
use rayon::prelude::*;

/// Run `n` replicas on a pool of `threads` workers and return the results in
/// replica order.
///
/// Replica `i` receives the seed `replica_seed(master, experiment_id(name), i)`
/// and a per-worker scratch value built by `init`, so the output does not depend
/// on the number of workers or on completion order.
pub fn run_replicas<S, T, I, F>(name: &str, master: u64, n: usize, threads: usize, init: I, f: F) -> Result<Vec<T>>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, u64) -> Result<T> + Sync + Send,
{
    let exp = experiment_id(name);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map_init(&init, |s, i| f(s, i, replica_seed(master, exp, i as u64))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_values_do_not_depend_on_threads() {
        let run = |t| run_replicas("probe", 7, 64, t, || (), |_, i, seed| Ok((i, seed))).unwrap();
        let a = run(1);
        assert_eq!(a, run(4));
        assert!(a.iter().enumerate().all(|(i, r)| r.0 == i));
    }

    #[test]
    fn first_error_is_returned() {
        let r: Result<Vec<()>> = run_replicas(
            "probe",
            1,
            10,
            2,
            || (),
            |_, i, _| {
                if i == 3 {
                    Err(Error::Domain("boom".into()))
                } else {
                    Ok(())
                }
            },
        );
        assert!(r.is_err());
    }
}
