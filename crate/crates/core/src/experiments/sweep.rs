use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::results::{Column, GridAxis, SweepGrid};

/// How grid points are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// Uses the current rayon pool. Without the `parallel` feature this is
    /// the same as `Serial`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

/// [`sweep_with`] using the default execution mode.
pub fn sweep<F>(x: GridAxis, y: GridAxis, quantity: Column, point: F) -> Result<SweepGrid>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    sweep_with(Execution::default(), x, y, quantity, point)
}

/// Evaluates `point(x, y)` on every grid node.
///
/// Values are stored in row-major order (x fastest) regardless of the order
/// in which points finish. The first failing point in that order is reported
/// with its grid coordinates.
pub fn sweep_with<F>(
    execution: Execution,
    x: GridAxis,
    y: GridAxis,
    quantity: Column,
    point: F,
) -> Result<SweepGrid>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let nx = x.values.len();
    let n = nx * y.values.len();
    let eval = |k: usize| -> Result<f64> {
        let (ix, iy) = (k % nx, k / nx);
        let (xv, yv) = (x.values[ix], y.values[iy]);
        let wrap = |source: Error| Error::GridPoint {
            ix,
            iy,
            x: xv,
            y: yv,
            source: Box::new(source),
        };
        let v = point(xv, yv).map_err(wrap)?;
        if !v.is_finite() {
            return Err(wrap(Error::NonFinite));
        }
        Ok(v)
    };
    let results: Vec<Result<f64>> = match execution {
        Execution::Serial => (0..n).map(eval).collect(),
        Execution::Parallel => parallel_map(n, &eval),
    };
    let values = results.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(SweepGrid {
        x,
        y,
        quantity,
        values,
        metadata: BTreeMap::new(),
    })
}

#[cfg(feature = "parallel")]
fn parallel_map<F>(n: usize, f: &F) -> Vec<Result<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<F>(n: usize, f: &F) -> Vec<Result<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    (0..n).map(f).collect()
}
