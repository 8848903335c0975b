//! Exact arithmetic in finite chain rings and exhaustive verification of
//! restricted-variable Chevalley–Warning type theorems and their zero-sum,
//! graph and interpolation corollaries.

pub mod chainring;
pub mod error;
pub mod graphdiv;
mod grid;
pub mod interp;
pub mod mbound;
pub mod mpoly;
pub mod sampling;
pub mod warning;
pub mod zerosum;

pub use error::{Error, Result};

use std::cell::Cell;

thread_local! {
    static CHARGED: Cell<u128> = const { Cell::new(0) };
}

/// Cap on the number of cases an exhaustive enumeration may visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(100_000_000)
    }
}

impl Budget {
    pub fn check(self, required: u128) -> Result<()> {
        if required > self.0 as u128 {
            Err(Error::BudgetExceeded { required, budget: self.0 })
        } else {
            charge(required);
            Ok(())
        }
    }
}

/// Adds `n` cases to the count kept for the current thread.
pub fn charge(n: u128) {
    CHARGED.with(|c| c.set(c.get().saturating_add(n)));
}

/// Runs `f` and returns the grid points and search states it charged
/// against budgets on this thread. Calls nest: an inner measurement is not
/// added to the outer one.
pub fn measure_usage<R>(f: impl FnOnce() -> R) -> (R, u128) {
    let outer = CHARGED.with(|c| c.replace(0));
    let r = f();
    let used = CHARGED.with(|c| c.replace(outer));
    (r, used)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_is_measured_per_call() {
        let (inner, outer) = measure_usage(|| {
            Budget(10).check(4).unwrap();
            assert!(Budget(10).check(11).is_err());
            let ((), inner) = measure_usage(|| Budget(10).check(7).unwrap());
            charge(2);
            inner
        });
        assert_eq!((inner, outer), (7, 6));
    }
}
