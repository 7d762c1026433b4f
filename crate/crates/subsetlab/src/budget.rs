use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::{Error, Result};

/// Cap on how many items an enumeration (subsets, types, dense matrix
/// entries) may produce before the operation refuses to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

pub const DEFAULT_BUDGET: u64 = 10_000_000;

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Errors unless `required <= budget`.
    pub fn admit(&self, required: &BigInt, what: &str) -> Result<()> {
        let ok = required.to_u64().map(|r| r <= self.0).unwrap_or(false);
        if ok {
            Ok(())
        } else {
            Err(Error::BudgetExceeded {
                what: what.to_string(),
                required: required.to_string(),
                budget: self.0,
            })
        }
    }

    pub fn admit_usize(&self, required: usize, what: &str) -> Result<()> {
        self.admit(&BigInt::from(required), what)
    }
}
