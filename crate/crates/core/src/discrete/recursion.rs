//! Forward recursion for the survival probability when `c = 1`.

use crate::dist::IntegerPmf;
use crate::error::{Result, RuinError};
use crate::model::Convention;
use crate::scalar::Scalar;
use crate::table::SurvivalTable;

/// `phi(u) = (phi(u-1) - sum_{k=1}^{u} phi(u-k) h_k) / h_0` for `u = 1..=u_max`,
/// started from `phi(0) = phi0` (premium 1 per period, weak convention).
pub fn survival_recursion<T: Scalar>(
    pmf: &IntegerPmf<T>,
    phi0: T,
    u_max: usize,
) -> Result<SurvivalTable<T>> {
    if phi0 < T::zero() || phi0 > T::one() {
        return Err(RuinError::Domain(format!("phi(0) = {phi0:?} outside [0, 1]")));
    }
    let h0 = pmf.prob(0);
    if h0.is_zero() {
        return Err(RuinError::NeedsShift);
    }
    let mut phi = Vec::with_capacity(u_max + 1);
    phi.push(phi0);
    for u in 1..=u_max {
        let mut acc = phi[u - 1].clone();
        for k in 1..=u.min(pmf.max_value()) {
            acc = acc - phi[u - k].clone() * pmf.prob(k);
        }
        phi.push(acc / h0.clone());
    }
    Ok(SurvivalTable::discrete(Convention::Weak, phi))
}

/// Multipliers with `phi(u) = alpha_u * phi(0)`: the recursion started from 1.
pub fn alpha_coefficients<T: Scalar>(pmf: &IntegerPmf<T>, u_max: usize) -> Result<Vec<T>> {
    Ok(survival_recursion(pmf, T::one(), u_max)?.phi)
}
