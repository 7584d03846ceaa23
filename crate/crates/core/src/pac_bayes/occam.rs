use super::LossTable;
use crate::concentration::{BoundResult, Method};
use crate::divergences::{kl_inverse_unchecked, Direction, ProbVec};
use crate::error::{check_delta, domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccamFlavor {
    Hoeffding,
    Kl,
}

/// Per-hypothesis bounds with the confidence budget δ split as π(h)δ.
/// π may be sub-normalized; hypotheses with π(h) = 0 get the trivial bound 1.
pub fn occam_bound(table: &LossTable, pi: &ProbVec, delta: f64, flavor: OccamFlavor) -> Result<Vec<BoundResult>> {
    check_delta(delta)?;
    if pi.len() != table.rows() {
        return Err(Error::LengthMismatch { expected: table.rows(), got: pi.len() });
    }
    let total: f64 = pi.weights().iter().sum();
    if total > 1.0 + 1e-9 {
        return domain(format!("prior mass {total} exceeds 1"));
    }
    let emp = table.empirical_losses();
    let method = match flavor {
        OccamFlavor::Hoeffding => Method::OccamHoeffding,
        OccamFlavor::Kl => Method::OccamKl,
    };
    (0..table.rows())
        .map(|h| {
            let p = pi.weights()[h];
            let n = table.count(h) as f64;
            let value = if p == 0.0 {
                1.0
            } else {
                let budget = (1.0 / (p * delta)).ln();
                match flavor {
                    OccamFlavor::Hoeffding => (emp[h] + (budget / (2.0 * n)).sqrt()).min(1.0),
                    OccamFlavor::Kl => kl_inverse_unchecked(emp[h], budget / n, Direction::Upper),
                }
            };
            Ok(BoundResult::new(value, delta, method)?.with("emp_loss", emp[h]).with("prior", p))
        })
        .collect()
}

/// ln π(h) = −(d+1) ln 2 − 2^d ln 2 for a tree of depth d.
pub fn tree_prior_ln(depth: u32) -> f64 {
    -((depth as f64 + 1.0) + 2f64.powi(depth as i32)) * std::f64::consts::LN_2
}

/// π(h) = 2^{−(d+1)} · 2^{−2^d}; underflows to 0 for deep trees, use
/// [`tree_prior_ln`] there.
pub fn tree_prior(depth: u32) -> f64 {
    if depth > 20 {
        return tree_prior_ln(depth).exp();
    }
    let exp = depth as i32 + 1 + (1i32 << depth);
    2f64.powi(-exp)
}
