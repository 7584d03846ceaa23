use super::bounds::{ln_two_sqrt_n_over_delta, pb_lambda_upper_raw};
use super::{pb_kl_bound, quad_form, LossTable, PacBayesQuery, PredictionTable};
use crate::concentration::{BoundResult, Method};
use crate::divergences::{categorical_kl, ProbVec};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MvKind {
    FirstOrder,
    Tandem { lambda: f64 },
    Disagreement { lambda: f64, gamma: f64 },
}

/// sign(Σ_h ρ(h) h(x)), ties resolved to +1.
pub fn mv_predict(rho: &ProbVec, votes: &[i8]) -> Result<i8> {
    if votes.len() != rho.len() {
        return Err(Error::LengthMismatch { expected: rho.len(), got: votes.len() });
    }
    let s: f64 = rho.weights().iter().zip(votes).map(|(w, v)| w * *v as f64).sum();
    Ok(if s < 0.0 { -1 } else { 1 })
}

/// The three terms of the tandem/disagreement decomposition under ρ⊗ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2dTerms {
    pub gibbs_loss: f64,
    pub tandem: f64,
    pub disagreement: f64,
}

pub fn l2d_terms(table: &LossTable, rho: &ProbVec) -> Result<L2dTerms> {
    let preds = PredictionTable::from_loss_table(table)
        .ok_or_else(|| Error::Domain("decomposition needs a prediction table".into()))?;
    check_rows(table, rho)?;
    let (tandem, _) = table.tandem_matrix()?;
    Ok(L2dTerms {
        gibbs_loss: rho.expect(&table.empirical_losses()),
        tandem: quad_form(rho.weights(), &tandem),
        disagreement: quad_form(rho.weights(), &preds.disagreement_matrix()),
    })
}

/// First-order oracle 2E_ρ[L] and second-order oracle 4E_{ρ²}[L(h, h')]
/// evaluated on the table's columns.
pub fn mv_oracles(table: &LossTable, rho: &ProbVec) -> Result<(f64, f64)> {
    check_rows(table, rho)?;
    let (tandem, _) = table.tandem_matrix()?;
    Ok((2.0 * rho.expect(&table.empirical_losses()), 4.0 * quad_form(rho.weights(), &tandem)))
}

fn check_rows(table: &LossTable, rho: &ProbVec) -> Result<()> {
    if rho.len() != table.rows() {
        return Err(Error::LengthMismatch { expected: table.rows(), got: rho.len() });
    }
    Ok(())
}

/// Bounds on the loss of the ρ-weighted majority vote. Values are clipped to
/// [0, 1]; `unclipped` holds the raw value.
pub fn mv_bound(
    kind: MvKind,
    table: &LossTable,
    rho: &ProbVec,
    pi: &ProbVec,
    delta: f64,
    unlabeled: Option<&PredictionTable>,
) -> Result<BoundResult> {
    check_rows(table, rho)?;
    let kl = categorical_kl(rho, pi)?;
    let emp = rho.expect(&table.empirical_losses());
    match kind {
        MvKind::FirstOrder => {
            let q = PacBayesQuery::new(rho.clone(), pi.clone(), table.n_eff(), delta)?;
            let inner = pb_kl_bound(&q, emp)?;
            Ok(BoundResult::new(2.0 * inner.value, delta, Method::MajorityVoteFirstOrder)?
                .with("gibbs_bound", inner.value)
                .with("emp_loss", emp)
                .with("kl", kl)
                .clip_unit(true))
        }
        MvKind::Tandem { lambda } => {
            check_lambda(lambda)?;
            if !table.has_predictions() {
                return domain("tandem bound needs a prediction table");
            }
            let (tm, n) = table.tandem_matrix()?;
            let tandem = quad_form(rho.weights(), &tm);
            let nf = n as f64;
            let c = 1.0 - lambda / 2.0;
            let v = 4.0 * (tandem / c + (2.0 * kl + ln_two_sqrt_n_over_delta(nf, delta)) / (lambda * c * nf));
            Ok(BoundResult::new(v, delta, Method::MajorityVoteTandem)?
                .with("tandem", tandem)
                .with("n", nf)
                .with("lambda", lambda)
                .with("kl", kl)
                .clip_unit(true))
        }
        MvKind::Disagreement { lambda, gamma } => {
            check_lambda(lambda)?;
            if !(gamma > 0.0) || !gamma.is_finite() {
                return domain(format!("gamma = {gamma} must be positive"));
            }
            let own;
            let source = match unlabeled {
                Some(u) => {
                    if u.rows() != table.rows() {
                        return Err(Error::LengthMismatch { expected: table.rows(), got: u.rows() });
                    }
                    u
                }
                None => {
                    own = PredictionTable::from_loss_table(table)
                        .ok_or_else(|| Error::Domain("disagreement bound needs predictions".into()))?;
                    &own
                }
            };
            let d = quad_form(rho.weights(), &source.disagreement_matrix());
            let nf = table.n_eff() as f64;
            let mf = source.cols() as f64;
            let upper = pb_lambda_upper_raw(emp, kl, nf, (4.0 * nf.sqrt() / delta).ln(), lambda);
            let lower_d = (1.0 - gamma / 2.0) * d - (2.0 * kl + (4.0 * mf.sqrt() / delta).ln()) / (gamma * mf);
            let v = 4.0 * upper - 2.0 * lower_d;
            Ok(BoundResult::new(v, delta, Method::MajorityVoteDisagreement)?
                .with("disagreement", d)
                .with("gibbs_upper", upper)
                .with("disagreement_lower", lower_d)
                .with("kl", kl)
                .clip_unit(true))
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return domain(format!("lambda = {lambda} outside (0, 2)"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pac_bayes::{pb_lambda_bound, LambdaSide};
    use crate::rng::rng_from;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn predict_examples() {
        let u = ProbVec::uniform(3).unwrap();
        assert_eq!(mv_predict(&u, &[1, 1, -1]).unwrap(), 1);
        let w = ProbVec::new(vec![0.6, 0.4]).unwrap();
        assert_eq!(mv_predict(&w, &[-1, 1]).unwrap(), -1);
        let h = ProbVec::uniform(2).unwrap();
        assert_eq!(mv_predict(&h, &[-1, 1]).unwrap(), 1);
        assert!(mv_predict(&h, &[1]).is_err());
    }

    fn disjoint(m: usize) -> LossTable {
        let mut preds = vec![1i8; m * m];
        for h in 0..m {
            preds[h * m + h] = -1;
        }
        LossTable::from_predictions(m, preds, &vec![1; m]).unwrap()
    }

    #[test]
    fn disjoint_errors_oracles() {
        let t = disjoint(4);
        let (first, second) = mv_oracles(&t, &ProbVec::uniform(4).unwrap()).unwrap();
        assert_eq!(first, 0.5);
        assert_eq!(second, 0.25);
    }

    #[test]
    fn single_hypothesis_tandem_is_pb_lambda() {
        let t = LossTable::from_predictions(1, vec![1, -1, 1, 1, -1, 1], &[1; 6]).unwrap();
        let u = ProbVec::uniform(1).unwrap();
        let b = mv_bound(MvKind::Tandem { lambda: 0.7 }, &t, &u, &u, 0.05, None).unwrap();
        let q = PacBayesQuery::new(u.clone(), u, 6, 0.05).unwrap();
        let inner = pb_lambda_bound(&q, 2.0 / 6.0, LambdaSide::Upper { lambda: 0.7 }).unwrap();
        assert_abs_diff_eq!(b.get("unclipped").unwrap(), 4.0 * inner.get("unclipped").unwrap(), epsilon = 1e-12);
        assert_eq!(b.get("tandem"), Some(2.0 / 6.0));
    }

    #[test]
    fn second_order_needs_predictions() {
        let t = LossTable::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let u = ProbVec::uniform(2).unwrap();
        assert!(mv_bound(MvKind::Tandem { lambda: 1.0 }, &t, &u, &u, 0.05, None).is_err());
        assert!(mv_bound(MvKind::Disagreement { lambda: 1.0, gamma: 1.0 }, &t, &u, &u, 0.05, None).is_err());
        assert!(mv_bound(MvKind::FirstOrder, &t, &u, &u, 0.05, None).is_ok());
    }

    #[test]
    fn decomposition_and_orderings_on_random_tables() {
        let mut rng = rng_from(21);
        for _ in 0..200 {
            let m = rng.random_range(1..6);
            let n = rng.random_range(1..30);
            let labels: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let preds: Vec<i8> = (0..m * n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let t = LossTable::from_predictions(m, preds, &labels).unwrap();
            let rho = ProbVec::from_unnormalized((0..m).map(|_| rng.random::<f64>() + 0.01).collect()).unwrap();
            let d = l2d_terms(&t, &rho).unwrap();
            assert!((d.tandem - (d.gibbs_loss - 0.5 * d.disagreement)).abs() <= 1e-12);
            assert!(d.tandem <= d.gibbs_loss + 1e-15);
            let pi = ProbVec::uniform(m).unwrap();
            let b = mv_bound(MvKind::FirstOrder, &t, &rho, &pi, 0.05, None).unwrap();
            assert!(b.get("unclipped").unwrap() >= 2.0 * d.gibbs_loss);
            let dis = mv_bound(MvKind::Disagreement { lambda: 0.5, gamma: 0.5 }, &t, &rho, &pi, 0.05, None).unwrap();
            assert!((0.0..=1.0).contains(&dis.value));
        }
    }
}
