//! Dense dictionary-form simplex for small linear programs of the form
//! `maximize c·x  subject to  A x <= b, x >= 0` with `b >= 0`, so that the
//! origin is a feasible starting basis.

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Unbounded,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m);
    assert!(b.iter().all(|&bi| bi >= 0.0), "origin must be feasible");

    // x_basic[i] = rhs[i] - sum_j coef[i][j] * x_nonbasic[j]
    let mut coef: Vec<Vec<f64>> = a.to_vec();
    let mut rhs: Vec<f64> = b.to_vec();
    let mut obj: Vec<f64> = c.to_vec();
    let mut value = 0.0;
    let mut nonbasic: Vec<usize> = (0..n).collect();
    let mut basic: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m) + 1000;
    for pivot_count in 0..max_pivots {
        // Dantzig's rule, switching to Bland's rule if pivoting runs long
        let bland = pivot_count > 10 * (n + m);
        let entering = if bland {
            (0..n)
                .filter(|&j| obj[j] > EPS)
                .min_by_key(|&j| nonbasic[j])
        } else {
            (0..n)
                .filter(|&j| obj[j] > EPS)
                .max_by(|&p, &q| obj[p].total_cmp(&obj[q]))
        };
        let Some(s) = entering else {
            let mut x = vec![0.0; n];
            for (i, &var) in basic.iter().enumerate() {
                if var < n {
                    x[var] = rhs[i];
                }
            }
            return LpOutcome::Optimal { value, x };
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if coef[i][s] > EPS {
                let ratio = rhs[i] / coef[i][s];
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basic[i] < basic[r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return LpOutcome::Unbounded;
        };

        let p = coef[r][s];
        for (j, c) in coef[r].iter_mut().enumerate() {
            if j != s {
                *c /= p;
            }
        }
        coef[r][s] = 1.0 / p;
        rhs[r] /= p;
        let (row_r, rhs_r) = (coef[r].clone(), rhs[r]);
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = coef[i][s];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                if j != s {
                    coef[i][j] -= f * row_r[j];
                }
            }
            coef[i][s] = -f * row_r[s];
            rhs[i] = (rhs[i] - f * rhs_r).max(0.0);
        }
        let f = obj[s];
        for j in 0..n {
            if j != s {
                obj[j] -= f * row_r[j];
            }
        }
        obj[s] = -f * row_r[s];
        value += f * rhs_r;
        std::mem::swap(&mut basic[r], &mut nonbasic[s]);
    }
    // cycling guard: report the current basic solution
    let mut x = vec![0.0; n];
    for (i, &var) in basic.iter().enumerate() {
        if var < n {
            x[var] = rhs[i];
        }
    }
    LpOutcome::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  -> 36 at (2, 6)
        let out = maximize(
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        );
        match out {
            LpOutcome::Optimal { value, x } => {
                assert!((value - 36.0).abs() < 1e-12);
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_problem() {
        assert_eq!(
            maximize(&[1.0, 0.0], &[vec![-1.0, 1.0]], &[1.0]),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn degenerate_vertex() {
        // several constraints tight at the optimum (2, 2)
        let out = maximize(
            &[1.0, 1.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 1.0]],
            &[2.0, 2.0, 4.0, 6.0],
        );
        match out {
            LpOutcome::Optimal { value, .. } => assert!((value - 4.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
