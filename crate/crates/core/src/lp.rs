//! Exact phase-one simplex for feasibility problems `A x >= b, x >= 0`.
//!
//! Dense rational tableau with Bland's rule; termination is guaranteed and the
//! final simplex multipliers are a Farkas certificate when the system is
//! infeasible.

use num_traits::{Signed, Zero};

use crate::linalg::{rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// A nonnegative solution.
    Feasible(Vec<Rational>),
    /// `y >= 0` with `yᵀA <= 0` and `yᵀb > 0`.
    Infeasible(Vec<Rational>),
}

pub fn feasible_nonneg(a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let rows = a.len();
    let m = a.first().map_or(0, |r| r.len());
    if rows == 0 {
        return LpOutcome::Feasible(vec![Rational::zero(); m]);
    }
    // columns: x (m) | surplus (rows) | artificial (rows) | rhs
    let cols = m + 2 * rows;
    let mut sign = vec![rat(1); rows];
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(rows + 1);
    for i in 0..rows {
        let mut row = vec![Rational::zero(); cols + 1];
        row[..m].clone_from_slice(&a[i]);
        row[m + i] = rat(-1);
        row[cols] = b[i].clone();
        if b[i].is_negative() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
            sign[i] = rat(-1);
        }
        row[m + rows + i] = rat(1);
        t.push(row);
    }
    // reduced costs of the phase-one objective Σ artificials
    let mut obj = vec![Rational::zero(); cols + 1];
    for j in 0..cols + 1 {
        if (m + rows..m + 2 * rows).contains(&j) {
            continue;
        }
        obj[j] = -t.iter().map(|r| r[j].clone()).sum::<Rational>();
    }
    let mut basis: Vec<usize> = (m + rows..m + 2 * rows).collect();

    while let Some(enter) = (0..cols).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][cols] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // phase one is bounded below by zero, so some row always qualifies
        let (pr, _) = leave.expect("phase one objective is bounded");
        let inv = t[pr][enter].recip();
        for x in t[pr].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
        let f = obj[enter].clone();
        for (x, p) in obj.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
        basis[pr] = enter;
    }

    // -obj[cols] is the optimal phase-one value
    if (-obj[cols].clone()).is_positive() {
        let y = (0..rows).map(|i| (rat(1) - &obj[m + rows + i]) * &sign[i]).collect();
        return LpOutcome::Infeasible(y);
    }
    let mut x = vec![Rational::zero(); m];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < m {
            x[bv] = t[i][cols].clone();
        }
    }
    LpOutcome::Feasible(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    #[test]
    fn feasible_system() {
        let a = m(&[&[1, -1], &[-1, 2]]);
        let b = vec![rat(1), rat(1)];
        match feasible_nonneg(&a, &b) {
            LpOutcome::Feasible(x) => {
                assert!(x.iter().all(|v| !v.is_negative()));
                for (row, bi) in a.iter().zip(&b) {
                    assert!(dot(row, &x) >= *bi);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_system_has_certificate() {
        // x1 - x2 >= 1 and x2 - x1 >= 1
        let a = m(&[&[1, -1], &[-1, 1]]);
        let b = vec![rat(1), rat(1)];
        match feasible_nonneg(&a, &b) {
            LpOutcome::Infeasible(y) => {
                assert!(y.iter().all(|v| !v.is_negative()));
                for j in 0..2 {
                    let col: Rational = a.iter().zip(&y).map(|(r, yi)| &r[j] * yi).sum();
                    assert!(!col.is_positive());
                }
                assert!(dot(&y, &b).is_positive());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
