//! Exact rank of small integer matrices over the rationals.
//!
//! Used as the oracle for Betti numbers on desk-scale complexes, where the
//! floating-point rank could in principle misjudge a tiny singular value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Num;

/// Rank of a dense matrix over any exact field via Gaussian elimination.
pub fn rank_over<F: Num + Clone>(mut rows: Vec<Vec<F>>) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank][col].clone();
        for r in rank + 1..nrows {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone() / p.clone();
            for c in col..ncols {
                let sub = factor.clone() * rows[rank][c].clone();
                rows[r][c] = rows[r][c].clone() - sub;
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Exact rank of an integer matrix given as rows.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let q: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect()
        })
        .collect();
    rank_over(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(integer_rank(&[vec![1, 0], vec![0, 1]]), 2);
        assert_eq!(integer_rank(&[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(integer_rank(&[]), 0);
    }

    #[test]
    fn dependent_rows_are_detected() {
        // Incidence matrix of a hollow triangle: rows sum to zero.
        let b1 = vec![vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]];
        assert_eq!(integer_rank(&b1), 2);
    }

    #[test]
    fn needs_fractions() {
        assert_eq!(integer_rank(&[vec![2, 3], vec![3, 5]]), 2);
        assert_eq!(integer_rank(&[vec![2, 4], vec![3, 6]]), 1);
    }
}
