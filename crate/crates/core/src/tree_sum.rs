//! Fixed balanced reduction trees.
//!
//! Sums are always formed by splitting the operand list at its midpoint and
//! adding the two halves, so the rounding pattern depends only on the list
//! length and order, never on scheduling.

pub(crate) fn tree_sum_scalars(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            tree_sum_scalars(a) + tree_sum_scalars(b)
        }
    }
}

/// Element-wise tree sum of equally sized vectors; empty input gives zeros.
pub(crate) fn tree_sum_vectors(xs: &[Vec<f64>], width: usize) -> Vec<f64> {
    match xs.len() {
        0 => vec![0.0; width],
        1 => xs[0].clone(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            let mut left = tree_sum_vectors(a, width);
            let right = tree_sum_vectors(b, width);
            for (l, r) in left.iter_mut().zip(right) {
                *l += r;
            }
            left
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_match_naive_on_integers() {
        let xs: Vec<f64> = (1..=17).map(f64::from).collect();
        assert_eq!(tree_sum_scalars(&xs), 153.0);
        let vs = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        assert_eq!(tree_sum_vectors(&vs, 2), vec![9.0, 12.0]);
        assert_eq!(tree_sum_vectors(&[], 3), vec![0.0; 3]);
    }
}
