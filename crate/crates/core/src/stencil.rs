//! Finite-difference weights on arbitrary 1D node sets.

/// Fornberg's recursion: weights for derivatives 0..=`max_deriv` at `z` on `nodes`.
///
/// Returns `w[m][j]`, the weight of node `j` for the m-th derivative.
pub fn fornberg(z: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Integer-offset weights for the `deriv`-th derivative at offset 0 over offsets `lo..=hi`.
pub fn offset_weights(lo: i64, hi: i64, deriv: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (lo..=hi).map(|o| o as f64).collect();
    let mut w = fornberg(0.0, &nodes, deriv).swap_remove(deriv);
    // clean exact zeros lost to rounding, e.g. the centre of a central first derivative
    for x in w.iter_mut() {
        if x.abs() < 1e-14 {
            *x = 0.0;
        }
    }
    w
}

/// Binomial-coefficient weights of the undivided difference δ^{2r}, centred.
pub fn undivided_even_difference(r: usize) -> Vec<f64> {
    let n = 2 * r;
    let mut w = vec![0.0; n + 1];
    let mut binom = 1.0;
    for (k, x) in w.iter_mut().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *x = sign * binom;
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_fourth_order_first_derivative() {
        let w = offset_weights(-2, 2, 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn central_fourth_order_second_derivative() {
        let w = offset_weights(-2, 2, 2);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn one_sided_weights_are_exact_on_polynomials() {
        for deriv in 1..=2 {
            let w = offset_weights(0, 5, deriv);
            for p in 0..=4 {
                let got: f64 = w.iter().enumerate().map(|(j, c)| c * (j as f64).powi(p)).sum();
                let expect = match (deriv, p) {
                    (1, 1) => 1.0,
                    (2, 2) => 2.0,
                    _ => 0.0,
                };
                assert!((got - expect).abs() < 1e-10, "deriv {deriv} p {p}: {got}");
            }
        }
    }

    #[test]
    fn undivided_difference_matches_binomials() {
        assert_eq!(undivided_even_difference(1), vec![1.0, -2.0, 1.0]);
        assert_eq!(undivided_even_difference(3), vec![1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0]);
    }
}
