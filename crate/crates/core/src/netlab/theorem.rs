//! The two constructive indicator networks of the topological-discrepancy
//! theorem, and the cluster means of the Gaussian mixture they classify.
//!
//! Both networks have two hidden layers of four indicator neurons. The first
//! layer tests the sign of `x·e1` (and, for `f2`, of `x·e2`); the second layer
//! copies it (`f1`) or forms the four quadrant indicators (`f2`).
//!
//! The readouts are written so that `f1(x) = 1{x·e1 < 0}` (Bayes optimal for
//! the clean mixture `D1`) and `f2(x) = 1{(x·e1)(x·e2) < 0}` (Bayes optimal
//! for the label-flipped mixture `D3`). Only the readout differs from the
//! hidden-layer construction, so the traced neurons are unaffected.

use super::{Activation, Layer, NetworkSpec, OutputRule};

/// The four cluster means `2(±e2 ± e1)·σ·sqrt(ln(1/η))`, ordered
/// `μ1 = (-,-)`, `μ2 = (+,-)`, `μ3 = (-,+)`, `μ4 = (+,+)` in the `(e1, e2)`
/// coordinates and zero elsewhere.
pub fn gaussian_pair_means(sigma: f64, eta: f64, dim: usize) -> [Vec<f64>; 4] {
    let scale = 2.0 * sigma * (1.0 / eta).ln().sqrt();
    let mean = |s1: f64, s2: f64| {
        let mut v = vec![0.0; dim];
        v[0] = s1 * scale;
        v[1] = s2 * scale;
        v
    };
    [
        mean(-1.0, -1.0),
        mean(1.0, -1.0),
        mean(-1.0, 1.0),
        mean(1.0, 1.0),
    ]
}

fn basis_row(dim: usize, axis: usize, sign: f64) -> Vec<f64> {
    let mut row = vec![0.0; dim];
    row[axis] = sign;
    row
}

/// Builds `(f1, f2)` on inputs of dimension `input_dim` (at least 2).
pub fn build_theorem_networks(input_dim: usize) -> (NetworkSpec, NetworkSpec) {
    assert!(input_dim >= 2, "theorem networks need input dimension >= 2");
    let d = input_dim;

    let first_f1 = vec![
        basis_row(d, 0, 1.0),
        basis_row(d, 0, -1.0),
        basis_row(d, 0, 1.0),
        basis_row(d, 0, -1.0),
    ];
    let first_f2 = vec![
        basis_row(d, 0, 1.0),
        basis_row(d, 0, -1.0),
        basis_row(d, 1, 1.0),
        basis_row(d, 1, -1.0),
    ];
    let second_f1 = vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ];
    let second_f2 = vec![
        vec![1.0, 0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0, 1.0],
        vec![0.0, 1.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0, 1.0],
    ];
    // f1: class 1 collects the neurons firing on x·e1 <= 0.
    let readout_f1 = vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 1.0]];
    // f2: class 1 collects the two mixed-sign quadrants.
    let readout_f2 = vec![vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]];

    let build = |first: Vec<Vec<f64>>, second: Vec<Vec<f64>>, second_bias: f64, readout| {
        let layers = vec![
            Layer::from_rows(&first, vec![0.0; 4], Activation::Indicator).unwrap(),
            Layer::from_rows(&second, vec![second_bias; 4], Activation::Indicator).unwrap(),
            Layer::from_rows(readout, vec![0.0; 2], Activation::Identity).unwrap(),
        ];
        NetworkSpec::new(layers, OutputRule::Argmax).unwrap()
    };

    (
        build(first_f1, second_f1, -1.0, &readout_f1),
        build(first_f2, second_f2, -2.0, &readout_f2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlab::eval_network;

    #[test]
    fn second_layer_biases_match_construction() {
        let (f1, f2) = build_theorem_networks(2);
        assert_eq!(f1.layers()[1].bias(), &[-1.0; 4]);
        assert_eq!(f2.layers()[1].bias(), &[-2.0; 4]);
    }

    #[test]
    fn eight_hidden_neurons_each() {
        let (f1, f2) = build_theorem_networks(5);
        for net in [&f1, &f2] {
            assert_eq!(net.hidden_count(), 8);
            assert_eq!(net.hidden_layer_of(), vec![0, 0, 0, 0, 1, 1, 1, 1]);
            let (act, _) = eval_network(net, &[0.5, -0.2, 3.0, 4.0, 5.0]).unwrap();
            assert_eq!(act.len(), 8);
        }
    }

    #[test]
    fn f1_is_negative_half_plane_indicator() {
        let (f1, _) = build_theorem_networks(2);
        assert_eq!(f1.predict(&[1.0, 0.0]).unwrap(), 0);
        assert_eq!(f1.predict(&[-1.0, 0.0]).unwrap(), 1);
        assert_eq!(f1.predict(&[-0.5, 7.0]).unwrap(), 1);
    }

    #[test]
    fn f2_flags_mixed_sign_quadrants() {
        let (_, f2) = build_theorem_networks(2);
        assert_eq!(f2.predict(&[1.0, 1.0]).unwrap(), 0);
        assert_eq!(f2.predict(&[-1.0, -1.0]).unwrap(), 0);
        assert_eq!(f2.predict(&[1.0, -1.0]).unwrap(), 1);
        assert_eq!(f2.predict(&[-1.0, 1.0]).unwrap(), 1);
    }

    #[test]
    fn f2_second_layer_is_quadrant_and() {
        let (_, f2) = build_theorem_networks(2);
        for x in [[1.0, 2.0], [1.0, -2.0], [-1.0, 2.0], [-1.0, -2.0]] {
            let (act, _) = eval_network(&f2, &x).unwrap();
            let (a, na, c, nc) = (act[0], act[1], act[2], act[3]);
            assert_eq!(&act[4..], &[a * c, a * nc, na * c, na * nc]);
        }
    }

    #[test]
    fn f1_repeated_rows_give_equal_and_complementary_neurons() {
        let (f1, _) = build_theorem_networks(2);
        for x in [[0.3, 1.0], [-2.0, 0.1], [4.0, -3.0]] {
            let (act, _) = eval_network(&f1, &x).unwrap();
            assert_eq!(act[0], act[2]);
            assert_eq!(act[0] + act[1], 1.0);
            assert!(act.iter().all(|v| *v == 0.0 || *v == 1.0));
        }
    }

    #[test]
    fn means_have_expected_scale() {
        // sigma = 1, eta = 1/e gives scale 2.
        let mu = gaussian_pair_means(1.0, (-1.0f64).exp(), 3);
        assert_eq!(mu[0], vec![-2.0, -2.0, 0.0]);
        assert_eq!(mu[1], vec![2.0, -2.0, 0.0]);
        assert_eq!(mu[2], vec![-2.0, 2.0, 0.0]);
        assert_eq!(mu[3], vec![2.0, 2.0, 0.0]);
    }
}
