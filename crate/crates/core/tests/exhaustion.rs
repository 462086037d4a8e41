use proptest::prelude::*;
use spectralpairs::discrete_laplace::{assemble_mode_operator, assemble_tensor_operator, mu_k, Grid1D, Subdomain};
use spectralpairs::linalg::SolverOptions;
use spectralpairs::metric_models::{pinch_model, EndCondition, FiberMetric, OuterSpec, Segment, SurfaceModel, WarpProfile};
use std::f64::consts::PI;

fn cusp(depth: f64, spacing: f64) -> f64 {
    let m = SurfaceModel::new(
        FiberMetric::circle(1.0),
        vec![Segment::new(WarpProfile::HyperbolicCusp, 0.0, depth)],
        [EndCondition::Dirichlet; 2],
        vec![[0.0, 1.0]],
    )
    .unwrap();
    let op = assemble_mode_operator(&Grid1D::new(&m, spacing).unwrap(), 0.0).unwrap();
    mu_k(&op, &vec![true; op.dim()], 1, &SolverOptions::default()).unwrap()
}

#[test]
fn truncated_cusp_matches_shifted_interval() {
    // f = e^{u/2} g turns the cusp equation into -g'' = (lambda - 1/4) g
    for depth in [6.0, 12.0, 24.0] {
        let exact = 0.25 + (PI / depth).powi(2);
        let got = cusp(depth, 0.006);
        assert!((got - exact).abs() < 1e-4 * exact, "{depth}: {got} vs {exact}");
    }
}

#[test]
fn truncated_cusp_approaches_quarter_from_above() {
    let vals: Vec<f64> = [12.0, 24.0, 48.0].iter().map(|&r| cusp(r, 0.006)).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(vals.iter().all(|&v| v > 0.25));
    assert!((vals[2] - 0.25) / 0.25 < 0.02);
}

fn neck_op(s: f64) -> spectralpairs::discrete_laplace::DiscreteOperator {
    let m = pinch_model(s, &FiberMetric::circle(2.0 * PI), &OuterSpec::flat(4.0), 0.0).unwrap();
    assemble_mode_operator(&Grid1D::new(&m, 0.04).unwrap(), 0.0).unwrap()
}

#[test]
fn ball_exhaustion_lowers_mu_k() {
    let op = neck_op(0.1);
    let opts = SolverOptions::default();
    for k in 1..=3 {
        let vals: Vec<f64> = [1.0, 2.0, 3.0, 4.0, 6.0]
            .iter()
            .map(|&r| mu_k(&op, &op.mask(&Subdomain::BallOfA { radius: r }), k, &opts).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-10), "k = {k}: {vals:?}");
    }
}

#[test]
fn tensor_restriction_is_monotone_too() {
    let m = pinch_model(0.2, &FiberMetric::circle(2.0 * PI), &OuterSpec::flat(3.0), 0.0).unwrap();
    let op = assemble_tensor_operator(&Grid1D::new(&m, 0.08).unwrap(), 6).unwrap();
    let opts = SolverOptions::default();
    let a = mu_k(&op, &op.mask(&Subdomain::BallOfA { radius: 1.0 }), 2, &opts).unwrap();
    let b = mu_k(&op, &op.mask(&Subdomain::BallOfA { radius: 3.0 }), 2, &opts).unwrap();
    assert!(b <= a + 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nested_masks_order_mu_k(lo in 0.0f64..4.0, grow in 0.2f64..4.0, k in 1usize..4) {
        let op = neck_op(0.2);
        let opts = SolverOptions::default();
        let inner = op.mask(&Subdomain::BaseInterval { lo, hi: lo + 2.0 });
        let outer = op.mask(&Subdomain::BaseInterval { lo: (lo - grow).max(0.0), hi: lo + 2.0 + grow });
        let a = mu_k(&op, &inner, k, &opts).unwrap();
        let b = mu_k(&op, &outer, k, &opts).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-9) + 1e-10);
    }
}
