use std::f64::consts::PI;

use czkit::kernels::{kernel_slice, KernelKind, SliceGridRule};
use czkit::symbols::{SymbolSpec, TimeProfile};
use czkit::SpatialGrid;
use num_complex::Complex64;
use proptest::prelude::*;

fn frac(gamma: f64, dim: usize, a: f64) -> SymbolSpec {
    SymbolSpec::fractional(TimeProfile::constant(0.0, 16.0, Complex64::new(a, 0.0)).unwrap(), gamma, dim).unwrap()
}

fn relative_l1(got: &[Complex64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(g, w)| (g - w).norm()).sum();
    num / want.iter().map(|w| w.abs()).sum::<f64>()
}

#[test]
fn two_dimensional_heat_kernel_is_gaussian() {
    let (a, tau) = (0.7, 0.5);
    let grid = SpatialGrid::new(2, 20.0, 256).unwrap();
    let k = kernel_slice(&frac(2.0, 2, a), 1.0 + tau, 1.0, KernelKind::PLambda(0.0), &grid).unwrap();
    let want: Vec<f64> = grid
        .points_list()
        .iter()
        .map(|x| (-(x[0] * x[0] + x[1] * x[1]) / (4.0 * a * tau)).exp() / (4.0 * PI * a * tau))
        .collect();
    let err = relative_l1(&k.values, &want);
    assert!(err <= 1e-6, "relative L1 error {err:e}");
}

#[test]
fn gamma_two_k_is_minus_laplacian_of_the_gaussian() {
    // |ξ|² e^{−τ|ξ|²} ↦ −∂²ₓ G_τ = G_τ (1/(2τ) − x²/(4τ²)).
    let tau = 0.8;
    let grid = SpatialGrid::new(1, 40.0, 4096).unwrap();
    let k = kernel_slice(&frac(2.0, 1, 1.0), tau, 0.0, KernelKind::K, &grid).unwrap();
    let want: Vec<f64> = grid
        .axis_coords()
        .iter()
        .map(|x| {
            let g = (-x * x / (4.0 * tau)).exp() / (4.0 * PI * tau).sqrt();
            g * (1.0 / (2.0 * tau) - x * x / (4.0 * tau * tau))
        })
        .collect();
    let err = relative_l1(&k.values, &want);
    assert!(err <= 1e-8, "relative L1 error {err:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transition_kernels_are_positive_with_unit_mass(gamma in 0.6f64..=2.0, tau in 0.2f64..2.0, a in 0.5f64..2.0) {
        let sym = frac(gamma, 1, a);
        let grid = SliceGridRule::default().grid(&sym, tau).unwrap();
        let k = kernel_slice(&sym, 1.0 + tau, 1.0, KernelKind::PLambda(0.0), &grid).unwrap();
        prop_assume!(!k.under_resolved);
        let h = grid.cell_volume();
        let mass: f64 = k.values.iter().map(|v| v.re).sum::<f64>() * h;
        prop_assert!((mass - 1.0).abs() <= 1e-10, "mass {}", mass);
        let top = k.values.iter().map(|v| v.re).fold(0.0, f64::max);
        let low = k.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        prop_assert!(low >= -1e-8 * top, "min {} vs max {}", low, top);
    }

    #[test]
    fn k_norm_scales_like_the_inverse_gap(gamma in 1.0f64..=2.0) {
        // ‖K(s + τ, s)‖_{L1} = τ^{−1}‖K(s + 1, s)‖_{L1} by self-similarity.
        let sym = frac(gamma, 1, 1.0);
        let rule = SliceGridRule { points: 1 << 14, ..SliceGridRule::default() };
        let norm = |tau: f64| {
            let grid = rule.grid(&sym, tau).unwrap();
            tau * kernel_slice(&sym, 1.0 + tau, 1.0, KernelKind::K, &grid).unwrap().l1_norm()
        };
        let base = norm(1.0);
        for tau in [0.25, 4.0] {
            prop_assert!((norm(tau) / base - 1.0).abs() <= 2e-3, "tau {}: {} vs {}", tau, norm(tau), base);
        }
    }
}
