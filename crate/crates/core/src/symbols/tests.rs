use approx::assert_relative_eq;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn heat(gamma: f64, dim: usize) -> SymbolSpec {
    SymbolSpec::fractional(TimeProfile::constant(0.0, 1.0, c(1.0, 0.0)).unwrap(), gamma, dim).unwrap()
}

fn identity2(off: f64) -> TimeProfile<Poly2mCoeffs> {
    let matrix = vec![c(1.0, 0.0), c(off, 0.0), c(off, 0.0), c(1.0, 0.0)];
    TimeProfile::constant(0.0, 1.0, Poly2mCoeffs { matrix }).unwrap()
}

#[test]
fn fractional_values() {
    assert_relative_eq!(heat(2.0, 2).eval(0.3, &[1.0, 0.0]).unwrap().re, -1.0);
    let v = heat(1.5, 2).eval(0.3, &[2.0, 0.0]).unwrap();
    assert_relative_eq!(v.re, -2f64.powf(1.5), max_relative = 1e-15);
    assert_eq!(heat(1.5, 2).eval(0.3, &[0.0, 0.0]).unwrap(), c(0.0, 0.0));
}

#[test]
fn fractional_kappa_from_complex_coefficient() {
    let s = SymbolSpec::fractional(TimeProfile::constant(0.0, 1.0, c(1.0, 0.5)).unwrap(), 1.0, 1).unwrap();
    assert_relative_eq!(s.kappa(), 1.0 / 1.25f64.sqrt(), max_relative = 1e-15);
}

#[test]
fn piecewise_lookup_and_window() {
    let p = TimeProfile::new(vec![
        Piece { t0: 0.0, t1: 0.5, coeff: c(1.0, 0.0) },
        Piece { t0: 0.5, t1: 1.0, coeff: c(2.0, 0.0) },
    ])
    .unwrap();
    let s = SymbolSpec::fractional(p, 2.0, 1).unwrap();
    assert_eq!(s.eval(0.7, &[1.0]).unwrap(), c(-2.0, 0.0));
    assert_eq!(s.eval(0.5, &[1.0]).unwrap(), c(-2.0, 0.0));
    assert_eq!(s.eval(0.49, &[1.0]).unwrap(), c(-1.0, 0.0));
    assert!(matches!(s.eval(1.5, &[1.0]), Err(Error::OutOfWindow { .. })));
    assert!(matches!(s.eval(0.5, &[1.0, 0.0]), Err(Error::Domain(_))));
}

#[test]
fn fractional_rejects_nonpositive_real_part() {
    let p = TimeProfile::new(vec![
        Piece { t0: 0.0, t1: 0.5, coeff: c(1.0, 0.0) },
        Piece { t0: 0.5, t1: 1.0, coeff: c(0.0, 1.0) },
    ])
    .unwrap();
    assert!(matches!(SymbolSpec::fractional(p, 1.0, 1), Err(Error::InvalidSymbol(_))));
}

#[test]
fn poly2m_values_and_kappa() {
    let s = SymbolSpec::poly2m(identity2(0.0), 1, 2).unwrap();
    assert_relative_eq!(s.eval(0.0, &[0.6, 0.8]).unwrap().re, -1.0, max_relative = 1e-15);
    assert_eq!(s.gamma(), 2.0);
    let s = SymbolSpec::poly2m(identity2(0.4), 1, 2).unwrap();
    assert_relative_eq!(s.kappa(), 0.6, max_relative = 1e-12);
    let one = TimeProfile::constant(0.0, 1.0, Poly2mCoeffs { matrix: vec![c(1.0, 0.0)] }).unwrap();
    let s = SymbolSpec::poly2m(one, 1, 1).unwrap();
    assert_relative_eq!(s.eval(0.0, &[3.0]).unwrap().re, -9.0);
}

#[test]
fn poly2m_coercivity_failure_names_direction() {
    let err = SymbolSpec::poly2m(identity2(1.2), 1, 2).unwrap_err();
    assert!(err.to_string().contains("ξ ="), "{err}");
}

#[test]
fn poly2m_fourth_order_derivatives_are_exact() {
    // Σ ξ^α ξ^β over |α| = |β| = 2 with identity coefficients is ξ1^4 + ξ1²ξ2² + ξ2^4.
    let idx = MultiIndex::of_order(2, 2);
    let n = idx.len();
    let mut matrix = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        matrix[i * n + i] = c(1.0, 0.0);
    }
    let s = SymbolSpec::poly2m(TimeProfile::constant(0.0, 1.0, Poly2mCoeffs { matrix }).unwrap(), 2, 2).unwrap();
    let xi = [0.7, -1.3];
    let d = s.derivative(0.5, &xi, &MultiIndex(vec![1, 1])).unwrap();
    assert_relative_eq!(d.re, -4.0 * xi[0] * xi[1], max_relative = 1e-14);
    let d = s.derivative(0.5, &xi, &MultiIndex(vec![2, 0])).unwrap();
    assert_relative_eq!(d.re, -(12.0 * xi[0] * xi[0] + 2.0 * xi[1] * xi[1]), max_relative = 1e-14);
}

#[test]
fn fractional_derivatives_match_finite_differences() {
    let s = heat(1.3, 2);
    let xi = [0.4, -0.9];
    for a in MultiIndex::up_to(2, 2) {
        let exact = s.derivative(0.2, &xi, &a).unwrap();
        let fd = s.central_difference(0.2, &xi, &a, 1e-4 * norm(&xi));
        assert!((exact - fd).norm() <= 1e-6 * exact.norm().max(1.0), "{a}: {exact} vs {fd}");
    }
}

#[test]
fn composition_orders_and_values() {
    let half = SymbolSpec::power(&heat(2.0, 1), 0.5).unwrap();
    assert_eq!(half.gamma(), 1.0);
    assert_relative_eq!(half.eval(0.1, &[-3.0]).unwrap().re, -3.0, max_relative = 1e-14);

    let sq = SymbolSpec::compose(&heat(1.0, 1), 1.0, &heat(1.0, 1), 1.0).unwrap();
    assert_eq!(sq.gamma(), 2.0);
    assert_relative_eq!(sq.eval(0.1, &[2.0]).unwrap().re, -4.0, max_relative = 1e-14);

    let mixed = SymbolSpec::compose(&heat(1.5, 1), 1.0, &heat(0.7, 1), 2.0).unwrap();
    assert_eq!(mixed.gamma(), 1.5 + 2.0 * 0.7);
    let v = mixed.eval(0.1, &[2.0]).unwrap();
    assert_relative_eq!(v.re, -2f64.powf(2.9), max_relative = 1e-13);
    assert!(v.im.abs() < 1e-12);
}

#[test]
fn composite_ellipticity_can_fail_for_complex_factors() {
    // arg(−ψ1) = 1.2 rad, cubed to 3.6 rad: Re becomes negative.
    let a = Complex64::from_polar(1.0, 1.2);
    let s1 = SymbolSpec::fractional(TimeProfile::constant(0.0, 1.0, a).unwrap(), 1.0, 1).unwrap();
    assert!(matches!(SymbolSpec::power(&s1, 3.0), Err(Error::InvalidSymbol(_))));
}

#[test]
fn scaled_symbol() {
    let s = SymbolSpec::scaled(&heat(1.5, 1), 2.0).unwrap();
    assert_relative_eq!(s.eval(0.0, &[1.0]).unwrap().re, -2f64.powf(1.5), max_relative = 1e-15);
    assert_relative_eq!(s.kappa(), 2f64.powf(-1.5), max_relative = 1e-15);
    let d = s.derivative(0.0, &[1.0], &MultiIndex(vec![1])).unwrap();
    assert_relative_eq!(d.re, -1.5 * 2f64.powf(1.5), max_relative = 1e-14);
}

#[test]
fn levy_matches_fractional() {
    for &(gamma, dim) in &[(0.5, 1), (1.0, 1), (1.5, 2)] {
        let m = TimeProfile::constant(0.0, 1.0, LevyDensity::Constant(fractional_constant(gamma, dim))).unwrap();
        let l = SymbolSpec::levy(m, gamma, dim).unwrap();
        let f = heat(gamma, dim);
        for k in 0..=20 {
            let r = 10f64.powf(-1.0 + 0.1 * k as f64);
            let xi: Vec<f64> = if dim == 1 { vec![r] } else { vec![0.6 * r, -0.8 * r] };
            let a = l.eval(0.5, &xi).unwrap();
            let b = f.eval(0.5, &xi).unwrap();
            assert!((a - b).norm() <= 1e-6 * b.norm(), "γ={gamma} |ξ|={r}: {a} vs {b}");
        }
        assert_eq!(l.eval(0.5, &vec![0.0; dim]).unwrap(), c(0.0, 0.0));
    }
}

#[test]
fn levy_rejects_bad_orders_and_failed_cancellation() {
    let m = TimeProfile::constant(0.0, 1.0, LevyDensity::Constant(1.0)).unwrap();
    assert!(matches!(SymbolSpec::levy(m.clone(), 2.0, 1), Err(Error::Unsupported(_))));
    assert!(matches!(SymbolSpec::levy(m, 0.5, 3), Err(Error::Unsupported(_))));
    let skew = TimeProfile::constant(0.0, 1.0, LevyDensity::TwoPoint { plus: 2.0, minus: 0.0 }).unwrap();
    assert!(matches!(SymbolSpec::levy(skew.clone(), 1.0, 1), Err(Error::InvalidSymbol(_))));
    assert!(SymbolSpec::levy(skew, 1.5, 1).is_ok());
}

#[test]
fn conditions_pass_for_every_builder() {
    let levy1 = SymbolSpec::levy(
        TimeProfile::constant(0.0, 1.0, LevyDensity::TwoPoint { plus: 1.0, minus: 0.5 }).unwrap(),
        1.5,
        1,
    )
    .unwrap();
    let levy2 = SymbolSpec::levy(
        TimeProfile::constant(0.0, 1.0, LevyDensity::Fourier { c0: 1.0, cos: vec![0.0, 0.3], sin: vec![0.2] }).unwrap(),
        0.8,
        2,
    )
    .unwrap();
    let cases = vec![
        heat(2.0, 1),
        heat(1.5, 3),
        SymbolSpec::poly2m(identity2(0.4), 1, 2).unwrap(),
        levy1,
        levy2,
        SymbolSpec::compose(&heat(1.5, 2), 1.0, &heat(0.7, 2), 2.0).unwrap(),
        SymbolSpec::scaled(&heat(1.2, 2), 3.0).unwrap(),
    ];
    for s in cases {
        let ts = s.piece_midpoints();
        let rep = verify_conditions(&s, &ts, &default_xi_lattice(s.dim()), KAPPA_TOLERANCE).unwrap();
        assert!(rep.pass, "{:?}: κ̂ = {} vs κ = {}", s.kind(), rep.empirical_kappa, rep.declared_kappa);
        assert_eq!(rep.nonfinite_samples, 0);
    }
}

#[test]
fn heat_derivative_constant_is_two() {
    let s = heat(2.0, 1);
    let rep = verify_conditions(&s, &[0.5], &default_xi_lattice(1), KAPPA_TOLERANCE).unwrap();
    assert_relative_eq!(rep.empirical_kappa, 1.0, max_relative = 1e-15);
    assert_relative_eq!(rep.derivative_constant, 2.0, max_relative = 1e-12);
    assert!(rep.to_csv().starts_with("t,xi_1,alpha,ratio,bound,pass\n"));
}

#[test]
fn poly2m_empirical_kappa_on_diagonal() {
    let s = SymbolSpec::poly2m(identity2(0.4), 1, 2).unwrap();
    let rep = verify_conditions(&s, &[0.5], &default_xi_lattice(2), KAPPA_TOLERANCE).unwrap();
    assert!((rep.empirical_kappa - 0.6).abs() < 1e-3);
}

#[test]
fn sweep_rejects_origin_and_missed_pieces() {
    let p = TimeProfile::new(vec![
        Piece { t0: 0.0, t1: 0.5, coeff: c(1.0, 0.0) },
        Piece { t0: 0.5, t1: 1.0, coeff: c(2.0, 0.0) },
    ])
    .unwrap();
    let s = SymbolSpec::fractional(p, 2.0, 1).unwrap();
    assert!(verify_conditions(&s, &[0.25, 0.75], &[vec![0.0]], KAPPA_TOLERANCE).is_err());
    assert!(verify_conditions(&s, &[0.25], &[vec![1.0]], KAPPA_TOLERANCE).is_err());
    assert!(verify_conditions(&s, &[0.25, 0.75], &[vec![1.0]], KAPPA_TOLERANCE).is_ok());
}

#[test]
fn permuted_and_frozen_schedules() {
    let pieces: Vec<Piece<Complex64>> =
        (0..6).map(|k| Piece { t0: k as f64, t1: k as f64 + 1.0, coeff: c(1.0 + k as f64, 0.0) }).collect();
    let s = SymbolSpec::fractional(TimeProfile::new(pieces).unwrap(), 1.0, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = s.with_permuted_schedule(&mut rng);
    let mut orig: Vec<f64> = s.piece_midpoints().iter().map(|&t| s.eval(t, &[1.0]).unwrap().re).collect();
    let mut perm: Vec<f64> = p.piece_midpoints().iter().map(|&t| p.eval(t, &[1.0]).unwrap().re).collect();
    orig.sort_by(f64::total_cmp);
    perm.sort_by(f64::total_cmp);
    assert_eq!(orig, perm);
    let f = s.frozen_at(2.5).unwrap();
    assert_eq!(f.breakpoints(), vec![0.0, 6.0]);
    assert_eq!(f.eval(5.5, &[1.0]).unwrap(), c(-3.0, 0.0));
}
