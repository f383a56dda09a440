use czkit::estimates::{mixed_norm, weak11_check, EnsembleSpec, Generator, MixedNormSpec, Weak11Options};
use czkit::forcing::{Forcing, Pulse, Spatial};
use czkit::symbols::{SymbolSpec, TimeProfile};
use czkit::{SpaceTimeGrid, SpatialGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> SpaceTimeGrid {
    SpaceTimeGrid::uniform(SpatialGrid::new(1, 12.0, 64).unwrap(), 0.0, 1.0, 9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mixed_norms_satisfy_minkowski(p in 1.01f64..6.0, q in 1.01f64..6.0, seed in any::<u64>()) {
        let g = grid();
        let ens = EnsembleSpec::new(2, Generator::GaussianField, seed);
        let (f, h) = (ens.member(&g, 0).unwrap(), ens.member(&g, 1).unwrap());
        let spec = MixedNormSpec::new(p, q).unwrap();
        let sum = f.axpy(Complex64::new(1.0, 0.0), &h).unwrap();
        prop_assert!(mixed_norm(&sum, &spec) <= (mixed_norm(&f, &spec) + mixed_norm(&h, &spec)) * (1.0 + 1e-12));
    }

    #[test]
    fn mixed_norms_ignore_spatial_translation(p in 1.01f64..6.0, q in 1.01f64..6.0, shift in -64i64..64, seed in any::<u64>()) {
        let g = grid();
        let f = EnsembleSpec::new(1, Generator::SeparableBumps, seed).member(&g, 0).unwrap();
        let spec = MixedNormSpec::new(p, q).unwrap();
        let (a, b) = (mixed_norm(&f, &spec), mixed_norm(&f.shifted(&[shift]), &spec));
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn weak_type_ratio_survives_a_near_delta_forcing() {
    // The bump narrows toward a delta as the lattice refines past its width.
    let sym =
        SymbolSpec::fractional(TimeProfile::constant(0.0, 1.0, Complex64::new(1.0, 0.0)).unwrap(), 1.5, 1).unwrap();
    let g = SpaceTimeGrid::uniform(SpatialGrid::new(1, 20.0, 256).unwrap(), 0.0, 1.0, 33).unwrap();
    let forcing = Forcing::single(
        Spatial::Bump { center: vec![0.0], width: g.space().spacing() / 2.0, normalized: true },
        vec![Pulse { t0: 0.0, t1: 0.125, value: Complex64::new(1.0, 0.0) }],
    );
    let rep = weak11_check(&sym, &forcing, &g, &Weak11Options::default()).unwrap();
    assert!(rep.pass, "{}", rep.to_json());
    let sup = rep.get("sup").unwrap();
    assert!(sup.is_finite() && sup > 0.0);
    for r in 0..=2 {
        let v = rep.get(&format!("sup_r{r}")).unwrap();
        assert!((v / sup - 1.0).abs() <= 0.2, "refinement {r}: {v} vs {sup}");
    }
}
