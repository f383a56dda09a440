mod common;

use common::{c, mode_trial, random_forcing, schedule};
use czkit::estimates::{mixed_norm, MixedNormSpec};
use czkit::solver::{forward_apply, solve_resolvent};
use czkit::{SpaceTimeGrid, SpatialGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_modes_match_the_ode_oracle(seed in any::<u64>()) {
        let err = mode_trial(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(err <= 1e-8, "relative error {:e}", err);
    }

    #[test]
    fn forward_apply_inverts_the_solver(
        gamma in 0.5f64..2.0,
        cut in 0.1f64..0.9,
        a0 in 0.1f64..4.0,
        b0 in -3.0f64..3.0,
        a1 in 0.1f64..4.0,
        lambda in 0.0f64..8.0,
        seed in any::<u64>(),
    ) {
        let sym = schedule(gamma, &[cut], &[c(a0, b0), c(a1, 0.0)]);
        let grid = SpaceTimeGrid::aligned(SpatialGrid::new(1, 10.0, 32).unwrap(), 0.0, 1.0, 17, &sym).unwrap();
        let f = random_forcing(&grid, seed);
        let back = forward_apply(&sym, &solve_resolvent(&sym, &f, lambda).unwrap(), lambda).unwrap();
        let spec = MixedNormSpec::new(2.0, 2.0).unwrap();
        let err = mixed_norm(&back.axpy(c(-1.0, 0.0), &f).unwrap(), &spec) / mixed_norm(&f, &spec);
        prop_assert!(err <= 1e-8, "relative error {}", err);
    }

    #[test]
    fn the_solver_is_linear(gamma in 0.5f64..2.0, s in -3.0f64..3.0, seed in any::<u64>()) {
        let sym = schedule(gamma, &[0.5], &[c(1.0, 0.5), c(2.0, 0.0)]);
        let grid = SpaceTimeGrid::aligned(SpatialGrid::new(1, 10.0, 16).unwrap(), 0.0, 1.0, 9, &sym).unwrap();
        let f = random_forcing(&grid, seed);
        let g = random_forcing(&grid, seed ^ 1);
        let combo = f.axpy(c(s, 0.0), &g).unwrap();
        let lhs = solve_resolvent(&sym, &combo, 1.0).unwrap();
        let rhs = solve_resolvent(&sym, &f, 1.0).unwrap().axpy(c(s, 0.0), &solve_resolvent(&sym, &g, 1.0).unwrap()).unwrap();
        let spec = MixedNormSpec::new(2.0, 2.0).unwrap();
        let err = mixed_norm(&lhs.axpy(c(-1.0, 0.0), &rhs).unwrap(), &spec);
        prop_assert!(err <= 1e-12 * (1.0 + mixed_norm(&lhs, &spec)));
    }
}
