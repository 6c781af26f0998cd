use frozenrb_core::grid::shift_field;
use frozenrb_core::operators::{burgers_op, frozen_op, shift_op};
use frozenrb_core::reduction::ei_greedy;
use frozenrb_core::{BurgersParams, Field, GridSpec, GroupVec, LieAlgebraVec};
use proptest::prelude::*;

const NX: usize = 8;
const NY: usize = 6;

fn grid() -> GridSpec {
    GridSpec::new(NX, NY, 2.0, 1.0).unwrap()
}

fn field() -> impl Strategy<Value = Field> {
    prop::collection::vec(0.0..1.0f64, NX * NY).prop_map(|v| Field::from_values(grid(), v).unwrap())
}

fn params() -> impl Strategy<Value = BurgersParams> {
    (1.0..=2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(mu, b1, b2)| BurgersParams::new(mu, [b1, b2]).unwrap())
}

fn algebra() -> impl Strategy<Value = LieAlgebraVec> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| LieAlgebraVec([a, b]))
}

fn neumaier(xs: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

proptest! {
    #[test]
    fn whole_cell_shifts_commute_with_both_operators(
        v in field(), p in params(), g in algebra(), di in -20i64..20, dj in -20i64..20,
    ) {
        let s = GroupVec::from_cells(&grid(), di, dj);
        prop_assert_eq!(shift_field(&burgers_op(&v, &p), s), burgers_op(&shift_field(&v, s), &p));
        prop_assert_eq!(shift_field(&frozen_op(&v, &p, g), s), frozen_op(&shift_field(&v, s), &p, g));
        for r in 0..2 {
            prop_assert_eq!(shift_field(&shift_op(&v, r), s), shift_op(&shift_field(&v, s), r));
        }
    }

    #[test]
    fn whole_cell_shifts_compose(v in field(), a in (-9i64..9, -9i64..9), b in (-9i64..9, -9i64..9)) {
        let g = grid();
        let twice = shift_field(&shift_field(&v, GroupVec::from_cells(&g, a.0, a.1)), GroupVec::from_cells(&g, b.0, b.1));
        prop_assert_eq!(twice, shift_field(&v, GroupVec::from_cells(&g, a.0 + b.0, a.1 + b.1)));
    }

    #[test]
    fn operators_conserve_mass(v in field(), p in params(), g in algebra()) {
        let tol = 1e-12 * v.norm().max(1.0);
        prop_assert!(neumaier(burgers_op(&v, &p).values()).abs() <= tol);
        prop_assert!(neumaier(frozen_op(&v, &p, g).values()).abs() <= tol);
    }

    #[test]
    fn ei_greedy_is_nested(snaps in prop::collection::vec(field(), 3..12), m in 1usize..6) {
        let full = ei_greedy(&snaps, 8, 0.0).unwrap();
        let m = m.min(full.len());
        prop_assert_eq!(full.truncate(m).unwrap(), ei_greedy(&snaps, m, 0.0).unwrap());
    }
}
