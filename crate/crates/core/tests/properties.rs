use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use roughacs::acs::{beltrami_from_structure, structure_from_beltrami, BeltramiMatrix};
use roughacs::grid::io::{decode, encode, AcsfKind};
use roughacs::grid::{d_z, d_zbar, laplacian};
use roughacs::malgrange::gtilde;
use roughacs::spaces::{bony_decompose, BonyConfig};
use roughacs::{Complex64, Field, Grid};
use std::f64::consts::TAU;

fn values(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

fn field(g: Grid, ncomp: usize, v: &[(f64, f64)]) -> Field {
    Field::from_values(g, ncomp, v.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bony_pieces_sum_to_the_product(u in values(64), v in values(64)) {
        let g = Grid::new(1, 8, TAU).unwrap();
        let (u, v) = (field(g, 1, &u), field(g, 1, &v));
        let t = bony_decompose(&u, &v, BonyConfig::default()).unwrap();
        let err = u.mul(&v).unwrap().sub(&t.total()).unwrap().sup_norm();
        prop_assert!(err <= 1e-13 * (1.0 + u.sup_norm() * v.sup_norm()));
    }

    #[test]
    fn wirtinger_derivatives_factor_the_laplacian(u in values(4096)) {
        let g = Grid::new(2, 8, TAU).unwrap();
        let u = field(g, 1, &u);
        let mut sum = Field::zeros(g, 1);
        for j in 0..2 {
            sum.axpy(Complex64::new(4.0, 0.0), &d_z(&d_zbar(&u, j).unwrap(), j).unwrap()).unwrap();
        }
        let err = sum.sub(&laplacian(&u)).unwrap().sup_norm();
        prop_assert!(err <= 1e-11, "{}", err);
    }

    #[test]
    fn gtilde_inverts_the_quarter_laplacian(h in values(256)) {
        let g = Grid::new(1, 16, TAU).unwrap();
        let h = field(g, 1, &h);
        let v = gtilde(&h);
        let mean = h.mean(0);
        let err = laplacian(&v).scale(Complex64::new(0.25, 0.0)).sub(&h.map(|x| x - mean)).unwrap();
        prop_assert!(err.sup_norm() <= 1e-12 * (1.0 + h.sup_norm()));
        prop_assert_eq!(v.at_origin(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn acsf_round_trip_is_bit_exact(v in values(2 * 64), beltrami in any::<bool>()) {
        let g = Grid::new(1, 8, TAU).unwrap();
        let u = field(g, 2, &v);
        let kind = if beltrami { AcsfKind::Beltrami } else { AcsfKind::MapDisplacement };
        let (k, back) = decode(&encode(&u, kind)).unwrap();
        prop_assert_eq!(k, kind);
        prop_assert_eq!(back, u);
    }

    #[test]
    fn structure_and_beltrami_matrix_correspond(a in values(4)) {
        // keep |A|_2 well below 1 so the structure is defined
        let g = Grid::new(2, 8, TAU).unwrap();
        let entries: Vec<Complex64> = a.iter().map(|&(re, im)| Complex64::new(re, im) * 0.2).collect();
        let b = BeltramiMatrix::constant(g, &entries).unwrap();
        let j = structure_from_beltrami(&b).unwrap();
        assert_abs_diff_eq!(j.square_defect(), 0.0, epsilon = 1e-12);
        let back = beltrami_from_structure(&j).unwrap();
        for (x, y) in back.at(0).iter().zip(&entries) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-12);
        }
    }
}
