//! Reference data typed in by hand, independent of the library's
//! constructions.
#![allow(dead_code)]

use projsum::matcore::{from_real_rows, ComplexMatrix};

fn s(v: f64) -> f64 {
    v.sqrt()
}

/// The rank-one tetrahedron projections `ξ_v ξ_v*` in `M_3`.
pub fn tetrahedron_projections() -> Vec<ComplexMatrix> {
    let r2 = s(2.0);
    let r3 = s(3.0);
    vec![
        from_real_rows(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        from_real_rows(3, 3, &[1.0 / 9.0, -2.0 * r2 / 9.0, 0.0, -2.0 * r2 / 9.0, 8.0 / 9.0, 0.0, 0.0, 0.0, 0.0]),
        from_real_rows(
            3,
            3,
            &[
                1.0 / 9.0,
                r2 / 9.0,
                -r2 / (3.0 * r3),
                r2 / 9.0,
                2.0 / 9.0,
                -2.0 / (3.0 * r3),
                -r2 / (3.0 * r3),
                -2.0 / (3.0 * r3),
                2.0 / 3.0,
            ],
        ),
        from_real_rows(
            3,
            3,
            &[
                1.0 / 9.0,
                r2 / 9.0,
                r2 / (3.0 * r3),
                r2 / 9.0,
                2.0 / 9.0,
                2.0 / (3.0 * r3),
                r2 / (3.0 * r3),
                2.0 / (3.0 * r3),
                2.0 / 3.0,
            ],
        ),
    ]
}

/// Four rank-two projections in `M_5` summing to `(8/5)·I`, as tabulated
/// for the second step of the four-projection recursion.
pub fn explicit_k2_projections() -> Vec<ComplexMatrix> {
    let p1 = [
        [364.0 / 445.0, -12.0 / (89.0 * s(55.0)), 102.0 * s(3.0 / 406285.0), -96.0 / 5.0 * s(2.0 / 36935.0), -24.0 / (5.0 * s(445.0))],
        [-12.0 / (89.0 * s(55.0)), 4188.0 / 24475.0, 3562.0 / 275.0 * s(3.0 / 7387.0), 144.0 / 5.0 * s(2.0 / 81257.0), 36.0 / (5.0 * s(979.0))],
        [102.0 * s(3.0 / 406285.0), 3562.0 / 275.0 * s(3.0 / 7387.0), 11689.0 / 22825.0, 96.0 / 415.0 * s(6.0 / 11.0), 24.0 / 5.0 * s(3.0 / 913.0)],
        [-96.0 / 5.0 * s(2.0 / 36935.0), 144.0 / 5.0 * s(2.0 / 81257.0), 96.0 / 415.0 * s(6.0 / 11.0), 288.0 / 2075.0, 36.0 / 25.0 * s(2.0 / 83.0)],
        [-24.0 / (5.0 * s(445.0)), 36.0 / (5.0 * s(979.0)), 24.0 / 5.0 * s(3.0 / 913.0), 36.0 / 25.0 * s(2.0 / 83.0), 9.0 / 25.0],
    ];
    let p2 = [
        [12.0 / 445.0, 444.0 / (445.0 * s(55.0)), -34.0 / 5.0 * s(3.0 / 406285.0), -12.0 * s(2.0 / 36935.0), 0.0],
        [444.0 / (445.0 * s(55.0)), 16428.0 / 24475.0, -1258.0 / 275.0 * s(3.0 / 7387.0), -444.0 / 5.0 * s(2.0 / 81257.0), 0.0],
        [-34.0 / 5.0 * s(3.0 / 406285.0), -1258.0 / 275.0 * s(3.0 / 7387.0), 289.0 / 22825.0, 34.0 / 415.0 * s(6.0 / 11.0), 0.0],
        [-12.0 * s(2.0 / 36935.0), -444.0 / 5.0 * s(2.0 / 81257.0), 34.0 / 415.0 * s(6.0 / 11.0), 24.0 / 83.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ];
    let p3 = [
        [0.0; 5],
        [0.0; 5],
        [0.0, 0.0, 77.0 / 83.0, -3.0 * s(66.0) / 415.0, -2.0 / 5.0 * s(33.0 / 83.0)],
        [0.0, 0.0, -3.0 * s(66.0) / 415.0, 1976.0 / 2075.0, -33.0 / 25.0 * s(2.0 / 83.0)],
        [0.0, 0.0, -2.0 / 5.0 * s(33.0 / 83.0), -33.0 / 25.0 * s(2.0 / 83.0), 3.0 / 25.0],
    ];
    let p4 = [
        [336.0 / 445.0, -384.0 / (445.0 * s(55.0)), -476.0 / 5.0 * s(3.0 / 406285.0), 156.0 / 5.0 * s(2.0 / 36935.0), 24.0 / (5.0 * s(445.0))],
        [-384.0 / (445.0 * s(55.0)), 18544.0 / 24475.0, -2304.0 / 275.0 * s(3.0 / 7387.0), 60.0 * s(2.0 / 81257.0), -36.0 / (5.0 * s(979.0))],
        [-476.0 / 5.0 * s(3.0 / 406285.0), -2304.0 / 275.0 * s(3.0 / 7387.0), 3367.0 / 22825.0, -97.0 / 415.0 * s(6.0 / 11.0), -2.0 / 5.0 * s(3.0 / 913.0)],
        [156.0 / 5.0 * s(2.0 / 36935.0), 60.0 * s(2.0 / 81257.0), -97.0 / 415.0 * s(6.0 / 11.0), 456.0 / 2075.0, -3.0 / 25.0 * s(2.0 / 83.0)],
        [24.0 / (5.0 * s(445.0)), -36.0 / (5.0 * s(979.0)), -2.0 / 5.0 * s(3.0 / 913.0), -3.0 / 25.0 * s(2.0 / 83.0), 3.0 / 25.0],
    ];
    [p1, p2, p3, p4].iter().map(|rows| from_real_rows(5, 5, rows.as_flattened())).collect()
}

/// `‖Σ_v P_v − x·I‖_F`
pub fn sum_residual(ps: &[ComplexMatrix], x: f64) -> f64 {
    let d = ps[0].nrows();
    let mut total = ComplexMatrix::zeros(d, d);
    for p in ps {
        total += p;
    }
    for i in 0..d {
        total[(i, i)] -= projsum::matcore::real(x);
    }
    total.norm()
}
