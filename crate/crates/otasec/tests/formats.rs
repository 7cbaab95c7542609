//! Round trips of the on-disk formats.

use otasec::output::{parse_sweep_csv, sweep_csv, MatrixDump};
use otasec_core::precoding::PrecoderMethod;
use otasec_core::sim::{Stat, SweepResult, SweepRow};
use otasec_core::DMatrix;
use proptest::prelude::*;

const METHODS: [PrecoderMethod; 4] = [
    PrecoderMethod::NoNoise,
    PrecoderMethod::NaiveSvd,
    PrecoderMethod::RreUnknownCsi,
    PrecoderMethod::RreKnownCsi,
];

fn stat() -> impl Strategy<Value = Stat> {
    (-1e6..1e6f64, 0.0..1e3f64).prop_map(|(mean, se)| Stat { mean, se })
}

fn row() -> impl Strategy<Value = SweepRow> {
    (
        -10.0..30.0f64,
        0..4usize,
        1..1_000_000u64,
        stat(),
        stat(),
        proptest::option::of(stat()),
        proptest::option::of(stat()),
        0.0..=1.0f64,
    )
        .prop_map(
            |(snr_db, m, trials, d_closed, s_closed, d_emp, s_emp, rejected_fraction)| SweepRow {
                snr_db,
                method: METHODS[m],
                trials,
                d_closed,
                s_closed,
                d_emp,
                s_emp,
                rejected_fraction,
            },
        )
}

proptest! {
    #[test]
    fn sweep_csv_round_trips_exactly(rows in proptest::collection::vec(row(), 0..20)) {
        let result = SweepResult { snr_grid_db: Vec::new(), methods: Vec::new(), rows: rows.clone() };
        let back = parse_sweep_csv(&sweep_csv(&result).unwrap()).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn matrix_dump_round_trips_exactly(
        (r, c, values) in (1..6usize, 2..8usize).prop_flat_map(|(r, c)| (Just(r), Just(c), proptest::collection::vec(-10.0..10.0f64, r * c))),
        m in 0..4usize,
        with_h in any::<bool>(),
    ) {
        let dump = MatrixDump {
            method: Some(METHODS[m]),
            h: with_h.then(|| (0..c).map(|i| 0.1 + i as f64).collect()),
            matrix: DMatrix::from_row_slice(r, c, &values),
        };
        prop_assert_eq!(MatrixDump::parse(&dump.render()).unwrap(), dump);
    }
}
