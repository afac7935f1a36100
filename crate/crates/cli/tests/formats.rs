use nalgebra::DMatrix;
use proptest::prelude::*;

use sphdeconv::config::{fixture_to_toml, parse_fixture};
use sphdeconv::opfile::{read_operator, write_operator};
use sphdeconv::pointset::{parse_pointset, write_pointset, PointSetError};
use sphdeconv_core::quadrature::product_rule;
use sphdeconv_core::simulate::TargetKind;
use sphdeconv_core::{Block, BlockOperator, FixtureConfig};

fn block_strategy(l: usize) -> BoxedStrategy<Block> {
    let n = 2 * l + 1;
    prop_oneof![
        prop::collection::vec(-1e3f64..1e3, n).prop_map(Block::Diagonal),
        prop::collection::vec(-1e3f64..1e3, n * n).prop_map(move |v| Block::Dense(DMatrix::from_row_slice(n, n, &v))),
    ]
    .boxed()
}

fn operator_strategy() -> impl Strategy<Value = BlockOperator> {
    (0usize..6).prop_flat_map(|lmax| {
        (0..=lmax)
            .map(block_strategy)
            .collect::<Vec<_>>()
            .prop_map(|blocks| BlockOperator::new(blocks).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_files_are_lossless(op in operator_strategy()) {
        let mut buf = Vec::new();
        write_operator(&mut buf, &op).unwrap();
        prop_assert_eq!(read_operator(buf.as_slice()).unwrap(), op);
    }

    #[test]
    fn truncated_operator_files_are_rejected(op in operator_strategy(), cut in 1usize..64) {
        let mut buf = Vec::new();
        write_operator(&mut buf, &op).unwrap();
        let keep = buf.len().saturating_sub(cut);
        prop_assert!(read_operator(&buf[..keep]).is_err());
    }

    #[test]
    fn point_sets_round_trip(t in 0usize..12) {
        let set = product_rule(t);
        let mut buf = Vec::new();
        write_pointset(&mut buf, &set).unwrap();
        let back = parse_pointset(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.degree(), set.degree());
        prop_assert_eq!(back.weights(), set.weights());
    }

    #[test]
    fn fixtures_round_trip(delta in 0.0f64..0.1, eps in 0.0f64..0.1, seed in 0..=i64::MAX as u64, nu in 0.1f64..4.0, lmax in 0usize..200, uniform in any::<bool>()) {
        let config = FixtureConfig {
            delta,
            eps,
            seed,
            alpha: 1.5,
            nu,
            lmax,
            target: if uniform { TargetKind::Uniform } else { TargetKind::ExpSpike },
        };
        prop_assert_eq!(parse_fixture(&fixture_to_toml(&config).unwrap()).unwrap(), config);
    }
}

#[test]
fn oversized_seed_is_an_error() {
    let config = FixtureConfig {
        seed: u64::MAX,
        ..FixtureConfig::default()
    };
    assert!(fixture_to_toml(&config).is_err());
}

#[test]
fn bad_point_line_reports_its_number() {
    let text = "# degree: 0\n# comment\n0 0 1 12.566370614359172\n1 0 zero 1\n";
    match parse_pointset(text) {
        Err(PointSetError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn off_sphere_point_is_a_validation_error() {
    let text = "0 0 2 12.566370614359172\n";
    assert!(matches!(parse_pointset(text), Err(PointSetError::Invalid(_))));
}
