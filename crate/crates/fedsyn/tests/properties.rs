//! Property tests for the serialization and aggregation invariants.

use proptest::prelude::*;

use fedsyn::federation::{
    deserialize_params, partition_non_iid, serialize_params, weighted_average, ClientUpdate,
};
use fedsyn::nn::{ParamEntry, ParamSet};
use fedsyn::rng::substream;

fn param_set_strategy() -> impl Strategy<Value = ParamSet> {
    let entry = (
        prop::collection::vec(1usize..4, 1..3),
        (-1000f32..1000.0).prop_map(|v| v as f64),
    );
    prop::collection::vec(entry, 1..5).prop_map(|entries| {
        let mut params = ParamSet::new();
        for (i, (shape, seed_value)) in entries.into_iter().enumerate() {
            let count: usize = shape.iter().product();
            // f32-representable values so the wire format is lossless
            let values: Vec<f64> = (0..count)
                .map(|k| (seed_value * (k as f64 + 1.0)) as f32 as f64)
                .collect();
            params
                .push(ParamEntry::new(format!("p{i}"), shape, values).unwrap())
                .unwrap();
        }
        params
    })
}

proptest! {
    #[test]
    fn wire_round_trip_is_lossless(params in param_set_strategy()) {
        let bytes = serialize_params(&params).unwrap();
        let decoded = deserialize_params(&bytes).unwrap();
        prop_assert_eq!(&decoded, &params);
        prop_assert_eq!(serialize_params(&decoded).unwrap(), bytes);
    }

    #[test]
    fn aggregation_is_weight_scale_invariant(
        params in param_set_strategy(),
        weights in prop::collection::vec(0.01f64..10.0, 2..5),
        scale in 0.01f64..1000.0,
    ) {
        let updates: Vec<ClientUpdate> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| ClientUpdate {
                client_id: format!("c{i}"),
                round: 0,
                params: params.map(|v| v + i as f64),
                weight: w,
            })
            .collect();
        let scaled: Vec<ClientUpdate> = updates
            .iter()
            .map(|u| ClientUpdate { weight: u.weight * scale, ..u.clone() })
            .collect();
        let a = weighted_average(&updates).unwrap();
        let b = weighted_average(&scaled).unwrap();
        for (x, y) in a.values().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn partition_shards_are_label_disjoint(seed in 0u64..1000) {
        let dataset = fedsyn::data::generate_ring(
            &mut substream(seed, &[0]), 400, 10, 1.0, 0.05).unwrap();
        let groups = vec![vec![0u32, 1, 2], vec![3, 4, 5, 6], vec![7, 8, 9]];
        let sizes = vec![100, 150, 100];
        let shards =
            partition_non_iid(&dataset, &groups, &sizes, &mut substream(seed, &[1])).unwrap();
        prop_assert_eq!(shards.len(), 3);
        let total_weight: f64 = shards.iter().map(|s| s.weight).sum();
        prop_assert!((total_weight - 1.0).abs() < 1e-12);
        for (shard, group) in shards.iter().zip(&groups) {
            for label in &shard.labels {
                prop_assert!(group.contains(label));
            }
        }
    }
}
