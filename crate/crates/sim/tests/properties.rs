// SPDX-License-Identifier: Apache-2.0

use maddness_core::amm_gemm_raw;
use maddness_sim::synth::{random_inputs, random_model};
use maddness_sim::{simulate, Category, SimConfig, SimOptions, VoltagePreset};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulator_matches_functional_decode(
        n_dec in prop::sample::select(vec![1usize, 4, 16]),
        n_s in prop::sample::select(vec![1usize, 4, 32]),
        sub_dim in 1usize..10,
        rows in 1usize..12,
        seed in any::<u64>(),
        preset in prop::sample::select(VoltagePreset::ALL.to_vec()),
    ) {
        let cfg = SimConfig::preset(preset, n_dec, n_s);
        let model = random_model(&cfg, sub_dim, seed).unwrap();
        let x = random_inputs(rows, n_s * sub_dim, seed ^ 0x5A5A);
        let out = simulate(x.view(), &model, &cfg, &SimOptions::default()).unwrap();
        let want = amm_gemm_raw(x.view(), &model.scheme, &model.trees, model.lut.as_ref().unwrap()).unwrap();
        prop_assert_eq!(&out.outputs, &want);
        prop_assert_eq!(out.energy.categories.count(Category::Encoder), (n_s * rows) as u64);
        let shares: f64 = out.energy.categories.shares().iter().sum();
        prop_assert!((shares - 1.0).abs() < 1e-9);
        prop_assert!(out.output_times_ps.windows(2).all(|w| w[0] < w[1]));
    }
}
