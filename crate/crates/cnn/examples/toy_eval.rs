// SPDX-License-Identifier: Apache-2.0

//! Print the toy network report as JSON.

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let report = maddness_cnn::toy_network_eval(&maddness_cnn::ToyConfig { seed, ..Default::default() })?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
