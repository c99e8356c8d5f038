// SPDX-License-Identifier: Apache-2.0

use std::process::Command;

fn git(args: &[&str]) -> Option<String> {
    let out = Command::new("git").args(args).output().ok()?;
    out.status.success().then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
}

fn main() {
    let pkg = env!("CARGO_PKG_VERSION");
    let version = match git(&["describe", "--tags", "--long", "--dirty"]) {
        Some(d) if !d.is_empty() => d,
        _ => match git(&["describe", "--always", "--dirty"]) {
            Some(hash) if !hash.is_empty() => format!("v{pkg}-0-g{hash}"),
            _ => format!("v{pkg}"),
        },
    };
    println!("cargo:rustc-env=MADDNESS_VERSION={version}");
    println!("cargo:rerun-if-changed=build.rs");
    if let Some(dir) = git(&["rev-parse", "--git-dir"]) {
        println!("cargo:rerun-if-changed={dir}/HEAD");
        println!("cargo:rerun-if-changed={dir}/index");
    }
}
