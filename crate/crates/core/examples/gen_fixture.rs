//! Regenerates the demo archive and test set.
//!
//! cargo run -p clarq-core --example gen_fixture -- fixtures

use std::path::PathBuf;

fn main() -> clarq_core::Result<()> {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()).into();
    std::fs::create_dir_all(&dir)?;
    let counts = clarq_core::synth::write_fixture(&dir)?;
    println!("{}", serde_json::to_string_pretty(&counts).expect("counts serialize"));
    Ok(())
}
