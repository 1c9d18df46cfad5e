//! Rebuilds `data/` and `fixtures/` from the seeded demo generators.
//!
//! cargo run --example regenerate_fixtures [-- <output root>]

use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(fancric::demo::crate_dir);
    if root.join("fixtures").join("llm").exists() {
        // Stale fixtures would linger in the index otherwise.
        std::fs::remove_dir_all(root.join("fixtures").join("llm"))?;
    }
    fancric::demo::write_all(&root)?;
    println!("wrote demo data and fixtures under {}", root.display());
    Ok(())
}
