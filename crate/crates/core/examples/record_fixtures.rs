//! Regenerates the recorded fixtures under `fixtures/` from the authoring
//! model in `tests/support/authoring.rs`.
//!
//! ```text
//! cargo run -p reuse-forge --example record_fixtures
//! ```

#[path = "../tests/support/authoring.rs"]
mod authoring;

fn main() -> reuse_forge::Result<()> {
    let dir = authoring::fixtures_dir();
    for (name, contents) in authoring::author_fixtures()? {
        let path = dir.join(&name);
        std::fs::write(&path, contents).map_err(|e| reuse_forge::Error::Io {
            path: path.clone(),
            source: e,
        })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
