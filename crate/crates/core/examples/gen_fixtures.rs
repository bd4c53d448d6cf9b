//! Regenerates the replay fixtures in `tests/fixtures`.
//!
//! cargo run -p accompany-core --example gen_fixtures

#[path = "../tests/common/fixtures.rs"]
#[allow(dead_code)]
mod fixtures;

use std::path::Path;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir)?;
    for (name, msgs) in fixtures::all() {
        let path = dir.join(name);
        std::fs::write(&path, fixtures::smf(&msgs))?;
        println!("{} ({} messages)", path.display(), msgs.len());
    }
    Ok(())
}
