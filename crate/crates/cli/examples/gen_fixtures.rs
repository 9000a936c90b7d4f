//! Regenerates the bundled fixture CSVs.
//!
//!     cargo run -p qsmote-cli --example gen_fixtures

use qsmote_cli::fixtures::BlobSpec;
use std::path::Path;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    for (name, spec) in [("blobs4.csv", BlobSpec::blobs4()), ("blobs2.csv", BlobSpec::blobs2())] {
        std::fs::write(dir.join(name), spec.to_csv())?;
        println!("wrote {} ({:?})", dir.join(name).display(), spec.counts);
    }
    Ok(())
}
