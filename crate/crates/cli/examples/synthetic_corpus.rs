//! Writes the synthetic tournament used by the test-suite to a directory.

use chainvalue_testkit::corpus::{write_corpus, CorpusSpec};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "synthetic".into());
    let s = write_corpus(std::path::Path::new(&dir), &CorpusSpec::default())?;
    println!("open data: {}", s.data_root.display());
    println!("market: {}", s.market_dir.display());
    println!("matches: {}", s.match_ids.len());
    Ok(())
}
