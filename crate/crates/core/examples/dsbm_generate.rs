//! Samples a directed stochastic block model and writes its edge list, labels
//! and a JSON manifest.
//!
//! cargo run --example dsbm_generate -- <kind> <n> <seed> <out-dir>

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use geoscatter::dsbm::{generate_seeded, meta_graph, MetaGraphKind};
use geoscatter::io::write_json;

fn main() -> geoscatter::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: MetaGraphKind = args.first().map_or("ordered", String::as_str).parse()?;
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let dir = PathBuf::from(args.get(3).map_or(".", String::as_str));
    let spec = meta_graph(kind);
    let sample = generate_seeded(&spec, n, seed)?;

    let mut w = BufWriter::new(File::create(dir.join("edges.csv"))?);
    writeln!(w, "src,dst,weight")?;
    for (s, d) in &sample.edges {
        writeln!(w, "{s},{d},1")?;
    }
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join("labels.csv"))?);
    writeln!(w, "node,label")?;
    for (i, l) in sample.labels.iter().enumerate() {
        writeln!(w, "{i},{l}")?;
    }
    w.flush()?;
    write_json(
        &dir.join("manifest.json"),
        &serde_json::json!({ "kind": kind, "n": n, "seed": seed, "spec": spec, "edges": sample.edges.len() }),
    )?;
    println!("{kind}: {} nodes, {} directed edges -> {}", n, sample.edges.len(), dir.display());
    Ok(())
}
