//! Windowed, non-windowed and moment features on a small weighted graph.
//!
//! cargo run --example graph_scattering

use geoscatter::experiments::graph::{graph_scatter, GraphScatterConfig};
use geoscatter::experiments::Output;
use geoscatter::io::read_edges;
use geoscatter::prelude::*;

fn main() -> Result<()> {
    // Two triangles joined by a bridge.
    let edges = read_edges("src,dst,weight\n0,1,1\n1,2,1\n2,0,1\n2,3,0.5\n3,4,1\n4,5,1\n5,3,1\n".as_bytes())?;
    let dirac = Signal::from_real(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    let ramp = Signal::from_real(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0])?;
    let signals = [dirac, ramp];

    for output in [Output::NonwindowedPhi0, Output::NonwindowedL1, Output::Moments(4)] {
        let cfg = GraphScatterConfig {
            j_max: 2,
            layers: 2,
            output,
            ..Default::default()
        };
        let (maps, summary) = graph_scatter(&cfg, &edges, &signals, None)?;
        println!("{output:?}: {} features per signal", summary.feature_count);
        for (name, m) in ["dirac", "ramp"].iter().zip(&maps) {
            let v = m.scalars().expect("scalar output");
            let head: Vec<String> = v.iter().take(6).map(|x| format!("{x:.4}")).collect();
            println!("  {name:5} {} ...", head.join(" "));
        }
    }

    // Windowed coefficients are node signals; print the low-pass of the dirac.
    let (maps, _) = graph_scatter(&GraphScatterConfig::default(), &edges, &signals[..1], None)?;
    let s = &maps[0].signals().expect("windowed output")[0];
    println!("A_J dirac: {:?}", s.real_parts().iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>());
    Ok(())
}
