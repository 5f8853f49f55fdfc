//! Times the neighbor search on a random high-dimensional matrix.
//!
//! `cargo run --release --example knn_timing -- <n_points> <n_dims>`

use std::time::Instant;

use manifold_id::{knn, ManifoldKind, ManifoldSpec};

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(1000);
    let d = args.next().unwrap_or(50_176);
    let data = manifold_id::synthetic::generate::<f64>(&ManifoldSpec::new(
        ManifoldKind::Cube,
        20,
        d,
        n,
        1,
    ))
    .unwrap();
    let t = Instant::now();
    let table = knn::build_neighbor_table(&data, 20).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let madds = (n * n * d) as f64;
    println!(
        "n={n} d={d}: {secs:.2}s, {:.2} G mul-add/s, T_k(0)={}",
        madds / secs / 1e9,
        table.distances(0)[19]
    );
}
