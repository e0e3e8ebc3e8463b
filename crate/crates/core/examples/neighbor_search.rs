//! kd-tree radius queries against an exhaustive scan on a bundle-like point
//! cloud, with timings.
//!
//! cargo run --release --example neighbor_search

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smc_sim::bundles::{brute_force_query, NeighborIndex, Point};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<Point> = (0..50_000)
        .map(|_| Point::new(rng.random::<f64>() * 0.05, rng.random::<f64>() * 0.05, rng.random::<f64>() * 0.0045))
        .collect();
    let queries: Vec<Point> = (0..2000).map(|_| pts[rng.random_range(0..pts.len())]).collect();
    let r = 2.5e-3;

    let t = Instant::now();
    let tree = NeighborIndex::build(&pts);
    let build = t.elapsed();
    let t = Instant::now();
    let found: Vec<Vec<usize>> = queries.iter().map(|q| tree.radius_query(q, r)).collect();
    let tree_time = t.elapsed();
    let t = Instant::now();
    let scanned: Vec<Vec<usize>> = queries.iter().map(|q| brute_force_query(&pts, q, r)).collect();
    let scan_time = t.elapsed();

    let mean = found.iter().map(Vec::len).sum::<usize>() as f64 / found.len() as f64;
    println!("{} points, {} queries, radius {} mm, {mean:.1} neighbors on average", pts.len(), queries.len(), r * 1e3);
    println!("build {build:?}, tree queries {tree_time:?}, scan {scan_time:?}");
    println!("identical results: {}", found == scanned);
}
