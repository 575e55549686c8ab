// Measure: worst ratio of (distance to all later generations) over
// (distance to the nearest window junction) across window points.
use unidim::gen::koch::*;
use unidim::stats::replicate_rng;

fn main() {
    for depth in [4u32] {
        let mut worst = f64::INFINITY;
        for seed in 0..80u64 {
            let mut rng = replicate_rng(0xabc, seed * 7 + depth as u64);
            let fig = koch_figure(depth, &mut rng).unwrap();
            let mut ext = fig.clone();
            for _ in 0..6 { ext = ext.grow(&mut rng).unwrap(); }
            let wset: std::collections::HashSet<_> = fig.path.iter().copied().collect();
            let new: Vec<(f64,f64)> = ext.path.iter().filter(|p| !wset.contains(p)).map(|&p| to_euclid(p)).collect();
            let (ax, ay) = to_euclid(fig.a);
            let (bx, by) = to_euclid(fig.b);
            for &p in &fig.path {
                let (x, y) = to_euclid(p);
                let dj = ((x-ax).powi(2)+(y-ay).powi(2)).sqrt().min(((x-bx).powi(2)+(y-by).powi(2)).sqrt());
                if dj < 2.0 { continue; }
                let dn = new.iter().map(|&(a,b)| ((a-x).powi(2)+(b-y).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
                worst = worst.min(dn / dj);
            }
        }
        println!("depth {depth}: worst d(later)/d(junction) over 300 seeds = {worst:.4}");
    }
}
