// Experiment: stabilization of the distance-to-later-generations map.
use unidim::gen::koch::*;
use unidim::stats::replicate_rng;

fn main() {
    for depth in [4u32, 5, 6] {
        let mut worst45: f64 = f64::INFINITY; // d(ext<=+8)/d(ext<=+4) ratio
        let mut worst_abs: f64 = f64::INFINITY;
        for seed in 0..200u64 {
            let mut rng = replicate_rng(123, seed * 31 + depth as u64);
            let fig = koch_figure(depth, &mut rng).unwrap();
            let mut figs = vec![fig.clone()];
            let mut cur = fig.clone();
            let exts = if depth <= 5 { 8 } else { 6 };
            for _ in 0..exts { cur = cur.grow(&mut rng).unwrap(); figs.push(cur.clone()); }
            let wset: std::collections::HashSet<_> = fig.path.iter().copied().collect();
            let e4set: std::collections::HashSet<_> = figs[4.min(exts)].path.iter().copied().collect();
            let new4: Vec<(f64,f64)> = figs[4.min(exts)].path.iter().filter(|p| !wset.contains(p)).map(|&p| to_euclid(p)).collect();
            let newlater: Vec<(f64,f64)> = figs[exts].path.iter().filter(|p| !e4set.contains(p)).map(|&p| to_euclid(p)).collect();
            // only check the root (the statistic point)
            let (x, y) = to_euclid((0,0));
            let d4 = new4.iter().map(|&(a,b)| ((a-x).powi(2)+(b-y).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
            let dl = newlater.iter().map(|&(a,b)| ((a-x).powi(2)+(b-y).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
            if dl < d4 { worst45 = worst45.min(dl/d4); worst_abs = worst_abs.min(dl); }
        }
        println!("depth {depth}: worst root ratio d(later)/d(<=+4) = {worst45}, abs {worst_abs}");
    }
}
