// scratch benchmark — not part of the repo
use qcontrol::rl::{AdamParams, Batch, QNetwork, Trainer};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (ind, nact) in [(8usize, 16usize), (15, 8), (16, 64)] {
        let sizes = [ind, 256, 256, nact];
        let mut net = QNetwork::new(&sizes, &mut rng);
        let target = net.clone();
        let mut trainer = Trainer::new(0.95, AdamParams::with_learning_rate(1e-4), net.param_count());
        let b = 128usize;
        let states: Vec<Vec<f64>> = (0..b).map(|_| (0..ind).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let nexts: Vec<Vec<f64>> = (0..b).map(|_| (0..ind).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let batch = Batch {
            states: states.iter().map(|v| v.as_slice()).collect(),
            actions: (0..b).map(|i| i % nact).collect(),
            rewards: (0..b).map(|i| i as f64 * 0.01).collect(),
            next_states: nexts.iter().map(|v| v.as_slice()).collect(),
            terminals: (0..b).map(|i| i % 17 == 0).collect(),
            weights: vec![1.0; b],
        };
        // warmup
        for _ in 0..50 { trainer.td_update(&mut net, &target, &batch).unwrap(); }
        let n = 500;
        let t0 = Instant::now();
        for _ in 0..n { trainer.td_update(&mut net, &target, &batch).unwrap(); }
        let dt = t0.elapsed().as_secs_f64() / n as f64;
        println!("in={ind} act={nact}: {:.3} ms/update  ({:.1} GFLOP/s est)", dt * 1e3, 75e6 / dt / 1e9);
        // single forward cost (action selection path)
        let obs: Vec<f64> = (0..ind).map(|i| i as f64 * 0.1).collect();
        let t0 = Instant::now();
        let m = 20000;
        let mut acc = 0.0;
        for _ in 0..m { acc += net.forward(&obs).unwrap()[0]; }
        let df = t0.elapsed().as_secs_f64() / m as f64;
        println!("   single forward: {:.1} us (acc {acc:.3})", df * 1e6);
    }
}
