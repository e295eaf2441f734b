use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use currseq::learner::{run_learning_episode, LearnerConfig, ValueFunction};
use currseq::mdp::{load_task, EnvKind, TaskSpec};
use currseq::transfer::transfer;

const GRID: &str = "S......\n.......\n..P....\n.......\n....F..\n.......\n......T";

fn grid() -> TaskSpec {
    load_task(GRID, EnvKind::GridWorld).unwrap()
}

fn fresh(task: &TaskSpec, cfg: &LearnerConfig) -> ValueFunction {
    ValueFunction::new(task.variable_names().clone(), task.num_actions(), task.id.clone(), cfg.tiling()).unwrap()
}

fn tiles(c: &mut Criterion) {
    let task = grid();
    let cfg = LearnerConfig::default();
    let vf = fresh(&task, &cfg);
    let obs = task.observe(&task.initial_state());
    c.bench_function("tiles/one_layer", |b| b.iter(|| vf.tiles(&obs).unwrap()));

    let stacked = (0..3).fold(vf.clone(), |v, i| {
        transfer(&v, task.variable_names(), task.num_actions(), &format!("t{i}"), cfg.tiling())
            .unwrap()
            .target
    });
    c.bench_function("tiles/four_layers", |b| b.iter(|| stacked.tiles(&obs).unwrap()));
}

fn episodes(c: &mut Criterion) {
    let task = grid();
    let cfg = LearnerConfig::default();
    c.bench_function("sarsa/episode_7x7", |b| {
        b.iter_batched(
            || (fresh(&task, &cfg), ChaCha8Rng::seed_from_u64(1)),
            |(mut vf, mut rng)| run_learning_episode(&task, &mut vf, &cfg, 0.1, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("sarsa/learn_7x7_100_episodes", |b| {
        b.iter(|| {
            let mut vf = fresh(&task, &cfg);
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for _ in 0..100 {
                run_learning_episode(&task, &mut vf, &cfg, 0.1, &mut rng).unwrap();
            }
            vf
        })
    });
}

criterion_group!(benches, tiles, episodes);
criterion_main!(benches);
