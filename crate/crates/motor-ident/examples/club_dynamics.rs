//! Watch the clubs-based PSO's social network adapt during a run: the
//! membership-level spread, the rule firing counts, and how many distinct
//! particles hold the swarm-best position over time.
//!
//! ```text
//! cargo run --release --example club_dynamics [iterations] [seed]
//! ```

use motor_ident::objective::{sphere, Budget, FnObjective, SearchSpace};
use motor_ident::pso::{ClubParams, MembershipAction, PsoConfig, Swarm, Topology};
use motor_ident::harness::TraceRecorder;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let iterations: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(500);
    let seed: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);

    let space = SearchSpace::symmetric(5.12);
    let params = ClubParams::default();
    let config = PsoConfig::clubs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut swarm = Swarm::new(&space, config, Some(params), &mut rng);
    let mut objective = FnObjective::new(
        sphere,
        Budget::new(iterations * config.swarm_size as u64),
    );
    let mut trace = TraceRecorder::new();

    let mut leaders = std::collections::BTreeSet::new();
    let mut fired = [0u64; 4];

    println!(
        "{:>5} {:>6} {:>6} {:>6} {:>9} {:>12}",
        "iter", "min", "mean", "max", "leaders", "best"
    );
    for iteration in 1..=iterations {
        if !swarm.evaluate_all(&mut objective, &mut trace) {
            break;
        }
        let (leader, best, _) = swarm.global_best();
        leaders.insert(leader);
        swarm.move_particles(&mut rng);
        for change in swarm.update_clubs(iteration, &mut rng) {
            let slot = match change.action {
                MembershipAction::LeaveBest => 0,
                MembershipAction::JoinWorst => 1,
                MembershipAction::RegressLeave => 2,
                MembershipAction::RegressJoin => 3,
            };
            fired[slot] += 1;
        }

        if iteration % (iterations / 10).max(1) == 0 {
            let registry = swarm.registry().unwrap();
            let levels: Vec<usize> = (0..config.swarm_size)
                .map(|j| registry.membership_level(j))
                .collect();
            let min = levels.iter().min().unwrap();
            let max = levels.iter().max().unwrap();
            let mean = levels.iter().sum::<usize>() as f64 / levels.len() as f64;
            println!(
                "{iteration:>5} {min:>6} {mean:>6.1} {max:>6} {:>9} {best:>12.3e}",
                leaders.len()
            );
        }
    }

    assert_eq!(swarm.config.topology, Topology::Clubs);
    println!(
        "\nrule firings: leave-as-best {}, join-as-worst {}, regress-leave {}, regress-join {}",
        fired[0], fired[1], fired[2], fired[3]
    );
    println!(
        "{} of {} particles led the swarm at least once",
        leaders.len(),
        config.swarm_size
    );
}
