//! Club registry backing the dynamic social network of the clubs-based PSO.
//!
//! Every particle belongs to a mutable set of clubs; its neighborhood is
//! the union of all members of those clubs. Strong performers shrink their
//! membership (reducing their influence), weak performers grow theirs
//! (learning from more particles), and non-extreme particles drift back to
//! the default level every `retention_ratio` iterations. Vacant clubs are
//! allowed.

use rand::Rng;

/// Club-network sizing and dynamics parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClubParams {
    /// Number of clubs available to join.
    pub club_count: usize,
    /// Smallest membership level a particle may shrink to.
    pub min_membership: usize,
    /// Membership level assigned at startup and regressed to.
    pub default_membership: usize,
    /// Largest membership level a particle may grow to.
    pub max_membership: usize,
    /// Period, in iterations, of the regression-to-default check.
    pub retention_ratio: u64,
}

impl Default for ClubParams {
    fn default() -> Self {
        Self {
            club_count: 100,
            min_membership: 4,
            default_membership: 10,
            max_membership: 33,
            retention_ratio: 10,
        }
    }
}

impl ClubParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_membership == 0
            || self.min_membership > self.default_membership
            || self.default_membership > self.max_membership
            || self.max_membership > self.club_count
            || self.retention_ratio == 0
        {
            return Err(format!("inconsistent club parameters: {self:?}"));
        }
        Ok(())
    }
}

/// Which rule changed a membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembershipAction {
    /// Best of its neighborhood: left a club.
    LeaveBest,
    /// Worst of its neighborhood: joined a club.
    JoinWorst,
    /// Above default at a retention check: left a club.
    RegressLeave,
    /// Below default at a retention check: joined a club.
    RegressJoin,
}

/// One membership mutation, for instrumentation and logging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MembershipChange {
    pub particle: usize,
    pub club: usize,
    pub action: MembershipAction,
}

/// Draws `amount` distinct values from `0..length`, uniformly, by partial
/// Fisher-Yates. Consumes no randomness when every value must be taken.
fn sample_distinct<R: Rng>(rng: &mut R, length: usize, amount: usize) -> Vec<usize> {
    assert!(amount <= length);
    let mut pool: Vec<usize> = (0..length).collect();
    if amount == length {
        return pool;
    }
    for i in 0..amount {
        let j = rng.gen_range(i..length);
        pool.swap(i, j);
    }
    pool.truncate(amount);
    pool
}

/// Per-particle club membership sets plus the inverse member lists.
#[derive(Debug, Clone)]
pub struct ClubRegistry {
    params: ClubParams,
    /// Sorted club ids per particle.
    memberships: Vec<Vec<usize>>,
    /// Sorted particle ids per club.
    members: Vec<Vec<usize>>,
}

impl ClubRegistry {
    /// Each particle joins `default_membership` distinct clubs at random.
    pub fn new<R: Rng>(params: ClubParams, particle_count: usize, rng: &mut R) -> Self {
        params.validate().expect("club parameters");
        let mut registry = Self {
            params,
            memberships: vec![Vec::new(); particle_count],
            members: vec![Vec::new(); params.club_count],
        };
        for particle in 0..particle_count {
            let mut chosen = sample_distinct(rng, params.club_count, params.default_membership);
            chosen.sort_unstable();
            for &club in &chosen {
                registry.members[club].push(particle);
            }
            registry.memberships[particle] = chosen;
        }
        registry
    }

    pub fn params(&self) -> &ClubParams {
        &self.params
    }

    pub fn particle_count(&self) -> usize {
        self.memberships.len()
    }

    pub fn membership(&self, particle: usize) -> &[usize] {
        &self.memberships[particle]
    }

    pub fn membership_level(&self, particle: usize) -> usize {
        self.memberships[particle].len()
    }

    pub fn club_members(&self, club: usize) -> &[usize] {
        &self.members[club]
    }

    /// Union of the members of every club the particle belongs to. Always
    /// contains the particle itself; sorted ascending.
    pub fn neighborhood(&self, particle: usize) -> Vec<usize> {
        let mut seen = vec![false; self.particle_count()];
        let mut out = Vec::new();
        for &club in &self.memberships[particle] {
            for &member in &self.members[club] {
                if !seen[member] {
                    seen[member] = true;
                    out.push(member);
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn leave(&mut self, particle: usize, club: usize) {
        let set = &mut self.memberships[particle];
        let pos = set.binary_search(&club).expect("member of club");
        set.remove(pos);
        let list = &mut self.members[club];
        let pos = list.binary_search(&particle).expect("club lists member");
        list.remove(pos);
    }

    fn join(&mut self, particle: usize, club: usize) {
        let set = &mut self.memberships[particle];
        let pos = set.binary_search(&club).expect_err("not yet a member");
        set.insert(pos, club);
        let list = &mut self.members[club];
        let pos = list.binary_search(&particle).expect_err("not yet listed");
        list.insert(pos, particle);
    }

    fn random_member_club<R: Rng>(&self, particle: usize, rng: &mut R) -> usize {
        let set = &self.memberships[particle];
        set[rng.gen_range(0..set.len())]
    }

    fn random_nonmember_club<R: Rng>(&self, particle: usize, rng: &mut R) -> usize {
        let set = &self.memberships[particle];
        let complement: Vec<usize> = (0..self.params.club_count)
            .filter(|c| set.binary_search(c).is_err())
            .collect();
        complement[rng.gen_range(0..complement.len())]
    }

    /// Applies the three membership rules for one iteration.
    ///
    /// `is_best[j]` / `is_worst[j]` say whether particle `j` is the extreme
    /// of its own neighborhood this iteration (judged before any change).
    /// `iteration` is 1-based; the regression rule runs when it is a
    /// multiple of the retention ratio, and only for particles whose
    /// membership was not changed by an extreme rule in the same pass.
    pub fn update<R: Rng>(
        &mut self,
        is_best: &[bool],
        is_worst: &[bool],
        iteration: u64,
        rng: &mut R,
    ) -> Vec<MembershipChange> {
        assert_eq!(is_best.len(), self.particle_count());
        assert_eq!(is_worst.len(), self.particle_count());
        let mut changes = Vec::new();
        let retention_due = iteration % self.params.retention_ratio == 0;

        for j in 0..self.particle_count() {
            let mut changed = false;
            if is_best[j] && self.membership_level(j) > self.params.min_membership {
                let club = self.random_member_club(j, rng);
                self.leave(j, club);
                changes.push(MembershipChange {
                    particle: j,
                    club,
                    action: MembershipAction::LeaveBest,
                });
                changed = true;
            }
            if is_worst[j] && self.membership_level(j) < self.params.max_membership {
                let club = self.random_nonmember_club(j, rng);
                self.join(j, club);
                changes.push(MembershipChange {
                    particle: j,
                    club,
                    action: MembershipAction::JoinWorst,
                });
                changed = true;
            }
            if !changed && retention_due {
                let level = self.membership_level(j);
                if level > self.params.default_membership {
                    let club = self.random_member_club(j, rng);
                    self.leave(j, club);
                    changes.push(MembershipChange {
                        particle: j,
                        club,
                        action: MembershipAction::RegressLeave,
                    });
                } else if level < self.params.default_membership {
                    let club = self.random_nonmember_club(j, rng);
                    self.join(j, club);
                    changes.push(MembershipChange {
                        particle: j,
                        club,
                        action: MembershipAction::RegressJoin,
                    });
                }
            }
        }
        changes
    }

    /// Verifies the structural invariants; used by the acceptance suite.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (j, set) in self.memberships.iter().enumerate() {
            let level = set.len();
            if level < self.params.min_membership || level > self.params.max_membership {
                return Err(format!(
                    "particle {j} membership level {level} outside [{}, {}]",
                    self.params.min_membership, self.params.max_membership
                ));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("particle {j} has duplicate or unsorted memberships"));
            }
            for &club in set {
                if self.members[club].binary_search(&j).is_err() {
                    return Err(format!("club {club} does not list member {j}"));
                }
            }
        }
        for (club, list) in self.members.iter().enumerate() {
            for &p in list {
                if self.memberships[p].binary_search(&club).is_err() {
                    return Err(format!("particle {p} does not list club {club}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Builds a registry with explicit membership sets (0-based clubs).
    fn registry_from_sets(params: ClubParams, sets: &[&[usize]]) -> ClubRegistry {
        let mut registry = ClubRegistry {
            params,
            memberships: vec![Vec::new(); sets.len()],
            members: vec![Vec::new(); params.club_count],
        };
        for (particle, clubs) in sets.iter().enumerate() {
            let mut sorted: Vec<usize> = clubs.to_vec();
            sorted.sort_unstable();
            for &club in &sorted {
                registry.members[club].push(particle);
            }
            registry.memberships[particle] = sorted;
        }
        registry
    }

    /// The eight-particle, six-club scenario with membership levels
    /// (min, default, max) = (2, 3, 5). Particle and club ids are 0-based;
    /// fitness is arranged so particle 2 is the best of its neighborhood
    /// and particle 4 the worst, while particles 1 and 3 sit above and
    /// below the default level without extreme performance.
    fn snapshot_scenario() -> (ClubRegistry, Vec<bool>, Vec<bool>) {
        let params = ClubParams {
            club_count: 6,
            min_membership: 2,
            default_membership: 3,
            max_membership: 5,
            retention_ratio: 10,
        };
        let registry = registry_from_sets(
            params,
            &[
                &[0, 1, 4],       // p0
                &[0, 1, 2, 3],    // p1: above default
                &[0, 1, 2],       // p2: best of its neighborhood
                &[0, 4],          // p3: below default
                &[2, 4, 5],       // p4: worst of its neighborhood
                &[3, 4, 5],       // p5
                &[1, 3, 5],       // p6
                &[2, 4, 5],       // p7
            ],
        );
        registry.check_invariants().unwrap();

        let fitness = [4.0, 4.5, 1.0, 5.0, 8.0, 3.0, 5.5, 2.0];
        let mut is_best = vec![false; 8];
        let mut is_worst = vec![false; 8];
        for j in 0..8 {
            let hood = registry.neighborhood(j);
            let best = hood
                .iter()
                .copied()
                .min_by(|&a, &b| fitness[a].partial_cmp(&fitness[b]).unwrap())
                .unwrap();
            let worst = hood
                .iter()
                .copied()
                .max_by(|&a, &b| fitness[a].partial_cmp(&fitness[b]).unwrap())
                .unwrap();
            is_best[j] = best == j;
            is_worst[j] = worst == j;
        }
        (registry, is_best, is_worst)
    }

    #[test]
    fn initial_memberships_are_default_level_and_distinct() {
        let params = ClubParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let registry = ClubRegistry::new(params, 20, &mut rng);
        registry.check_invariants().unwrap();
        for j in 0..20 {
            assert_eq!(registry.membership_level(j), params.default_membership);
        }
    }

    #[test]
    fn neighborhood_is_shared_club_union() {
        let (registry, _, _) = snapshot_scenario();
        // Particle 2 belongs to clubs 0, 1, 2: union of their members.
        assert_eq!(registry.neighborhood(2), vec![0, 1, 2, 3, 4, 6, 7]);
    }

    #[test]
    fn best_particle_leaves_one_of_its_clubs() {
        let (registry, is_best, is_worst) = snapshot_scenario();
        assert!(is_best[2] && !is_worst[2]);
        for seed in 0..20 {
            let mut reg = registry.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let changes = reg.update(&is_best, &is_worst, 1, &mut rng);
            let leave: Vec<_> = changes.iter().filter(|c| c.particle == 2).collect();
            assert_eq!(leave.len(), 1);
            assert_eq!(leave[0].action, MembershipAction::LeaveBest);
            assert!([0, 1, 2].contains(&leave[0].club));
            assert_eq!(reg.membership_level(2), 2);
            reg.check_invariants().unwrap();
        }
    }

    #[test]
    fn worst_particle_joins_an_outside_club() {
        let (registry, is_best, is_worst) = snapshot_scenario();
        assert!(is_worst[4] && !is_best[4]);
        for seed in 0..20 {
            let mut reg = registry.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let changes = reg.update(&is_best, &is_worst, 1, &mut rng);
            let join: Vec<_> = changes.iter().filter(|c| c.particle == 4).collect();
            assert_eq!(join.len(), 1);
            assert_eq!(join[0].action, MembershipAction::JoinWorst);
            assert!([0, 1, 3].contains(&join[0].club));
            assert_eq!(reg.membership_level(4), 4);
        }
    }

    #[test]
    fn non_extremes_regress_toward_default_on_retention_iterations() {
        let (registry, is_best, is_worst) = snapshot_scenario();

        // Off-cycle iteration: particles 1 and 3 stay put.
        let mut reg = registry.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let changes = reg.update(&is_best, &is_worst, 1, &mut rng);
        assert!(changes.iter().all(|c| c.particle == 2 || c.particle == 4));

        // Retention iteration: particle 1 leaves, particle 3 joins.
        for seed in 0..20 {
            let mut reg = registry.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let changes = reg.update(&is_best, &is_worst, 10, &mut rng);
            let p1: Vec<_> = changes.iter().filter(|c| c.particle == 1).collect();
            assert_eq!(p1.len(), 1);
            assert_eq!(p1[0].action, MembershipAction::RegressLeave);
            assert!([0, 1, 2, 3].contains(&p1[0].club));
            let p3: Vec<_> = changes.iter().filter(|c| c.particle == 3).collect();
            assert_eq!(p3.len(), 1);
            assert_eq!(p3[0].action, MembershipAction::RegressJoin);
            assert!([1, 2, 3, 5].contains(&p3[0].club));
            reg.check_invariants().unwrap();
        }
    }

    #[test]
    fn extreme_rules_respect_level_limits() {
        let params = ClubParams {
            club_count: 4,
            min_membership: 2,
            default_membership: 2,
            max_membership: 3,
            retention_ratio: 10,
        };
        let registry = registry_from_sets(params, &[&[0, 1], &[2, 3, 0]]);
        // p0 best at min level: no leave. p1 worst at max level: no join.
        let mut reg = registry.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let changes = reg.update(&[true, false], &[false, true], 1, &mut rng);
        assert!(changes.is_empty());
        assert_eq!(reg.membership_level(0), 2);
        assert_eq!(reg.membership_level(1), 3);
    }

    #[test]
    fn blocked_extreme_still_regresses_on_retention() {
        let params = ClubParams {
            club_count: 4,
            min_membership: 1,
            default_membership: 2,
            max_membership: 3,
            retention_ratio: 5,
        };
        // p0 is worst but already at max level; on a retention iteration the
        // (unfired) extreme rule leaves it free to regress downward.
        let registry = registry_from_sets(params, &[&[0, 1, 2], &[3]]);
        let mut reg = registry.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let changes = reg.update(&[false, false], &[true, false], 5, &mut rng);
        assert_eq!(changes.len(), 2);
        assert_eq!(changes[0].particle, 0);
        assert_eq!(changes[0].action, MembershipAction::RegressLeave);
        assert_eq!(changes[1].particle, 1);
        assert_eq!(changes[1].action, MembershipAction::RegressJoin);
    }

    #[test]
    fn sample_distinct_is_uniform_enough_and_draw_free_when_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 6];
        for _ in 0..6000 {
            for v in sample_distinct(&mut rng, 6, 3) {
                counts[v] += 1;
            }
        }
        for &c in &counts {
            // Expect 3000 picks per value.
            assert!((c as f64 - 3000.0).abs() < 300.0, "counts {counts:?}");
        }

        let before = rng.clone();
        let all = sample_distinct(&mut rng, 4, 4);
        assert_eq!(all, vec![0, 1, 2, 3]);
        // No randomness consumed for the forced total draw.
        assert_eq!(rng, before);
    }
}
