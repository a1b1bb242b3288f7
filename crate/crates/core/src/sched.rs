//! Transmission-order algorithms.
//!
//! * [`mpa`]: greedily schedule the user with the smallest penalty now.
//! * [`mtpa`]: greedily schedule the user that can afford the most power now.
//! * [`fpa`]: exact depth-first enumeration with two pruning rules.
//! * [`bfa`]: exhaustive enumeration of all orders.
//! * [`fixed_order`]: the given order with optimal power/time (OTPA), or
//!   with the power cap removed (PCA).
//!
//! Ties are broken towards the lowest user id (greedy algorithms) and the
//! lexicographically smallest order (tree searches).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{SystemParams, UserProfile};
use crate::power::{links, walk_order, Allocation, Link};
use crate::ZERO_PENALTY_TOL;

/// Default largest instance [`bfa`] will enumerate.
pub const BFA_DEFAULT_CAP: usize = 9;
/// Default largest instance the sweep harness hands to [`fpa`].
pub const FPA_DEFAULT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Mpa,
    Mtpa,
    Fpa,
    Bfa,
    Otpa,
    Pca,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Mpa,
        Algorithm::Mtpa,
        Algorithm::Fpa,
        Algorithm::Bfa,
        Algorithm::Otpa,
        Algorithm::Pca,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Mpa => "MPA",
            Algorithm::Mtpa => "MTPA",
            Algorithm::Fpa => "FPA",
            Algorithm::Bfa => "BFA",
            Algorithm::Otpa => "OTPA",
            Algorithm::Pca => "PCA",
        }
    }

    /// Whether the schedule carries a search-node count.
    pub fn is_search(&self) -> bool {
        matches!(self, Algorithm::Fpa | Algorithm::Bfa)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm '{s}'")))
    }
}

/// A complete transmission schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub algorithm: Algorithm,
    /// User ids in transmission order.
    pub order: Vec<usize>,
    pub allocations: Vec<Allocation>,
    pub total_length_s: f64,
    /// `rho_i(s_i)` for each slot, in order.
    pub penalties_s: Vec<f64>,
    /// Search-tree nodes whose slot was computed (FPA and BFA only).
    pub nodes_evaluated: Option<u64>,
}

impl Schedule {
    pub(crate) fn from_allocations(
        algorithm: Algorithm,
        allocations: Vec<Allocation>,
        t_mins: &[f64],
    ) -> Self {
        let total_length_s = allocations.last().map_or(0.0, |a| a.end_time_s());
        let penalties_s = allocations
            .iter()
            .zip(t_mins)
            .map(|(a, t)| a.duration_s - t)
            .collect();
        Schedule {
            algorithm,
            order: allocations.iter().map(|a| a.user_id).collect(),
            allocations,
            total_length_s,
            penalties_s,
            nodes_evaluated: None,
        }
    }

    pub fn sum_durations(&self) -> f64 {
        self.allocations.iter().map(|a| a.duration_s).sum()
    }

    pub fn sum_penalties(&self) -> f64 {
        self.penalties_s.iter().sum()
    }
}

/// Size limits for the exponential searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchCaps {
    pub fpa: usize,
    pub bfa: usize,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps {
            fpa: FPA_DEFAULT_CAP,
            bfa: BFA_DEFAULT_CAP,
        }
    }
}

/// Run `algorithm` on `users` (in their given order for OTPA and PCA).
pub fn run(
    algorithm: Algorithm,
    users: &[UserProfile],
    sys: &SystemParams,
    caps: SearchCaps,
) -> Result<Schedule> {
    match algorithm {
        Algorithm::Mpa => mpa(users, sys),
        Algorithm::Mtpa => mtpa(users, sys),
        Algorithm::Fpa => {
            if users.len() > caps.fpa {
                return Err(Error::SizeCapExceeded {
                    n: users.len(),
                    cap: caps.fpa,
                });
            }
            fpa(users, sys)
        }
        Algorithm::Bfa => bfa(users, sys, caps.bfa),
        Algorithm::Otpa => fixed_order(users, sys, true),
        Algorithm::Pca => fixed_order(users, sys, false),
    }
}

/// Links sorted by user id, which fixes every tie-break below.
fn sorted_links(users: &[UserProfile], sys: &SystemParams) -> Result<Vec<Link>> {
    let mut l = links(users, sys)?;
    l.sort_by_key(|l| l.user_id);
    Ok(l)
}

/// Shared greedy loop: at the current time, allocate every remaining user,
/// keep the one `better` prefers (first wins on ties), and advance.
fn greedy(
    users: &[UserProfile],
    sys: &SystemParams,
    algorithm: Algorithm,
    better: impl Fn(&Allocation, &Link, &Allocation, &Link) -> bool,
) -> Result<Schedule> {
    let mut remaining = sorted_links(users, sys)?;
    let mut chosen = Vec::with_capacity(remaining.len());
    let mut t = 0.0;
    while !remaining.is_empty() {
        let pos = chosen.len();
        let mut best: Option<(usize, Allocation)> = None;
        for (i, link) in remaining.iter().enumerate() {
            let a = link.allocate(t, true).map_err(|e| e.at_position(pos))?;
            let replace = match &best {
                None => true,
                Some((j, b)) => better(&a, link, b, &remaining[*j]),
            };
            if replace {
                best = Some((i, a));
            }
        }
        let (i, a) = best.expect("remaining is non-empty");
        t += a.duration_s;
        chosen.push(remaining.remove(i));
    }
    walk_order(&chosen, true, algorithm)
}

/// Minimum Penalty Algorithm.
pub fn mpa(users: &[UserProfile], sys: &SystemParams) -> Result<Schedule> {
    greedy(users, sys, Algorithm::Mpa, |a, la, b, lb| {
        (a.duration_s - la.t_min_s) < (b.duration_s - lb.t_min_s)
    })
}

/// Maximum Transmit Power Algorithm.
pub fn mtpa(users: &[UserProfile], sys: &SystemParams) -> Result<Schedule> {
    greedy(users, sys, Algorithm::Mtpa, |a, _, b, _| {
        a.power_w > b.power_w
    })
}

/// The given order, with (OTPA) or without (PCA) the power cap.
pub fn fixed_order(users: &[UserProfile], sys: &SystemParams, capped: bool) -> Result<Schedule> {
    let l = links(users, sys)?;
    let alg = if capped {
        Algorithm::Otpa
    } else {
        Algorithm::Pca
    };
    walk_order(&l, capped, alg)
}

/// Brute-force search over all `n!` orders.
///
/// Orders are enumerated lexicographically by user id and only a strictly
/// shorter schedule replaces the incumbent, so among optimal orders the
/// lexicographically smallest is returned.
pub fn bfa(users: &[UserProfile], sys: &SystemParams, cap: usize) -> Result<Schedule> {
    if users.len() > cap {
        return Err(Error::SizeCapExceeded {
            n: users.len(),
            cap,
        });
    }
    bfa_with_prefix(users, sys, &[])
}

/// [`bfa`] restricted to orders that begin with `prefix` (user ids).
pub fn bfa_with_prefix(
    users: &[UserProfile],
    sys: &SystemParams,
    prefix: &[usize],
) -> Result<Schedule> {
    let links = sorted_links(users, sys)?;
    let n = links.len();
    let mut fixed = Vec::with_capacity(prefix.len());
    for id in prefix {
        let i = links
            .iter()
            .position(|l| l.user_id == *id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown user id {id} in prefix")))?;
        if fixed.contains(&i) {
            return Err(Error::InvalidParameter(format!(
                "user id {id} repeated in prefix"
            )));
        }
        fixed.push(i);
    }

    struct Search<'a> {
        links: &'a [Link],
        used: Vec<bool>,
        order: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
        nodes: u64,
    }

    impl Search<'_> {
        fn descend(&mut self, t: f64) -> Result<()> {
            if self.order.len() == self.links.len() {
                if self.best.as_ref().is_none_or(|(b, _)| t < *b) {
                    self.best = Some((t, self.order.clone()));
                }
                return Ok(());
            }
            let pos = self.order.len();
            for i in 0..self.links.len() {
                if self.used[i] {
                    continue;
                }
                let a = self.links[i]
                    .allocate(t, true)
                    .map_err(|e| e.at_position(pos))?;
                self.nodes += 1;
                self.used[i] = true;
                self.order.push(i);
                self.descend(t + a.duration_s)?;
                self.order.pop();
                self.used[i] = false;
            }
            Ok(())
        }
    }

    let mut search = Search {
        links: &links,
        used: vec![false; n],
        order: Vec::with_capacity(n),
        best: None,
        nodes: 0,
    };
    let mut t = 0.0;
    for (pos, &i) in fixed.iter().enumerate() {
        let a = links[i].allocate(t, true).map_err(|e| e.at_position(pos))?;
        search.nodes += 1;
        search.used[i] = true;
        search.order.push(i);
        t += a.duration_s;
    }
    search.descend(t)?;
    let nodes = search.nodes;
    let (_, order) = search.best.expect("at least one order exists");
    let mut s = walk_order(order.iter().map(|&i| &links[i]), true, Algorithm::Bfa)?;
    s.nodes_evaluated = Some(nodes);
    Ok(s)
}

/// A partial order in the FPA search tree.
#[derive(Debug, Clone)]
struct Node {
    /// Indices into the id-sorted link list.
    prefix: Vec<usize>,
    /// Sum of the prefix's slot durations.
    elapsed_s: f64,
    /// Penalty of the last user in the prefix.
    last_penalty_s: f64,
}

impl Node {
    fn ascendant(&self) -> &[usize] {
        &self.prefix[..self.prefix.len() - 1]
    }
}

/// Fast Pruning Algorithm: exact search over orders.
///
/// The open set is always expanded at its deepest level. There the node
/// with the smallest penalty is taken; if that penalty is zero its siblings
/// are dropped (some optimal order continues with it), and if its elapsed
/// time already reaches the incumbent length it is dropped itself. Complete
/// orders update the incumbent when strictly shorter.
pub fn fpa(users: &[UserProfile], sys: &SystemParams) -> Result<Schedule> {
    let links = sorted_links(users, sys)?;
    let n = links.len();
    let mut nodes_evaluated = 0u64;

    let child = |parent: Option<&Node>, i: usize, nodes: &mut u64| -> Result<Node> {
        let (mut prefix, t) = match parent {
            Some(p) => (p.prefix.clone(), p.elapsed_s),
            None => (Vec::with_capacity(n), 0.0),
        };
        let a = links[i]
            .allocate(t, true)
            .map_err(|e| e.at_position(prefix.len()))?;
        *nodes += 1;
        prefix.push(i);
        Ok(Node {
            prefix,
            elapsed_s: t + a.duration_s,
            last_penalty_s: a.duration_s - links[i].t_min_s,
        })
    };

    // levels[s - 1] holds the open nodes of size s
    let mut levels: Vec<Vec<Node>> = vec![Vec::new(); n];
    for i in 0..n {
        let node = child(None, i, &mut nodes_evaluated)?;
        levels[0].push(node);
    }
    let mut best: Option<Node> = None;
    let best_len = |b: &Option<Node>| b.as_ref().map_or(f64::INFINITY, |b| b.elapsed_s);

    while let Some(depth) = levels.iter().rposition(|l| !l.is_empty()) {
        let size = depth + 1;
        if size == n {
            for leaf in std::mem::take(&mut levels[depth]) {
                if leaf.elapsed_s < best_len(&best) {
                    best = Some(leaf);
                }
            }
            continue;
        }

        let level = &mut levels[depth];
        let mut k = 0;
        for (j, node) in level.iter().enumerate().skip(1) {
            let cur = &level[k];
            if node.last_penalty_s < cur.last_penalty_s
                || (node.last_penalty_s == cur.last_penalty_s && node.prefix < cur.prefix)
            {
                k = j;
            }
        }
        let n_min = level.swap_remove(k);

        if n_min.last_penalty_s <= ZERO_PENALTY_TOL {
            level.retain(|other| other.ascendant() != n_min.ascendant());
        }
        if n_min.elapsed_s < best_len(&best) {
            let used: Vec<bool> = (0..n).map(|i| n_min.prefix.contains(&i)).collect();
            for i in (0..n).filter(|&i| !used[i]) {
                let c = child(Some(&n_min), i, &mut nodes_evaluated)?;
                levels[size].push(c);
            }
        }
    }

    let best = best.expect("the first dive always reaches a leaf");
    let mut s = walk_order(best.prefix.iter().map(|&i| &links[i]), true, Algorithm::Fpa)?;
    debug_assert_eq!(s.total_length_s, best.elapsed_s);
    s.nodes_evaluated = Some(nodes_evaluated);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EhParams;

    fn user(id: usize, h: f64, g: f64, battery: f64) -> UserProfile {
        UserProfile {
            id,
            h_down: h,
            g_up: g,
            demand_bits: 100.0,
            battery_j: battery,
            eh: EhParams::default(),
        }
    }

    #[test]
    fn algorithm_tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("mtpa".parse::<Algorithm>().unwrap(), Algorithm::Mtpa);
        assert!("XYZ".parse::<Algorithm>().is_err());
    }

    #[test]
    fn single_user_every_algorithm_agrees() {
        let sys = SystemParams::default();
        let u = [user(3, 1e-4, 1e-5, 1e-9)];
        let reference = fixed_order(&u, &sys, true).unwrap().total_length_s;
        for a in [
            Algorithm::Mpa,
            Algorithm::Mtpa,
            Algorithm::Fpa,
            Algorithm::Bfa,
        ] {
            let s = run(a, &u, &sys, SearchCaps::default()).unwrap();
            assert_eq!(s.order, vec![3]);
            assert_eq!(s.total_length_s, reference);
            assert_eq!(s.algorithm, a);
        }
    }

    #[test]
    fn mpa_picks_smaller_initial_penalty_first() {
        let sys = SystemParams::default();
        // user 1 is closer, so its penalty at t = 0 is smaller
        let users = [user(2, 2e-5, 2e-6, 1e-9), user(1, 1e-3, 1e-4, 1e-9)];
        let l: Vec<Link> = users.iter().map(|u| Link::new(u, &sys)).collect();
        assert!(l[1].penalty_at(0.0).unwrap() < l[0].penalty_at(0.0).unwrap());
        assert_eq!(mpa(&users, &sys).unwrap().order, vec![1, 2]);
    }

    #[test]
    fn zero_penalty_user_goes_first() {
        let sys = SystemParams::default();
        let users = [
            user(0, 1e-4, 1e-5, 1e-9),
            user(1, 5e-5, 2e-6, 1e-9),
            user(2, 3e-5, 1e-6, 1.0),
        ];
        assert_eq!(mpa(&users, &sys).unwrap().order[0], 2);
        assert_eq!(mtpa(&users, &sys).unwrap().order[0], 2);
    }

    #[test]
    fn identical_users_tie_break_by_id() {
        let sys = SystemParams::default();
        let users: Vec<_> = [4, 1, 3]
            .iter()
            .map(|&id| user(id, 1e-4, 1e-5, 1e-9))
            .collect();
        let m = mtpa(&users, &sys).unwrap();
        assert_eq!(m.order, vec![1, 3, 4]);
        let b = bfa(&users, &sys, BFA_DEFAULT_CAP).unwrap();
        let one = fixed_order(&users, &sys, true).unwrap();
        assert_eq!(b.total_length_s, one.total_length_s);
        assert_eq!(b.order, vec![1, 3, 4]);
    }

    #[test]
    fn bfa_enforces_cap() {
        let sys = SystemParams::default();
        let users: Vec<_> = (0..4).map(|id| user(id, 1e-4, 1e-5, 1e-9)).collect();
        assert_eq!(
            bfa(&users, &sys, 3).unwrap_err(),
            Error::SizeCapExceeded { n: 4, cap: 3 }
        );
        let s = run(Algorithm::Fpa, &users, &sys, SearchCaps { fpa: 2, bfa: 9 });
        assert!(matches!(s, Err(Error::SizeCapExceeded { .. })));
    }

    #[test]
    fn bfa_counts_every_prefix() {
        let sys = SystemParams::default();
        let users: Vec<_> = (0..5)
            .map(|id| user(id, 1e-5 * (id + 1) as f64, 1e-6, 1e-9))
            .collect();
        let s = bfa(&users, &sys, 9).unwrap();
        // 5 + 5*4 + 5*4*3 + 5*4*3*2 + 5!
        assert_eq!(s.nodes_evaluated, Some(325));
    }

    #[test]
    fn all_zero_penalty_instance_walks_one_path() {
        let sys = SystemParams::default();
        let n = 8;
        let users: Vec<_> = (0..n).map(|id| user(id, 1e-4, 1e-5, 1.0)).collect();
        let s = fpa(&users, &sys).unwrap();
        // one singleton per user, then a single surviving child chain
        let expected = (n * (n + 1) / 2) as u64;
        assert_eq!(s.nodes_evaluated, Some(expected));
        assert!(expected * 100 < 40_320);
        assert_eq!(s.order, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn fpa_matches_bfa_on_mixed_instance() {
        let sys = SystemParams::default();
        let users = [
            user(0, 4e-5, 3e-6, 1e-9),
            user(1, 9e-4, 2e-4, 1e-9),
            user(2, 1.5e-5, 8e-7, 1e-9),
            user(3, 2e-4, 1e-5, 1e-9),
            user(4, 6e-6, 5e-7, 2e-9),
        ];
        let f = fpa(&users, &sys).unwrap();
        let b = bfa(&users, &sys, 9).unwrap();
        assert!((f.total_length_s - b.total_length_s).abs() <= 1e-12 * b.total_length_s);
        assert!(f.nodes_evaluated.unwrap() < b.nodes_evaluated.unwrap());
        for a in [Algorithm::Mpa, Algorithm::Mtpa, Algorithm::Otpa] {
            let s = run(a, &users, &sys, SearchCaps::default()).unwrap();
            assert!(s.total_length_s >= f.total_length_s * (1.0 - 1e-12));
        }
    }

    #[test]
    fn schedules_are_contiguous_permutations() {
        let sys = SystemParams::default();
        let users = [
            user(10, 4e-5, 3e-6, 1e-9),
            user(11, 9e-4, 2e-4, 1e-9),
            user(12, 1.5e-5, 8e-7, 0.0),
        ];
        for a in Algorithm::ALL {
            let s = run(a, &users, &sys, SearchCaps::default()).unwrap();
            let mut ids = s.order.clone();
            ids.sort_unstable();
            assert_eq!(ids, vec![10, 11, 12]);
            assert_eq!(s.allocations[0].start_time_s, 0.0);
            for w in s.allocations.windows(2) {
                assert_eq!(w[1].start_time_s, w[0].end_time_s());
            }
            let sum = s.sum_durations();
            assert!((s.total_length_s - sum).abs() <= 1e-12 * sum);
            assert_eq!(s.nodes_evaluated.is_some(), a.is_search());
        }
    }

    #[test]
    fn bfa_prefix_validation() {
        let sys = SystemParams::default();
        let users = [user(0, 4e-5, 3e-6, 1e-9), user(1, 9e-4, 2e-4, 1e-9)];
        assert!(bfa_with_prefix(&users, &sys, &[5]).is_err());
        assert!(bfa_with_prefix(&users, &sys, &[1, 1]).is_err());
        let s = bfa_with_prefix(&users, &sys, &[1]).unwrap();
        assert_eq!(s.order[0], 1);
    }
}
