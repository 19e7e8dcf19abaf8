//! Depth-first dictionary passing.
//!
//! During one traversal every pre-visited node `j` owns a set `h_tmp[j]` that
//! collects the descendants of `j` whose update `T_j` is nonzero. On the way up
//! nonempty sets are moved into `h_prime`. Between iterations the sets are
//! merged with the previous map and restricted to the new nonzero coefficients.
//! The result `h[j]` is exactly the set of descendants of `j` with a nonzero
//! coefficient, which is what the `B` bounds of the pruning test need.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::bounds::BoundPair;
use crate::error::{Error, Result};

/// Persistent pattern id, see [`crate::enumtree::PatternRegistry`].
pub type PatternId = u32;

/// A map from pattern ids to sets of pattern ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeDictionary {
    entries: BTreeMap<PatternId, BTreeSet<PatternId>>,
}

impl NodeDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, j: PatternId) -> Option<&BTreeSet<PatternId>> {
        self.entries.get(&j)
    }

    pub fn put(&mut self, j: PatternId, set: BTreeSet<PatternId>) {
        self.entries.insert(j, set);
    }

    pub fn keys(&self) -> impl Iterator<Item = PatternId> + '_ {
        self.entries.keys().copied()
    }

    pub fn delete_key(&mut self, j: PatternId) -> Option<BTreeSet<PatternId>> {
        self.entries.remove(&j)
    }

    pub fn contains_key(&self, j: PatternId) -> bool {
        self.entries.contains_key(&j)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PatternId, &BTreeSet<PatternId>)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }
}

impl FromIterator<(PatternId, BTreeSet<PatternId>)> for NodeDictionary {
    fn from_iter<I: IntoIterator<Item = (PatternId, BTreeSet<PatternId>)>>(iter: I) -> Self {
        NodeDictionary {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Dictionaries of one traversal. `h` is the merged map for the current
/// iteration and is only read here.
#[derive(Clone, Debug, Default)]
pub struct PassingState {
    pub h_tmp: NodeDictionary,
    pub h_prime: NodeDictionary,
    pub h: NodeDictionary,
    path: Vec<PatternId>,
}

impl PassingState {
    pub fn new(h: NodeDictionary) -> Self {
        PassingState {
            h,
            ..Self::default()
        }
    }

    /// Pre-visit ids not yet post-visited, root first.
    pub fn path(&self) -> &[PatternId] {
        &self.path
    }

    pub fn on_pre_visit(&mut self, j: PatternId, is_nonzero_t: bool) -> Result<()> {
        if self.h_tmp.contains_key(j) {
            return Err(Error::Protocol(format!("pattern {j} pre-visited twice")));
        }
        if is_nonzero_t {
            for &i in &self.path {
                self.h_tmp.entries.get_mut(&i).expect("path keys are live").insert(j);
            }
        }
        self.h_tmp.put(j, BTreeSet::new());
        self.path.push(j);
        Ok(())
    }

    pub fn on_post_visit(&mut self, j: PatternId) -> Result<()> {
        match self.path.last() {
            Some(&top) if top == j => {}
            Some(&top) => {
                return Err(Error::Protocol(format!(
                    "post-visit of {j} while {top} is still open"
                )))
            }
            None => return Err(Error::Protocol(format!("post-visit of {j} with no open node"))),
        }
        self.path.pop();
        let set = self.h_tmp.delete_key(j).expect("path keys are live");
        if !set.is_empty() {
            self.h_prime.put(j, set);
        }
        Ok(())
    }

    /// Consumes the traversal state, returning `h_prime`.
    pub fn finish(self) -> Result<NodeDictionary> {
        if !self.h_tmp.is_empty() {
            return Err(Error::Protocol(format!("{} nodes never post-visited", self.h_tmp.len())));
        }
        Ok(self.h_prime)
    }
}

/// `h(t)[j] = (h'(t-1)[j] ∪ h(t-1)[j]) ∩ nonzero` for every key of either
/// input. Keys whose set becomes empty are dropped: an empty entry and a
/// missing one mean the same thing to every later merge.
pub fn merge_h(
    h_prev: &NodeDictionary,
    h_prime_prev: &NodeDictionary,
    nonzero_theta: &BTreeSet<PatternId>,
) -> NodeDictionary {
    let mut out = NodeDictionary::new();
    for (j, set) in h_prev.iter().chain(h_prime_prev.iter()) {
        let kept: Vec<PatternId> = set.iter().copied().filter(|k| nonzero_theta.contains(k)).collect();
        if !kept.is_empty() {
            out.entries.entry(j).or_default().extend(kept);
        }
    }
    out
}

/// Range of `(λ2 - H_kk) θ_k` over `k ∈ h[j]`, widened to include zero.
pub fn b_bounds(
    h: &NodeDictionary,
    j: PatternId,
    theta: &HashMap<PatternId, f64>,
    hes: &HashMap<PatternId, f64>,
    lambda2: f64,
) -> Result<BoundPair> {
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    if let Some(set) = h.get(j) {
        for &k in set {
            let t = theta.get(&k).copied().unwrap_or(0.0);
            if t == 0.0 {
                continue;
            }
            let hk = hes
                .get(&k)
                .ok_or_else(|| Error::Internal(format!("no Hessian entry for active pattern {k}")))?;
            let term = (lambda2 - hk) * t;
            lower = lower.min(term);
            upper = upper.max(term);
        }
    }
    Ok(BoundPair::new(lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[PatternId]) -> BTreeSet<PatternId> {
        xs.iter().copied().collect()
    }

    /// A small rooted forest: `children[j]` lists the children of `j`.
    struct Forest {
        roots: Vec<PatternId>,
        children: HashMap<PatternId, Vec<PatternId>>,
    }

    impl Forest {
        fn descendants(&self, j: PatternId) -> BTreeSet<PatternId> {
            let mut out = BTreeSet::new();
            let mut stack: Vec<PatternId> = self.children.get(&j).cloned().unwrap_or_default();
            while let Some(k) = stack.pop() {
                out.insert(k);
                stack.extend(self.children.get(&k).cloned().unwrap_or_default());
            }
            out
        }

        fn walk(&self, state: &mut PassingState, j: PatternId, nonzero: &BTreeSet<PatternId>, check: &mut Vec<PatternId>) {
            state.on_pre_visit(j, nonzero.contains(&j)).unwrap();
            check.push(j);
            let mut keys: Vec<PatternId> = state.h_tmp.keys().collect();
            keys.sort();
            let mut expected = check.clone();
            expected.sort();
            assert_eq!(keys, expected, "h_tmp keys differ from the open path");
            for &c in self.children.get(&j).map(|v| v.as_slice()).unwrap_or(&[]) {
                self.walk(state, c, nonzero, check);
            }
            check.pop();
            state.on_post_visit(j).unwrap();
        }

        fn run(&self, nonzero: &BTreeSet<PatternId>) -> NodeDictionary {
            let mut state = PassingState::default();
            let mut path = Vec::new();
            for &r in &self.roots {
                self.walk(&mut state, r, nonzero, &mut path);
            }
            state.finish().unwrap()
        }

        fn random(rng: &mut impl rand::Rng, n: PatternId) -> Forest {
            let mut roots = vec![0];
            let mut children: HashMap<PatternId, Vec<PatternId>> = HashMap::new();
            for k in 1..n {
                if rng.gen_bool(0.2) {
                    roots.push(k);
                } else {
                    children.entry(rng.gen_range(0..k)).or_default().push(k);
                }
            }
            Forest { roots, children }
        }
    }

    #[test]
    fn first_node_registers_empty_key() {
        let mut s = PassingState::default();
        s.on_pre_visit(1, false).unwrap();
        assert_eq!(s.h_tmp.get(1), Some(&set(&[])));
        assert_eq!(s.h_tmp.len(), 1);
    }

    #[test]
    fn nonzero_node_propagates_to_every_ancestor() {
        let mut s = PassingState::default();
        for j in [1, 2, 3] {
            s.on_pre_visit(j, false).unwrap();
        }
        s.on_pre_visit(5, true).unwrap();
        for j in [1, 2, 3] {
            assert_eq!(s.h_tmp.get(j), Some(&set(&[5])));
        }
        assert_eq!(s.h_tmp.get(5), Some(&set(&[])));
    }

    #[test]
    fn nonzero_root_child_updates_nothing() {
        let mut s = PassingState::default();
        s.on_pre_visit(4, true).unwrap();
        assert_eq!(s.h_tmp.len(), 1);
    }

    #[test]
    fn leaf_with_empty_set_is_not_registered() {
        let mut s = PassingState::default();
        s.on_pre_visit(1, false).unwrap();
        s.on_post_visit(1).unwrap();
        assert!(s.h_tmp.is_empty());
        assert!(s.h_prime.is_empty());
    }

    #[test]
    fn protocol_violations() {
        let mut s = PassingState::default();
        s.on_pre_visit(1, false).unwrap();
        assert!(matches!(s.on_pre_visit(1, false), Err(Error::Protocol(_))));
        assert!(matches!(s.on_post_visit(2), Err(Error::Protocol(_))));
        s.on_pre_visit(2, false).unwrap();
        assert!(matches!(s.on_post_visit(1), Err(Error::Protocol(_))));
        let mut s = PassingState::default();
        assert!(matches!(s.on_post_visit(0), Err(Error::Protocol(_))));
        s.on_pre_visit(3, false).unwrap();
        assert!(s.finish().is_err());
    }

    #[test]
    fn small_tree_example() {
        // 1 -> {2 -> {3 -> {5}}, 4}
        let forest = Forest {
            roots: vec![1],
            children: HashMap::from([(1, vec![2, 4]), (2, vec![3]), (3, vec![5])]),
        };
        let hp = forest.run(&set(&[2, 5]));
        assert_eq!(hp.get(1), Some(&set(&[2, 5])));
        assert_eq!(hp.get(2), Some(&set(&[5])));
        assert_eq!(hp.get(3), Some(&set(&[5])));
        assert_eq!(hp.get(4), None);
        assert_eq!(hp.get(5), None);
    }

    #[test]
    fn h_prime_matches_subtree_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(1..40);
            let forest = Forest::random(&mut rng, n);
            let nonzero: BTreeSet<PatternId> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            let hp = forest.run(&nonzero);
            for j in 0..n {
                let expected: BTreeSet<PatternId> = forest.descendants(j).intersection(&nonzero).copied().collect();
                assert_eq!(hp.get(j).cloned().unwrap_or_default(), expected);
            }
        }
    }

    #[test]
    fn merge_h_examples() {
        let empty = NodeDictionary::new();
        assert!(merge_h(&empty, &empty, &set(&[1, 2])).is_empty());
        let prev: NodeDictionary = [(0, set(&[2, 5]))].into_iter().collect();
        let prime: NodeDictionary = [(0, set(&[7]))].into_iter().collect();
        let h = merge_h(&prev, &prime, &set(&[5, 7]));
        assert_eq!(h.get(0), Some(&set(&[5, 7])));
    }

    #[test]
    fn merge_h_tracks_nonzero_descendants_across_iterations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let n = rng.gen_range(2..30);
            let forest = Forest::random(&mut rng, n);
            let mut theta_nz: BTreeSet<PatternId> = BTreeSet::new();
            let mut h = NodeDictionary::new();
            for _ in 0..6 {
                // the update set, then a new support inside old support ∪ update set
                let t_nz: BTreeSet<PatternId> = (0..n).filter(|_| rng.gen_bool(0.2)).collect();
                let hp = forest.run(&t_nz);
                let pool: Vec<PatternId> = theta_nz.union(&t_nz).copied().collect();
                let next: BTreeSet<PatternId> = pool.into_iter().filter(|_| rng.gen_bool(0.7)).collect();
                h = merge_h(&h, &hp, &next);
                theta_nz = next;
                for j in 0..n {
                    let expected: BTreeSet<PatternId> = forest.descendants(j).intersection(&theta_nz).copied().collect();
                    assert_eq!(h.get(j).cloned().unwrap_or_default(), expected);
                }
            }
        }
    }

    #[test]
    fn b_bounds_examples() {
        let h: NodeDictionary = [(0, set(&[1])), (9, set(&[1, 2]))].into_iter().collect();
        let theta = HashMap::from([(1, 1.0), (2, -0.3)]);
        let hes = HashMap::from([(1, 2.0), (2, 1.0)]);
        assert_eq!(b_bounds(&h, 5, &theta, &hes, 0.0).unwrap(), BoundPair::new(0.0, 0.0));
        assert_eq!(b_bounds(&h, 0, &theta, &hes, 0.0).unwrap(), BoundPair::new(-2.0, 0.0));
        // terms (0.5, -0.3) with λ2 = 2.5: (2.5 - 2) * 1 and (2.5 - 1.5) * -0.3
        let hes2 = HashMap::from([(1, 2.0), (2, 1.5)]);
        let theta2 = HashMap::from([(1, 1.0), (2, -0.3)]);
        let b = b_bounds(&h, 9, &theta2, &hes2, 2.5).unwrap();
        assert!((b.lower + 0.3).abs() < 1e-15 && (b.upper - 0.5).abs() < 1e-15);
        let missing = HashMap::new();
        assert!(matches!(b_bounds(&h, 0, &theta, &missing, 0.0), Err(Error::Internal(_))));
    }
}
