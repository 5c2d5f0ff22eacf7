//! Small finite groups by Cayley table, for oracles.

use std::collections::{HashMap, VecDeque};

/// `mul[a][b] = a·b`; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub mul: Vec<Vec<usize>>,
}

impl Group {
    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order()).find(|&b| self.mul[a][b] == 0).unwrap()
    }

    pub fn element_order(&self, a: usize) -> usize {
        let (mut x, mut k) = (a, 1);
        while x != 0 {
            x = self.mul[x][a];
            k += 1;
        }
        k
    }

    /// Bitmask of the subgroup generated by `mask`.
    pub fn closure(&self, mask: u32) -> u32 {
        let mut out = 1u32;
        let gens: Vec<usize> = (0..self.order()).filter(|&g| mask >> g & 1 == 1).collect();
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul[x][g];
                if out >> y & 1 == 0 {
                    out |= 1 << y;
                    queue.push_back(y);
                }
            }
        }
        out
    }

    /// Every subgroup, as bitmasks.
    pub fn subgroups(&self) -> Vec<u32> {
        let mut found = vec![1u32];
        let mut k = 0;
        while k < found.len() {
            let s = found[k];
            for g in 0..self.order() {
                if s >> g & 1 == 0 {
                    let t = self.closure(s | 1 << g);
                    if !found.contains(&t) {
                        found.push(t);
                    }
                }
            }
            k += 1;
        }
        found.sort();
        found
    }

    /// A small generating set, greedily by element order.
    pub fn generators(&self) -> Vec<usize> {
        let mut by_order: Vec<usize> = (1..self.order()).collect();
        by_order.sort_by_key(|&a| std::cmp::Reverse(self.element_order(a)));
        let (mut gens, mut span) = (Vec::new(), 1u32);
        let full = if self.order() == 32 { u32::MAX } else { (1u32 << self.order()) - 1 };
        while span != full {
            let best = *by_order.iter().max_by_key(|&&a| (self.closure(span | 1 << a).count_ones(), std::cmp::Reverse(a))).unwrap();
            gens.push(best);
            span = self.closure(span | 1 << best);
        }
        gens
    }

    fn invariant(&self) -> Vec<(usize, usize, usize)> {
        let n = self.order();
        let mut v: Vec<_> = (0..n)
            .map(|a| {
                let centraliser = (0..n).filter(|&b| self.mul[a][b] == self.mul[b][a]).count();
                let roots = (0..n).filter(|&b| self.mul[b][b] == a).count();
                (self.element_order(a), centraliser, roots)
            })
            .collect();
        v.sort();
        v
    }
}

/// Homomorphisms `g → h` fixed by images of the generators of `g`.
pub fn homomorphisms(g: &Group, h: &Group, limit: usize) -> Vec<Vec<usize>> {
    let gens = g.generators();
    let orders: Vec<usize> = gens.iter().map(|&a| g.element_order(a)).collect();
    let candidates: Vec<Vec<usize>> =
        orders.iter().map(|&o| (0..h.order()).filter(|&b| o % h.element_order(b) == 0).collect()).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; gens.len()];
    loop {
        let images: Vec<usize> = pick.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        if let Some(map) = extend(g, h, &gens, &images) {
            out.push(map);
            if out.len() >= limit {
                return out;
            }
        }
        // next assignment
        let mut k = 0;
        loop {
            if k == gens.len() {
                return out;
            }
            pick[k] += 1;
            if pick[k] < candidates[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

fn extend(g: &Group, h: &Group, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
    let mut map = vec![usize::MAX; g.order()];
    map[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (&a, &b) in gens.iter().zip(images) {
            let (y, v) = (g.mul[x][a], h.mul[map[x]][b]);
            if map[y] == usize::MAX {
                map[y] = v;
                queue.push_back(y);
            } else if map[y] != v {
                return None;
            }
        }
    }
    Some(map)
}

fn is_bijection(map: &[usize]) -> bool {
    let mut seen = vec![false; map.len()];
    map.iter().all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
}

pub fn isomorphic(g: &Group, h: &Group) -> bool {
    if g.order() != h.order() || g.invariant() != h.invariant() {
        return false;
    }
    homomorphisms(g, h, usize::MAX).iter().any(|m| is_bijection(m))
}

pub fn cyclic(n: usize) -> Group {
    Group { name: format!("C{n}"), mul: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect() }
}

/// `⟨a, x | a^2m, x² = a^m, x a x⁻¹ = a⁻¹⟩`, of order `4m`.
pub fn dicyclic(m: usize) -> Group {
    let n = 2 * m;
    let idx = |k: usize, j: usize| k % n + n * j;
    let mut mul = vec![vec![0; 2 * n]; 2 * n];
    for (k, j) in (0..2).flat_map(|j| (0..n).map(move |k| (k, j))) {
        for (l, i) in (0..2).flat_map(|i| (0..n).map(move |l| (l, i))) {
            mul[idx(k, j)][idx(l, i)] = match (j, i) {
                (0, _) => idx(k + l, i),
                (_, 0) => idx(k + n - l, 1),
                _ => idx(k + n - l + m, 0),
            };
        }
    }
    Group { name: format!("Dic{m}"), mul }
}

/// The automorphisms of `n`, as permutations of its elements.
pub fn automorphisms(n: &Group) -> Vec<Vec<usize>> {
    homomorphisms(n, n, usize::MAX).into_iter().filter(|m| is_bijection(m)).collect()
}

/// `n ⋊ h` through `act[k]`, the automorphism by which element `k` of `h` acts.
pub fn semidirect(n: &Group, h: &Group, act: &[&Vec<usize>]) -> Group {
    let (a, b) = (n.order(), h.order());
    let mut mul = vec![vec![0; a * b]; a * b];
    for (n1, h1) in (0..b).flat_map(|h1| (0..a).map(move |n1| (n1, h1))) {
        for (n2, h2) in (0..b).flat_map(|h2| (0..a).map(move |n2| (n2, h2))) {
            mul[n1 + a * h1][n2 + a * h2] = n.mul[n1][act[h1][n2]] + a * h.mul[h1][h2];
        }
    }
    Group { name: format!("({})x({})", n.name, h.name), mul }
}

/// One group of each isomorphism type of order at most `max`, by order.
///
/// Built from cyclic and dicyclic groups by semidirect products; every group
/// of order up to 24 other than the generalised quaternion ones splits.
pub fn small_groups(max: usize) -> Vec<Vec<Group>> {
    let mut by_order: Vec<Vec<Group>> = vec![Vec::new(); max + 1];
    let add = |by_order: &mut Vec<Vec<Group>>, g: Group| {
        let n = g.order();
        if n <= max && !by_order[n].iter().any(|h| isomorphic(h, &g)) {
            by_order[n].push(g);
        }
    };
    for n in 1..=max {
        add(&mut by_order, cyclic(n));
        if n % 4 == 0 {
            add(&mut by_order, dicyclic(n / 4));
        }
        for a in 2..n {
            if n % a != 0 || n / a < 2 {
                continue;
            }
            let b = n / a;
            for ni in 0..by_order[a].len() {
                let normal = by_order[a][ni].clone();
                let aut = automorphisms(&normal);
                let index: HashMap<&Vec<usize>, usize> = aut.iter().enumerate().map(|(i, m)| (m, i)).collect();
                let aut_group = Group {
                    name: "Aut".into(),
                    mul: aut.iter().map(|f| aut.iter().map(|g| index[&g.iter().map(|&x| f[x]).collect::<Vec<_>>()]).collect()).collect(),
                };
                let identity = index[&(0..a).collect::<Vec<_>>()];
                let aut_group = reindex_identity(aut_group, identity);
                for hi in 0..by_order[b].len() {
                    let h = by_order[b][hi].clone();
                    for phi in homomorphisms(&h, &aut_group.group, usize::MAX) {
                        let act: Vec<&Vec<usize>> = phi.iter().map(|&k| &aut[aut_group.back[k]]).collect();
                        add(&mut by_order, semidirect(&normal, &h, &act));
                    }
                }
            }
        }
    }
    by_order
}

struct Reindexed {
    group: Group,
    /// Original index of each element.
    back: Vec<usize>,
}

/// Moves element `e` to position 0.
fn reindex_identity(g: Group, e: usize) -> Reindexed {
    let n = g.order();
    let mut back: Vec<usize> = (0..n).collect();
    back.swap(0, e);
    let mut fwd = vec![0; n];
    for (i, &b) in back.iter().enumerate() {
        fwd[b] = i;
    }
    let mul = (0..n).map(|i| (0..n).map(|j| fwd[g.mul[back[i]][back[j]]]).collect()).collect();
    Reindexed { group: Group { name: g.name, mul }, back }
}
