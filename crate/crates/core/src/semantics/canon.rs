//! Canonical text for an MRS, independent of variable names and EP order.
//!
//! EPs and variables form a labeled graph. Colors start from local content
//! (predicate and roles, sort and properties) and are refined by neighbor
//! colors until stable. Remaining ties are broken by trying each member of
//! the first tied class and keeping the smallest rendering.

use std::collections::HashMap;

use super::{Hcons, Mrs, Sort};

struct Graph {
    /// Local content of each element, EPs first then distinct variables.
    init: Vec<String>,
    /// `(kind, role, neighbor)`; kind 0 = EP to variable, 1 = variable to
    /// EP, 2 = qeq hi to lo, 3 = qeq lo to hi.
    adj: Vec<Vec<(u8, String, usize)>>,
    n_eps: usize,
    var_ids: HashMap<(Sort, u32), usize>,
}

fn build(m: &Mrs) -> Graph {
    let n_eps = m.eps.len();
    let mut var_ids = HashMap::new();
    let mut init: Vec<String> = m
        .eps
        .iter()
        .map(|ep| {
            let roles: Vec<&str> = ep.args.iter().map(|(r, _)| r.as_str()).collect();
            format!("0 {} {}", ep.predicate, roles.join(","))
        })
        .collect();
    for v in m.occurrences() {
        if let std::collections::hash_map::Entry::Vacant(slot) = var_ids.entry(v.key()) {
            slot.insert(init.len());
            let props: Vec<String> = v.properties.iter().map(|(k, x)| format!("{k}={x}")).collect();
            let top = v.key() == m.top.key();
            let index = v.key() == m.index.key();
            init.push(format!("1 {} {} {} {}", v.sort.letter(), top as u8, index as u8, props.join(",")));
        }
    }
    let mut adj = vec![Vec::new(); init.len()];
    for (i, ep) in m.eps.iter().enumerate() {
        let roles = std::iter::once(("LBL", &ep.label)).chain(ep.args.iter().map(|(r, v)| (r.as_str(), v)));
        for (role, v) in roles {
            let vi = var_ids[&v.key()];
            adj[i].push((0, role.to_string(), vi));
            adj[vi].push((1, role.to_string(), i));
        }
    }
    for hc in &m.hcons {
        let (hi, lo) = (var_ids[&hc.hi.key()], var_ids[&hc.lo.key()]);
        adj[hi].push((2, String::new(), lo));
        adj[lo].push((3, String::new(), hi));
    }
    Graph { init, adj, n_eps, var_ids }
}

fn classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// A color and the sorted `(kind, role, color)` of its neighbors.
type Signature<'a> = (u32, Vec<(u8, &'a str, u32)>);

/// Refines until the partition stops splitting. Ranks keep the old order
/// between classes, so the result depends only on the graph's structure.
fn refine(g: &Graph, mut colors: Vec<u32>) -> Vec<u32> {
    loop {
        let sigs: Vec<Signature> = (0..colors.len())
            .map(|x| {
                let mut nb: Vec<(u8, &str, u32)> =
                    g.adj[x].iter().map(|(k, r, y)| (*k, r.as_str(), colors[*y])).collect();
                nb.sort_unstable();
                (colors[x], nb)
            })
            .collect();
        let mut uniq = sigs.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let next: Vec<u32> = sigs.iter().map(|s| uniq.binary_search(s).unwrap() as u32).collect();
        if classes(&next) == classes(&colors) {
            return next;
        }
        colors = next;
    }
}

fn render(m: &Mrs, g: &Graph, colors: &[u32]) -> String {
    let mut order: Vec<usize> = (0..g.n_eps).collect();
    order.sort_by_key(|&i| colors[i]);
    let mut eps_sorted = Mrs { top: m.top.clone(), index: m.index.clone(), eps: Vec::new(), hcons: Vec::new() };
    eps_sorted.eps = order.iter().map(|&i| m.eps[i].clone()).collect();
    let mut hcons: Vec<&Hcons> = m.hcons.iter().collect();
    hcons.sort_by_key(|hc| (colors[g.var_ids[&hc.hi.key()]], colors[g.var_ids[&hc.lo.key()]]));
    eps_sorted.hcons = hcons.into_iter().cloned().collect();
    let mut numbers: HashMap<(Sort, u32), u32> = HashMap::new();
    for v in eps_sorted.occurrences() {
        let next = numbers.len() as u32;
        numbers.entry(v.key()).or_insert(next);
    }
    eps_sorted
        .map_vars(|v| {
            let mut v = v.clone();
            v.index = numbers[&v.key()];
            v
        })
        .to_string()
}

fn search(m: &Mrs, g: &Graph, colors: Vec<u32>) -> String {
    let colors = refine(g, colors);
    let mut sizes: HashMap<u32, usize> = HashMap::new();
    for &c in &colors {
        *sizes.entry(c).or_default() += 1;
    }
    let Some(target) = sizes.iter().filter(|(_, &n)| n > 1).map(|(&c, _)| c).min() else {
        return render(m, g, &colors);
    };
    (0..colors.len())
        .filter(|&x| colors[x] == target)
        .map(|x| {
            let split: Vec<u32> = colors.iter().enumerate().map(|(y, &c)| 2 * c + u32::from(y != x)).collect();
            search(m, g, split)
        })
        .min()
        .expect("tied class is non-empty")
}

pub fn canonicalize(m: &Mrs) -> String {
    let g = build(m);
    let mut uniq = g.init.clone();
    uniq.sort();
    uniq.dedup();
    let colors = g.init.iter().map(|s| uniq.binary_search(s).unwrap() as u32).collect();
    search(m, &g, colors)
}

/// Same MRS up to variable renaming and EP order; properties must match
/// exactly.
pub fn equivalent(a: &Mrs, b: &Mrs) -> bool {
    a.eps.len() == b.eps.len() && a.hcons.len() == b.hcons.len() && canonicalize(a) == canonicalize(b)
}
