//! Multifrontal LU over a geometric nested-dissection ordering.
//!
//! The interior rectangle is split recursively by single grid lines (enough
//! to disconnect a 9-point stencil) until the pieces are small. Each node of
//! the resulting tree owns either a separator line or a whole leaf
//! rectangle. Its frontal matrix couples the owned unknowns with the ring of
//! nodes just outside its rectangle, all of which belong to ancestor
//! separators. Fronts are factorized in postorder; row pivoting is restricted
//! to the fully-summed rows of each front.

use alloc::vec;
use alloc::vec::Vec;

use super::{max_abs_entry, PIVOT_TOLERANCE};
use crate::error::{Error, Result};
use crate::fdops::LinearSystem;

/// Leaves hold at most this many unknowns.
const LEAF_AREA: usize = 36;

#[derive(Debug, Clone)]
struct TreeNode {
    vars: Vec<usize>,
    ring: Vec<usize>,
    children: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Front {
    vars: Vec<usize>,
    ring: Vec<usize>,
    /// `nv × nf`, row-major: unit-lower `L11` below the diagonal, `U11`
    /// on and above it, then `U12`.
    top: Vec<f64>,
    /// `nr × nv`, row-major: `L21`.
    bottom: Vec<f64>,
    piv: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MultifrontalLu {
    dim: usize,
    fronts: Vec<Front>,
}

/// True when every entry couples grid neighbours (9-point pattern) under the
/// system's layout.
pub(super) fn fits(system: &LinearSystem) -> bool {
    let Some((mx, my)) = system.layout() else {
        return false;
    };
    if mx * my != system.dimension() {
        return false;
    }
    system.entries().iter().all(|&(r, c, _)| {
        let (ri, rj) = (r % mx, r / mx);
        let (ci, cj) = (c % mx, c / mx);
        ri.abs_diff(ci) <= 1 && rj.abs_diff(cj) <= 1
    })
}

fn ring_points(rect: (usize, usize, usize, usize), mx: usize, my: usize) -> Vec<usize> {
    let (i0, i1, j0, j1) = rect;
    let mut ring = Vec::new();
    let jlo = j0.saturating_sub(1);
    let jhi = (j1 + 1).min(my);
    let ilo = i0.saturating_sub(1);
    let ihi = (i1 + 1).min(mx);
    for j in jlo..jhi {
        for i in ilo..ihi {
            let inside = i >= i0 && i < i1 && j >= j0 && j < j1;
            if !inside {
                ring.push(j * mx + i);
            }
        }
    }
    ring
}

fn build_tree(
    rect: (usize, usize, usize, usize),
    mx: usize,
    my: usize,
    nodes: &mut Vec<TreeNode>,
) -> Option<usize> {
    let (i0, i1, j0, j1) = rect;
    if i0 >= i1 || j0 >= j1 {
        return None;
    }
    let (w, h) = (i1 - i0, j1 - j0);
    let mut children = Vec::new();
    let vars: Vec<usize> = if w * h <= LEAF_AREA || (w < 3 && h < 3) {
        (j0..j1)
            .flat_map(|j| (i0..i1).map(move |i| j * mx + i))
            .collect()
    } else if w >= h {
        let s = i0 + w / 2;
        children.extend(build_tree((i0, s, j0, j1), mx, my, nodes));
        children.extend(build_tree((s + 1, i1, j0, j1), mx, my, nodes));
        (j0..j1).map(|j| j * mx + s).collect()
    } else {
        let s = j0 + h / 2;
        children.extend(build_tree((i0, i1, j0, s), mx, my, nodes));
        children.extend(build_tree((i0, i1, s + 1, j1), mx, my, nodes));
        (i0..i1).map(|i| s * mx + i).collect()
    };
    nodes.push(TreeNode {
        vars,
        ring: ring_points(rect, mx, my),
        children,
    });
    Some(nodes.len() - 1)
}

struct Compressed {
    start: Vec<usize>,
    index: Vec<usize>,
    value: Vec<f64>,
}

impl Compressed {
    /// Groups triplets by `key` (row or column); `other` gives the partner index.
    fn build(
        dim: usize,
        entries: &[(usize, usize, f64)],
        key: impl Fn(&(usize, usize, f64)) -> (usize, usize),
    ) -> Self {
        let mut start = vec![0usize; dim + 1];
        for e in entries {
            start[key(e).0 + 1] += 1;
        }
        for k in 0..dim {
            start[k + 1] += start[k];
        }
        let mut fill = start.clone();
        let mut index = vec![0usize; entries.len()];
        let mut value = vec![0.0; entries.len()];
        for e in entries {
            let (a, b) = key(e);
            index[fill[a]] = b;
            value[fill[a]] = e.2;
            fill[a] += 1;
        }
        Compressed {
            start,
            index,
            value,
        }
    }

    fn line(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.start[k]..self.start[k + 1];
        self.index[r.clone()]
            .iter()
            .copied()
            .zip(self.value[r].iter().copied())
    }
}

impl MultifrontalLu {
    pub fn factorize(system: &LinearSystem) -> Result<Self> {
        let (mx, my) = system
            .layout()
            .ok_or(Error::InconsistentDimensions("nested dissection needs a grid layout"))?;
        let dim = system.dimension();
        let mut tree = Vec::new();
        build_tree((0, mx, 0, my), mx, my, &mut tree);

        let rows = Compressed::build(dim, system.entries(), |e| (e.0, e.1));
        let cols = Compressed::build(dim, system.entries(), |e| (e.1, e.0));
        let threshold = PIVOT_TOLERANCE * max_abs_entry(system);

        let mut stamp = vec![usize::MAX; dim];
        let mut pos = vec![0usize; dim];
        let mut pending: Vec<Option<Vec<f64>>> = vec![None; tree.len()];
        let mut fronts = Vec::with_capacity(tree.len());

        for (id, node) in tree.iter().enumerate() {
            let nv = node.vars.len();
            let nf = nv + node.ring.len();
            for (k, &g) in node.vars.iter().chain(&node.ring).enumerate() {
                stamp[g] = id;
                pos[g] = k;
            }
            let mut w = vec![0.0; nf * nf];
            for (p, &v) in node.vars.iter().enumerate() {
                for (c, a) in rows.line(v) {
                    if stamp[c] == id {
                        w[p * nf + pos[c]] += a;
                    }
                }
                for (r, a) in cols.line(v) {
                    if stamp[r] == id && pos[r] >= nv {
                        w[pos[r] * nf + p] += a;
                    }
                }
            }
            for &child in &node.children {
                let update = pending[child].take().expect("child factorized first");
                let cring = &tree[child].ring;
                let map: Vec<usize> = cring
                    .iter()
                    .map(|&g| {
                        debug_assert_eq!(stamp[g], id);
                        pos[g]
                    })
                    .collect();
                let nc = cring.len();
                for a in 0..nc {
                    let dst = map[a] * nf;
                    let src = &update[a * nc..(a + 1) * nc];
                    for (b, &val) in src.iter().enumerate() {
                        w[dst + map[b]] += val;
                    }
                }
            }

            let piv = partial_lu(&mut w, nf, nv, threshold).map_err(|(k, pivot)| {
                Error::SingularSystem {
                    index: node.vars[k],
                    pivot,
                }
            })?;

            let nr = nf - nv;
            let mut bottom = Vec::with_capacity(nr * nv);
            let mut update = Vec::with_capacity(nr * nr);
            for r in nv..nf {
                bottom.extend_from_slice(&w[r * nf..r * nf + nv]);
                update.extend_from_slice(&w[r * nf + nv..(r + 1) * nf]);
            }
            w.truncate(nv * nf);
            if nr > 0 {
                pending[id] = Some(update);
            }
            fronts.push(Front {
                vars: node.vars.clone(),
                ring: node.ring.clone(),
                top: w,
                bottom,
                piv,
            });
        }
        Ok(MultifrontalLu { dim, fronts })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        let mut y = Vec::new();
        for f in &self.fronts {
            let nv = f.vars.len();
            let nf = nv + f.ring.len();
            y.clear();
            y.extend(f.vars.iter().map(|&g| x[g]));
            for (k, &p) in f.piv.iter().enumerate() {
                y.swap(k, p);
            }
            for k in 0..nv {
                let row = &f.top[k * nf..k * nf + k];
                let s: f64 = row.iter().zip(&y[..k]).map(|(l, v)| l * v).sum();
                y[k] -= s;
            }
            for (r, &g) in f.ring.iter().enumerate() {
                let row = &f.bottom[r * nv..(r + 1) * nv];
                let s: f64 = row.iter().zip(&y).map(|(l, v)| l * v).sum();
                x[g] -= s;
            }
            for (k, &g) in f.vars.iter().enumerate() {
                x[g] = y[k];
            }
        }
        for f in self.fronts.iter().rev() {
            let nv = f.vars.len();
            let nf = nv + f.ring.len();
            y.clear();
            y.extend(f.vars.iter().map(|&g| x[g]));
            for k in 0..nv {
                let row = &f.top[k * nf + nv..(k + 1) * nf];
                let s: f64 = row.iter().zip(&f.ring).map(|(u, &g)| u * x[g]).sum();
                y[k] -= s;
            }
            for k in (0..nv).rev() {
                let row = &f.top[k * nf..k * nf + nv];
                let s: f64 = row[k + 1..].iter().zip(&y[k + 1..]).map(|(u, v)| u * v).sum();
                y[k] = (y[k] - s) / row[k];
            }
            for (k, &g) in f.vars.iter().enumerate() {
                x[g] = y[k];
            }
        }
        x
    }
}

/// Eliminates the first `nv` unknowns of the dense `nf × nf` front in place.
/// Pivot rows are searched among the first `nv` rows only.
fn partial_lu(
    w: &mut [f64],
    nf: usize,
    nv: usize,
    threshold: f64,
) -> core::result::Result<Vec<usize>, (usize, f64)> {
    let mut piv = Vec::with_capacity(nv);
    for k in 0..nv {
        let mut p = k;
        let mut best = w[k * nf + k].abs();
        for r in k + 1..nv {
            let v = w[r * nf + k].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if !(best > threshold) {
            return Err((k, best));
        }
        piv.push(p);
        if p != k {
            for c in 0..nf {
                w.swap(k * nf + c, p * nf + c);
            }
        }
        let (head, tail) = w.split_at_mut((k + 1) * nf);
        let krow = &head[k * nf..];
        let pivot = krow[k];
        for row in tail.chunks_exact_mut(nf) {
            let l = row[k] / pivot;
            row[k] = l;
            if l != 0.0 {
                for (a, b) in row[k + 1..].iter_mut().zip(&krow[k + 1..]) {
                    *a -= l * b;
                }
            }
        }
    }
    Ok(piv)
}
