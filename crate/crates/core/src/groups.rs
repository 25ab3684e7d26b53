//! Finite groups stored as full composition tables, their permutation
//! actions, linear representations and group convolution.
//!
//! Composition follows function composition: if `g` and `h` act by the
//! permutations `p_g`, `p_h` then `gh` acts by `u ↦ p_g(p_h(u))`.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::error::{arg_err, dim_err, Error, Result};
use crate::grid::GridSignal;
use crate::numkit::DenseMatrix;

/// Default limit on the size of a generated group.
pub const DEFAULT_GROUP_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

/// Outcome of one group axiom check; `witness` holds the offending indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub passed: bool,
    pub witness: Option<Vec<usize>>,
}

impl AxiomCheck {
    fn pass() -> Self {
        Self { passed: true, witness: None }
    }

    fn fail(witness: Vec<usize>) -> Self {
        Self { passed: false, witness: Some(witness) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub closure: AxiomCheck,
    pub associativity: AxiomCheck,
    pub identity: AxiomCheck,
    pub inverse: AxiomCheck,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.closure.passed && self.associativity.passed && self.identity.passed && self.inverse.passed
    }
}

impl FiniteGroup {
    /// Wrap a square table without checking the axioms.
    ///
    /// Identity and inverses are filled in on a best-effort basis; use
    /// [`verify_group_axioms`] to audit the result.
    pub fn from_table_unchecked(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n) {
            return dim_err("composition table must be square and non-empty");
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .unwrap_or(0);
        let inverses = (0..n)
            .map(|x| (0..n).find(|&y| table[x][y] == identity && table[y][x] == identity).unwrap_or(x))
            .collect();
        Ok(Self { table, identity, inverses })
    }

    /// Wrap a table, rejecting it unless every axiom holds.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let g = Self::from_table_unchecked(table)?;
        let report = verify_group_axioms(&g);
        if !report.all_pass() {
            return Err(Error::InvalidGroup(format!("{report:?}")));
        }
        Ok(g)
    }

    pub fn trivial() -> Self {
        Self { table: vec![vec![0]], identity: 0, inverses: vec![0] }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

/// Exhaustive check of closure, associativity, identity and inverses.
pub fn verify_group_axioms(g: &FiniteGroup) -> AxiomReport {
    let t = &g.table;
    let n = t.len();
    let mut closure = AxiomCheck::pass();
    'outer: for a in 0..n {
        for b in 0..n {
            if t[a][b] >= n {
                closure = AxiomCheck::fail(vec![a, b, t[a][b]]);
                break 'outer;
            }
        }
    }
    let mut associativity = AxiomCheck::pass();
    'assoc: for a in 0..n {
        for b in 0..n {
            let ab = t[a][b];
            for c in 0..n {
                let bc = t[b][c];
                if ab >= n || bc >= n {
                    continue;
                }
                if t[ab][c] != t[a][bc] {
                    associativity = AxiomCheck::fail(vec![a, b, c]);
                    break 'assoc;
                }
            }
        }
    }
    let e = g.identity;
    let identity = match (0..n).find(|&x| t[e][x] != x || t[x][e] != x) {
        None => AxiomCheck::pass(),
        Some(x) => AxiomCheck::fail(vec![e, x]),
    };
    let inverse = match (0..n).find(|&x| {
        let y = g.inverses[x];
        t[x][y] != e || t[y][x] != e
    }) {
        None => AxiomCheck::pass(),
        Some(x) => AxiomCheck::fail(vec![x, g.inverses[x]]),
    };
    AxiomReport { closure, associativity, identity, inverse }
}

/// A group acting on `0..domain` by permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    group: FiniteGroup,
    perms: Vec<Vec<usize>>,
}

impl GroupAction {
    /// Validate `action(e) = id` and `action(g)∘action(h) = action(gh)` exhaustively.
    pub fn new(group: FiniteGroup, perms: Vec<Vec<usize>>) -> Result<Self> {
        if perms.len() != group.order() {
            return dim_err(format!("{} permutations for a group of order {}", perms.len(), group.order()));
        }
        let d = perms.first().map_or(0, Vec::len);
        for p in &perms {
            check_permutation(p, d)?;
        }
        if perms[group.identity()].iter().enumerate().any(|(u, &v)| u != v) {
            return arg_err("identity does not act trivially");
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let ab = &perms[group.compose(a, b)];
                if (0..d).any(|u| perms[a][perms[b][u]] != ab[u]) {
                    return arg_err(format!("action is not compatible with composition at ({a}, {b})"));
                }
            }
        }
        Ok(Self { group, perms })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn domain_size(&self) -> usize {
        self.perms[0].len()
    }

    #[inline]
    pub fn apply(&self, g: usize, u: usize) -> usize {
        self.perms[g][u]
    }

    pub fn permutation(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    /// `(g·x)_u = x_{g⁻¹u}`.
    pub fn act_on_signal(&self, g: usize, x: &[f64]) -> Vec<f64> {
        let inv = &self.perms[self.group.inverse(g)];
        inv.iter().map(|&v| x[v]).collect()
    }

    /// Index of the element acting by `perm`, if any.
    pub fn element_of(&self, perm: &[usize]) -> Option<usize> {
        self.perms.iter().position(|p| p == perm)
    }
}

fn check_permutation(p: &[usize], d: usize) -> Result<()> {
    if p.len() != d {
        return dim_err(format!("permutation of length {} on a domain of size {d}", p.len()));
    }
    let mut seen = vec![false; d];
    for &v in p {
        if v >= d || seen[v] {
            return arg_err(format!("{p:?} is not a permutation"));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Breadth-first closure of the generated permutation group.
///
/// Elements are indexed in discovery order starting from the identity, each
/// new element found by composing a known one with a generator on the right.
pub fn group_from_generators(domain: usize, generators: &[Vec<usize>], cap: usize) -> Result<(FiniteGroup, GroupAction)> {
    for g in generators {
        check_permutation(g, domain)?;
    }
    let identity: Vec<usize> = (0..domain).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut elems = vec![identity.clone()];
    index.insert(identity, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for gen in generators {
            let next: Vec<usize> = gen.iter().map(|&u| elems[i][u]).collect();
            if !index.contains_key(&next) {
                if elems.len() == cap {
                    return Err(Error::GroupTooLarge { cap });
                }
                index.insert(next.clone(), elems.len());
                queue.push_back(elems.len());
                elems.push(next);
            }
        }
    }
    let n = elems.len();
    let table: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let ab: Vec<usize> = elems[b].iter().map(|&u| elems[a][u]).collect();
                    index[&ab]
                })
                .collect()
        })
        .collect();
    let group = FiniteGroup::from_table(table)?;
    let action = GroupAction::new(group.clone(), elems)?;
    Ok((group, action))
}

/// Cyclic group `Z_n` shifting the ring; element `k` is the shift by `k`.
pub fn cyclic_action(n: usize) -> Result<(FiniteGroup, GroupAction)> {
    if n == 0 {
        return arg_err("cyclic group needs n ≥ 1");
    }
    let gen: Vec<usize> = (0..n).map(|u| (u + 1) % n).collect();
    group_from_generators(n, &[gen], DEFAULT_GROUP_CAP)
}

/// `D₃ = Σ₃` from a 3-cycle and a transposition on three points.
pub fn dihedral3_action() -> (FiniteGroup, GroupAction) {
    group_from_generators(3, &[vec![1, 2, 0], vec![1, 0, 2]], DEFAULT_GROUP_CAP).expect("D3 closes")
}

/// Rotations of the 3×3×3 cube acting on its 27 cells (index `x + 3y + 9z`),
/// generated by a quarter turn about z and a third of a turn about the diagonal.
pub fn cube_rotation_action() -> (FiniteGroup, GroupAction) {
    let idx = |x: usize, y: usize, z: usize| x + 3 * y + 9 * z;
    let mut quarter = vec![0; 27];
    let mut third = vec![0; 27];
    for z in 0..3 {
        for y in 0..3 {
            for x in 0..3 {
                quarter[idx(x, y, z)] = idx(2 - y, x, z);
                third[idx(x, y, z)] = idx(y, z, x);
            }
        }
    }
    group_from_generators(27, &[quarter, third], DEFAULT_GROUP_CAP).expect("cube rotations close")
}

/// Flat index of (position, channel) in a position-major grid layout.
#[inline]
fn flat(u: usize, c: usize, channels: usize) -> usize {
    u * channels + c
}

/// Translations of an `n`-position, `channels`-channel grid, acting on flat indices.
pub fn grid_translation_generator(n: usize, channels: usize) -> Vec<usize> {
    let mut p = vec![0; n * channels];
    for u in 0..n {
        for c in 0..channels {
            p[flat(u, c, channels)] = flat((u + 1) % n, c, channels);
        }
    }
    p
}

/// Reverse-complement on a one-hot DNA grid (channels A, C, G, T): position
/// `u ↦ n−1−u` and channel `c ↦ 3−c`.
pub fn revcomp_generator(n: usize) -> Vec<usize> {
    let mut p = vec![0; 4 * n];
    for u in 0..n {
        for c in 0..4 {
            p[flat(u, c, 4)] = flat(n - 1 - u, 3 - c, 4);
        }
    }
    p
}

/// The two-element group `{e, reverse-complement}` on a DNA grid of length `n`.
pub fn revcomp_action(n: usize) -> Result<(FiniteGroup, GroupAction)> {
    if n == 0 {
        return arg_err("sequence length must be positive");
    }
    group_from_generators(4 * n, &[revcomp_generator(n)], DEFAULT_GROUP_CAP)
}

/// Translations together with reverse-complement, order `2n`.
pub fn revcomp_product_action(n: usize) -> Result<(FiniteGroup, GroupAction)> {
    if n == 0 {
        return arg_err("sequence length must be positive");
    }
    group_from_generators(4 * n, &[grid_translation_generator(n, 4), revcomp_generator(n)], DEFAULT_GROUP_CAP)
}

/// One-hot encode a DNA string in channel order A, C, G, T.
pub fn one_hot_dna(seq: &str) -> Result<GridSignal> {
    let mut data = Vec::with_capacity(4 * seq.len());
    for ch in seq.chars() {
        let c = match ch.to_ascii_uppercase() {
            'A' => 0,
            'C' => 1,
            'G' => 2,
            'T' => 3,
            other => return arg_err(format!("not a nucleotide: {other:?}")),
        };
        let mut row = [0.0; 4];
        row[c] = 1.0;
        data.extend_from_slice(&row);
    }
    GridSignal::new(seq.len(), 4, data)
}

/// Matrices `ρ(g)` satisfying the homomorphism identity.
#[derive(Debug, Clone)]
pub struct Representation {
    group: FiniteGroup,
    matrices: Vec<DenseMatrix>,
}

impl Representation {
    /// Check `ρ(e) = I` and `ρ(g)ρ(h) = ρ(gh)` for all pairs to `1e-10`.
    pub fn new(group: FiniteGroup, matrices: Vec<DenseMatrix>) -> Result<Self> {
        if matrices.len() != group.order() {
            return dim_err("one matrix per group element required");
        }
        let d = matrices[0].rows();
        if matrices.iter().any(|m| m.rows() != d || m.cols() != d) {
            return dim_err("representation matrices must be square and equally sized");
        }
        let rep = Self { group, matrices };
        let err = rep.homomorphism_error();
        if err > 1e-10 {
            return arg_err(format!("homomorphism identity violated by {err:e}"));
        }
        let id_err = rep.matrices[rep.group.identity()].sub(&DenseMatrix::identity(d))?.max_abs();
        if id_err > 1e-10 {
            return arg_err("identity is not represented by I");
        }
        Ok(rep)
    }

    pub fn dimension(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn matrix(&self, g: usize) -> &DenseMatrix {
        &self.matrices[g]
    }

    /// `max_{g,h} ‖ρ(g)ρ(h) − ρ(gh)‖_max`.
    pub fn homomorphism_error(&self) -> f64 {
        let n = self.group.order();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let prod = self.matrices[a].matmul(&self.matrices[b]).expect("square");
                let diff = prod.sub(&self.matrices[self.group.compose(a, b)]).expect("same shape");
                worst = worst.max(diff.max_abs());
            }
        }
        worst
    }
}

/// Left translation on functions over the group: `ρ(g)e_h = e_{gh}`.
pub fn regular_representation(g: &FiniteGroup) -> Representation {
    let n = g.order();
    let matrices = (0..n)
        .map(|a| {
            let mut m = DenseMatrix::zeros(n, n);
            for h in 0..n {
                m[(g.compose(a, h), h)] = 1.0;
            }
            m
        })
        .collect();
    Representation::new(g.clone(), matrices).expect("regular representation is a homomorphism")
}

/// `(x⋆θ)(g) = Σ_u x_u θ_{g⁻¹u}`, one value per group element.
pub fn group_convolve(x: &[f64], theta: &[f64], action: &GroupAction) -> Result<Vec<f64>> {
    let d = action.domain_size();
    if x.len() != d || theta.len() != d {
        return dim_err(format!("signals of length {}/{} on a domain of size {d}", x.len(), theta.len()));
    }
    let grp = action.group();
    Ok((0..grp.order())
        .map(|g| {
            let p = action.permutation(grp.inverse(g));
            let mut acc = 0.0;
            for u in 0..d {
                acc += x[u] * theta[p[u]];
            }
            acc
        })
        .collect())
}

/// `(x⋆θ)(g) = Σ_h x(h) θ(g⁻¹h)` for signals on the group itself.
pub fn group_self_convolve(x: &[f64], theta: &[f64], g: &FiniteGroup) -> Result<Vec<f64>> {
    let n = g.order();
    if x.len() != n || theta.len() != n {
        return dim_err(format!("signals of length {}/{} on a group of order {n}", x.len(), theta.len()));
    }
    Ok((0..n)
        .map(|a| {
            let ai = g.inverse(a);
            let mut acc = 0.0;
            for h in 0..n {
                acc += x[h] * theta[g.compose(ai, h)];
            }
            acc
        })
        .collect())
}

/// Filter-transform then translate: channel `h` is the cross-correlation of
/// `x` with `ρ(h)θ`, i.e. `(x⋆θ)(t_k h)` for translations `t_k`.
///
/// `theta` is a filter with the same (position, channel) layout as `x`; the
/// subgroup acts on flat position-major indices and must normalise the
/// translations.
pub fn transform_convolve(x: &GridSignal, theta: &GridSignal, subgroup: &GroupAction) -> Result<Vec<GridSignal>> {
    let (n, ch) = (x.len(), x.channels());
    if theta.len() != n || theta.channels() != ch {
        return dim_err("filter layout differs from signal layout");
    }
    let d = n * ch;
    if subgroup.domain_size() != d {
        return dim_err(format!("subgroup acts on {} points, grid has {d}", subgroup.domain_size()));
    }
    let t1 = grid_translation_generator(n, ch);
    let t_inv: Vec<usize> = {
        let mut inv = vec![0; d];
        for (u, &v) in t1.iter().enumerate() {
            inv[v] = u;
        }
        inv
    };
    let grp = subgroup.group();
    for h in 0..grp.order() {
        let p = subgroup.permutation(h);
        let pi = subgroup.permutation(grp.inverse(h));
        // h t₁ h⁻¹ must be some translation t_j.
        let conj: Vec<usize> = (0..d).map(|u| p[t1[pi[u]]]).collect();
        let j = conj[0] / ch;
        let is_translation = (0..n).all(|u| (0..ch).all(|c| conj[flat(u, c, ch)] == flat((u + j) % n, c, ch)));
        if !is_translation {
            return arg_err(format!("subgroup element {h} does not normalise translations"));
        }
    }
    let xs = x.as_slice();
    let ts = theta.as_slice();
    let mut out = Vec::with_capacity(grp.order());
    for h in 0..grp.order() {
        let hi = subgroup.permutation(grp.inverse(h));
        // (t_k h)⁻¹ w = h⁻¹ t_{-k} w; t_{-k} is built incrementally.
        let mut shift_back: Vec<usize> = (0..d).collect();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let mut acc = 0.0;
            for w in 0..d {
                acc += xs[w] * ts[hi[shift_back[w]]];
            }
            values.push(acc);
            shift_back = shift_back.iter().map(|&v| t_inv[v]).collect();
        }
        out.push(GridSignal::from_values(values)?);
    }
    Ok(out)
}
