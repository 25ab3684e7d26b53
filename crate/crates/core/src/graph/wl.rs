use std::collections::BTreeMap;

use super::Graph;

/// `(colour, count)` pairs sorted by colour.
pub type ColourHistogram = Vec<(usize, usize)>;

fn histogram(colours: &[usize]) -> ColourHistogram {
    let mut counts = BTreeMap::new();
    for &c in colours {
        *counts.entry(c).or_insert(0) += 1;
    }
    counts.into_iter().collect()
}

/// Colour refinement run jointly over several graphs so colour ids are shared.
///
/// Each round the colour of `u` becomes the id of the string
/// `"colour|sorted neighbour colours"`; ids are assigned by lexicographic
/// order of all signatures seen in that round. Returns, per graph, the
/// histogram of every round from 0 to `rounds`.
pub fn wl_refine_joint(graphs: &[&Graph], initial: Option<&[Vec<usize>]>, rounds: usize) -> Vec<Vec<ColourHistogram>> {
    let mut colours: Vec<Vec<usize>> = match initial {
        Some(init) => init.to_vec(),
        None => graphs.iter().map(|g| vec![0; g.n()]).collect(),
    };
    let mut out: Vec<Vec<ColourHistogram>> = colours.iter().map(|c| vec![histogram(c)]).collect();
    let neighbours: Vec<Vec<Vec<usize>>> = graphs.iter().map(|g| (0..g.n()).map(|u| g.neighbours(u)).collect()).collect();
    for _ in 0..rounds {
        let signatures: Vec<Vec<String>> = colours
            .iter()
            .zip(&neighbours)
            .map(|(col, nbs)| {
                nbs.iter()
                    .enumerate()
                    .map(|(u, nb)| {
                        let mut nc: Vec<usize> = nb.iter().map(|&v| col[v]).collect();
                        nc.sort_unstable();
                        let nc: Vec<String> = nc.iter().map(usize::to_string).collect();
                        format!("{}|{}", col[u], nc.join(","))
                    })
                    .collect()
            })
            .collect();
        let mut all: Vec<&String> = signatures.iter().flatten().collect();
        all.sort();
        all.dedup();
        let ids: BTreeMap<&String, usize> = all.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        colours = signatures.iter().map(|sig| sig.iter().map(|s| ids[s]).collect()).collect();
        for (o, c) in out.iter_mut().zip(&colours) {
            o.push(histogram(c));
        }
    }
    out
}

/// Colour histograms of `g` for rounds `0..=rounds`, all nodes starting equal.
pub fn wl_refine(g: &Graph, rounds: usize) -> Vec<ColourHistogram> {
    wl_refine_joint(&[g], None, rounds).pop().expect("one graph in, one out")
}

/// True iff some round separates the two graphs' colour histograms.
pub fn wl_distinguish(g1: &Graph, g2: &Graph, rounds: usize) -> bool {
    let h = wl_refine_joint(&[g1, g2], None, rounds);
    h[0].iter().zip(&h[1]).any(|(a, b)| a != b)
}

#[cfg(test)]
mod tests {
    use super::super::{permute_graph, Permutation};
    use super::*;
    use crate::numkit::DenseMatrix;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges, DenseMatrix::zeros(n, 0)).unwrap()
    }

    #[test]
    fn edgeless_graph_keeps_one_colour() {
        let h = wl_refine(&graph(4, &[]), 3);
        assert!(h.iter().all(|r| r == &vec![(0, 4)]));
    }

    #[test]
    fn path_and_triangle_split_at_round_one() {
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let h = wl_refine_joint(&[&p3, &k3], None, 1);
        assert_eq!(h[0][0], h[1][0]);
        assert_ne!(h[0][1], h[1][1]);
        let counts: Vec<usize> = h[0][1].iter().map(|&(_, c)| c).collect();
        assert_eq!(counts, vec![2, 1]);
        assert!(wl_distinguish(&p3, &k3, 1));
    }

    #[test]
    fn hexagon_versus_two_triangles_is_invisible() {
        let c6 = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let tt = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        assert!(!wl_distinguish(&c6, &tt, 6));
    }

    #[test]
    fn stabilises_within_n_rounds() {
        let mut rng = crate::rng::seeded(12);
        let g = Graph::random(7, 0, 0.4, &mut rng);
        let h = wl_refine(&g, 10);
        assert!(h[7..].windows(2).all(|w| w[0].len() == w[1].len()));
        let sizes: Vec<usize> = h.iter().map(Vec::len).collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn relabelled_graphs_are_indistinguishable() {
        let mut rng = crate::rng::seeded(13);
        for _ in 0..10 {
            let g = Graph::random(8, 0, 0.35, &mut rng);
            let p = Permutation::random(8, &mut rng);
            assert!(!wl_distinguish(&g, &permute_graph(&g, &p).unwrap(), 8));
        }
    }
}
