#![allow(dead_code)]

use gridstab::{Cx, Edge, GridSpec, Node};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random connected grid with every branch equal to `c·j`, 3..=12 nodes, at
/// least two generators and usually some loads. Generator shunts are small
/// positive multiples of the branch value; loads have none.
pub fn random_uniform_grid<R: Rng>(rng: &mut R, c: f64) -> GridSpec {
    let v = rng.gen_range(3..=12);
    let n_gen = rng.gen_range(2..=v);
    let branch = Cx::new(0.0, c);

    let mut nodes: Vec<Node> = (0..n_gen)
        .map(|_| Node::generator(branch * rng.gen_range(0.05..1.0)))
        .collect();
    nodes.extend((n_gen..v).map(|_| Node::load(Cx::new(0.0, 0.0))));

    // random spanning tree on a shuffled order, then extra chords
    let mut order: Vec<usize> = (0..v).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 1..v {
        let parent = order[rng.gen_range(0..i)];
        pairs.push((order[i].min(parent), order[i].max(parent)));
    }
    let chord_p = rng.gen_range(0.0..0.4);
    for a in 0..v {
        for b in (a + 1)..v {
            if !pairs.contains(&(a, b)) && rng.gen_bool(chord_p) {
                pairs.push((a, b));
            }
        }
    }
    let edges = pairs.into_iter().map(|(a, b)| Edge::new(a, b, branch)).collect();
    GridSpec::new(nodes, edges).expect("generated grid is valid")
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
