//! Reference systems used across the test suite.  Not part of the public
//! API surface proper, but exported so integration tests can share them.

use crate::graph::{Digraph, Symbol};
use crate::potentials::{rat_int, PotentialPhi, PotentialPsi};
use std::collections::BTreeMap;

fn full_shift(names: &[&str]) -> Digraph {
    let n = names.len();
    let arrows: Vec<_> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    Digraph::from_indices(names.iter().map(|s| s.to_string()).collect(), arrows)
}

fn phi_matrix(graph: &Digraph, m: &[&[i64]]) -> PotentialPhi {
    let mut values = BTreeMap::new();
    for (a, b) in graph.arrows() {
        values.insert((a, b), rat_int(m[a][b]));
    }
    PotentialPhi::new(graph, values)
}

/// Three symbols on the full shift; maximizing subshift = three fixed
/// points, two of them connected by cheap excursions.  Limit is
/// (delta_a + delta_b)/2.
pub fn example1() -> (Digraph, PotentialPhi, PotentialPsi) {
    let g = full_shift(&["a", "b", "c"]);
    let phi = phi_matrix(&g, &[&[0, -1, -2], &[-1, 0, -2], &[-2, -2, 0]]);
    let psi = PotentialPsi::constant(&g, 0.0);
    (g, phi, psi)
}

/// Four symbols on the full shift; four heavy fixed points with asymmetric
/// excursion costs.  The limit weights are algebraic in the Perron root of
/// x^4 - 4x^2 - 2x + 1.
pub fn example2() -> (Digraph, PotentialPhi, PotentialPsi) {
    let g = full_shift(&["a", "b", "c", "d"]);
    let phi = phi_matrix(
        &g,
        &[
            &[0, -1, -1, -2],
            &[-1, 0, -1, -2],
            &[-1, -1, 0, -1],
            &[-2, -2, -1, 0],
        ],
    );
    let psi = PotentialPsi::constant(&g, 0.0);
    (g, phi, psi)
}

/// Five symbols on the full shift; the recursion needs two renormalization
/// steps (a 3-cycle and a 2-cycle survive the first).  Limit is
/// (1/6,1/6,1/6,1/4,1/4).
pub fn example3() -> (Digraph, PotentialPhi, PotentialPsi) {
    let g = full_shift(&["a", "b", "c", "d", "e"]);
    let phi = phi_matrix(
        &g,
        &[
            &[0, -4, -1, -3, -4],
            &[-1, 0, -4, -3, -3],
            &[-4, -1, 0, -3, -3],
            &[-4, -4, -4, 0, -1],
            &[-3, -4, -4, -1, 0],
        ],
    );
    let psi = PotentialPsi::constant(&g, 0.0);
    (g, phi, psi)
}

/// A once-renormalized five-symbol system whose own renormalization is fully
/// desk-checkable: heavy components are the 3-cycle 1->2->3->1 and the
/// 2-cycle 4<->5, and the second-level potentials are
/// phi'' = [[-oo,-1],[-1,-2]] and psi'' = [[-oo,-log6/2],[log5-log6/2,log3]]
/// (components ordered 2-cycle first).
pub fn example3_level1() -> (Digraph, PotentialPhi, PotentialPsi) {
    let names: Vec<String> = (1..=5).map(|i| i.to_string()).collect();
    let weighted: [(&[(Symbol, Symbol)], i64); 3] = [
        (&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 3)], -1),
        (&[(4, 0), (0, 3), (2, 3), (1, 4), (1, 3), (2, 4)], -2),
        (
            &[
                (1, 0),
                (2, 1),
                (0, 2),
                (0, 4),
                (3, 0),
                (3, 2),
                (4, 1),
                (3, 1),
                (4, 2),
            ],
            -3,
        ),
    ];
    let mut arrows = Vec::new();
    let mut values = BTreeMap::new();
    for (set, w) in weighted {
        for &(a, b) in set {
            arrows.push((a, b));
            values.insert((a, b), rat_int(w));
        }
    }
    let g = Digraph::from_indices(names, arrows);
    let phi = PotentialPhi::new(&g, values);
    let psi = PotentialPsi::constant(&g, 0.0);
    (g, phi, psi)
}

/// Full 3-shift with a heavy fixed point and a heavy 2-cycle whose psi is
/// asymmetric; discriminates eigenvector normalizations in the renormalized
/// psi.  Direct high-precision equilibrium states at beta in {30,60,90} give
/// limit masses (0.335535576, 0.332232212, 0.332232212).
pub fn mixed_period_system() -> (Digraph, PotentialPhi, PotentialPsi) {
    let g = full_shift(&["a", "b", "c"]);
    let phi = phi_matrix(&g, &[&[0, -1, -1], &[-1, -1, 0], &[-1, 0, -1]]);
    let half_log2 = 2f64.ln() / 2.0;
    let mut psi = BTreeMap::new();
    for (a, b) in g.arrows() {
        psi.insert((a, b), 0.0);
    }
    psi.insert((0, 0), half_log2);
    psi.insert((1, 2), 2f64.ln());
    let psi = PotentialPsi::new(&g, psi);
    (g, phi, psi)
}
