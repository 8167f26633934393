//! Builders for symmetric test problems.
//!
//! Problems are derived from a discrete energy
//! `E(u) = Σ_edges c_e h^{d−2} (u_i − u_j)² + Σ_nodes w_i q_i u_i²`
//! with mass weights `w_i = h^d` (interior) and `h^d / 2` (boundary).
//! The interior rows are `E[I, :] / h^d`, `b0` is the trace on boundary
//! nodes and `b1 = E[B, :] / h^{d−1}` is the discrete outward normal
//! derivative, so `Q(z)` is a scaled Schur complement of `E`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DiscreteBoundaryProblem;

/// Graph description consumed by [`energy_problem`].
#[derive(Debug, Clone)]
pub struct EnergyGraph {
    pub n_nodes: usize,
    pub boundary: Vec<usize>,
    /// `(i, j, conductance)`.
    pub edges: Vec<(usize, usize, f64)>,
    /// Node potential `q_i`.
    pub potential: Vec<f64>,
    pub h: f64,
    pub dim: u32,
}

/// Assembles the symmetric problem of an energy graph.
pub fn energy_problem(g: &EnergyGraph) -> DiscreteBoundaryProblem {
    let n = g.n_nodes;
    let d = g.dim as i32;
    let mut is_bdy = vec![false; n];
    for &b in &g.boundary {
        is_bdy[b] = true;
    }
    let mut e = DMatrix::<f64>::zeros(n, n);
    let edge_scale = g.h.powi(d - 2);
    for &(i, j, c) in &g.edges {
        let w = c * edge_scale;
        e[(i, i)] += w;
        e[(j, j)] += w;
        e[(i, j)] -= w;
        e[(j, i)] -= w;
    }
    let vol = g.h.powi(d);
    for i in 0..n {
        let w = if is_bdy[i] { 0.5 * vol } else { vol };
        e[(i, i)] += w * g.potential[i];
    }
    let interior: Vec<usize> = (0..n).filter(|&i| !is_bdy[i]).collect();
    let n_int = interior.len();
    let n_b = g.boundary.len();
    let interior_rows = DMatrix::from_fn(n_int, n, |r, j| e[(interior[r], j)] / vol);
    let interior_selector = DMatrix::from_fn(n_int, n, |r, j| if interior[r] == j { 1.0 } else { 0.0 });
    let b0 = DMatrix::from_fn(n_b, n, |r, j| if g.boundary[r] == j { 1.0 } else { 0.0 });
    let area = g.h.powi(d - 1);
    let b1 = DMatrix::from_fn(n_b, n, |r, j| e[(g.boundary[r], j)] / area);
    DiscreteBoundaryProblem::new(interior_rows, interior_selector, b0, b1, true).expect("generator shapes are consistent")
}

/// Chain of `n_nodes` nodes on `[0, length]` with the end nodes as boundary.
pub fn chain_graph(n_nodes: usize, length: f64, conductance: &[f64], potential: Vec<f64>) -> EnergyGraph {
    assert!(n_nodes >= 3, "a chain needs at least one interior node");
    assert_eq!(conductance.len(), n_nodes - 1);
    EnergyGraph {
        n_nodes,
        boundary: vec![0, n_nodes - 1],
        edges: (0..n_nodes - 1).map(|i| (i, i + 1, conductance[i])).collect(),
        potential,
        h: length / (n_nodes - 1) as f64,
        dim: 1,
    }
}

/// Discretization of `−u″ + q(x) u` on `[0, length]` with unit conductance.
pub fn chain_with_potential(n_nodes: usize, length: f64, q: impl Fn(f64) -> f64) -> DiscreteBoundaryProblem {
    let h = length / (n_nodes - 1) as f64;
    let pot = (0..n_nodes).map(|i| q(i as f64 * h)).collect();
    energy_problem(&chain_graph(n_nodes, length, &vec![1.0; n_nodes - 1], pot))
}

/// Random chain on `[0, 1]`: conductances in [0.5, 1.5], potentials in [0.5, 2.5].
pub fn random_chain(seed: u64, n_nodes: usize) -> DiscreteBoundaryProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cond: Vec<f64> = (0..n_nodes - 1).map(|_| rng.random_range(0.5..1.5)).collect();
    let pot: Vec<f64> = (0..n_nodes).map(|_| rng.random_range(0.5..2.5)).collect();
    energy_problem(&chain_graph(n_nodes, 1.0, &cond, pot))
}

/// Random 5-point grid with `nx × ny` interior nodes on the unit square.
///
/// Boundary nodes sit on the four sides (corners dropped) and couple only
/// to their interior neighbour.
pub fn random_grid(seed: u64, nx: usize, ny: usize) -> DiscreteBoundaryProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, hgt) = (nx + 2, ny + 2);
    let is_corner = |i: usize, j: usize| (i == 0 || i == w - 1) && (j == 0 || j == hgt - 1);
    let mut index = vec![usize::MAX; w * hgt];
    let mut n_nodes = 0;
    let mut boundary = Vec::new();
    for j in 0..hgt {
        for i in 0..w {
            if is_corner(i, j) {
                continue;
            }
            index[j * w + i] = n_nodes;
            if i == 0 || j == 0 || i == w - 1 || j == hgt - 1 {
                boundary.push(n_nodes);
            }
            n_nodes += 1;
        }
    }
    let on_side = |i: usize, j: usize| i == 0 || j == 0 || i == w - 1 || j == hgt - 1;
    let mut edges = Vec::new();
    for j in 0..hgt {
        for i in 0..w {
            if is_corner(i, j) {
                continue;
            }
            for (di, dj) in [(1usize, 0usize), (0, 1)] {
                let (i2, j2) = (i + di, j + dj);
                if i2 >= w || j2 >= hgt || is_corner(i2, j2) {
                    continue;
                }
                if on_side(i, j) && on_side(i2, j2) {
                    continue;
                }
                edges.push((index[j * w + i], index[j2 * w + i2], rng.random_range(0.5..1.5)));
            }
        }
    }
    let potential = (0..n_nodes).map(|_| rng.random_range(0.5..2.5)).collect();
    energy_problem(&EnergyGraph {
        n_nodes,
        boundary,
        edges,
        potential,
        h: 1.0 / (nx + 1) as f64,
        dim: 2,
    })
}

/// Three-point Laplacian with `n_interior` nodes and Dirichlet trace rows;
/// `b1` holds the one-sided outward difference quotients.
pub fn dirichlet_chain(n_interior: usize, h: f64) -> DiscreteBoundaryProblem {
    let n = n_interior + 2;
    let h2 = h * h;
    let interior_rows = DMatrix::from_fn(n_interior, n, |r, j| {
        let i = r + 1;
        if j == i {
            2.0 / h2
        } else if j + 1 == i || j == i + 1 {
            -1.0 / h2
        } else {
            0.0
        }
    });
    let interior_selector = DMatrix::from_fn(n_interior, n, |r, j| if j == r + 1 { 1.0 } else { 0.0 });
    let mut b0 = DMatrix::zeros(2, n);
    b0[(0, 0)] = 1.0;
    b0[(1, n - 1)] = 1.0;
    let mut b1 = DMatrix::zeros(2, n);
    b1[(0, 0)] = 1.0 / h;
    b1[(0, 1)] = -1.0 / h;
    b1[(1, n - 1)] = 1.0 / h;
    b1[(1, n - 2)] = -1.0 / h;
    DiscreteBoundaryProblem::new(interior_rows, interior_selector, b0, b1, true).expect("shapes are consistent")
}

impl DiscreteBoundaryProblem {
    /// Copy with `b1` replaced by `b0` (the degenerate family, `Q ≡ I`).
    pub fn with_b1_equal_b0(&self) -> Self {
        let mut p = self.clone();
        p.b1 = p.b0.clone();
        p
    }
}
