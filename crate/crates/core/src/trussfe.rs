//! Linear-elastic 2-D truss with 13 nodes and 23 axial bars, solved by the
//! direct stiffness method.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

pub const N_NODES: usize = 13;
pub const N_DOF: usize = 2 * N_NODES;
/// Pin at node 0 (both directions) and roller at node 6 (vertical).
pub const FIXED_DOFS: [usize; 3] = [0, 1, 13];
pub const N_FREE: usize = N_DOF - FIXED_DOFS.len();
pub const LOAD_NODES: [usize; 6] = [7, 8, 9, 10, 11, 12];
pub const MIDSPAN_NODE: usize = 3;
/// Floor applied to non-positive section or modulus values.
pub const STIFFNESS_FLOOR: f64 = 1e-30;

static FLOOR_EVENTS: AtomicU64 = AtomicU64::new(0);

/// How many times a non-positive area or modulus has been floored.
pub fn floor_events() -> u64 {
    FLOOR_EVENTS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Chord,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub nodes: (usize, usize),
    pub group: Group,
}

type FreeMatrix = SMatrix<f64, N_FREE, N_FREE>;
type FreeVector = SVector<f64, N_FREE>;

/// Geometry and unit-stiffness matrices of the 23-bar truss.
///
/// Bottom nodes 0..=6 sit at x = 0, 4, ..., 24 m on y = 0; top nodes 7..=12
/// at x = 2, 6, ..., 22 m on y = 2 m.
#[derive(Debug, Clone)]
pub struct TrussModel {
    nodes: [(f64, f64); N_NODES],
    elements: Vec<Element>,
    /// Global stiffness of the chord bars for unit EA, full DOF set.
    k_chord: Box<SMatrix<f64, N_DOF, N_DOF>>,
    k_diag: Box<SMatrix<f64, N_DOF, N_DOF>>,
    free: [usize; N_FREE],
}

impl Default for TrussModel {
    fn default() -> Self {
        Self::new()
    }
}

/// Displacements and reactions of one static solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TrussSolution {
    /// Full displacement vector, `(ux, uy)` per node.
    pub displacements: Vec<f64>,
    /// Support reactions at the fixed DOFs, in [`FIXED_DOFS`] order.
    pub reactions: [f64; 3],
}

impl TrussSolution {
    /// Signed vertical displacement of the midspan bottom node.
    pub fn midspan_deflection(&self) -> f64 {
        self.displacements[2 * MIDSPAN_NODE + 1]
    }
}

impl TrussModel {
    pub fn new() -> Self {
        let mut nodes = [(0.0, 0.0); N_NODES];
        for (i, node) in nodes.iter_mut().take(7).enumerate() {
            *node = (4.0 * i as f64, 0.0);
        }
        for j in 0..6 {
            nodes[7 + j] = (2.0 + 4.0 * j as f64, 2.0);
        }
        let mut elements = Vec::with_capacity(23);
        for i in 0..6 {
            elements.push(Element { nodes: (i, i + 1), group: Group::Chord });
        }
        for j in 0..5 {
            elements.push(Element { nodes: (7 + j, 8 + j), group: Group::Chord });
        }
        for j in 0..6 {
            elements.push(Element { nodes: (j, 7 + j), group: Group::Diagonal });
            elements.push(Element { nodes: (7 + j, j + 1), group: Group::Diagonal });
        }

        let mut k_chord = Box::new(SMatrix::<f64, N_DOF, N_DOF>::zeros());
        let mut k_diag = Box::new(SMatrix::<f64, N_DOF, N_DOF>::zeros());
        for e in &elements {
            let (a, b) = e.nodes;
            let (dx, dy) = (nodes[b].0 - nodes[a].0, nodes[b].1 - nodes[a].1);
            let len = (dx * dx + dy * dy).sqrt();
            let (c, s) = (dx / len, dy / len);
            let local = [c * c / len, c * s / len, s * s / len];
            let target = match e.group {
                Group::Chord => &mut k_chord,
                Group::Diagonal => &mut k_diag,
            };
            let dofs = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1];
            for (p, &i) in dofs.iter().enumerate() {
                for (q, &j) in dofs.iter().enumerate() {
                    let v = match (p % 2, q % 2) {
                        (0, 0) => local[0],
                        (1, 1) => local[2],
                        _ => local[1],
                    };
                    let sign = if (p < 2) == (q < 2) { 1.0 } else { -1.0 };
                    target[(i, j)] += sign * v;
                }
            }
        }

        let mut free = [0usize; N_FREE];
        let mut k = 0;
        for dof in 0..N_DOF {
            if !FIXED_DOFS.contains(&dof) {
                free[k] = dof;
                k += 1;
            }
        }
        TrussModel { nodes, elements, k_chord, k_diag, free }
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Static solve with downward loads `p` (N) at the six top nodes.
    pub fn solve(&self, a1: f64, a2: f64, e1: f64, e2: f64, p: &[f64; 6]) -> Result<TrussSolution> {
        if ![a1, a2, e1, e2].iter().chain(p.iter()).all(|v| v.is_finite()) {
            return Err(Error::Domain("truss inputs must be finite".into()));
        }
        let floor = |v: f64| {
            if v > 0.0 {
                v
            } else {
                FLOOR_EVENTS.fetch_add(1, Ordering::Relaxed);
                STIFFNESS_FLOOR
            }
        };
        let ea_chord = floor(a1) * floor(e1);
        let ea_diag = floor(a2) * floor(e2);

        let mut kff = FreeMatrix::zeros();
        for (r, &i) in self.free.iter().enumerate() {
            for (c, &j) in self.free.iter().enumerate() {
                kff[(r, c)] = ea_chord * self.k_chord[(i, j)] + ea_diag * self.k_diag[(i, j)];
            }
        }
        let mut f = FreeVector::zeros();
        for (load, &node) in p.iter().zip(&LOAD_NODES) {
            let dof = 2 * node + 1;
            let r = self.free.iter().position(|&d| d == dof).expect("load DOF is free");
            f[r] = -load;
        }
        let chol = kff
            .cholesky()
            .ok_or_else(|| Error::Domain("truss stiffness matrix is not positive definite".into()))?;
        let uf = chol.solve(&f);

        let mut displacements = vec![0.0; N_DOF];
        for (r, &dof) in self.free.iter().enumerate() {
            displacements[dof] = uf[r];
        }
        let mut reactions = [0.0; 3];
        for (slot, &i) in reactions.iter_mut().zip(&FIXED_DOFS) {
            *slot = (0..N_DOF)
                .map(|j| (ea_chord * self.k_chord[(i, j)] + ea_diag * self.k_diag[(i, j)]) * displacements[j])
                .sum();
        }
        Ok(TrussSolution { displacements, reactions })
    }

    /// Signed vertical midspan displacement (negative is downward).
    pub fn solve_deflection(&self, a1: f64, a2: f64, e1: f64, e2: f64, p: &[f64; 6]) -> Result<f64> {
        Ok(self.solve(a1, a2, e1, e2, p)?.midspan_deflection())
    }
}

/// `v_max - |deflection|` for `x = [P1..P6, A1, A2, E1, E2]`.
pub fn truss_lsf(model: &TrussModel, x: &[f64], v_max: f64) -> Result<f64> {
    if x.len() != 10 {
        return Err(Error::InvalidArgument(format!("truss expects 10 inputs, got {}", x.len())));
    }
    let p: [f64; 6] = x[..6].try_into().expect("six loads");
    let d = model.solve_deflection(x[6], x[7], x[8], x[9], &p)?;
    Ok(v_max - d.abs())
}
