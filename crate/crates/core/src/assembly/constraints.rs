//! Boundary conditions: periodic folding and homogeneous Dirichlet rows.

use std::fmt;
use std::sync::Arc;

use super::cg::{jacobi, solve_spd_with, SolveInfo, SolverOptions};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::mesh::{PeriodicDirections, Side, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    DirichletZero,
    NeumannZero,
    Periodic,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::DirichletZero => "dirichlet",
            Condition::NeumannZero => "neumann",
            Condition::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Condition> {
        match s {
            "dirichlet" => Some(Condition::DirichletZero),
            "neumann" => Some(Condition::NeumannZero),
            "periodic" => Some(Condition::Periodic),
            _ => None,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Primary unknowns of the Boussinesq system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variable {
    Eta,
    U,
    V,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::Eta, Variable::U, Variable::V];

    pub fn index(self) -> usize {
        match self {
            Variable::Eta => 0,
            Variable::U => 1,
            Variable::V => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::Eta => "eta",
            Variable::U => "u",
            Variable::V => "v",
        }
    }

    pub fn parse(s: &str) -> Option<Variable> {
        Variable::ALL.into_iter().find(|v| v.name() == s)
    }
}

/// Condition per variable and side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundarySpec {
    conditions: [[Condition; 4]; 3],
}

impl BoundarySpec {
    pub fn uniform(c: Condition) -> Self {
        BoundarySpec {
            conditions: [[c; 4]; 3],
        }
    }

    pub fn dirichlet() -> Self {
        Self::uniform(Condition::DirichletZero)
    }

    pub fn neumann() -> Self {
        Self::uniform(Condition::NeumannZero)
    }

    pub fn periodic() -> Self {
        Self::uniform(Condition::Periodic)
    }

    pub fn get(&self, var: Variable, side: Side) -> Condition {
        self.conditions[var.index()][side.index()]
    }

    pub fn set(&mut self, var: Variable, side: Side, c: Condition) {
        self.conditions[var.index()][side.index()] = c;
    }

    pub fn with(mut self, var: Variable, side: Side, c: Condition) -> Self {
        self.set(var, side, c);
        self
    }

    /// Periodic on one side of a pair for any variable must mean periodic on both sides for all.
    pub fn validate(&self) -> Result<()> {
        for (a, b) in [(Side::Left, Side::Right), (Side::Bottom, Side::Top)] {
            let periodic: Vec<bool> = Variable::ALL
                .iter()
                .flat_map(|&v| [self.get(v, a), self.get(v, b)])
                .map(|c| c == Condition::Periodic)
                .collect();
            if periodic.iter().any(|&p| p) && !periodic.iter().all(|&p| p) {
                return Err(Error::Constraint(format!(
                    "periodicity on the {a}/{b} pair must apply to both sides and to eta, u and v"
                )));
            }
        }
        Ok(())
    }

    pub fn periodic_directions(&self) -> Option<PeriodicDirections> {
        let x = self.get(Variable::Eta, Side::Left) == Condition::Periodic;
        let y = self.get(Variable::Eta, Side::Bottom) == Condition::Periodic;
        match (x, y) {
            (true, true) => Some(PeriodicDirections::Both),
            (true, false) => Some(PeriodicDirections::X),
            (false, true) => Some(PeriodicDirections::Y),
            (false, false) => None,
        }
    }

    pub fn is_symmetric_in_xy(&self) -> bool {
        Variable::ALL.iter().all(|&v| {
            self.get(v, Side::Left) == self.get(v, Side::Bottom) && self.get(v, Side::Right) == self.get(v, Side::Top)
        })
    }
}

/// Node to degree-of-freedom numbering; periodic slaves share their master's DOF.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    node_dof: Vec<usize>,
    n_dofs: usize,
}

impl DofMap {
    pub fn new(mesh: &TriMesh) -> Self {
        match mesh.periodic_map() {
            None => DofMap {
                node_dof: (0..mesh.num_nodes()).collect(),
                n_dofs: mesh.num_nodes(),
            },
            Some(map) => {
                let mut node_dof = vec![usize::MAX; mesh.num_nodes()];
                let mut n_dofs = 0;
                for i in 0..mesh.num_nodes() {
                    if map.master[i] == i {
                        node_dof[i] = n_dofs;
                        n_dofs += 1;
                    }
                }
                for i in 0..mesh.num_nodes() {
                    node_dof[i] = node_dof[map.master[i]];
                }
                DofMap { node_dof, n_dofs }
            }
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_nodes(&self) -> usize {
        self.node_dof.len()
    }

    pub fn dof(&self, node: usize) -> usize {
        self.node_dof[node]
    }

    pub fn is_identity(&self) -> bool {
        self.n_dofs == self.node_dof.len()
    }

    /// `P^T b`: sums slave entries into their master.
    pub fn fold_vector(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs];
        for (i, v) in b.iter().enumerate() {
            out[self.node_dof[i]] += v;
        }
        out
    }

    /// `P x`: copies master values onto slaves.
    pub fn unfold_vector(&self, x: &[f64]) -> Vec<f64> {
        self.node_dof.iter().map(|&d| x[d]).collect()
    }

    /// `P^T A P`.
    pub fn fold_matrix(&self, a: &CsrMatrix) -> CsrMatrix {
        if self.is_identity() {
            return a.clone();
        }
        let mut triplets = Vec::with_capacity(a.nnz());
        for r in 0..a.n_rows() {
            let dr = self.node_dof[r];
            triplets.extend(a.row(r).map(|(c, v)| (dr, self.node_dof[c], v)));
        }
        CsrMatrix::from_triplets(self.n_dofs, self.n_dofs, triplets)
    }
}

/// Nodes carrying a homogeneous Dirichlet condition for `var`; Dirichlet wins at corners.
pub fn dirichlet_nodes(mesh: &TriMesh, spec: &BoundarySpec, var: Variable) -> Vec<bool> {
    let mut fixed = vec![false; mesh.num_nodes()];
    for e in mesh.boundary_edges() {
        if spec.get(var, e.side) == Condition::DirichletZero {
            fixed[e.a] = true;
            fixed[e.b] = true;
        }
    }
    fixed
}

/// A folded, constrained operator ready for repeated solves.
#[derive(Clone, Debug)]
pub struct ConstrainedOperator {
    matrix: CsrMatrix,
    dofs: Arc<DofMap>,
    fixed: Vec<bool>,
    inv_diag: Vec<f64>,
}

impl ConstrainedOperator {
    /// Folds periodic DOFs of a node-space matrix and pins Dirichlet DOFs of `var`
    /// (none when `var` is `None`).
    pub fn new(mesh: &TriMesh, matrix: &CsrMatrix, spec: &BoundarySpec, var: Option<Variable>) -> Result<Self> {
        spec.validate()?;
        if spec.periodic_directions().is_some() && mesh.periodic_map().is_none() {
            return Err(Error::Constraint(
                "periodic conditions requested on a mesh without a periodic map".into(),
            ));
        }
        if matrix.n_rows() != mesh.num_nodes() || matrix.n_cols() != mesh.num_nodes() {
            return Err(Error::invalid("matrix size does not match the mesh"));
        }
        let dofs = Arc::new(DofMap::new(mesh));
        let mut folded = dofs.fold_matrix(matrix);
        let mut fixed = vec![false; dofs.n_dofs()];
        if let Some(var) = var {
            for (node, is_fixed) in dirichlet_nodes(mesh, spec, var).into_iter().enumerate() {
                if is_fixed {
                    fixed[dofs.dof(node)] = true;
                }
            }
            folded.pin_dofs(&fixed);
        }
        let inv_diag = jacobi(&folded);
        Ok(ConstrainedOperator {
            matrix: folded,
            dofs,
            fixed,
            inv_diag,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn constrain_rhs(&self, rhs_nodes: &[f64]) -> Vec<f64> {
        let mut b = self.dofs.fold_vector(rhs_nodes);
        for (v, &f) in b.iter_mut().zip(&self.fixed) {
            if f {
                *v = 0.0;
            }
        }
        b
    }

    /// Solves with a node-space right-hand side and returns a node-space field.
    pub fn solve(&self, rhs_nodes: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
        self.solve_with_info(rhs_nodes, opts).map(|(x, _)| x)
    }

    pub fn solve_with_info(&self, rhs_nodes: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveInfo)> {
        let b = self.constrain_rhs(rhs_nodes);
        let (x, info) = solve_spd_with(&self.matrix, &b, Some(&self.inv_diag), opts)?;
        Ok((self.dofs.unfold_vector(&x), info))
    }
}

/// Constrained system and right-hand side in DOF space.
pub fn apply_constraints(
    mesh: &TriMesh,
    matrix: &CsrMatrix,
    rhs: &[f64],
    spec: &BoundarySpec,
    var: Option<Variable>,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let op = ConstrainedOperator::new(mesh, matrix, spec, var)?;
    let b = op.constrain_rhs(rhs);
    Ok((op.matrix, b))
}
