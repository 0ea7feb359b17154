//! Final-update back ends, selectable by name.
//!
//! Every scheme turns the two stage increments into `X^{n+1}`. They differ only
//! in how the mass-matrix identity `M X^{n+1} = M (X^n + (k1 + k2) / 2)` is
//! realized, so all of them produce the same fields up to solver tolerance.

use std::fmt;

use super::{Fields, StageWork};
use crate::assembly::{solve_spd_with, ConstrainedOperator, CsrMatrix, DofMap, SolverOptions};
use crate::assembly::cg::jacobi;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// What a scheme may read while updating.
pub struct UpdateContext<'a> {
    pub mesh: &'a TriMesh,
    /// Node-space consistent mass matrix.
    pub mass: &'a CsrMatrix,
    /// Mass matrix folded for periodicity, without Dirichlet rows.
    pub mass_op: &'a ConstrainedOperator,
    pub solver: &'a SolverOptions,
}

pub trait UpdateScheme: Send {
    fn name(&self) -> &'static str;

    /// Called once per mesh, before the first update on it.
    fn prepare(&mut self, _ctx: &UpdateContext<'_>) -> Result<()> {
        Ok(())
    }

    fn update(&mut self, ctx: &UpdateContext<'_>, fields: &mut Fields, work: &StageWork) -> Result<()>;
}

/// Half-sum of the stage increments, `0.5 k1 + 0.5 k2`.
pub fn half_sum(k1: &[f64], k2: &[f64]) -> Vec<f64> {
    k1.iter().zip(k2).map(|(a, b)| 0.5 * a + 0.5 * b).collect()
}

/// Algorithm 1: direct nodal addition, `X^{n+1} = X^n + (k1 + k2) / 2`.
#[derive(Debug, Default)]
pub struct NodalUpdate;

impl UpdateScheme for NodalUpdate {
    fn name(&self) -> &'static str {
        "algorithm1"
    }

    fn update(&mut self, _ctx: &UpdateContext<'_>, fields: &mut Fields, work: &StageWork) -> Result<()> {
        for (x, (k1, k2)) in fields.iter_mut().into_iter().zip(work.k1().into_iter().zip(work.k2())) {
            for i in 0..x.len() {
                x[i] += 0.5 * k1[i] + 0.5 * k2[i];
            }
        }
        Ok(())
    }
}

/// Algorithm 1 with the update solved through the mass matrix, field by field.
#[derive(Debug, Default)]
pub struct MassSolveUpdate;

impl UpdateScheme for MassSolveUpdate {
    fn name(&self) -> &'static str {
        "algorithm1-mass"
    }

    fn update(&mut self, ctx: &UpdateContext<'_>, fields: &mut Fields, work: &StageWork) -> Result<()> {
        for (x, (k1, k2)) in fields.iter_mut().into_iter().zip(work.k1().into_iter().zip(work.k2())) {
            let target: Vec<f64> = x.iter().zip(half_sum(k1, k2)).map(|(a, b)| a + b).collect();
            let rhs = ctx.mass.mul_vec(&target);
            *x = ctx.mass_op.solve(&rhs, ctx.solver)?;
        }
        Ok(())
    }
}

/// Algorithm 2: one solve with `A = blockdiag(M, M, M)` for the increment,
/// then `X^{n+1} = X + X^n`.
#[derive(Debug, Default)]
pub struct BlockUpdate {
    block: Option<(CsrMatrix, Vec<f64>)>,
}

impl BlockUpdate {
    pub fn block_matrix(&self) -> Option<&CsrMatrix> {
        self.block.as_ref().map(|(a, _)| a)
    }
}

impl UpdateScheme for BlockUpdate {
    fn name(&self) -> &'static str {
        "algorithm2"
    }

    fn prepare(&mut self, ctx: &UpdateContext<'_>) -> Result<()> {
        let m = ctx.mass_op.matrix();
        let a = CsrMatrix::block_diagonal(&[m, m, m]);
        let inv = jacobi(&a);
        self.block = Some((a, inv));
        Ok(())
    }

    fn update(&mut self, ctx: &UpdateContext<'_>, fields: &mut Fields, work: &StageWork) -> Result<()> {
        let (a, inv) = self
            .block
            .as_ref()
            .ok_or_else(|| Error::invalid("block matrix not prepared"))?;
        let dofs: &DofMap = ctx.mass_op.dofs();
        let n = dofs.n_dofs();
        let mut b = Vec::with_capacity(3 * n);
        for (k1, k2) in work.k1().into_iter().zip(work.k2()) {
            let avg = half_sum(k1, k2);
            b.extend(dofs.fold_vector(&ctx.mass.mul_vec(&avg)));
        }
        let (x, _) = solve_spd_with(a, &b, Some(inv), ctx.solver)?;
        for (field, block) in fields.iter_mut().into_iter().zip(x.chunks(n)) {
            let inc = dofs.unfold_vector(block);
            for (f, d) in field.iter_mut().zip(inc) {
                *f += d;
            }
        }
        Ok(())
    }
}

type Factory = fn() -> Box<dyn UpdateScheme>;

struct Entry {
    name: &'static str,
    description: &'static str,
    factory: Factory,
}

/// Update schemes registered by name.
pub struct SchemeRegistry {
    entries: Vec<Entry>,
}

impl fmt::Debug for SchemeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter().map(|e| e.name)).finish()
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut r = SchemeRegistry { entries: Vec::new() };
        r.register("algorithm1", "per-field nodal update", || Box::new(NodalUpdate));
        r.register("algorithm1-mass", "per-field update solved through M", || Box::new(MassSolveUpdate));
        r.register("algorithm2", "block system blockdiag(M,M,M) X = B", || Box::<BlockUpdate>::default());
        r
    }
}

impl SchemeRegistry {
    /// Registers or replaces a scheme.
    pub fn register(&mut self, name: &'static str, description: &'static str, factory: Factory) {
        self.entries.retain(|e| e.name != name);
        self.entries.push(Entry { name, description, factory });
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn UpdateScheme>> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| (e.factory)())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown update scheme `{name}` (known: {})",
                    self.names().collect::<Vec<_>>().join(", ")
                ))
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name)
    }

    pub fn describe(&self) -> impl Iterator<Item = (&'static str, &'static str)> + '_ {
        self.entries.iter().map(|e| (e.name, e.description))
    }
}

/// Registry name for the numbered algorithms used in configs.
pub fn scheme_for_algorithm(algorithm: u8) -> Result<&'static str> {
    match algorithm {
        1 => Ok("algorithm1"),
        2 => Ok("algorithm2"),
        other => Err(Error::invalid(format!("algorithm must be 1 or 2, got {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_defaults() {
        let r = SchemeRegistry::default();
        let names: Vec<_> = r.names().collect();
        assert_eq!(names, ["algorithm1", "algorithm1-mass", "algorithm2"]);
        assert_eq!(r.create("algorithm2").unwrap().name(), "algorithm2");
        assert!(r.create("rk4").is_err());
    }

    #[test]
    fn half_sum_matches_average() {
        let k1 = [1.0, 0.25, -3.0];
        let k2 = [0.5, 0.75, 1.0];
        let h = half_sum(&k1, &k2);
        for i in 0..3 {
            assert_eq!(h[i], (k1[i] + k2[i]) / 2.0);
        }
    }
}
