//! Indicator-driven refinement and coarsening, and field transfer between meshes.

pub mod bisect;

pub use bisect::{AdaptStats, AdaptiveMesh};

use crate::assembly::{assemble_mass, solve_spd_with, CsrMatrix, SolverOptions};
use crate::assembly::cg::jacobi;
use crate::error::{Error, Result};
use crate::mesh::{Point, PointLocator, TriMesh};
use crate::quadrature::{map_point, TriangleRule};
use crate::stepper::Fields;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptParams {
    /// Target interpolation error; triangles above it are refined, those below
    /// a quarter of it are coarsened.
    pub err: f64,
    pub hmin: f64,
    pub nbvx: usize,
    /// Steps between adaptations.
    pub cadence: usize,
    /// Halvings between the base mesh and the finest allowed mesh.
    pub levels: u32,
}

impl AdaptParams {
    pub fn new(err: f64, hmin: f64) -> Self {
        AdaptParams {
            err,
            hmin,
            nbvx: 1_000_000,
            cadence: 1,
            levels: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.err > 0.0) || !self.err.is_finite() {
            return Err(Error::invalid(format!("err must be positive, got {}", self.err)));
        }
        if !(self.hmin > 0.0) || !self.hmin.is_finite() {
            return Err(Error::invalid(format!("hmin must be positive, got {}", self.hmin)));
        }
        if self.cadence == 0 {
            return Err(Error::invalid("adaptation cadence must be at least 1"));
        }
        Ok(())
    }
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        let mean = 0.5 * (self.xx + self.yy);
        let rad = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        mean.abs() + rad
    }
}

fn mass_solve(mass: &CsrMatrix, inv: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let opts = SolverOptions::default();
    solve_spd_with(mass, rhs, Some(inv), &opts).map(|(x, _)| x)
}

/// L2 projection of the elementwise gradient onto P1.
fn project_gradient(mesh: &TriMesh, mass: &CsrMatrix, inv: &[f64], f: &[f64]) -> Result<[Vec<f64>; 2]> {
    let n = mesh.num_nodes();
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    for (tri, geom) in mesh.triangles().iter().zip(mesh.geometries()) {
        let g = geom.gradient([f[tri[0]], f[tri[1]], f[tri[2]]]);
        let w = geom.area / 3.0;
        for &i in tri {
            bx[i] += w * g[0];
            by[i] += w * g[1];
        }
    }
    Ok([mass_solve(mass, inv, &bx)?, mass_solve(mass, inv, &by)?])
}

/// Nodal Hessians by two successive gradient projections.
pub fn hessian_recovery(mesh: &TriMesh, field: &[f64]) -> Result<Vec<Sym2>> {
    if field.len() != mesh.num_nodes() {
        return Err(Error::invalid("field length does not match the mesh"));
    }
    let mass = assemble_mass(mesh);
    let inv = jacobi(&mass);
    let [gx, gy] = project_gradient(mesh, &mass, &inv, field)?;
    let [hxx, hxy] = project_gradient(mesh, &mass, &inv, &gx)?;
    let [hyx, hyy] = project_gradient(mesh, &mass, &inv, &gy)?;
    Ok((0..mesh.num_nodes())
        .map(|i| Sym2 {
            xx: hxx[i],
            xy: 0.5 * (hxy[i] + hyx[i]),
            yy: hyy[i],
        })
        .collect())
}

/// Per-triangle `h_T^2` times the spectral radius of the vertex-averaged Hessian.
pub fn indicator(mesh: &TriMesh, field: &[f64]) -> Result<Vec<f64>> {
    let hess = hessian_recovery(mesh, field)?;
    Ok(mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let mut avg = Sym2::default();
            for &i in tri {
                avg.xx += hess[i].xx / 3.0;
                avg.xy += hess[i].xy / 3.0;
                avg.yy += hess[i].yy / 3.0;
            }
            let h = mesh.diameter(t);
            h * h * avg.spectral_radius()
        })
        .collect())
}

/// Values of a P1 field on `old` evaluated at the nodes of `new`.
pub fn transfer(old: &TriMesh, field: &[f64], new: &TriMesh) -> Vec<f64> {
    let locator = PointLocator::new(old);
    new.nodes().iter().map(|&p| locator.evaluate(field, p)).collect()
}

pub fn transfer_fields(old: &TriMesh, fields: &Fields, new: &TriMesh) -> Fields {
    let locator = PointLocator::new(old);
    let eval = |f: &[f64]| -> Vec<f64> { new.nodes().iter().map(|&p| locator.evaluate(f, p)).collect() };
    Fields {
        eta: eval(&fields.eta),
        u: eval(&fields.u),
        v: eval(&fields.v),
    }
}

/// L2 norm of `f_a - f_b` for P1 fields on two meshes of the same domain,
/// integrated with the degree-5 rule on the triangles of `a`.
pub fn l2_difference(a: &TriMesh, fa: &[f64], b: &TriMesh, fb: &[f64]) -> f64 {
    let locator = PointLocator::new(b);
    let rule = TriangleRule::degree5();
    let mut total = 0.0;
    for (t, tri) in a.triangles().iter().enumerate() {
        let verts = a.vertices(t);
        let area = a.element_geometry(t).area;
        for (bary, w) in rule.iter() {
            let va: f64 = (0..3).map(|k| bary[k] * fa[tri[k]]).sum();
            let vb = locator.evaluate(fb, map_point(&verts, bary));
            total += area * w * (va - vb).powi(2);
        }
    }
    total.sqrt()
}

/// Result of one adaptation of a running simulation.
#[derive(Clone, Debug)]
pub struct AdaptOutcome {
    pub fields: Fields,
    pub stats: AdaptStats,
    pub saturated: bool,
}

/// Refinement hierarchy plus parameters, kept across a run.
#[derive(Clone, Debug)]
pub struct Adaptivity {
    pub params: AdaptParams,
    hierarchy: AdaptiveMesh,
    current: TriMesh,
}

impl Adaptivity {
    pub fn new(base: &TriMesh, params: AdaptParams) -> Result<Self> {
        params.validate()?;
        let hierarchy = AdaptiveMesh::new(base)?;
        let current = hierarchy.to_mesh()?;
        Ok(Adaptivity {
            params,
            hierarchy,
            current,
        })
    }

    pub fn current_mesh(&self) -> &TriMesh {
        &self.current
    }

    pub fn hierarchy(&self) -> &AdaptiveMesh {
        &self.hierarchy
    }

    fn pass(&mut self, field: &[f64]) -> Result<AdaptStats> {
        let ind = indicator(&self.current, field)?;
        let err = self.params.err;
        let mut order: Vec<usize> = (0..ind.len()).filter(|&t| ind[t] > err).collect();
        order.sort_by(|&a, &b| ind[b].total_cmp(&ind[a]).then(a.cmp(&b)));
        let coarsen: Vec<bool> = ind.iter().map(|&x| x < 0.25 * err).collect();
        let stats = self
            .hierarchy
            .adapt_pass(&order, &coarsen, self.params.hmin, self.params.nbvx)?;
        if stats.refined > 0 || stats.coarsened > 0 {
            self.current = self.hierarchy.to_mesh()?;
        }
        Ok(stats)
    }

    /// Adapts to a field given in closed form, repeating passes until the mesh
    /// stops changing, and returns the nodal fields on the final mesh.
    pub fn initial(&mut self, f: impl Fn(Point) -> [f64; 3], max_passes: usize) -> Result<Fields> {
        for _ in 0..max_passes {
            let fields = Fields::from_fn(&self.current, &f);
            let stats = self.pass(&fields.eta)?;
            if stats.refined == 0 && stats.coarsened == 0 {
                break;
            }
        }
        Ok(Fields::from_fn(&self.current, &f))
    }

    /// One pass driven by `fields.eta` on `mesh`, which must be the current mesh.
    /// Returns `None` when nothing changed.
    pub fn adapt(&mut self, mesh: &TriMesh, fields: &Fields) -> Result<Option<AdaptOutcome>> {
        if mesh.num_nodes() != self.current.num_nodes() || mesh.num_triangles() != self.current.num_triangles() {
            return Err(Error::invalid("simulation mesh is not the adaptive mesh"));
        }
        let stats = self.pass(&fields.eta)?;
        if stats.refined == 0 && stats.coarsened == 0 {
            return Ok(None);
        }
        Ok(Some(AdaptOutcome {
            fields: transfer_fields(mesh, fields, &self.current),
            saturated: stats.saturated,
            stats,
        }))
    }
}

/// Adapts `mesh` once for `field` and returns the new mesh with its saturation flag.
pub fn adapt_mesh(mesh: &TriMesh, field: &[f64], params: &AdaptParams) -> Result<(TriMesh, AdaptStats)> {
    let mut ad = Adaptivity::new(mesh, *params)?;
    let stats = ad.pass(field)?;
    Ok((ad.current.clone(), stats))
}
