//! P1 assembly of the matrices and load vectors of the RK2 stage problems.
//!
//! Load vectors for the nonlinear right-hand sides use the three edge-midpoint
//! rule, which is exact here since every integrand is at most quadratic on an
//! element. Boundary flux terms of the integrated-by-parts forms are dropped.

pub mod cg;
pub mod constraints;
pub mod sparse;

pub use cg::{solve_spd, solve_spd_with, SolveInfo, SolverOptions};
pub use constraints::{
    apply_constraints, dirichlet_nodes, BoundarySpec, Condition, ConstrainedOperator, DofMap, Variable,
};
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};
use crate::quadrature::{map_point, TriangleRule};

/// Consistent mass matrix.
pub fn assemble_mass(mesh: &TriMesh) -> CsrMatrix {
    let mut m = CsrMatrix::mesh_pattern(mesh);
    for (tri, geom) in mesh.triangles().iter().zip(mesh.geometries()) {
        let diag = geom.area / 6.0;
        let off = geom.area / 12.0;
        for (i, &a) in tri.iter().enumerate() {
            for (j, &b) in tri.iter().enumerate() {
                m.add_at(a, b, if i == j { diag } else { off });
            }
        }
    }
    m
}

/// Stiffness matrix `K_ij = <grad phi_j, grad phi_i>`.
pub fn assemble_stiffness(mesh: &TriMesh) -> CsrMatrix {
    let mut k = CsrMatrix::mesh_pattern(mesh);
    for (tri, geom) in mesh.triangles().iter().zip(mesh.geometries()) {
        let g = &geom.grad_lambda;
        for i in 0..3 {
            for j in 0..3 {
                let v = geom.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                k.add_at(tri[i], tri[j], v);
            }
        }
    }
    k
}

/// `M + coef K`, the discrete `(Id - coef Laplacian)`.
pub fn assemble_helmholtz(mass: &CsrMatrix, stiffness: &CsrMatrix, coef: f64) -> Result<CsrMatrix> {
    if !(coef >= 0.0) {
        return Err(Error::invalid(format!("Helmholtz coefficient must be non-negative, got {coef}")));
    }
    if coef == 0.0 {
        return Ok(mass.clone());
    }
    mass.add_scaled(stiffness, coef)
}

fn check_fields(mesh: &TriMesh, fields: &[&[f64]]) -> Result<()> {
    let n = mesh.num_nodes();
    for (k, f) in fields.iter().enumerate() {
        if f.len() != n {
            return Err(Error::invalid(format!(
                "field {k} has {} values but the mesh has {n} nodes",
                f.len()
            )));
        }
    }
    Ok(())
}

#[inline]
fn local(field: &[f64], tri: &[usize; 3]) -> [f64; 3] {
    [field[tri[0]], field[tri[1]], field[tri[2]]]
}

/// Values at the three edge midpoints; entry `k` is on the edge opposite vertex `k`.
#[inline]
fn midpoints(v: [f64; 3]) -> [f64; 3] {
    let s = v[0] + v[1] + v[2];
    [0.5 * (s - v[0]), 0.5 * (s - v[1]), 0.5 * (s - v[2])]
}

/// Scatters `<f, phi_i>` from midpoint samples of `f`.
#[inline]
fn scatter_midpoint(load: &mut [f64], tri: &[usize; 3], area: f64, f: [f64; 3]) {
    let s = f[0] + f[1] + f[2];
    let w = area / 6.0;
    for k in 0..3 {
        load[tri[k]] += w * (s - f[k]);
    }
}

/// `<div(U,V) + d_x(E U) + d_y(E V) + a div(P,Q), phi_i>`.
pub fn assemble_f(mesh: &TriMesh, e: &[f64], u: &[f64], v: &[f64], p: &[f64], q: &[f64], a: f64) -> Result<Vec<f64>> {
    check_fields(mesh, &[e, u, v, p, q])?;
    let mut load = vec![0.0; mesh.num_nodes()];
    for (tri, geom) in mesh.triangles().iter().zip(mesh.geometries()) {
        let (el, ul, vl) = (local(e, tri), local(u, tri), local(v, tri));
        let ge = geom.gradient(el);
        let gu = geom.gradient(ul);
        let gv = geom.gradient(vl);
        let dp = geom.gradient(local(p, tri))[0];
        let dq = geom.gradient(local(q, tri))[1];
        let (em, um, vm) = (midpoints(el), midpoints(ul), midpoints(vl));
        let base = gu[0] + gv[1] + a * (dp + dq);
        let mut f = [0.0; 3];
        for k in 0..3 {
            f[k] = base + ge[0] * um[k] + em[k] * gu[0] + ge[1] * vm[k] + em[k] * gv[1];
        }
        scatter_midpoint(&mut load, tri, geom.area, f);
    }
    Ok(load)
}

/// `<d_x E + U d_x U + V d_x V + c d_x T, phi_i>`.
pub fn assemble_g(mesh: &TriMesh, e: &[f64], u: &[f64], v: &[f64], t: &[f64], c: f64) -> Result<Vec<f64>> {
    assemble_gh(mesh, e, u, v, t, c).map(|(g, _)| g)
}

/// `<d_y E + U d_y U + V d_y V + c d_y T, phi_i>`.
pub fn assemble_h(mesh: &TriMesh, e: &[f64], u: &[f64], v: &[f64], t: &[f64], c: f64) -> Result<Vec<f64>> {
    assemble_gh(mesh, e, u, v, t, c).map(|(_, h)| h)
}

/// Both momentum loads in one sweep.
pub fn assemble_gh(mesh: &TriMesh, e: &[f64], u: &[f64], v: &[f64], t: &[f64], c: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_fields(mesh, &[e, u, v, t])?;
    let n = mesh.num_nodes();
    let (mut g_load, mut h_load) = (vec![0.0; n], vec![0.0; n]);
    for (tri, geom) in mesh.triangles().iter().zip(mesh.geometries()) {
        let (ul, vl) = (local(u, tri), local(v, tri));
        let ge = geom.gradient(local(e, tri));
        let gu = geom.gradient(ul);
        let gv = geom.gradient(vl);
        let gt = geom.gradient(local(t, tri));
        let (um, vm) = (midpoints(ul), midpoints(vl));
        let mut fg = [0.0; 3];
        let mut fh = [0.0; 3];
        for k in 0..3 {
            fg[k] = ge[0] + gu[0] * um[k] + gv[0] * vm[k] + c * gt[0];
            fh[k] = ge[1] + gu[1] * um[k] + gv[1] * vm[k] + c * gt[1];
        }
        scatter_midpoint(&mut g_load, tri, geom.area, fg);
        scatter_midpoint(&mut h_load, tri, geom.area, fh);
    }
    Ok((g_load, h_load))
}

/// `-<grad W, grad phi_i>` with the boundary flux dropped.
pub fn assemble_laplacian_rhs(stiffness: &CsrMatrix, w: &[f64]) -> Vec<f64> {
    let mut out = stiffness.mul_vec(w);
    out.iter_mut().for_each(|v| *v = -*v);
    out
}

/// `<f, phi_i>` for a closure evaluated at quadrature points.
pub fn assemble_load_fn<const N: usize>(
    mesh: &TriMesh,
    rule: &TriangleRule,
    mut f: impl FnMut(Point) -> [f64; N],
) -> [Vec<f64>; N] {
    let mut loads: [Vec<f64>; N] = std::array::from_fn(|_| vec![0.0; mesh.num_nodes()]);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let verts = mesh.vertices(t);
        let area = mesh.element_geometry(t).area;
        for (bary, w) in rule.iter() {
            let vals = f(map_point(&verts, bary));
            for (load, val) in loads.iter_mut().zip(vals) {
                for k in 0..3 {
                    load[tri[k]] += area * w * val * bary[k];
                }
            }
        }
    }
    loads
}

/// `1^T M f`, the integral of the P1 function.
pub fn integrate(mass: &CsrMatrix, f: &[f64]) -> f64 {
    let mut total = 0.0;
    for r in 0..mass.n_rows() {
        for (c, v) in mass.row(r) {
            total += v * f[c];
        }
    }
    total
}
