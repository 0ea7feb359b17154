//! Dense reference implementation used as an independent oracle.
//!
//! Everything here is assembled with the 7-point degree-5 rule applied to
//! barycentric basis functions computed from scratch, and solved with dense LU.
#![allow(dead_code)]

use boussinesq::mesh::TriMesh;
use boussinesq::model::Coefficients;
use boussinesq::stepper::Fields;
use nalgebra::{DMatrix, DVector};

pub fn rule() -> Vec<([f64; 3], f64)> {
    let s = 15f64.sqrt();
    let (a1, b1) = ((6.0 - s) / 21.0, (9.0 + 2.0 * s) / 21.0);
    let (a2, b2) = ((6.0 + s) / 21.0, (9.0 - 2.0 * s) / 21.0);
    let (w1, w2) = ((155.0 - s) / 1200.0, (155.0 + s) / 1200.0);
    vec![
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

/// Area and gradients of the three barycentric functions.
pub fn p1_element(v: [[f64; 2]; 3]) -> (f64, [[f64; 2]; 3]) {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(v[j][1] - v[k][1]) / det, (v[k][0] - v[j][0]) / det];
    }
    (0.5 * det, g)
}

pub fn element_mass(v: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let (area, _) = p1_element(v);
    let mut m = [[0.0; 3]; 3];
    for (b, w) in rule() {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += area * w * b[i] * b[j];
            }
        }
    }
    m
}

pub fn element_stiffness(v: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let (area, g) = p1_element(v);
    let mut k = [[0.0; 3]; 3];
    for (_, w) in rule() {
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] += area * w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    k
}

fn assemble(mesh: &TriMesh, local: impl Fn([[f64; 2]; 3]) -> [[f64; 3]; 3]) -> DMatrix<f64> {
    let n = mesh.num_nodes();
    let mut a = DMatrix::zeros(n, n);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let e = local(mesh.vertices(t));
        for i in 0..3 {
            for j in 0..3 {
                a[(tri[i], tri[j])] += e[i][j];
            }
        }
    }
    a
}

pub fn dense_mass(mesh: &TriMesh) -> DMatrix<f64> {
    assemble(mesh, element_mass)
}

pub fn dense_stiffness(mesh: &TriMesh) -> DMatrix<f64> {
    assemble(mesh, element_stiffness)
}

/// Per-element values and gradients of a P1 field.
struct Local {
    vals: [f64; 3],
    grad: [f64; 2],
}

fn local(field: &[f64], tri: &[usize; 3], g: &[[f64; 2]; 3]) -> Local {
    let vals = [field[tri[0]], field[tri[1]], field[tri[2]]];
    let mut grad = [0.0; 2];
    for k in 0..3 {
        grad[0] += vals[k] * g[k][0];
        grad[1] += vals[k] * g[k][1];
    }
    Local { vals, grad }
}

fn at(l: &Local, b: &[f64; 3]) -> f64 {
    l.vals[0] * b[0] + l.vals[1] * b[1] + l.vals[2] * b[2]
}

/// Loads `(F, G, H)` of the right-hand sides by quadrature.
pub fn dense_loads(
    mesh: &TriMesh,
    coef: &Coefficients,
    x: &Fields,
    p: &[f64],
    q: &[f64],
    th: &[f64],
) -> [DVector<f64>; 3] {
    let n = mesh.num_nodes();
    let mut out = [DVector::zeros(n), DVector::zeros(n), DVector::zeros(n)];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (area, g) = p1_element(mesh.vertices(t));
        let e = local(&x.eta, tri, &g);
        let u = local(&x.u, tri, &g);
        let v = local(&x.v, tri, &g);
        let (pl, ql, tl) = (local(p, tri, &g), local(q, tri, &g), local(th, tri, &g));
        for (b, w) in rule() {
            let (ev, uv, vv) = (at(&e, &b), at(&u, &b), at(&v, &b));
            let f = u.grad[0] + v.grad[1] + e.grad[0] * uv + ev * u.grad[0] + e.grad[1] * vv + ev * v.grad[1]
                + coef.a * (pl.grad[0] + ql.grad[1]);
            let gx = e.grad[0] + uv * u.grad[0] + vv * v.grad[0] + coef.c * tl.grad[0];
            let hy = e.grad[1] + uv * u.grad[1] + vv * v.grad[1] + coef.c * tl.grad[1];
            for i in 0..3 {
                out[0][tri[i]] += area * w * f * b[i];
                out[1][tri[i]] += area * w * gx * b[i];
                out[2][tri[i]] += area * w * hy * b[i];
            }
        }
    }
    out
}

/// Solves `A x = b` with rows and columns of `fixed` nodes replaced by identity
/// and zero data.
pub fn solve_pinned(a: &DMatrix<f64>, b: &DVector<f64>, fixed: &[bool]) -> DVector<f64> {
    let mut a = a.clone();
    let mut b = b.clone();
    for (i, &f) in fixed.iter().enumerate() {
        if f {
            a.row_mut(i).fill(0.0);
            a.column_mut(i).fill(0.0);
            a[(i, i)] = 1.0;
            b[i] = 0.0;
        }
    }
    a.lu().solve(&b).expect("nonsingular")
}

pub struct DenseStep {
    pub aux: [DVector<f64>; 3],
    pub k1: [DVector<f64>; 3],
    pub k2: [DVector<f64>; 3],
    pub next: Fields,
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// One RK2 step of the system, Dirichlet nodes given per variable.
pub fn dense_step(mesh: &TriMesh, coef: &Coefficients, fixed: &[Vec<bool>; 3], x: &Fields, dt: f64) -> DenseStep {
    let m = dense_mass(mesh);
    let k = dense_stiffness(mesh);
    let lu = m.clone().lu();
    let lap = |f: &[f64]| -> DVector<f64> { lu.solve(&(-(&k * DVector::from_column_slice(f)))).unwrap() };
    let helm = [&m + &k * coef.b, &m + &k * coef.d, &m + &k * coef.d];
    let aux_of = |x: &Fields| [lap(&x.u), lap(&x.v), lap(&x.eta)];
    let incr = |args: &Fields, aux: &[DVector<f64>; 3]| -> [DVector<f64>; 3] {
        let loads = dense_loads(mesh, coef, args, &to_vec(&aux[0]), &to_vec(&aux[1]), &to_vec(&aux[2]));
        std::array::from_fn(|i| solve_pinned(&helm[i], &(-dt * &loads[i]), &fixed[i]))
    };
    let aux = aux_of(x);
    let k1 = incr(x, &aux);
    let k1f = Fields {
        eta: to_vec(&k1[0]),
        u: to_vec(&k1[1]),
        v: to_vec(&k1[2]),
    };
    let aux_k1 = aux_of(&k1f);
    let shifted = Fields {
        eta: x.eta.iter().zip(&k1f.eta).map(|(a, b)| a + b).collect(),
        u: x.u.iter().zip(&k1f.u).map(|(a, b)| a + b).collect(),
        v: x.v.iter().zip(&k1f.v).map(|(a, b)| a + b).collect(),
    };
    let aux2: [DVector<f64>; 3] = std::array::from_fn(|i| &aux[i] + &aux_k1[i]);
    let k2 = incr(&shifted, &aux2);
    let upd = |x: &[f64], i: usize| -> Vec<f64> {
        x.iter().enumerate().map(|(n, v)| v + 0.5 * k1[i][n] + 0.5 * k2[i][n]).collect()
    };
    let next = Fields {
        eta: upd(&x.eta, 0),
        u: upd(&x.u, 1),
        v: upd(&x.v, 2),
    };
    DenseStep { aux, k1, k2, next }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Fourth-order central difference of `f` at `x` with step `h`.
pub fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second difference.
pub fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// The forced residual of the system applied to closed-form fields by finite
/// differences, for `a = c = 0`.
pub fn fd_forcing(
    eta: &dyn Fn(f64, f64, f64) -> f64,
    u: &dyn Fn(f64, f64, f64) -> f64,
    v: &dyn Fn(f64, f64, f64) -> f64,
    b: f64,
    d: f64,
    t: f64,
    x: f64,
    y: f64,
) -> [f64; 3] {
    let (hs, ht) = (1e-3, 1e-2);
    let dx = |f: &dyn Fn(f64, f64, f64) -> f64| d1(|s| f(t, s, y), x, hs);
    let dy = |f: &dyn Fn(f64, f64, f64) -> f64| d1(|s| f(t, x, s), y, hs);
    let dt = |f: &dyn Fn(f64, f64, f64) -> f64| d1(|s| f(s, x, y), t, ht);
    // Laplacian of the time derivative
    let lap_t = |f: &dyn Fn(f64, f64, f64) -> f64| {
        d1(|s| d2(|r| f(s, r, y), x, hs) + d2(|r| f(s, x, r), y, hs), t, ht)
    };
    let eu = |t: f64, x: f64, y: f64| eta(t, x, y) * u(t, x, y);
    let ev = |t: f64, x: f64, y: f64| eta(t, x, y) * v(t, x, y);
    let kin = |t: f64, x: f64, y: f64| 0.5 * (u(t, x, y).powi(2) + v(t, x, y).powi(2));
    let s_eta = dt(eta) + dx(u) + dy(v) + dx(&eu) + dy(&ev) - b * lap_t(eta);
    let s_u = dt(u) + dx(eta) + dx(&kin) - d * lap_t(u);
    let s_v = dt(v) + dy(eta) + dy(&kin) - d * lap_t(v);
    [s_eta, s_u, s_v]
}
