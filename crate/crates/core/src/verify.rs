//! Manufactured solutions, error norms, convergence studies and diagnostics.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::assembly::{integrate, BoundarySpec, CsrMatrix};
use crate::error::{Error, Result};
use crate::mesh::{build_rect_mesh, Point, PointLocator, TriMesh};
use crate::model::Coefficients;
use crate::quadrature::{map_point, TriangleRule};
use crate::stepper::{Fields, Forcing, Simulation, StepOptions, UpdateScheme};

/// Closed-form fields on the unit square that vanish on its boundary:
///
/// ```text
/// eta = e^t sin(pi x) (y^2 - y)
/// u   = e^t x cos(3 pi x / 2) sin(pi y)
/// v   = e^t sin(pi x) cos(3 pi y / 2) y
/// ```
#[derive(Clone, Copy, Debug, Default)]
pub struct ManufacturedSolution;

/// Values and the partial derivatives the forcing needs, at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub eta: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub eta_lap: f64,
    pub u: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub u_lap: f64,
    pub v: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub v_lap: f64,
}

impl ManufacturedSolution {
    pub fn eta(&self, t: f64, p: Point) -> f64 {
        let [x, y] = p;
        t.exp() * (PI * x).sin() * (y * y - y)
    }

    pub fn u(&self, t: f64, p: Point) -> f64 {
        let [x, y] = p;
        t.exp() * x * (1.5 * PI * x).cos() * (PI * y).sin()
    }

    pub fn v(&self, t: f64, p: Point) -> f64 {
        let [x, y] = p;
        t.exp() * (PI * x).sin() * (1.5 * PI * y).cos() * y
    }

    pub fn fields(&self, t: f64, p: Point) -> [f64; 3] {
        [self.eta(t, p), self.u(t, p), self.v(t, p)]
    }

    pub fn jet(&self, t: f64, p: Point) -> Jet {
        let [x, y] = p;
        let e = t.exp();
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        let (s3x, c3x) = (1.5 * PI * x).sin_cos();
        let (s3y, c3y) = (1.5 * PI * y).sin_cos();
        let yy = y * y - y;
        let k = 1.5 * PI;
        let u = e * x * c3x * sy;
        let v = e * sx * c3y * y;
        Jet {
            eta: e * sx * yy,
            eta_x: e * PI * cx * yy,
            eta_y: e * sx * (2.0 * y - 1.0),
            eta_lap: e * sx * (2.0 - PI * PI * yy),
            u,
            u_x: e * (c3x - k * x * s3x) * sy,
            u_y: e * x * c3x * PI * cy,
            u_lap: e * (-2.0 * k * s3x - k * k * x * c3x) * sy - PI * PI * u,
            v,
            v_x: e * PI * cx * c3y * y,
            v_y: e * sx * (c3y - k * y * s3y),
            v_lap: e * sx * (-2.0 * k * s3y - k * k * y * c3y) - PI * PI * v,
        }
    }
}

/// Source terms that make [`ManufacturedSolution`] solve the system with `a = c = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedForcing {
    b: f64,
    d: f64,
}

impl ManufacturedForcing {
    pub fn new(coef: &Coefficients) -> Result<Self> {
        if coef.a != 0.0 || coef.c != 0.0 {
            return Err(Error::Unsupported(format!(
                "manufactured forcing needs a = c = 0, got a = {}, c = {}",
                coef.a, coef.c
            )));
        }
        Ok(ManufacturedForcing { b: coef.b, d: coef.d })
    }
}

/// `(s_eta, s_u, s_v)` at `(t, x, y)`. Time derivatives equal the fields since
/// every component carries the factor `e^t`.
pub fn manufactured_forcing(t: f64, p: Point, coef: &Coefficients) -> Result<[f64; 3]> {
    Ok(ManufacturedForcing::new(coef)?.source(t, p))
}

impl Forcing for ManufacturedForcing {
    fn source(&self, t: f64, p: Point) -> [f64; 3] {
        let j = ManufacturedSolution.jet(t, p);
        let s_eta = j.eta + j.u_x + j.v_y + (j.eta_x * j.u + j.eta * j.u_x) + (j.eta_y * j.v + j.eta * j.v_y)
            - self.b * j.eta_lap;
        let s_u = j.u + j.eta_x + j.u * j.u_x + j.v * j.v_x - self.d * j.u_lap;
        let s_v = j.v + j.eta_y + j.u * j.u_y + j.v * j.v_y - self.d * j.v_lap;
        [s_eta, s_u, s_v]
    }
}

/// `||field - exact||_{L2}` with the degree-5 rule.
pub fn l2_error(mesh: &TriMesh, field: &[f64], exact: impl Fn(Point) -> f64) -> f64 {
    let rule = TriangleRule::degree5();
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let verts = mesh.vertices(t);
        let area = mesh.element_geometry(t).area;
        for (bary, w) in rule.iter() {
            let fh: f64 = (0..3).map(|k| bary[k] * field[tri[k]]).sum();
            total += area * w * (fh - exact(map_point(&verts, bary))).powi(2);
        }
    }
    total.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dt: f64,
    /// L2 errors of eta, u, v at the final time.
    pub errors: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceReport {
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// `log2(e_N / e_2N)`-style orders between consecutive rows, scaled by the
    /// actual refinement ratio.
    pub fn orders(&self) -> Vec<[f64; 3]> {
        self.rows
            .windows(2)
            .map(|w| {
                let ratio = (w[1].n as f64 / w[0].n as f64).ln();
                std::array::from_fn(|k| (w[0].errors[k] / w[1].errors[k]).ln() / ratio)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,dt,err_eta,err_u,err_v,order_eta,order_u,order_v\n");
        let orders = self.orders();
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(out, "{},{},{:e},{:e},{:e}", r.n, r.dt, r.errors[0], r.errors[1], r.errors[2]);
            match i.checked_sub(1).map(|j| orders[j]) {
                Some(o) => {
                    let _ = writeln!(out, ",{:.6},{:.6},{:.6}", o[0], o[1], o[2]);
                }
                None => out.push_str(",,,\n"),
            }
        }
        out
    }
}

/// Options of a manufactured-solution study on the unit square.
#[derive(Clone, Copy, Debug)]
pub struct StudyOptions {
    pub t_end: f64,
    /// Time step is `dt_factor / N`.
    pub dt_factor: f64,
    pub step: StepOptions,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            t_end: 1.0,
            dt_factor: 1.0,
            step: StepOptions::default(),
        }
    }
}

/// Runs the forced problem on an `n x n` mesh with the given time step and
/// returns the final-time simulation.
pub fn manufactured_run(
    coef: &Coefficients,
    n: usize,
    dt: f64,
    t_end: f64,
    scheme: Box<dyn UpdateScheme>,
    step: StepOptions,
) -> Result<Simulation> {
    let forcing = ManufacturedForcing::new(coef)?;
    let mesh = build_rect_mesh(0.0, 1.0, 0.0, 1.0, n, n)?;
    let mut sim = Simulation::new(mesh, *coef, BoundarySpec::dirichlet(), dt, scheme, step)?
        .with_forcing(Arc::new(forcing));
    sim.set_initial(|p| ManufacturedSolution.fields(0.0, p))?;
    sim.run(t_end, None, |_, _| Ok(()))?;
    Ok(sim)
}

/// Final-time L2 errors of `(eta, u, v)`.
pub fn manufactured_errors(sim: &Simulation) -> [f64; 3] {
    let t = sim.t();
    let ms = ManufacturedSolution;
    let f = sim.fields();
    [
        l2_error(sim.mesh(), &f.eta, |p| ms.eta(t, p)),
        l2_error(sim.mesh(), &f.u, |p| ms.u(t, p)),
        l2_error(sim.mesh(), &f.v, |p| ms.v(t, p)),
    ]
}

/// Errors for every `N` in `n_list` with `dt = dt_factor / N`.
pub fn convergence_study(
    coef: &Coefficients,
    n_list: &[usize],
    opts: &StudyOptions,
    mut scheme: impl FnMut() -> Box<dyn UpdateScheme>,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("N list must be non-empty and strictly ascending"));
    }
    let mut report = ConvergenceReport {
        t_end: opts.t_end,
        rows: Vec::with_capacity(n_list.len()),
    };
    for &n in n_list {
        let dt = opts.dt_factor / n as f64;
        let sim = manufactured_run(coef, n, dt, opts.t_end, scheme(), opts.step)?;
        report.rows.push(ConvergenceRow {
            n,
            dt,
            errors: manufactured_errors(&sim),
        });
    }
    Ok(report)
}

/// Discrete integrals and extrema of the state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conserved {
    pub mass_eta: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub min_eta: f64,
    pub max_eta: f64,
}

/// Integrals as `1^T M f` and the range of eta.
pub fn conserved_quantities(mass: &CsrMatrix, fields: &Fields) -> Conserved {
    let (min_eta, max_eta) = fields
        .eta
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Conserved {
        mass_eta: integrate(mass, &fields.eta),
        mass_u: integrate(mass, &fields.u),
        mass_v: integrate(mass, &fields.v),
        min_eta,
        max_eta,
    }
}

/// Sampling direction of a cross section.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Along x, at fixed y.
    X,
    /// Along y, at fixed x.
    Y,
}

/// `samples` uniformly spaced point values along a line crossing the domain.
pub fn cross_section(mesh: &TriMesh, field: &[f64], axis: Axis, value: f64, samples: usize) -> Vec<(f64, f64)> {
    let b = mesh.bounds();
    let (lo, hi) = match axis {
        Axis::X => (b.xmin, b.xmax),
        Axis::Y => (b.ymin, b.ymax),
    };
    let locator = PointLocator::new(mesh);
    (0..samples)
        .map(|i| {
            let s = if samples == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (samples - 1) as f64
            };
            let p = match axis {
                Axis::X => [s, value],
                Axis::Y => [value, s],
            };
            (s, locator.evaluate(field, p))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{family_preset, SystemFamily};

    #[test]
    fn point_values() {
        let ms = ManufacturedSolution;
        assert!((ms.eta(0.0, [0.5, 0.5]) + 0.25).abs() < 1e-15);
        assert!((ms.u(0.0, [0.5, 0.5]) + 2f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn fields_vanish_on_the_boundary() {
        let ms = ManufacturedSolution;
        for t in [0.0, 0.3, 1.0] {
            for s in [0.0, 0.17, 0.5, 0.91, 1.0] {
                for p in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                    for f in ms.fields(t, p) {
                        assert!(f.abs() < 1e-15, "{p:?} {f}");
                    }
                }
            }
        }
    }

    #[test]
    fn kdv_forcing_is_unsupported() {
        let c = family_preset(SystemFamily::KdvKdv, None).unwrap();
        assert!(matches!(manufactured_forcing(0.0, [0.5, 0.5], &c), Err(Error::Unsupported(_))));
    }

    #[test]
    fn single_row_report_has_no_orders() {
        let r = ConvergenceReport {
            t_end: 1.0,
            rows: vec![ConvergenceRow { n: 10, dt: 0.1, errors: [1.0, 2.0, 3.0] }],
        };
        assert!(r.orders().is_empty());
        assert_eq!(r.to_csv().lines().count(), 2);
    }
}
