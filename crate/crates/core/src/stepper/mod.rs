//! Explicit two-stage Runge-Kutta time stepping of the Boussinesq system.
//!
//! One step computes the auxiliary Laplacians `(P, Q, T)` of `(u, v, eta)`, the
//! first increments from `(M + bK) E^{k1} = -dt F(...)` and `(M + dK) U^{k1} = -dt G(...)`,
//! `(M + dK) V^{k1} = -dt H(...)`, the Laplacians of those increments, the second
//! increments at the shifted arguments, and finally hands both increments to an
//! [`UpdateScheme`].

pub mod scheme;

use std::borrow::Cow;
use std::sync::Arc;
use std::time::Instant;

pub use scheme::{
    scheme_for_algorithm, BlockUpdate, MassSolveUpdate, NodalUpdate, SchemeRegistry, UpdateContext, UpdateScheme,
};

use crate::adapt::Adaptivity;
use crate::assembly::{
    assemble_f, assemble_gh, assemble_helmholtz, assemble_laplacian_rhs, assemble_load_fn, assemble_mass,
    assemble_stiffness, dirichlet_nodes, BoundarySpec, ConstrainedOperator, CsrMatrix, SolverOptions,
    Variable,
};
use crate::error::{Error, Result};
use crate::mesh::{build_periodic_map, Point, TriMesh};
use crate::model::Coefficients;
use crate::quadrature::TriangleRule;
use crate::verify::{conserved_quantities, Conserved};

/// Right-hand side source terms `(s_eta, s_u, s_v)` added to the system.
pub trait Forcing: Send + Sync {
    fn source(&self, t: f64, p: Point) -> [f64; 3];
}

/// Nodal values of `(eta, u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fields {
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Fields {
    pub fn zeros(n: usize) -> Self {
        Fields {
            eta: vec![0.0; n],
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn from_fn(mesh: &TriMesh, f: impl Fn(Point) -> [f64; 3]) -> Self {
        let mut out = Fields::zeros(mesh.num_nodes());
        for (i, &p) in mesh.nodes().iter().enumerate() {
            let [e, u, v] = f(p);
            out.eta[i] = e;
            out.u[i] = u;
            out.v[i] = v;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn iter(&self) -> [&Vec<f64>; 3] {
        [&self.eta, &self.u, &self.v]
    }

    pub fn iter_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.eta, &mut self.u, &mut self.v]
    }

    pub fn get(&self, var: Variable) -> &[f64] {
        self.iter()[var.index()]
    }

    /// First non-finite field, if any.
    pub fn non_finite(&self) -> Option<&'static str> {
        Variable::ALL
            .into_iter()
            .find(|&v| self.get(v).iter().any(|x| !x.is_finite()))
            .map(Variable::name)
    }

    pub fn max_abs_diff(&self, other: &Fields) -> f64 {
        self.iter()
            .into_iter()
            .zip(other.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Auxiliary Laplacians `(P, Q, T)` of `(U, V, E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Aux {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
}

/// Every intermediate quantity of one RK2 step.
#[derive(Clone, Debug)]
pub struct StageWork {
    pub aux: Aux,
    pub k1: Fields,
    pub aux_k1: Aux,
    pub k2: Fields,
}

impl StageWork {
    pub fn k1(&self) -> [&[f64]; 3] {
        [&self.k1.eta, &self.k1.u, &self.k1.v]
    }

    pub fn k2(&self) -> [&[f64]; 3] {
        [&self.k2.eta, &self.k2.u, &self.k2.v]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    /// Keep assembled and constrained operators across steps; otherwise every
    /// solve assembles its own matrix.
    pub reuse_operators: bool,
    pub solver: SolverOptions,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            reuse_operators: true,
            solver: SolverOptions::default(),
        }
    }
}

/// Assembled operators of one mesh.
#[derive(Clone, Debug)]
pub struct Operators {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub mass_op: ConstrainedOperator,
    /// `M + bK` for eta, `M + dK` for u and v, each with its variable's Dirichlet rows.
    pub helmholtz: [ConstrainedOperator; 3],
}

impl Operators {
    pub fn build(mesh: &TriMesh, coef: &Coefficients, bc: &BoundarySpec) -> Result<Self> {
        let mass = assemble_mass(mesh);
        let stiffness = assemble_stiffness(mesh);
        let mass_op = ConstrainedOperator::new(mesh, &mass, bc, None)?;
        let he = assemble_helmholtz(&mass, &stiffness, coef.b)?;
        let hd = assemble_helmholtz(&mass, &stiffness, coef.d)?;
        let helmholtz = [
            ConstrainedOperator::new(mesh, &he, bc, Some(Variable::Eta))?,
            ConstrainedOperator::new(mesh, &hd, bc, Some(Variable::U))?,
            ConstrainedOperator::new(mesh, &hd, bc, Some(Variable::V))?,
        ];
        Ok(Operators {
            mass,
            stiffness,
            mass_op,
            helmholtz,
        })
    }
}

/// Which operator a solve needs.
#[derive(Clone, Copy, Debug)]
enum OperatorKind {
    Mass,
    Helmholtz(Variable),
}

/// Per-step information handed to observers.
#[derive(Clone, Copy, Debug)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub seconds: f64,
    pub adapted: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunSummary {
    pub steps: usize,
    pub seconds: f64,
    pub adaptations: usize,
    pub saturated_adaptations: usize,
}

/// Simulation state `(eta, u, v, t)` with coefficients, boundary conditions and
/// cached operators.
pub struct Simulation {
    mesh: Arc<TriMesh>,
    fields: Fields,
    t: f64,
    dt: f64,
    steps: usize,
    coef: Coefficients,
    bc: BoundarySpec,
    options: StepOptions,
    forcing: Option<Arc<dyn Forcing>>,
    scheme: Box<dyn UpdateScheme>,
    cache: Option<Operators>,
}

impl Simulation {
    /// A state at rest at `t = 0`. A periodic map is attached to the mesh when the
    /// boundary conditions ask for one.
    pub fn new(
        mesh: TriMesh,
        coef: Coefficients,
        bc: BoundarySpec,
        dt: f64,
        scheme: Box<dyn UpdateScheme>,
        options: StepOptions,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        bc.validate()?;
        let mesh = Self::attach_periodicity(mesh, &bc)?;
        let n = mesh.num_nodes();
        let mut sim = Simulation {
            mesh: Arc::new(mesh),
            fields: Fields::zeros(n),
            t: 0.0,
            dt,
            steps: 0,
            coef,
            bc,
            options,
            forcing: None,
            scheme,
            cache: None,
        };
        sim.rebuild()?;
        Ok(sim)
    }

    fn attach_periodicity(mesh: TriMesh, bc: &BoundarySpec) -> Result<TriMesh> {
        match (bc.periodic_directions(), mesh.periodic_map()) {
            (Some(dirs), None) => build_periodic_map(mesh, dirs),
            (Some(dirs), Some(map)) if map.directions != dirs => build_periodic_map(mesh, dirs),
            _ => Ok(mesh),
        }
    }

    fn rebuild(&mut self) -> Result<()> {
        self.cache = if self.options.reuse_operators {
            Some(Operators::build(&self.mesh, &self.coef, &self.bc)?)
        } else {
            None
        };
        let mut scheme = std::mem::replace(&mut self.scheme, Box::new(NodalUpdate));
        let result = self.with_context(|ctx| scheme.prepare(ctx));
        self.scheme = scheme;
        result
    }

    fn with_context<T>(&self, f: impl FnOnce(&UpdateContext<'_>) -> Result<T>) -> Result<T> {
        let mass = self.mass_matrix();
        let mass_op = self.operator(OperatorKind::Mass)?;
        let ctx = UpdateContext {
            mesh: &self.mesh,
            mass: &mass,
            mass_op: &mass_op,
            solver: &self.options.solver,
        };
        f(&ctx)
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    /// Installs fields, enforcing periodic copies and homogeneous Dirichlet values.
    pub fn set_fields(&mut self, mut fields: Fields) -> Result<()> {
        let n = self.mesh.num_nodes();
        if fields.iter().iter().any(|f| f.len() != n) {
            return Err(Error::invalid(format!("fields must have {n} nodal values")));
        }
        if let Some(map) = self.mesh.periodic_map() {
            for f in fields.iter_mut() {
                for i in 0..n {
                    f[i] = f[map.master[i]];
                }
            }
        }
        for var in Variable::ALL {
            let fixed = dirichlet_nodes(&self.mesh, &self.bc, var);
            let f = fields.iter_mut()[var.index()].as_mut_slice();
            for (x, fx) in f.iter_mut().zip(fixed) {
                if fx {
                    *x = 0.0;
                }
            }
        }
        self.fields = fields;
        Ok(())
    }

    pub fn set_initial(&mut self, f: impl Fn(Point) -> [f64; 3]) -> Result<()> {
        let fields = Fields::from_fn(&self.mesh, f);
        self.set_fields(fields)
    }

    /// Swaps in a new mesh (after adaptation) with fields already on it.
    pub fn replace_mesh(&mut self, mesh: TriMesh, fields: Fields) -> Result<()> {
        let mesh = Self::attach_periodicity(mesh, &self.bc)?;
        self.mesh = Arc::new(mesh);
        self.rebuild()?;
        self.set_fields(fields)
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<TriMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn fields(&self) -> &Fields {
        &self.fields
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coef
    }

    pub fn boundary(&self) -> &BoundarySpec {
        &self.bc
    }

    pub fn options(&self) -> &StepOptions {
        &self.options
    }

    pub fn scheme_name(&self) -> &'static str {
        self.scheme.name()
    }

    pub fn scheme(&self) -> &dyn UpdateScheme {
        self.scheme.as_ref()
    }

    /// Cached operators, if reuse is enabled.
    pub fn operators(&self) -> Option<&Operators> {
        self.cache.as_ref()
    }

    pub fn mass_matrix(&self) -> Cow<'_, CsrMatrix> {
        match &self.cache {
            Some(ops) => Cow::Borrowed(&ops.mass),
            None => Cow::Owned(assemble_mass(&self.mesh)),
        }
    }

    fn stiffness(&self) -> Cow<'_, CsrMatrix> {
        match &self.cache {
            Some(ops) => Cow::Borrowed(&ops.stiffness),
            None => Cow::Owned(assemble_stiffness(&self.mesh)),
        }
    }

    fn operator(&self, kind: OperatorKind) -> Result<Cow<'_, ConstrainedOperator>> {
        if let Some(ops) = &self.cache {
            return Ok(Cow::Borrowed(match kind {
                OperatorKind::Mass => &ops.mass_op,
                OperatorKind::Helmholtz(v) => &ops.helmholtz[v.index()],
            }));
        }
        let mesh = &self.mesh;
        let mass = assemble_mass(mesh);
        let op = match kind {
            OperatorKind::Mass => ConstrainedOperator::new(mesh, &mass, &self.bc, None)?,
            OperatorKind::Helmholtz(v) => {
                let coef = if v == Variable::Eta { self.coef.b } else { self.coef.d };
                let h = assemble_helmholtz(&mass, &assemble_stiffness(mesh), coef)?;
                ConstrainedOperator::new(mesh, &h, &self.bc, Some(v))?
            }
        };
        Ok(Cow::Owned(op))
    }

    /// Weak Laplacian: solves `M W = -K X`.
    fn weak_laplacian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let rhs = assemble_laplacian_rhs(&self.stiffness(), x);
        self.operator(OperatorKind::Mass)?.solve(&rhs, &self.options.solver)
    }

    /// Auxiliary fields of arbitrary `(E, U, V)`.
    pub fn laplacians(&self, e: &[f64], u: &[f64], v: &[f64]) -> Result<Aux> {
        Ok(Aux {
            p: self.weak_laplacian(u)?,
            q: self.weak_laplacian(v)?,
            t: self.weak_laplacian(e)?,
        })
    }

    /// `(P^n, Q^n, T^n)` of the current state.
    pub fn compute_aux(&self) -> Result<Aux> {
        self.laplacians(&self.fields.eta, &self.fields.u, &self.fields.v)
    }

    /// Increments `-dt (M + bK)^{-1} F` etc. evaluated at the given arguments and time.
    pub fn increments(&self, args: &Fields, aux: &Aux, time: f64) -> Result<Fields> {
        let mesh = &self.mesh;
        let c = &self.coef;
        let mut f = assemble_f(mesh, &args.eta, &args.u, &args.v, &aux.p, &aux.q, c.a)?;
        let (mut g, mut h) = assemble_gh(mesh, &args.eta, &args.u, &args.v, &aux.t, c.c)?;
        if let Some(forcing) = &self.forcing {
            let [se, su, sv] = assemble_load_fn(mesh, &TriangleRule::degree5(), |p| forcing.source(time, p));
            sub_assign(&mut f, &se);
            sub_assign(&mut g, &su);
            sub_assign(&mut h, &sv);
        }
        let dt = self.dt;
        let mut out = Fields::zeros(mesh.num_nodes());
        for (var, (load, dest)) in Variable::ALL.into_iter().zip([f, g, h].into_iter().zip(out.iter_mut())) {
            let rhs: Vec<f64> = load.iter().map(|x| -dt * x).collect();
            *dest = self.operator(OperatorKind::Helmholtz(var))?.solve(&rhs, &self.options.solver)?;
        }
        Ok(out)
    }

    pub fn stage1(&self, aux: &Aux) -> Result<Fields> {
        self.increments(&self.fields, aux, self.t)
    }

    pub fn stage1_aux(&self, k1: &Fields) -> Result<Aux> {
        self.laplacians(&k1.eta, &k1.u, &k1.v)
    }

    /// Second increments at `(X^n + k1, aux^n + aux^{k1})`, time `t + dt`.
    pub fn stage2(&self, aux: &Aux, k1: &Fields, aux_k1: &Aux) -> Result<Fields> {
        let shifted = Fields {
            eta: add(&self.fields.eta, &k1.eta),
            u: add(&self.fields.u, &k1.u),
            v: add(&self.fields.v, &k1.v),
        };
        let shifted_aux = Aux {
            p: add(&aux.p, &aux_k1.p),
            q: add(&aux.q, &aux_k1.q),
            t: add(&aux.t, &aux_k1.t),
        };
        self.increments(&shifted, &shifted_aux, self.t + self.dt)
    }

    pub fn compute_stages(&self) -> Result<StageWork> {
        let aux = self.compute_aux()?;
        let k1 = self.stage1(&aux)?;
        let aux_k1 = self.stage1_aux(&k1)?;
        let k2 = self.stage2(&aux, &k1, &aux_k1)?;
        Ok(StageWork { aux, k1, aux_k1, k2 })
    }

    /// Applies the update scheme to precomputed stages and advances time.
    pub fn apply_update(&mut self, work: &StageWork) -> Result<()> {
        let mut scheme = std::mem::replace(&mut self.scheme, Box::new(NodalUpdate));
        let mut fields = std::mem::replace(&mut self.fields, Fields::zeros(0));
        let result = self.with_context(|ctx| scheme.update(ctx, &mut fields, work));
        self.scheme = scheme;
        self.fields = fields;
        result?;
        self.steps += 1;
        self.t = self.steps_time();
        if let Some(field) = self.fields.non_finite() {
            return Err(Error::Divergence {
                step: self.steps,
                t: self.t,
                field,
            });
        }
        Ok(())
    }

    fn steps_time(&self) -> f64 {
        self.t + self.dt
    }

    pub fn step(&mut self) -> Result<()> {
        let work = self.compute_stages()?;
        self.apply_update(&work)
    }

    pub fn conserved(&self) -> Conserved {
        conserved_quantities(&self.mass_matrix(), &self.fields)
    }

    /// Advances to `t_end` in whole steps of `dt`, adapting the mesh every
    /// `cadence` steps when `adapt` is given.
    pub fn run(
        &mut self,
        t_end: f64,
        mut adapt: Option<&mut Adaptivity>,
        mut observer: impl FnMut(&Simulation, &StepReport) -> Result<()>,
    ) -> Result<RunSummary> {
        if t_end < self.t - 1e-12 * self.dt {
            return Err(Error::invalid(format!("end time {t_end} is before the current time {}", self.t)));
        }
        let n_steps = ((t_end - self.t) / self.dt).round().max(0.0) as usize;
        let t0 = self.t;
        let first = self.steps;
        let start = Instant::now();
        let mut summary = RunSummary::default();
        for k in 0..n_steps {
            let step_start = Instant::now();
            let mut adapted = false;
            if let Some(ad) = adapt.as_deref_mut() {
                if k % ad.params.cadence.max(1) == 0 {
                    if let Some(outcome) = ad.adapt(self.mesh(), &self.fields)? {
                        summary.adaptations += 1;
                        if outcome.saturated {
                            summary.saturated_adaptations += 1;
                        }
                        let mesh = ad.current_mesh().clone();
                        self.replace_mesh(mesh, outcome.fields)?;
                        adapted = true;
                    }
                }
            }
            let work = self.compute_stages()?;
            self.apply_update(&work).map_err(|e| match e {
                Error::Divergence { t, field, .. } => Error::Divergence { step: k + 1, t, field },
                other => other,
            })?;
            self.t = t0 + (k + 1) as f64 * self.dt;
            summary.steps += 1;
            let report = StepReport {
                step: self.steps - first,
                t: self.t,
                seconds: step_start.elapsed().as_secs_f64(),
                adapted,
            };
            observer(self, &report)?;
        }
        summary.seconds = start.elapsed().as_secs_f64();
        Ok(summary)
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_assign(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= y;
    }
}

/// Radially symmetric heap `A exp(-(x^2 + y^2) / w)` at rest.
pub fn gaussian_heap(amplitude: f64, width: f64) -> impl Fn(Point) -> [f64; 3] {
    move |p| [amplitude * (-(p[0] * p[0] + p[1] * p[1]) / width).exp(), 0.0, 0.0]
}
