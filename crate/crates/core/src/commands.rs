//! Library side of the command-line tool: `run`, `converge` and `bench`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::adapt::Adaptivity;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::mesh::build_rect_mesh;
use crate::stepper::{scheme_for_algorithm, Fields, RunSummary, SchemeRegistry, Simulation, StepOptions};
use crate::verify::{convergence_study, cross_section, Axis, Conserved, ConvergenceReport, StudyOptions};
use crate::vtk::write_vtk;

pub const SERIES_HEADER: &str = "t,mass_eta,mass_u,mass_v,min_eta,max_eta,nverts,step_seconds";

/// A simulation ready to run, with its adaptive hierarchy if any.
pub struct Prepared {
    pub sim: Simulation,
    pub adapt: Option<Adaptivity>,
}

/// Builds the mesh, operators and initial state of a configuration. Adaptive
/// runs start from a base mesh `2^levels` times coarser than the uniform one
/// and refine it to the initial condition.
pub fn prepare(cfg: &RunConfig, registry: &SchemeRegistry) -> Result<Prepared> {
    cfg.validate()?;
    let coef = cfg.coefficients()?;
    let scheme = registry.create(scheme_for_algorithm(cfg.algorithm)?)?;
    let options = StepOptions {
        reuse_operators: cfg.reuse_operators,
        ..StepOptions::default()
    };
    let init = cfg.initial();
    match cfg.adapt_params() {
        None => {
            let mut sim = Simulation::new(cfg.mesh()?, coef, cfg.bc, cfg.dt, scheme, options)?;
            sim.set_initial(init)?;
            Ok(Prepared { sim, adapt: None })
        }
        Some(params) => {
            let factor = 1usize << params.levels;
            if !cfg.nx.is_multiple_of(factor) || !cfg.ny.is_multiple_of(factor) {
                return Err(Error::invalid(format!(
                    "adaptive runs need nx and ny divisible by 2^levels = {factor}, got {} x {}",
                    cfg.nx, cfg.ny
                )));
            }
            let base = build_rect_mesh(cfg.xmin, cfg.xmax, cfg.ymin, cfg.ymax, cfg.nx / factor, cfg.ny / factor)?;
            let mut ad = Adaptivity::new(&base, params)?;
            let fields = ad.initial(&init, 4 * params.levels as usize + 4)?;
            let mut sim = Simulation::new(ad.current_mesh().clone(), coef, cfg.bc, cfg.dt, scheme, options)?;
            sim.set_fields(fields)?;
            Ok(Prepared { sim, adapt: Some(ad) })
        }
    }
}

fn near(times: &[f64], t: f64, dt: f64) -> bool {
    times.iter().any(|&s| (s - t).abs() < 0.5 * dt)
}

fn series_row(t: f64, c: &Conserved, nverts: usize, seconds: f64) -> String {
    format!(
        "{t},{},{},{},{},{},{nverts},{seconds}\n",
        c.mass_eta, c.mass_u, c.mass_v, c.min_eta, c.max_eta
    )
}

#[derive(Clone, Copy, Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub t: f64,
    pub conserved: Conserved,
    pub snapshots: usize,
    pub sections: usize,
}

struct Outputs<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    series: BufWriter<File>,
    snapshots: usize,
    sections: usize,
}

impl Outputs<'_> {
    fn emit(&mut self, sim: &Simulation, step: usize, seconds: f64, last: bool) -> Result<()> {
        let o = &self.cfg.output;
        let t = sim.t();
        if step.is_multiple_of(o.series_every) || last {
            let secs = if o.record_timing { seconds } else { 0.0 };
            self.series
                .write_all(series_row(t, &sim.conserved(), sim.mesh().num_nodes(), secs).as_bytes())?;
        }
        if near(&o.snapshot_times, t, sim.dt()) {
            let path = self.dir.join(format!("eta_{:04}.vtk", self.snapshots));
            let mut w = BufWriter::new(File::create(path)?);
            let f = sim.fields();
            write_vtk(
                &mut w,
                sim.mesh(),
                &format!("eta u v at t={t}"),
                &[("eta", &f.eta), ("u", &f.u), ("v", &f.v)],
            )?;
            w.flush()?;
            self.snapshots += 1;
        }
        if near(&o.section_times, t, sim.dt()) {
            let path = self.dir.join(format!("section_{:04}.csv", self.sections));
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "t,x,eta")?;
            for (x, v) in cross_section(sim.mesh(), &sim.fields().eta, Axis::X, o.section_y, o.section_samples) {
                writeln!(w, "{t},{x},{v}")?;
            }
            w.flush()?;
            self.sections += 1;
        }
        Ok(())
    }
}

/// Runs one configuration, writing `config.txt`, `series.csv`, snapshots and
/// sections into `dir`. Files written before a failure are kept.
pub fn cmd_run(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), cfg.render())?;
    let Prepared { mut sim, mut adapt } = prepare(cfg, &SchemeRegistry::default())?;
    let mut series = BufWriter::new(File::create(dir.join("series.csv"))?);
    writeln!(series, "{SERIES_HEADER}")?;
    let mut out = Outputs {
        cfg,
        dir,
        series,
        snapshots: 0,
        sections: 0,
    };
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    out.emit(&sim, 0, 0.0, n_steps == 0)?;
    let result = sim.run(cfg.t_end, adapt.as_mut(), |s, r| out.emit(s, r.step, r.seconds, r.step == n_steps));
    out.series.flush()?;
    let summary = result?;
    Ok(RunOutcome {
        summary,
        t: sim.t(),
        conserved: sim.conserved(),
        snapshots: out.snapshots,
        sections: out.sections,
    })
}

/// Runs every member of a preset; multi-run presets write into one
/// subdirectory per family.
pub fn cmd_run_all(configs: &[RunConfig], dir: &Path) -> Result<Vec<RunOutcome>> {
    if configs.len() == 1 {
        return Ok(vec![cmd_run(&configs[0], dir)?]);
    }
    configs
        .iter()
        .map(|c| cmd_run(c, &dir.join(c.family.name())))
        .collect()
}

/// Manufactured-solution study over `cfg.n_list` with `dt = 1/N`, written to
/// `convergence.csv`.
pub fn cmd_converge(cfg: &RunConfig, dir: &Path) -> Result<ConvergenceReport> {
    let coef = cfg.coefficients()?;
    let registry = SchemeRegistry::default();
    let name = scheme_for_algorithm(cfg.algorithm)?;
    registry.create(name)?;
    let opts = StudyOptions {
        t_end: cfg.t_end,
        dt_factor: 1.0,
        step: StepOptions {
            reuse_operators: cfg.reuse_operators,
            ..StepOptions::default()
        },
    };
    let report = convergence_study(&coef, &cfg.n_list, &opts, || {
        registry.create(name).expect("scheme registered above")
    })?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("convergence.csv"), report.to_csv())?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub label: String,
    pub algorithm: u8,
    pub reuse: bool,
    pub err: Option<f64>,
    pub seconds: f64,
    pub checksum: f64,
    pub nverts: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn find(&self, algorithm: u8, reuse: bool, err: Option<f64>) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.reuse == reuse && r.err == err)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,algorithm,reuse_operators,err,seconds,checksum,nverts\n");
        for r in &self.rows {
            let err = r.err.map(|e| format!("{e:e}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{err},{},{},{}\n",
                r.label, r.algorithm, r.reuse, r.seconds, r.checksum, r.nverts
            ));
        }
        s
    }
}

/// `sum |eta| + |u| + |v|` over nodes.
pub fn checksum(fields: &Fields) -> f64 {
    fields.iter().iter().flat_map(|f| f.iter()).map(|x| x.abs()).sum()
}

/// Error levels of the adaptive bench variants.
pub const BENCH_ERRS: [Option<f64>; 3] = [None, Some(1e-4), Some(1e-2)];

/// Times every combination of algorithm, operator reuse and adaptation level.
pub fn bench(cfg: &RunConfig) -> Result<BenchReport> {
    let registry = SchemeRegistry::default();
    let mut report = BenchReport::default();
    for algorithm in [1u8, 2] {
        for reuse in [false, true] {
            for err in BENCH_ERRS {
                let mut c = cfg.clone();
                c.algorithm = algorithm;
                c.reuse_operators = reuse;
                c.adapt = err.map(|e| crate::config::AdaptConfig {
                    err: e,
                    ..cfg.adapt.clone().unwrap_or_default()
                });
                let start = Instant::now();
                let Prepared { mut sim, mut adapt } = prepare(&c, &registry)?;
                sim.run(c.t_end, adapt.as_mut(), |_, _| Ok(()))?;
                let seconds = start.elapsed().as_secs_f64();
                let mut label = format!("M{algorithm}");
                if reuse {
                    label.push_str("init");
                }
                if let Some(e) = err {
                    label.push_str(&format!("A{}", e.log10().round() as i32));
                }
                report.rows.push(BenchRow {
                    label,
                    algorithm,
                    reuse,
                    err,
                    seconds,
                    checksum: checksum(sim.fields()),
                    nverts: sim.mesh().num_nodes(),
                });
            }
        }
    }
    Ok(report)
}

/// [`bench`] followed by writing `bench.csv`.
pub fn cmd_bench(cfg: &RunConfig, dir: &Path) -> Result<BenchReport> {
    let report = bench(cfg)?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("bench.csv"), report.to_csv())?;
    Ok(report)
}
