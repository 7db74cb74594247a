//! The subcommands. Each returns a [`CommandOutput`]; nothing here touches
//! the file system.

use std::f64::consts::PI;

use pn_atom::em::{
    field_energy, poisson_convergence, ChargeModel, FieldConfiguration, GridSpec, PeriodicBox, PlaneWaveMode,
    PointCharge,
};
use pn_atom::geometry::lapse;
use pn_atom::hamiltonian::{
    cross_term_recoupling, h_com_split, h_final, h_lab_new, h_point, ComState, SelfTermWidth,
};
use pn_atom::lagrangian::{exact_point_lagrangian_without_rest, pn_point_lagrangian};
use pn_atom::legendre::two_particle_legendre;
use pn_atom::order::{ProbeRecord, ScalingGrid, ScalingProbe};
use pn_atom::spectrum::{internal_levels, mass_defect};
use pn_atom::trajectory::{composite_mass, integrate, IntegratorSettings, PhasePoint, Trajectory};
use pn_atom::{Frame, PpnContext, Result as PhysicsResult, Vec3};
use serde_json::{json, Value};

use crate::config::{RunConfig, SweepPoint};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, CommandOutput, Table};
use crate::sampling::{PhaseSampler, PHASE_DIM};

fn point_cells(p: &SweepPoint) -> Vec<Cell> {
    vec![p.gamma.into(), p.beta.into(), p.phi_over_c2.into(), p.c.into()]
}

const POINT_HEADER: [&str; 4] = ["gamma", "beta", "phi_over_c2", "c"];

fn with_point_header(rest: &[&'static str]) -> Table {
    let header: Vec<&'static str> = POINT_HEADER.iter().chain(rest).copied().collect();
    Table::new(&header)
}

// ---------------------------------------------------------------- order-check

struct ProbeOutcome {
    family: &'static str,
    point: usize,
    record: Option<ProbeRecord>,
    target: f64,
    residual_at_base: Option<f64>,
    error: Option<String>,
}

fn evaluate(family: &'static str, point: usize, probe: &ScalingProbe<'_>, cfg: &RunConfig) -> ProbeOutcome {
    let oc = &cfg.order_check;
    let outcome = probe.samples().and_then(|samples| {
        let fit = pn_atom::order::residual_order_from_samples(&samples)?;
        let record = ProbeRecord::judge(&probe.name, -probe.claimed_order, fit, oc.slope_tolerance, oc.min_r_squared);
        Ok((record, samples[0].1))
    });
    match outcome {
        Ok((record, residual)) => ProbeOutcome {
            family,
            point,
            target: record.target,
            record: Some(record),
            residual_at_base: Some(residual),
            error: None,
        },
        Err(e) => ProbeOutcome {
            family,
            point,
            record: None,
            target: -probe.claimed_order,
            residual_at_base: None,
            error: Some(e.to_string()),
        },
    }
}

/// Plane wave in a periodic box used by the field-energy probe.
fn probe_plane_wave(ctx: &PpnContext) -> PhysicsResult<FieldConfiguration> {
    let length = 30.0;
    let k = Vec3::new(2.0, 0.0, 1.0) * (2.0 * PI / length);
    let mode = PlaneWaveMode::from_electric_amplitude(Vec3::new(0.0, 0.02, 0.0), k, 0.4, ctx.c())?;
    let quadrature = PeriodicBox {
        origin: Vec3::zeros(),
        length,
        points_per_axis: 40,
    };
    FieldConfiguration::new(vec![mode], Some(quadrature), &ctx.units)
}

/// `H / 2` through the recoupling map, without the smeared self term.
fn recoupled_half_energy(new: &ComState, ctx: &PpnContext) -> PhysicsResult<f64> {
    let old = cross_term_recoupling(new, &ctx.units)?;
    let report = h_final(&old, &FieldConfiguration::none(), ctx, 0.0, SelfTermWidth::Absolute(1.0))?;
    Ok(report.total_without_self_term() / 2.0)
}

/// Truncation-order probes with `c` scaled from `units.c` while the potential
/// and velocities stay fixed.
pub fn order_check(cfg: &RunConfig) -> CliResult<CommandOutput> {
    let oc = &cfg.order_check;
    let base_units = cfg.units()?;
    let (gamma, beta, phi) = (cfg.ppn.gamma, cfg.ppn.beta, oc.phi);
    let limit = cfg.ppn.weak_field_limit;
    let grid = ScalingGrid::new(oc.lambdas.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let ctx = move |l: f64| -> PhysicsResult<PpnContext> {
        PpnContext::new(base_units.with_c(base_units.c * l)?, gamma, beta, phi)?.with_weak_field_limit(limit)
    };
    ctx(1.0).map_err(|e| CliError::Config(format!("order_check base context: {e}")))?;
    let grad = cfg.grad_phi();
    let graded = move |l: f64| ctx(l)?.with_gradient(grad, Vec3::zeros());

    let atom = cfg.atom();
    let sampler = PhaseSampler::new(cfg.sampling.seed, PHASE_DIM);
    let mut outcomes = Vec::new();
    for i in 0..cfg.sampling.points {
        let lab = sampler.lab_state(i as u64, &atom, oc.velocity, cfg.sampling.extent);
        let (v1, _) = lab.momenta()?;
        let (x, v) = (lab.r1, v1 / atom.m1);
        for m in [atom.m1, atom.m2] {
            let probe = ScalingProbe::new(
                "point_lagrangian",
                grid.clone(),
                4.0,
                move |l| exact_point_lagrangian_without_rest(m, &x, &v, &ctx(l)?),
                move |l| Ok(pn_point_lagrangian(m, &x, &v, &ctx(l)?)?.total_without_rest()),
            );
            outcomes.push(evaluate("point_lagrangian", i, &probe, cfg));
        }

        let none = FieldConfiguration::none();
        let probe = ScalingProbe::new(
            "legendre",
            grid.clone(),
            4.0,
            move |l| Ok(h_lab_new(&lab, &FieldConfiguration::none(), &graded(l)?, 0.0)?.total_without(&["field_energy"])),
            move |l| Ok(two_particle_legendre(&lab, &graded(l)?, &none, 0.0)?.hamiltonian),
        );
        outcomes.push(evaluate("legendre", i, &probe, cfg));

        let com = ComState::from_lab(&lab)?;
        let report = move |l: f64| {
            let c = ctx(l)?;
            let r = h_final(&com, &FieldConfiguration::none(), &c, 0.0, SelfTermWidth::Absolute(1.0))?;
            Ok::<_, pn_atom::Error>((c, r))
        };
        let probe = ScalingProbe::new(
            "composite_identity",
            grid.clone(),
            4.0,
            move |l| Ok(report(l)?.1.central.total()),
            move |l| {
                let (c, r) = report(l)?;
                h_point(&com.total_momentum, &com.centre, com.total_mass() + r.internal.total() / c.c2(), &c)
            },
        );
        outcomes.push(evaluate("composite_identity", i, &probe, cfg));

        let probe = ScalingProbe::new(
            "cross_term_decoupling",
            grid.clone(),
            4.0,
            move |l| recoupled_half_energy(&com, &ctx(l)?),
            move |l| recoupled_half_energy(&com.with_reversed_total_momentum(), &ctx(l)?),
        );
        outcomes.push(evaluate("cross_term_decoupling", i, &probe, cfg));
    }
    let energy = move |l: f64, frame: Frame| -> PhysicsResult<f64> {
        let c = ctx(l)?;
        field_energy(&probe_plane_wave(&c)?, 0.7, &c, frame)
    };
    let probe = ScalingProbe::new(
        "field_energy_frames",
        grid,
        4.0,
        move |l| energy(l, Frame::Coordinate),
        move |l| energy(l, Frame::Tetrad),
    );
    outcomes.push(evaluate("field_energy_frames", 0, &probe, cfg));

    let mut table = Table::new(&[
        "probe",
        "point",
        "target",
        "slope",
        "r_squared",
        "exact_to_precision",
        "residual_at_base",
        "verdict",
        "error",
    ]);
    let mut rows = Vec::new();
    let mut failures = 0;
    for o in &outcomes {
        let pass = o.record.as_ref().is_some_and(|r| r.pass);
        failures += usize::from(!pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        table.push(vec![
            o.family.into(),
            o.point.into(),
            o.target.into(),
            o.record.as_ref().and_then(|r| r.slope).into(),
            o.record.as_ref().and_then(|r| r.r_squared).into(),
            o.record.as_ref().is_some_and(|r| r.exact_to_precision).into(),
            o.residual_at_base.into(),
            verdict.into(),
            o.error.clone().unwrap_or_default().into(),
        ]);
        rows.push(json!({
            "probe": o.family,
            "point": o.point,
            "record": o.record,
            "residual_at_base": o.residual_at_base,
            "verdict": verdict,
            "error": o.error,
        }));
    }
    Ok(CommandOutput {
        name: "order-check",
        table,
        json: json!({ "c": base_units.c, "phi": phi, "gamma": gamma, "beta": beta, "probes": rows }),
        passed: failures == 0,
        warnings: Vec::new(),
        notes: vec![format!("{} probes, {failures} failed", outcomes.len())],
    })
}

// ---------------------------------------------------------------- spectrum

/// Level table over the sweep. `omega_proper` is the binding frequency
/// `-E_total / (hbar sqrt(-g00))` seen by a static observer at the atom.
pub fn spectrum(cfg: &RunConfig) -> CliResult<CommandOutput> {
    let atom = cfg.atom();
    let mut table = with_point_header(&[
        "n",
        "l",
        "E_coord",
        "dE_p4",
        "dE_cross",
        "E_total",
        "mass_defect",
        "omega_proper",
    ]);
    let mut records = Vec::new();
    for point in cfg.sweep_points() {
        let ctx = cfg.context(&point)?;
        let spec = internal_levels(&ctx, &atom, cfg.spectrum.l, cfg.spectrum.levels)?;
        let mut defects = Vec::new();
        let mut omegas = Vec::new();
        for lv in &spec.levels {
            let defect = mass_defect(&spec, lv.n, &ctx)?;
            let omega = -lv.total / (ctx.units.hbar * lapse(&ctx));
            let mut row = point_cells(&point);
            row.extend([
                lv.n.into(),
                lv.l.into(),
                lv.energy.into(),
                lv.shift_p4.into(),
                lv.shift_darwin_cross.into(),
                lv.total.into(),
                defect.into(),
                omega.into(),
            ]);
            table.push(row);
            defects.push(defect);
            omegas.push(omega);
        }
        records.push(json!({
            "point": point,
            "spectrum": spec,
            "mass_defect": defects,
            "omega_proper": omegas,
        }));
    }
    Ok(CommandOutput {
        name: "spectrum",
        notes: vec![format!("{} sweep points, {} rows", records.len(), table.rows.len())],
        table,
        json: Value::Array(records),
        passed: true,
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------- trajectory

fn composite_run(cfg: &RunConfig, ctx: &PpnContext, level: u32) -> CliResult<Trajectory> {
    let atom = cfg.atom();
    let spec = internal_levels(ctx, &atom, 0, level as usize)?;
    let mass = composite_mass(atom.total_mass(), spec.level(level)?.total, ctx);
    let tr = &cfg.trajectory;
    let start = PhasePoint {
        position: Vec3::from(tr.position),
        momentum: Vec3::from(tr.momentum),
    };
    let settings = IntegratorSettings::new(tr.dt, tr.steps).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(integrate(&start, mass, ctx, &settings)?)
}

/// Centre-of-mass motion of the composite atom at the base parameters,
/// optionally alongside a second run with another internal level.
pub fn trajectory(cfg: &RunConfig) -> CliResult<CommandOutput> {
    let ctx = cfg.context(&SweepPoint {
        gamma: cfg.ppn.gamma,
        beta: cfg.ppn.beta,
        phi_over_c2: cfg.ppn.phi_over_c2,
        c: cfg.units.c,
    })?;
    let tr = &cfg.trajectory;
    let main = composite_run(cfg, &ctx, tr.level)?;
    let other = tr.compare_level.map(|n| composite_run(cfg, &ctx, n)).transpose()?;

    let mut header = vec!["t", "x", "y", "z", "px", "py", "pz", "H"];
    if other.is_some() {
        header.extend(["x_compare", "y_compare", "z_compare", "H_compare", "separation"]);
    }
    let mut table = Table::new(&header);
    for (k, s) in main.samples.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            s.t.into(),
            s.position.x.into(),
            s.position.y.into(),
            s.position.z.into(),
            s.momentum.x.into(),
            s.momentum.y.into(),
            s.momentum.z.into(),
            s.energy.into(),
        ];
        if let Some(o) = &other {
            let q = &o.samples[k];
            row.extend([
                q.position.x.into(),
                q.position.y.into(),
                q.position.z.into(),
                q.energy.into(),
                (s.position - q.position).norm().into(),
            ]);
        }
        table.push(row);
    }

    let drift = other
        .as_ref()
        .map_or(main.max_energy_drift, |o| o.max_energy_drift.max(main.max_energy_drift));
    let mut notes = vec![format!("max relative energy drift {drift:.3e}")];
    let mut warnings = Vec::new();
    let drift_ok = drift <= tr.max_drift;
    if !drift_ok {
        warnings.push(format!(
            "drift exceeds {:.1e}; reduce trajectory.dt",
            tr.max_drift
        ));
    }
    let separation = other.as_ref().map(|o| (main.last().position - o.last().position).norm());
    if let Some(s) = separation {
        notes.push(format!("final separation {s:.6e}"));
    }
    Ok(CommandOutput {
        name: "trajectory",
        table,
        json: json!({
            "mass": main.mass,
            "compare_mass": other.as_ref().map(|o| o.mass),
            "max_energy_drift": drift,
            "final_separation": separation,
            "samples": main.samples,
            "compare_samples": other.as_ref().map(|o| &o.samples),
        }),
        passed: drift_ok || !tr.strict,
        notes,
        warnings,
    })
}

// ---------------------------------------------------------------- hamiltonian-report

/// Five-point central difference.
fn derivative(f: impl Fn(f64) -> PhysicsResult<f64>, at: f64, h: f64) -> PhysicsResult<f64> {
    Ok((f(at - 2.0 * h)? - 8.0 * f(at - h)? + 8.0 * f(at + h)? - f(at + 2.0 * h)?) / (12.0 * h))
}

/// Step of the parameter derivatives. The Hamiltonians are polynomials of
/// degree at most two in `gamma` and `beta`, which the stencil differentiates exactly.
pub const PARAMETER_STEP: f64 = 0.25;

/// Every Hamiltonian at sampled phase points, term by term.
pub fn hamiltonian_report(cfg: &RunConfig) -> CliResult<CommandOutput> {
    let atom = cfg.atom();
    let sampler = PhaseSampler::new(cfg.sampling.seed, PHASE_DIM);
    let none = FieldConfiguration::none();
    let width = SelfTermWidth::default();
    let mut table = with_point_header(&["state", "operation", "group", "term", "value"]);
    let mut records = Vec::new();
    for point in cfg.sweep_points() {
        let ctx = cfg.context(&point)?;
        for i in 0..cfg.sampling.points {
            let lab = sampler.lab_state(i as u64, &atom, cfg.sampling.velocity, cfg.sampling.extent);
            let com = ComState::from_lab(&lab)?;
            let lab_terms = h_lab_new(&lab, &none, &ctx, 0.0)?;
            let split = h_com_split(&com, &none, &ctx, 0.0, width)?;
            let fin = h_final(&com, &none, &ctx, 0.0, width)?;
            let composite = h_point(
                &com.total_momentum,
                &com.centre,
                com.total_mass() + fin.internal.total() / ctx.c2(),
                &ctx,
            )?;
            let total_at = |c: PpnContext| -> PhysicsResult<f64> { Ok(h_final(&com, &none, &c, 0.0, width)?.total) };
            let d_gamma = derivative(|g| total_at(ctx.with_gamma(g)?), point.gamma, PARAMETER_STEP)?;
            let d_beta = derivative(|b| total_at(ctx.with_beta(b)?), point.beta, PARAMETER_STEP)?;

            let mut push = |operation: &str, group: &str, term: &str, value: f64| {
                let mut row = point_cells(&point);
                row.extend([i.into(), operation.into(), group.into(), term.into(), value.into()]);
                table.push(row);
            };
            for (term, v) in lab_terms.iter() {
                push("h_lab_new", "lab", term, v);
            }
            push("h_lab_new", "lab", "total", lab_terms.total());
            for (operation, report) in [("h_com_split", &split), ("h_final", &fin)] {
                for (group, terms) in report.parts() {
                    for (term, v) in terms.iter() {
                        push(operation, group, term, v);
                    }
                }
                push(operation, "all", "total", report.total);
            }
            push("h_point", "composite", "total", composite);
            push("h_final", "derivative", "d_total_d_gamma", d_gamma);
            push("h_final", "derivative", "d_total_d_beta", d_beta);

            records.push(json!({
                "point": point,
                "state": i,
                "lab_state": lab,
                "h_lab_new": lab_terms,
                "h_com_split": split,
                "h_final": fin,
                "h_point": composite,
                "d_total_d_gamma": d_gamma,
                "d_total_d_beta": d_beta,
            }));
        }
    }
    Ok(CommandOutput {
        name: "hamiltonian-report",
        notes: vec![format!("{} phase points", records.len())],
        table,
        json: Value::Array(records),
        passed: true,
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------- maxwell-residual

/// Grid residual of the curved-space Poisson equation for two Gaussian
/// charges, with observed convergence orders.
pub fn maxwell_residual(cfg: &RunConfig) -> CliResult<CommandOutput> {
    let mx = &cfg.maxwell;
    let half = Vec3::new(mx.separation / 2.0, 0.0, 0.0);
    let charges = ChargeModel::new(
        vec![
            PointCharge {
                position: -half,
                charge: -cfg.atom.e,
            },
            PointCharge {
                position: half,
                charge: cfg.atom.e,
            },
        ],
        mx.sigma,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let grid = GridSpec::new(Vec3::zeros(), mx.half_extent * mx.sigma + mx.separation / 2.0, mx.spacing * mx.sigma)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut table = with_point_header(&["h", "residual", "order"]);
    let mut records = Vec::new();
    let mut outside = 0;
    for point in cfg.sweep_points() {
        let ctx = cfg.context(&point)?;
        let rows = poisson_convergence(&charges, &grid, mx.refinements, &ctx)?;
        for r in &rows {
            let mut row = point_cells(&point);
            row.extend([r.h.into(), r.residual.into(), r.order.into()]);
            table.push(row);
            if let Some(o) = r.order {
                outside += usize::from(!(mx.order_range[0]..=mx.order_range[1]).contains(&o));
            }
        }
        records.push(json!({ "point": point, "rows": rows }));
    }
    Ok(CommandOutput {
        name: "maxwell-residual",
        notes: vec![format!(
            "{outside} observed orders outside [{}, {}]",
            mx.order_range[0], mx.order_range[1]
        )],
        table,
        json: Value::Array(records),
        passed: outside == 0,
        warnings: Vec::new(),
    })
}
