//! Time-stepped blade pass over a heightfield, per unit blade width.
//!
//! Each force evaluation runs the pipeline
//!
//! ```text
//! profile -> slope fit -> cut geometry -> friction scaling -> failure angle
//!   -> wedge force (or singular fallback) -> components
//!   -> vertical heuristics -> cap -> scale -> keep-alive
//! ```
//!
//! after which both components are low-pass filtered and the swept soil is
//! carved into the surcharge. Evaluations happen only every
//! `sampling_resolution` steps and once the blade has moved at least
//! `min_sampling_distance`; in between, the last evaluated force is reused.

use std::io::{self, Write};

use nalgebra::Vector3;

use crate::error::{domain, Error, Result};
use crate::soil::{PropertyTable, Soil, SoilStrength};
use crate::terrain::{self, BladePose, Heightfield};
use crate::wedge::{self, FailureAngle, NFactors, SingularityPolicy};

/// How the failure angle is picked at each evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaStrategy {
    /// Minimize `N_gamma` over the admissible range.
    #[default]
    MinimizeNGamma,
    /// Match the wedge top to the extent of the surcharge pile.
    SurchargeExtent,
}

/// Simulator parameters. Defaults correspond to an unmodified soil.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Timestep (s).
    pub dt: f64,
    /// Coefficient of the `tanh` friction scaling (s/m).
    pub c1: f64,
    /// Low-pass smoothing factor in `[0, 1)`.
    pub filter_a: f64,
    /// Move-down reaction per submerged area (N/m³).
    pub c4: f64,
    /// Move-up reaction per submerged area (N/m³).
    pub c5: f64,
    /// Force cap per submerged area (N/m³); zero disables the cap.
    pub c6: f64,
    /// Surcharge contribution factor in `[0, 1]`.
    pub s_q: f64,
    pub keep_alive_enabled: bool,
    /// Largest tip-to-surface gap (m) over which the keep-alive force holds.
    pub keep_alive_max_sep: f64,
    /// Minimum number of steps between force evaluations.
    pub sampling_resolution: u32,
    /// Minimum blade travel (m) between force evaluations.
    pub min_sampling_distance: f64,
    pub beta_strategy: BetaStrategy,
    pub enable_carving: bool,
    pub enable_fee: bool,
    pub enable_vertical_heuristics: bool,
    /// Let carved material load the wedge as surcharge `Q`.
    pub enable_surcharge: bool,
    pub singularity: SingularityPolicy,
    /// Slope sample cutoff distance (m).
    pub slope_cutoff: f64,
    /// Slope sample weight decay (1/m).
    pub slope_lambda: f64,
    /// Profile sample spacing (m); the grid spacing when `None`.
    pub profile_step: Option<f64>,
    /// Replaces the force scale table when set.
    pub force_scale_override: Option<f64>,
    /// Steps a vertical velocity sign must persist before the move-up/down
    /// reactions engage.
    pub vz_debounce_steps: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 / 60.0,
            c1: 100.0,
            filter_a: 0.5,
            c4: 0.0,
            c5: 0.0,
            c6: 0.0,
            s_q: 1.0,
            keep_alive_enabled: false,
            keep_alive_max_sep: 0.05,
            sampling_resolution: 1,
            min_sampling_distance: 0.0,
            beta_strategy: BetaStrategy::MinimizeNGamma,
            enable_carving: true,
            enable_fee: true,
            enable_vertical_heuristics: true,
            enable_surcharge: true,
            singularity: SingularityPolicy::default(),
            slope_cutoff: 2.0,
            slope_lambda: 0.0,
            profile_step: None,
            force_scale_override: None,
            vz_debounce_steps: 3,
        }
    }
}

impl SimConfig {
    /// Settings that reduce the simulator to the bare wedge model: no
    /// penetration reactions, no surcharge from carved material, a 2 m
    /// uniformly weighted slope window and full surcharge contribution.
    /// Carving stays on.
    pub fn fee_only() -> Self {
        Self {
            c4: 0.0,
            c5: 0.0,
            slope_cutoff: 2.0,
            slope_lambda: 0.0,
            s_q: 1.0,
            enable_surcharge: false,
            enable_carving: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, why: &str| {
            if ok {
                Ok(())
            } else {
                Err(domain(format!("{field}: {why}")))
            }
        };
        check(self.dt > 0.0 && self.dt.is_finite(), "dt", "must be > 0")?;
        check(self.c1 > 0.0 && self.c1.is_finite(), "c1", "must be > 0")?;
        check((0.0..1.0).contains(&self.filter_a), "filter_a", "must lie in [0, 1)")?;
        check(self.c4 >= 0.0 && self.c4.is_finite(), "c4", "must be >= 0")?;
        check(self.c5 >= 0.0 && self.c5.is_finite(), "c5", "must be >= 0")?;
        check(self.c6 >= 0.0 && self.c6.is_finite(), "c6", "must be >= 0")?;
        check((0.0..=1.0).contains(&self.s_q), "s_q", "must lie in [0, 1]")?;
        check(self.keep_alive_max_sep >= 0.0, "keep_alive_max_sep", "must be >= 0")?;
        check(self.sampling_resolution >= 1, "sampling_resolution", "must be >= 1")?;
        check(self.min_sampling_distance >= 0.0, "min_sampling_distance", "must be >= 0")?;
        check(self.slope_cutoff > 0.0, "slope_cutoff", "must be > 0")?;
        check(self.slope_lambda >= 0.0, "slope_lambda", "must be >= 0")?;
        check(self.profile_step.is_none_or(|s| s > 0.0), "profile_step", "must be > 0")?;
        check(
            self.force_scale_override.is_none_or(|s| s.is_finite()),
            "force_scale_override",
            "must be finite",
        )?;
        SingularityPolicy::new(self.singularity.c2, self.singularity.d_o)
            .map_err(|e| domain(format!("singularity: {e}")))?;
        Ok(())
    }
}

/// `a prev + (1 - a) new`.
pub fn low_pass(prev: f64, new: f64, a: f64) -> f64 {
    a * prev + (1.0 - a) * new
}

/// Cutoff frequency implied by smoothing factor `a` at timestep `dt`:
/// `a = exp(-w_c dt)`.
pub fn filter_cutoff(a: f64, dt: f64) -> f64 {
    -a.ln() / dt
}

/// Adds the move-down reaction (upward, while sinking) and the move-up
/// reaction (downward, while rising) to the vertical force.
pub fn vertical_heuristics(fz: f64, a_s: f64, v_z: f64, c4: f64, c5: f64) -> f64 {
    let down = if v_z < 0.0 { c4 * a_s } else { 0.0 };
    let up = if v_z > 0.0 { c5 * a_s } else { 0.0 };
    fz + down - up
}

/// Caps `|f|` at `c6 a_s`, keeping the sign. `c6 = 0` leaves `f` alone.
pub fn clamp_force(f: f64, a_s: f64, c6: f64) -> f64 {
    if c6 == 0.0 {
        return f;
    }
    f.signum() * f.abs().min(c6 * a_s)
}

/// Multiplies `f` by the force scale at void ratio `e`, or by `override_scale`.
pub fn scale_force(f: f64, e: f64, table: &PropertyTable, override_scale: Option<f64>) -> f64 {
    match override_scale {
        Some(s) => s * f,
        None => table.lookup(e) * f,
    }
}

/// Force applied when contact is lost: the last contact force while the gap
/// stays within `max_sep` and keep-alive is on, otherwise the fresh force.
pub fn keep_alive(
    contact: bool,
    separation: f64,
    enabled: bool,
    max_sep: f64,
    last: (f64, f64),
    fresh: (f64, f64),
) -> (f64, f64) {
    if !contact && enabled && separation <= max_sep {
        last
    } else {
        fresh
    }
}

/// Weight per unit width of the accumulated surcharge (N/m).
pub fn surcharge_force(surcharge_area: f64, gamma: f64) -> f64 {
    gamma * surcharge_area
}

/// Submerged tool area per unit width. Taken as the cut depth.
pub fn submerged_area(depth: f64) -> f64 {
    depth
}

/// Forward extent of the surcharge pile measured from the blade tip. The
/// pile is a right triangle leaning on the blade with its free face at the
/// friction angle, so its base is `sqrt(2 A / tan(phi))`.
pub fn surcharge_pile_extent(area: f64, depth: f64, rho: f64, phi: f64) -> f64 {
    let t = phi.tan();
    if !(area > 0.0) || !(t > 0.0) {
        return 0.0;
    }
    depth / rho.tan() + (2.0 * area / t).sqrt()
}

/// Blade velocity relative to a wedge that slides along the failure plane
/// while staying on the blade face. Its direction is along the blade; a
/// negative `v . up_blade` means the soil rides up the blade.
pub fn wedge_relative_velocity(pose: &BladePose, alpha: f64, beta: f64) -> Vector3<f64> {
    let v = pose.velocity;
    let vs = v.x * pose.travel_dir.x + v.y * pose.travel_dir.y;
    let (ub_z, ub_s) = pose.blade_angle_world.sin_cos();
    let (uf_z, uf_s) = (beta + alpha).sin_cos();
    let cross = ub_s * uf_z - ub_z * uf_s;
    if cross.abs() < 1e-9 {
        return v;
    }
    // v = k u_f - m u_b; the wedge moves at k u_f
    let m = (uf_s * v.z - uf_z * vs) / cross;
    -m * pose.up_blade()
}

/// Lowers every node swept by the cutting edge during the last `dt` down to
/// the edge's path and returns the removed cross-section per unit width (m²).
///
/// The edge travels from `tip - velocity dt` to `tip`. Nodes count when they
/// lie within half a blade width of that path; the removed volume is divided
/// by the number of node lanes across the blade times the grid spacing.
pub fn carve(field: &mut Heightfield, pose: &BladePose, dt: f64) -> f64 {
    let h = field.spacing();
    let tol = 1e-9 * h;
    let to = pose.tip;
    let from = to - pose.velocity * dt;
    let td = pose.travel_dir;
    let ds = (to - from).xy().dot(&td);
    if ds <= tol {
        return 0.0;
    }
    let half = 0.5 * pose.width;
    let (nx, ny) = field.dims();
    let origin = field.origin();
    let index_range = |lo: f64, hi: f64, o: f64, n: usize| {
        let a = ((lo - o) / h).floor().max(0.0) as usize;
        let b = (((hi - o) / h).ceil().max(0.0) as usize).min(n - 1);
        a..=b
    };
    let xs = index_range(from.x.min(to.x) - half, from.x.max(to.x) + half, origin.x, nx);
    let ys = index_range(from.y.min(to.y) - half, from.y.max(to.y) + half, origin.y, ny);

    let mut lanes = std::collections::BTreeSet::new();
    let mut removed = 0.0;
    for j in ys {
        for i in xs.clone() {
            let rel = field.node_position(i, j) - from.xy();
            let lateral = rel.x * td.y - rel.y * td.x;
            if lateral.abs() > half + tol {
                continue;
            }
            lanes.insert((lateral / h).round() as i64);
            let s = rel.dot(&td);
            if s < -tol || s > ds + tol {
                continue;
            }
            let t = (s / ds).clamp(0.0, 1.0);
            let edge = from.z + t * (to.z - from.z);
            let z = field.height(i, j);
            if z > edge {
                removed += z - edge;
                field.set_height(i, j, edge);
            }
        }
    }
    if lanes.is_empty() {
        return 0.0;
    }
    removed * h / lanes.len() as f64
}

/// One evaluated force, reused between evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub depth: f64,
    pub alpha: f64,
    pub rho: f64,
    pub beta: f64,
    /// Wedge force (or fallback) per unit width before the heuristics (N/m).
    pub f_raw: f64,
    /// Final horizontal component (N/m).
    pub fx: f64,
    /// Final vertical component (N/m).
    pub fz: f64,
    /// Surcharge force per unit width (N/m).
    pub q: f64,
    pub contact: bool,
    pub singular: bool,
    pub degenerate: bool,
    pub factors: Option<NFactors>,
    /// Friction angle after velocity scaling (rad).
    pub delta_eff: f64,
}

/// Mutable state of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: f64,
    pub steps: u64,
    pub pose: BladePose,
    pub field: Heightfield,
    /// Accumulated carved cross-section per unit width (m²).
    pub surcharge_area: f64,
    pub filtered_force: (f64, f64),
    pub last_sample: Option<ForceSample>,
    /// Last final force computed while in contact, held by keep-alive.
    pub last_contact_force: (f64, f64),
    pub steps_since_fee: u32,
    pub distance_since_fee: f64,
    vz_sign: i8,
    vz_run: u32,
}

impl SimState {
    pub fn new(pose: BladePose, field: Heightfield) -> Self {
        Self {
            time: 0.0,
            steps: 0,
            pose,
            field,
            surcharge_area: 0.0,
            filtered_force: (0.0, 0.0),
            last_sample: None,
            last_contact_force: (0.0, 0.0),
            steps_since_fee: 0,
            distance_since_fee: 0.0,
            vz_sign: 0,
            vz_run: 0,
        }
    }

    /// Final force of the last evaluation.
    pub fn last_fee_force(&self) -> (f64, f64) {
        self.last_sample.map_or((0.0, 0.0), |s| (s.fx, s.fz))
    }
}

/// One row of the trace. Forces are per unit blade width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub d: f64,
    pub alpha: f64,
    pub rho: f64,
    pub beta: f64,
    pub f_raw: f64,
    pub fx: f64,
    pub fz: f64,
    pub fx_filtered: f64,
    pub fz_filtered: f64,
    pub q: f64,
    pub singular: bool,
    pub degenerate: bool,
}

/// Header line of the trace CSV.
pub const TRACE_HEADER: &str = "t,x,z,d,alpha,rho,beta,F_raw,Fx,Fz,Fx_filt,Fz_filt,Q,singular,degenerate";

impl TraceRecord {
    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.x,
            self.z,
            self.d,
            self.alpha,
            self.rho,
            self.beta,
            self.f_raw,
            self.fx,
            self.fz,
            self.fx_filtered,
            self.fz_filtered,
            self.q,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = self.values().iter().map(|v| v.to_string()).collect();
        cols.push(u8::from(self.singular).to_string());
        cols.push(u8::from(self.degenerate).to_string());
        cols.join(",")
    }
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[TraceRecord]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

fn blade_strength(soil: &Soil) -> Result<SoilStrength> {
    soil.strength()
}

fn update_debounce(state: &mut SimState, v_z: f64) {
    let sign = if v_z > 0.0 {
        1
    } else if v_z < 0.0 {
        -1
    } else {
        0
    };
    if sign == state.vz_sign {
        state.vz_run = state.vz_run.saturating_add(1);
    } else {
        state.vz_sign = sign;
        state.vz_run = 1;
    }
}

fn evaluate(state: &mut SimState, cfg: &SimConfig, soil: &Soil) -> Result<ForceSample> {
    let pose = state.pose;
    let step = cfg.profile_step.unwrap_or(state.field.spacing());
    let profile = terrain::extract_profile(&state.field, &pose, cfg.slope_cutoff, step)?;
    let weights = terrain::point_weights(&profile.distances(), cfg.slope_lambda, cfg.slope_cutoff)?;
    let fit = terrain::fit_slope_wls(&profile, &weights)?;
    let cut = terrain::cut_geometry_from_fit(&pose, &fit)?;
    let geom = cut.geometry;
    let strength = blade_strength(soil)?;
    let gamma = soil.unit_weight();
    let q = if cfg.enable_surcharge { surcharge_force(state.surcharge_area, gamma) } else { 0.0 };

    let mut sample = ForceSample {
        depth: geom.depth,
        alpha: geom.alpha,
        rho: geom.rho,
        beta: 0.0,
        f_raw: 0.0,
        fx: 0.0,
        fz: 0.0,
        q,
        contact: geom.depth > 0.0,
        singular: false,
        degenerate: false,
        factors: None,
        delta_eff: strength.delta,
    };

    if !sample.contact {
        let separation = (-cut.signed_depth).max(0.0);
        let (fx, fz) = keep_alive(
            false,
            separation,
            cfg.keep_alive_enabled,
            cfg.keep_alive_max_sep,
            state.last_contact_force,
            (0.0, 0.0),
        );
        sample.fx = fx;
        sample.fz = fz;
        return Ok(sample);
    }
    if !cfg.enable_fee {
        state.last_contact_force = (0.0, 0.0);
        return Ok(sample);
    }

    let SoilStrength { phi, delta, .. } = strength;
    let preliminary = wedge::optimal_failure_angle(geom.alpha, geom.rho, phi, delta).ok();
    let v_rel = match preliminary {
        Some(a) => wedge_relative_velocity(&pose, geom.alpha, a.beta),
        None => pose.velocity,
    };
    let (delta_eff, c_a_eff) =
        wedge::effective_friction(delta, strength.c_a, &v_rel, &pose.up_blade(), cfg.c1)?;
    let eff = SoilStrength { delta: delta_eff, c_a: c_a_eff, ..strength };
    sample.delta_eff = delta_eff;

    let angle = match cfg.beta_strategy {
        BetaStrategy::MinimizeNGamma => {
            wedge::optimal_failure_angle(geom.alpha, geom.rho, phi, delta_eff)
        }
        BetaStrategy::SurchargeExtent => {
            let area = if cfg.enable_surcharge { state.surcharge_area } else { 0.0 };
            let extent = surcharge_pile_extent(area, geom.depth, geom.rho, phi);
            wedge::beta_from_surcharge_extent(geom.depth, geom.alpha, geom.rho, phi, delta_eff, extent)
        }
    };
    let force = match angle {
        Ok(FailureAngle { beta, degenerate, .. }) => {
            sample.beta = beta;
            sample.degenerate = degenerate;
            wedge::cutting_force(&geom, beta, &eff, gamma, q, cfg.s_q, &cfg.singularity)?
        }
        Err(Error::SingularConfiguration { .. }) => wedge::CutForce {
            force: wedge::singular_fallback(geom.depth, &cfg.singularity),
            factors: None,
            singular: true,
        },
        Err(e) => return Err(e),
    };
    sample.f_raw = force.force;
    sample.singular = force.singular;
    sample.factors = force.factors;

    let (mut fx, mut fz) = wedge::cartesian_components(force.force, geom.rho, delta_eff, geom.alpha);
    let a_s = submerged_area(geom.depth);
    if cfg.enable_vertical_heuristics {
        let v_z = if state.vz_run >= cfg.vz_debounce_steps { pose.velocity.z } else { 0.0 };
        fz = vertical_heuristics(fz, a_s, v_z, cfg.c4, cfg.c5);
    }
    fx = clamp_force(fx, a_s, cfg.c6);
    fz = clamp_force(fz, a_s, cfg.c6);
    let e = soil.state.void_ratio();
    fx = scale_force(fx, e, &soil.force_scale_table, cfg.force_scale_override);
    fz = scale_force(fz, e, &soil.force_scale_table, cfg.force_scale_override);

    state.last_contact_force = (fx, fz);
    sample.fx = fx;
    sample.fz = fz;
    Ok(sample)
}

/// Advances the run by one timestep with the blade moving at `command`.
///
/// Returns [`Error::OutOfBounds`] once the blade leaves the terrain.
pub fn step(
    state: &mut SimState,
    command: Vector3<f64>,
    cfg: &SimConfig,
    soil: &Soil,
) -> Result<TraceRecord> {
    let prev_tip = state.pose.tip;
    state.pose.velocity = command;
    state.pose.tip += command * cfg.dt;
    state.steps += 1;
    state.time = state.steps as f64 * cfg.dt;
    state.steps_since_fee = state.steps_since_fee.saturating_add(1);
    state.distance_since_fee += (state.pose.tip - prev_tip).norm();
    update_debounce(state, command.z);

    let due = state.last_sample.is_none()
        || (state.steps_since_fee >= cfg.sampling_resolution
            && state.distance_since_fee >= cfg.min_sampling_distance);
    let sample = match state.last_sample {
        Some(s) if !due => s,
        _ => {
            let s = evaluate(state, cfg, soil)?;
            state.last_sample = Some(s);
            state.steps_since_fee = 0;
            state.distance_since_fee = 0.0;
            s
        }
    };

    state.filtered_force = if state.steps == 1 {
        (sample.fx, sample.fz)
    } else {
        let (px, pz) = state.filtered_force;
        (low_pass(px, sample.fx, cfg.filter_a), low_pass(pz, sample.fz, cfg.filter_a))
    };

    if cfg.enable_carving {
        state.surcharge_area += carve(&mut state.field, &state.pose, cfg.dt);
    }

    Ok(TraceRecord {
        t: state.time,
        x: state.pose.tip.x,
        z: state.pose.tip.z,
        d: sample.depth,
        alpha: sample.alpha,
        rho: sample.rho,
        beta: sample.beta,
        f_raw: sample.f_raw,
        fx: sample.fx,
        fz: sample.fz,
        fx_filtered: state.filtered_force.0,
        fz_filtered: state.filtered_force.1,
        q: sample.q,
        singular: sample.singular,
        degenerate: sample.degenerate,
    })
}

/// A constant blade velocity held for `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSegment {
    pub duration: f64,
    pub velocity: Vector3<f64>,
}

/// Trace of a run and the error that ended it early, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: Vec<TraceRecord>,
    pub stopped: Option<Error>,
}

/// Runs a motion program from `state`.
pub fn run(
    state: &mut SimState,
    program: &[MotionSegment],
    cfg: &SimConfig,
    soil: &Soil,
) -> Result<RunOutcome> {
    cfg.validate()?;
    soil.validate()?;
    let mut trace = Vec::new();
    for seg in program {
        if !(seg.duration > 0.0) {
            return Err(domain(format!("motion duration {} must be > 0", seg.duration)));
        }
        let steps = ((seg.duration / cfg.dt).round() as usize).max(1);
        for _ in 0..steps {
            match step(state, seg.velocity, cfg, soil) {
                Ok(r) => trace.push(r),
                Err(e @ Error::OutOfBounds { .. }) => {
                    return Ok(RunOutcome { trace, stopped: Some(e) })
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(RunOutcome { trace, stopped: None })
}

/// Means over the final quarter of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSummary {
    pub samples: usize,
    pub f_raw: f64,
    pub fx: f64,
    pub fz: f64,
    pub fx_filtered: f64,
    pub fz_filtered: f64,
    pub q: f64,
}

impl TraceSummary {
    pub fn steady_state(trace: &[TraceRecord]) -> Option<Self> {
        if trace.is_empty() {
            return None;
        }
        let n = trace.len().div_ceil(4);
        let tail = &trace[trace.len() - n..];
        let mean = |f: fn(&TraceRecord) -> f64| tail.iter().map(f).sum::<f64>() / n as f64;
        Some(Self {
            samples: n,
            f_raw: mean(|r| r.f_raw),
            fx: mean(|r| r.fx),
            fz: mean(|r| r.fz),
            fx_filtered: mean(|r| r.fx_filtered),
            fz_filtered: mean(|r| r.fz_filtered),
            q: mean(|r| r.q),
        })
    }
}
