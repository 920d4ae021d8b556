use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use fee::sim::{self, SimState, TraceRecord, TraceSummary};
use fee::soil::SoilStrength;
use fee::wedge::{self, CutGeometry, NFactors, SingularityPolicy};
use fee::Error;
use log::{debug, info};
use rayon::prelude::*;

use crate::error::CliError;
use crate::presets;
use crate::scenario::{self, Scenario};

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

struct RunResult {
    trace: Vec<TraceRecord>,
    state: SimState,
    stopped: Option<Error>,
}

fn simulate(sc: Scenario) -> Result<RunResult, CliError> {
    let mut state = SimState::new(sc.pose, sc.field);
    let out = sim::run(&mut state, &sc.program, &sc.config, &sc.soil).map_err(|e| match e {
        Error::Domain(m) => CliError::Invalid(m),
        e => CliError::Failed(e.to_string()),
    })?;
    Ok(RunResult { trace: out.trace, state, stopped: out.stopped })
}

fn summary_line(trace: &[TraceRecord], width: f64) -> String {
    match TraceSummary::steady_state(trace) {
        None => "summary samples=0".into(),
        Some(s) => format!(
            "summary samples={} of={} F_raw={} Fx={} Fz={} Fx_filt={} Fz_filt={} Q={} width={} Fx_blade={} Fz_blade={}",
            s.samples,
            trace.len(),
            s.f_raw,
            s.fx,
            s.fz,
            s.fx_filtered,
            s.fz_filtered,
            s.q,
            width,
            s.fx_filtered * width,
            s.fz_filtered * width,
        ),
    }
}

fn out_of_bounds(state: &SimState, e: &Error) -> CliError {
    CliError::OutOfBounds(format!("blade left the terrain at t = {}: {e}", state.time))
}

pub fn run(path: &Path, out: Option<&Path>, check_only: bool) -> Result<(), CliError> {
    let sc = scenario::load(path, &[])?;
    if check_only {
        println!("ok {}", path.display());
        return Ok(());
    }
    info!(
        "running {} with soil {} over {} motion segments",
        path.display(),
        sc.soil.name,
        sc.program.len()
    );
    let width = sc.pose.width;
    let result = simulate(sc)?;
    {
        let mut w = open_output(out)?;
        sim::write_trace_csv(&mut w, &result.trace)?;
        w.flush()?;
    }
    for r in &result.trace {
        log::trace!("{}", r.csv_row());
    }
    let line = summary_line(&result.trace, width);
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    match &result.stopped {
        Some(e) => Err(out_of_bounds(&result.state, e)),
        None => Ok(()),
    }
}

/// Inputs of a single wedge evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EvalInput {
    pub d: f64,
    pub alpha: f64,
    pub rho: f64,
    pub phi: f64,
    pub delta: f64,
    pub c: f64,
    pub c_a: f64,
    pub gamma: f64,
    pub q: f64,
    pub s_q: f64,
    pub beta: Option<f64>,
    pub c2: f64,
    pub d_o: f64,
}

fn invalid(e: Error) -> CliError {
    CliError::Invalid(e.to_string())
}

fn factor_fields(n: &NFactors) -> String {
    format!("N_gamma={} N_c={} N_Q={} N_ca={}", n.n_gamma, n.n_c, n.n_q, n.n_ca)
}

/// One-line result of a single wedge evaluation.
pub fn eval_line(input: &EvalInput) -> Result<String, CliError> {
    let geom = CutGeometry::new(input.d, input.alpha, input.rho, 1.0).map_err(invalid)?;
    let strength = SoilStrength::new(input.phi, input.c, input.delta, input.c_a).map_err(invalid)?;
    let policy = SingularityPolicy::new(input.c2, input.d_o).map_err(invalid)?;
    if !(input.gamma >= 0.0) || !(input.q >= 0.0) || !(0.0..=1.0).contains(&input.s_q) {
        return Err(CliError::Invalid("gamma and q must be >= 0, sq in [0, 1]".into()));
    }
    let angle = match input.beta {
        Some(b) => Ok((b, false)),
        None => wedge::optimal_failure_angle(input.alpha, input.rho, input.phi, input.delta)
            .map(|a| (a.beta, a.degenerate)),
    };
    let singular_line = || {
        let f = wedge::singular_fallback(input.d, &policy);
        let (fx, fz) = wedge::cartesian_components(f, input.rho, input.delta, input.alpha);
        format!("SINGULAR F={f} Fx={fx} Fz={fz}")
    };
    let (beta, degenerate) = match angle {
        Ok(a) => a,
        Err(Error::SingularConfiguration { .. }) => return Ok(singular_line()),
        Err(e) => return Err(invalid(e)),
    };
    let cut = wedge::cutting_force(&geom, beta, &strength, input.gamma, input.q, input.s_q, &policy)
        .map_err(invalid)?;
    let Some(n) = cut.factors else {
        return Ok(singular_line());
    };
    let (fx, fz) = wedge::cartesian_components(cut.force, input.rho, input.delta, input.alpha);
    Ok(format!(
        "beta={beta} {} F={} Fx={fx} Fz={fz} degenerate={}",
        factor_fields(&n),
        cut.force,
        u8::from(degenerate)
    ))
}

pub fn eval(input: &EvalInput, out: Option<&Path>) -> Result<(), CliError> {
    let line = eval_line(input)?;
    let mut w = open_output(out)?;
    writeln!(w, "{line}")?;
    w.flush()?;
    Ok(())
}

pub struct SweepSpec<'a> {
    pub scenario: &'a Path,
    pub param: &'a str,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

/// Evenly spaced values from `from` to `to` inclusive.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n)
            .map(|i| if i == n - 1 { to } else { from + (to - from) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

pub const SWEEP_COLUMNS: &str =
    "d,alpha,rho,beta,N_gamma,N_c,N_Q,N_ca,F,Fx,Fz,Fx_filt,Fz_filt,Q,singular,degenerate";

fn file_value(param: &str, value: f64, deg: bool) -> f64 {
    if deg && scenario::is_angle_path(param) {
        value.to_radians()
    } else {
        value
    }
}

fn sweep_row(text: &str, dir: &Path, param: &str, value: f64, deg: bool) -> Result<String, CliError> {
    let set = file_value(param, value, deg);
    let sc = scenario::load_str(text, dir, &[(param.to_string(), set)])?;
    let result = simulate(sc)?;
    if let Some(e) = &result.stopped {
        return Err(out_of_bounds(&result.state, e));
    }
    let last = result.trace.last().ok_or_else(|| CliError::Failed("empty trace".into()))?;
    let s = TraceSummary::steady_state(&result.trace).unwrap();
    let factors = match result.state.last_sample.and_then(|x| x.factors) {
        Some(n) => format!("{},{},{},{}", n.n_gamma, n.n_c, n.n_q, n.n_ca),
        None => ",,,".into(),
    };
    debug!("{param} = {value}: F = {}", s.f_raw);
    Ok(format!(
        "{value},{},{},{},{},{factors},{},{},{},{},{},{},{},{}",
        last.d,
        last.alpha,
        last.rho,
        last.beta,
        s.f_raw,
        s.fx,
        s.fz,
        s.fx_filtered,
        s.fz_filtered,
        s.q,
        u8::from(last.singular),
        u8::from(last.degenerate),
    ))
}

pub fn sweep(spec: &SweepSpec, out: Option<&Path>, deg: bool) -> Result<(), CliError> {
    if spec.steps == 0 {
        return Err(CliError::Invalid("--steps must be >= 1".into()));
    }
    if !(spec.from.is_finite() && spec.to.is_finite()) {
        return Err(CliError::Invalid("--from and --to must be finite".into()));
    }
    let text = std::fs::read_to_string(spec.scenario)
        .map_err(|e| CliError::Io(format!("{}: {e}", spec.scenario.display())))?;
    let dir = spec.scenario.parent().unwrap_or(Path::new("."));
    let values = sweep_values(spec.from, spec.to, spec.steps);
    // reject bad paths before fanning out
    let first = file_value(spec.param, values[0], deg);
    scenario::load_str(&text, dir, &[(spec.param.to_string(), first)])?;
    info!("sweeping {} over {} values", spec.param, values.len());
    let rows: Vec<Result<String, CliError>> =
        values.par_iter().map(|&v| sweep_row(&text, dir, spec.param, v, deg)).collect();
    let mut w = open_output(out)?;
    writeln!(w, "{},{SWEEP_COLUMNS}", spec.param)?;
    for row in rows {
        writeln!(w, "{}", row?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn check(scenarios: &[PathBuf]) -> Result<(), CliError> {
    for (name, spec) in presets::builtin() {
        spec.build(&name).map_err(|e| CliError::Invalid(format!("preset {name}: {e}")))?;
        println!("ok preset {name}: {}", spec.description);
    }
    for path in scenarios {
        scenario::load(path, &[])?;
        println!("ok {}", path.display());
    }
    Ok(())
}
