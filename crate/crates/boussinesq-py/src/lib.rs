//! Python bindings. Arrays cross the boundary as lists of floats; space-time fields as
//! lists of time slices.

use boussinesq::boundary::{self, BoundaryKernelConfig};
use boussinesq::halfline::{BoundarySignal, ExtensionMethod, HalfLineFunction};
use boussinesq::picard::{self, IBVPData, SolverConfig};
use boussinesq::spacetime::SpaceTimeField;
use boussinesq::xsb::{self, SupremumCase};
use boussinesq::{linear_flow, Error, Field, GridSpec, SobolevIndex, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoContraction { .. }
        | Error::QuadratureNotConverged { .. }
        | Error::ContourQuadratureNotConverged { .. }
        | Error::StabilityViolation { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn grid(half_width: f64, nx: usize, t_max: f64, nt: usize) -> PyResult<GridSpec> {
    GridSpec::new(half_width, nx, t_max, nt, 2).map_err(to_py)
}

fn extension(name: &str) -> PyResult<ExtensionMethod> {
    match name {
        "zero" => Ok(ExtensionMethod::Zero),
        "even-reflection" => Ok(ExtensionMethod::EvenReflection),
        "smooth-decay-reflection" => Ok(ExtensionMethod::SmoothDecayReflection),
        other => Err(PyValueError::new_err(format!("unknown extension {other:?}"))),
    }
}

fn full_line(g: GridSpec, values: Vec<f64>) -> PyResult<Field> {
    Field::new(g, values.into_iter().map(C64::from).collect()).map_err(to_py)
}

fn real_slices(u: &SpaceTimeField) -> Vec<Vec<f64>> {
    (0..u.grid.nt).map(|n| u.row(n).iter().map(|c| c.re).collect()).collect()
}

/// Free evolution of full-line samples `(f, g)` to time `t`; `g` enters as `u_t(0) = g_x`.
#[pyfunction]
fn free_propagate(half_width: f64, f: Vec<f64>, g: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
    let gs = grid(half_width, f.len(), 1.0, 8)?;
    let out = linear_flow::free_propagate(&full_line(gs, f)?, &full_line(gs, g)?, t);
    Ok(out.values.iter().map(|c| c.re).collect())
}

/// Linear boundary solution with boundary data sampled at `t_n = n t_max / (nt - 1)`.
#[pyfunction]
fn boundary_evolution(half_width: f64, nx: usize, t_max: f64, h1: Vec<f64>, h2: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let g = grid(half_width, nx, t_max, h1.len())?;
    let dt = g.dt();
    let b1 = BoundarySignal::new(dt, h1, 0.0).map_err(to_py)?;
    let b2 = BoundarySignal::new(dt, h2, 0.0).map_err(to_py)?;
    let field = boundary::boundary_evolution(&b1, &b2, g, &BoundaryKernelConfig::default()).map_err(to_py)?;
    Ok(real_slices(&field))
}

#[pyfunction]
fn mellin_oracle(dt: f64, h1: Vec<f64>, h2: Vec<f64>, x: f64, t: f64) -> PyResult<f64> {
    let b1 = BoundarySignal::new(dt, h1, 0.0).map_err(to_py)?;
    let b2 = BoundarySignal::new(dt, h2, 0.0).map_err(to_py)?;
    boundary::mellin_oracle(&b1, &b2, x, t).map_err(to_py)
}

/// Solve the nonlinear problem. `f`, `g` are half-line samples at `x = 0, dx, ...`
/// (`nx / 2` values); `h1`, `h2` are boundary samples (`nt` values).
#[pyfunction]
#[pyo3(signature = (half_width, nx, t_max, f, g, h1, h2, s = 0.0, extension = "smooth-decay-reflection", b = 0.45))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    half_width: f64,
    nx: usize,
    t_max: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    s: f64,
    extension: &str,
    b: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let gs = grid(half_width, nx, t_max, h1.len())?;
    let si = SobolevIndex::new(s).map_err(to_py)?;
    let data = IBVPData::new(
        HalfLineFunction::new(gs, f, si).map_err(to_py)?,
        HalfLineFunction::new(gs, g, SobolevIndex::new(s - 1.0).map_err(to_py)?).map_err(to_py)?,
        BoundarySignal::new(gs.dt(), h1, (2.0 * s + 1.0) / 4.0).map_err(to_py)?,
        BoundarySignal::new(gs.dt(), h2, (2.0 * s - 1.0) / 4.0).map_err(to_py)?,
        si,
        self::extension(extension)?,
    )
    .map_err(to_py)?;
    let cfg = SolverConfig { b, ..SolverConfig::default() };
    let bundle = py.allow_threads(|| picard::solve(&data, &cfg)).map_err(to_py)?;
    let out = PyDict::new_bound(py);
    out.set_item("window", bundle.window)?;
    out.set_item("u", bundle.u_restricted.clone())?;
    let diag = PyDict::new_bound(py);
    for (k, v) in &bundle.diagnostics.values {
        diag.set_item(k, *v)?;
    }
    out.set_item("diagnostics", diag)?;
    let history: Vec<(usize, f64, f64, f64)> =
        bundle.diagnostics.iterations.iter().map(|r| (r.iter, r.diff_norm, r.contraction, r.window)).collect();
    out.set_item("iterations", history)?;
    Ok(out)
}

/// X^{s,b} norm of a real field given as `nt` slices of `nx` values.
#[pyfunction]
fn xsb_norm(half_width: f64, t_max: f64, slices: Vec<Vec<f64>>, s: f64, b: f64) -> PyResult<f64> {
    let nx = slices.first().map_or(0, |r| r.len());
    let g = grid(half_width, nx, t_max, slices.len())?;
    if slices.iter().any(|r| r.len() != nx) {
        return Err(PyValueError::new_err("slices must have equal length"));
    }
    let values = slices.into_iter().flatten().map(C64::from).collect();
    Ok(xsb::xsb_norm(&SpaceTimeField { grid: g, values, window: t_max }, s, b))
}

/// `(supremum, (xi, tau))` of the reduced integral, case `"a"` or `"bc"`.
#[pyfunction]
#[pyo3(signature = (s, a, b, cutoff, case = "a"))]
fn multiplier_supremum(py: Python<'_>, s: f64, a: f64, b: f64, cutoff: f64, case: &str) -> PyResult<(f64, (f64, f64))> {
    let case = match case {
        "a" => SupremumCase::A,
        "bc" => SupremumCase::BC,
        other => return Err(PyValueError::new_err(format!("unknown case {other:?}"))),
    };
    let r = py.allow_threads(|| xsb::multiplier_supremum_case(case, s, a, b, cutoff)).map_err(to_py)?;
    Ok((r.value, r.argmax))
}

#[pyfunction]
fn kato_ratio(half_width: f64, f: Vec<f64>, g: Vec<f64>, s: f64, t_half: f64, nt: usize) -> PyResult<f64> {
    let gs = grid(half_width, f.len(), 1.0, 8)?;
    linear_flow::kato_ratio(&full_line(gs, f)?, &full_line(gs, g)?, s, t_half, nt).map_err(to_py)
}

/// Run the command-line tool in-process; returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    let mut argv = vec!["boussinesq".to_string()];
    argv.extend(args);
    boussinesq::cli::run(argv)
}

#[pymodule]
fn boussinesq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(free_propagate, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_evolution, m)?)?;
    m.add_function(wrap_pyfunction!(mellin_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(xsb_norm, m)?)?;
    m.add_function(wrap_pyfunction!(multiplier_supremum, m)?)?;
    m.add_function(wrap_pyfunction!(kato_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
