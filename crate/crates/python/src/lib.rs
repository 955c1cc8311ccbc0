//! Python bindings: walks, the thickness predicate, the reflection chain,
//! knot classification by closure spectra and power-law fits.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use thickwalk::knots::{self, ClosedPolygon};
use thickwalk::sampler::{self, chain_rng};
use thickwalk::{stats, thickness, Error, Vec3};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidWalk(_)
        | Error::Precondition(_)
        | Error::Config(_)
        | Error::Domain(_)
        | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn points(v: &[Vec3]) -> Vec<(f64, f64, f64)> {
    v.iter().map(|p| (p.x, p.y, p.z)).collect()
}

fn vecs(v: Vec<(f64, f64, f64)>) -> Vec<Vec3> {
    v.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect()
}

/// Equilateral open polygon with unit edges.
#[pyclass(name = "Walk", module = "pythickwalk", frozen)]
struct PyWalk {
    inner: thickwalk::Walk,
}

#[pymethods]
impl PyWalk {
    #[new]
    fn new(vertices: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        let inner = thickwalk::Walk::new(vecs(vertices)).map_err(to_py)?;
        Ok(PyWalk { inner })
    }

    #[staticmethod]
    fn straight(n: usize) -> PyResult<Self> {
        let inner = thickwalk::Walk::straight(n).map_err(to_py)?;
        Ok(PyWalk { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn vertices(&self) -> Vec<(f64, f64, f64)> {
        points(self.inner.vertices())
    }

    /// Interior angle at vertex `i` (pi when straight).
    fn bend_angle(&self, i: usize) -> PyResult<f64> {
        self.inner.bend_angle(i).map_err(to_py)
    }

    /// Reflects `v_{i+1}..v_n` through the plane through `v_i` with the given normal.
    fn reflect_tail(&self, i: usize, normal: (f64, f64, f64)) -> PyResult<Self> {
        let plane = thickwalk::Plane::new(self.inner.vertex(i), Vec3::new(normal.0, normal.1, normal.2))
            .map_err(to_py)?;
        let inner = self.inner.reflect_tail(i, &plane).map_err(to_py)?;
        Ok(PyWalk { inner })
    }

    fn reversed(&self) -> Self {
        PyWalk {
            inner: self.inner.reversed(),
        }
    }

    fn radius_of_gyration2(&self) -> f64 {
        stats::squared_radius_of_gyration(&self.inner)
    }

    fn end_to_end2(&self) -> f64 {
        stats::squared_end_to_end(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Walk(n={})", self.inner.n())
    }
}

/// Reflection-move Markov chain started from the straight walk.
#[pyclass(name = "Chain", module = "pythickwalk")]
struct PyChain {
    inner: sampler::Chain,
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (n, r, seed, stream=0, move_mix=sampler::DEFAULT_MOVE_MIX, max_plane_retries=sampler::DEFAULT_MAX_PLANE_RETRIES))]
    fn new(
        n: usize,
        r: f64,
        seed: u64,
        stream: u64,
        move_mix: f64,
        max_plane_retries: usize,
    ) -> PyResult<Self> {
        let mut c = sampler::ChainConfig::new(n, r, seed);
        c.stream = stream;
        c.move_mix = move_mix;
        c.max_plane_retries = max_plane_retries;
        let inner = sampler::Chain::new(c).map_err(to_py)?;
        Ok(PyChain { inner })
    }

    /// One proposal; true when accepted.
    fn step(&mut self) -> bool {
        self.inner.step().is_some()
    }

    /// Steps until `count` more moves have been accepted.
    fn advance(&mut self, count: u64) {
        self.inner.advance_accepted(count);
    }

    /// `count` samples, `stride` accepted moves apart.
    fn sample(&mut self, count: usize, stride: u64) -> Vec<PyWalk> {
        (0..count)
            .map(|_| {
                self.inner.advance_accepted(stride);
                PyWalk {
                    inner: self.inner.walk().clone(),
                }
            })
            .collect()
    }

    #[getter]
    fn walk(&self) -> PyWalk {
        PyWalk {
            inner: self.inner.walk().clone(),
        }
    }

    /// `(proposed, accepted, acceptance_rate)`.
    fn stats(&self) -> (u64, u64, f64) {
        let s = self.inner.stats();
        (s.proposed, s.accepted, s.acceptance_rate())
    }

    fn reset_stats(&mut self) {
        self.inner.reset_stats();
    }
}

/// Doubly-critical self distance and its witness `((h, t_h), (j, t_j))`, if any.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn dcsd(walk: &PyWalk) -> (f64, Option<((usize, f64), (usize, f64))>) {
    let d = thickness::dcsd(&walk.inner);
    let w = d.witness.map(|(a, b)| ((a.segment, a.t), (b.segment, b.t)));
    (d.distance, w)
}

#[pyfunction]
fn min_bend_angle(walk: &PyWalk) -> f64 {
    thickness::min_bend_angle(&walk.inner)
}

#[pyfunction]
fn accommodates_tube(walk: &PyWalk, r: f64) -> PyResult<bool> {
    let p = thickwalk::ThicknessParams::new(r).map_err(to_py)?;
    Ok(thickness::accommodates_tube(&walk.inner, &p))
}

/// Closure spectrum of an open chain as `[(name, determinant, secondary, count)]`,
/// most frequent first.
#[pyfunction]
#[pyo3(signature = (vertices, closures=knots::DEFAULT_CLOSURES, seed=1))]
fn knot_spectrum(
    vertices: Vec<(f64, f64, f64)>,
    closures: usize,
    seed: u64,
) -> PyResult<Vec<(String, String, String, u64)>> {
    let mut rng = chain_rng(seed, 0);
    let s = knots::knot_spectrum(&vecs(vertices), closures, &mut rng).map_err(to_py)?;
    Ok(s.ranked()
        .into_iter()
        .map(|(k, c)| {
            (
                k.name().to_string(),
                k.determinant().to_string(),
                k.secondary().to_string(),
                c,
            )
        })
        .collect())
}

/// Weak-dominance verdict `(level, winner, fraction)` of an open chain.
#[pyfunction]
#[pyo3(signature = (vertices, closures=knots::DEFAULT_CLOSURES, seed=1))]
fn dominant_knot(
    vertices: Vec<(f64, f64, f64)>,
    closures: usize,
    seed: u64,
) -> PyResult<(String, String, f64)> {
    let mut rng = chain_rng(seed, 0);
    let s = knots::knot_spectrum(&vecs(vertices), closures, &mut rng).map_err(to_py)?;
    let v = knots::dominance(&s).map_err(to_py)?;
    Ok((v.level.to_string(), v.winner.name().to_string(), v.fraction))
}

/// Knot class name of a closed polygon.
#[pyfunction]
#[pyo3(signature = (vertices, seed=1))]
fn classify_polygon(vertices: Vec<(f64, f64, f64)>, seed: u64) -> PyResult<String> {
    let poly = ClosedPolygon::new(vecs(vertices)).map_err(to_py)?;
    let mut rng = chain_rng(seed, 0);
    Ok(knots::classify_polygon(&poly, &mut rng).name().to_string())
}

/// OLS fit of `ln y` on `ln x`: `(exponent, log_prefactor, exponent_stderr, r_squared)`.
#[pyfunction]
fn fit_power_law(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64, f64)> {
    let f = stats::fit_power_law(&points).map_err(to_py)?;
    Ok((f.exponent, f.log_prefactor, f.exponent_stderr, f.r_squared))
}

#[pymodule]
fn pythickwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWalk>()?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(dcsd, m)?)?;
    m.add_function(wrap_pyfunction!(min_bend_angle, m)?)?;
    m.add_function(wrap_pyfunction!(accommodates_tube, m)?)?;
    m.add_function(wrap_pyfunction!(knot_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(dominant_knot, m)?)?;
    m.add_function(wrap_pyfunction!(classify_polygon, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    Ok(())
}
