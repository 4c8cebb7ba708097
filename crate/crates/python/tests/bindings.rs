use pyo3::ffi::c_str;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qivif_py::qivif_module;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    static INIT: std::sync::Once = std::sync::Once::new();
    INIT.call_once(|| pyo3::append_to_inittab!(qivif_module));
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("qivif", py.import("qivif").unwrap()).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &std::ffi::CStr) {
    if let Err(e) = py.run(code, Some(globals), None) {
        e.print(py);
        panic!("python snippet failed");
    }
}

#[test]
fn matrix_roundtrip_and_algebra() {
    with_module(|py, g| {
        run(
            py,
            g,
            c_str!(
                r#"
m = qivif.QuaternionMatrix(1, 2, [(1, 2, 3, 4), (0, 1, 0, 0)])
assert m.shape == (1, 2)
assert m.to_list() == [(1.0, 2.0, 3.0, 4.0), (0.0, 1.0, 0.0, 0.0)]
assert m[0, 0] == (1.0, 2.0, 3.0, 4.0)
h = m.conj_transpose()
assert h.shape == (2, 1) and h[0, 0] == (1.0, -2.0, -3.0, -4.0)
p = m @ h
assert abs(p[0, 0][0] - 31.0) < 1e-12
assert (m + m) == m.scale(2.0)
i = qivif.QuaternionMatrix.identity(2)
assert (m @ i) == m
try:
    m[3, 0]
    raise SystemExit("index out of range accepted")
except IndexError:
    pass
try:
    m @ m
    raise SystemExit("shape mismatch accepted")
except ValueError:
    pass
"#
            ),
        );
    });
}

#[test]
fn qsvd_reconstructs() {
    with_module(|py, g| {
        run(
            py,
            g,
            c_str!(
                r#"
import random
random.seed(3)
a = qivif.QuaternionMatrix(3, 2, [tuple(random.uniform(-1, 1) for _ in range(4)) for _ in range(6)])
u, s, v = qivif.qsvd(a)
k = len(s)
d = qivif.QuaternionMatrix.zeros(k, k)
for j, x in enumerate(s):
    d[j, j] = (x, 0.0, 0.0, 0.0)
r = u @ d @ v.conj_transpose() - a
assert r.norm("fro") < 1e-12 * a.norm("fro"), r.norm("fro")
"#
            ),
        );
    });
}

#[test]
fn operators_and_config() {
    with_module(|py, g| {
        run(
            py,
            g,
            c_str!(
                r#"
assert qivif.gst_scalar(0.0, 1.0, 1.0, 0.5) == 0.0
x = qivif.gst_scalar(10.0, 1.0, 1.0, 1.0)
assert abs(x - 9.0) < 1e-9, x
y = qivif.QuaternionMatrix(2, 1, [(3, 0, 0, 0), (0, 4, 0, 0)])
z = qivif.soft_threshold_columns(y, 10.0)
assert z.norm("fro") == 0.0
w = qivif.pssv_wsp_shrink(y, 0.0, 1.0, 0)
assert (w - y).norm("fro") < 1e-12
assert "w1 = 0.7" in qivif.resolved_config(overrides=["qhbf.w1=0.7"])
try:
    qivif.resolved_config(overrides=["qhbf.w1=-1"])
    raise SystemExit("invalid config accepted")
except ValueError:
    pass
assert qivif.CSV_HEADER == "image_id,sd,sf,ag,mi,en,qabf"
"#
            ),
        );
    });
}
