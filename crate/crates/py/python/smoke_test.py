"""Smoke test for the pyunitgrad extension module.

Build and install first, e.g.
    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/pyunitgrad-*.whl
then run `python crates/py/python/smoke_test.py`.
"""

import math

import pyunitgrad as ug


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    # Zoo fields and their gradients.
    f = ug.Field("affine:0.6,0.8:1")
    assert f.dim == 2 and f.convex and f.differentiable
    assert close(f.value([1.0, 1.0]), 2.4, 1e-12)
    assert all(close(g, c, 1e-9) for g, c in zip(f.fd_gradient([0.3, -0.2]), [0.6, 0.8]))

    # Verdict engine.
    doc = ug.classify(f, lo=[-2, -2], hi=[2, 2], seed=0)
    assert doc["verdict"]["kind"] == "Affine", doc["verdict"]
    c1 = doc["verdict"]["params"]["c1"]
    assert close(c1[0], 0.6, 1e-8) and close(c1[1], 0.8, 1e-8)
    assert ug.classify(ug.Field("norm:0"))["verdict"]["kind"] == "NotDifferentiable"
    assert ug.classify(ug.Field("sqrt_quadratic"))["verdict"]["kind"] == "NotConstantNorm"
    concave = ug.classify(f.negated(), mode="concave")
    assert close(concave["verdict"]["params"]["c0"], -1.0, 1e-8)

    report = ug.classify(ug.Field("smoothed_norm:0.1:0"), witness_radius=1.0)["report"]
    assert report["rays"] and all(r["deviation"] > 0 for r in report["rays"])

    # Fixed points of u -> r grad f on a unit-slope affine field.
    b = ug.brouwer_fixed_point(f, 0.5)
    q = ug.resolvent_point(f, 0.5)
    assert b["converged"] and close(math.hypot(*b["point"]), 0.5, 1e-9)
    assert all(close(x, -y, 1e-9) for x, y in zip(b["point"], q["point"]))
    d = ug.limit_direction(f, [1.0, 0.1, 0.01, 0.001])
    assert close(d[0], 0.6, 1e-8) and close(d[1], 0.8, 1e-8)
    assert ug.ray_deviation(f, [0.5, 0.5]) < 1e-9
    assert ug.ray_gradient_drift(f, [0.5, 0.5]) < 1e-9

    # Lines.
    gap = ug.closest_points_between_lines([0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1])
    assert gap["gap"] == 1.0 and not gap["parallel"]

    # Parabola distance: closed form against the numeric projection.
    u1, u2 = 1.0, 0.0
    x = ug.parabola_projection(u1, u2)
    numeric = ug.project_to_graph("parabola", [u1, u2])
    assert close(x, numeric["minimizer"][0], 1e-8)
    assert abs(ug.parabola_cubic_residual(u1, u2, x)) < 1e-10
    value, grad = ug.distance_field("parabola", [u1, u2])
    assert close(math.hypot(*grad), 1.0, 1e-9)
    assert ug.classify_singularity(0.0, 2.0) == "MultiRoot"

    grid = ug.emit_grid("parabola", nx=20, ny=10)
    assert len(grid["value"]) == 200 and set(grid) == {"u1", "u2", "value", "gradnorm", "class"}

    tol = ug.Tolerances(fd_step=1e-6)
    assert tol.fd_step == 1e-6 and tol.tol_equal == 1e-8

    try:
        ug.Field("no_such_field")
    except ValueError:
        pass
    else:
        raise AssertionError("bad spec accepted")

    print(f"pyunitgrad smoke test passed ({len(ug.zoo_catalog())} zoo families)")


if __name__ == "__main__":
    main()
