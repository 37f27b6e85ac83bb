"""Smoke test for the pdcp_py extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml && pip install target/wheels/pdcp_py-*.whl
Then run:
    python python/smoke_test.py
"""

import math

import pdcp_py as p


def main():
    mkt = p.MarketParams1D()
    assert mkt.strike == 100.0 and mkt.s_max == 500.0

    grid = p.build_grid(50, 100.0, 500.0)
    assert len(grid) == 50 and grid[0] == 0.0 and abs(grid[-1] - 500.0) < 1e-9
    assert all(b > a for a, b in zip(grid, grid[1:]))

    prob = p.Problem(mkt, 200)
    assert prob.dims == 1 and len(prob.u0) == 200
    u, kappa = prob.solve("dirka", 100)
    assert all(x >= g - 1e-6 for x, g in zip(u, prob.u0))
    price = prob.value_at_strike(u)
    assert abs(price - 10.7738) / 10.7738 < 5e-3, price
    g = prob.greeks(u)
    assert set(g) == {"value", "delta", "gamma"}
    assert -1.0 <= g["delta"][100] <= 0.0

    u_ref = prob.reference()
    err = prob.roi_max_error(u_ref, u)
    assert 0.0 < err < 1e-2, err

    r = p.stability_function("be", complex(-1.0, 0.0))
    assert abs(r - 0.5) < 1e-15
    r = p.stability_function("cn", complex(0.0, 3.0))
    assert abs(abs(r) - 1.0) < 1e-14

    assert abs(p.estimate_order([(n, 3.0 * n ** -2.0) for n in (10, 20, 40, 80)]) - 2.0) < 1e-12

    prob2 = p.Problem(p.MarketParams2D(), 30)
    assert prob2.dims == 2 and len(prob2.u0) == 900
    u2, _ = prob2.solve("be", 10)
    assert set(prob2.greeks(u2)) == {"value", "delta1", "delta2", "gamma11", "gamma12", "gamma22"}
    assert math.isfinite(prob2.value_at_strike(u2))

    for bad in (lambda: p.MarketParams1D(s_max=150.0), lambda: prob.solve("rk4", 10), lambda: prob.solve("be", 0)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"ok: u(K,T) = {price:.6f}, kappa = {kappa}, ROI error = {err:.3e}")


if __name__ == "__main__":
    main()
