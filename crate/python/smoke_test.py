"""Smoke test for the pycondldp extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/pycondldp-*.whl
"""

import math

import pycondldp as ldp


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    cramer = ldp.JointModel("gaussian_cramer", {"mu": 0.0, "sigma": 1.0})
    assert (cramer.x_dim, cramer.y_dim) == (1, 0)

    t = ldp.solve_tilt(cramer, [1.0])
    close(t["lambda0"][0], 1.0, 1e-9)
    close(t["min_rate"], 0.5, 1e-12)

    bern = ldp.JointModel("bernoulli_cramer", {"p": 0.3})
    t = ldp.solve_tilt(bern, [0.5])
    kl = 0.5 * math.log(0.5 / 0.3) + 0.5 * math.log(0.5 / 0.7)
    close(t["min_rate"], kl, 1e-9)

    rates = ldp.conditional_rate(cramer, [0.5], [[0.25], [0.5], [1.0]])
    assert rates[0] == math.inf
    close(rates[1], 0.0, 1e-12)
    close(rates[2], 0.375, 1e-9)

    pair = ldp.JointModel("gaussian_pair")
    ys = [[1.5], [2.0], [2.5]]
    marginal = ldp.conditional_marginal_rate(pair, [1.0], ys)
    assert min(range(3), key=lambda i: marginal[i]) == 1
    assert ldp.conditional_free_energy(pair, [1.0], [[0.0]]) == [0.0]

    half = lambda c: {"kind": "half_space", "normal": [1.0], "anchor": [c]}
    e = ldp.estimate_conditional_logprob(cramer, 400, half(1.0), half(0.5), "tilted", 2024, 20000)
    close(e["estimate"], -0.375, 0.02)

    c = ldp.canonical_expectation(pair, 500, [1.0], 3, 10000)
    close(c["mean"][0], 2.0, 4 * c["stderr"][0])

    s = ldp.convergence_sweep(cramer, [200, 800], half(1.0), [0.5], seed=2024, replicas=20000)
    assert all(v["pass"] for v in s["verdicts"])
    assert s["target"] == -0.375

    try:
        ldp.JointModel("cauchy")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown model accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
