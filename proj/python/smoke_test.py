"""Smoke tests for the python bindings: load a dataset and run each entry point."""
import math

import _dosesens as ds

CSV = """set_id,unit_id,dose,outcome
a,1,0.2,1.0
a,2,0.7,3.0
b,1,0.1,0.0
b,2,0.5,2.0
b,3,0.9,4.0
"""


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b}"


def main():
    data = ds.parse_dataset_csv(CSV)
    assert data.num_sets() == 2
    assert data.total_units() == 5
    assert data.sets[0].set_id == "a"
    assert data.sets[1].doses == [0.1, 0.5, 0.9]

    sharp = ds.sharp_test(data, gamma=1.0, statistic="perm-t")
    assert 0.0 <= sharp["p_bound"] <= 1.0
    assert len(sharp["mu_star"]) == 2
    # At gamma = 1 the LP bound is the uniform mean of the set statistic.
    t_obs = sharp["t_observed"]
    assert len(t_obs) == 2

    sharp_g = ds.sharp_test(data, gamma=1.8, statistic="double-rank")
    assert sharp_g["p_bound"] >= sharp["p_bound"] - 1e-12

    est = ds.estimate(data, estimand="tsate", threshold=0.5)
    assert math.isfinite(est["V_N"])
    assert len(est["per_set"]) == 2

    test = ds.weak_test(data, estimand="tsate", threshold=0.5, gamma=1.0,
                        theta0=est["V_N"], method="vn")
    approx(test["p_bound"], 0.5, 1e-9)

    lo, hi = ds.confidence_interval(data, estimand="tsate", threshold=0.5,
                                    gamma=1.0, alpha=0.05)
    assert lo <= est["V_N"] <= hi
    # Width nesting holds among the inverted intervals (gamma > 1); the
    # gamma = 1 interval uses the closed form with a fixed variance estimate.
    lo2, hi2 = ds.confidence_interval(data, estimand="tsate", threshold=0.5,
                                      gamma=1.2, alpha=0.05)
    lo3, hi3 = ds.confidence_interval(data, estimand="tsate", threshold=0.5,
                                      gamma=1.4, alpha=0.05)
    assert hi3 - lo3 >= hi2 - lo2 - 1e-9

    methods = ds.simulate(protocol="sharp", num_sets=25, reps=4, seed=7, gamma=1.0)
    assert len(methods) == 1
    assert 0.0 <= methods[0]["rejection_rate"] <= 1.0

    try:
        ds.parse_dataset_csv("set_id,unit_id,dose,outcome\na,1,0.2,1.0\n")
        raise AssertionError("singleton set should be rejected")
    except ds.AnalysisError:
        pass

    print("python smoke tests passed")


if __name__ == "__main__":
    main()
