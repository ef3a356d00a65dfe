"""Smoke test for the pyrevc extension: routes on a synthetic graph agree with the oracle."""

import random
import sys

import pyrevc


def main() -> int:
    g = pyrevc.Graph.random_road(200, seed=4).perturbed(1e-6, seed=4)
    print(g)
    rng = random.Random(4)
    labels = g.labels
    origins = rng.sample(labels, 3)
    destinations = rng.sample(labels, 3)
    pairs = [(s, t) for s in origins for t in destinations if s != t]

    params = pyrevc.Params(alpha=0.2, beta=1.5, gamma=0.9, delta=1.1)
    index = pyrevc.ReachIndex.build(g)
    result = pyrevc.routes(g, pairs, params, index=index, compare=True)
    print(f"{len(result.routes)} routes for {len(pairs)} pairs, report: routes={result.report['routes']}")

    for r in result.routes:
        cost = g.path_cost(r.vertices)
        assert cost is not None and abs(cost - r.cost) <= 1e-9 * cost, r
        assert g.local_optimality_factor(r.vertices) >= params.alpha * params.gamma - 1e-9, r
    assert result.comparison["sandwich_holds"], result.comparison

    s, t = pairs[0]
    exact = pyrevc.oracle_routes(g, s, t, params.alpha, params.beta)
    assert all(r.exact_factor >= params.alpha for r in exact)
    print(f"oracle: {len(exact)} admissible routes for {s} -> {t}")

    try:
        pyrevc.Params(alpha=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid alpha accepted")
    print("smoke test OK")
    return 0


if __name__ == "__main__":
    sys.exit(main())
