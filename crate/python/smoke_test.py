"""Smoke test for the ruinpool Python module.

Build and install first, e.g. `pip install -e crates/python --no-build-isolation`.
"""

import json
import math
from pathlib import Path

import ruinpool

CONFIGS = Path(__file__).resolve().parent.parent / "crates" / "cli" / "configs"


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    hand = ruinpool.Model(
        json.dumps(
            {
                "m": 1,
                "lambda_circ": [1.0],
                "beta": 1.0,
                "claims": [{"exp": {"mu": 1.0}}],
                "regimes": [{"drift": {"r": 0.0}}, {"drift": {"r": 1.0}}],
            }
        )
    )
    close(hand.pi(1.0), 5 / 6, 1e-12)
    close(hand.pi_overshoot(1.0), 5 / 6, 1e-12)
    v, d1, d2 = hand.pi_jet()
    close(v, 1.0, 1e-15)
    close(-d1, 1 / 3, 1e-12)
    close(d2, 2 / 3, 1e-12)
    close(hand.zeta(1, 0, 1.0), 1 / 6, 1e-12)
    assert hand.m_distribution() == [0.5, 0.5]

    # P(Ybar > u) = e^{-u} / 3 for this model
    for u, p in zip([0.5, 2.0], hand.ruin_curve([0.5, 2.0])):
        close(p, math.exp(-u) / 3, 1e-5)

    close(ruinpool.stehfest_invert(lambda s: 1 / (s + 1), 1.0), math.exp(-1), 1e-6)

    fig4 = ruinpool.Model.load(str(CONFIGS / "fig4.json"))
    exact = fig4.phase_type_tail([10.0])[0]
    close(fig4.ruin_curve([10.0])[0], exact, 1e-4)
    st = fig4.spectral_tail()
    assert st["mult"] == 10

    fig5 = ruinpool.Model.load(str(CONFIGS / "fig5.json"))
    ratio = fig5.ruin_curve([100.0])[0] / fig5.rv_tail_approx(100.0)
    assert 0.8 <= ratio <= 1.2, ratio

    s = hand.simulate(20_000, seed=7, u=[0.0], alpha=[1.0])
    est = s["lst"][0]
    assert abs(est["value"] - 5 / 6) <= 4 * est["stderr"], est
    assert s == hand.simulate(20_000, seed=7, u=[0.0], alpha=[1.0], threads=1)

    curves = ruinpool.Model.load(str(CONFIGS / "fig2.json")).moment_curves([1.0, 5.0])
    assert curves["mean"][0] < curves["mean"][1]

    try:
        ruinpool.Model('{"m": 1, "lambda_circ": [-1.0], "claims": [], "regimes": []}')
    except ruinpool.RuinError as e:
        assert "lambda_circ" in str(e)
    else:
        raise AssertionError("invalid config accepted")

    print("ruinpool smoke test passed")


if __name__ == "__main__":
    main()
