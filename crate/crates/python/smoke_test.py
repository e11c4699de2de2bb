"""Smoke test for the installed odeconf package."""

import odeconf


def main():
    r = odeconf.ode3_classify("q^(3/2)", boxes=["q:0.1:10"])
    assert r["classification"] == "einstein-weyl", r["classification"]

    r = odeconf.ode3_classify(
        "sqrt(a*(2*q*y - p^2))^3/y^2", params={"a": "1"}, boxes=["y:0.5:2", "q:0.5:2", "p:-0.5:0.5"]
    )
    assert r["classification"] == "einstein-weyl"

    inv = odeconf.ode3_invariants("q^2")
    assert inv["A"]["verdict"]["verdict"] == "nonzero"

    assert odeconf.monge_classify("q^2+y", 2)["classification"] == "g2"
    assert odeconf.monge_classify("p^2", 1)["classification"] == "branch-cc1"

    r = odeconf.ode2_flatness("p^4")
    assert (r["w1"], r["w2"]) == ("24*p^8", "24")

    d = odeconf.dkp("sqrt(2*x)", boxes=["x:0.2:2"])
    assert d["scalar_verdict"]["verdict"] == "identically-zero"

    lie = odeconf.lie_verify("ccg2")
    assert lie["jacobi"]["holds"] and lie["matrices"]["closure"]["closed"]

    assert odeconf.zero_test("exp(x)*exp(-x) - 1")["verdict"] == "identically-zero"

    for bad in [lambda: odeconf.ode3_classify("q^("), lambda: odeconf.zero_test("x", boxes=["x:2:1"]), lambda: odeconf.lie_verify("nope")]:
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    s = odeconf.verify_paper()
    assert s["passed"] == s["total"], [c["id"] for c in s["claims"] if not c["pass"]]
    print(f"smoke test ok: {s['passed']}/{s['total']} claims")


if __name__ == "__main__":
    main()
