import json
import math

import strusr


def test_registry_lists_eight_problems():
    names = strusr.problems()
    assert names == ["Advection", "Diffusion", "Poisson2D", "Poisson3D",
                     "Heat2D", "Heat3D", "Wave2D", "Wave3D"]
    reg = json.loads(strusr.registry_json())
    verified = {p["name"]: p["truth_verified"] for p in reg}
    assert verified["Advection"] and verified["Poisson3D"]


def test_parse_and_jets():
    e = strusr.parse("sin(x0)")
    c = strusr.taylor_coeffs(e, [0.0], 0, 3)
    assert c[0] == 0.0 and c[1] == 1.0 and c[2] == 0.0
    assert abs(c[3] + 1.0 / 6.0) < 1e-15
    assert strusr.complexity(strusr.parse("2.5 * x0^4")) == 4


def test_truth_has_zero_losses():
    truth = strusr.parse_for("sin(x0 - t)", "Advection")
    prior = strusr.analytic_prior("Advection", anchors=8, order=5, seed=1)
    pts = strusr.sample_collocation("Advection", 256, 0)
    assert strusr.phys_loss(truth, "Advection", pts) < 1e-28
    assert strusr.taylor_loss(truth, prior) < 1e-18
    assert strusr.mae(truth, "Advection") == 0.0


def test_constant_is_penalised_by_structure_term():
    one = strusr.parse_for("1", "Advection")
    prior = strusr.analytic_prior("Advection")
    assert strusr.fitness(one, "Advection", None, 1.0) == 0.0
    assert strusr.fitness(one, "Advection", prior, 1.0) > 0.0


def test_sensitivities_form_a_distribution():
    e = strusr.parse_for("sin(x0 - t) + 0.1 * cos(t)", "Advection")
    prior = strusr.analytic_prior("Advection")
    rows = strusr.sensitivities(e, "Advection", prior)
    assert len(rows) == e.size()
    total = sum(r["probability"] for r in rows)
    assert abs(total - 1.0) < 1e-12
    assert min(r["probability"] for r in rows) > 0.0


def test_short_evolution_is_deterministic():
    prior = strusr.analytic_prior("Advection", seed=3)
    cfg = json.dumps({"population": 60, "max_generations": 5, "seed": 3})
    a = strusr.evolve("Advection", prior, cfg)
    b = strusr.evolve("Advection", prior, cfg)
    assert a["log"] == b["log"]
    assert str(a["best"]) == str(b["best"])
    assert math.isfinite(a["fitness"])


def test_structure_match():
    ok, dev = strusr.structure_match(strusr.parse("2.5*x0^4 - 1.3*x1^3 + 0.5*x2^2"),
                                     strusr.parse("0.5*x2^2 + 2.5*x0^4 - 1.3*x1^3"))
    assert ok and dev < 1e-12
