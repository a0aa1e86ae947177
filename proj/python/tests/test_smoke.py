from fractions import Fraction

import pytest

import couplecheck as cc

CORPUS = cc.default_corpus().parent


def test_run_flip():
    p = cc.load_program("program p\nvar x : bool = false;\nbegin\nx <$ flip(1/3);\nend\n")
    out = cc.run(p, fuel=4)
    masses = {o["state"]["x"]: o["mass"] for o in out["outcomes"]}
    assert masses == {"true": Fraction(1, 3), "false": Fraction(2, 3)}
    assert out["residual"] == 0


def test_program_metadata():
    p = cc.load_program_file(str(CORPUS / "uniformizer.pw"), {"p": "1/2"})
    assert p.name == "uniformizer"
    assert [v for v, _ in p.variables] == ["x", "y"]
    assert "x#2" in p.self_compose(2).source()


def test_uniformizer_residual_and_report():
    r = cc.check_property(CORPUS / "uniformizer.pw", "x", fuel=60, bindings={"p": "1/3"})
    assert r["ok"]
    assert r["slack"] == Fraction(5, 9) ** 60
    assert cc.format_report(r).splitlines()[1].startswith("UNIFORM x: CERTIFIED")


def test_proof_route():
    r = cc.check_property(CORPUS / "rejection.pw", "x", event="x % 2 = 0", route="proof",
                          proof=CORPUS / "rejection.prf", fuel=40)
    assert r["ok"]
    assert r["checked"] == 9


def test_dependence_and_precondition():
    biased = {"px": "1/3", "pz": "1/3"}
    r = cc.check_property(CORPUS / "condindep.pw", ["w", "w'"], kind="indep", bindings=biased)
    assert r["status"] == "FAILED"
    assert r["max_deviation"] == Fraction(1, 36)
    given = cc.check_property(CORPUS / "condindep.pw", ["w", "w'"], kind="cond-indep", event="y", bindings=biased)
    assert given["ok"]
    with pytest.raises(cc.PreconditionError):
        cc.check_property(CORPUS / "condindep.pw", ["w", "w'"], kind="cond-indep", event="y && !y")


def test_prove_with_conclusion():
    out = cc.prove(CORPUS / "ballot.pw", CORPUS / "ballot.prf", fuel=8, conclude=True, bindings={"nA": 2, "nB": 1})
    assert out["accepted"]
    concl = [i["conclusion"] for i in out["instances"]]
    assert all(c["certified"] and c["lhs"] == c["rhs"] for c in concl)


def test_lossless():
    assert cc.lossless(CORPUS / "uniformizer.pw", fuel=60)["kind"] == "within"
    assert cc.lossless(CORPUS / "ballot.pw", fuel=8)["kind"] == "exact"


def test_corpus():
    s = cc.run_corpus("uniformizer")
    assert s["max_slack"] == Fraction(5, 9) ** 60
    with pytest.raises(cc.UsageError):
        cc.run_corpus("nonexistent")


def test_errors():
    with pytest.raises(cc.ProgramSyntaxError):
        cc.load_program("program p\nbegin\nx := ;\nend\n")
    with pytest.raises(TypeError):
        cc.load_program("program p\nvar x : bool = false;\nbegin\nx := 1;\nend\n")
