from pathlib import Path

import pytest

from triggerforge.conditions import ConditionChecker
from triggerforge.core import expr as E
from triggerforge.core.evaluate import Binding, evaluate
from triggerforge.dsl.parser import parse, parse_expr
from triggerforge.dsl.printer import print_formula
from triggerforge.pattern import extract_domain, find_sites, order_variables
from triggerforge.rewriter import (MUTATIONS, WrapError, build_base, build_domain_Y, build_f_inv,
                                   build_offset, fresh_name, rewrite_quantifier, wrap_access)

CORPUS = Path(__file__).resolve().parents[1] / "src" / "triggerforge" / "corpus"

MATRICES = ("array int A;\nforall int x1, int x2, int x3; 0<=x1 && x1<4 && 0<=x2 && x2<3 && 0<=x3 && x3<2"
        " && 4*x2+x1<10; A[10*x3+4*x2+x1] >= 0;")


def parts(src):
    sf = parse(src)
    q = sf.quantifiers[0]
    site = find_sites(q.body, q.variables)[0]
    d = extract_domain(q.domain, site.pattern.variables, require_last=False)
    p, d, rep = order_variables(site.pattern, d, ConditionChecker(sf.symbols.facts()))
    return sf, q, p, d, rep


def outcome(src, **kw):
    sf = parse(src)
    return sf, rewrite_quantifier(sf.quantifiers[0], sf.symbols, **kw)


def corpus_outcome(name, **kw):
    return outcome((CORPUS / f"{name}.tfq").read_text(), **kw)


# -- building blocks -----------------------------------------------------------

def test_offsets():
    assert E.to_text(build_offset(*parts(MATRICES)[2:4])) == "0"
    assert E.to_text(build_offset(*parts((CORPUS / "stride.tfq").read_text())[2:4])) == "17"
    swap = parts((CORPUS / "swap.tfq").read_text())
    assert E.to_text(build_offset(swap[2], swap[3])) == "gtid"


def test_bases_and_inverse_at_thirteen():
    _, _, p, d, rep = parts(MATRICES)
    x = E.var("x")
    bases = [evaluate(build_base(p, d, i, x), Binding(), {"x": 13}) for i in (1, 2, 3)]
    assert bases == [3, 3, 13]
    finv = build_f_inv(p, d, x, rep.sign)
    assert tuple(evaluate(c, Binding(), {"x": 13}) for c in finv) == (3, 0, 1)


def test_base_index_is_checked():
    _, _, p, d, _ = parts(MATRICES)
    with pytest.raises(IndexError):
        build_base(p, d, 0, E.var("x"))


def test_matrices_domain_points():
    _, _, p, d, rep = parts(MATRICES)
    Y = build_domain_Y(p, d, E.var("x"), rep.sign)
    hits = [x for x in range(-5, 30) if evaluate(Y, Binding(), {"x": x})]
    assert evaluate(Y, Binding(), {"x": 9}) and not evaluate(Y, Binding(), {"x": 20})
    assert hits == list(range(20))


def test_unsimplified_domain_shape():
    _, _, p, d, rep = parts(MATRICES)
    Y = build_domain_Y(p, d, E.var("x"), rep.sign)
    cs = [E.to_text(c) for c in E.conjuncts(Y)]
    # residual over the inverse, two folded bounds, divisibility, two range sides
    assert len(cs) == 6
    assert cs[0].startswith("4 * (") and cs[0].endswith("< 10")
    assert cs[-2:] == ["0 <= x", "x < 20"]


def test_matrix_bases_text():
    _, _, p, d, _ = parts(MATRICES)
    assert [E.to_text(build_base(p, d, i, E.var("x"))) for i in (1, 2, 3)] == \
        ["abs(x) % 10 % 4", "abs(x) % 10", "abs(x)"]


def test_hand_derived_domain_agrees_pointwise():
    # the hand-simplified form drops abs (x >= 0 on the range) and the folded bounds
    _, _, p, d, rep = parts(MATRICES)
    ours = build_domain_Y(p, d, E.var("x"), rep.sign)
    hand = parse_expr("4 * (x % 10 / 4) + x % 10 % 4 < 10 && x % 10 % 4 % 1 == 0 && 0 <= x && x < 20", None, ("x",))
    for x in range(-40, 60):
        assert evaluate(ours, Binding(), {"x": x}) == evaluate(hand, Binding(), {"x": x})


def test_descending_bases():
    _, _, p, d, _ = parts("array int A;\nforall int a, int b; 0 <= a && a < 4 && 0 <= b && b < 3; A[-a + -4 * b] >= 0;")
    assert [E.to_text(build_base(p, d, i, E.var("x"))) for i in (1, 2)] == ["abs(x) % 4", "abs(x)"]


def test_negative_branch_of_the_range():
    _, _, p, d, rep = parts("array int A;\nforall int a; 0 <= a && a < 5; A[-a] >= 0;")
    assert rep.sign == -1
    Y = build_domain_Y(p, d, E.var("x"), rep.sign)
    assert E.to_text(Y) == "abs(x) % 1 == 0 && (-5 < x && x <= 0)"
    assert [x for x in range(-10, 10) if evaluate(Y, Binding(), {"x": x})] == [-4, -3, -2, -1, 0]


def test_fresh_names_skip_taken_and_keywords():
    assert fresh_name(["i"]) == "x"
    assert fresh_name(["x", "x0"]) == "x1"


# -- whole rewrites ------------------------------------------------------------

GOLDEN = {
    "swap": "forall int x; abs(x - gtid) % gsize == 0 && 0 <= x - gtid && x - gtid < gsize * (n / gsize); A[x] == 0;",
    "matrices": "forall int x; 0 <= x && x < 20; A[x] >= 0;",
    "matrices_reordered": "forall int x; 0 <= x && x < 20; A[x] >= 0;",
    "residue": "forall int x; x % n1 % 2 == 0 && 0 <= x && x < n1 * n2; A[x] >= 0;",
    "shared": "forall int x; 0 <= x && x < 12; A[x] == A[x / 4];",
    "stride": "forall int x; abs(x - 17) % 6 % 2 == 0 && 0 <= x - 17 && x - 17 < 30; A[x] >= 0;",
    "padding": "forall int x; x % 5 < 4 && 0 <= x && x < 15; A[x] >= 0;",
    "swap_old": ("forall int x; abs(x - gtid) % gsize == 0 && 0 <= x - gtid && x - gtid < gsize * (n / gsize);"
                 " A[x] == B[x];"),
}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_rewrites(name):
    _, out = corpus_outcome(name)
    assert out.status == "rewritten"
    assert print_formula(out.formula) == GOLDEN[name]


def test_descending_traversal():
    sf = parse((CORPUS / "negative.tfq").read_text())
    got = [print_formula(rewrite_quantifier(q, sf.symbols).formula) for q in sf.quantifiers]
    assert got == ["forall int x; -5 < x && x <= 0; A[x] >= 0;",
                   "forall int x; -12 < x && x <= 0; A[x] >= 0;"]


def test_fresh_variable_avoids_parameters():
    _, out = outcome("param int x where x > 0;\narray int A;\nforall int i, int j;"
                     " 0 <= i && i < 2 && 0 <= j && j < x; A[i + 2 * j] >= 0;")
    assert out.formula.variables == ("x0",)


def test_unrelated_variables_stay_bound():
    _, out = outcome("array int A;\narray int B;\nforall int i, int j, int t; 0 <= i && i < 2 && 0 <= j && j < 3"
                     " && 0 <= t && t < 5; A[i + 2 * j] == B[t];")
    assert out.status == "rewritten"
    assert out.formula.variables == ("t", "x")


def test_wrap_keeps_the_variable_and_adds_a_definition():
    _, out = corpus_outcome("swap", wrap="acc1d")
    (res,) = out.results
    assert res.wrapped and out.formula.variables == ("i",)
    assert "acc1d(i, gtid, n / gsize, gsize)" in print_formula(out.formula)
    assert [d.name for d in out.definitions] == ["acc1d"]


def test_wrap_refuses_several_variables():
    _, out = outcome(MATRICES, wrap="acc1d")
    assert out.status == "refused" and out.code == "E_WRAP_K"
    res = rewrite_quantifier(parse(MATRICES).quantifiers[0], parse(MATRICES).symbols).results[0]
    with pytest.raises(WrapError):
        wrap_access(res, parse(MATRICES).quantifiers[0], "acc2d")


def test_second_pass_reaches_a_fixed_point():
    src = ("array int A;\narray int B;\nforall int i, int j, int s, int t; 0 <= i && i < 2 && 0 <= j && j < 3"
           " && 0 <= s && s < 4 && 0 <= t && t < 2; A[i + 2 * j] == B[s + 4 * t];")
    _, out = outcome(src)
    assert len(out.passes) == 2
    assert len(out.formula.variables) == 2
    _, once = outcome(src, max_passes=1)
    assert len(once.passes) == 1 and len(once.formula.variables) == 3


def test_pure_quantifier_is_left_alone():
    _, out = outcome("array int A;\nforall int i; 0 <= i && i < 4; A[i] >= 0;")
    assert out.status == "pure" and out.formula == out.original


@pytest.mark.parametrize("name, code", [
    ("reject_zero", "E_ZERO_COEF"),
    ("reject_sign", "E_MIXED_SIGN"),
    ("reject_upper", "E_MISSING_UPPER_LAST"),
    ("reject_overlap", "E_OVERLAP"),
    ("reject_mod_index", "E_NOT_LINEAR"),
])
def test_refusals(name, code):
    _, out = corpus_outcome(name)
    assert out.status == "refused" and out.code == code


def test_no_site_is_a_refusal():
    _, out = outcome("param int n;\nforall int i; 0 <= i && i < 3; i < n;")
    assert out.code == "E_NO_SITE"


# each mutation visibly changes the rewrite of a case that exercises it
MUTATION_CASES = {
    "drop-divisibility": "stride", "flip-sign": "stride", "off+1": "stride", "off-1": "stride",
    "swap-divmod": "shared", "drop-residual": "residue", "drop-bound-folding": "padding",
}


@pytest.mark.parametrize("mutation", MUTATIONS)
def test_mutations_change_the_output(mutation):
    name = MUTATION_CASES[mutation]
    _, clean = corpus_outcome(name)
    _, bad = corpus_outcome(name, mutations=(mutation,))
    assert bad.status == "rewritten"
    assert print_formula(bad.formula) != print_formula(clean.formula)


def test_unknown_mutation():
    with pytest.raises(ValueError):
        outcome(MATRICES, mutations=("nope",))
