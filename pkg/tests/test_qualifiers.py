import random
import re
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from triggerforge.dsl.parser import parse
from triggerforge.qualifiers.checker import check_program
from triggerforge.qualifiers.syntax import parse_program
from triggerforge.qualifiers.types import (ArityError, FunctionSignature, Level, QualifiedType,
                                           QualifierSyntaxError, assignable, call_consistent, parse_qualified_type,
                                           partition_of)

CORPUS = Path(__file__).resolve().parents[1] / "src" / "triggerforge" / "corpus"

T = parse_qualified_type


def sig(*types):
    return FunctionSignature("f", tuple(T(t) for t in types))


# -- types -----------------------------------------------------------------

def test_qualifier_binds_to_the_pointee():
    t = T("unique<1> int* p")
    assert t.depth == 1
    assert t.levels[0] == Level() and t.levels[1] == Level(unique=1)


def test_immutable_pointee():
    assert T("immutable int* q").levels[1].immutable


def test_plain_int():
    assert T("int x") == QualifiedType("int")


def test_inner_pointer_numbered():
    t = T("int* unique<1>* zs")
    assert t.uniqueness() == (None, 1, None)


def test_zero_is_not_absence():
    assert T("unique<0> int*").levels[1].unique == 0
    assert T("int*").levels[1].unique is None


@pytest.mark.parametrize("bad", ["unique<-1> int*", "unique<x> int*", "unique int*", "int* p q"])
def test_malformed_types(bad):
    with pytest.raises(QualifierSyntaxError):
        T(bad)


def test_printing_round_trips():
    for text in ["unique<1> int*", "int* unique<1>*", "immutable unique<2> int*", "int**"]:
        assert T(str(T(text))) == T(text)


# -- assignment --------------------------------------------------------------

def test_different_numbers_refuse_assignment():
    v = assignable(T("unique<1> int*"), T("unique<2> int*"))
    assert v.refuted and v.detail == "E_UNIQUE_MISMATCH"


def test_inner_level_without_number():
    # *zs has type int* with number 1 on the pointer cell, none on the ints
    zs_content = T("int* unique<1>* zs").pointee()
    assert assignable(T("unique<1> int*"), zs_content).refuted


def test_immutable_coercion_is_one_way():
    fwd = assignable(T("immutable int*"), T("int*"))
    assert fwd.proven and fwd.detail == "N_COERCE"
    assert assignable(T("int*"), T("immutable int*")).refuted


def test_the_copied_value_level_is_not_compared():
    # storing an int into an int never involves aliasing
    assert assignable(T("int"), T("int")).proven
    assert assignable(T("unique<3> int*"), T("unique<3> int*")).proven


def test_erased_types_must_match():
    assert assignable(T("int*"), T("int**")).detail == "E_TYPE_MISMATCH"


_types = st.builds(
    lambda depth, nums, imms: QualifiedType("int", tuple(Level(n, i) for n, i in zip(nums, imms))[: depth + 1]
                                            or (Level(),)),
    st.integers(0, 2), st.lists(st.one_of(st.none(), st.integers(0, 3)), min_size=3, max_size=3),
    st.lists(st.booleans(), min_size=3, max_size=3))


@settings(max_examples=200, deadline=None)
@given(_types)
def test_assignable_is_reflexive(t):
    assert assignable(t, t).proven


@settings(max_examples=200, deadline=None)
@given(_types, _types)
def test_immutability_never_flows_backwards(a, b):
    if assignable(a, b).proven and assignable(b, a).proven:
        assert a.immutability()[1:] == b.immutability()[1:]


# -- calls -------------------------------------------------------------------

def test_partitions():
    assert partition_of(sig("unique<0> int* x", "unique<0> int* y")).sorted_groups() == [[0, 1]]
    assert partition_of(sig("unique<0> int* x", "unique<1> int* y")).sorted_groups() == [[0], [1]]


def test_matching_call():
    f = sig("unique<0> int* x", "unique<0> int* y")
    assert call_consistent(f, [T("unique<1> int*"), T("unique<1> int*")]).proven


def test_mixed_call():
    f = sig("unique<0> int* x", "unique<0> int* y")
    v = call_consistent(f, [T("unique<0> int*"), T("unique<1> int*")])
    assert v.refuted and v.detail == "E_CALL_PARTITION"
    assert v.witness == {"declared": [[0, 1]], "call": [[0], [1]]}


def test_singleton_parameter_accepts_any_number():
    assert call_consistent(sig("int* xs"), [T("unique<1> int*")]).proven


def test_arity():
    with pytest.raises(ArityError):
        call_consistent(sig("int* a"), [])


def _random_sig(rng):
    n = rng.randint(1, 4)
    return [f"unique<{rng.randint(0, 2)}> int*" if rng.random() < 0.8 else "int*" for _ in range(n)]


def test_call_verdict_survives_renumbering():
    rng = random.Random(11)
    for _ in range(100):
        decl = sig(*_random_sig(rng))
        args = [T(t) for t in _random_sig(rng)][: len(decl.params)]
        while len(args) < len(decl.params):
            args.append(T("unique<0> int*"))
        before = call_consistent(decl, args)
        targets = rng.sample(range(5, 60), 3)
        mapping = dict(zip(range(3), targets))
        after = call_consistent(decl, [a.renumbered(mapping) for a in args])
        assert before.status == after.status


def test_partition_follows_parameter_reordering():
    rng = random.Random(5)
    for _ in range(100):
        types = [T(t) for t in _random_sig(rng)]
        perm = list(range(len(types)))
        rng.shuffle(perm)
        p = partition_of(FunctionSignature("f", tuple(types)))
        q = partition_of(FunctionSignature("f", tuple(types[i] for i in perm)))
        # group j of q holds new positions; map them back through the permutation
        back = sorted(sorted(perm[j] for j in g) for g in q.groups)
        assert back == p.sorted_groups()


# -- programs ----------------------------------------------------------------

EXPECTED = {
    "qual_xs_assign": ["E_UNIQUE_MISMATCH"],
    "qual_zs_inner": ["E_UNIQUE_MISMATCH"],
    "qual_coerce_ok": [],
    "qual_coerce_reverse": ["E_IMMUTABLE_DROP"],
    "qual_coerce_later_write": ["E_IMMUTABLE_WRITE"],
    "qual_call_match": [],
    "qual_call_mixed": ["E_CALL_PARTITION"],
    "qual_call_split": ["E_CALL_PARTITION"],
    "qual_sort_any": [],
    "qual_address_of": [],
    "qual_address_clash": ["E_UNIQUE_MISMATCH"],
    "qual_struct_fields": ["E_UNIQUE_MISMATCH"],
    "qual_struct_same": [],
}


def program_text(name):
    return (CORPUS / f"{name}.tfq").read_text()


def diagnostics(text):
    sf = parse(text)
    return [d for sec in sf.typecheck_sections for d in check_program(sec.program)]


def test_corpus_is_large_enough():
    assert len(EXPECTED) >= 10
    assert sorted(p.stem for p in CORPUS.glob("qual_*.tfq")) == sorted(EXPECTED)


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_corpus_classification(name):
    assert [d.code for d in diagnostics(program_text(name))] == EXPECTED[name]


def test_diagnostics_point_at_the_statement():
    (d,) = diagnostics(program_text("qual_call_split"))
    assert (d.span.line, d.span.col) == (7, 3)
    assert d.to_json()["code"] == "E_CALL_PARTITION"


def _renumber(text, mapping):
    return re.sub(r"unique<(\d+)>", lambda m: f"unique<{mapping[int(m.group(1))]}>", text)


def test_programs_survive_renumbering():
    rng = random.Random(2024)
    texts = {name: program_text(name) for name in EXPECTED}
    for trial in range(100):
        name = sorted(EXPECTED)[trial % len(EXPECTED)]
        nums = sorted({int(n) for n in re.findall(r"unique<(\d+)>", texts[name])})
        mapping = dict(zip(nums, rng.sample(range(0, 500), len(nums))))
        assert [d.code for d in diagnostics(_renumber(texts[name], mapping))] == EXPECTED[name], (name, mapping)


def test_address_of_promotes_once():
    # the promoted local adopts the number the target expects, then keeps it
    assert check_program(parse_program("int a;\nunique<5> int* p = &a;\n")) == []
    two = parse_program("int a;\nint b;\nunique<5> int* p = &a;\nunique<6> int* q = &b;\n")
    assert check_program(two) == []
    clash = parse_program("int a;\nunique<5> int* p = &a;\nunique<6> int* q = &a;\n")
    assert [d.code for d in check_program(clash)] == ["E_UNIQUE_MISMATCH"]


def test_address_of_without_expectation_is_fresh():
    # h asks for no number, so a gets one unused by the program and later clashes with 5
    prog = parse_program("int a;\nvoid h(int* x);\nh(&a);\nunique<5> int* p = &a;\n")
    (d,) = check_program(prog)
    assert d.code == "E_UNIQUE_MISMATCH" and "unique<6>" in d.message


def test_checker_is_deterministic():
    text = program_text("qual_struct_fields")
    assert [d.to_json() for d in diagnostics(text)] == [d.to_json() for d in diagnostics(text)]
