import math
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from herglotz import (
    DomainError,
    ExprSyntaxError,
    Jet,
    MissingDerivative,
    T,
    UnknownIdentifier,
    Z,
    evaluate,
    max_jet_order,
    parse,
    partial,
    simplify,
    total_derivative,
    unparse,
    xd,
)
from herglotz.expr import Add, Call, Const, Mul, Neg, Pow, Sub, Var, compile_expr, variables

from helpers import (
    RULE_CASES,
    central_fd,
    jet_with,
    lagrangian_along_traj,
    random_expr,
    random_jet,
    rel_err,
    traj_jet,
)

D2x = Var(xd(2))
z = Var(Z)


# --- parsing -----------------------------------------------------------------

def test_parse_example1_lagrangian():
    assert parse("D2x^2 + z^2") == Add(Pow(D2x, Const(2.0)), Pow(z, Const(2.0)))


def test_parse_atom_x():
    assert parse("x") == Var(xd(0))
    assert xd(0).name == "x"


def test_parse_example3_lagrangian():
    assert parse("D2x^2 + z") == Add(Pow(D2x, Const(2.0)), z)


def test_precedence_and_associativity():
    assert parse("2^3^2") == Pow(Const(2.0), Pow(Const(3.0), Const(2.0)))
    assert parse("-t^2") == Neg(Pow(Var(T), Const(2.0)))
    assert parse("t - z - x") == Sub(Sub(Var(T), z), Var(xd(0)))
    assert parse("t / z * x") == Mul(parse("t / z"), Var(xd(0)))
    assert parse("2^-t") == Pow(Const(2.0), Neg(Var(T)))


def test_parse_numbers_and_calls():
    assert parse("1.5e-3") == Const(1.5e-3)
    assert parse(".5") == Const(0.5)
    assert parse("exp(1)") == Call("exp", Const(1.0))
    assert evaluate(parse("exp(1)"), Jet(0, (0,), 0)) == math.e


@pytest.mark.parametrize("text, offset", [("D2x^", 4), ("(t + z", 6), ("t + * z", 4), ("", 0), ("t z", 2), ("3 $", 2)])
def test_syntax_errors_report_offset(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset
    assert info.value.expected


def test_syntax_error_offset_is_in_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("sin(é)")
    assert info.value.offset == 4


@pytest.mark.parametrize("name", ["y", "D0x", "D10x", "pi", "e", "tan"])
def test_unknown_identifiers(name):
    with pytest.raises(UnknownIdentifier):
        parse(f"{name} + 1" if name != "tan" else "tan(t)")


# --- printing ----------------------------------------------------------------

def test_print_examples():
    assert unparse(Add(Pow(D2x, Const(2.0)), Pow(z, Const(2.0)))) == "D2x^2 + z^2"
    assert unparse(Neg(Var(T))) == "-t"
    assert unparse(Mul(Const(2.0), z)) == "2 * z"


def test_print_minimal_parentheses():
    for text in ["(t + z) * x", "t - (z - x)", "t / (z * x)", "(-t)^2", "-t^2", "(t^2)^3",
                 "t^2^3", "2 * -t", "t - -z", "sin(t + z)^2", "-(t + z)"]:
        assert unparse(parse(text)) == text


# Grammar-generated strings: random spacing and redundant parentheses.
_atoms = st.sampled_from(["t", "z", "x", "D1x", "D2x", "D9x", "2", "0.5", "3.25e-1", "10"])


def _combine(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*", "/", "^"]), children).map(
        lambda p: f"{p[0]}{p[1]}{p[2]}"
    )
    spaced = st.tuples(children, st.sampled_from([" + ", " - ", " * "]), children).map("".join)
    return st.one_of(
        binary,
        spaced,
        children.map(lambda s: f"({s})"),
        children.map(lambda s: f"-{s}"),
        st.tuples(st.sampled_from(["exp", "log", "sin", "cos", "sqrt"]), children).map(
            lambda p: f"{p[0]}( {p[1]} )"
        ),
    )


grammar_strings = st.recursive(_atoms, _combine, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(grammar_strings)
def test_round_trip(text):
    tree = parse(text)
    printed = unparse(tree)
    assert parse(printed) == tree
    assert unparse(parse(printed)) == printed


# --- evaluation --------------------------------------------------------------

def test_eval_examples():
    L = parse("D2x^2 + z^2")
    assert evaluate(L, Jet(0.0, (0.0, 1.0, 0.0), 0.5)) == 0.25
    assert evaluate(z, Jet(0.3, (1.0,), 0.77)) == 0.77
    assert evaluate(L, Jet(0.5, (0.5, 1.0, 0.0), 1 / 1.5)) == pytest.approx(4 / 9, rel=1e-15)


def test_eval_errors():
    p = Jet(0.0, (0.0, 1.0), 0.0)
    with pytest.raises(DomainError):
        evaluate(parse("log(t)"), p)
    with pytest.raises(DomainError):
        evaluate(parse("1 / z"), p)
    with pytest.raises(DomainError):
        evaluate(parse("sqrt(t - 1)"), p)
    with pytest.raises(DomainError):
        evaluate(parse("(t - 1)^0.5"), p)
    with pytest.raises(MissingDerivative):
        evaluate(parse("D2x"), p)


def test_compiled_matches_interpreter_bitwise():
    rng = np.random.default_rng(7)
    names = ["t", "z", "x", "D1x", "D2x"]
    for _ in range(50):
        e = random_expr(rng, names, 4)
        p = random_jet(rng, 2)
        assert compile_expr(e)(p.t, list(p.x_derivs), p.z) == evaluate(e, p)


def test_compiled_raises_domain_errors():
    f = compile_expr(parse("log(z)"))
    with pytest.raises(DomainError):
        f(0.0, [0.0], -1.0)


# --- differentiation ---------------------------------------------------------

def test_partial_examples():
    L1 = parse("D2x^2 + z^2")
    assert unparse(partial(L1, Z)) == "2 * z"
    assert partial(L1, xd(1)) == Const(0.0)
    assert unparse(partial(parse("D2x^2 + z"), xd(2))) == "2 * D2x"


def test_partial_example_against_fd_at_10_jets():
    e = parse("D2x^2 + z")
    d = partial(e, xd(2))
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = random_jet(rng, 2)
        fd = central_fd(lambda v: evaluate(e, jet_with(p, xd(2), v)), p.x_derivs[2])
        assert rel_err(evaluate(d, p), fd) <= 1e-6


@pytest.mark.parametrize("text", RULE_CASES)
def test_partial_rule_oracle(text):
    e = parse(text)
    rng = np.random.default_rng(zlib.crc32(text.encode()))
    vars_ = [T, Z, xd(0), xd(1), xd(2)]
    for _ in range(100):
        p = random_jet(rng, 2)
        for v in vars_:
            sym = evaluate(partial(e, v), p)
            fd = central_fd(lambda s: evaluate(e, jet_with(p, v, s)), p.value(v))
            assert rel_err(sym, fd) <= 1e-6, (text, v, p)


def test_partial_random_expression_oracle():
    rng = np.random.default_rng(11)
    names = ["t", "z", "x", "D1x", "D2x"]
    vars_ = [T, Z, xd(0), xd(1), xd(2)]
    for _ in range(100):
        e = random_expr(rng, names, 4)
        p = random_jet(rng, 2)
        v = vars_[rng.integers(len(vars_))]
        sym = evaluate(partial(e, v), p)
        fd = central_fd(lambda s: evaluate(e, jet_with(p, v, s)), p.value(v))
        assert rel_err(sym, fd) <= 1e-6, (unparse(e), v)


def test_total_derivative_examples():
    L = parse("D2x^2 + z^2")
    assert total_derivative(z, L, 2) == L
    assert total_derivative(D2x, L, 2) == Var(xd(3))
    d = total_derivative(parse("2 * D2x"), L, 2)
    assert unparse(d) == "2 * D3x"
    # along x = t^3, z = 0 at t = 1
    assert evaluate(d, Jet(1.0, (1.0, 3.0, 6.0, 6.0), 0.0)) == 12.0


def test_total_derivative_raises_order_by_one():
    L = parse("D1x^2 + z")
    e = parse("D3x * z + sin(D2x)")
    assert max_jet_order(total_derivative(e, L, 1)) == 4


def test_total_derivative_chain_rule_oracle():
    rng = np.random.default_rng(3)
    names = ["t", "z", "x", "D1x", "D2x"]
    h = 1e-5
    for case in range(20):
        E = random_expr(rng, names, 3)
        L = lagrangian_along_traj(E, 2)
        e = random_expr(rng, names, 3)
        td = total_derivative(e, L, 2)
        for t in rng.uniform(-1, 1, 5):
            sym = evaluate(td, traj_jet(t, 3))
            fd = (evaluate(e, traj_jet(t + h, 2)) - evaluate(e, traj_jet(t - h, 2))) / (2 * h)
            assert rel_err(sym, fd) <= 1e-6, (case, unparse(e), unparse(E))


def test_test_lagrangian_matches_zdot_on_trajectory():
    rng = np.random.default_rng(5)
    E = random_expr(rng, ["t", "z", "x", "D1x", "D2x"], 3)
    L = lagrangian_along_traj(E, 2)
    for t in (-0.5, 0.1, 0.9):
        assert evaluate(L, traj_jet(t, 2)) == pytest.approx(0.3 * math.exp(0.3 * t) - 0.5 * math.sin(t), abs=1e-12)


# --- simplify ----------------------------------------------------------------

def test_simplify_examples():
    assert simplify(parse("0 * D3x")) == Const(0.0)
    assert simplify(parse("1 * (z + 0)")) == z
    assert simplify(parse("2 + 3")) == Const(5.0)
    assert simplify(parse("z^1")) == z
    assert simplify(parse("z^0")) == Const(1.0)
    assert simplify(parse("-(-z)")) == z


def test_simplify_keeps_domain_errors():
    assert simplify(parse("1 / 0")) == parse("1 / 0")
    assert simplify(parse("log(0 * t)")) == Call("log", Const(0.0))


def test_simplify_preserves_value_and_is_idempotent():
    rng = np.random.default_rng(9)
    names = ["t", "z", "x", "D1x", "D2x", "0", "1"]
    for _ in range(100):
        e = random_expr(rng, names, 4)
        s = simplify(e)
        assert simplify(s) == s
        p = random_jet(rng, 2)
        a, b = evaluate(e, p), evaluate(s, p)
        assert abs(a - b) <= 4 * math.ulp(max(abs(a), abs(b))), unparse(e)


# --- misc --------------------------------------------------------------------

def test_max_jet_order_examples():
    assert max_jet_order(parse("D2x^2 + z^2")) == 2
    assert max_jet_order(z) == 0
    assert max_jet_order(parse("D4x - 4 * z * D3x")) == 4


def test_variables():
    assert variables(parse("t + D3x * z")) == {T, Z, xd(3)}


def test_operator_overloads_build_trees():
    assert z * 2 + 1 == Add(Mul(z, Const(2.0)), Const(1.0))
    assert str(-z) == "-z"
