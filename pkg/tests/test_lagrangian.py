import math
import random

import pytest

from helpers import EXPRESSION_SUITE, central_diff
from tsvar import Lagrangian, differentiate, evaluate, to_text
from tsvar.errors import (
    EvaluationError,
    ExpressionSyntaxError,
    ParameterError,
    UnknownIdentifierError,
)
from tsvar.lagrangian import BinOp, Call, Neg, Num, Var, evaluate_array, parse


class TestParse:
    def test_power_node(self):
        e = parse("v^2")
        assert e == BinOp("^", Var("v"), Num(2.0))

    def test_sum_of_power_and_product(self):
        e = parse("v^2 + t*y")
        assert e == BinOp("+", BinOp("^", Var("v"), Num(2.0)),
                          BinOp("*", Var("t"), Var("y")))

    def test_unbalanced_paren_offset(self):
        with pytest.raises(ExpressionSyntaxError) as err:
            parse("sin(t*")
        assert err.value.offset == 6
        assert "expected" in str(err.value)

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as err:
            parse("v^2 + x")
        assert err.value.offset == 6

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifierError):
            parse("tan(t)")

    def test_trailing_input(self):
        with pytest.raises(ExpressionSyntaxError):
            parse("t )")

    def test_bad_character(self):
        with pytest.raises(ExpressionSyntaxError) as err:
            parse("t % 2")
        assert err.value.offset == 2

    def test_precedence(self):
        assert evaluate(parse("1 + 2*3^2"), 0, 0, 0) == 19.0

    def test_power_right_associative(self):
        assert evaluate(parse("2^3^2"), 0, 0, 0) == 512.0

    def test_left_associative_subtraction(self):
        assert evaluate(parse("8 - 3 - 2"), 0, 0, 0) == 3.0

    def test_unary_minus_binds_before_power(self):
        # the grammar reads -t^2 as (-t)^2
        assert evaluate(parse("-2^2"), 0, 0, 0) == 4.0

    def test_scientific_notation(self):
        assert evaluate(parse("1e-3 + 2.5E2"), 0, 0, 0) == pytest.approx(250.001)

    def test_variable_exponent_rewritten(self):
        # y^v evaluates as exp(v * log(y)) for positive y
        e = parse("y^v")
        assert evaluate(e, 0.0, 2.0, 3.0) == pytest.approx(8.0, rel=1e-12)

    def test_constant_folding(self):
        assert parse("2*3 + 1") == Num(7.0)
        assert parse("sin(0)") == Num(0.0)


class TestDifferentiate:
    def test_power_rule(self):
        d = differentiate(parse("v^2"), "v")
        assert d == BinOp("*", Num(2.0), Var("v"))

    def test_product_partial(self):
        d = differentiate(parse("t*y"), "y")
        assert evaluate(d, 3.0, 100.0, 0.0) == 3.0

    def test_chain_rule_sin(self):
        d = differentiate(parse("sin(t)*v"), "t")
        for t in (0.0, 0.7, 2.0):
            assert evaluate(d, t, 0.0, 4.0) == pytest.approx(math.cos(t) * 4.0, rel=1e-12)

    def test_quotient_rule(self):
        d = differentiate(parse("y/(1 + t^2)"), "t")
        fn = lambda t: 2.0 / (1 + t * t)
        for t in (0.2, 1.0, 1.5):
            assert evaluate(d, t, 2.0, 0.0) == pytest.approx(central_diff(fn, t), abs=1e-8)

    def test_variable_exponent_derivative(self):
        d = differentiate(parse("y^v"), "v")
        fn = lambda v: 2.0 ** v
        assert evaluate(d, 0.0, 2.0, 1.5) == pytest.approx(central_diff(fn, 1.5), abs=1e-8)

    def test_bad_variable(self):
        with pytest.raises(ParameterError):
            differentiate(parse("t"), "x")


class TestEvaluate:
    def test_square(self):
        assert evaluate(parse("v^2"), 0.0, 0.0, 3.0) == 9.0

    def test_product(self):
        assert evaluate(parse("t*y"), 2.0, 5.0, 0.0) == 10.0

    def test_log_negative_is_error(self):
        with pytest.raises(EvaluationError) as err:
            evaluate(parse("log(y)"), 0.0, -1.0, 0.0)
        assert err.value.y == -1.0

    def test_sqrt_negative_is_error(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("sqrt(v)"), 0.0, 0.0, -4.0)

    def test_division_by_zero_is_error(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("1/t"), 0.0, 0.0, 0.0)

    def test_array_evaluation_matches_scalar(self):
        import numpy as np

        e = parse("sin(t)*v + exp(y/3)")
        ts = np.linspace(-1, 1, 7)
        ys = np.linspace(-2, 2, 7)
        vs = np.linspace(0.5, 3, 7)
        arr = evaluate_array(e, ts, ys, vs)
        for i in range(7):
            assert arr[i] == pytest.approx(
                evaluate(e, float(ts[i]), float(ys[i]), float(vs[i])), rel=1e-14)

    def test_array_evaluation_is_silent_on_singularities(self):
        import numpy as np

        e = parse("log(y)")
        arr = evaluate_array(e, np.zeros(2), np.array([-1.0, 1.0]), np.zeros(2))
        assert math.isnan(arr[0]) and arr[1] == 0.0


def test_symbolic_partials_match_finite_differences():
    rng = random.Random(99)
    for text in EXPRESSION_SUITE:
        e = parse(text)
        partials = {var: differentiate(e, var) for var in ("t", "y", "v")}
        for _ in range(25):
            t = rng.uniform(-2, 2)
            y = rng.uniform(-2, 2)
            v = rng.uniform(-2, 2)
            for var, d in partials.items():
                step = 1e-5
                args = {"t": t, "y": y, "v": v}
                lo, hi = dict(args), dict(args)
                lo[var] -= step
                hi[var] += step
                fd = (evaluate(e, hi["t"], hi["y"], hi["v"])
                      - evaluate(e, lo["t"], lo["y"], lo["v"])) / (2 * step)
                sym = evaluate(d, t, y, v)
                assert abs(sym - fd) <= 1e-6 * (1 + abs(sym)), (text, var, t, y, v)


def random_expr(rng: random.Random, depth: int = 0):
    roll = rng.random()
    if depth >= 3 or roll < 0.3:
        if rng.random() < 0.5:
            return Num(round(rng.uniform(-3, 3), 3))
        return Var(rng.choice(("t", "y", "v")))
    if roll < 0.45:
        return Neg(random_expr(rng, depth + 1))
    if roll < 0.6:
        func = rng.choice(("sin", "cos", "exp"))
        return Call(func, random_expr(rng, depth + 1))
    op = rng.choice(("+", "-", "*", "/"))
    return BinOp(op, random_expr(rng, depth + 1), random_expr(rng, depth + 1))


def test_print_parse_round_trip():
    rng = random.Random(4242)
    done = 0
    while done < 120:
        e = random_expr(rng)
        back = parse(to_text(e))
        point = (rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2))
        try:
            expected = evaluate(e, *point)
        except EvaluationError:
            continue
        if not math.isfinite(expected):
            continue
        assert evaluate(back, *point) == pytest.approx(expected, rel=1e-12, abs=1e-12)
        done += 1


class TestLagrangian:
    def test_from_text_builds_partials(self):
        lag = Lagrangian.from_text("v^2 + t*y")
        assert lag.partial_v(0.0, 0.0, 3.0) == 6.0
        assert lag.partial_y(2.0, 0.0, 0.0) == 2.0
        assert lag.value(1.0, 2.0, 3.0) == 11.0

    def test_partials_are_exact_trees(self):
        lag = Lagrangian.from_text("v^2")
        assert to_text(lag.dL_dv) == "(2 * v)"
        assert lag.dL_dy == Num(0.0)
