import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import TABLE1_RANGES, TABLE1_VARIABLES, TABLE2, TABLE2_ORACLES, trees
from paretogp.errors import InputError, ParseError
from paretogp.expr import (
    Const,
    Node,
    Primitive,
    TreeConfig,
    Var,
    complexity,
    crossover,
    depth,
    depth_preserving_mutation,
    evaluate,
    evaluate_rows,
    format_tree,
    interval_eval,
    parse,
    plus,
    random_individual,
    random_tree,
    subtree_mutation,
    times,
    variables_used,
    walk,
)

P = Primitive
W, D = TABLE1_VARIABLES.index("windGust2"), TABLE1_VARIABLES.index("dewPoint")
TABLE1_MODEL = plus(Const(-25.2334), times(Const(3.21666), Var(W)))


def brute_complexity(tree):
    """Sum over nodes of subtree size, counting descendants by path prefix."""
    paths = [p for p, _ in walk(tree)]
    return sum(sum(1 for q in paths if q[:len(p)] == p) for p in paths)


# -- evaluate ---------------------------------------------------------------

def test_evaluate_table1_model():
    row = np.zeros(16)
    row[W] = 20
    assert evaluate(TABLE1_MODEL, row) == pytest.approx(39.0998, abs=1e-12)


def test_evaluate_leaf_identity():
    assert evaluate(Var(0), [7.5]) == 7.5


@pytest.mark.parametrize("tree, row", [
    (Node(P.INVERSE, (Var(0),)), [0.0]),
    (Node(P.DIVIDE, (Const(1), Var(0))), [0.0]),
    (Node(P.SQRT, (Var(0),)), [-1.0]),
])
def test_singularities_are_non_finite(tree, row):
    assert not math.isfinite(evaluate(tree, row))


def test_non_finite_propagates_through_inverse():
    # 1/(1/0) must not collapse back to a finite 0
    tree = Node(P.INVERSE, (Node(P.INVERSE, (Var(0),)),))
    assert math.isnan(evaluate(tree, [0.0]))


def test_variable_out_of_range():
    with pytest.raises(InputError):
        evaluate(Var(3), [1.0, 2.0])


@pytest.mark.parametrize("k", range(6))
def test_table2_expressions_match_direct_arithmetic(k, rng):
    tree = parse(TABLE2[k], TABLE1_VARIABLES)
    X = np.zeros((100, 16))
    X[:, W] = rng.uniform(*TABLE1_RANGES[W], 100)
    X[:, D] = rng.uniform(*TABLE1_RANGES[D], 100)
    got = evaluate_rows(tree, X)
    want = [TABLE2_ORACLES[k](w, d) for w, d in zip(X[:, W], X[:, D])]
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_evaluate_is_total(tree):
    X = np.random.default_rng(0).uniform(-5, 5, (20, 3))
    out = evaluate_rows(tree, X)
    assert out.shape == (20,)


# -- complexity -------------------------------------------------------------

def test_complexity_table1_is_11():
    assert complexity(TABLE1_MODEL) == 11


def test_complexity_leaf():
    assert complexity(Var(0)) == 1
    assert complexity(Const(3)) == 1


def test_complexity_binary_sum():
    assert complexity(plus(Var(1), Var(2))) == 5


def test_complexity_table2_first_row_is_24():
    assert complexity(parse(TABLE2[0], TABLE1_VARIABLES)) == 24


def test_complexity_table2_values_are_stable():
    # artifact-grammar values; the printed table does not fix tree shapes
    got = [complexity(parse(t, TABLE1_VARIABLES)) for t in TABLE2]
    assert got == [24, 42, 63, 84, 121, 129]


@settings(max_examples=300, deadline=None)
@given(trees)
def test_complexity_matches_brute_force(tree):
    assert complexity(tree) == brute_complexity(tree)


def test_complexity_matches_brute_force_on_random_individuals(rng):
    cfg = TreeConfig(n_variables=4)
    for _ in range(1000):
        t = random_individual(cfg, rng, int(rng.integers(2, 7)))
        assert complexity(t) == brute_complexity(t)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_complexity_strictly_monotone_under_leaf_growth(tree):
    leaves = [p for p, t in walk(tree) if not isinstance(t, Node)]
    from paretogp.expr.tree import replace_at
    for p in leaves[:5]:
        grown = replace_at(tree, p, Node(P.SQUARE, (Var(0),)))
        assert complexity(grown) > complexity(tree)


# -- interval ---------------------------------------------------------------

def test_interval_inverse_across_zero_is_pathological():
    assert interval_eval(Node(P.INVERSE, (Var(0),)), [(-1, 1)]).pathological


def test_interval_affine():
    iv = interval_eval(plus(Const(2), times(Const(3), Var(0))), [(0, 10)])
    assert not iv.pathological
    assert (iv.lo, iv.hi) == (2, 32)


def test_interval_sqrt_against_grid():
    iv = interval_eval(Node(P.SQRT, (Var(0),)), [(0, 70)])
    assert (iv.lo, iv.hi) == (0.0, math.sqrt(70))
    grid = np.sqrt(np.linspace(0, 70, 10001))
    assert grid.min() >= iv.lo and grid.max() <= iv.hi


@pytest.mark.parametrize("text", [
    "sqrt(x0 - 1)", "1/(x0 - 5)", "inv(x0)", "sqrt(-(x0))",
])
def test_interval_flags_singularities(text):
    assert interval_eval(parse(text), [(0, 10)]).pathological


def test_interval_square_spanning_zero():
    iv = interval_eval(Node(P.SQUARE, (Var(0),)), [(-3, 2)])
    assert (iv.lo, iv.hi) == (0, 9)


def test_interval_overflow_is_pathological():
    tree = Node(P.SQUARE, (Node(P.SQUARE, (Node(P.SQUARE, (Var(0),)),)),))
    for _ in range(6):
        tree = Node(P.SQUARE, (tree,))
    assert interval_eval(tree, [(0, 1e10)]).pathological


@pytest.mark.parametrize("k", range(6))
def test_table2_not_pathological_on_table1_ranges(k):
    assert not interval_eval(parse(TABLE2[k], TABLE1_VARIABLES), TABLE1_RANGES).pathological


@settings(max_examples=300, deadline=None)
@given(trees)
def test_interval_soundness(tree):
    ranges = [(-2.0, 3.0), (0.5, 4.0), (-7.0, -1.0)]
    iv = interval_eval(tree, ranges)
    if iv.pathological:
        return
    rng = np.random.default_rng(1)
    X = np.column_stack([rng.uniform(lo, hi, 1000) for lo, hi in ranges])
    X[:8] = [[a, b, c] for a in (-2.0, 3.0) for b in (0.5, 4.0) for c in (-7.0, -1.0)]
    out = evaluate_rows(tree, X)
    assert np.all(np.isfinite(out))
    assert np.all((out >= iv.lo) & (out <= iv.hi))


# -- random generation and variation ---------------------------------------

def test_random_tree_depth_one_is_leaf(rng):
    cfg = TreeConfig(n_variables=3)
    for _ in range(50):
        assert not isinstance(random_tree(cfg, rng, 1), Node)


def test_random_tree_respects_caps(rng):
    cfg = TreeConfig(n_variables=3, max_complexity=1000)
    for _ in range(300):
        t = random_tree(cfg, rng, int(rng.integers(1, 8)))
        assert complexity(t) <= 1000
        for _, n in walk(t):
            if isinstance(n, Node) and n.op.variadic:
                assert len(n.children) <= 5


def test_random_tree_exact_depth(rng):
    cfg = TreeConfig(n_variables=3)
    for d in range(1, 6):
        for _ in range(20):
            assert depth(random_tree(cfg, rng, d, "exact")) == d


def test_random_tree_determinism():
    cfg = TreeConfig(n_variables=5)

    def run():
        r = np.random.default_rng(2024)
        return [format_tree(random_tree(cfg, r, 5)) for _ in range(1000)]

    assert run() == run()


def test_constants_follow_design(rng):
    from paretogp.expr.variation import random_constant
    vals = [random_constant(rng).value for _ in range(2000)]
    ints = [v for v in vals if isinstance(v, int)]
    reals = [v for v in vals if isinstance(v, float)]
    assert 0.4 < len(ints) / len(vals) < 0.6
    assert all(-10 <= v <= 10 for v in vals)
    assert all(round(v, 4) == v for v in reals)


def test_crossover_material_closure(rng):
    a, b = plus(Var(0)), plus(Var(1))
    for _ in range(50):
        child = crossover(a, b, rng)
        assert child.op is P.PLUS
        assert variables_used(child) <= {0, 1}


def test_crossover_complexity_cap_fallback(rng):
    big = random_individual(TreeConfig(n_variables=2, max_complexity=10**6), rng, 6)
    a = plus(Var(0), Var(1))
    child = crossover(a, big, rng, max_complexity=complexity(a))
    assert complexity(child) <= complexity(a)


def _check_template(t, cap=1000):
    assert isinstance(t, Node) and t.op is P.PLUS
    assert complexity(t) <= cap
    for _, n in walk(t):
        if isinstance(n, Node):
            assert n.op.arity_ok(len(n.children))


def test_variation_preserves_invariants(rng):
    cfg = TreeConfig(n_variables=3)
    pop = [random_individual(cfg, rng, int(rng.integers(2, 7))) for _ in range(60)]
    for i in range(300):
        a, b = pop[i % 60], pop[(7 * i + 3) % 60]
        for child in (crossover(a, b, rng), subtree_mutation(a, rng, cfg),
                      depth_preserving_mutation(a, rng, cfg)):
            _check_template(child)


def test_mutation_of_single_leaf_keeps_plus_root(rng):
    cfg = TreeConfig(n_variables=2)
    for _ in range(30):
        assert subtree_mutation(plus(Var(0)), rng, cfg).op is P.PLUS
        assert depth_preserving_mutation(plus(Var(0)), rng, cfg).op is P.PLUS


def test_depth_preserving_replacement_depth(rng):
    cfg = TreeConfig(n_variables=2)
    sub = Node(P.SQRT, (Var(0),))  # depth 2
    tree = plus(sub)
    for _ in range(30):
        child = depth_preserving_mutation(tree, rng, cfg)
        assert depth(child.children[0]) == 2


def test_variation_determinism():
    cfg = TreeConfig(n_variables=3)

    def run():
        r = np.random.default_rng(99)
        pop = [random_individual(cfg, r, 4) for _ in range(10)]
        out = []
        for i in range(100):
            out.append(format_tree(crossover(pop[i % 10], pop[(i + 1) % 10], r)))
            out.append(format_tree(subtree_mutation(pop[i % 10], r, cfg)))
            out.append(format_tree(depth_preserving_mutation(pop[i % 10], r, cfg)))
        return out

    assert run() == run()


# -- format / parse ---------------------------------------------------------

def test_format_table1():
    assert format_tree(TABLE1_MODEL, TABLE1_VARIABLES) == "-25.2334 + 3.21666*windGust2"


@settings(max_examples=500, deadline=None)
@given(trees)
def test_round_trip(tree):
    assert parse(format_tree(tree)) == tree


def test_round_trip_random_individuals(rng):
    cfg = TreeConfig(n_variables=16)
    for _ in range(500):
        t = random_individual(cfg, rng, 6)
        assert parse(format_tree(t, TABLE1_VARIABLES), TABLE1_VARIABLES) == t


@pytest.mark.parametrize("text", TABLE2)
def test_table2_parses(text):
    assert complexity(parse(text, TABLE1_VARIABLES)) > 1


@pytest.mark.parametrize("text, pos", [
    ("1 +", 3), ("(x0", 3), ("x0 $ 1", 3), ("x0^3", 3), ("foo + 1", 0), ("x0 x1", 3),
])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.position == pos


def test_parse_shapes():
    assert parse("a - b - c", ["a", "b", "c"]) == Node(
        P.SUBTRACT, (Node(P.SUBTRACT, (Var(0), Var(1))), Var(2)))
    assert parse("-2^2") == Node(P.SQUARE, (Const(-2),))
    assert parse("-(x0)^2") == Node(P.MINUS, (Node(P.SQUARE, (Var(0),)),))
    assert parse("1 + 2 + 3 + 4 + 5 + 6 + 7").op is P.PLUS


def test_variables_used():
    assert variables_used(TABLE1_MODEL) == {W}
    assert variables_used(plus(Const(1), Const(2))) == set()
    assert variables_used(parse(TABLE2[1], TABLE1_VARIABLES)) == {W, D}
