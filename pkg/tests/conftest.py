import math
import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from paretogp.expr import Const, Node, Primitive, Var

TABLE1_VARIABLES = (
    "year", "month", "day", "hour", "minute", "temperature", "apparentTemperature",
    "dewPoint", "relativeHumidity", "wetBulbDepression", "windSpeed", "windGust",
    "windSpeed2", "windGust2", "pressureQNH", "rainSince9am",
)
TABLE1_RANGES = (
    (2010, 2011), (1, 12), (1, 31), (0, 23), (0, 30), (4.2, 23.4), (-14.2, 24.0),
    (-3.2, 19.1), (40, 100), (0.0, 6.6), (0, 106), (0, 130), (0, 57), (0, 70),
    (987.8, 1037.5), (0.0, 50.4),
)

# the six ensemble members, transcribed into the package grammar
TABLE2 = (
    "-32.1 + 2.9*(sqrt(windGust2) + windGust2)",
    "112.0 - 3.5e-5*(-1956.3 + dewPoint^2 + windGust2^2)^2",
    "-6.4 + 1.3e-4*(9 - sqrt(windGust2))^2*windGust2^2*(-9.9 + dewPoint + 2*windGust2)",
    "-4.5 + 4.3e-4*(-8.9 + sqrt(windGust2))*(-sqrt(windGust2) + 0.1*windGust2)*windGust2"
    "*(-12 + dewPoint^2 + windGust2^2)",
    "-3.1 + 1.5e-4*(-3*dewPoint*windGust2^2 + (9 - sqrt(windGust2))^2*windGust2^2"
    "*(-16.3 + dewPoint + 2*windGust2))",
    "-11.2 + 9.4e-7*(9 - sqrt(windGust2))^2*sqrt(windGust2)*(39.4 + 4*dewPoint + 7*windGust2)"
    "*(1/9 + dewPoint + (10 + 2*windGust2)^2)",
)

s = math.sqrt
# hand transcriptions of the printed formulas (w = windGust2, d = dewPoint)
TABLE2_ORACLES = (
    lambda w, d: -32.1 + 2.9 * (s(w) + w),
    lambda w, d: 112.0 - 3.5e-5 * (-1956.3 + d ** 2 + w ** 2) ** 2,
    lambda w, d: -6.4 + 1.3e-4 * (9 - s(w)) ** 2 * w ** 2 * (-9.9 + d + 2 * w),
    lambda w, d: -4.5 + 4.3e-4 * (-8.9 + s(w)) * (-s(w) + 0.1 * w) * w * (-12 + d ** 2 + w ** 2),
    lambda w, d: -3.1 + 1.5e-4 * (-3 * d * w ** 2 + (9 - s(w)) ** 2 * w ** 2 * (-16.3 + d + 2 * w)),
    lambda w, d: -11.2 + 9.4e-7 * (9 - s(w)) ** 2 * s(w) * (39.4 + 4 * d + 7 * w)
    * (1 / 9 + d + (10 + 2 * w) ** 2),
)


def _node(op, kids):
    return Node(op, tuple(kids))


constants = st.one_of(
    st.integers(-10, 10).map(Const),
    st.floats(-10, 10, allow_nan=False).map(lambda v: Const(round(v, 4))),
)
leaves = st.one_of(st.integers(0, 2).map(Var), constants)


def _extend(children):
    unary = st.sampled_from([Primitive.MINUS, Primitive.SQRT, Primitive.SQUARE,
                             Primitive.INVERSE])
    binary = st.sampled_from([Primitive.SUBTRACT, Primitive.DIVIDE])
    variadic = st.sampled_from([Primitive.PLUS, Primitive.TIMES])
    return st.one_of(
        st.builds(lambda op, c: _node(op, [c]), unary, children),
        st.builds(lambda op, a, b: _node(op, [a, b]), binary, children, children),
        st.builds(_node, variadic, st.lists(children, min_size=1, max_size=5)),
    )


trees = st.recursive(leaves, _extend, max_leaves=25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.REPORT, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
        terminalreporter.write_line(line)
