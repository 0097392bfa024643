"""Structure tensors shared by the unit tests."""

from sgv.expr import parse_poly
from sgv.geometry import StructureTensor
from sgv.grassmann import Chart
from strategies import C11, C12, C22

E1 = Chart.from_spec([("x", "even")])
E2 = Chart.from_spec([("x", "even"), ("y", "even")])


def named(chart, kind, **entries):
    return StructureTensor.from_named(
        chart, kind, {tuple(k.split("_")): parse_poly(v, chart) for k, v in entries.items()}
    )


DARBOUX11 = StructureTensor.darboux(C11, [("x", "theta")])
DARBOUX22 = StructureTensor.darboux(C22, [("x1", "t1"), ("x2", "t2")])
LINEAR = named(C11, "odd_poisson", theta_x="x")
EVEN_POISSON = named(E2, "even_poisson", x_y="1")
QUADRATIC_POISSON = named(E2, "even_poisson", x_y="x*y")
LINE = named(E1, "even_riemannian", x_x="1")
MIXED = named(C12, "even_riemannian", x_x="1", t1_t2="1")
CURVED = named(C12, "even_riemannian", x_x="1 + t1*t2", t1_t2="x")
ODD_RIEMANN = named(C11, "odd_riemannian", x_theta="1 + x")
BROKEN = named(C22, "odd_poisson", x1_t1="1", x2_t2="1", t1_t2="x1*t1")

TENSORS = [DARBOUX11, DARBOUX22, LINEAR, EVEN_POISSON, QUADRATIC_POISSON, LINE, MIXED, CURVED, ODD_RIEMANN]
