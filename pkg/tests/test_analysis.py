import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_hadamard_walk
from qwalk.analysis import (
    SpreadStats,
    binomial_reference,
    escape_probability,
    fit_decoherence,
    golden_section_minimize,
    l1_distance,
    model_distribution,
    spread_stats,
    spreading_exponent,
)
from qwalk.lattice import Distribution, evolve, uniform_schedule


def dist(d):
    return Distribution.from_mapping(d)


def oracle_dist(n):
    d, _ = exact_hadamard_walk(n)[n]
    return dist({j: float(p) for j, p in d.items()})


class TestSpread:
    def test_binomial_four(self):
        assert spread_stats(binomial_reference(4), 4).stddev == pytest.approx(2.0, abs=1e-12)

    def test_quantum_three_and_four(self):
        assert spread_stats(oracle_dist(3), 3).stddev == pytest.approx(math.sqrt(3), abs=1e-12)
        assert spread_stats(oracle_dist(4), 4).stddev == pytest.approx(math.sqrt(5), abs=1e-12)

    def test_point_mass(self):
        s = spread_stats(dist({7: 1.0}), 0)
        assert s.mean == 7 and s.stddev == 0

    def test_zero_mass(self):
        with pytest.raises(ValueError):
            spread_stats(dist({0: 0.0}), 1)

    def test_conditioned_on_survivors(self):
        s = spread_stats(dist({1: 0.25, 3: 0.25}), 2)
        assert s.mean == pytest.approx(2.0) and s.stddev == pytest.approx(1.0)


class TestExponent:
    def test_sqrt(self):
        stats = [SpreadStats(n, 0, math.sqrt(n)) for n in range(1, 7)]
        assert spreading_exponent(stats) == pytest.approx(0.5, abs=1e-10)

    def test_linear(self):
        stats = [SpreadStats(n, 0, 0.54 * n) for n in range(1, 7)]
        assert spreading_exponent(stats) == pytest.approx(1.0, abs=1e-10)

    def test_quantum_two_to_six(self):
        stats = [spread_stats(oracle_dist(n), n) for n in range(2, 7)]
        assert 0.8 < spreading_exponent(stats) <= 1.0

    @pytest.mark.parametrize(
        "stats",
        [
            [SpreadStats(1, 0, 1), SpreadStats(2, 0, 1.4)],
            [SpreadStats(0, 0, 1), SpreadStats(2, 0, 1.4), SpreadStats(3, 0, 2)],
            [SpreadStats(1, 0, 0), SpreadStats(2, 0, 1.4), SpreadStats(3, 0, 2)],
            [SpreadStats(2, 0, 1), SpreadStats(2, 0, 1.4), SpreadStats(2, 0, 2)],
        ],
    )
    def test_rejects_degenerate(self, stats):
        with pytest.raises(ValueError):
            spreading_exponent(stats)

    @given(c=st.floats(1e-3, 1e3), sig=st.lists(st.floats(0.1, 10), min_size=3, max_size=8))
    def test_scale_invariance(self, c, sig):
        a = [SpreadStats(n + 1, 0, s) for n, s in enumerate(sig)]
        b = [SpreadStats(n + 1, 0, c * s) for n, s in enumerate(sig)]
        assert spreading_exponent(a) == pytest.approx(spreading_exponent(b), abs=1e-9)


class TestL1:
    def test_identity(self):
        p = binomial_reference(5)
        assert l1_distance(p, p) == 0.0

    def test_disjoint(self):
        assert l1_distance(dist({0: 1.0}), dist({2: 1.0})) == 1.0

    def test_direct(self):
        assert l1_distance(dist({0: 0.5, 2: 0.5}), dist({0: 0.75, 2: 0.25})) == pytest.approx(0.25)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            l1_distance(dist({0: 0.5}), dist({0: 1.0}))

    @settings(max_examples=50)
    @given(st.lists(st.lists(st.floats(0, 1), min_size=5, max_size=5), min_size=3, max_size=3))
    def test_metric(self, rows):
        ds = []
        for r in rows:
            a = np.array(r) + 1e-3
            ds.append(Distribution(tuple(range(-2, 3)), a / a.sum()))
        p, q, r = ds
        assert l1_distance(p, q) == pytest.approx(l1_distance(q, p), abs=1e-15)
        assert l1_distance(p, p) <= 1e-12
        assert l1_distance(p, r) <= l1_distance(p, q) + l1_distance(q, r) + 1e-12


class TestBinomial:
    def test_small(self):
        assert binomial_reference(0).as_dict() == {0: 1.0}
        assert binomial_reference(2).as_dict() == {-2: 0.25, 0: 0.5, 2: 0.25}
        assert binomial_reference(6)[0] == 20 / 64

    def test_negative(self):
        with pytest.raises(ValueError):
            binomial_reference(-1)

    @given(st.integers(0, 40))
    def test_symmetric_zero_mean(self, n):
        d = binomial_reference(n)
        assert d.mass == pytest.approx(1.0, abs=1e-12)
        assert spread_stats(d, n).mean == pytest.approx(0.0, abs=1e-10)


class TestGoldenSection:
    def test_quadratic(self):
        x, fx, n = golden_section_minimize(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-8)
        assert x == pytest.approx(0.3, abs=1e-7) and n > 10


class TestFit:
    sched = uniform_schedule(5)

    def test_pure_endpoint(self):
        r = fit_decoherence(oracle_dist(5), self.sched)
        assert r.q_hat == pytest.approx(0.0, abs=1e-3)

    def test_classical_endpoint(self):
        r = fit_decoherence(binomial_reference(5), self.sched)
        assert r.q_hat == pytest.approx(1.0, abs=1e-3)

    def test_interior(self):
        r = fit_decoherence(model_distribution(self.sched, 0.4), self.sched)
        assert r.q_hat == pytest.approx(0.4, abs=1e-3)
        assert r.residual < 1e-12

    def test_residual_not_worse_than_endpoints(self):
        measured = dist({-5: 0.05, -3: 0.3, -1: 0.15, 1: 0.15, 3: 0.3, 5: 0.05})
        r = fit_decoherence(measured, self.sched)
        for q in (0.0, 1.0):
            m = model_distribution(self.sched, q)
            keys = set(m.support) | set(measured.support)
            res = sum((m[k] - measured[k]) ** 2 for k in keys)
            assert r.residual <= res + 1e-15

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fit_decoherence(Distribution((), np.zeros(0)), self.sched)


class TestEscape:
    def test_five_steps(self):
        e = escape_probability(uniform_schedule(1), {-1}, 5)
        assert e.remaining_mass == pytest.approx(3 / 8, abs=1e-12)

    def test_bookkeeping(self):
        e = escape_probability(uniform_schedule(1), {-1}, 200)
        assert e.remaining_mass == pytest.approx(1 - sum(e.per_step_absorbed), abs=1e-10)

    def test_classical_decays(self):
        e = [escape_probability(uniform_schedule(1, q=1.0), {-1}, n).remaining_mass
             for n in (11, 41, 81)]
        assert e[0] > e[1] > e[2]
        # survival of a simple random walk decays like sqrt(2/(pi n))
        assert e[2] == pytest.approx(math.sqrt(2 / (math.pi * 81)), rel=0.05)

    def test_max_steps_validation(self):
        with pytest.raises(ValueError):
            escape_probability(uniform_schedule(1), {-1}, 0)
