import math

import numpy as np
import pytest

from kronmeet import (
    available_backends,
    equal_neighbor,
    hamiltonian_tour,
    make_ring,
    meeting_times,
    simulate_meeting,
)

SWAP2 = np.array([[0.0, 1.0], [1.0, 0.0]])


class TestDeterminism:
    def test_same_seed_identical(self):
        rw = equal_neighbor(make_ring(5))
        a = simulate_meeting(rw, rw, 0, 2, trials=500, seed=9)
        b = simulate_meeting(rw, rw, 0, 2, trials=500, seed=9)
        assert np.array_equal(a.times, b.times)

    def test_different_seed_differs(self):
        rw = equal_neighbor(make_ring(5))
        a = simulate_meeting(rw, rw, 0, 2, trials=500, seed=9)
        b = simulate_meeting(rw, rw, 0, 2, trials=500, seed=10)
        assert not np.array_equal(a.times, b.times)

    def test_pair_specific_streams(self):
        rw = equal_neighbor(make_ring(5))
        a = simulate_meeting(rw, rw, 0, 2, trials=500, seed=9)
        b = simulate_meeting(rw, rw, 2, 0, trials=500, seed=9)
        assert not np.array_equal(a.times, b.times)


@pytest.mark.skipif(
    "cython" not in available_backends(), reason="compiled kernel not built"
)
class TestBackendEquivalence:
    def test_bit_identical_outcomes(self):
        rw = equal_neighbor(make_ring(6))
        tour = hamiltonian_tour(make_ring(6))
        for (i, j) in [(0, 0), (0, 3), (4, 1)]:
            a = simulate_meeting(rw, tour, i, j, trials=4000, seed=13, backend="cython")
            b = simulate_meeting(rw, tour, i, j, trials=4000, seed=13, backend="python")
            assert np.array_equal(a.times, b.times)


class TestOutcomes:
    def test_never_meeting_pair_fully_censored(self):
        batch = simulate_meeting(SWAP2, SWAP2, 0, 1, trials=300, seed=1)
        assert batch.censored == 300
        assert batch.met == 0
        assert batch.mean == math.inf
        assert batch.stderr == math.inf

    def test_deterministic_tour_collision_is_one_step(self):
        G = make_ring(5)
        rev = hamiltonian_tour(G, "reverse")
        tour = hamiltonian_tour(G, "forward")
        batch = simulate_meeting(rev, tour, 2, 0, trials=200, seed=3)
        assert set(batch.times.tolist()) == {1}

    def test_default_horizon(self):
        batch = simulate_meeting(SWAP2, SWAP2, 0, 0, trials=10, seed=0)
        assert batch.max_steps == 100 * 4

    def test_consistency_with_closed_form(self):
        rng = np.random.default_rng(22)
        for trial in range(5):
            n = 4
            Pp = np.zeros((n, n))
            Pe = np.zeros((n, n))
            for i in range(n):
                Pp[i] = rng.dirichlet(np.ones(n))
                Pe[i] = rng.dirichlet(np.ones(n))
            M = meeting_times(Pp, Pe)
            i, j = int(rng.integers(n)), int(rng.integers(n))
            batch = simulate_meeting(Pp, Pe, i, j, trials=60_000, seed=trial)
            assert abs(batch.mean - M[i, j]) <= 3 * batch.stderr

    def test_dict_round_trip(self):
        batch = simulate_meeting(SWAP2, SWAP2, 0, 0, trials=50, seed=4)
        doc = batch.to_dict()
        assert doc["i"] == 1 and doc["j"] == 1  # 1-based externally
        assert doc["met"] + doc["censored"] == 50
        assert doc["mean"] == pytest.approx(1.0)  # deterministic re-meeting

    def test_bad_start_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            simulate_meeting(SWAP2, SWAP2, 0, 5, trials=10)
