"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Every tolerance is pinned here; nothing is deferred to calibration.
"""

import time

import numpy as np

from kronmeet import (
    FeasibleSet,
    equal_neighbor,
    finiteness,
    gradient_check,
    hamiltonian_tour,
    hitting_times,
    kron,
    make_complete,
    make_grid,
    make_ring,
    max_entropy_chain,
    mean_meeting_stationary,
    mean_meeting_time,
    meeting_times,
    min_kemeny_chain,
    minimize_mean_meeting,
    simulate_meeting,
    spectral_radius_lt_one,
    stationary_chain,
    stationary_distribution,
    uniform_distribution,
    validate,
    vec,
)

SWAP2 = np.array([[0.0, 1.0], [1.0, 0.0]])
FIG1_EVADER = np.array([[0.5, 0.5], [1.0, 0.0]])


def report(num, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def dirichlet_chain(n, rng, support=None):
    P = np.zeros((n, n))
    for i in range(n):
        idx = np.flatnonzero(support[i]) if support is not None else np.arange(n)
        P[i, idx] = rng.dirichlet(np.ones(idx.size))
    return P


def classical_hitting_oracle(P):
    n = P.shape[0]
    H = np.zeros((n, n))
    for j in range(n):
        keep = [i for i in range(n) if i != j]
        A = np.eye(n - 1) - P[np.ix_(keep, keep)]
        h = np.linalg.solve(A, np.ones(n - 1))
        for row, i in enumerate(keep):
            H[i, j] = h[row]
        H[j, j] = 1.0 + P[j, keep] @ h
    return H


def test_criterion_1_ring_lemma_equally_good_pursuers():
    start = time.monotonic()
    n = 5
    G = make_ring(n)
    uni = uniform_distribution(n)
    tour = hamiltonian_tour(G)
    deviations = []
    for pursuer in (stationary_chain(G), hamiltonian_tour(G, "reverse")):
        mean = mean_meeting_time(meeting_times(pursuer, tour), uni, uni)
        deviations.append(abs(mean - (n + 1) / 2))
    elapsed = time.monotonic() - start
    ok = max(deviations) <= 1e-9 and elapsed < 1.0
    report(1, ok, f"ring-5 means off by {max(deviations):.2e}, {elapsed:.3f}s")


def test_criterion_2_ring_proof_case_formulas():
    n = 5
    G = make_ring(n)
    M = meeting_times(hamiltonian_tour(G, "reverse"), hamiltonian_tour(G))
    expected = {}
    for x in range(1, n + 1):
        if x == 1:
            expected[x] = float(n)
        elif x % 2 == 1:
            expected[x] = (x - 1) / 2
        else:
            expected[x] = (n + x - 1) / 2
    worst = max(abs(M[x - 1, 0] - v) for x, v in expected.items())
    report(2, worst <= 1e-9, f"per-start times off by {worst:.2e}")


def test_criterion_3_ring6_infinite_pairs_and_stationary_optimum():
    G = make_ring(6)
    tour = hamiltonian_tour(G)
    rep = finiteness(hamiltonian_tour(G, "reverse"), tour)
    has_infinite = not rep.all_finite and not rep.finite_pairs.all()
    res = minimize_mean_meeting(G, tour, starts=20)
    uni = uniform_distribution(6)
    stationary_value = mean_meeting_time(
        meeting_times(stationary_chain(G), tour), uni, uni
    )
    gap = abs(res.objective - stationary_value)
    ok = has_infinite and gap <= 1e-6
    report(3, ok, f"infinite pairs present={has_infinite}, optimum gap {gap:.2e}")


def test_criterion_4_complete_graph_insensitivity():
    start = time.monotonic()
    worst = 0.0
    for n in (5, 6):
        G = make_complete(n)
        Pe = validate(np.full((n, n), 1.0 / n), G)
        uni = uniform_distribution(n)
        fs = FeasibleSet.from_graph(G, uni)
        rng = np.random.default_rng(n)
        for _ in range(100):
            P = fs.random_point(rng)
            pi_p = stationary_distribution(P)
            mean = mean_meeting_time(meeting_times(P, Pe), pi_p, uni)
            worst = max(worst, abs(mean - n))
    elapsed = time.monotonic() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    report(4, ok, f"200 random pursuers, worst |mean-n| {worst:.2e}, {elapsed:.1f}s")


def test_criterion_5_two_node_reproduction():
    rep_i = finiteness(SWAP2, FIG1_EVADER)
    rep_ii = finiteness(SWAP2, SWAP2)

    def killed(Pp, Pe):
        n = Pp.shape[0]
        Q = np.kron(Pe, Pp)
        Q[:, np.arange(n) * (n + 1)] = 0.0
        return Q

    spectral_i = spectral_radius_lt_one(killed(SWAP2, FIG1_EVADER))
    spectral_ii = spectral_radius_lt_one(killed(SWAP2, SWAP2))
    expected_ii = np.array([[True, False], [False, True]])
    ok = (
        rep_i.all_finite
        and spectral_i is True
        and np.array_equal(rep_ii.finite_pairs, expected_ii)
        and spectral_ii is False
    )
    report(5, ok, "case (i) all finite, case (ii) off-diagonal infinite, "
                  "spectral test agrees on both")


def test_criterion_6_hitting_time_corollary():
    rng = np.random.default_rng(60)
    worst_oracle = 0.0
    worst_return = 0.0
    for k in range(50):
        n = int(rng.integers(3, 7))
        P = dirichlet_chain(n, rng)
        H = hitting_times(P)
        worst_oracle = max(worst_oracle, float(np.max(np.abs(H - classical_hitting_oracle(P)))))
        pi = stationary_distribution(P)
        worst_return = max(worst_return, float(np.max(np.abs(np.diag(H) - 1.0 / pi))))
    ok = worst_oracle <= 1e-9 and worst_return <= 1e-9
    report(6, ok, f"50 chains: vs classical system {worst_oracle:.2e}, "
                  f"diagonal vs 1/pi {worst_return:.2e}")


def test_criterion_7_kemeny_row_independence():
    rng = np.random.default_rng(70)
    worst_dev = 0.0
    worst_eq = 0.0
    for _ in range(10):
        n = int(rng.integers(3, 7))
        P = dirichlet_chain(n, rng)
        pi = stationary_distribution(P)
        H = hitting_times(P)  # diagonal entries are the 1/pi return times
        row_values = H @ pi
        worst_dev = max(worst_dev, float(np.max(row_values) - np.min(row_values)))
        value = mean_meeting_stationary(pi, P, pi)
        worst_eq = max(worst_eq, float(np.max(np.abs(row_values - value))))
    ok = worst_dev <= 1e-9 and worst_eq <= 1e-9
    report(7, ok, f"row deviation {worst_dev:.2e}, vs closed form {worst_eq:.2e}")


def test_criterion_8_oracle_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(80)
    trials = 100_000
    total_pairs = 0
    covered = 0
    vi_ok = True
    for instance in range(200):
        n = 4 + (instance % 2)
        Pp = dirichlet_chain(n, rng)
        Pe = dirichlet_chain(n, rng)
        M = meeting_times(Pp, Pe)

        # independent value-iteration oracle
        Q = np.kron(Pe, Pp)
        Q[:, np.arange(n) * (n + 1)] = 0.0
        m = np.ones(n * n)
        for _ in range(10**6):
            m_next = 1.0 + Q @ m
            if np.max(np.abs(m_next - m)) <= 1e-12:
                m = m_next
                break
            m = m_next
        vi_ok = vi_ok and np.max(np.abs(vec(M) - m)) <= 1e-8

        for i in range(n):
            for j in range(n):
                batch = simulate_meeting(
                    Pp, Pe, i, j, trials=trials, seed=1000 * instance + i * n + j
                )
                total_pairs += 1
                covered += abs(batch.mean - M[i, j]) <= 3 * batch.stderr
    elapsed = time.monotonic() - start
    coverage = covered / total_pairs
    ok = coverage >= 0.99 and vi_ok and elapsed < 300.0
    report(8, ok, f"{total_pairs} pairs, 3-sigma coverage {coverage:.4f}, "
                  f"value iteration exact={vi_ok}, {elapsed:.0f}s")


def test_criterion_9_gradient_correctness():
    G = make_ring(5)
    fs = FeasibleSet.from_graph(G, uniform_distribution(5))
    rw = equal_neighbor(G)
    rng = np.random.default_rng(90)
    uniform_support = np.where(fs.support, 1.0, 0.0)
    uniform_support /= uniform_support.sum(axis=1, keepdims=True)
    worst = {}
    for objective in ("mean_meeting", "entropy", "kemeny"):
        errs = []
        for _ in range(20):
            P = 0.9 * fs.random_point(rng) + 0.1 * uniform_support
            rep = gradient_check(
                objective, validate(P, G), evader=rw, step=1e-6, tol=1e-5
            )
            errs.append(rep.max_rel_error)
        worst[objective] = max(errs)
    ok = all(v <= 1e-5 for v in worst.values())
    report(9, ok, "worst relative errors " +
           ", ".join(f"{k}={v:.2e}" for k, v in worst.items()))


def test_criterion_10_grid_qualitative():
    G = make_grid(3, 3)
    uni = uniform_distribution(9)
    rw = equal_neighbor(G)
    pi_rw = stationary_distribution(rw)
    entropy_evader = max_entropy_chain(G, uni).chain
    kemeny_evader = min_kemeny_chain(G, uni, starts=20).chain

    cases = [
        ("rw", rw, pi_rw),
        ("entropy", entropy_evader, uni),
        ("kemeny", kemeny_evader, uni),
    ]
    beats_baselines = {}
    diag_mass = {}
    for label, Pe, pi in cases:
        res = minimize_mean_meeting(G, Pe, pi_p=pi, pi_e=pi, starts=20)
        baselines = [
            mean_meeting_time(meeting_times(stationary_chain(G), Pe), pi, pi),
            mean_meeting_time(meeting_times(rw, Pe), pi, pi),
            mean_meeting_time(
                meeting_times(max_entropy_chain(G, pi).chain, Pe), pi, pi
            ),
        ]
        beats_baselines[label] = res.objective <= min(baselines) + 1e-6
        diag_mass[label] = float(np.mean(np.diag(res.chain.P)))
    waits_for_fast_evader = diag_mass["kemeny"] > diag_mass["rw"]
    ok = all(beats_baselines.values()) and waits_for_fast_evader
    report(10, ok, f"beats baselines {beats_baselines}, self-transition mass "
                   f"kemeny {diag_mass['kemeny']:.3f} > rw {diag_mass['rw']:.3f}")


def test_criterion_11_kronecker_identity_suite():
    rng = np.random.default_rng(110)
    worst = 0.0
    for _ in range(100):
        A, B, C = (rng.standard_normal((3, 3)) for _ in range(3))
        lhs = kron(B.T, A) @ vec(C)
        rhs = vec(A @ C @ B)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        D = rng.standard_normal((3, 3))
        lhs2 = kron(A, B) @ kron(C, D)
        rhs2 = kron(A @ C, B @ D)
        worst = max(worst, float(np.max(np.abs(lhs2 - rhs2))))
    report(11, worst <= 1e-12, f"100 triples, worst deviation {worst:.2e}")
