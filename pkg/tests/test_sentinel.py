import pytest
from hypothesis import given, strategies as st

from manetga.routing import ControlMessage
from manetga.sentinel import (
    AckWatch, BlacklistState, ConfirmationState, PositionTable, RrepQuorumState, ack_audit,
    confirm_route, corroborated, monitor_rreq_rate, quorum_check, screen_claims, verify_link_claim,
)


def feed(state, per_step, steps, origin=1):
    out = []
    for s in range(steps):
        for _ in range(per_step):
            out.append(monitor_rreq_rate(state, origin, s))
    return out


def test_double_threshold_blacklisted():
    st_ = BlacklistState(10, 10)
    feed(st_, 2, 10)
    assert 1 in st_.blacklist


def test_half_threshold_never_blacklisted():
    st_ = BlacklistState(10, 10)
    assert "blacklisted" not in feed(st_, 1, 1000)[::2]
    st2 = BlacklistState(10, 10)
    for s in range(0, 1000, 2):
        monitor_rreq_rate(st2, 1, s)
    assert st2.blacklist == set()


def test_threshold_boundary():
    st_ = BlacklistState(10, 10)
    for _ in range(10):
        assert monitor_rreq_rate(st_, 4, 0) == "ok"
    assert monitor_rreq_rate(st_, 4, 0) == "blacklisted"


@given(st.lists(st.integers(0, 59), max_size=200), st.integers(1, 5), st.integers(1, 8))
def test_blacklist_iff_some_window_exceeds(steps, window, threshold):
    # oracle: count per window by brute force
    st_ = BlacklistState(window, threshold)
    for s in sorted(steps):
        monitor_rreq_rate(st_, 1, s)
    counts = {}
    for s in steps:
        counts[s // window] = counts.get(s // window, 0) + 1
    assert (1 in st_.blacklist) == any(c > threshold for c in counts.values())


def rrep(path):
    return ControlMessage("RREP", path[-1], path[0], path=tuple(path))


def test_confirm_examples():
    cs = ConfirmationState(timeout=3)
    assert confirm_route(cs, rrep([1, 2, 3, 4]), rrep([1, 2, 3, 4])) == "confirmed"
    assert confirm_route(cs, rrep([1, 9, 4]), rrep([1, 2, 3, 4])) == "mismatch"
    assert confirm_route(cs, rrep([1, 9, 4]), None) == "timeout"


def test_confirm_colluding_evasion_confirms():
    fake = [1, 9, 8, 4]
    assert confirm_route(ConfirmationState(), rrep(fake), rrep(fake)) == "confirmed"


def test_confirm_expiry():
    cs = ConfirmationState(timeout=3)
    cs.expect("k", rrep([1, 2]), now=0)
    assert cs.expired(2) == []
    assert [k for k, _ in cs.expired(3)] == ["k"]
    assert cs.pending == {}


def test_quorum_examples():
    q = RrepQuorumState()
    q.add("d", [1, 2, 3, 4])
    assert quorum_check(q, "d") == "waiting"
    q.add("d", [1, 5, 3, 4])
    assert quorum_check(q, "d") == "safe"
    q2 = RrepQuorumState()
    q2.add("d", [1, 9, 4])
    q2.add("d", [1, 2, 3, 4])
    assert quorum_check(q2, "d") == "unsafe"


paths = st.lists(st.lists(st.integers(2, 12), min_size=0, max_size=4, unique=True)
                 .map(lambda mid: [1] + mid + [20]), min_size=1, max_size=5)


@given(paths)
def test_corroborated_matches_pairwise_oracle(ps):
    expect = [i for i, p in enumerate(ps)
              if any(set(p[1:-1]) & set(q[1:-1]) for j, q in enumerate(ps) if j != i)]
    assert corroborated(ps) == expect


def chain(n):
    adj = {i: set() for i in range(1, n + 1)}
    for i in range(1, n):
        adj[i].add(i + 1)
        adj[i + 1].add(i)
    return adj


def test_single_dropper_suspected():
    w = AckWatch(1, overhear_k=1)
    w.watch(7, (1, 2, 3, 4), deadline=5)
    assert ack_audit(w, set(), set(), chain(4), now=5) == {2}


def test_colluders_beyond_reach_unseen():
    w = AckWatch(1, overhear_k=1)
    w.watch(7, (1, 2, 3, 4), deadline=5)
    assert ack_audit(w, {(7, 2)}, set(), chain(4), now=5) == set()


def test_acked_packets_clear():
    w = AckWatch(1)
    w.watch(7, (1, 2, 3, 4), deadline=5)
    assert ack_audit(w, {(7, 2), (7, 3)}, {7}, chain(4), now=9) == set()
    assert w.pending == {}


def test_audit_waits_for_deadline():
    w = AckWatch(1)
    w.watch(7, (1, 2, 3), deadline=5)
    assert ack_audit(w, set(), set(), chain(3), now=4) == set()
    assert 7 in w.pending


def test_overhear_k_validated():
    with pytest.raises(ValueError):
        AckWatch(1, overhear_k=0)


def test_link_claim_examples():
    pt = PositionTable(250, 0)
    pt.update(1, 0, 0, 0)
    pt.update(2, 100, 0, 0)
    pt.update(3, 300, 0, 0)
    assert verify_link_claim(pt, (1, 2)) == "plausible"
    assert verify_link_claim(pt, (1, 3)) == "flagged"
    assert verify_link_claim(pt, (1, 4)) == "indeterminate"
    ok, bad, unknown = screen_claims(pt, [(1, 2), (1, 3), (1, 4)])
    assert (ok, bad, unknown) == ({(1, 2)}, {(1, 3)}, {(1, 4)})


def test_position_timestamps_never_go_back():
    pt = PositionTable()
    pt.update(1, 5, 5, 10)
    pt.update(1, 0, 0, 3)
    assert pt.positions[1] == (5, 5, 10)


@given(st.floats(0, 1000), st.floats(0, 1000), st.floats(0, 100))
def test_flag_iff_beyond_range_plus_slack(x, y, slack):
    pt = PositionTable(250, slack)
    pt.update(1, 0, 0, 0)
    pt.update(2, x, y, 0)
    far = (x * x + y * y) ** 0.5 > 250 + slack
    assert (verify_link_claim(pt, (1, 2)) == "flagged") == far
