import pytest
from hypothesis import given, strategies as st

from manetga.scenario import ScenarioError, load, parse_scenario, render, with_seed

from conftest import SCENARIOS


def test_minimal_file():
    sc = parse_scenario("node 1 0 0\nnode 2 10 0\nparam sim.steps 5\n")
    assert sorted(sc.topology.nodes) == [1, 2]
    assert sc.sim.steps == 5 and not sc.topology.explicit
    assert sc.ga.pop_size == 100


def test_dangling_attacker_reported_at_its_line():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("node 1 0 0\n# comment\nattacker 9 blackhole 1\n")
    assert err.value.line == 3 and err.value.token == "9"


@pytest.mark.parametrize("text, line", [
    ("node 1 0 0\nnode 1 5 5\n", 2),
    ("node 1 0 0\nlink 1 2 5\n", 2),
    ("node 1 0 0\nnode 2 0 1\nlink 1 2 0\n", 3),
    ("node 1 0 0\nnode 2 0 1\ndemand 1 1 1 4\n", 3),
    ("param sim.bogus 1\n", 1),
    ("node 1 0 0\nparam ga.pop 7\n", 2),
    ("node 1 0 0\nnode 2 0 1\nattacker 1 flooding 2 2\n", 3),
    ("node 1 0 0\nnode 2 0 1\nnode 3 9 9\nlink 1 2 1\nfailure 2 3 5\n", 5),
    ("node 1 0 0\nwarp 1 2\n", 2),
    ("node 1 x 0\n", 1),
    ("param defense.quorum maybe\n", 1),
])
def test_errors_name_the_line(text, line):
    with pytest.raises(ScenarioError) as err:
        parse_scenario(text)
    assert err.value.line == line


def test_aliases_and_seed_default():
    sc = parse_scenario("param ga.alpha 2.5\nparam ga.beta 0.5\nparam sim.seed 7\nnode 1 0 0\n")
    assert (sc.ga.a, sc.ga.b, sc.ga.seed) == (2.5, 0.5, 7)
    assert with_seed(sc, 3).ga.seed == 3 and with_seed(sc, 3).sim.seed == 3


def test_bundled_scenarios_round_trip():
    for path in sorted(SCENARIOS.glob("*.scn")):
        sc = load(path)
        assert parse_scenario(render(sc)) == sc, path.name


@st.composite
def scenarios(draw):
    n = draw(st.integers(2, 6))
    lines = [f"node {i} {draw(st.integers(0, 900))} {draw(st.integers(0, 900))} {draw(st.integers(0, 5))}"
             for i in range(1, n + 1)]
    explicit = draw(st.booleans())
    if explicit:
        for a in range(1, n):
            lines.append(f"link {a} {a + 1} {draw(st.floats(0.5, 50, allow_nan=False))}")
    for g in range(1, draw(st.integers(0, 3)) + 1):
        s, d = draw(st.lists(st.integers(1, n), min_size=2, max_size=2, unique=True))
        lines.append(f"demand {g} {s} {d} {draw(st.floats(0.1, 20))}")
    if draw(st.booleans()):
        lines.append(f"attacker 1 flooding {draw(st.floats(0.1, 30))} 99")
    if draw(st.booleans()):
        lines.append(f"attacker 2 misrelay 1 {draw(st.sampled_from(['drop', 'modify']))}")
    lines.append(f"param ga.k_c {draw(st.floats(0, 1))}")
    lines.append(f"param defense.ack {draw(st.sampled_from(['on', 'off', '1', '0']))}")
    lines.append(f"param sim.steps {draw(st.integers(0, 500))}")
    if explicit and draw(st.booleans()):
        lines.append(f"failure 1 2 {draw(st.integers(0, 50))}")
    draw(st.randoms()).shuffle(lines)
    return "\n".join(lines)


@given(scenarios())
def test_render_round_trip(text):
    sc = parse_scenario(text)
    rendered = render(sc)
    assert parse_scenario(rendered) == sc
    assert render(parse_scenario(rendered)) == rendered
