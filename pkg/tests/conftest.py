import io

import pytest

from entropywalk.graph import Graph, load_edge_list


def graph_from(text: str, directed: bool = False) -> Graph:
    return load_edge_list(io.StringIO(text), directed=directed)


@pytest.fixture
def path3():
    return graph_from("a b\nb c\n")


@pytest.fixture
def k3():
    return graph_from("a b\nb c\na c\n")


@pytest.fixture
def k4():
    return graph_from("a b\na c\na d\nb c\nb d\nc d\n")


@pytest.fixture
def k5():
    lines = [f"{a} {b}" for i, a in enumerate("abcde") for b in "abcde"[i + 1 :]]
    return graph_from("\n".join(lines))


@pytest.fixture
def star5():
    # center h with four leaves
    return graph_from("h l1\nh l2\nh l3\nh l4\n")


@pytest.fixture
def pair():
    return graph_from("a b\n")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            for name, c in rep.user_properties:
                if name == "criterion":
                    status = "PASS" if rep.passed else "FAIL"
                    detail = "; ".join(c["notes"])
                    lines.append((c["num"], f"{status} criterion {c['num']:>2} {c['title']}" + (f" ({detail})" if detail else "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
