from agt.analysis import belief_trajectories, voi_report
from agt.extensive import default_strategy
from agt.game import BLUE, RED
from agt.plotting import belief_figure, convergence_figure, voi_figure
from agt.xdo import xdo_solve

PNG = b"\x89PNG"


def test_convergence_figure(l3, tmp_path):
    path = convergence_figure(xdo_solve(l3), tmp_path / "c.png")
    assert path.read_bytes().startswith(PNG)


def test_belief_figures(l3_2t, tmp_path):
    rows = belief_trajectories(l3_2t, default_strategy(RED), default_strategy(BLUE))
    for observer in ("b", "r"):
        path = belief_figure(rows, tmp_path / f"{observer}.png", observer=observer)
        assert path.read_bytes().startswith(PNG)


def test_voi_figure_creates_parent(tmp_path):
    path = voi_figure(voi_report(18.76, 20.3, 14.7, 18.41), tmp_path / "sub" / "v.png")
    assert path.read_bytes().startswith(PNG)
