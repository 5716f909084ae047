import pytest

from sorted_l1l2.config import InnerStallError, SolverConfig
from sorted_l1l2.noisy import adaptive_lambda
from sorted_l1l2.regularizer import WeightSchedule


def test_noisefree_defaults():
    cfg = SolverConfig.noisefree()
    assert (cfg.alpha, cfg.outer_max, cfg.tol_outer, cfg.subproblem, cfg.box) == (1.0, 100, 1e-8, "lp", True)
    assert cfg.schedule == WeightSchedule.noisefree()


def test_noisy_defaults():
    cfg = SolverConfig.noisy(300, 512)
    assert cfg.alpha == 0.1 and cfg.delta == 0.8 and cfg.inner_max == 20
    assert cfg.lam == adaptive_lambda(300, 512)
    assert cfg.schedule == WeightSchedule.noisy()
    assert cfg.l1_lambda(270) == pytest.approx(0.1)
    assert cfg.replace(lasso_lam=0.3).l1_lambda(270) == 0.3


@pytest.mark.parametrize("kw", [{"alpha": 0}, {"delta": -1}, {"outer_max": 0}, {"subproblem": "cg"}])
def test_invalid_configs(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_stall_message_carries_residuals():
    err = InnerStallError("stuck", 1e-3, 2e-4)
    assert err.primal_residual == 1e-3 and "1.000e-03" in str(err)
