"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run under pytest (lines are collected into an "acceptance criteria" section of
the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import io
import os
import sys
import tempfile
from contextlib import contextmanager, redirect_stderr
from time import perf_counter

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from duo_standby import cli  # noqa: E402
from duo_standby.distributions import Deterministic, Exponential, Uniform  # noqa: E402
from duo_standby.inversion import survival  # noqa: E402
from duo_standby.simulator import estimate_lst, estimate_mean, estimate_survival, simulate_lifetime  # noqa: E402
from duo_standby.transform import (  # noqa: E402
    SystemModel,
    continuation_probability,
    moment,
    system_lst_closed,
    system_lst_fixed_point,
    system_lst_scenario_sum,
)
from oracles import golden_lst, golden_survival  # noqa: E402

GOLDEN = SystemModel(Exponential(1.0), Exponential(1.0), Exponential(1.0), Exponential(1.0))
SEED = 20240917
N_MC = 100_000


@contextmanager
def criterion(number, title, limit):
    """Time a criterion body and record one PASS/FAIL line for it."""
    info = {"detail": ""}
    start = perf_counter()
    try:
        yield info
    except BaseException as exc:
        elapsed = perf_counter() - start
        _record(number, title, False, f"{info['detail']} {type(exc).__name__}: {exc}".strip(),
                elapsed, limit)
        raise
    elapsed = perf_counter() - start
    ok = elapsed < limit
    _record(number, title, ok, info["detail"], elapsed, limit)
    assert ok, f"criterion {number} took {elapsed:.2f}s, limit {limit}s"


def _record(number, title, ok, detail, elapsed, limit):
    first = detail.splitlines()[0] if detail else ""
    line = (f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {first} "
            f"({elapsed:.2f}s of {limit:g}s)")
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_models(count, seed):
    """Random models whose four laws are drawn from exponential, uniform, deterministic."""
    rng = np.random.default_rng(seed)

    def draw():
        kind = rng.integers(3)
        if kind == 0:
            return Exponential(float(rng.uniform(0.2, 5.0)))
        if kind == 1:
            lo = float(rng.uniform(0.0, 2.0))
            return Uniform(lo, lo + float(rng.uniform(0.05, 3.0)))
        return Deterministic(float(rng.uniform(0.0, 3.0)))

    return [SystemModel(draw(), draw(), draw(), draw(), int(rng.integers(1, 3))) for _ in range(count)]


def test_criterion_1_golden_closed_form():
    with criterion(1, "golden closed form, 50 points in [0,10], 1e-10", 1.0) as info:
        grid = np.linspace(0.0, 10.0, 50)
        worst = max(abs(system_lst_closed(GOLDEN, float(s)).value - golden_lst(float(s)))
                    for s in grid)
        info["detail"] = f"max |L - 1/(1+3s+s^2)| = {worst:.2e}"
        assert worst <= 1e-10


def test_criterion_2_three_method_agreement():
    with criterion(2, "closed vs fixed point vs scenario sum, 200 random models", 10.0) as info:
        s_grid = (0.1, 0.5, 1.0, 3.0)
        ks = (1, 2, 5, 10)
        worst_fp = 0.0
        bound_violations = []
        monotone_violations = []
        for idx, model in enumerate(random_models(200, 7)):
            for s in s_grid:
                closed = system_lst_closed(model, s).value
                worst_fp = max(worst_fp, abs(closed - system_lst_fixed_point(model, s).system_lst))
                partial = [system_lst_scenario_sum(model, s, k) for k in ks]
                for k, part in zip(ks, partial):
                    if abs(closed - part.value) > part.abs_error_estimate:
                        bound_violations.append((idx, s, k))
                for a, b in zip(partial, partial[1:]):
                    if b.value < a.value:
                        monotone_violations.append((idx, s))
        info["detail"] = (f"max |closed - fp| = {worst_fp:.2e}, tail-bound violations "
                          f"{len(bound_violations)}, monotonicity violations {len(monotone_violations)}")
        assert worst_fp <= 1e-10
        assert not bound_violations, bound_violations[:5]
        assert not monotone_violations, monotone_violations[:5]


def test_criterion_3_normalisation_and_monotonicity():
    with criterion(3, "L(0) = 1 and L nonincreasing", 5.0) as info:
        s_grid = [0.0] + list(np.geomspace(1e-3, 50.0, 40))
        tested = 0
        worst_norm = 0.0
        rises = []
        for idx, model in enumerate([GOLDEN] + random_models(200, 11)):
            if continuation_probability(model) >= 1.0 - 1e-6:
                continue
            tested += 1
            values = [system_lst_closed(model, float(s)).value for s in s_grid]
            worst_norm = max(worst_norm, abs(values[0] - 1.0))
            for a, b in zip(values, values[1:]):
                if b > a:
                    rises.append((idx, b - a))
        info["detail"] = (f"{tested} models, max |L(0) - 1| = {worst_norm:.2e}, "
                          f"increases {len(rises)}")
        assert tested >= 100
        assert worst_norm <= 1e-9
        assert not rises, rises[:5]


def test_criterion_4_mttf_golden():
    with criterion(4, "moment(1) = 3, moment(2) = 16", 1.0) as info:
        m1 = moment(GOLDEN, 1)
        m2 = moment(GOLDEN, 2)
        info["detail"] = f"moment(1) = {m1:.9f}, moment(2) = {m2:.7f}"
        assert abs(m1 - 3.0) <= 1e-6
        assert abs(m2 - 16.0) <= 1e-4


def test_criterion_5_inversion_accuracy():
    with criterion(5, "survival vs two-exponential formula on t = 0.25..5", 1.0) as info:
        ts = [0.25 * i for i in range(1, 21)]
        worst = max(abs(survival(GOLDEN, t).survival - golden_survival(t)) for t in ts)
        info["detail"] = f"max abs error {worst:.2e}"
        assert worst <= 1e-3


def test_criterion_6_simulator_cross_validation():
    with criterion(6, "simulator vs analytic at n = 1e5", 10.0) as info:
        summ = estimate_mean(GOLDEN, N_MC, SEED)
        z_mean = (summ.mean - 3.0) / summ.std_error
        lst = estimate_lst(GOLDEN, 1.0, N_MC, SEED)
        z_lst = (lst.estimate - 0.2) / lst.std_error
        ts = [0.5 * i for i in range(1, 11)]
        worst_ratio = 0.0
        for t, est in zip(ts, estimate_survival(GOLDEN, ts, N_MC, SEED)):
            allowed = max(4 * est.std_error, 2e-3)
            worst_ratio = max(worst_ratio, abs(est.fraction - survival(GOLDEN, t).survival) / allowed)
        info["detail"] = (f"z(mean) = {z_mean:+.2f}, z(lst) = {z_lst:+.2f}, "
                          f"worst survival gap / allowance = {worst_ratio:.2f}")
        assert abs(z_mean) <= 4
        assert abs(z_lst) <= 4
        assert worst_ratio <= 1


def _cli_bytes(args):
    fd, path = tempfile.mkstemp(suffix=".out")
    os.close(fd)
    try:
        status = cli.main(args + ["--out", path])
        with open(path, "rb") as fh:
            return status, fh.read()
    finally:
        os.unlink(path)


def test_criterion_7_determinism():
    with criterion(7, "byte-identical simulate/compare, serial and parallel", 20.0) as info:
        model_flags = ["--work1", "exp(1.0)", "--work2", "exp(1.0)",
                       "--repair1", "exp(1.0)", "--repair2", "exp(1.0)"]
        checked = []
        for command in ("simulate", "compare"):
            base = [command, *model_flags, "--n", str(N_MC), "--seed", "12345"]
            first = _cli_bytes(base)
            second = _cli_bytes(base)
            parallel = _cli_bytes(base + ["--workers", "4"])
            assert first[0] == 0, f"{command} exit status {first[0]}"
            assert first == second, f"{command}: two serial runs differ"
            assert first == parallel, f"{command}: serial and parallel runs differ"
            checked.append(f"{command} {len(first[1])} bytes")
        info["detail"] = ", ".join(checked) + " identical"


def test_criterion_8_error_paths():
    with criterion(8, "non-terminating exit 3, tie counts as failure", 1.0) as info:
        args = ["moments", "--work1", "exp(1.0)", "--work2", "exp(1.0)",
                "--repair1", "det(0)", "--repair2", "det(0)"]
        status, err = _capture_stderr(lambda: cli.main(args))
        tie = SystemModel(Deterministic(1.0), Deterministic(1.0), Deterministic(1.0), Deterministic(1.0))
        life = simulate_lifetime(tie, np.random.default_rng(0))
        info["detail"] = f"exit {status}, tie lifetime {life.lifetime!r}"
        assert status == 3
        assert "non-terminating system" in err
        assert life.lifetime == 2.0 and not life.censored


def _capture_stderr(fn):
    buf = io.StringIO()
    with redirect_stderr(buf):
        status = fn()
    return status, buf.getvalue()


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for test in tests:
        try:
            test()
        except Exception:  # noqa: BLE001 - the line is already printed
            failed += 1
    print(f"{len(tests) - failed}/{len(tests)} criteria passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
