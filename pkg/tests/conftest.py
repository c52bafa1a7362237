import itertools

import numpy as np
import pytest

from vesselkit.imgcore import as_padding, pad


def _samples(img, se, padding, i, j, sign):
    """Values read at ``p + sign * offset``; replicate skips off-image samples."""
    h, w = img.shape
    if as_padding(padding).kind == "replicate" and (0, 0) in se:
        for dx, dy in se.offsets:
            r, c = i - sign * dy, j + sign * dx
            if 0 <= r < h and 0 <= c < w:
                yield img[r, c]
        return
    m = se.extent
    P = pad(img, m, padding)
    for dx, dy in se.offsets:
        yield P[i + m - sign * dy, j + m + sign * dx]


def brute_erode(img, se, padding="replicate"):
    """Per-pixel min over ``p + offset``, one pixel at a time."""
    out = np.empty_like(img)
    for i, j in itertools.product(*map(range, img.shape)):
        out[i, j] = min(_samples(img, se, padding, i, j, 1))
    return out


def brute_dilate(img, se, padding="replicate"):
    """Per-pixel max over ``p - offset``."""
    out = np.empty_like(img)
    for i, j in itertools.product(*map(range, img.shape)):
        out[i, j] = max(_samples(img, se, padding, i, j, -1))
    return out


def brute_open(img, se, padding="replicate"):
    return brute_dilate(brute_erode(img, se, padding), se, padding)


def brute_close(img, se, padding="replicate"):
    return brute_erode(brute_dilate(img, se, padding), se, padding)


def mann_whitney_auc(scores, labels):
    """Exhaustive pairwise AUC: P(pos > neg) + 0.5 P(pos == neg)."""
    pos = [s for s, t in zip(scores, labels) if t]
    neg = [s for s, t in zip(scores, labels) if not t]
    wins = sum((p > n) + 0.5 * (p == n) for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Log one acceptance line and fail the calling test when ``ok`` is false."""
    ACCEPTANCE[criterion] = (bool(ok), detail)
    assert ok, f"criterion {criterion}: {detail}"


def record_skip(criterion: int, reason: str) -> None:
    ACCEPTANCE[criterion] = (None, reason)
    pytest.skip(reason)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
