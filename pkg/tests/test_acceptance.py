"""Acceptance criteria. Each test registers one criterion line for the summary.

Set ``LBF_Y4M=/path/to/clip.y4m`` to run criterion 10 on a real luma clip
(e.g. a 352x288, 44-frame sequence); otherwise a synthetic clip of that size
is used.
"""

import math
import os
import random
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
import synthetic
from lbfvideo.bma import BmaConfig, block_grid, diamond_search, full_search
from lbfvideo.cli import sweep_rows
from lbfvideo.codec import VideoSequence, decode_video, deserialize, encode_video, serialize
from lbfvideo.errors import CorruptInput, WrongFormat
from lbfvideo.metrics import SymbolHistogram, entropy, psnr
from lbfvideo.trajectory import FitConfig, decode_trajectory, fit_trajectory
from lbfvideo.video_io import read_y4m

LAMBDAS = (0, 1, 5, 25, 100)
SWEEP = (5, 10, 20, 50, 100, 200)


@pytest.fixture(scope="module")
def corpus():
    """200 random videos, each encoded and decoded at every lambda."""
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    out = []
    for _ in range(200):
        video = VideoSequence(synthetic.random_video(rng))
        delta = int(rng.integers(1, 16))
        runs = {}
        for lam in LAMBDAS:
            enc = encode_video(video, FitConfig(lam, delta))
            runs[lam] = (enc, decode_video(enc))
        out.append((video, runs))
    return out, time.perf_counter() - t0


def _segment_checks(video, enc, dec):
    """Per pixel: segment SSEs, segment lengths, total SSE, segment count (from decoded output)."""
    orig = video.trajectories().astype(np.int64)
    rec = dec.trajectories().astype(np.int64)
    err = ((orig - rec) ** 2).sum(axis=2)
    csum = np.concatenate([np.zeros((len(err), 1), dtype=np.int64), np.cumsum(err, axis=1)], axis=1)
    masks = enc.masks.T
    for p in range(len(err)):
        kps = np.flatnonzero(masks[p])
        s, e = kps[:-1], kps[1:]
        yield csum[p, e + 1] - csum[p, s], e - s + 1, int(csum[p, -1]), len(kps) - 1


def test_ac01_segment_error_bound(corpus, criterion):
    criterion("AC01 segment error bound on 200 random videos, lambda in {0,1,5,25,100}")
    videos, seconds = corpus
    checked = 0
    for video, runs in videos:
        for lam, (enc, dec) in runs.items():
            for sse, length, _, _ in _segment_checks(video, enc, dec):
                # sse / length <= lam, in exact integer form
                assert (sse <= lam * length).all()
                checked += len(sse)
    assert checked > 10000
    assert seconds < 30, f"encode+decode of the corpus took {seconds:.1f} s"


def test_ac02_lossless_at_zero(corpus, criterion):
    criterion("AC02 lossless roundtrip at lambda = 0")
    videos, _ = corpus
    for video, runs in videos:
        assert runs[0][1] == video


def test_ac03_monotone_refinement(corpus, criterion):
    criterion("AC03 keypixels(lambda_a) subset of keypixels(lambda_b) for lambda_a >= lambda_b")
    videos, _ = corpus
    for video, runs in videos:
        for lo, hi in zip(LAMBDAS, LAMBDAS[1:]):
            m_lo, m_hi = runs[lo][0].masks, runs[hi][0].masks
            assert not (m_hi & ~m_lo).any()
        fracs = [runs[lam][0].keypixel_fraction for lam in LAMBDAS]
        assert all(a >= b for a, b in zip(fracs, fracs[1:]))
    for video, _ in videos[:10]:
        rows = sweep_rows(video, SWEEP, 6, timing=False)
        col = [float(r[3]) for r in rows]
        assert all(a >= b for a, b in zip(col, col[1:]))


def test_ac04_dp_oracle(criterion):
    criterion("AC04 DP-optimal keypixel count <= break-and-fit count on 1000 trajectories")
    rnd = random.Random(7)
    t0 = time.perf_counter()
    for _ in range(1000):
        n = rnd.randint(1, 20)
        if rnd.random() < 0.5:
            traj = [rnd.randint(0, 255) for _ in range(n)]
        else:
            traj = [128]
            for _ in range(n - 1):
                traj.append(min(255, max(0, traj[-1] + rnd.randint(-25, 25))))
        lam = rnd.choice([0, 1, 5, 25, 100, 400])
        delta = rnd.randint(1, 20)
        result = fit_trajectory(traj, FitConfig(lam, delta))
        pts = oracles.points(traj)
        optimal = oracles.dp_min_keypixels(traj, lam)
        constrained = oracles.dp_min_keypixels(traj, lam, required=oracles.grid(n, delta))
        assert len(optimal) <= len(constrained) <= len(result)
        for kps in (optimal, constrained, list(result.keypixels)):
            assert all(oracles.seg_mse(pts, s, e) <= lam for s, e in zip(kps, kps[1:]))
    assert time.perf_counter() - t0 < 60


def test_ac05_worked_example(criterion):
    criterion("AC05 worked example [0,10,20,30,20,10,0], delta 6, lambda 1 -> {0,3,6}")
    traj = [0, 10, 20, 30, 20, 10, 0]
    result = fit_trajectory(traj, FitConfig(1, 6))
    assert result.keypixels == (0, 3, 6)
    assert list(result.keypixels) == oracles.break_and_fit(traj, 1, 6)
    # initial segment mse = (100 + 400 + 900 + 400 + 100) / 7 > 1
    assert oracles.seg_mse(oracles.points(traj), 0, 6) == oracles.Fraction(1900, 7)
    assert decode_trajectory(result, 7).tolist() == traj


def test_ac06_metric_identities(criterion):
    criterion("AC06 entropy(uniform 256) = 8, PSNR(65025) = 0, PSNR(100) = 28.13")
    assert abs(entropy(SymbolHistogram.from_stream(np.arange(256))) - 8.0) <= 1e-9
    assert abs(psnr(65025.0) - 0.0) <= 1e-9
    assert abs(psnr(100.0) - 28.13) <= 0.01


def test_ac07_global_error_bound(corpus, criterion):
    criterion("AC07 per-pixel trajectory MSE <= lambda * (n + s - 1) / n")
    videos, _ = corpus
    for video, runs in videos:
        n = video.frame_count
        for lam, (enc, dec) in runs.items():
            for _, _, total, s in _segment_checks(video, enc, dec):
                # total / n <= lam * (n + s - 1) / n, exact integers
                assert total <= lam * (n + s - 1)


def test_ac08_serialization(corpus, criterion):
    criterion("AC08 LBF1 roundtrip, byte stability, corrupt-input rejection")
    videos, _ = corpus
    for video, runs in videos[:50]:
        for enc, _ in runs.values():
            blob = serialize(enc)
            assert serialize(enc) == blob
            assert deserialize(blob) == enc
            assert serialize(deserialize(blob)) == blob
    blob = serialize(videos[0][1][5][0])
    with pytest.raises(WrongFormat):
        deserialize(b"XBF1" + blob[4:])
    for cut in (0, 3, 10, 31, len(blob) - 1):
        with pytest.raises(CorruptInput):
            deserialize(blob[:cut])


def test_ac09_bma_properties(criterion):
    criterion("AC09 full search optimal, DS >= FS in MAE, translations recovered")
    rng = np.random.default_rng(99)
    cfg = BmaConfig(block_size=8, search_range=3)
    rows, cols = block_grid(32, 32, 8)
    for _ in range(20):
        ref = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        if rng.random() < 0.5:
            cur = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        else:
            tx, ty = rng.integers(-3, 4, 2)
            cur = np.clip(np.roll(ref, (ty, tx), axis=(0, 1)) + rng.integers(-8, 9, (32, 32)), 0, 255)
        fs = full_search(ref, cur, cfg)
        ds = diamond_search(ref, cur, cfg)
        for bi, y0 in enumerate(rows):
            for bj, x0 in enumerate(cols):
                cands = oracles.block_search(ref.tolist(), cur.tolist(), y0, x0, 8, 8, 3)
                assert fs.mae[bi, bj] * 64 == pytest.approx(min(cands.values()), abs=1e-9)
                assert all(fs.mae[bi, bj] * 64 <= v + 1e-9 for v in cands.values())
                assert ds.mae[bi, bj] >= fs.mae[bi, bj] - 1e-12
        assert (np.abs(fs.vectors) <= 3).all() and (np.abs(ds.vectors) <= 3).all()

    ref = rng.integers(0, 256, (32, 32), dtype=np.uint8)
    for ty in range(-3, 4):
        for tx in range(-3, 4):
            cur = np.roll(ref, (ty, tx), axis=(0, 1))
            fs = full_search(ref, cur, cfg)
            for bi, y0 in enumerate(rows):
                for bj, x0 in enumerate(cols):
                    if 0 <= y0 - ty <= 24 and 0 <= x0 - tx <= 24:
                        assert tuple(fs.vectors[bi, bj]) == (-tx, -ty)
                        assert fs.mae[bi, bj] == 0.0


def _trend_video():
    path = os.environ.get("LBF_Y4M")
    if path:
        return read_y4m(Path(path).read_bytes())
    return VideoSequence(synthetic.talking_head(352, 288, 44))


def test_ac10_rate_distortion_trend(criterion):
    criterion("AC10 entropy and PSNR non-increasing over lambda sweep; 352x288x44 encode < 10 s (x2)")
    video = _trend_video()
    t0 = time.perf_counter()
    encode_video(video, FitConfig(100, 12), workers=0)
    seconds = time.perf_counter() - t0
    rows = sweep_rows(video, SWEEP, 12, timing=False)
    ent = [float(r[1]) for r in rows]
    db = [float(r[2]) for r in rows]
    assert all(a >= b for a, b in zip(ent, ent[1:])), ent
    assert all(a >= b for a, b in zip(db, db[1:])), db
    assert all(0 < v < math.inf for v in db)
    budget = 10.0 * 2 * (video.width * video.height * video.frame_count) / (352 * 288 * 44)
    assert seconds < max(budget, 20.0)
