"""Smoke tests for the anchorattn Python module."""

import math
import os
import tempfile

import numpy as np

import anchorattn as aa


def test_full_coverage_matches_dense():
    head = aa.gen_random(256, 16, 1, 7)[0]
    cfg = aa.BlockConfig(b_q=64, b_kv=64, step=2, theta=1e9)
    sparse_out, stats = aa.anchor_attention(head, cfg)
    dense_out = aa.dense_attention(head)
    assert np.max(np.abs(sparse_out - dense_out)) <= 1e-5
    assert stats.computed_positions == stats.causal_positions
    assert abs(stats.sparsity) < 1e-12


def test_sparse_run_reports_sane_stats():
    head = aa.gen_sink_local(512, 16, 12.0, 128, 3)
    cfg = aa.BlockConfig(b_q=64, b_kv=64, step=2, theta=10.0)
    out, stats = aa.anchor_attention(head, cfg)
    assert out.shape == (512, 16)
    assert 0.0 <= stats.sparsity <= 1.0
    assert stats.computed_positions < stats.causal_positions

    probs = aa.dense_probs(head.q, head.k)
    stripes = aa.identify_stripes(head, cfg)
    mask = aa.union_mask(stripes, cfg, 512)
    captured = aa.recall(mask, probs)
    assert 0.0 <= captured <= 1.0 + 1e-9
    assert aa.sparsity(mask) == stats.sparsity


def test_workload_file_roundtrip():
    heads = aa.gen_random(32, 8, 2, 11)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "w.aqkv")
        aa.write_workload(path, heads)
        back = aa.read_workload(path)
    assert len(back) == 2
    assert np.array_equal(back[0].q, heads[0].q)
    assert np.array_equal(back[1].v, heads[1].v)


def test_baseline_masks():
    head = aa.gen_random(64, 8, 1, 5)[0]
    probs = aa.dense_probs(head.q, head.k)
    full = aa.select_topcdf(probs, 1.0)
    assert full.total_selected() == 64 * 65 // 2
    stream = aa.streaming_mask(64, 1, 8)
    assert math.isclose(aa.recall(aa.SelectionMask.full_causal(64), probs), 1.0,
                        abs_tol=1e-6)
    assert aa.recall(stream, probs) <= 1.0


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
