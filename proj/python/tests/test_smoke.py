import math

import numpy as np
import pytest

import tepose


def test_dims():
    assert tepose.PARAM_DIM == 85
    assert tepose.PARAM_DIM == tepose.CAMERA_DIM + tepose.POSE_DIM + tepose.SHAPE_DIM
    assert tepose.num_joints() == 14


def test_graph_ops():
    edges = [(0, 1), (1, 2), (2, 3)]
    dist = tepose.hop_distance(4, edges)
    assert dist[0, 3] == 3
    a1 = tepose.k_adjacency(dist, 1)
    assert a1[0, 1] == 1.0 and a1[0, 0] == 1.0 and a1[0, 2] == 0.0
    norm = tepose.normalize_adjacency(a1)
    assert norm[0, 0] == pytest.approx(1.0 / 2.0)
    scales = tepose.adjacency_scales(4, edges, 3)
    assert len(scales) == 4


def test_kinematics_and_projection():
    pose = np.zeros(tepose.POSE_DIM)
    shape = np.zeros(tepose.SHAPE_DIM)
    joints = tepose.fk_joints(pose, shape)
    assert joints.shape == (14, 3)
    assert np.allclose(joints[0], 0.0)  # root at the origin
    proj = tepose.project_2d(joints, np.array([2.0, 0.1, -0.1]))
    assert proj.shape == (14, 2)
    assert np.allclose(proj[:, 0], 2.0 * joints[:, 0] + 0.1)

    rot = tepose.rodrigues(np.array([0.0, 0.0, math.pi / 2.0]))
    assert np.allclose(rot @ np.array([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0])


def test_losses():
    assert tepose.adversarial_loss(0.25) == 0.5625
    assert tepose.discriminator_loss([0.8, 0.6], [0.3]) == pytest.approx(0.19)
    out = tepose.total_loss(0.5, l_adv=0.25)
    assert out["total"] == 0.75
    with pytest.raises(Exception):
        tepose.total_loss(0.5, has_3d=True)  # missing active component


def test_metrics():
    gt = [np.zeros((2, 3))]
    pred = [np.array([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])]
    assert tepose.mpjpe(pred, gt) == 2.5

    rng = np.random.default_rng(0)
    base = [rng.normal(size=(6, 3))]
    assert tepose.pa_mpjpe(base, base) < 1e-8


def test_synth_and_discriminator():
    motion = tepose.generate_motion(seed=3, length=10)
    assert len(motion["params"]) == 10
    assert motion["joints3d"][0].shape == (14, 3)

    disc = tepose.Discriminator([3, 4, 6, 8], seed=1)
    score = disc.score(motion["joints3d"][:6])
    assert math.isfinite(score)


def test_predictor_streaming():
    config = "\n".join(
        [
            "seed = 2",
            "feature_dim = 8",
            "hidden = 12",
            "regressor_hidden = 12",
            "disc_channels = 3,4,6,8",
            "gcn_scales = 3",
            "g3d_scales = 2",
        ]
    )
    predictor = tepose.Predictor(config)
    rng = np.random.default_rng(1)
    feats = [rng.normal(size=8) for _ in range(12)]
    preds = predictor.predict(feats)
    assert len(preds) == 12 - 5  # warm-start window consumes past_frames
    assert preds[0].shape == (tepose.PARAM_DIM,)
    # causal: a prefix replay reproduces the same predictions
    again = predictor.predict(feats[:9])
    assert all(np.array_equal(a, b) for a, b in zip(again, preds))


def test_gradcheck_sample():
    results = tepose.run_gradcheck(seed=1, instances=2)
    assert results and all(r["pass"] for r in results)
