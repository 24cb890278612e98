import numpy as np
import pytest

from diffkin import identify, kinematics, urdf
from diffkin.identify import IdentifyConfig, ParamEstimator, SampleGenerator


def test_recover_fixed_mount(cam_arm):
    res = identify.run_identification(
        cam_arm, "camera", "base", "camera", IdentifyConfig(batch_size=10, seed=0)
    )
    assert res.status == "converged"
    assert res.steps <= 5000
    assert res.final_loss < 1e-8
    np.testing.assert_allclose(res.init_hint, [0.3, 0, 0.1, 0, 0, np.pi / 4], atol=1e-12)
    assert res.param_error.max() < 1e-3
    assert res.pose_error.max() < 1e-3
    assert res.seconds > 0


def test_recover_revolute_parent_joint(cam_arm):
    """Replacing a 1-dof joint: the six parameters absorb its origin."""
    res = identify.run_identification(
        cam_arm, "link2", "base", "camera", IdentifyConfig(batch_size=10, seed=3)
    )
    assert res.status == "converged"
    assert res.param_error.max() < 1e-3
    assert res.pose_error.max() < 1e-3


def test_adam_converges(cam_arm):
    res = identify.run_identification(
        cam_arm,
        "camera",
        "base",
        "camera",
        IdentifyConfig(batch_size=10, optimizer="adam", learning_rate=0.02),
    )
    assert res.status == "converged"
    assert res.param_error.max() < 1e-3


def test_budget_exhausted(cam_arm):
    res = identify.run_identification(
        cam_arm, "camera", "base", "camera", IdentifyConfig(batch_size=4, max_steps=3)
    )
    assert res.status == "budget_exhausted"
    assert res.steps == 3


def test_deterministic_given_seed(cam_arm):
    cfg = IdentifyConfig(batch_size=6, seed=11, max_steps=200)
    a = identify.run_identification(cam_arm, "camera", "base", "camera", cfg)
    b = identify.run_identification(cam_arm, "camera", "base", "camera", cfg)
    np.testing.assert_array_equal(a.params, b.params)
    assert a.steps == b.steps and a.final_loss == b.final_loss


def _dataset(cam_arm, batch_size, seed=0):
    chain = urdf.extract_chain(cam_arm, "base", "camera")
    gen = SampleGenerator(kinematics.FkEngine(chain, batch_size), np.random.default_rng(seed))
    return gen.sample_batch()


def test_loss_zero_at_truth(cam_arm):
    thetas, targets = _dataset(cam_arm, 5)
    est = ParamEstimator(
        cam_arm, "camera", "base", "camera", 5, init_params=[0.3, 0, 0.1, 0, 0, np.pi / 4]
    )
    assert est.loss_value(thetas, targets) < 1e-20


def test_gradient_matches_finite_differences(cam_arm):
    thetas, targets = _dataset(cam_arm, 4, seed=5)
    est = ParamEstimator(cam_arm, "camera", "base", "camera", 4)
    est.params = np.array([0.1, -0.2, 0.05, 0.3, -0.1, 0.5])
    _, grad = est.loss_gradient(thetas, targets)
    h = 1e-6
    for j in range(6):
        saved = est.params[j]
        est.params[j] = saved + h
        up = est.loss_value(thetas, targets)
        est.params[j] = saved - h
        dn = est.loss_value(thetas, targets)
        est.params[j] = saved
        assert grad[j] == pytest.approx((up - dn) / (2 * h), rel=1e-5, abs=1e-9)


def test_gradient_value_matches_loss_value(cam_arm):
    thetas, targets = _dataset(cam_arm, 3, seed=8)
    est = ParamEstimator(cam_arm, "camera", "base", "camera", 3)
    est.params = np.array([0.2, 0.1, -0.3, 0.0, 0.4, -0.2])
    value, _ = est.loss_gradient(thetas, targets)
    assert value == pytest.approx(est.loss_value(thetas, targets), rel=1e-12)


def test_first_step_decreases_loss(cam_arm):
    thetas, targets = _dataset(cam_arm, 8, seed=2)
    est = ParamEstimator(cam_arm, "camera", "base", "camera", 8)
    before = est.loss_value(thetas, targets)
    after, grad_norm = identify.estimator_step(est, thetas, targets)
    assert after < before
    assert grad_norm > 0
    assert est.steps_taken == 1


def test_sample_generator_respects_limits_and_pins(cam_arm):
    chain = urdf.extract_chain(cam_arm, "base", "camera")
    gen = SampleGenerator(
        kinematics.FkEngine(chain, 200), np.random.default_rng(0), zero_dofs=(1,)
    )
    s = gen.joint_samples()
    assert s.shape == (200, 3)
    assert (np.abs(s[:, 0]) <= 2.9).all()
    assert (s[:, 1] == 0.0).all()
    assert (np.abs(s[:, 2]) <= 2.0).all()


def test_make_generator(cam_arm):
    gen = identify.make_generator(cam_arm, "base", "camera", 7, rng_seed=4)
    thetas, poses = gen.sample_batch()
    assert thetas.shape == (7, 3) and poses.shape == (7, 4, 4)
    np.testing.assert_allclose(
        poses, kinematics.forward(gen.engine, thetas.ravel()), atol=0
    )


def test_config_from_mapping_roundtrip():
    cfg = IdentifyConfig.from_mapping(
        {"target_link": "camera", "batch_size": 3, "learning_rate": 0.05, "seed": 9}
    )
    assert cfg.target_link == "camera"
    assert cfg.batch_size == 3
    assert cfg.learning_rate == 0.05
    assert cfg.max_steps == 5000


def test_config_from_mapping_rejects_unknown():
    with pytest.raises(ValueError, match="stepsize"):
        IdentifyConfig.from_mapping({"stepsize": 0.1})


def test_estimator_rejects_off_chain_target(cam_arm):
    with pytest.raises(ValueError, match="not on the chain"):
        ParamEstimator(cam_arm, "camera", "base", "link2", 4)


def test_estimator_rejects_bad_optimizer(cam_arm):
    with pytest.raises(ValueError, match="optimizer"):
        ParamEstimator(cam_arm, "camera", "base", "camera", 4, optimizer="sgd2")


def test_shape_validation(cam_arm):
    thetas, targets = _dataset(cam_arm, 4)
    est = ParamEstimator(cam_arm, "camera", "base", "camera", 4)
    with pytest.raises(ValueError, match="joint values"):
        est.loss_value(np.zeros((4, 5)), targets)
    with pytest.raises(ValueError, match="target poses"):
        est.loss_value(thetas, targets[:2])


def test_num_configurations_overrides_batch_size(cam_arm):
    cfg = IdentifyConfig(batch_size=2, num_configurations=12, max_steps=150)
    res = identify.run_identification(cam_arm, "camera", "base", "camera", cfg)
    # a 12-sample dataset constrains all six parameters
    assert res.params.shape == (6,)
