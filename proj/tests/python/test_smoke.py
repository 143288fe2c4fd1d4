import math
import os
import tempfile

import pytest

import nerfocus as nf


def test_lens_math():
    lens = nf.LensConfig.make(0.2, 0.1, 4.0, 0.004)
    assert lens.image_dist == pytest.approx(0.1 * 4.0 / 4.1)
    assert nf.coc_diameter_scene_point(lens, 4.0) == 0.0
    assert nf.composite_diameter(lens, 2.0, 1.0) == pytest.approx(
        nf.axis_cone_diameter(lens, 2.0, 1.0) + nf.bicone_diameter(lens, 2.0)
    )
    with pytest.raises(Exception):
        nf.LensConfig.make(-1.0, 0.1, 4.0, 0.004)


def test_expected_component_hand_value():
    s, c = nf.expected_component(1.0, 0.25, 0)
    assert s == pytest.approx(math.sin(1.0) * math.exp(-0.125))
    assert c == pytest.approx(math.cos(1.0) * math.exp(-0.125))


def test_ipe_zero_variance_is_plain_encoding():
    vals = nf.integrated_positional_encode([0.4, -0.9, 1.7], [0, 0, 0], 3)
    assert len(vals) == 18
    assert vals[0] == pytest.approx(math.sin(0.4))
    assert vals[1] == pytest.approx(math.cos(0.4))


def test_blur_and_psnr():
    k = nf.gaussian_kernel(7)
    assert sum(k) == pytest.approx(1.0)
    import numpy as np

    rng = np.random.default_rng(0)
    img = rng.random((16, 16, 3), dtype=np.float32)
    blurred = nf.gaussian_blur(img, 7)
    assert blurred.shape == img.shape
    assert blurred.var() < img.var()
    assert nf.psnr(img, img) == math.inf
    assert nf.psnr(img, blurred) < 40.0


def test_end_to_end_tiny(tmp_path):
    data = str(tmp_path / "data")
    nf.generate_dataset("two-planes", n_views=2, size=12, seed=3, out_dir=data)
    assert os.path.exists(os.path.join(data, "manifest.txt"))

    ckpt = str(tmp_path / "m.ckpt")
    losses = nf.train(data, ckpt, steps=2, batch_size=8, seed=1)
    assert len(losses) == 2
    assert all(l > 0 for l in losses)

    img = nf.render(ckpt, data, pose=0, aperture=0.0)
    assert img.shape == (12, 12, 3)
    assert float(img.min()) >= 0.0
    assert float(img.max()) <= 1.0

    out = str(tmp_path / "r.png")
    nf.write_png(out, img)
    back = nf.read_png(out)
    assert nf.psnr(img, back) > 45.0


def test_verify_suite_and_injection_hook():
    ok = nf.run_verify("lens")
    assert len(ok) == 1 and ok[0].passed
    bad = nf.run_verify("grad", tol_scale=1e-9)
    assert not bad[0].passed
