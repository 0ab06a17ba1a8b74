import numpy as np
import pytest

from oracles import (
    canny_mask_scalar,
    glcm_contrast_scalar,
    high_frequency_bin_fraction,
    laplacian_mean_square_scalar,
    sobel_mean_magnitude_scalar,
    srgb_to_lab_l_scalar,
)
from synth import constant_video, landmark_payload, make_video

from fef.errors import EmptyRegion, NoFaceDetected
from fef.facetrack import build_face_track
from fef.frames import sample_clips
from fef.metrics import (
    boundary_artifact,
    canny_edge_mask,
    compute_integrity,
    delta_blur,
    delta_color,
    delta_texture,
    edge_density,
    frame_metrics,
    freq_ratio,
    glcm_contrast,
    gradient_mean,
    lab_stats,
    laplacian_blur,
)


def track_from_payload(payload, dims):
    from fef.facetrack import FaceBox, FaceRecord, LandmarkFrame

    frames = []
    for entry in payload["frames"]:
        faces = [
            FaceRecord(
                box=FaceBox(*face["box"]),
                points={k: tuple(v) for k, v in face["points"].items()},
                confidence=face["confidence"],
            )
            for face in entry["faces"]
        ]
        frames.append(LandmarkFrame(frame_index=entry["frame_index"], faces=faces))
    return build_face_track(frames, dims)


# --- laplacian blur ----------------------------------------------------------


def test_laplacian_blur_constant_is_zero():
    assert laplacian_blur(np.full((12, 12), 128.0)) == 0.0


def test_laplacian_blur_center_impulse():
    img = np.zeros((3, 3))
    img[1, 1] = 255
    assert laplacian_blur(img) == pytest.approx(144500.0, abs=1e-9)


def test_laplacian_blur_checkerboard_exceeds_blurred():
    yy, xx = np.mgrid[0:16, 0:16]
    board = ((yy + xx) % 2 * 255).astype(np.float64)
    # crude blur: average each pixel with its 4 neighbors (replicated)
    padded = np.pad(board, 1, mode="edge")
    blurred = (
        padded[1:-1, 1:-1] + padded[:-2, 1:-1] + padded[2:, 1:-1]
        + padded[1:-1, :-2] + padded[1:-1, 2:]
    ) / 5.0
    assert laplacian_blur(board) > laplacian_blur(blurred) > 0.0


def test_laplacian_blur_matches_convolution_oracle():
    rng = np.random.default_rng(31)
    for _ in range(25):
        h, w = rng.integers(1, 17, size=2)
        img = rng.integers(0, 256, size=(h, w)).astype(np.float64)
        assert laplacian_blur(img) == pytest.approx(
            laplacian_mean_square_scalar(img), abs=1e-6
        )


def test_laplacian_blur_empty():
    with pytest.raises(EmptyRegion):
        laplacian_blur(np.zeros((0, 4)))


# --- LAB statistics ---------------------------------------------------------


def test_lab_stats_black():
    crop = np.zeros((5, 5, 3), dtype=np.uint8)
    mu, sigma = lab_stats(crop)
    assert mu == pytest.approx(0.0, abs=1e-12)
    assert sigma == 0.0


def test_lab_stats_constant_color_sigma_zero():
    crop = np.full((4, 6, 3), (37, 140, 220), dtype=np.uint8)
    _, sigma = lab_stats(crop)
    assert sigma == pytest.approx(0.0, abs=1e-9)


def test_lab_stats_pure_red_matches_scalar_oracle():
    crop = np.zeros((3, 3, 3), dtype=np.uint8)
    crop[..., 0] = 255
    mu, _ = lab_stats(crop)
    assert mu == pytest.approx(srgb_to_lab_l_scalar(255, 0, 0), abs=1e-9)
    assert mu == pytest.approx(53.24079414130722, abs=1e-6)


def test_lab_stats_random_pixels_match_scalar_oracle():
    rng = np.random.default_rng(5)
    pixels = rng.integers(0, 256, size=(8, 3))
    crop = pixels.reshape(1, 8, 3).astype(np.uint8)
    expected = [srgb_to_lab_l_scalar(*map(int, p)) for p in pixels]
    mu, sigma = lab_stats(crop)
    assert mu == pytest.approx(float(np.mean(expected)), abs=1e-9)
    assert sigma == pytest.approx(float(np.std(expected)), abs=1e-9)


# --- GLCM contrast --------------------------------------------------------


def test_glcm_constant_is_zero():
    assert glcm_contrast(np.full((6, 6), 200.0)) == 0.0


def test_glcm_two_by_two_alternating():
    assert glcm_contrast(np.array([[0, 255], [0, 255]], dtype=float)) == pytest.approx(225.0)


def test_glcm_one_by_four():
    img = np.array([[0, 0, 255, 255]], dtype=float)
    assert glcm_contrast(img) == pytest.approx(glcm_contrast_scalar(img))
    assert glcm_contrast(img) == pytest.approx(75.0)


def test_glcm_matches_pair_enumeration_oracle():
    rng = np.random.default_rng(17)
    for _ in range(60):
        h = int(rng.integers(1, 9))
        w = int(rng.integers(2, 9))
        img = rng.integers(0, 256, size=(h, w)).astype(np.float64)
        assert glcm_contrast(img) == pytest.approx(glcm_contrast_scalar(img), abs=1e-9)


def test_glcm_too_narrow():
    with pytest.raises(EmptyRegion):
        glcm_contrast(np.zeros((4, 1)))


# --- gradient intensity -----------------------------------------------------


def test_gradient_constant_is_zero():
    assert gradient_mean(np.full((8, 8), 99.0)) == 0.0


def test_gradient_horizontal_ramp():
    ramp = np.tile(np.arange(8, dtype=np.float64), (8, 1))
    assert gradient_mean(ramp) == pytest.approx(7.0, abs=1e-9)
    assert gradient_mean(ramp) == pytest.approx(sobel_mean_magnitude_scalar(ramp), abs=1e-9)


def test_gradient_matches_convolution_oracle():
    rng = np.random.default_rng(23)
    for _ in range(25):
        h, w = rng.integers(3, 17, size=2)
        img = rng.integers(0, 256, size=(h, w)).astype(np.float64)
        assert gradient_mean(img) == pytest.approx(sobel_mean_magnitude_scalar(img), abs=1e-6)


def test_gradient_rotation_invariant():
    rng = np.random.default_rng(29)
    img = rng.integers(0, 256, size=(12, 12)).astype(np.float64)
    assert gradient_mean(np.rot90(img)) == pytest.approx(gradient_mean(img), abs=1e-9)


def test_gradient_offset_invariant():
    rng = np.random.default_rng(37)
    img = rng.integers(50, 150, size=(10, 10)).astype(np.float64)
    assert gradient_mean(img + 30.0) == pytest.approx(gradient_mean(img), abs=1e-9)


def test_gradient_too_small():
    with pytest.raises(EmptyRegion):
        gradient_mean(np.zeros((2, 8)))


# --- edge density ------------------------------------------------------------


def test_edge_density_constant_is_zero():
    assert edge_density(np.full((16, 16), 77.0)) == 0.0


def test_edge_density_bounded():
    rng = np.random.default_rng(41)
    for _ in range(50):
        img = rng.integers(0, 256, size=(12, 12)).astype(np.float64)
        assert 0.0 <= edge_density(img) <= 1.0


def test_edge_density_step_matches_reference_canny():
    img = np.zeros((32, 32))
    img[:, 16:] = 255.0
    expected_mask = canny_mask_scalar(img)
    assert np.array_equal(canny_edge_mask(img), expected_mask)
    assert edge_density(img) == pytest.approx(expected_mask.sum() / 1024.0, abs=1e-12)
    assert expected_mask.sum() > 0


def test_canny_mask_matches_reference_on_random_images():
    rng = np.random.default_rng(43)
    for _ in range(10):
        img = rng.integers(0, 256, size=(10, 10)).astype(np.float64)
        assert np.array_equal(canny_edge_mask(img), canny_mask_scalar(img))


# --- frequency ratio ---------------------------------------------------------


def test_freq_ratio_constant_is_zero():
    assert freq_ratio(np.full((8, 8), 123.0)) == pytest.approx(0.0, abs=1e-12)


def test_freq_ratio_impulse_equals_bin_fraction():
    for size in range(4, 17):
        img = np.zeros((size, size))
        img[1 % size, 2 % size] = 255.0
        expected = high_frequency_bin_fraction(size, size)
        assert freq_ratio(img) == pytest.approx(expected, abs=1e-9)


def test_freq_ratio_all_zero_is_zero():
    assert freq_ratio(np.zeros((8, 8))) == 0.0


def test_freq_ratio_bounded():
    rng = np.random.default_rng(47)
    for _ in range(50):
        h, w = rng.integers(2, 20, size=2)
        img = rng.integers(0, 256, size=(h, w)).astype(np.float64)
        assert 0.0 <= freq_ratio(img) <= 1.0


# --- deltas -----------------------------------------------------------------


def test_delta_blur_cases():
    assert delta_blur(3.0, 3.0) == 0.0
    assert delta_blur(5.0, 3.0) == 2.0
    assert delta_blur(3.0, 5.0) == 2.0


def test_delta_color_cases():
    assert delta_color((50.0, 10.0), (50.0, 10.0)) == 0.0
    assert delta_color((50.0, 10.0), (40.0, 5.0)) == 15.0
    assert delta_color((40.0, 5.0), (50.0, 10.0)) == 15.0


def test_delta_texture_cases():
    assert delta_texture(225.0, 225.0) == 0.0
    assert delta_texture(225.0, 25.0) == 200.0
    assert delta_texture(25.0, 225.0) == 200.0


def test_deltas_satisfy_triangle_inequality():
    rng = np.random.default_rng(53)
    for _ in range(200):
        a, b, c = rng.uniform(0, 100, size=3)
        assert delta_blur(a, c) <= delta_blur(a, b) + delta_blur(b, c) + 1e-12


def test_boundary_artifact_cases():
    def fm(gradient, edge, freq):
        from fef.metrics import FrameMetrics

        return FrameMetrics(
            frame_index=0, blur_sigma=0.0, lab_mu=0.0, lab_sigma=0.0,
            glcm_contrast=0.0, gradient_mean=gradient, edge_density=edge, freq_ratio=freq,
        )

    a = fm(1.0, 0.5, 0.2)
    assert boundary_artifact(a, a) == 0.0
    b = fm(1.5, 0.6, 0.25)
    assert boundary_artifact(a, b) == pytest.approx(0.65)
    assert boundary_artifact(a, b) == pytest.approx(
        abs(1.0 - 1.5) + abs(0.5 - 0.6) + abs(0.2 - 0.25)
    )


# --- compute_integrity --------------------------------------------------------


def test_integrity_identical_frames_zero_law():
    seq = constant_video(n_frames=9)
    clips = sample_clips(seq, 1, 9)
    track = track_from_payload(landmark_payload(9), seq.dims)
    metrics = compute_integrity(seq, clips, track)
    assert len(metrics.per_pair) == 8
    for pair in metrics.per_pair:
        assert pair.delta_blur == 0.0
        assert pair.delta_color == 0.0
        assert pair.delta_texture == 0.0
        assert pair.delta_boundary == 0.0
    assert metrics.summary["delta_blur"]["max"] == 0.0


def test_integrity_gap_skips_adjacent_pairs():
    seq = constant_video(n_frames=9)
    clips = sample_clips(seq, 1, 9)
    payload = landmark_payload(9)
    payload["frames"][4]["faces"] = []
    track = track_from_payload(payload, seq.dims)
    metrics = compute_integrity(seq, clips, track)
    pairs = [p.pair for p in metrics.per_pair]
    assert (3, 4) not in pairs and (4, 5) not in pairs
    assert len(pairs) == 6


def test_integrity_never_pairs_across_clips():
    seq = constant_video(n_frames=18)
    clips = sample_clips(seq, 2, 9)
    track = track_from_payload(landmark_payload(18), seq.dims)
    metrics = compute_integrity(seq, clips, track)
    assert len(metrics.per_pair) == 16
    assert (8, 9) not in [p.pair for p in metrics.per_pair]


def test_integrity_no_faces_at_all():
    seq = constant_video(n_frames=9)
    clips = sample_clips(seq, 1, 9)
    payload = landmark_payload(9)
    for frame in payload["frames"]:
        frame["faces"] = []
    track = track_from_payload(payload, seq.dims)
    with pytest.raises(NoFaceDetected):
        compute_integrity(seq, clips, track)


def test_integrity_worker_counts_agree():
    seq = make_video("fake", n_frames=18, seed=3)
    clips = sample_clips(seq, 2, 9)
    track = track_from_payload(landmark_payload(18), seq.dims)
    serial = compute_integrity(seq, clips, track, max_workers=1)
    threaded = compute_integrity(seq, clips, track, max_workers=8)
    assert serial == threaded


def test_frame_metrics_fields_populated():
    seq = make_video("real", n_frames=1, seed=9)
    crop = seq.frames[0][24:72, 28:68]
    m = frame_metrics(crop, 0)
    assert m.blur_sigma > 0
    assert 0.0 <= m.edge_density <= 1.0
    assert 0.0 <= m.freq_ratio <= 1.0
    assert m.glcm_contrast >= 0 and m.gradient_mean >= 0
