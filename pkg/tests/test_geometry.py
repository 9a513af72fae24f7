import math

import numpy as np
import pytest

from src.geometry import (
    FRAMES, DegenerateAngle, EdgeSet, NotATriangle, NotClassicallyAllowed, TetraConfig,
    angle_bundle, build_tetrahedron, external_dihedrals, frame_for, gram_from_edges,
    is_classically_allowed, measure_edges, plane_angle, triangle_theta, vector_angle,
)
from src.layouts import LayoutError

NINE = FRAMES["9j"]


def _random_edges(rng, frame=NINE):
    """由随机向量 a + b + c + d = 0 得到的边长（必为经典允许区）"""
    a, b, c = (rng.normal(size=3) * 20 for _ in range(3))
    d = -(a + b + c)
    lengths = [np.linalg.norm(v) for v in (a, b, c, d, a + b, b + c)]
    return EdgeSet.from_sequence(frame, lengths)


def test_gram_diagonal():
    edges = EdgeSet.from_sequence(NINE, [101, 123, 88, 64.5, 68.5, 92.5])
    G = gram_from_edges(edges)
    assert np.allclose(np.diag(G), [101 ** 2, 68.5 ** 2, 64.5 ** 2])
    assert np.allclose(G, G.T)


def test_reconstruction_reproduces_edges_and_volume():
    rng = np.random.default_rng(7)
    for _ in range(20):
        edges = _random_edges(rng)
        config = build_tetrahedron(edges)
        measured = measure_edges(config)
        assert np.allclose(measured.as_tuple(), edges.as_tuple(), rtol=1e-9)
        # 闭合条件
        v = config.vectors
        assert np.allclose(v["j1"] + v["j2"] + v["j4"] + v["j5"], 0.0, atol=1e-9)
        assert np.allclose(v["j12"], v["j1"] + v["j2"], atol=1e-9)
        assert np.allclose(v["j24"], v["j2"] + v["j4"], atol=1e-9)
        # det G = (6V)^2，并且定向使 6V < 0
        det = np.linalg.det(gram_from_edges(edges))
        assert det == pytest.approx((6 * config.volume) ** 2, rel=1e-8)
        assert config.signed_volume < 0


def test_gram_determinant_matches_volume_on_many_edge_sets():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        a, b, c = (rng.normal(size=3) * 20 for _ in range(3))
        six_v = abs(float(np.dot(a, np.cross(b, c))))
        # 接近扁平的四面体条件数过大，留给焦散线相关测试
        if six_v < 0.05 * np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c):
            continue
        lengths = [np.linalg.norm(v) for v in (a, b, c, a + b + c, a + b, b + c)]
        edges = EdgeSet.from_sequence(NINE, lengths)
        det = np.linalg.det(gram_from_edges(edges))
        assert det == pytest.approx(six_v ** 2, rel=1e-9)
        assert 6 * build_tetrahedron(edges).volume == pytest.approx(six_v, rel=1e-9)
        checked += 1


def test_regular_tetrahedron_dihedrals():
    edges = EdgeSet.from_sequence(NINE, [5.0] * 6)
    config = build_tetrahedron(edges)
    psi = external_dihedrals(config)
    expected = math.pi - math.acos(1.0 / 3.0)
    for value in psi.values():
        assert value == pytest.approx(expected, abs=1e-12)
    assert config.volume == pytest.approx(5.0 ** 3 / (6 * math.sqrt(2)), rel=1e-12)


def test_theta_two_ways():
    rng = np.random.default_rng(11)
    for _ in range(10):
        edges = _random_edges(rng)
        b = angle_bundle(build_tetrahedron(edges), "9j1s")
        J1, J2, J4, J5, J12, J24 = edges.as_tuple()
        cos_theta = (J5 ** 2 + J2 ** 2 - J12 ** 2 - J24 ** 2) / (2 * J1 * J4)
        assert math.cos(b.theta) == pytest.approx(cos_theta, abs=1e-12)
        assert 0.0 <= b.phi1 <= math.pi and 0.0 <= b.phi4 <= math.pi


def test_mirror_image_gives_same_angles():
    rng = np.random.default_rng(3)
    for kind in ("9j", "12j", "15j"):
        frame = frame_for(kind)
        config = build_tetrahedron(_random_edges(rng, frame))
        flip = np.array([1.0, -1.0, 1.0])
        mirrored = TetraConfig(frame, {k: v * flip for k, v in config.vectors.items()}, -config.signed_volume)
        b1, b2 = angle_bundle(config, kind), angle_bundle(mirrored, kind)
        for label in frame.labels:
            assert b1.psi[label] == pytest.approx(b2.psi[label], abs=1e-12)
        for name in ("phi1", "phi4", "phi2", "phi3", "phi1p", "phi4p", "theta", "theta1", "theta2"):
            x, y = getattr(b1, name), getattr(b2, name)
            if x is None:
                assert y is None
            else:
                assert x == pytest.approx(y, abs=1e-12)


def test_fifteen_j_internal_angles():
    rng = np.random.default_rng(5)
    frame = frame_for("15j3s")
    config = build_tetrahedron(_random_edges(rng, frame))
    b = angle_bundle(config, "15j")
    assert b.phi1_int == pytest.approx(math.pi - b.psi["j1"])
    assert b.phi12_int == pytest.approx(math.pi - b.psi["j12"])
    assert b.theta2 == pytest.approx(vector_angle(config["j1"], config["j12"]))


def test_twelve_j_frame_uses_its_own_roles():
    roles = {"j2": 10, "j4": 11, "j3": 12, "j6": 13, "j24": 14, "j34": "29/2", "s1": "1/2"}
    edges = EdgeSet.from_quantum_numbers("12j2s", roles)
    assert edges.frame is FRAMES["12j"]
    assert edges["j34"] == 15.0
    assert edges.as_tuple() == (10.5, 11.5, 12.5, 13.5, 14.5, 15.0)


def test_face_violation_is_not_allowed():
    edges = EdgeSet.from_sequence(NINE, [1.0, 1.0, 2.0, 2.0, 3.0, 2.0])
    assert not is_classically_allowed(edges)
    with pytest.raises(NotClassicallyAllowed):
        build_tetrahedron(edges)


def test_flat_configuration_is_not_allowed():
    a, b, c = np.array([3.0, 0, 0]), np.array([0, 4.0, 0]), np.array([-1.0, 2.0, 0])
    d = -(a + b + c)
    edges = EdgeSet.from_sequence(NINE, [np.linalg.norm(v) for v in (a, b, c, d, a + b, b + c)])
    G = gram_from_edges(edges)
    assert abs(np.linalg.det(G)) < 1e-9 * np.trace(G) ** 3
    assert not is_classically_allowed(edges)


def test_degenerate_angles():
    p = np.array([1.0, 0.0, 0.0])
    with pytest.raises(DegenerateAngle):
        plane_angle(p, 2 * p, np.array([0.0, 1.0, 0.0]))
    q, r = np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    assert plane_angle(p, q, r) == pytest.approx(math.pi / 2)
    assert plane_angle(p, q, q) == pytest.approx(math.pi)


def test_triangle_theta():
    assert triangle_theta(1.0, 1.0, 1.0) == pytest.approx(2 * math.pi / 3)
    assert triangle_theta(3.0, 4.0, 5.0) == pytest.approx(math.pi / 2)
    with pytest.raises(NotATriangle):
        triangle_theta(1.0, 1.0, 3.0)


def test_edge_set_validation():
    with pytest.raises(ValueError):
        EdgeSet.from_sequence(NINE, [1, 1, 1, 1, 1])
    with pytest.raises(ValueError):
        EdgeSet.from_sequence(NINE, [1, 1, 1, 1, 1, 0])
    with pytest.raises(LayoutError):
        frame_for("nonsense")
