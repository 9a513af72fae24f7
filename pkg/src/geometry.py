"""
四面体几何
由六条边长（J = j + 1/2）通过 Gram 矩阵重建向量构型，并计算渐近公式所需的
体积 V、外二面角 ψ、扭转角 φ 与夹角 θ。

每种符号的四面体用 TetraFrame 描述：四条首尾相接的边 a + b + c + d = 0，
以及两条对角边 ab = a + b、bc = b + c。
"""
import math
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional

import numpy as np

from src.halfint import parse_halfint
from src.layouts import SIX_J, NINE_J, TWELVE_J, FIFTEEN_J, LayoutError, make_kind

logger = logging.getLogger(__name__)

CAUSTIC_EPSILON = 1e-12
ACOS_TOLERANCE = 1e-12
CROSS_TOLERANCE = 1e-12


class GeometryError(Exception):
    """几何计算失败的基类"""
    pass


class NotClassicallyAllowed(GeometryError):
    """边长不构成实四面体（禁区或焦散线上）"""
    pass


class DegenerateAngle(GeometryError):
    """角度公式中的叉积退化，或 arccos 输入超出容差带"""
    pass


class NotATriangle(GeometryError):
    """三条边不满足三角不等式"""
    pass


@dataclass(frozen=True)
class TetraFrame:
    name: str
    a: str
    b: str
    c: str
    d: str
    ab: str
    bc: str

    @property
    def labels(self):
        return (self.a, self.b, self.c, self.d, self.ab, self.bc)


FRAMES: Dict[str, TetraFrame] = {
    NINE_J: TetraFrame(NINE_J, "j1", "j2", "j4", "j5", "j12", "j24"),
    TWELVE_J: TetraFrame(TWELVE_J, "j2", "j4", "j3", "j6", "j24", "j34"),
    FIFTEEN_J: TetraFrame(FIFTEEN_J, "j1", "j2", "j4", "j7", "j12", "j24"),
    SIX_J: TetraFrame(SIX_J, "a", "b", "d", "e", "c", "f"),
}


def frame_for(kind: str) -> TetraFrame:
    kind = make_kind(kind)
    base = {"9j1s": NINE_J, "9j2s": NINE_J, "12j2s": TWELVE_J, "15j3s": FIFTEEN_J}.get(kind, kind)
    if base not in FRAMES:
        raise LayoutError(f"{kind} 没有对应的四面体")
    return FRAMES[base]


@dataclass(frozen=True)
class EdgeSet:
    """六条边长，按 frame 的角色名索引。"""
    frame: TetraFrame
    lengths: Mapping[str, float]

    def __post_init__(self):
        lengths = {k: float(self.lengths[k]) for k in self.frame.labels}
        for k, v in lengths.items():
            if not v > 0:
                raise ValueError(f"边长必须为正: {k}={v}")
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def from_sequence(cls, frame: TetraFrame, values) -> "EdgeSet":
        """按 (a, b, c, d, ab, bc) 顺序给出边长。"""
        values = list(values)
        if len(values) != 6:
            raise ValueError("需要 6 条边长")
        return cls(frame, dict(zip(frame.labels, values)))

    @classmethod
    def from_quantum_numbers(cls, kind: str, roles: Mapping[str, object]) -> "EdgeSet":
        """由符号角色的量子数 j 构造边长 J = j + 1/2。"""
        frame = frame_for(kind)
        return cls(frame, {k: parse_halfint(roles[k]).edge_length for k in frame.labels})

    def __getitem__(self, label: str) -> float:
        return self.lengths[label]

    def as_tuple(self):
        return tuple(self.lengths[k] for k in self.frame.labels)


@dataclass
class TetraConfig:
    frame: TetraFrame
    vectors: Dict[str, np.ndarray]
    signed_volume: float

    def __getitem__(self, label: str) -> np.ndarray:
        return self.vectors[label]

    @property
    def volume(self) -> float:
        return abs(self.signed_volume)


@dataclass
class AngleBundle:
    V: float
    psi: Dict[str, float]
    phi1: Optional[float] = None
    phi4: Optional[float] = None
    theta: Optional[float] = None
    phi2: Optional[float] = None
    phi3: Optional[float] = None
    phi1p: Optional[float] = None
    phi4p: Optional[float] = None
    theta1: Optional[float] = None
    theta2: Optional[float] = None
    phi1_int: Optional[float] = None
    phi12_int: Optional[float] = None


def gram_from_edges(edges: EdgeSet) -> np.ndarray:
    """
    顶点向量 (a, ab, -d) 的 Gram 矩阵，非对角元由余弦定理给出。
    """
    f = edges.frame
    A2, B2, C2 = edges[f.a] ** 2, edges[f.b] ** 2, edges[f.c] ** 2
    D2, AB2, BC2 = edges[f.d] ** 2, edges[f.ab] ** 2, edges[f.bc] ** 2
    g01 = (A2 + AB2 - B2) / 2.0
    g02 = (A2 + D2 - BC2) / 2.0
    g12 = (AB2 + D2 - C2) / 2.0
    return np.array([[A2, g01, g02],
                     [g01, AB2, g12],
                     [g02, g12, D2]], dtype=float)


def _allowed_gram(G: np.ndarray, epsilon: float) -> bool:
    w = np.linalg.eigvalsh(G)
    if np.any(w <= 0.0):
        return False
    return float(np.linalg.det(G)) > epsilon * float(np.trace(G)) ** 3


def is_classically_allowed(edges: EdgeSet, epsilon: float = CAUSTIC_EPSILON) -> bool:
    """det G > ε (tr G)^3 且 G 正定。"""
    return _allowed_gram(gram_from_edges(edges), epsilon)


def build_tetrahedron(edges: EdgeSet, epsilon: float = CAUSTIC_EPSILON) -> TetraConfig:
    """
    由边长重建向量构型，定向使有符号体积为负。

    抛出:
        NotClassicallyAllowed: Gram 矩阵非正定或过于接近焦散线
    """
    G = gram_from_edges(edges)
    if not _allowed_gram(G, epsilon):
        raise NotClassicallyAllowed(f"{edges.frame.name} 边长不在经典允许区: {edges.as_tuple()}")

    w, U = np.linalg.eigh(G)
    M = U * np.sqrt(w)
    va, vab, vmd = M[0], M[1], M[2]
    f = edges.frame
    a, ab, dd = va, vab, -vmd
    b = ab - a
    c = -dd - ab
    vectors = {f.a: a, f.b: b, f.c: c, f.d: dd, f.ab: ab, f.bc: b + c}

    six_v = float(np.dot(a, np.cross(b, c)))
    if six_v > 0:
        flip = np.array([1.0, -1.0, 1.0])
        vectors = {k: v * flip for k, v in vectors.items()}
        six_v = -six_v
    return TetraConfig(f, vectors, six_v / 6.0)


def measure_edges(config: TetraConfig) -> EdgeSet:
    return EdgeSet(config.frame, {k: float(np.linalg.norm(v)) for k, v in config.vectors.items()})


def _acos_checked(x: float, tol: float = ACOS_TOLERANCE) -> float:
    if x > 1.0 + tol or x < -1.0 - tol:
        raise DegenerateAngle(f"arccos 输入越界: {x!r}")
    return math.acos(max(-1.0, min(1.0, x)))


def vector_angle(p: np.ndarray, q: np.ndarray, tol: float = ACOS_TOLERANCE) -> float:
    """两向量夹角 ∈ [0, π]"""
    return _acos_checked(float(np.dot(p, q) / (np.linalg.norm(p) * np.linalg.norm(q))), tol)


def plane_angle(p: np.ndarray, q: np.ndarray, r: np.ndarray,
                tol: float = ACOS_TOLERANCE, cross_tol: float = CROSS_TOLERANCE) -> float:
    """π - arccos(n(p×q)·n(p×r))，即 (p, q) 面与 (p, r) 面的扭转角。"""
    pq, pr = np.cross(p, q), np.cross(p, r)
    npq, npr = float(np.linalg.norm(pq)), float(np.linalg.norm(pr))
    if npq < cross_tol * np.linalg.norm(p) * np.linalg.norm(q) or npr < cross_tol * np.linalg.norm(p) * np.linalg.norm(r):
        raise DegenerateAngle("叉积接近零（向量共线，处于焦散线附近）")
    return math.pi - _acos_checked(float(np.dot(pq, pr) / (npq * npr)), tol)


def external_dihedrals(config: TetraConfig, tol: float = ACOS_TOLERANCE) -> Dict[str, float]:
    """六条边上的外二面角 ψ = π - 内二面角。"""
    f = config.frame
    a, b, c = config[f.a], config[f.b], config[f.c]
    P = (np.zeros(3), a, a + b, a + b + c)
    edges = {f.a: (0, 1), f.b: (1, 2), f.c: (2, 3), f.d: (3, 0), f.ab: (0, 2), f.bc: (1, 3)}
    psi = {}
    for label, (i, j) in edges.items():
        k, m = [v for v in range(4) if v not in (i, j)]
        e = P[j] - P[i]
        e = e / np.linalg.norm(e)
        u = P[k] - P[i]
        w = P[m] - P[i]
        u = u - np.dot(u, e) * e
        w = w - np.dot(w, e) * e
        nu, nw = np.linalg.norm(u), np.linalg.norm(w)
        if nu == 0.0 or nw == 0.0:
            raise DegenerateAngle(f"边 {label} 处二面角退化")
        interior = _acos_checked(float(np.dot(u, w) / (nu * nw)), tol)
        psi[label] = math.pi - interior
    return psi


def angle_bundle(config: TetraConfig, kind: str,
                 tol: float = ACOS_TOLERANCE, cross_tol: float = CROSS_TOLERANCE) -> AngleBundle:
    """
    计算体积、外二面角以及与符号种类相关的扭转角。

    9j: phi1, phi4, theta；12j: phi2, phi3, theta；
    15j: phi1p, phi4p, theta1, theta2, phi1_int, phi12_int；6j 只有 V 与 ψ。

    抛出:
        DegenerateAngle
    """
    frame = frame_for(kind)
    psi = external_dihedrals(config, tol)
    bundle = AngleBundle(V=config.volume, psi=psi)
    v = config.vectors

    if frame.name == NINE_J:
        bundle.phi1 = plane_angle(v["j1"], v["j4"], v["j5"], tol, cross_tol)
        bundle.phi4 = plane_angle(v["j4"], v["j1"], v["j5"], tol, cross_tol)
        bundle.theta = vector_angle(v["j1"], v["j4"], tol)
    elif frame.name == TWELVE_J:
        bundle.phi2 = plane_angle(v["j2"], v["j3"], v["j6"], tol, cross_tol)
        bundle.phi3 = plane_angle(v["j3"], v["j2"], v["j6"], tol, cross_tol)
        bundle.theta = vector_angle(v["j2"], v["j3"], tol)
    elif frame.name == FIFTEEN_J:
        bundle.phi1p = plane_angle(v["j1"], v["j4"], v["j7"], tol, cross_tol)
        bundle.phi4p = plane_angle(v["j4"], v["j1"], v["j7"], tol, cross_tol)
        bundle.theta1 = vector_angle(v["j1"], v["j4"], tol)
        bundle.theta2 = vector_angle(v["j1"], v["j12"], tol)
        bundle.phi1_int = math.pi - psi["j1"]
        bundle.phi12_int = math.pi - psi["j12"]
    return bundle


def triangle_theta(J1: float, J4: float, J5: float) -> float:
    """
    三角形 (J1, J4, J5) 中 J1 与 J4 之间的外角：π - arccos((J1²+J4²-J5²)/(2 J1 J4))。

    抛出:
        NotATriangle
    """
    J1, J4, J5 = float(J1), float(J4), float(J5)
    if min(J1, J4, J5) <= 0 or J5 > J1 + J4 or J1 > J4 + J5 or J4 > J1 + J5:
        raise NotATriangle(f"({J1}, {J4}, {J5}) 不满足三角不等式")
    x = (J1 * J1 + J4 * J4 - J5 * J5) / (2.0 * J1 * J4)
    return math.pi - math.acos(max(-1.0, min(1.0, x)))
