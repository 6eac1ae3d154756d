"""Per-phase clique construction, merging, and global prediction.

A model is an ordered collection of immutable phase cliques. Adding a
phase never touches existing cliques, which is what makes predictions on
old classes stable: a new clique can win a query away from an old class,
but it can never reorder the old classes among themselves.

Prediction is a two-stage rule. Within each clique the winner is the
best cell among that clique's local centers (probing-induced when
divide-and-conquer is on, prototypes otherwise); across cliques the
winners compete on their cross-clique centers (residual centers when
enabled, prototypes otherwise). With a single clique this reduces to the
first stage. The raw one-on-one elimination walk over boundaries is kept
as :func:`predict_tournament` for comparison; the two-stage rule equals
it whenever the hybrid boundary arrangement is consistent and is
independent of visit order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError
from .geometry import (
    Center,
    CenterKind,
    pairwise_sq_distances,
    power_score,
    reduce_to_vd,
)
from .ingestion import FeatureDataset
from .probing import ProbeConfig, train_probe, train_residual_probe
from .transforms import TransformParams

IVMD_MAGIC = b"IVMD"
IVMD_VERSION = 1


@dataclass(frozen=True, eq=False)
class PhaseClique:
    """The classes introduced by one phase plus their center sets.

    Optional center lists, when present, align index-for-index with
    ``class_ids``.
    """

    phase_id: int
    class_ids: tuple[int, ...]
    prototypes: tuple[Center, ...]
    probing_centers: tuple[Center, ...] | None = None
    residual_centers: tuple[Center, ...] | None = None

    def __post_init__(self) -> None:
        k = len(self.class_ids)
        if k == 0:
            raise DataError("a clique must contain at least one class")
        if len(set(self.class_ids)) != k:
            raise DataError("clique class ids must be distinct")
        for name, centers in (
            ("prototypes", self.prototypes),
            ("probing_centers", self.probing_centers),
            ("residual_centers", self.residual_centers),
        ):
            if centers is None:
                if name == "prototypes":
                    raise DataError("a clique always stores prototypes")
                continue
            if len(centers) != k:
                raise DataError(f"{name} must have exactly {k} entries")
            for c, cid in zip(centers, self.class_ids):
                if c.class_id != cid:
                    raise DataError(f"{name} are misaligned with class ids")

    def centers_of(self, kind: CenterKind) -> tuple[Center, ...] | None:
        if kind == CenterKind.PROTOTYPE:
            return self.prototypes
        if kind == CenterKind.PROBING:
            return self.probing_centers
        return self.residual_centers


@dataclass(frozen=True, eq=False)
class IncrementalModel:
    """Immutable snapshot of the classifier after some number of phases."""

    dim: int
    transform: TransformParams = TransformParams.disabled()
    use_dnc: bool = False
    use_residual: bool = False
    cliques: tuple[PhaseClique, ...] = ()

    @property
    def n_phases(self) -> int:
        return len(self.cliques)

    def class_ids(self) -> list[int]:
        return [c for clique in self.cliques for c in clique.class_ids]

    def _within_kind(self) -> CenterKind:
        return CenterKind.PROBING if self.use_dnc else CenterKind.PROTOTYPE

    def _cross_kind(self) -> CenterKind:
        return CenterKind.RESIDUAL if self.use_residual else CenterKind.PROTOTYPE


def compute_prototypes(
    data: FeatureDataset | tuple[np.ndarray, np.ndarray],
    phase_id: int = 0,
    class_ids: list[int] | None = None,
) -> list[Center]:
    """Per-class arithmetic means of (already transformed) features.

    Classes default to those present in the data, ascending. Requesting a
    class with no samples is an error.
    """
    if isinstance(data, FeatureDataset):
        features, labels = data.features64, data.labels.astype(np.int64)
    else:
        features, labels = data
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
    if class_ids is None:
        class_ids = sorted(int(c) for c in np.unique(labels)) if labels.size else []
    if not class_ids:
        raise DataError("no classes to compute prototypes for")
    out = []
    for cid in class_ids:
        mask = labels == cid
        if not mask.any():
            raise DataError(f"class {cid} has no samples")
        out.append(
            Center(
                vector=features[mask].mean(axis=0),
                weight=0.0,
                class_id=int(cid),
                phase_id=phase_id,
                kind=CenterKind.PROTOTYPE,
            )
        )
    return out


def add_phase(
    model: IncrementalModel,
    data: FeatureDataset | tuple[np.ndarray, np.ndarray],
    cfg: ProbeConfig | None = None,
) -> IncrementalModel:
    """Return a new snapshot with one additional clique.

    Features must already be transformed consistently with the model.
    Probing centers are trained iff ``use_dnc``; residual centers iff
    ``use_residual``. Existing cliques are shared untouched.
    """
    if isinstance(data, FeatureDataset):
        features, labels = data.features64, data.labels.astype(np.int64)
    else:
        features, labels = data
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise DataError("phase data must be a nonempty 2-D feature array")
    if features.shape[1] != model.dim:
        raise DataError(f"feature dimension {features.shape[1]} does not match model dim {model.dim}")

    new_classes = sorted(int(c) for c in np.unique(labels))
    collisions = set(new_classes).intersection(model.class_ids())
    if collisions:
        raise DataError(f"classes {sorted(collisions)} already belong to an earlier phase")

    phase_id = model.n_phases
    prototypes = compute_prototypes((features, labels), phase_id=phase_id, class_ids=new_classes)

    probing = None
    residual = None
    if model.use_dnc or model.use_residual:
        if cfg is None:
            raise DataError("a ProbeConfig is required when probing or residual centers are enabled")
        local = {cid: i for i, cid in enumerate(new_classes)}
        dense = np.array([local[int(c)] for c in labels], dtype=np.int64)
        proto_matrix = np.stack([p.vector for p in prototypes])
        if model.use_dnc:
            if len(new_classes) < 2:
                # A one-class clique has no within-clique boundary to probe;
                # its prototype stands in and stage 1 is trivially decided.
                probing = tuple(
                    Center(vector=p.vector, weight=0.0, class_id=p.class_id,
                           phase_id=phase_id, kind=CenterKind.PROBING)
                    for p in prototypes
                )
            else:
                probe = train_probe((features, dense), cfg, init_prototypes=proto_matrix)
                probing = tuple(reduce_to_vd(probe, class_ids=new_classes, phase_id=phase_id))
        if model.use_residual:
            residual = tuple(train_residual_probe(prototypes, (features, dense), cfg))

    clique = PhaseClique(
        phase_id=phase_id,
        class_ids=tuple(new_classes),
        prototypes=tuple(prototypes),
        probing_centers=probing,
        residual_centers=residual,
    )
    return replace(model, cliques=model.cliques + (clique,))


def _clique_centers(model: IncrementalModel, clique: PhaseClique, kind: CenterKind) -> tuple[Center, ...]:
    centers = clique.centers_of(kind)
    if centers is None:
        raise DataError(f"phase {clique.phase_id} has no {kind.value} centers")
    return centers


def predict_many(model: IncrementalModel, queries: np.ndarray) -> np.ndarray:
    """Two-stage prediction for a batch of transformed query rows."""
    if model.n_phases == 0:
        raise DataError("model has no phases")
    Z = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if Z.shape[1] != model.dim:
        raise DataError(f"query dimension {Z.shape[1]} does not match model dim {model.dim}")

    within_kind = model._within_kind()
    cross_kind = model._cross_kind()
    n = Z.shape[0]
    cross_scores = np.empty((n, model.n_phases))
    winner_classes = np.empty((n, model.n_phases), dtype=np.int64)
    for t, clique in enumerate(model.cliques):
        within = _clique_centers(model, clique, within_kind)
        local = np.argmin(pairwise_sq_distances(Z, np.stack([c.vector for c in within])), axis=1)
        winner_classes[:, t] = np.asarray(clique.class_ids)[local]
        cross = _clique_centers(model, clique, cross_kind)
        cross_vectors = np.stack([c.vector for c in cross])[local]
        diff = Z - cross_vectors
        cross_scores[:, t] = (diff * diff).sum(axis=1)
    best = np.argmin(cross_scores, axis=1)
    return winner_classes[np.arange(n), best]


def predict(model: IncrementalModel, z: np.ndarray) -> int:
    """Predicted class id for one transformed query."""
    return int(predict_many(model, np.asarray(z, dtype=np.float64)[None, :])[0])


def predict_oracle(model: IncrementalModel, z: np.ndarray, kind: CenterKind | str) -> int:
    """Flat nearest-center prediction over one center kind across all cliques."""
    kind = CenterKind(kind)
    if model.n_phases == 0:
        raise DataError("model has no phases")
    centers: list[Center] = []
    for clique in model.cliques:
        centers.extend(_clique_centers(model, clique, kind))
    scores = [power_score(z, c) for c in centers]
    return centers[int(np.argmin(scores))].class_id


def predict_tournament(model: IncrementalModel, z: np.ndarray) -> int:
    """One-on-one elimination over candidates in phase-major, class-index order.

    Each duel compares within-clique centers for same-phase candidates
    and cross-clique centers otherwise; ties keep the earlier candidate.
    """
    if model.n_phases == 0:
        raise DataError("model has no phases")
    q = np.asarray(z, dtype=np.float64)
    within_kind = model._within_kind()
    cross_kind = model._cross_kind()

    candidates = [
        (t, i) for t, clique in enumerate(model.cliques) for i in range(len(clique.class_ids))
    ]
    champ_t, champ_i = candidates[0]
    for t, i in candidates[1:]:
        same = t == champ_t
        kind = within_kind if same else cross_kind
        champ_center = _clique_centers(model, model.cliques[champ_t], kind)[champ_i]
        rival_center = _clique_centers(model, model.cliques[t], kind)[i]
        if power_score(q, rival_center) < power_score(q, champ_center):
            champ_t, champ_i = t, i
    return model.cliques[champ_t].class_ids[champ_i]


def _pack_centers(centers: tuple[Center, ...], dim: int) -> bytes:
    weights = np.array([c.weight for c in centers], dtype="<f4")
    vectors = np.stack([c.vector for c in centers]).astype("<f4")
    if vectors.shape[1] != dim:
        raise DataError("center dimensionality disagrees with model dim")
    return weights.tobytes() + vectors.tobytes()


def serialize_clique(clique: PhaseClique, dim: int) -> bytes:
    """Canonical byte encoding of one clique (f32 rows, little-endian)."""
    k = len(clique.class_ids)
    mask = 1
    if clique.probing_centers is not None:
        mask |= 2
    if clique.residual_centers is not None:
        mask |= 4
    parts = [
        struct.pack("<IIB", clique.phase_id, k, mask),
        np.array(clique.class_ids, dtype="<u4").tobytes(),
        _pack_centers(clique.prototypes, dim),
    ]
    if clique.probing_centers is not None:
        parts.append(_pack_centers(clique.probing_centers, dim))
    if clique.residual_centers is not None:
        parts.append(_pack_centers(clique.residual_centers, dim))
    return b"".join(parts)


def serialize_model(model: IncrementalModel) -> bytes:
    """IVMD container: header, transform block, then cliques in phase order."""
    t = model.transform
    flags = (
        (1 if model.use_dnc else 0)
        | (2 if model.use_residual else 0)
        | (4 if t.enabled else 0)
        | (8 if t.clamp_negative else 0)
    )
    head = struct.pack(
        "<4sHBIdddd",
        IVMD_MAGIC,
        IVMD_VERSION,
        flags,
        model.dim,
        t.scale,
        t.shift,
        t.tukey_lambda,
        t.eps,
    )
    body = struct.pack("<I", model.n_phases) + b"".join(
        serialize_clique(c, model.dim) for c in model.cliques
    )
    return head + body


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, fmt: str):
        s = struct.Struct(fmt)
        if self.pos + s.size > len(self.blob):
            raise DataError(f"truncated model file at offset {len(self.blob)}: need {self.pos + s.size} bytes")
        out = s.unpack_from(self.blob, self.pos)
        self.pos += s.size
        return out

    def take_array(self, dtype: str, count: int) -> np.ndarray:
        nbytes = np.dtype(dtype).itemsize * count
        if self.pos + nbytes > len(self.blob):
            raise DataError(f"truncated model file at offset {len(self.blob)}: need {self.pos + nbytes} bytes")
        arr = np.frombuffer(self.blob, dtype=dtype, count=count, offset=self.pos)
        self.pos += nbytes
        return arr


def _unpack_centers(
    reader: _Reader, k: int, dim: int, class_ids: tuple[int, ...], phase_id: int, kind: CenterKind
) -> tuple[Center, ...]:
    weights = reader.take_array("<f4", k).astype(np.float64)
    vectors = reader.take_array("<f4", k * dim).astype(np.float64).reshape(k, dim)
    return tuple(
        Center(vector=vectors[i], weight=float(weights[i]), class_id=class_ids[i], phase_id=phase_id, kind=kind)
        for i in range(k)
    )


def deserialize_model(blob: bytes) -> IncrementalModel:
    reader = _Reader(blob)
    magic, version, flags, dim, scale, shift, lam, eps = reader.take("<4sHBIdddd")
    if magic != IVMD_MAGIC:
        raise DataError(f"bad magic {magic!r} at offset 0: not a model file")
    if version != IVMD_VERSION:
        raise DataError(f"unsupported model version {version} at offset 4")
    transform = TransformParams(
        enabled=bool(flags & 4),
        scale=scale,
        shift=shift,
        tukey_lambda=lam,
        eps=eps,
        clamp_negative=bool(flags & 8),
    )
    (n_cliques,) = reader.take("<I")
    cliques = []
    for _ in range(n_cliques):
        phase_id, k, mask = reader.take("<IIB")
        class_ids = tuple(int(c) for c in reader.take_array("<u4", k))
        prototypes = _unpack_centers(reader, k, dim, class_ids, phase_id, CenterKind.PROTOTYPE)
        probing = (
            _unpack_centers(reader, k, dim, class_ids, phase_id, CenterKind.PROBING)
            if mask & 2
            else None
        )
        residual = (
            _unpack_centers(reader, k, dim, class_ids, phase_id, CenterKind.RESIDUAL)
            if mask & 4
            else None
        )
        cliques.append(
            PhaseClique(
                phase_id=phase_id,
                class_ids=class_ids,
                prototypes=prototypes,
                probing_centers=probing,
                residual_centers=residual,
            )
        )
    if reader.pos != len(blob):
        raise DataError(f"trailing bytes after model payload at offset {reader.pos}")
    return IncrementalModel(
        dim=dim,
        transform=transform,
        use_dnc=bool(flags & 1),
        use_residual=bool(flags & 2),
        cliques=tuple(cliques),
    )


def save_model(model: IncrementalModel, path) -> None:
    from pathlib import Path

    Path(path).write_bytes(serialize_model(model))


def load_model(path) -> IncrementalModel:
    from pathlib import Path

    p = Path(path)
    if not p.exists():
        raise DataError(f"model file not found: {p}")
    return deserialize_model(p.read_bytes())
