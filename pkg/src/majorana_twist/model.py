"""Domain types and validation for the duality-twisted Floquet Ising chain.

The physical setup is a closed chain of ``L`` qubits evolved by a kicked
transverse-field Ising drive.  One bond carries a twist: the exchange on the
bond ``(r-1, r)`` is ``Z_{r-1} X_r`` instead of ``Z_{r-1} Z_r``, and the
transverse field on site ``r`` is removed.  All angles are stored in radians
and enter the gates directly, e.g. the field layer applies
``exp(-i (g/2) X_j)`` on each driven site.

Everything here is immutable after validation and safe to share across
workers.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from .noise import NoiseConfig


class ConfigError(ValueError):
    """A run configuration violated an invariant; names the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class PauliAxis(enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ModelParams:
    """Couplings and geometry of the twisted chain.

    ``J`` is the exchange angle, ``g`` the transverse-field angle, ``Jx`` an
    optional XX perturbation (0 keeps the model quadratic in Majorana
    fermions), ``r`` the twist site.  Sites are indexed periodically:
    ``L + j`` is the same site as ``j``.
    """

    L: int
    J: float
    g: float
    Jx: float = 0.0
    r: int = -1  # -1 means "use the default L - 1"

    def __post_init__(self):
        if self.r == -1 and isinstance(self.L, int):
            object.__setattr__(self, "r", self.L - 1)

    @property
    def interacting(self) -> bool:
        return self.Jx != 0.0

    def bulk_site(self) -> int:
        """Default probe site far from the twist, ``L // 2 - 1``."""
        return self.L // 2 - 1


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site Paulis, e.g. ``X18 Y19``.

    Terms are kept sorted by site, so two strings built from the same
    (site, axis) pairs in any order compare equal.  Duplicate sites are
    rejected outright; eigenvalues of a valid string are exactly +/-1.
    """

    terms: tuple[tuple[int, PauliAxis], ...]

    @staticmethod
    def of(*terms: tuple[int, PauliAxis | str]) -> "PauliString":
        """Build a string from (site, axis) pairs; axes may be 'X'/'Y'/'Z'."""
        norm = []
        for site, axis in terms:
            if not isinstance(axis, PauliAxis):
                try:
                    axis = PauliAxis(str(axis).upper())
                except ValueError:
                    raise ConfigError("observable", f"unknown axis {axis!r}")
            if not isinstance(site, int) or isinstance(site, bool):
                raise ConfigError("observable", f"site must be an integer, got {site!r}")
            norm.append((site, axis))
        norm.sort(key=lambda t: t[0])
        sites = [s for s, _ in norm]
        if len(set(sites)) != len(sites):
            raise ConfigError("observable", "duplicate site in Pauli string")
        if not norm:
            raise ConfigError("observable", "empty Pauli string")
        return PauliString(tuple(norm))

    @staticmethod
    def single(site: int, axis: PauliAxis | str) -> "PauliString":
        return PauliString.of((site, axis))

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.terms)

    def support_mask(self) -> int:
        """Bitmask with a 1 for every site the string acts on."""
        m = 0
        for s, _ in self.terms:
            m |= 1 << s
        return m

    def axis_at(self, site: int) -> PauliAxis | None:
        for s, a in self.terms:
            if s == site:
                return a
        return None

    def __str__(self) -> str:
        return "".join(f"{a.value}{s}" for s, a in self.terms)


@dataclass(frozen=True)
class SymmetryOp:
    """Modified spin-flip symmetry of the twisted chain.

    Acts as ``i Z_r  (X_0 X_1 ... X_{L-1})`` with the product of flips applied
    first, then ``Z_r``, then the scalar ``i``.  Squares to the identity.
    """

    r: int


@dataclass(frozen=True)
class FullTrace:
    kind = "full"


@dataclass(frozen=True)
class PartialTrace:
    num_samples: int
    seed: int = 0
    kind = "partial"


Estimator = Union[FullTrace, PartialTrace]


@dataclass(frozen=True)
class OutputPaths:
    csv: str | None = None
    plot: str | None = None
    manifest: str | None = None
    qasm: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """Full description of one simulation run.

    ``observable`` may be None, in which case commands that produce
    autocorrelation series run the standard six-panel suite (X/Y/Z at the
    twist site and at the bulk probe site).
    """

    params: ModelParams
    observable: PauliString | None = None
    n_steps: int = 30
    estimator: Estimator = FullTrace()
    translations: int = 0
    noise: "NoiseConfig | None" = None
    outputs: OutputPaths = OutputPaths()


def default_panel(params: ModelParams) -> tuple[PauliString, ...]:
    """X/Y/Z observables at the twist site and at the bulk probe site."""
    obs = []
    for site in (params.r, params.bulk_site()):
        for axis in (PauliAxis.X, PauliAxis.Y, PauliAxis.Z):
            obs.append(PauliString.single(site, axis))
    return tuple(obs)


def _require_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    return value


def _require_real(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a real number, got {value!r}")
    v = float(value)
    if math.isnan(v) or math.isinf(v):
        raise ConfigError(name, f"must be finite, got {value!r}")
    return v


def validate(config: RunConfig) -> RunConfig:
    """Check every invariant of a RunConfig; raise ConfigError naming the field.

    Validation is total: any input either comes back unchanged or raises
    ConfigError -- values are never clamped or silently fixed.
    """
    p = config.params
    L = _require_int("L", p.L)
    if L < 3:
        raise ConfigError("L", f"L < 3 (got {L})")
    _require_real("J", p.J)
    _require_real("g", p.g)
    _require_real("Jx", p.Jx)
    r = _require_int("defect", p.r)
    if not (0 <= r < L):
        raise ConfigError("defect", f"defect site {r} outside [0, {L})")

    if config.observable is not None:
        if not isinstance(config.observable, PauliString):
            raise ConfigError("observable", "expected a PauliString")
        for site, _ in config.observable.terms:
            if not (0 <= site < L):
                raise ConfigError("observable", f"site {site} outside [0, {L})")

    n = _require_int("steps", config.n_steps)
    if n < 0:
        raise ConfigError("steps", f"negative step count {n}")

    est = config.estimator
    if isinstance(est, PartialTrace):
        ns = _require_int("samples", est.num_samples)
        if ns < 1:
            raise ConfigError("samples", f"num_samples must be >= 1 (got {ns})")
        if ns > 2**L:
            raise ConfigError("samples", f"num_samples exceeds 2^L ({ns} > {2**L})")
        _require_int("seed", est.seed)
    elif not isinstance(est, FullTrace):
        raise ConfigError("estimator", f"unknown estimator {est!r}")

    t = _require_int("translations", config.translations)
    if not (0 <= t < L):
        raise ConfigError("translations", f"must be in [0, {L}) (got {t})")

    if config.noise is not None:
        from .noise import validate_noise

        validate_noise(config.noise, L)

    return config


_PI_PATTERN = re.compile(r"^\s*([+-]?\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*$")


def parse_angle(value) -> float:
    """Accept a plain number (radians) or a string like '0.75pi'."""
    if isinstance(value, str):
        m = _PI_PATTERN.match(value)
        if not m:
            raise ConfigError("angle", f"cannot parse angle {value!r}")
        coeff = m.group(1)
        if coeff in ("", "+"):
            coeff = "1"
        elif coeff == "-":
            coeff = "-1"
        return float(coeff) * math.pi
    return _require_real("angle", value)


def _parse_observable(raw) -> PauliString:
    if not isinstance(raw, list):
        raise ConfigError("observable", "expected a list of {site, axis} objects")
    terms = []
    for entry in raw:
        if not isinstance(entry, dict) or "site" not in entry or "axis" not in entry:
            raise ConfigError("observable", f"bad term {entry!r}")
        terms.append((entry["site"], entry["axis"]))
    return PauliString.of(*terms)


def _parse_estimator(raw) -> Estimator:
    if raw is None:
        return FullTrace()
    if not isinstance(raw, dict):
        raise ConfigError("estimator", "expected an object with a 'kind' key")
    kind = raw.get("kind", "full")
    if kind == "full":
        return FullTrace()
    if kind == "partial":
        if "samples" not in raw:
            raise ConfigError("samples", "partial estimator needs 'samples'")
        samples = raw["samples"]
        seed = raw.get("seed", 0)
        if isinstance(samples, bool) or not isinstance(samples, int):
            raise ConfigError("samples", f"expected an integer, got {samples!r}")
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("seed", f"expected an integer, got {seed!r}")
        return PartialTrace(num_samples=samples, seed=seed)
    raise ConfigError("estimator", f"unknown kind {kind!r}")


def config_from_dict(doc: dict) -> RunConfig:
    """Build a RunConfig from a parsed JSON document (not yet validated)."""
    if not isinstance(doc, dict):
        raise ConfigError("config", "top-level JSON value must be an object")
    if "config" in doc and isinstance(doc["config"], dict):
        # A manifest embeds the resolved config; accept it directly.
        doc = doc["config"]
    if "L" not in doc:
        raise ConfigError("L", "missing required field")
    L = doc["L"]
    try:
        J = parse_angle(doc.get("J", 0.0))
    except ConfigError:
        raise ConfigError("J", f"cannot parse {doc.get('J')!r}")
    try:
        g = parse_angle(doc.get("g", 0.0))
    except ConfigError:
        raise ConfigError("g", f"cannot parse {doc.get('g')!r}")
    try:
        Jx = parse_angle(doc.get("Jx", 0.0))
    except ConfigError:
        raise ConfigError("Jx", f"cannot parse {doc.get('Jx')!r}")
    defect = doc.get("defect", L - 1 if isinstance(L, int) and not isinstance(L, bool) else -1)
    params = ModelParams(L=L, J=J, g=g, Jx=Jx, r=defect)

    observable = None
    if doc.get("observable") is not None:
        observable = _parse_observable(doc["observable"])

    noise = None
    if doc.get("noise") is not None:
        from .noise import noise_from_dict

        noise = noise_from_dict(doc["noise"])

    out_raw = doc.get("output", {})
    if out_raw is None:
        out_raw = {}
    if not isinstance(out_raw, dict):
        raise ConfigError("output", "expected an object")
    outputs = OutputPaths(
        csv=out_raw.get("csv"),
        plot=out_raw.get("plot"),
        manifest=out_raw.get("manifest"),
        qasm=out_raw.get("qasm"),
    )

    steps = doc.get("steps", 30)

    return RunConfig(
        params=params,
        observable=observable,
        n_steps=steps,
        estimator=_parse_estimator(doc.get("estimator")),
        translations=doc.get("translations", 0),
        noise=noise,
        outputs=outputs,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a RunConfig from a JSON file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"invalid JSON in {path}: {e}")
    return validate(config_from_dict(doc))


def config_to_dict(config: RunConfig) -> dict:
    """Serialize a RunConfig back to the JSON document layout."""
    p = config.params
    doc: dict = {
        "L": p.L,
        "J": p.J,
        "g": p.g,
        "Jx": p.Jx,
        "defect": p.r,
        "steps": config.n_steps,
        "translations": config.translations,
    }
    if config.observable is not None:
        doc["observable"] = [
            {"site": s, "axis": a.value} for s, a in config.observable.terms
        ]
    else:
        doc["observable"] = None
    est = config.estimator
    if isinstance(est, PartialTrace):
        doc["estimator"] = {"kind": "partial", "samples": est.num_samples, "seed": est.seed}
    else:
        doc["estimator"] = {"kind": "full"}
    if config.noise is not None:
        from .noise import noise_to_dict

        doc["noise"] = noise_to_dict(config.noise)
    out = {}
    for key in ("csv", "plot", "manifest", "qasm"):
        val = getattr(config.outputs, key)
        if val is not None:
            out[key] = val
    if out:
        doc["output"] = out
    return doc


# ---------------------------------------------------------------------------
# Phase-exact Pauli algebra on bitmasks.
#
# Represents  i^p * X^xmask * Z^zmask  (X factors to the left of Z factors,
# per-site).  Y_j enters as i X_j Z_j.  Products and Clifford conjugations
# track the phase exactly, which is what pins the boundary sign of the
# Majorana ring and the sign of translated observables.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhasedPauli:
    phase_pow: int  # power of i, mod 4
    x: int          # bitmask of X components
    z: int          # bitmask of Z components

    @staticmethod
    def identity() -> "PhasedPauli":
        return PhasedPauli(0, 0, 0)

    @staticmethod
    def from_string(obs: PauliString) -> "PhasedPauli":
        x = z = 0
        n_y = 0
        for site, axis in obs.terms:
            bit = 1 << site
            if axis is PauliAxis.X:
                x |= bit
            elif axis is PauliAxis.Z:
                z |= bit
            else:
                x |= bit
                z |= bit
                n_y += 1
        return PhasedPauli(n_y % 4, x, z)

    def mul(self, other: "PhasedPauli") -> "PhasedPauli":
        # X^a Z^b X^c Z^d = (-1)^{|b & c|} X^(a^c) Z^(b^d)
        swaps = bin(self.z & other.x).count("1")
        return PhasedPauli(
            (self.phase_pow + other.phase_pow + 2 * swaps) % 4,
            self.x ^ other.x,
            self.z ^ other.z,
        )

    def conj_h(self, q: int) -> "PhasedPauli":
        """Conjugate by a Hadamard on site q: X<->Z, Y -> -Y."""
        bit = 1 << q
        xq, zq = bool(self.x & bit), bool(self.z & bit)
        x = (self.x & ~bit) | (bit if zq else 0)
        z = (self.z & ~bit) | (bit if xq else 0)
        p = (self.phase_pow + (2 if (xq and zq) else 0)) % 4
        return PhasedPauli(p, x, z)

    def conj_cz(self, a: int, b: int) -> "PhasedPauli":
        """Conjugate by CZ on (a, b): X_a -> X_a Z_b, X_b -> Z_a X_b."""
        ba, bb = 1 << a, 1 << b
        xa, xb = bool(self.x & ba), bool(self.x & bb)
        z = self.z
        if xa:
            z ^= bb
        if xb:
            z ^= ba
        p = (self.phase_pow + (2 if (xa and xb) else 0)) % 4
        return PhasedPauli(p, self.x, z)

    def phase(self) -> complex:
        return 1j**self.phase_pow

    def to_string(self, L: int) -> PauliString:
        """Drop the phase and return the bare Pauli string."""
        terms = []
        for site in range(L):
            bit = 1 << site
            xs, zs = bool(self.x & bit), bool(self.z & bit)
            if xs and zs:
                terms.append((site, PauliAxis.Y))
            elif xs:
                terms.append((site, PauliAxis.X))
            elif zs:
                terms.append((site, PauliAxis.Z))
        return PauliString.of(*terms)

    def hermitian_sign(self) -> int:
        """+1 or -1 such that sign * (bare string) equals this operator.

        Only meaningful when the operator is Hermitian, i.e. the phase power
        and the Y-count have the same parity structure.
        """
        n_y = bin(self.x & self.z).count("1")
        rel = (self.phase_pow - n_y) % 4
        if rel == 0:
            return 1
        if rel == 2:
            return -1
        raise ValueError("operator is not a real multiple of a Pauli string")


def symmetry_pauli(r: int, L: int) -> PhasedPauli:
    """The twisted flip symmetry  i Z_r prod_j X_j  as a PhasedPauli."""
    full = (1 << L) - 1
    # i * Z_r * X^full = i * (-1) * X^full * Z_r  (one swap at site r)
    return PhasedPauli(3, full, 1 << r)
