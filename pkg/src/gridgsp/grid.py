"""Grid case data model and file ingestion.

A :class:`GridCase` is a static description of the grid: buses partitioned
into generator and load buses, branch admittances, shunts, generator
parameters (admittance, mass, damping) and quasi-static load admittances.
All admittance values are treated as per-unit quantities.

Case files are a purpose-built JSON schema::

    {
      "f0_hz": 60.0,
      "buses": [
        {"id": "b1", "type": "gen",
         "shunt": {"re": 0, "im": 0},
         "gen": {"y_g": {"re": 0, "im": -10}, "mass": 2.0, "damping": 0.2}},
        {"id": "b2", "type": "load",
         "shunt": {"re": 0, "im": 0},
         "y_load": {"re": 0.2, "im": -0.1}}
      ],
      "branches": [{"from": "b1", "to": "b2", "y": {"re": 0, "im": -5}}]
    }

Phasor time series are CSV with one `<id>_mag,<id>_ang` column pair per bus
(angles in radians), a leading ``# rate_hz=<r>`` comment line, and a ``t``
index column. Bus ordering in memory is file order throughout the toolkit;
matrices never reorder buses, so indices in any result map 1:1 to the file.
"""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import CaseFormatError, CaseWarning

_FLOAT_FMT = "%.17g"  # shortest-roundtrip-safe decimal precision of the CSV format


class SeriesKind(str, enum.Enum):
    VOLTAGE = "voltage"
    CURRENT = "current"
    INTERNAL_VOLTAGE = "internal_voltage"
    GEN_STATE = "gen_state"


@dataclass(frozen=True)
class GridCase:
    """Static grid description. Immutable after construction.

    `buses` is the ordered list of bus ids; `bus_types` the parallel list of
    "gen"/"load" tags. Per-generator vectors (`gen_admittance`, `gen_mass`,
    `gen_damping`, `shunt_gen`) follow the order in which generator buses
    appear in `buses`; per-load vectors likewise.
    """

    buses: tuple
    bus_types: tuple
    branches: tuple  # of (i, j, y) with i < j bus positions
    shunt_gen: np.ndarray
    shunt_load: np.ndarray
    gen_admittance: np.ndarray
    gen_mass: np.ndarray
    gen_damping: np.ndarray
    load_admittance: np.ndarray
    nominal_freq_hz: float = 60.0

    def __post_init__(self):
        _validate_case(self)
        for name in ("shunt_gen", "shunt_load", "gen_admittance",
                     "gen_mass", "gen_damping", "load_admittance"):
            getattr(self, name).setflags(write=False)

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_generators(self) -> int:
        return int(sum(1 for t in self.bus_types if t == "gen"))

    @property
    def n_loads(self) -> int:
        return self.n_buses - self.n_generators

    @property
    def omega0(self) -> float:
        return 2.0 * np.pi * self.nominal_freq_hz


def partition_indices(case: GridCase):
    """Disjoint, covering, order-preserving (generator, load) bus positions."""
    gen = [i for i, t in enumerate(case.bus_types) if t == "gen"]
    load = [i for i, t in enumerate(case.bus_types) if t == "load"]
    return gen, load


def _validate_case(case: GridCase) -> None:
    n = len(case.buses)
    if len(set(case.buses)) != n:
        raise CaseFormatError("duplicate bus id")
    if len(case.bus_types) != n:
        raise CaseFormatError("bus_types length does not match buses")
    bad = [t for t in case.bus_types if t not in ("gen", "load")]
    if bad:
        raise CaseFormatError(f"unknown bus type {bad[0]!r}")
    ng = case.n_generators
    nl = n - ng
    for name, size in (("shunt_gen", ng), ("gen_admittance", ng),
                       ("gen_mass", ng), ("gen_damping", ng),
                       ("shunt_load", nl), ("load_admittance", nl)):
        arr = getattr(case, name)
        if arr.shape != (size,):
            raise CaseFormatError(f"{name}: expected length {size}, got {arr.shape}")
        if not np.all(np.isfinite(arr.real)) or (np.iscomplexobj(arr)
                                                 and not np.all(np.isfinite(arr.imag))):
            raise CaseFormatError(f"{name}: non-finite entry")
    if ng and np.any(case.gen_mass <= 0):
        k = int(np.argmin(case.gen_mass))
        raise CaseFormatError(f"gen_mass: nonpositive mass at generator index {k}")
    if ng and np.any(case.gen_damping < 0):
        raise CaseFormatError("gen_damping: negative damping")
    if not np.isfinite(case.nominal_freq_hz) or case.nominal_freq_hz <= 0:
        raise CaseFormatError("f0_hz must be positive")

    seen = set()
    for (i, j, y) in case.branches:
        if i == j:
            raise CaseFormatError(f"self-loop branch at bus {case.buses[i]!r}")
        if not (0 <= i < n and 0 <= j < n):
            raise CaseFormatError("branch endpoint out of range")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise CaseFormatError(
                f"duplicate branch ({case.buses[key[0]]!r}, {case.buses[key[1]]!r})")
        seen.add(key)
        if not np.isfinite(complex(y).real) or not np.isfinite(complex(y).imag):
            raise CaseFormatError("branch admittance non-finite")

    if n > 1:
        rows = [i for (i, j, _) in case.branches] + [j for (i, j, _) in case.branches]
        cols = [j for (i, j, _) in case.branches] + [i for (i, j, _) in case.branches]
        adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        n_comp, _ = connected_components(adj.tocsr(), directed=False)
        if n_comp > 1:
            warnings.warn(f"grid graph is disconnected ({n_comp} components)",
                          CaseWarning, stacklevel=3)


def _complex_from_json(obj, where: str) -> complex:
    try:
        return complex(float(obj["re"]), float(obj["im"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CaseFormatError(f"{where}: expected {{re, im}} object") from exc


def _complex_to_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def case_from_dict(doc: dict) -> GridCase:
    """Build and validate a GridCase from a parsed case-JSON document."""
    if not isinstance(doc, dict):
        raise CaseFormatError("case document must be a JSON object")
    try:
        bus_docs = doc["buses"]
        branch_docs = doc["branches"]
        f0 = float(doc["f0_hz"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CaseFormatError(f"missing or malformed top-level key: {exc}") from exc

    buses, types = [], []
    shunt_gen, shunt_load = [], []
    y_g, mass, damping, y_load = [], [], [], []
    for k, b in enumerate(bus_docs):
        try:
            bid = b["id"]
            btype = b["type"]
        except (KeyError, TypeError) as exc:
            raise CaseFormatError(f"buses[{k}]: missing id/type") from exc
        buses.append(bid)
        types.append(btype)
        shunt = _complex_from_json(b.get("shunt", {"re": 0.0, "im": 0.0}),
                                   f"buses[{k}].shunt")
        if btype == "gen":
            try:
                gen = b["gen"]
                y_g.append(_complex_from_json(gen["y_g"], f"buses[{k}].gen.y_g"))
                mass.append(float(gen["mass"]))
                damping.append(float(gen["damping"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise CaseFormatError(f"buses[{k}]: malformed gen block") from exc
            shunt_gen.append(shunt)
        elif btype == "load":
            try:
                y_load.append(_complex_from_json(b["y_load"], f"buses[{k}].y_load"))
            except (KeyError, TypeError) as exc:
                raise CaseFormatError(f"buses[{k}]: missing y_load") from exc
            shunt_load.append(shunt)
        else:
            raise CaseFormatError(f"buses[{k}]: unknown bus type {btype!r}")

    index = {bid: i for i, bid in enumerate(buses)}
    if len(index) != len(buses):
        raise CaseFormatError("duplicate bus id")
    branches = []
    for k, br in enumerate(branch_docs):
        try:
            i = index[br["from"]]
            j = index[br["to"]]
        except (KeyError, TypeError) as exc:
            raise CaseFormatError(f"branches[{k}]: unknown or missing endpoint") from exc
        y = _complex_from_json(br["y"], f"branches[{k}].y")
        branches.append((min(i, j), max(i, j), y))

    return GridCase(
        buses=tuple(buses),
        bus_types=tuple(types),
        branches=tuple(branches),
        shunt_gen=np.asarray(shunt_gen, dtype=complex),
        shunt_load=np.asarray(shunt_load, dtype=complex),
        gen_admittance=np.asarray(y_g, dtype=complex),
        gen_mass=np.asarray(mass, dtype=float),
        gen_damping=np.asarray(damping, dtype=float),
        load_admittance=np.asarray(y_load, dtype=complex),
        nominal_freq_hz=f0,
    )


def case_to_dict(case: GridCase) -> dict:
    gi = 0
    li = 0
    bus_docs = []
    for bid, btype in zip(case.buses, case.bus_types):
        if btype == "gen":
            bus_docs.append({
                "id": bid, "type": "gen",
                "shunt": _complex_to_json(case.shunt_gen[gi]),
                "gen": {
                    "y_g": _complex_to_json(case.gen_admittance[gi]),
                    "mass": float(case.gen_mass[gi]),
                    "damping": float(case.gen_damping[gi]),
                },
            })
            gi += 1
        else:
            bus_docs.append({
                "id": bid, "type": "load",
                "shunt": _complex_to_json(case.shunt_load[li]),
                "y_load": _complex_to_json(case.load_admittance[li]),
            })
            li += 1
    branch_docs = [{"from": case.buses[i], "to": case.buses[j], "y": _complex_to_json(y)}
                   for (i, j, y) in case.branches]
    return {"f0_hz": float(case.nominal_freq_hz),
            "buses": bus_docs, "branches": branch_docs}


def load_case(path) -> GridCase:
    """Load and validate a grid case JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CaseFormatError(f"cannot read case file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CaseFormatError(f"case file {path} is not valid JSON: {exc}") from exc
    return case_from_dict(doc)


def save_case(case: GridCase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(case_to_dict(case), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class PhasorSeries:
    """A time-indexed matrix of complex phasors over buses.

    values[t, n] is the phasor of bus `bus_ids[n]` at sample t; `rate_hz`
    is the sampling rate; `kind` tags the physical quantity.
    """

    values: np.ndarray
    bus_ids: tuple
    rate_hz: float
    kind: SeriesKind = SeriesKind.VOLTAGE

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bus_ids", tuple(self.bus_ids))
        object.__setattr__(self, "kind", SeriesKind(self.kind))
        if vals.ndim != 2:
            raise CaseFormatError("phasor values must be a T x N matrix")
        if vals.shape[0] < 1:
            raise CaseFormatError("T >= 1 violated: empty phasor series")
        if vals.shape[1] != len(self.bus_ids):
            raise CaseFormatError(
                f"N mismatch: {vals.shape[1]} columns vs {len(self.bus_ids)} bus ids")
        if not np.all(np.isfinite(vals.real)) or not np.all(np.isfinite(vals.imag)):
            raise CaseFormatError("phasor series contains non-finite entries")
        if not np.isfinite(self.rate_hz) or self.rate_hz <= 0:
            raise CaseFormatError("rate_hz must be positive")
        vals.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_buses(self) -> int:
        return self.values.shape[1]

    def replace_values(self, values) -> "PhasorSeries":
        return PhasorSeries(values, self.bus_ids, self.rate_hz, self.kind)


def load_phasor_csv(path, kind=SeriesKind.VOLTAGE) -> PhasorSeries:
    """Read a phasor CSV (polar column pairs) into rectangular memory form."""
    rate_hz = None
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("rate_hz"):
                    try:
                        rate_hz = float(body.split("=", 1)[1])
                    except (IndexError, ValueError) as exc:
                        raise CaseFormatError(
                            f"{path}:{lineno}: malformed rate_hz comment") from exc
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append((lineno, [c.strip() for c in line.split(",")]))

    if rate_hz is None:
        raise CaseFormatError(f"{path}: missing '# rate_hz=<r>' comment line")
    if header is None or header[0] != "t":
        raise CaseFormatError(f"{path}: missing 't,<id>_mag,<id>_ang,...' header")
    cols = header[1:]
    if len(cols) % 2 != 0:
        raise CaseFormatError(f"{path}: odd number of data columns")
    bus_ids = []
    for k in range(0, len(cols), 2):
        mag_col, ang_col = cols[k], cols[k + 1]
        if not mag_col.endswith("_mag") or not ang_col.endswith("_ang"):
            raise CaseFormatError(f"{path}: expected <id>_mag,<id>_ang pairs, "
                                  f"got {mag_col!r},{ang_col!r}")
        if mag_col[:-4] != ang_col[:-4]:
            raise CaseFormatError(f"{path}: column pair id mismatch "
                                  f"{mag_col!r} vs {ang_col!r}")
        bus_ids.append(mag_col[:-4])

    if not rows:
        raise CaseFormatError(f"{path}: T >= 1 violated (no data rows)")
    values = np.empty((len(rows), len(bus_ids)), dtype=complex)
    for r, (lineno, cells) in enumerate(rows):
        if len(cells) != len(cols) + 1:
            raise CaseFormatError(f"{path}:{lineno}: ragged row "
                                  f"({len(cells)} cells, expected {len(cols) + 1})")
        try:
            nums = [float(c) for c in cells[1:]]
        except ValueError as exc:
            raise CaseFormatError(f"{path}:{lineno}: non-numeric cell") from exc
        mags = np.asarray(nums[0::2])
        angs = np.asarray(nums[1::2])
        if not (np.all(np.isfinite(mags)) and np.all(np.isfinite(angs))):
            raise CaseFormatError(f"{path}:{lineno}: non-finite entry")
        values[r] = mags * np.exp(1j * angs)

    return PhasorSeries(values, tuple(bus_ids), rate_hz, kind)


def save_phasor_csv(series: PhasorSeries, path) -> None:
    """Write a series in the polar CSV format (17 significant digits)."""
    mags = np.abs(series.values)
    angs = np.angle(series.values)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# rate_hz={_FLOAT_FMT % series.rate_hz}\n")
        cols = ",".join(f"{bid}_mag,{bid}_ang" for bid in series.bus_ids)
        fh.write(f"t,{cols}\n")
        for t in range(series.n_samples):
            cells = [str(t)]
            for n in range(series.n_buses):
                cells.append(_FLOAT_FMT % mags[t, n])
                cells.append(_FLOAT_FMT % angs[t, n])
            fh.write(",".join(cells) + "\n")
