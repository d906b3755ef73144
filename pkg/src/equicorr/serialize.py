"""JSON serialization for scenarios, filters, kernels, sections, and
reports.

Documents carry a schema tag ("equicorr-scenario/1" and friends) and are
emitted with sorted keys and fixed indentation, so identical inputs
produce byte-identical files.  Filters are stored per base point as
sparse maps from group element to matrix; a compressed filter stores rows
only at orbit representatives and says so with a "compressed" flag.
Kernels are entry lists over their support.  Loading validates shapes
and index ranges and raises StructuralError on malformed input rather
than guessing.
"""

from __future__ import annotations

import json

import numpy as np

from .bundles import EquivariantBundle, MackeySection, Section, padded_identity, trivial_bundle
from .errors import DomainError, StructuralError
from .groups import FiniteGroup, GroupAction, group_from_tables
from .measures import (
    DeltaFunction,
    GroupMeasureFamily,
    OrbitMeasureFamily,
    PsiFunction,
    StabilizerMeasureFamily,
)
from .reporting import ValidationReport
from .scenarios import Scenario
from .transforms import Kernel, ThetaMap
from .xcorr import CompressedFilter, Filter

SCENARIO_SCHEMA = "equicorr-scenario/1"
FILTER_SCHEMA = "equicorr-filter/1"
KERNEL_SCHEMA = "equicorr-kernel/1"
SECTION_SCHEMA = "equicorr-section/1"
MACKEY_SCHEMA = "equicorr-mackey-section/1"
REPORT_SCHEMA = "equicorr-report/1"


def dumps(doc: dict) -> str:
    """Stable text form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise StructuralError(msg)


def _expect_schema(doc: dict, schema: str) -> None:
    _require(isinstance(doc, dict), "document must be a JSON object")
    _require(doc.get("schema") == schema, f"expected schema {schema!r}, got {doc.get('schema')!r}")


# ---------------------------------------------------------------------------
# group and action


def group_to_dict(grp: FiniteGroup) -> dict:
    return {
        "elements": list(grp.elements),
        "cayley": grp.cayley.tolist(),
    }


def group_from_dict(doc: dict) -> FiniteGroup:
    _require(isinstance(doc, dict) and "cayley" in doc, "group needs a cayley table")
    cayley = np.asarray(doc["cayley"], dtype=np.int64)
    _require(cayley.ndim == 2 and cayley.shape[0] == cayley.shape[1], "cayley table must be square")
    n = cayley.shape[0]
    elements = doc.get("elements") or [str(i) for i in range(n)]
    _require(len(elements) == n, "element names must match the table size")
    _require(cayley.size == 0 or (cayley.min() >= 0 and cayley.max() < n), "cayley entries out of range")
    return group_from_tables(tuple(str(e) for e in elements), cayley)


def action_to_dict(action: GroupAction) -> dict:
    return {
        "group": group_to_dict(action.group),
        "base": list(action.base),
        "table": action.table.tolist(),
    }


def action_from_dict(doc: dict) -> GroupAction:
    _require(isinstance(doc, dict) and "table" in doc and "group" in doc, "action needs a group and a table")
    grp = group_from_dict(doc["group"])
    table = np.asarray(doc["table"], dtype=np.int64)
    _require(table.ndim == 2 and table.shape[0] == grp.order, "action table must be (order, base)")
    m = table.shape[1]
    base = doc.get("base") or [str(i) for i in range(m)]
    _require(len(base) == m, "base names must match the table width")
    _require(table.size == 0 or (table.min() >= 0 and table.max() < m), "action entries out of range")
    return GroupAction(grp, tuple(str(b) for b in base), table)


# ---------------------------------------------------------------------------
# bundles


def bundle_to_dict(bundle: EquivariantBundle) -> dict:
    """Trivial bundles collapse to a tag; anything else is stored in full."""
    n, m, d = bundle.action.group.order, bundle.action.base_size, bundle.dmax
    if np.array_equal(bundle.fiber_dim, np.full(m, d)) and np.array_equal(
        bundle.act_matrix, np.broadcast_to(np.eye(d), (n, m, d, d))
    ):
        return {"kind": "trivial", "fiber_dim": int(d)}
    return {
        "kind": "explicit",
        "fiber_dim": bundle.fiber_dim.tolist(),
        "act_matrix": bundle.act_matrix.tolist(),
    }


def bundle_from_dict(doc: dict, action: GroupAction) -> EquivariantBundle:
    _require(isinstance(doc, dict) and "kind" in doc, "bundle needs a kind")
    if doc["kind"] == "trivial":
        return trivial_bundle(action, int(doc.get("fiber_dim", 1)))
    if doc["kind"] == "explicit":
        fiber_dim = np.asarray(doc["fiber_dim"], dtype=np.int64)
        act_matrix = np.asarray(doc["act_matrix"], dtype=float)
        return EquivariantBundle(action, fiber_dim, act_matrix)
    raise StructuralError(f"unknown bundle kind {doc['kind']!r}")


# ---------------------------------------------------------------------------
# measure families


def families_to_dict(mu: GroupMeasureFamily, nu: StabilizerMeasureFamily, mubar: OrbitMeasureFamily) -> dict:
    return {
        "mu": {"weights": mu.weights.tolist(), "haar": bool(mu.haar)},
        "nu": {"weights": nu.weights.tolist()},
        "mubar": {"weights": mubar.weights.tolist()},
    }


def families_from_dict(doc: dict, action: GroupAction):
    _require(isinstance(doc, dict) and {"mu", "nu", "mubar"} <= set(doc), "families need mu, nu, mubar")
    mu = GroupMeasureFamily(action, np.asarray(doc["mu"]["weights"], dtype=float), haar=bool(doc["mu"].get("haar", False)))
    nu = StabilizerMeasureFamily(action, np.asarray(doc["nu"]["weights"], dtype=float))
    mubar = OrbitMeasureFamily(action, np.asarray(doc["mubar"]["weights"], dtype=float))
    return mu, nu, mubar


def psi_to_dict(psi: PsiFunction) -> dict:
    return {"values": psi.values.tolist(), "modulus": float(psi.modulus), "scale": float(psi.scale)}


def psi_from_dict(doc: dict, action: GroupAction) -> PsiFunction:
    return PsiFunction(
        action,
        np.asarray(doc["values"], dtype=float),
        modulus=float(doc.get("modulus", 1.0)),
        scale=float(doc.get("scale", 1.0)),
    )


def delta_to_dict(delta: DeltaFunction) -> dict:
    out: dict[str, dict[str, float]] = {}
    hs, bs = np.nonzero(delta.values != 0.0)  # values are (group, base)
    for h, b in zip(hs, bs):
        out.setdefault(str(int(b)), {})[str(int(h))] = float(delta.values[h, b])
    return {"by_base": out}


def delta_from_dict(doc: dict, action: GroupAction) -> DeltaFunction:
    _require(isinstance(doc, dict) and "by_base" in doc, "delta needs a by_base map")
    values = np.zeros((action.group.order, action.base_size))
    for b_key, row in doc["by_base"].items():
        b = _index(b_key, action.base_size, "base point")
        for h_key, v in row.items():
            h = _index(h_key, action.group.order, "group element")
            values[h, b] = float(v)
    return DeltaFunction(action, values)


def _index(key: str, bound: int, what: str) -> int:
    try:
        i = int(key)
    except (TypeError, ValueError):
        raise StructuralError(f"{what} index {key!r} is not an integer") from None
    _require(0 <= i < bound, f"{what} index {i} out of range [0, {bound})")
    return i


# ---------------------------------------------------------------------------
# filters and kernels


def filter_to_dict(filt: Filter | CompressedFilter) -> dict:
    if isinstance(filt, CompressedFilter):
        rows = {
            str(int(b)): _sparse_row(row)
            for b, row in sorted(filt.rows.items())
        }
        return {"schema": FILTER_SCHEMA, "compressed": True, "rows": rows}
    rows = {}
    for b in range(filt.action.base_size):
        hs = np.flatnonzero(filt.support[:, b])
        if hs.size:
            rows[str(int(b))] = {str(int(h)): filt.matrices[h, b].tolist() for h in hs}
    return {"schema": FILTER_SCHEMA, "compressed": False, "rows": rows}


def _sparse_row(row: np.ndarray) -> dict:
    out = {}
    for h in range(row.shape[0]):
        if np.any(row[h] != 0.0):
            out[str(h)] = row[h].tolist()
    return out


def filter_from_dict(doc: dict, input_bundle: EquivariantBundle, output_bundle: EquivariantBundle):
    _expect_schema(doc, FILTER_SCHEMA)
    action = input_bundle.action
    n, m = action.group.order, action.base_size
    de, df = input_bundle.dmax, output_bundle.dmax
    if doc.get("compressed"):
        rows: dict[int, np.ndarray] = {}
        for b_key, row in doc["rows"].items():
            b = _index(b_key, m, "base point")
            mat = np.zeros((n, df, de))
            for h_key, entry in row.items():
                mat[_index(h_key, n, "group element")] = _matrix(entry, df, de)
            rows[b] = mat
        return CompressedFilter(input_bundle, output_bundle, rows)
    matrices = np.zeros((n, m, df, de))
    for b_key, row in doc.get("rows", {}).items():
        b = _index(b_key, m, "base point")
        for h_key, entry in row.items():
            matrices[_index(h_key, n, "group element"), b] = _matrix(entry, df, de)
    return Filter(input_bundle, output_bundle, matrices)


def _matrix(entry, df: int, de: int) -> np.ndarray:
    mat = np.asarray(entry, dtype=float)
    _require(mat.shape == (df, de), f"matrix shape {mat.shape}, expected {(df, de)}")
    return mat


def kernel_to_dict(kern: Kernel) -> dict:
    entries = [
        {"c": int(c), "b": int(b), "matrix": kern.matrices[c, b].tolist()}
        for c, b in kern.support_pairs()
    ]
    return {"schema": KERNEL_SCHEMA, "entries": entries}


def kernel_from_dict(doc: dict, input_bundle: EquivariantBundle, output_bundle: EquivariantBundle) -> Kernel:
    _expect_schema(doc, KERNEL_SCHEMA)
    m = input_bundle.action.base_size
    de, df = input_bundle.dmax, output_bundle.dmax
    matrices = np.zeros((m, m, df, de))
    for entry in doc.get("entries", []):
        _require(isinstance(entry, dict) and {"c", "b", "matrix"} <= set(entry), "kernel entry needs c, b, matrix")
        c = _index(entry["c"], m, "target point")
        b = _index(entry["b"], m, "base point")
        matrices[c, b] = _matrix(entry["matrix"], df, de)
    return Kernel(input_bundle, output_bundle, matrices)


def theta_to_dict(theta: ThetaMap) -> dict:
    cs, bs = np.nonzero(theta.defined)
    return {"entries": [{"c": int(c), "b": int(b), "element": int(theta.reps[c, b])} for c, b in zip(cs, bs)]}


def theta_from_dict(doc: dict, action: GroupAction) -> ThetaMap:
    _require(isinstance(doc, dict) and "entries" in doc, "theta needs an entry list")
    m = action.base_size
    reps = np.full((m, m), -1, dtype=np.int64)
    for entry in doc["entries"]:
        c = _index(entry["c"], m, "target point")
        b = _index(entry["b"], m, "base point")
        reps[c, b] = _index(entry["element"], action.group.order, "group element")
    return ThetaMap(action, reps)


# ---------------------------------------------------------------------------
# sections


def section_to_dict(f: Section) -> dict:
    return {"schema": SECTION_SCHEMA, "values": f.values.tolist()}


def section_from_dict(doc: dict, bundle: EquivariantBundle) -> Section:
    _expect_schema(doc, SECTION_SCHEMA)
    values = np.asarray(doc["values"], dtype=float)
    return Section(bundle, values)


def mackey_to_dict(m: MackeySection) -> dict:
    return {"schema": MACKEY_SCHEMA, "values": m.values.tolist()}


def mackey_from_dict(doc: dict, bundle: EquivariantBundle) -> MackeySection:
    _expect_schema(doc, MACKEY_SCHEMA)
    values = np.asarray(doc["values"], dtype=float)
    return MackeySection(bundle, values)


# ---------------------------------------------------------------------------
# scenarios and reports


def scenario_to_dict(scn: Scenario) -> dict:
    doc: dict = {
        "schema": SCENARIO_SCHEMA,
        "name": scn.name,
        "params": scn.params,
        "action": action_to_dict(scn.action),
        "input_bundle": bundle_to_dict(scn.input_bundle),
        "families": families_to_dict(scn.mu, scn.nu, scn.mubar),
    }
    if scn.output_bundle is scn.input_bundle:
        doc["output_bundle"] = "same"
    else:
        doc["output_bundle"] = bundle_to_dict(scn.output_bundle)
    if scn.psi is not None:
        doc["psi"] = psi_to_dict(scn.psi)
    if scn.delta is not None:
        doc["delta"] = delta_to_dict(scn.delta)
    if scn.filt is not None:
        doc["filter"] = filter_to_dict(scn.filt)
    if scn.kernel is not None:
        doc["kernel"] = kernel_to_dict(scn.kernel)
    if scn.thetas:
        doc["thetas"] = {name: theta_to_dict(t) for name, t in sorted(scn.thetas.items())}
    if scn.extras:
        doc["extras"] = {k: v for k, v in sorted(scn.extras.items()) if isinstance(v, (int, float, str, bool))}
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    _expect_schema(doc, SCENARIO_SCHEMA)
    action = action_from_dict(doc["action"])
    input_bundle = bundle_from_dict(doc["input_bundle"], action)
    out_doc = doc.get("output_bundle", "same")
    output_bundle = input_bundle if out_doc == "same" else bundle_from_dict(out_doc, action)
    mu, nu, mubar = families_from_dict(doc["families"], action)
    scn = Scenario(
        str(doc.get("name", "scenario")),
        dict(doc.get("params", {})),
        action,
        input_bundle,
        output_bundle,
        mu,
        nu,
        mubar,
    )
    if "psi" in doc:
        scn.psi = psi_from_dict(doc["psi"], action)
    if "delta" in doc:
        scn.delta = delta_from_dict(doc["delta"], action)
    if "filter" in doc:
        filt = filter_from_dict(doc["filter"], input_bundle, output_bundle)
        if isinstance(filt, CompressedFilter):
            from .xcorr import expand_filter

            filt = expand_filter(filt)
        scn.filt = filt
    if "kernel" in doc:
        scn.kernel = kernel_from_dict(doc["kernel"], input_bundle, output_bundle)
    for name, tdoc in doc.get("thetas", {}).items():
        scn.thetas[str(name)] = theta_from_dict(tdoc, action)
    scn.extras.update(doc.get("extras", {}))
    return scn


def report_to_dict(report: ValidationReport, context: dict | None = None) -> dict:
    doc = {"schema": REPORT_SCHEMA, "checks": [c.as_dict() for c in report.sorted().checks]}
    if context:
        doc["context"] = context
    return doc


def load_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path} is not valid JSON: {exc}") from exc


def save_document(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
