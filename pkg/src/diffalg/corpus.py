"""Built-in operator corpus and loading helpers for the CLI.

Each entry is a classical recursion operator stored in the JSON operator
schema together with its expected verdicts, used as a regression suite.  The
files under corpus/ in the repository hold the bare schema for CLI use and
must round-trip against these definitions.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .grammar import parse_function
from .jets import Grading
from .nonlocal_ops import NonlocalOp, operator_from_json


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    operator_json: dict
    seed: Optional[str] = None
    pair: Optional[Tuple[List, List]] = None  # (A coeffs, B coeffs) in schema form
    pair_start: Optional[str] = None
    expect_hereditary: bool = True
    expect_integrable: bool = True
    recursion_true: Tuple[str, ...] = ()
    recursion_false: Tuple[str, ...] = ()
    note: str = ""

    def load(self) -> Tuple[NonlocalOp, Grading]:
        return operator_from_json(self.operator_json)

    def load_pair(self):
        from .operators import DiffOp
        from .jets import RatFun
        if self.pair is None:
            return None
        ops = []
        for coeffs in self.pair:
            op = DiffOp({int(k): RatFun(parse_function(e)) for e, k in coeffs})
            ops.append(op)
        return tuple(ops)


ENTRIES: Dict[str, CorpusEntry] = {}


def _register(entry: CorpusEntry) -> None:
    ENTRIES[entry.name] = entry


_register(CorpusEntry(
    name="kdv",
    operator_json={
        "local": [["2*u", 0], ["1", 2]],
        "nonlocal": [["u'", "1"]],
        "grading": {"u": "even"},
    },
    seed="u'",
    recursion_true=("u'", "u''' + 3*u*u'"),
    note="Korteweg-de Vries recursion operator",
))

_register(CorpusEntry(
    name="burgers",
    operator_json={
        "local": [["u", 0], ["1", 1]],
        "nonlocal": [["u'", "1"]],
        "grading": {"u": "even"},
    },
    seed="u'",
    pair=([["1", 2], ["u", 1], ["u'", 0]], [["1", 1]]),
    pair_start="1",
    recursion_true=("u'",),
    note="Burgers recursion operator with its defining pair",
))

_register(CorpusEntry(
    name="potential-burgers",
    operator_json={
        "local": [["u'", 0], ["1", 1]],
        "nonlocal": [],
        "grading": {"u": "even"},
    },
    seed="u'",
    recursion_true=("u'",),
    note="potential Burgers recursion operator (purely local)",
))

_register(CorpusEntry(
    name="example-216b",
    operator_json={
        "local": [["u", 0], ["1", 1]],
        "nonlocal": [["u'", "1"]],
        "grading": {"u": "even"},
    },
    seed="u'",
    note="first-order weakly non-local hereditary operator",
))

_register(CorpusEntry(
    name="counterexample",
    operator_json={
        "local": [["u''", 0]],
        "nonlocal": [["-1", "u'''"]],
        "grading": {"u": "even"},
    },
    expect_hereditary=True,
    expect_integrable=False,
    recursion_true=("1", "u'"),
    recursion_false=("u''",),
    note="hereditary but not integrable; its tail slot is not a variational "
         "derivative",
))


def builtin_names() -> List[str]:
    return sorted(ENTRIES)


def load_operator(spec: str) -> Tuple[NonlocalOp, Grading]:
    """Resolve --op arguments: a JSON file path or a builtin corpus name."""
    if os.path.exists(spec):
        with open(spec) as fh:
            data = json.load(fh)
        if "operator" in data:
            data = data["operator"]
        return operator_from_json(data)
    name = spec[:-5] if spec.endswith(".json") else spec
    name = os.path.basename(name)
    if name in ENTRIES:
        return ENTRIES[name].load()
    raise FileNotFoundError(
        f"no such operator file or builtin: {spec!r}; builtins: "
        + ", ".join(builtin_names()))


def write_corpus_files(directory: str) -> List[str]:
    """Materialize the builtin corpus as bare-schema JSON files."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, entry in sorted(ENTRIES.items()):
        path = os.path.join(directory, f"{name}.json")
        with open(path, "w") as fh:
            json.dump(entry.operator_json, fh, indent=2)
            fh.write("\n")
        written.append(path)
    return written
