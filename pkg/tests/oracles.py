"""Independent oracles the test suite checks the implementation against.

Nothing in here imports the expression evaluator or the engine's
transition logic; conditions are evaluated with Python's own eval (every
fixture condition is also a valid Python boolean expression), and flows
are walked straight off their raw JSON documents.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

from flowd.expr.nodes import AttrRef, Binary, Expression, Literal, Unary

# --- truth-table oracle for Boolean expression ASTs ------------------------

def boolean_python_source(node: Expression) -> str:
    """Renders a Boolean AST as Python source, fully parenthesized."""
    if isinstance(node, Literal):
        return repr(bool(node.value))
    if isinstance(node, AttrRef):
        return node.path
    if isinstance(node, Unary):
        return f"(not {boolean_python_source(node.operand)})"
    if isinstance(node, Binary):
        left = boolean_python_source(node.left)
        right = boolean_python_source(node.right)
        return f"({left} {node.op} {right})"
    raise AssertionError(f"not a Boolean node: {node!r}")


def truth_table(node: Expression, names: list[str]) -> dict[tuple, bool]:
    source = boolean_python_source(node)
    code = compile(source, "<oracle>", "eval")
    table = {}
    for assignment in itertools.product([False, True], repeat=len(names)):
        env = dict(zip(names, assignment))
        table[assignment] = eval(code, {"__builtins__": {}}, env)
    return table


# --- reachability oracle ---------------------------------------------------

def reachable_by_path_enumeration(flow_doc: dict) -> set[str]:
    """Every step that lies on at least one simple path from Start,
    found by exhaustively enumerating those paths."""
    edges: dict[str, list[str]] = {}
    for t in flow_doc["transitions"]:
        edges.setdefault(t["from"], []).append(t["to"])
    start = next(
        s["id"] for s in flow_doc["steps"] if s.get("op") == "Start"
    )
    reached: set[str] = set()

    def explore(path: list[str]) -> None:
        reached.update(path)
        for nxt in edges.get(path[-1], []):
            if nxt not in path:
                explore(path + [nxt])

    explore([start])
    return reached


# --- flow walker -----------------------------------------------------------

_CANNED = {"Integer": 1, "Decimal": 1.0, "String": "x", "Boolean": True}


class FlowWalker:
    """Interprets a flow straight from its JSON document. Boolean PROMPT
    attributes branch over both values; everything else gets a canned
    deterministic value. Conditions run through Python's eval."""

    def __init__(self, flow_doc: dict, domain_docs: list[dict]) -> None:
        self.flow = flow_doc
        self.steps = {s["id"]: s for s in flow_doc["steps"]}
        self.start = next(
            s["id"] for s in flow_doc["steps"] if s.get("op") == "Start"
        )
        self.tasks = {}
        self.attrs = {}
        for doc in domain_docs:
            for task in doc["tasks"]:
                self.tasks[(doc["name"], task["name"])] = task
            for data_type in doc["types"]:
                for attr in data_type["attributes"]:
                    self.attrs[attr["name"]] = attr

    def prompt_value(self, attr_name: str) -> object:
        attr = self.attrs[attr_name]
        if "choices" in attr:
            return attr["choices"]["values"][0]
        return _CANNED[attr["type"]]

    def explore(self, limit: int = 64) -> set[tuple]:
        """All (responses, status, env) outcomes over every assignment of
        the Boolean prompts, up to `limit` prompt rounds per path."""
        outcomes: set[tuple] = set()

        def run(step_id: str, env: dict, fed: tuple, budget: int) -> None:
            step = self.steps[step_id]
            if step.get("op") == "End":
                outcomes.add((fed, "Finalized", tuple(sorted(env.items()))))
                return
            if step["kind"] == "Domain":
                task = self.tasks[(step["domain"], step["task"])]
                branches = [(env, fed)]
                for action in task["actions"]:
                    if action["kind"] != "UserIteration":
                        continue
                    if action["iteration"] != "PROMPT":
                        continue
                    if budget <= 0:
                        return
                    budget -= 1
                    new_branches = []
                    for base_env, base_fed in branches:
                        for combo in self._prompt_combos(action["attributes"]):
                            env2 = dict(base_env)
                            env2.update(combo)
                            new_branches.append(
                                (env2, base_fed + (tuple(sorted(combo.items())),))
                            )
                    branches = new_branches
                for env2, fed2 in branches:
                    self._leave(step_id, env2, fed2, budget, outcomes, run)
                return
            if step["kind"] == "Common" and step.get("op") == "Assign":
                env = dict(env)
                env[step["target"]] = eval(
                    step["expression"], {"__builtins__": {}, "true": True, "false": False}, dict(env)
                )
            self._leave(step_id, env, fed, budget, outcomes, run)

        run(self.start, {}, (), limit)
        return outcomes

    def _prompt_combos(self, attributes: list[str]):
        pools = []
        for name in attributes:
            attr = self.attrs[name]
            if attr["type"] == "Boolean" and "choices" not in attr:
                pools.append([(name, False), (name, True)])
            else:
                pools.append([(name, self.prompt_value(name))])
        for combo in itertools.product(*pools):
            yield dict(combo)

    def _leave(self, step_id, env, fed, budget, outcomes, run) -> None:
        nxt = self.next_step(step_id, env)
        if nxt is None:
            outcomes.add((fed, "Finalized", tuple(sorted(env.items()))))
            return
        run(nxt, env, fed, budget)

    def next_step(self, step_id: str, env: dict) -> str | None:
        outgoing = sorted(
            (t for t in self.flow["transitions"] if t["from"] == step_id),
            key=lambda t: t["order"],
        )
        for t in outgoing:
            if "condition" not in t:
                return t["to"]
            truth = eval(
                t["condition"],
                {"__builtins__": {}, "true": True, "false": False},
                dict(env),
            )
            if truth is True:
                return t["to"]
        return None


# --- protocol checks -------------------------------------------------------

def alternation_violations(entries: list[dict]) -> list[int]:
    """Seq numbers where the request/response conversation breaks the
    strict request-then-response alternation."""
    bad = []
    previous = None
    for entry in entries:
        direction = entry["direction"]
        if direction == "Internal":
            continue
        if direction == "EngineToClient" and previous == "EngineToClient":
            bad.append(entry["seq"])
        if direction == "ClientToEngine" and previous != "EngineToClient":
            bad.append(entry["seq"])
        previous = direction
    return bad


REQUEST_TOP_KEYS = {"instanceId", "displayElements", "gatherElements", "constraints", "value"}
_GATHER_KEYS = {"name", "label", "set", "type"}
_DISPLAY_KEYS = {"name", "label", "type", "value", "render"}
_CONSTRAINT_KEYS = {"name", "valueFrom"}


def request_scan_violations(request: dict, forbidden: set[str]) -> list[str]:
    """Schema-scans a request for flow internals: wrong keys anywhere, or
    any string value naming a step, flow, task, service, or condition."""
    problems = []
    if set(request.keys()) != REQUEST_TOP_KEYS:
        problems.append(f"top-level keys {sorted(request.keys())}")
    for element in request.get("gatherElements", []):
        if not set(element.keys()) <= _GATHER_KEYS:
            problems.append(f"gather keys {sorted(element.keys())}")
    for element in request.get("displayElements", []):
        if not set(element.keys()) <= _DISPLAY_KEYS:
            problems.append(f"display keys {sorted(element.keys())}")
    for constraint in request.get("constraints", []):
        if not set(constraint.keys()) <= _CONSTRAINT_KEYS:
            problems.append(f"constraint keys {sorted(constraint.keys())}")

    def strings(value):
        if isinstance(value, str):
            yield value
        elif isinstance(value, dict):
            for v in value.values():
                yield from strings(v)
        elif isinstance(value, list):
            for v in value:
                yield from strings(v)

    for text in strings(request):
        if text in forbidden:
            problems.append(f"forbidden name {text!r}")
    return problems


def forbidden_names(repo_root: Path) -> set[str]:
    """Step ids, flow names, task names, service names, domain names, and
    condition sources from every model document under a repository root.

    Attribute paths and choices-list names are protocol vocabulary (they
    appear as element names and valueFrom references), so anything that
    doubles as one of those is not counted against a request."""
    names: set[str] = set()
    vocabulary: set[str] = set()
    for path in sorted(repo_root.glob("flows/*.flow.json")):
        doc = json.loads(path.read_text())
        names.add(doc["name"])
        for step in doc["steps"]:
            names.add(step["id"])
            if "task" in step:
                names.add(step["task"])
        for t in doc["transitions"]:
            if "condition" in t:
                names.add(t["condition"])
    for path in sorted(repo_root.glob("domains/*.domain.json")):
        doc = json.loads(path.read_text())
        names.add(doc["name"])
        for service in doc["services"]:
            names.add(service["name"])
        for task in doc["tasks"]:
            names.add(task["name"])
        for data_type in doc["types"]:
            for attr in data_type["attributes"]:
                vocabulary.add(attr["name"])
                if "choices" in attr:
                    vocabulary.add(attr["choices"]["name"])
    return names - vocabulary
