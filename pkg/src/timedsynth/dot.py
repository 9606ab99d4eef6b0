"""Graphviz export of automaton, game and controller documents."""
from __future__ import annotations


def _q(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def automaton_dot(doc: dict, name: str = "automaton") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    initial = set(doc.get("initial", ()))
    final = set(doc.get("final", ()))
    # initial locations are drawn bold rather than with an extra entry node
    for loc in doc.get("locations", ()):
        shape = "doublecircle" if loc in final else "circle"
        bold = ", style=bold" if loc in initial else ""
        lines.append(f"  {_q(loc)} [shape={shape}{bold}];")
    for t in doc.get("transitions", ()):
        label = t["label"]
        if t.get("guard", "true") != "true":
            label += f" [{t['guard']}]"
        if t.get("resets"):
            label += " {" + ",".join(t["resets"]) + "}"
        lines.append(f"  {_q(t['from'])} -> {_q(t['to'])} [label={_q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def controller_dot(doc: dict) -> str:
    lines = ['digraph "controller" {', "  rankdir=LR;"]
    for i in range(doc["memory"]):
        bold = ", style=bold" if i == doc["initial"] else ""
        lines.append(f"  {i} [shape=circle{bold}];")
    for r in doc["rules"]:
        label = f"{r['input']} [{r['guard']}] / {r['output']}"
        if r["resets"]:
            label += " {" + ",".join(r["resets"]) + "}"
        lines.append(f"  {r['source']} -> {r['target']} [label={_q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def document_dot(doc: dict) -> str:
    """DOT for any JSON document this package writes."""
    if "rules" in doc:
        return controller_dot(doc)
    if "condition" in doc:
        return automaton_dot(doc["condition"], "condition")
    if "separator" in doc:
        return automaton_dot(doc["separator"], "separator")
    if "transitions" in doc:
        return automaton_dot(doc)
    if set(doc) == {"A", "B"}:
        return automaton_dot(doc["A"], "A") + automaton_dot(doc["B"], "B")
    raise ValueError("unrecognised document")
