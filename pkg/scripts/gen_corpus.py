"""Regenerate the parser corpus under tests/corpus.

Files whose stem ends in _ok must parse without falling back; files whose
stem ends in _bad must be rejected by the custom parser.  Keep the two
counts in sync with the README if they change.
"""
from __future__ import annotations

import json
from pathlib import Path

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "corpus"

SCENE_TEXTS = [
    ("A quiet harbour at dawn", "mist over still water, lone fishing boat"),
    ("The crew discovers the map", "lantern light on weathered parchment"),
    ("Storm hits the open sea", "waves crashing over the deck, torn sails"),
    ("The captain takes the wheel", "rain-soaked figure framed against lightning"),
    ("Landfall on the hidden island", "sunrise over black volcanic cliffs"),
]


def dash_doc(n: int, rule: str = "---") -> str:
    parts = []
    for head, vis in SCENE_TEXTS[:n]:
        parts.append(f"{head}.\nPrompt: {vis}")
    return f"\n{rule}\n".join(parts) + "\n"


def blank_doc(n: int) -> str:
    parts = []
    for head, vis in SCENE_TEXTS[:n]:
        parts.append(f"{head}. The moment unfolds slowly. {vis}.")
    return "\n\n".join(parts) + "\n"


def marker_doc(n: int, marker: str = "Scene {i}:") -> str:
    lines = []
    for i, (head, vis) in enumerate(SCENE_TEXTS[:n], start=1):
        lines.append(marker.format(i=i) + f" {head}. {vis}.")
    return "\n".join(lines) + "\n"


def json_array(n: int, key: str = "prompt", heading: bool = False) -> str:
    rows = []
    for i, (head, vis) in enumerate(SCENE_TEXTS[:n], start=1):
        row: dict[str, str] = {"description": f"{head}."}
        row[key] = vis
        if heading:
            row["heading"] = f"PART {i}"
        rows.append(row)
    return json.dumps(rows, indent=2)


WELL_FORMED: dict[str, str] = {
    "dash_five_ok.txt": dash_doc(5),
    "dash_long_rule_ok.txt": dash_doc(5, rule="--------"),
    "dash_three_ok.txt": dash_doc(3),
    "dash_seven_ok.txt": (
        dash_doc(5).rstrip("\n")
        + "\n---\nAn echo of the journey.\n---\nCredits roll over the sea.\n"
    ),
    "blank_lines_ok.txt": blank_doc(5),
    "blank_lines_two_ok.txt": blank_doc(2),
    "markers_ok.txt": marker_doc(5),
    "markers_lowercase_ok.txt": marker_doc(5, marker="scene {i}:"),
    "markers_mixed_case_ok.txt": marker_doc(5, marker="ScEnE {i}:"),
    "markers_padded_ok.txt": marker_doc(4, marker="Scene  {i} :"),
    "single_paragraph_ok.txt": (
        "One long take drifts through an abandoned lighthouse while the "
        "storm builds outside and the keeper's journal pages turn in the wind.\n"
    ),
    "prompt_only_segments_ok.txt": "\n---\n".join(
        f"Prompt: {vis}" for _, vis in SCENE_TEXTS) + "\n",
    "unicode_ok.txt": (
        "Un café désert à minuit.\n\nLa pluie tombe sur les pavés.\n\n"
        "Un regard échangé à travers la vitre.\n\nLe néon s'éteint.\n\n"
        "L'aube grise sur la ville.\n"
    ),
    "windows_newlines_ok.txt": dash_doc(5).replace("\n", "\r\n"),
    "trailing_noise_ok.txt": dash_doc(5) + "\n\n   \n",
    "json_array_ok.json": json_array(5),
    "json_object_ok.json": json.dumps({"scenes": json.loads(json_array(5))}),
    "json_visual_prompt_key_ok.json": json_array(5, key="visual_prompt"),
    "json_headings_ok.json": json_array(5, heading=True),
    "json_two_scenes_ok.json": json_array(2),
    "json_seven_scenes_ok.json": json.dumps(
        json.loads(json_array(5))
        + [{"description": "Epilogue at sea."}, {"description": "Credits."}]
    ),
    "json_description_only_ok.json": json.dumps(
        [{"description": f"{head}. {vis}."} for head, vis in SCENE_TEXTS]
    ),
    "json_compact_ok.json": json.dumps(json.loads(json_array(5)),
                                       separators=(",", ":")),
    "json_extra_keys_ok.json": json.dumps(
        [dict(row, mood="tense", camera="crane")
         for row in json.loads(json_array(5))]
    ),
    "mixed_styles_ok.txt": (
        # dash rules win over the blank lines inside the segments
        dash_doc(5).replace(".\nPrompt:", ".\n\nPrompt:")
    ),
}

MALFORMED: dict[str, str] = {
    "broken_json_bad.json": '[{"description": "unterminated"',
    "scenes_not_list_bad.json": json.dumps({"scenes": "not a list"}),
    "numbers_array_bad.json": "[1, 2, 3]",
    "missing_description_bad.json": json.dumps(
        [{"prompt": "no description here"}] * 5),
    "blank_description_bad.json": json.dumps(
        [{"description": "   ", "prompt": "x"}] * 5),
    "empty_array_bad.json": "[]",
    "empty_object_bad.json": "{}",
    "empty_bad.txt": "",
    "whitespace_bad.txt": "   \n\t\n   \n",
    "dashes_only_bad.txt": "---\n---\n---\n",
}


def main() -> None:
    CORPUS.mkdir(parents=True, exist_ok=True)
    for name, text in {**WELL_FORMED, **MALFORMED}.items():
        (CORPUS / name).write_text(text, encoding="utf-8")
    print(f"wrote {len(WELL_FORMED)} well-formed and {len(MALFORMED)} "
          f"malformed fixtures to {CORPUS}")


if __name__ == "__main__":
    main()
