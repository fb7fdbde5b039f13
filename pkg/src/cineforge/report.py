"""Evaluation runs and report rendering.

evaluate() gathers whichever metrics the inputs allow (frame SSIM, script
BLEU, parser corpus accuracy) into one JSON-ready mapping. write_report()
persists it: metrics.json, a per-frame CSV, and matplotlib figures
rendered to PNG files next to the CSV.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .compositor import read_frame
from .errors import InvalidInputError
from .metrics import BleuParams, SsimParams, bleu, parsing_accuracy, ssim

__all__ = ["frame_pairs", "evaluate", "write_report"]


def frame_pairs(ref_dir: str | Path, gen_dir: str | Path) -> list[tuple[str, Path, Path]]:
    """PNG files present (by name) in both directories, sorted by name."""
    ref_dir, gen_dir = Path(ref_dir), Path(gen_dir)
    for d in (ref_dir, gen_dir):
        if not d.is_dir():
            raise InvalidInputError(f"frame directory not found: {d}")
    ref_names = {p.name for p in ref_dir.glob("*.png")}
    gen_names = {p.name for p in gen_dir.glob("*.png")}
    common = sorted(ref_names & gen_names)
    if not common:
        raise InvalidInputError(
            f"no common PNG frame names between {ref_dir} and {gen_dir}")
    return [(name, ref_dir / name, gen_dir / name) for name in common]


def evaluate(ref_dir: str | Path | None = None,
             gen_dir: str | Path | None = None,
             candidate_file: str | Path | None = None,
             reference_files: tuple[str | Path, ...] = (),
             corpus_dir: str | Path | None = None,
             ssim_params: SsimParams | None = None,
             bleu_params: BleuParams | None = None) -> dict:
    """Run every metric the inputs support.

    Returns {"ssim_mean", "bleu", "parsing"} (absent inputs yield null) plus
    "ssim_frames": per-file scores used by the report writer.
    """
    if (ref_dir is None) != (gen_dir is None):
        raise InvalidInputError("SSIM needs both --ref and --gen directories")
    if candidate_file is not None and not reference_files:
        raise InvalidInputError("BLEU needs at least one reference file")
    if ref_dir is None and candidate_file is None and corpus_dir is None:
        raise InvalidInputError("nothing to evaluate: no frames, script, or corpus")

    per_frame: list[dict] = []
    ssim_mean = None
    if ref_dir is not None:
        for name, ref_path, gen_path in frame_pairs(ref_dir, gen_dir):
            score = ssim(read_frame(ref_path), read_frame(gen_path),
                         ssim_params or SsimParams())
            per_frame.append({"file": name, "ssim": score})
        ssim_mean = sum(row["ssim"] for row in per_frame) / len(per_frame)

    bleu_score = None
    if candidate_file is not None:
        candidate = Path(candidate_file).read_text(encoding="utf-8")
        references = [Path(p).read_text(encoding="utf-8")
                      for p in reference_files]
        bleu_score = bleu(candidate, references, bleu_params or BleuParams())

    parsing = None
    if corpus_dir is not None:
        parsing = parsing_accuracy(corpus_dir)

    return {
        "ssim_mean": ssim_mean,
        "bleu": bleu_score,
        "parsing": parsing,
        "ssim_frames": per_frame,
    }


def _render_figures(report: dict, out_dir: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    frames = report.get("ssim_frames") or []
    if frames:
        scores = [row["ssim"] for row in frames]
        fig, ax = plt.subplots(figsize=(8, 4))
        ax.plot(range(1, len(scores) + 1), scores, linewidth=1.2)
        ax.axhline(report["ssim_mean"], linestyle="--", linewidth=1.0,
                   label=f"mean {report['ssim_mean']:.4f}")
        ax.set_xlabel("frame")
        ax.set_ylabel("SSIM")
        ax.set_title("Per-frame structural similarity")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_dir / "ssim_per_frame.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(scores, bins=min(30, max(5, len(scores) // 3)))
        ax.set_xlabel("SSIM")
        ax.set_ylabel("frames")
        ax.set_title("SSIM distribution")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out_dir / "ssim_histogram.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    parsing = report.get("parsing")
    if parsing:
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.bar(["parsed", "fallback"], [parsing["parsed"], parsing["fallback"]])
        ax.set_ylabel("fixtures")
        ax.set_title(f"Parser corpus (accuracy {parsing['accuracy']:.2%})")
        ax.grid(True, axis="y", alpha=0.3)
        fig.tight_layout()
        path = out_dir / "parsing_counts.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def write_report(report: dict, out_dir: str | Path) -> dict[str, list[str]]:
    """Persist an evaluate() result: metrics.json, per-frame CSV, figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    metrics_doc = {
        "ssim_mean": report.get("ssim_mean"),
        "bleu": report.get("bleu"),
        "parsing": report.get("parsing"),
    }
    json_path = out_dir / "metrics.json"
    json_path.write_text(json.dumps(metrics_doc, indent=2) + "\n",
                         encoding="utf-8")
    written = [json_path]

    frames = report.get("ssim_frames") or []
    if frames:
        csv_path = out_dir / "ssim_per_frame.csv"
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "file", "ssim"])
            for i, row in enumerate(frames, start=1):
                writer.writerow([i, row["file"], f"{row['ssim']:.9f}"])
        written.append(csv_path)

    written.extend(_render_figures(report, out_dir))
    return {"written": [str(p) for p in written]}
