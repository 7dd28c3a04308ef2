"""Reference values for the fixture corpora, special functions and embeddings.

Run from the repository root:

    python3 fixtures/oracle/derive.py

The counting code here is a regex re-implementation of the tag grammar and
shares nothing with the Rust crates. Special-function and test-statistic
references come from scipy; linear algebra from numpy.
"""

import hashlib
import json
import random
import re
from collections import Counter
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import special, stats

ROOT = Path(__file__).resolve().parents[1]

FC = ["time", "place", "manner", "cause", "effect", "condition", "purpose", "concession"]
ANCHORS = ["S", "V", "O"]
ORDER = FC + ANCHORS
CHUNK = re.compile(r"<(\w+)>(.*?)</\1>")


def frac(x):
    return f"{x.numerator}/{x.denominator}"


def load(path, default_name):
    sentences = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        if "\t" in line:
            sid, body = line.split("\t", 1)
        else:
            sid, body = f"{default_name}-L{n}", line
        chunks = [(m.group(1), m.group(2)) for m in CHUNK.finditer(body)]
        sentences.append((sid, body, chunks))
    return sentences


def render(labels):
    return "".join(f"<{l}>" for l in labels)


def ranked(counter):
    key = lambda item: (-item[1], [ORDER.index(l) for l in item[0]])
    return [{"pattern": render(p), "frequency": c} for p, c in sorted(counter.items(), key=key)]


def corpus_expectations(path, name):
    sentences = load(path, name)
    labels_per = [[l for l, _ in ch] for _, _, ch in sentences]
    fc_counts = Counter(l for labels in labels_per for l in labels if l in FC)
    total_fc = sum(fc_counts.values())

    positions = {}
    for (sid, _, _), labels in zip(sentences, labels_per):
        n = len(labels)
        for i, l in enumerate(labels):
            if l not in FC:
                continue
            rel = Fraction(i, n - 1) if n > 1 else Fraction(1, 2)
            positions.setdefault(l, []).append({"sentence_id": sid, "rel_pos": frac(rel)})

    condprob = []
    for fc in FC:
        for anchor in ANCHORS:
            before = pairs = 0
            for labels in labels_per:
                if fc not in labels or anchor not in labels:
                    continue
                first = labels.index(anchor)
                for i, l in enumerate(labels):
                    if l == fc:
                        pairs += 1
                        before += i < first
            if pairs:
                condprob.append({
                    "fc": fc,
                    "anchor": anchor,
                    "p_before": frac(Fraction(before, pairs)),
                    "p_after": frac(Fraction(pairs - before, pairs)),
                    "n": pairs,
                })

    patterns = Counter(tuple(labels) for labels in labels_per if labels)
    combos = Counter()
    transitions = Counter()
    for labels in labels_per:
        proj = [l for l in labels if l in FC]
        if len(proj) >= 2:
            combos[tuple(proj)] += 1
        for a, b in zip(proj, proj[1:]):
            transitions[(a, b)] += 1
    rows = {}
    for a in FC:
        row_total = sum(transitions[(a, b)] for b in FC)
        rows[a] = {
            b: {
                "count": transitions[(a, b)],
                "prob": frac(Fraction(transitions[(a, b)], row_total)) if row_total else None,
            }
            for b in FC
        }

    return {
        "lines": len(sentences),
        "chunks": sum(len(l) for l in labels_per),
        "fcs": total_fc,
        "fc_distribution": {
            fc: {
                "frequency": fc_counts[fc],
                "proportion": frac(Fraction(fc_counts[fc], total_fc)) if total_fc else "0/1",
            }
            for fc in FC
        },
        "positions": positions,
        "condprob": condprob,
        "patterns": ranked(patterns),
        "combos": ranked(combos),
        "transitions": rows,
        "sequence_line_7": labels_per[6] if len(labels_per) > 6 else None,
    }


def build_prompt(fs, target):
    lines = [fs["instruction"], "", "Labels:"]
    for label in ORDER:
        if label in fs["per_label_examples"]:
            lines.append(f"- <{label}>: {fs['per_label_examples'][label]}")
    lines += ["", "Examples:"]
    for raw, annotated in fs["examples"]:
        lines += ["", f"Input: {raw}", f"Output: {annotated}"]
    lines += ["", "Annotate the next sentence. Reply with the annotated sentence only.",
              f"Input: {target}", "Output:"]
    return "\n".join(lines)


def special_grid(rng):
    gamma, beta = [], []
    for s, x in [(0.5, 0.0), (0.5, 12.5), (1.0, 1.0), (2.5, 0.1)]:
        gamma.append({"s": s, "x": x, "q": float(special.gammaincc(s, x))})
    while len(gamma) < 200:
        s = round(10 ** rng.uniform(-1.3, 1.78), 6)
        x = round(rng.uniform(0.0, 3.0 * s + 5.0), 6)
        gamma.append({"s": s, "x": x, "q": float(special.gammaincc(s, x))})
    for a, b, x in [(2.0, 3.0, 0.0), (2.0, 3.0, 1.0), (0.5, 0.5, 0.5), (10.0, 0.5, 0.9)]:
        beta.append({"a": a, "b": b, "x": x, "i": float(special.betainc(a, b, x))})
    while len(beta) < 200:
        a = round(10 ** rng.uniform(-1.3, 1.78), 6)
        b = round(10 ** rng.uniform(-1.3, 1.78), 6)
        x = round(rng.uniform(0.0, 1.0), 6)
        beta.append({"a": a, "b": b, "x": x, "i": float(special.betainc(a, b, x))})
    return {"gamma_q": gamma, "inc_beta": beta}


def stat_pairs(rng):
    out = []
    for _ in range(50):
        front = rng.randint(0, 400)
        back = rng.randint(0, 400)
        if front + back == 0:
            back = 1
        chi = stats.chisquare([front, back])
        na, nb = rng.randint(2, 60), rng.randint(2, 60)
        a = [round(rng.random(), 4) for _ in range(na)]
        b = [round(rng.betavariate(2, 3), 4) for _ in range(nb)]
        t = stats.ttest_ind(a, b, equal_var=False)
        va, vb = np.var(a, ddof=1) / na, np.var(b, ddof=1) / nb
        df = (va + vb) ** 2 / (va**2 / (na - 1) + vb**2 / (nb - 1))
        out.append({
            "bins": [front, back],
            "chi2": float(chi.statistic),
            "chi2_p": float(chi.pvalue),
            "a": a,
            "b": b,
            "t": float(t.statistic),
            "df": float(df),
            "t_p": float(t.pvalue),
        })
    return out


def embeddings(rng):
    dim = 6
    lines = []
    fcs = ["time", "place"]
    for lang, shift in (("en", 0.4), ("zh", -0.3)):
        for i in range(10):
            vec = [round(rng.gauss(shift if k % 2 == 0 else 0.1, 1.0 / (k + 1)), 4) for k in range(dim)]
            tags = sorted([lang, fcs[i % 2]])
            lines.append({"id": f"{lang}-{i:02}", "tags": tags, "vec": vec})
    text = "".join(json.dumps(l, separators=(",", ":")) + "\n" for l in lines)
    return text, lines


def emb_expectations(text, lines):
    mat = np.array([l["vec"] for l in lines])
    zh = np.array([l["vec"] for l in lines if "zh" in l["tags"]])
    en = np.array([l["vec"] for l in lines if "en" in l["tags"]])
    cen_zh, cen_en = zh.mean(axis=0), en.mean(axis=0)
    cos = float(cen_en @ cen_zh / (np.linalg.norm(cen_en) * np.linalg.norm(cen_zh)))
    cov = np.cov(mat, rowvar=False, ddof=1)
    evals = np.sort(np.linalg.eigvalsh(cov))[::-1]
    return {
        "sha256": hashlib.sha256(text.encode()).hexdigest(),
        "count": len(lines),
        "dim": mat.shape[1],
        "centroid_zh": [float(v) for v in cen_zh],
        "centroid_en": [float(v) for v in cen_en],
        "cosine_en_zh": cos,
        "pca_variances": [float(v) for v in evals[:2]],
        "total_variance": float(np.trace(cov)),
    }


def main():
    rng = random.Random(20241018)
    for name in ("mini_en", "mini_zh"):
        exp = corpus_expectations(ROOT / f"{name}.txt", name)
        (ROOT / f"{name}.expected.json").write_text(json.dumps(exp, indent=2, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8")
    synthetic = corpus_expectations(ROOT / "condprob_synthetic.txt", "synthetic")
    (ROOT / "condprob_synthetic.expected.json").write_text(json.dumps(synthetic["condprob"], indent=2, sort_keys=True) + "\n")

    fs = json.loads((ROOT / "few_shot.json").read_text(encoding="utf-8"))
    target = "Officials said the bridge would reopen in March."
    prompt = build_prompt(fs, target)
    (ROOT / "few_shot.prompt.json").write_text(json.dumps({
        "target": target,
        "sha256": hashlib.sha256(prompt.encode()).hexdigest(),
    }, indent=2, sort_keys=True) + "\n")

    (ROOT / "special_grid.json").write_text(json.dumps(special_grid(rng), indent=1) + "\n")
    a, b = [0.1, 0.2, 0.3], [0.7, 0.8, 0.9]
    t = stats.ttest_ind(a, b, equal_var=False)
    (ROOT / "stat_pairs.json").write_text(json.dumps({
        "pairs": stat_pairs(rng),
        "welch_example": {"a": a, "b": b, "t": float(t.statistic), "t_p": float(t.pvalue)},
        "chi2_75_25_p": float(stats.chi2.sf(25.0, 1)),
        "gamma_q_half_12_5": float(special.gammaincc(0.5, 12.5)),
    }, indent=1) + "\n")

    text, lines = embeddings(rng)
    (ROOT / "emb_mini.jsonl").write_text(text)
    (ROOT / "emb_mini.expected.json").write_text(json.dumps(emb_expectations(text, lines), indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
