#!/usr/bin/env python3
"""Writes the record-format example files under fixtures/.

    python3 scripts/make_fixtures.py
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

SAMPLES = [
    {
        "id": "moss-0001",
        "video_ref": "videos/kitchen_01.mp4",
        "question": "What will happen to the glass after the boy lets go of it?",
        "answer_gt": "B",
        "reference_trace": "The boy holds a glass above the counter. His fingers loosen around the glass. The glass falls toward the tiled floor. The glass will shatter on the floor.",
    },
    {
        "id": "moss-0002",
        "video_ref": "videos/park_03.mp4",
        "question": "Where will the dog be after it chases the ball?",
        "answer_gt": "A",
        "reference_trace": "A woman throws a red ball across the lawn. The dog sprints toward the ball. It will be near the fence at the far end of the lawn.",
    },
    {
        "id": "moss-0003",
        "video_ref": "videos/street_12.mp4",
        "question": "What will the cyclist do at the intersection?",
        "answer_gt": "C",
        "reference_trace": "The traffic light turns yellow. The cyclist squeezes the brakes. The cyclist will stop at the red light.",
    },
]


def think(text, answer):
    return f"<think>{text}</think><answer>{answer}</answer>"


OUTPUTS = [
    ("moss-0001", think(SAMPLES[0]["reference_trace"], "B")),
    ("moss-0001", think("I watch the boy closely. The boy holds a glass above the counter. His fingers loosen. The glass falls and will shatter on the floor.", "B")),
    ("moss-0001", think("Based on the video content, the correct answer is B.", "B")),
    ("moss-0002", think("The woman throws the ball. The dog runs after the ball.", "C")),
    ("moss-0002", "<answer>A</answer><think>The dog runs.</think>"),
    ("moss-0003", think("The light turns yellow. The cyclist squeezes the brakes. He stops at the red light.", " c. ")),
    ("moss-0003", think("", "C")),
]


def logprobs(rng, n):
    return [round(-rng.uniform(0.05, 2.5), 6) for _ in range(n)]


def candidate(rng, text, tokens, drift=0.1):
    old = logprobs(rng, tokens)
    new = [round(x + rng.uniform(-drift, drift), 6) for x in old]
    new = [min(x, 0.0) for x in new]
    ref = [round(x + rng.uniform(-drift, drift), 6) for x in old]
    ref = [min(x, 0.0) for x in ref]
    return {"output_text": text, "logprob_new": new, "logprob_old": old, "logprob_ref": ref}


def rollouts(rng):
    groups = []
    by_id = {}
    for sid, text in OUTPUTS:
        by_id.setdefault(sid, []).append(text)
    for sid, texts in by_id.items():
        if len(texts) < 2:
            texts = texts + [think("I am not sure.", "D")]
        groups.append({
            "sample_id": sid,
            "candidates": [candidate(rng, t, rng.randint(3, 6), drift=0.4) for t in texts],
        })
    # Equal rewards: two identical perfect outputs.
    perfect = think(SAMPLES[2]["reference_trace"], "C")
    groups.append({
        "sample_id": "moss-0003",
        "candidates": [candidate(rng, perfect, 4), candidate(rng, perfect, 4)],
    })
    return groups


def write_jsonl(name, records):
    with open(OUT / name, "w") as f:
        for r in records:
            f.write((r if isinstance(r, str) else json.dumps(r)) + "\n")


def large_samples(rng, count):
    subjects = ["The cup", "A dog", "The car", "A woman", "The ball", "A boy", "The door", "The bird"]
    verbs = ["moves left", "stops", "turns around", "falls", "rolls forward", "opens", "closes", "jumps"]
    places = ["near the table", "on the floor", "by the window", "in the yard", "at the corner"]
    out = []
    for i in range(count):
        steps = [f"{rng.choice(subjects)} {rng.choice(verbs)} {rng.choice(places)}." for _ in range(rng.randint(1, 12))]
        out.append({
            "id": f"large-{i:05d}",
            "video_ref": f"videos/large_{i % 97:03d}.mp4",
            "question": "What happens next?",
            "answer_gt": rng.choice("ABCD"),
            "reference_trace": " ".join(steps),
        })
    return out


def main():
    rng = random.Random(20240611)
    OUT.mkdir(exist_ok=True)
    write_jsonl("samples_valid.jsonl", SAMPLES)
    write_jsonl("outputs_valid.jsonl", [{"sample_id": s, "output_text": t} for s, t in OUTPUTS])
    write_jsonl("outputs_unknown_sample.jsonl", [{"sample_id": "moss-9999", "output_text": think("x.", "A")}])

    missing = dict(SAMPLES[1])
    del missing["reference_trace"]
    write_jsonl("samples_missing_field.jsonl", [SAMPLES[0], missing, SAMPLES[2]])
    dup = dict(SAMPLES[1], question="Where does the dog go?")
    extra = dict(SAMPLES[2], id="moss-0004")
    write_jsonl("samples_duplicate_id.jsonl", [SAMPLES[0], SAMPLES[1], SAMPLES[2], extra, dup])
    write_jsonl("samples_parse_error.jsonl", [SAMPLES[0], '{"id": "moss-0002", "video_ref": '])
    write_jsonl("samples_empty_answer.jsonl", [dict(SAMPLES[0], answer_gt="  ")])
    write_jsonl("samples_large.jsonl", large_samples(rng, 1000))

    groups = rollouts(rng)
    write_jsonl("rollouts_valid.jsonl", groups)
    bad = json.loads(json.dumps(groups[0]))
    bad["candidates"][1]["logprob_old"].append(-0.5)
    write_jsonl("rollouts_length_mismatch.jsonl", [groups[1], bad])
    write_jsonl("rollouts_group_too_small.jsonl", [{"sample_id": "moss-0001", "candidates": []}])
    orphan = json.loads(json.dumps(groups[0]))
    orphan["sample_id"] = "moss-9999"
    write_jsonl("rollouts_unknown_sample.jsonl", [orphan])


if __name__ == "__main__":
    main()
