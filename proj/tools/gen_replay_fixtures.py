#!/usr/bin/env python3
"""Writes synthetic chat-completion fixtures for a plan, one file per request hash.

Prompts and lists come from the built `sinogate` binary so the fixtures track
the embedded data. Replies are seeded pseudo-random mixes of in-list and
out-of-list characters.
"""

import argparse
import hashlib
import json
import pathlib
import random
import subprocess

EMAIL = ("Subject: 你好\n\n亲爱的朋友，\n\n你好！我想告诉你，我今天很高兴，因为我学习了很多新的汉字。"
         "我希望你也有一个愉快的一天。\n\n祝好，\n\n小明")
OUTSIDE = "龙凤麟麒鹏骥骐璀璨瑰丽婉约缱绻旖旎斑斓"


def sinogate(binary, *args):
    return json.loads(subprocess.run([binary, "--json", *args], check=True, capture_output=True, text=True).stdout)


def canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def reply(rng, chars, level, task, condition, sample):
    if level == "A1" and task == "RW2" and condition == "with_list" and sample == 2:
        return EMAIL
    leak = {"with_list": 0.04, "without_list": 0.12}[condition]
    leak *= {"A1": 1.0, "A1plus": 0.9, "A2": 0.6}[level]
    n = rng.randint(24, 60)
    body = "".join(rng.choice(OUTSIDE) if rng.random() < leak else rng.choice(chars) for _ in range(n))
    return f"Hello! Let's practise {task}.\n\n{body[: n // 2]}，{body[n // 2:]}。"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sinogate", required=True)
    ap.add_argument("--plan", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    plan = json.loads(pathlib.Path(args.plan).read_text(encoding="utf-8"))
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    for model in plan["models"]:
        for level in plan["levels"]:
            chars = sinogate(args.sinogate, "charset", "show", "--level", level)["characters"]
            for task in plan["tasks"]:
                for condition in plan["conditions"]:
                    prompt = sinogate(args.sinogate, "prompt", "show", "--level", level, "--condition", condition)
                    payload = {
                        "model": model,
                        "messages": [
                            {"role": "system", "content": prompt["text"]},
                            {"role": "user", "content": task},
                        ],
                        "temperature": plan.get("temperature", 0.7),
                    }
                    digest = hashlib.sha256(canonical(payload).encode("utf-8")).hexdigest()
                    responses = {}
                    for sample in range(plan["runs_per_cell"]):
                        content = reply(rng, chars, level, task, condition, sample)
                        usage = {"prompt_tokens": len(prompt["text"]) // 2, "completion_tokens": len(content)}
                        raw = {
                            "id": f"chatcmpl-{digest[:12]}-{sample}",
                            "object": "chat.completion",
                            "model": model,
                            "choices": [{"index": 0, "finish_reason": "stop",
                                         "message": {"role": "assistant", "content": content}}],
                            "usage": usage,
                        }
                        responses[str(sample)] = {
                            "content": content,
                            "raw": json.dumps(raw, ensure_ascii=False),
                            "usage": {"input_tokens": usage["prompt_tokens"],
                                      "output_tokens": usage["completion_tokens"]},
                            "finish_reason": "stop",
                        }
                    doc = {"request": payload, "responses": responses}
                    (out / f"{digest}.json").write_text(
                        json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
