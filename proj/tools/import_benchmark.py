# Copyright 2026 The kurag Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Converts a public VQA benchmark file into kurag eval JSONL.

Input is JSON (a list, or an object holding the list under --list-key) or
JSON lines. Items are sampled as an arithmetic sequence: indices offset,
offset + stride, offset + 2 * stride, ... up to --limit items.

  python3 tools/import_benchmark.py infoseek_val.jsonl -o eval.jsonl \
      --stride 50 --offset 7 --image-template 'images/{image_id}.jpg'

Field names default to the INFOSEEK layout and can be remapped, e.g. for
OK-VQA style files: --id-field question_id --answer-field answers.
"""

import argparse
import json
import sys
from pathlib import Path


def load_records(path: Path, list_key: str | None):
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("[") or (stripped.startswith("{") and list_key):
        data = json.loads(text)
        if list_key:
            data = data[list_key]
        return list(data)
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def answers_of(value) -> list[str]:
    if isinstance(value, str):
        return [value]
    out = []
    for v in value:
        if isinstance(v, dict):
            v = v.get("answer", v.get("raw_answer", ""))
        v = str(v).strip()
        if v and v not in out:
            out.append(v)
    return out


def convert(records, args) -> list[dict]:
    picked = records[args.offset::args.stride]
    if args.limit is not None:
        picked = picked[: args.limit]
    items = []
    for r in picked:
        gold = answers_of(r[args.answer_field])
        if not gold:
            continue
        item_id = str(r[args.id_field])
        items.append({
            "item_id": item_id,
            "image": args.image_template.format(**r),
            "question": r[args.question_field],
            "gold_answers": gold,
        })
    return items


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--limit", type=int)
    p.add_argument("--list-key")
    p.add_argument("--id-field", default="data_id")
    p.add_argument("--question-field", default="question")
    p.add_argument("--answer-field", default="answer")
    p.add_argument("--image-template", default="{image_id}.jpg")
    args = p.parse_args(argv)
    if args.stride < 1 or args.offset < 0:
        p.error("stride must be >= 1 and offset >= 0")
    try:
        items = convert(load_records(args.input, args.list_key), args)
    except (KeyError, json.JSONDecodeError) as e:
        print(f"error: {args.input}: {e}", file=sys.stderr)
        return 2
    args.output.write_text("".join(json.dumps(i) + "\n" for i in items), encoding="utf-8")
    print(f"{len(items)} items written to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
