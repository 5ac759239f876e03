#!/usr/bin/env python3
"""Regenerates the synthetic replay fixture under tests/fixtures/replay/.

Writes the manifest, one small JPEG crop per observation, replay completions
for every prompt variant, a backend config, and expected_refined.json: the
metrics for the refined_vmmgr run computed here with exact fractions.

Usage: python3 make_fixture.py [output_dir]
"""

import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from PIL import Image

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent / "replay"
RANGE_FILTER = Fraction(55)

# Cameras sit 1.5 m above the ego origin; p_cam = R p_world + t.
CAM_HEIGHT = 1.5
CAMERAS = {
    "cam_front": [[0, -1, 0], [0, 0, -1], [1, 0, 0]],
    "cam_left": [[1, 0, 0], [0, 0, -1], [0, 1, 0]],
    "cam_right": [[-1, 0, 0], [0, 0, -1], [0, -1, 0]],
}
FX = FY = 500.0
CX, CY = 320.0, 240.0
W, H = 640, 480
NEAR = 0.1


def translation(rot):
    c = (0.0, 0.0, CAM_HEIGHT)
    return [-sum(rot[r][k] * c[k] for k in range(3)) for r in range(3)]


def projected_area(cam, center, dims, heading):
    rot = CAMERAS[cam]
    t = translation(rot)
    ch, sh = math.cos(heading), math.sin(heading)
    us, vs = [], []
    for i in range(8):
        lx = dims[0] / 2 * (1 if i & 1 else -1)
        ly = dims[1] / 2 * (1 if i & 2 else -1)
        lz = dims[2] / 2 * (1 if i & 4 else -1)
        w = (center[0] + ch * lx - sh * ly, center[1] + sh * lx + ch * ly, center[2] + lz)
        p = [sum(rot[r][k] * w[k] for k in range(3)) + t[r] for r in range(3)]
        if p[2] <= NEAR:
            continue
        us.append(FX * p[0] / p[2] + CX)
        vs.append(FY * p[1] / p[2] + CY)
    if not us:
        return 0.0
    clamp = lambda x, hi: min(max(x, 0.0), hi)
    du = clamp(max(us), W) - clamp(min(us), W)
    dv = clamp(max(vs), H) - clamp(min(vs), H)
    return max(0.0, du) * max(0.0, dv)


DISPLAY = {"sedan": "Sedan", "suv": "SUV", "pickup_truck": "Pickup Truck", "van": "Van",
           "hatchback": "Hatchback", "other": "Other"}

# track_id, type, label dims, make, model, generation, modified, min range,
# lateral side, outcome kind, predicted dims, predicted identity, modification
# flags. Outcome kinds: pred, occluded, null_dims, garbage, no_input, far.
TRACKS = [
    ("T01", "sedan", ("4.88", "1.84", "1.44"), "Toyota", "Camry", (2018, 2024), False, "12.0", 1, "pred",
     ("4.85", "1.84", "1.45"), ("Toyota", "Camry", "2018–2024"), {}),
    ("T02", "sedan", ("4.65", "1.80", "1.42"), "Honda", "Civic", (2016, 2021), False, "18.5", -1, "pred",
     ("4.60", "1.78", "1.41"), ("honda", "CIVIC", "2016–2021"), {}),
    ("T03", "sedan", ("4.64", "1.80", "1.44"), "Tesla", "Model 3", (2017, 2023), False, "25.0", 1, "pred",
     ("4.69", "1.85", "1.44"), ("Tesla", "Model 3", "2017–2023"), {}),
    ("T04", "sedan", ("5.12", "1.88", "1.48"), "BMW", "5 Series", (2017, 2023), False, "31.0", -1, "pred",
     ("4.96", "1.87", "1.47"), ("BMW", "3 Series", "2019–2024"), {}),
    ("T05", "sedan", ("4.55", "1.78", "1.45"), "Nissan", "Sentra", (2020, 2024), False, "9.5", 1, "pred",
     ("4.64", "1.82", "1.50"), ("Nissan", "Sentra", "2013–2019"), {}),
    ("T06", "sedan", ("4.70", "1.82", "1.44"), "Hyundai", "Elantra", (2021, 2024), False, "14.0", -1, "no_input",
     None, None, {}),
    ("T07", "suv", ("4.70", "1.86", "1.68"), "Honda", "CR-V", (2017, 2022), False, "11.0", 1, "pred",
     ("4.62", "1.85", "1.68"), ("Honda", "CR-V", "2017–2022"), {}),
    ("T08", "suv", ("5.05", "2.00", "1.78"), "Ford", "Explorer", (2020, 2024), False, "20.0", -1, "pred",
     ("5.00", "2.00", "1.78"), ("Ford", "Explorer", "2020–2024"), {}),
    ("T09", "suv", ("4.60", "1.86", "1.66"), "Toyota", "RAV4", (2019, 2024), False, "27.5", 1, "occluded",
     None, None, {}),
    ("T10", "suv", ("5.35", "2.05", "1.90"), "Chevrolet", "Tahoe", (2021, 2024), True, "16.0", -1, "pred",
     ("5.55", "2.05", "1.96"), ("Chevrolet", "Tahoe", "2021–2024"), {"length": "increased", "height": "increased"}),
    ("T11", "suv", ("4.40", "1.80", "1.62"), "Mazda", "CX-5", (2017, 2024), False, "38.0", 1, "pred",
     ("4.55", "1.84", "1.68"), ("Mazda", "CX-5", "2017–2024"), {}),
    ("T12", "pickup_truck", ("5.89", "2.03", "1.96"), "Ford", "F-150", (2015, 2020), True, "13.0", 1, "pred",
     ("5.90", "2.03", "2.12"), ("Ford", "F-150", "2015–2020"), {"height": "increased"}),
    ("T13", "pickup_truck", ("5.39", "1.89", "1.80"), "Toyota", "Tacoma", (2016, 2023), False, "22.0", -1, "pred",
     ("5.39", "1.91", "1.79"), ("Toyota", "Tacoma", "2016–2023"), {}),
    ("T14", "pickup_truck", ("5.88", "2.06", "1.98"), "Ram", "1500", (2019, 2024), False, "29.0", 1, "null_dims",
     None, None, {}),
    ("T15", "pickup_truck", ("5.35", "1.91", "1.80"), "Chevrolet", "Colorado", (2015, 2022), False, "44.0", -1, "pred",
     ("5.25", "1.88", "1.79"), ("GMC", "Canyon", "2015–2022"), {}),
    ("T16", "van", ("5.17", "2.00", "1.78"), "Chrysler", "Pacifica", (2017, 2024), False, "10.0", 1, "pred",
     ("5.17", "2.02", "1.78"), ("Chrysler", "Pacifica", "2017–2024"), {}),
    ("T17", "van", ("5.98", "2.03", "2.53"), "Ford", "Transit", (2015, 2024), True, "19.0", -1, "pred",
     ("5.98", "2.03", "2.72"), ("Ford", "Transit", "2015–2024"), {"height": "increased"}),
    ("T18", "van", ("5.16", "1.99", "1.74"), "Honda", "Odyssey", (2018, 2024), False, "35.0", 1, "occluded",
     None, None, {}),
    ("T19", "hatchback", ("4.26", "1.80", "1.45"), "Volkswagen", "Golf", (2015, 2021), False, "8.0", -1, "pred",
     ("4.26", "1.80", "1.45"), ("VW", "Golf", "2015–2021"), {}),
    ("T20", "hatchback", ("4.00", "1.70", "1.53"), "Honda", "Fit", (2015, 2020), False, "17.0", 1, "pred",
     ("4.10", "1.70", "1.52"), ("Honda", "Fit", "2015–2020"), {}),
    ("T21", "hatchback", ("3.70", "1.80", "1.47"), "Mazda", "Mazda3 Hatchback", (2019, 2024), False, "24.0", -1, "pred",
     ("4.46", "1.80", "1.44"), ("Mazda", "Mazda3 Hatchback", "2019–2024"), {}),
    ("T22", "hatchback", ("4.48", "1.79", "1.48"), "Toyota", "Prius", (2016, 2022), False, "41.0", 1, "garbage",
     None, None, {}),
    ("T23", "other", ("6.10", "2.00", "2.30"), None, None, None, False, "15.0", -1, "pred",
     ("6.00", "2.00", "2.40"), (None, None, None), {}),
    ("T24", "other", ("4.20", "1.60", "1.30"), None, None, None, False, "26.0", 1, "pred",
     ("4.30", "1.65", "1.30"), (None, None, None), {}),
    ("T25", "sedan", ("4.80", "1.83", "1.45"), "Kia", "K5", (2021, 2024), False, "60.0", 1, "far",
     ("4.80", "1.83", "1.45"), ("Kia", "K5", "2021–2024"), {}),
]

VARIANTS = ["basic", "vehicle_type", "type_size_class", "vmmgr", "refined_vmmgr"]
SIZE_CLASS = {"sedan": "midsize", "suv": "midsize", "pickup_truck": "full-size", "van": "minivan",
              "hatchback": "compact", "other": None}
TIMESTAMPS = [0.0, 0.5, 1.0, 1.5]


def observations(tid, side, dims, kind):
    obs = []
    for k, ts in enumerate(TIMESTAMPS):
        if kind == "no_input":
            center = (-40.0, 0.0, dims[2] / 2)
        else:
            center = (8.0 + 4.0 * k, side * (5.0 + 0.5 * k), dims[2] / 2)
        heading = 0.0
        cams = ["cam_front", "cam_left" if side > 0 else "cam_right"]
        for cam in cams:
            obs.append({"timestamp": ts, "camera_id": cam, "center": list(center), "dims": list(dims),
                        "heading": heading, "crop": f"crops/{tid}_{k}_{cam}.jpg"})
    return obs


def crop_image(path, seed):
    img = Image.new("RGB", (24, 16), ((seed * 37) % 256, (seed * 91) % 256, (seed * 53) % 256))
    for x in range(0, 24, 3):
        img.putpixel((x, (x + seed) % 16), (255, 255, 255))
    img.save(path, format="JPEG", quality=80)


def response_fields(variant, t):
    (_tid, vtype, _ld, _mk, _md, _gen, _mod, _r, _side, kind, pdims, ident, mods) = t
    occluded = kind == "occluded"
    dims = pdims if kind == "pred" else (None, None, None)
    make, model, gen = ident if ident else (None, None, None)
    num = lambda s: None if s is None else float(s)
    o = {}
    if variant == "refined_vmmgr":
        o["significantly_occluded"] = occluded
        o["make"] = make
        o["model"] = model
        o["generation_year_range"] = gen
        o["vehicle_type"] = None if occluded or kind != "pred" else DISPLAY[vtype]
        o["configuration"] = None if kind != "pred" else ("crew cab" if vtype == "pickup_truck" else "standard")
        o["length_m"], o["width_m"], o["height_m"] = map(num, dims)
        o["length_modification"] = mods.get("length")
        o["width_modification"] = mods.get("width")
        o["height_modification"] = mods.get("height")
        return o
    if variant in ("vehicle_type", "type_size_class", "vmmgr"):
        o["vehicle_type"] = DISPLAY[vtype] if kind == "pred" else None
    if variant in ("type_size_class", "vmmgr"):
        o["size_class"] = SIZE_CLASS[vtype] if kind == "pred" else None
    if variant == "vmmgr":
        o["make"], o["model"], o["generation_year_range"] = (make, model, gen) if kind == "pred" else (None,) * 3
    o["length_m"], o["width_m"], o["height_m"] = map(num, dims)
    return o


def raw_text(variant, t, index):
    kind = t[9]
    if kind == "garbage":
        return "I'm sorry, the images are too dark to describe this vehicle {length: about four"
    body = json.dumps(response_fields(variant, t), indent=2, ensure_ascii=False)
    style = index % 3
    if style == 0:
        return body
    if style == 1:
        return "```json\n" + body + "\n```"
    return "Here is my assessment of the tracked vehicle.\n\n" + body + "\n\nLet me know if you need anything else."


def fr(s):
    return Fraction(s)


def years_overlap(a, b):
    return a[0] <= b[1] and b[0] <= a[1]


def parse_years(text):
    parts = text.replace("–", "-").split("-")
    return (int(parts[0]), int(parts[-1]))


def norm(s):
    out = "".join(ch for ch in s if not (ch.isascii() and not ch.isalnum() and not ch.isspace()))
    return " ".join(out.lower().split())


def reference():
    evaluated = [t for t in TRACKS if fr(t[7]) <= RANGE_FILTER]
    preds = [t for t in evaluated if t[9] == "pred"]
    donor = [sum(fr(t[10][k]) for t in preds) / len(preds) for k in range(3)]
    abs_sum = [Fraction(0)] * 3
    rel_sum = [Fraction(0)] * 3
    iou_sum = Fraction(0)
    for t in evaluated:
        label = [fr(x) for x in t[2]]
        est = [fr(x) for x in t[10]] if t[9] == "pred" else donor
        for k in range(3):
            abs_sum[k] += abs(est[k] - label[k])
            rel_sum[k] += abs(est[k] - label[k]) / label[k]
        inter = min(est[0], label[0]) * min(est[1], label[1])
        iou_sum += inter / (est[0] * est[1] + label[0] * label[1] - inter)
    n = len(evaluated)

    per_type = {}
    missing = 0
    for t in evaluated:
        if t[3] is None:
            missing += 1
            continue
        slot = per_type.setdefault(t[1], [0, 0])
        slot[1] += 1
        if t[9] != "pred":
            continue
        make, model, gen = t[11]
        if norm(make) == norm(t[3]) and norm(model) == norm(t[4]) and years_overlap(parse_years(gen), t[5]):
            slot[0] += 1

    modified = [t for t in preds if t[12]]
    unmodified = [t for t in preds if not t[12]]

    def part(ts):
        a = [Fraction(0)] * 3
        for t in ts:
            for k in range(3):
                a[k] += abs(fr(t[10][k]) - fr(t[2][k]))
        return [x / len(ts) for x in a]

    encode = lambda f: {"fraction": f"{f.numerator}/{f.denominator}", "value": float(f)}
    return {
        "n_samples": n,
        "abs_err_lwh": [encode(x / n) for x in abs_sum],
        "rel_err_lwh": [encode(x / n) for x in rel_sum],
        "mean_iou": encode(iou_sum / n),
        "pct_predictions": encode(Fraction(len(preds), n)),
        "donor_mean_lwh": [encode(x) for x in donor],
        "vmmgr": {
            "per_type": {k: {"correct": v[0], "total": v[1]} for k, v in sorted(per_type.items())},
            "overall": {"correct": sum(v[0] for v in per_type.values()), "total": sum(v[1] for v in per_type.values())},
            "missing_truth": missing,
        },
        "modification_split": {
            "pct_unmodified": encode(Fraction(len(unmodified), len(preds))),
            "unmodified_abs_err_lwh": [encode(x) for x in part(unmodified)],
            "modified_abs_err_lwh": [encode(x) for x in part(modified)],
        },
        "abstentions": {t[0]: t[9] for t in evaluated if t[9] != "pred"},
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "crops").mkdir(exist_ok=True)
    lines = []
    for cam, rot in CAMERAS.items():
        lines.append({"kind": "calibration", "camera_id": cam, "fx": FX, "fy": FY, "cx": CX, "cy": CY,
                      "rotation": [v for row in rot for v in row], "translation": translation(rot),
                      "image_width": W, "image_height": H})
    seed = 0
    for t in TRACKS:
        (tid, vtype, ldims, make, model, gen, modified, rng, side, kind, _p, _i, _m) = t
        dims = tuple(float(x) for x in ldims)
        obs = observations(tid, side, dims, kind)
        visible = {o["timestamp"] for o in obs
                   if projected_area(o["camera_id"], o["center"], o["dims"], o["heading"]) > 0}
        if (kind == "no_input") != (not visible):
            raise SystemExit(f"{tid}: visibility does not match case '{kind}'")
        for o in obs:
            seed += 1
            crop_image(OUT / o["crop"], seed)
        label = {"dims": list(dims), "vehicle_type": vtype, "make": make, "model": model,
                 "generation_range": list(gen) if gen else None, "modified": modified}
        lines.append({"kind": "track", "track_id": tid, "min_range_m": float(rng), "label": label,
                      "observations": obs})
    with open(OUT / "manifest.jsonl", "w", encoding="utf-8") as f:
        for line in lines:
            f.write(json.dumps(line, ensure_ascii=False) + "\n")

    with open(OUT / "replay.jsonl", "w", encoding="utf-8") as f:
        for vi, variant in enumerate(VARIANTS):
            for i, t in enumerate(TRACKS):
                if t[9] == "no_input":
                    continue
                entry = {"key": f"{t[0]}:{variant}", "raw_text": raw_text(variant, t, i + vi)}
                f.write(json.dumps(entry, ensure_ascii=False) + "\n")

    backend = {"backend_kind": "replay", "model_name": "replay", "fixture_path": "replay.jsonl",
               "max_parallel": 4, "requests_per_minute": 600, "max_retries": 2}
    (OUT / "backend_replay.json").write_text(json.dumps(backend, indent=2) + "\n", encoding="utf-8")
    (OUT / "expected_refined.json").write_text(json.dumps(reference(), indent=2, ensure_ascii=False) + "\n",
                                               encoding="utf-8")


if __name__ == "__main__":
    main()
