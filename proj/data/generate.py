#!/usr/bin/env python3
"""Regenerates the example demonstrations, robots and modulation configs.

Run from anywhere: python3 data/generate.py
"""

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def min_jerk(s):
    return 10 * s**3 - 15 * s**4 + 6 * s**5


def feature(s):
    # Starts and ends at rest; rises, pulls back, climbs steeply past the goal, settles gently.
    return min_jerk(s) + 0.3 * math.sin(math.pi * s) ** 2 * math.sin(3 * math.pi * s)


def write_demo(name, dt, rows, columns=None):
    lines = [f"# format_version=1 dt={dt!r}"]
    if columns:
        lines.append("# columns=" + ";".join(columns))
    for row in rows:
        lines.append(";".join(repr(float(v)) for v in row))
    (ROOT / "demos" / name).write_text("\n".join(lines) + "\n")


def envelope(kind, payload):
    return {"format_version": 1, "kind": kind, "payload": payload}


def write_json(path, document):
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def demos():
    dt = 0.01
    n = 101
    s = [i / (n - 1) for i in range(n)]
    write_demo("min_jerk.csv", dt, [[min_jerk(t)] for t in s], ["y"])
    write_demo("feature_1d.csv", dt, [[feature(t)] for t in s], ["y"])
    write_demo(
        "feature_2d.csv",
        dt,
        [[feature(t), 0.4 * min_jerk(t)] for t in s],
        ["primary", "secondary"],
    )

    # Sphere surface sampled top to bottom along a spiral.
    m = 201
    rows = []
    for i in range(m):
        u = i / (m - 1)
        theta = math.pi * min_jerk(u)
        phi = 4 * 2 * math.pi * u
        rows.append([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    write_demo("sphere_3d.csv", dt, rows, ["x", "y", "z"])

    # Jagged reach for the 7-DoF arm.
    rows = []
    for i in range(n):
        t = s[i]
        base = [0.8 * min_jerk(t), -0.4 * min_jerk(t), 0.3 * min_jerk(t), 1.2 * min_jerk(t),
                0.0, -0.5 * min_jerk(t), 0.2 * min_jerk(t)]
        jag = 0.05 * math.sin(40 * math.pi * t) * math.sin(math.pi * t)
        rows.append([b + jag * (k % 2 * 2 - 1) for k, b in enumerate(base)])
    write_demo("arm_jagged.csv", dt, rows, [f"a{k + 1}" for k in range(7)])

    # Arm-raising wave for the humanoid upper body.
    names = [j["name"] for j in humanoid_joints()]
    rows = []
    for t in s:
        r = min_jerk(t)
        wave = math.sin(math.pi * t) ** 2 * math.sin(4 * math.pi * t)
        v = dict.fromkeys(names, 0.0)
        v["HipPitch"] = -0.1 * r
        v["HeadPitch"] = -0.2 * r
        v["HeadYaw"] = 0.3 * wave
        v["RShoulderPitch"] = 1.5 - 2.5 * r
        v["RShoulderRoll"] = -0.3 * r
        v["RElbowRoll"] = 0.5 * r + 0.4 * wave
        v["RWristYaw"] = 0.6 * wave
        v["RHand"] = 0.2 + 0.6 * r
        v["LShoulderPitch"] = 1.5
        v["LElbowRoll"] = -0.3 * r
        rows.append([v[k] for k in names])
    write_demo("humanoid_wave.csv", dt, rows, names)


def joint(name, parent, axis, dim, limits=None):
    j = {"name": name, "parent": parent, "axis": axis, "dim_index": dim}
    if limits:
        j["limits"] = limits
    return j


X, Y, Z = [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]


def humanoid_joints():
    joints = [
        ("KneePitch", None, Y),
        ("HipPitch", "KneePitch", Y),
        ("HipRoll", "HipPitch", X),
        ("HeadYaw", "HipRoll", Z),
        ("HeadPitch", "HeadYaw", Y),
    ]
    for side in "LR":
        joints += [
            (f"{side}ShoulderPitch", "HipRoll", Y),
            (f"{side}ShoulderRoll", f"{side}ShoulderPitch", Z),
            (f"{side}ElbowYaw", f"{side}ShoulderRoll", X),
            (f"{side}ElbowRoll", f"{side}ElbowYaw", Z),
            (f"{side}WristYaw", f"{side}ElbowRoll", X),
            (f"{side}Hand", f"{side}WristYaw", X),
        ]
    return [joint(n, p, a, i) for i, (n, p, a) in enumerate(joints)]


def robots():
    write_json(ROOT / "robots" / "head_1dof.json",
               envelope("robot", {"axis_threshold_deg": 10.0,
                                  "joints": [joint("HeadYaw", None, Z, 0, [-2.0, 2.0])]}))
    write_json(ROOT / "robots" / "feature_2dof.json",
               envelope("robot", {"axis_threshold_deg": 10.0,
                                  "joints": [joint("primary", None, Y, 0),
                                             joint("secondary", "primary", Y, 1)]}))
    arm_axes = [Z, Y, Z, Y, Z, Y, Z]
    arm = [joint(f"a{k + 1}", None if k == 0 else f"a{k}", arm_axes[k], k) for k in range(7)]
    write_json(ROOT / "robots" / "arm_7dof.json",
               envelope("robot", {"axis_threshold_deg": 10.0, "joints": arm}))
    write_json(ROOT / "robots" / "humanoid_17dof.json",
               envelope("robot", {"axis_threshold_deg": 10.0, "joints": humanoid_joints()}))


def modulations():
    configs = {
        "neutral": {},
        "arc_broad": {"p_arc": 5.0},
        "arc_sharp": {"p_arc": -5.0},
        "anticipation": {"p_ant": 0.4, "t_ant_fraction": 0.1},
        "time_fast": {"p_time": 0.75},
        "time_slow": {"p_time": 1.25},
        "slow_in_out": {"slow": {"k": 10.0}},
        "timing_sectors": {"timing_sectors": [
            {"fraction": 0.3, "speed": 0.5},
            {"fraction": 0.4, "speed": 2.0},
            {"fraction": 0.3, "speed": 0.8},
        ]},
        "exaggerate": {"p_exa": 1.5},
        "understate": {"p_exa": 0.5},
        "secondary_action": {"p_sec": 0.05, "secondary": [{"source": 0, "target": 1, "delta": 1}]},
        "follow_through": {"p_follow": 3.0, "follow": [{"source": 0, "target": 1, "delta": 1}]},
        "random": {"p_rand": 0.5, "seed": 7},
        "humanoid_lively": {
            "p_arc": 2.0,
            "p_ant": 0.3,
            "t_ant_fraction": 0.1,
            "n_ant": 2,
            "p_exa": 1.3,
            "slow": {"k": 8.0},
            "p_follow": 1.0,
            "follow": [{"source": 1, "target": 4, "delta": 1}],
        },
        "humanoid_cross_chain": {
            "p_follow": 1.0,
            "follow": [{"source": 11, "target": 5, "delta": 1}],
        },
    }
    for name, payload in configs.items():
        write_json(ROOT / "modulations" / f"{name}.json", envelope("modulation", payload))


if __name__ == "__main__":
    for sub in ("demos", "robots", "modulations"):
        (ROOT / sub).mkdir(parents=True, exist_ok=True)
    demos()
    robots()
    modulations()
