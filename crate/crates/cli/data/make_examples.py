"""Regenerates the bundled example inputs and their expected-report goldens.

Goldens hold closed-form values (fixed points, sizes) with per-field
tolerances; the CLI tests compare the solver reports against them.
"""

import json
import math
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent


def mat(m):
    m = np.asarray(m, dtype=float)
    return {"dim": m.shape[0], "entries": m.tolist()}


def rot(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def conj(s, u):
    return s @ u @ np.linalg.inv(s)


def psd_fn(m, f):
    w, v = np.linalg.eigh(m)
    return (v * f(w)) @ v.T


def write(name, obj):
    (HERE / name).write_text(json.dumps(obj, indent=2) + "\n")


def main():
    s0 = np.diag([2.0, 1.0])

    a = np.array([[1.0, 1.0], [0.0, -1.0]])
    write("c2.json", {"name": "c2", "dim": 2, "generators": [mat(a)], "relations": [["g0", "g0"]]})
    write("z_rotation.json", {"name": "z_rotation", "dim": 2, "generators": [mat(conj(s0, rot(1.0)))], "relations": []})
    write(
        "z2_rotations.json",
        {
            "name": "z2_rotations",
            "dim": 2,
            "generators": [mat(conj(s0, rot(1.0))), mat(conj(s0, rot(math.sqrt(2.0))))],
            "relations": [["g0", "g1", "G0", "G1"]],
        },
    )
    write("unbounded.json", {"name": "unbounded", "dim": 2, "generators": [mat(np.diag([math.e, 1.0]))], "relations": []})

    s3 = np.array([[2.0, 0.5, 0.0], [0.0, 1.0, 0.3], [0.1, 0.0, 1.5]])
    write(
        "c2xc2.json",
        {
            "name": "c2xc2",
            "dim": 3,
            "generators": [mat(conj(s3, np.diag([1.0, -1.0, 1.0]))), mat(conj(s3, np.diag([1.0, 1.0, -1.0])))],
            "relations": [["g0", "g0"], ["g1", "g1"], ["g0", "g1", "G0", "G1"]],
        },
    )
    write("z_order4.json", {"name": "z_order4", "dim": 2, "generators": [mat(conj(s0, rot(math.pi / 2)))], "relations": [["g0", "g0", "g0", "g0"]]})
    write("rotation.json", {"name": "rotation", "dim": 2, "generators": [mat(rot(0.7))], "relations": []})

    write("identity2.json", mat(np.eye(2)))
    write("identity3.json", mat(np.eye(3)))
    write("s0.json", mat(s0))
    write("diag_e2_einv.json", mat(np.diag([math.e**2, math.exp(-1.0)])))
    write("spd_a.json", mat([[2.0, 0.3], [0.3, 1.0]]))
    write("scalars_1_8_27.json", {"points": [mat([[1.0]]), mat([[8.0]]), mat([[27.0]])]})
    write(
        "tuple_2x2.json",
        {"points": [mat([[2.0, 0.3], [0.3, 1.0]]), mat([[1.0, -0.4], [-0.4, 3.0]]), mat([[0.5, 0.0], [0.0, 0.8]]), mat([[1.5, 0.7], [0.7, 1.2]])]},
    )

    # Closed forms. c2: the orbit of I is {I, AA*}; its midpoint (AA*)^{1/2}
    # has determinant |det A| = 1, so it is already normalized.
    t_c2 = psd_fn(a @ a.T, np.sqrt)
    w = np.linalg.eigvalsh(t_c2)
    write(
        "golden/unitarise_c2.json",
        {
            "args": ["unitarise", "c2.json", "--group", "finite"],
            "exit_code": 0,
            "fields": {
                "fixed_point": {"value": t_c2.tolist(), "tol": 1e-9},
                "normalized": {"value": (t_c2 / math.sqrt(w[0] * w[-1])).tolist(), "tol": 1e-9},
                "size_measured": {"value": math.sqrt(w[-1] / w[0]), "tol": 1e-6},
                "residual": {"max": 1e-9},
                "unitariser_defect": {"max": 1e-9},
            },
        },
    )
    # Rotations conjugated by S0 = diag(2,1): fixed points are multiples of
    # S0 S0* = diag(4,1); normalized diag(2,1/2), s(S) = 2.
    runs = {
        "z_rotation": ["unitarise", "z_rotation.json", "--group", "z"],
        "z2_rotations": [
            "unitarise", "z2_rotations.json", "--normal", "g0", "--normal-group", "z",
            "--quotient", "z", "--lifts", "g1", "--alpha", "4",
        ],
    }
    for name, args in runs.items():
        write(
            f"golden/unitarise_{name}.json",
            {
                "args": args,
                "exit_code": 0,
                "fields": {
                    "normalized": {"value": [[2.0, 0.0], [0.0, 0.5]], "tol": 1e-5},
                    "size_measured": {"value": 2.0, "tol": 1e-5},
                    "residual": {"max": 1e-6},
                    "unitariser_defect": {"max": 1e-6},
                },
            },
        )
    write(
        "golden/unitarise_unbounded.json",
        {
            "args": ["unitarise", "unbounded.json", "--group", "z"],
            "exit_code": 1,
            "error_kind": "NotUniformlyBounded",
        },
    )
    # Thompson distance I vs diag(e², 1/e): relative spectrum (e², 1/e).
    write(
        "golden/dist_identity_diag.json",
        {
            "args": ["dist", "identity2.json", "diag_e2_einv.json"],
            "exit_code": 0,
            "fields": {"distance": {"value": 2.0, "tol": 1e-12}},
        },
    )
    # Commuting scalars: the barycenter is the geometric mean (1·8·27)^{1/3}.
    write(
        "golden/barycenter_scalars.json",
        {
            "args": ["barycenter", "scalars_1_8_27.json"],
            "exit_code": 0,
            "fields": {"point": {"value": [[6.0]], "tol": 1e-8}},
        },
    )


if __name__ == "__main__":
    main()
