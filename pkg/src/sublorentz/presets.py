"""Built-in problem configurations for the three concrete model settings."""

PRESETS = {
    # flat spacetime R^{1,1}: the textbook twin-paradox setting
    "minkowski11": {
        "version": 1,
        "model": {"kind": "abelian", "dim": 2},
        "cone": {"kind": "lorentz", "form": [[1.0, 0.0], [0.0, -1.0]],
                 "nappe_selector": [1.0, 0.0]},
        "antinorm": {"kind": "lorentz_sqrt", "form": [[1.0, 0.0], [0.0, -1.0]]},
        "timeform": {"kind": "left_invariant", "tau0": [1.0, 0.0]},
        "endpoints": {"x0": [0.0, 0.0], "x1": [5.0, 3.0]},
        "segments": 50,
    },
    # Lorentzian structure on the hyperbolic plane R x R_+ with the
    # y-dominated cone y >= 2|x|; the b dy / y time form is closed
    "hyperbolic": {
        "version": 1,
        "model": {"kind": "hyperbolic"},
        "cone": {"kind": "lorentz", "form": [[-4.0, 0.0], [0.0, 1.0]],
                 "nappe_selector": [0.0, 1.0]},
        "antinorm": {"kind": "lorentz_sqrt", "form": [[-4.0, 0.0], [0.0, 1.0]]},
        "timeform": {"kind": "hyperbolic_ab", "a": 0.0, "b": 1.0},
        # x-reach from (0, 1) at final height y is capped by (y - 1)/2 = 0.5
        "endpoints": {"x0": [0.0, 1.0], "x1": [0.3, 2.0]},
        "segments": 50,
    },
    # sub-Lorentzian Heisenberg group: flat cone and length in the first
    # layer, oriented-area coordinate in the second
    "heisenberg-sl": {
        "version": 1,
        "model": {"kind": "carnot", "builtin": "minkowski_area", "r": 1},
        "cone": {"kind": "lorentz", "form": [[1.0, 0.0], [0.0, -1.0]],
                 "nappe_selector": [1.0, 0.0]},
        "antinorm": {"kind": "lorentz_sqrt", "form": [[1.0, 0.0], [0.0, -1.0]]},
        "timeform": {"kind": "left_invariant", "tau0": [1.0, 0.0, 0.0]},
        "endpoints": {"x0": [0.0, 0.0, 0.0], "x1": [3.0, 0.0, 0.0]},
        "segments": 50,
    },
}
