"""Golden reference values for the reproduction targets.

Two benchmark tables of optimized performance: (a) sweeps the status
generation probability at N=30, (b) sweeps the user count at rho=0.04.
Entries are (gamma*, M*, AAoI); tolerances in cli.run_reproduce.
"""

# (V, rho) -> (gamma*, M*, aaoi), exhaustive-search optima, N=30
TABLE1A_FSA_RD = {
    (4, 0.01): (0.82, 2, 105.55),
    (4, 0.02): (0.38, 2, 72.38),
    (4, 0.04): (0.20, 3, 70.25),
    (4, 0.08): (0.16, 3, 70.16),
    (4, 0.10): (0.15, 3, 70.15),
    (6, 0.01): (1.00, 2, 104.37),
    (6, 0.02): (0.85, 3, 60.75),
    (6, 0.04): (0.35, 3, 56.53),
    (6, 0.08): (0.25, 3, 56.45),
    (6, 0.10): (0.24, 3, 56.45),
    (8, 0.01): (1.00, 3, 104.16),
    (8, 0.02): (1.00, 3, 57.84),
    (8, 0.04): (0.50, 3, 51.38),
    (8, 0.08): (0.34, 3, 51.32),
    (8, 0.10): (0.32, 3, 52.30),
}

# (V, rho) -> (gamma*(M*), M*, aaoi), rule-guided optima, N=30
TABLE1A_FSA_RD_ONE = {
    (4, 0.01): (1.0000, 3, 131.16),
    (4, 0.02): (1.0000, 3, 86.46),
    (4, 0.04): (1.0000, 3, 70.74),
    (4, 0.08): (0.6025, 3, 70.18),
    (4, 0.10): (0.4920, 3, 70.16),
    (6, 0.01): (1.0000, 3, 124.06),
    (6, 0.02): (1.0000, 3, 78.74),
    (6, 0.04): (1.0000, 3, 60.42),
    (6, 0.08): (0.9037, 3, 56.47),
    (6, 0.10): (0.7380, 3, 56.46),
    (8, 0.01): (1.0000, 3, 120.82),
    (8, 0.02): (1.0000, 4, 74.55),
    (8, 0.04): (1.0000, 4, 55.67),
    (8, 0.08): (0.9403, 4, 51.37),
    (8, 0.10): (0.9840, 3, 51.32),
}

# rho -> simulated tau-grid optimum, N=30
TABLE1A_SLOTTED_ALOHA = {
    0.01: 110.14, 0.02: 82.55, 0.04: 81.30, 0.08: 80.22, 0.10: 80.12,
}

# (V, N) -> (gamma*, M*, aaoi), rho=0.04
TABLE1B_FSA_RD = {
    (4, 10): (1.00, 2, 30.58),
    (4, 20): (0.40, 3, 47.71),
    (4, 40): (0.13, 3, 93.14),
    (4, 50): (0.10, 3, 116.02),
    (6, 10): (1.00, 3, 29.77),
    (6, 20): (0.77, 3, 38.89),
    (6, 40): (0.22, 3, 74.67),
    (6, 50): (0.16, 3, 92.84),
    (8, 10): (1.00, 3, 29.45),
    (8, 20): (1.00, 3, 35.78),
    (8, 40): (0.51, 3, 67.73),
    (8, 50): (0.22, 3, 84.12),
}

TABLE1B_FSA_RD_ONE = {
    (4, 10): (1.0000, 3, 37.40),
    (4, 20): (1.0000, 3, 52.12),
    (4, 40): (0.8676, 3, 93.12),
    (4, 50): (0.6941, 3, 116.04),
    (6, 10): (1.0000, 3, 35.12),
    (6, 20): (1.0000, 3, 46.63),
    (6, 40): (1.0000, 3, 75.89),
    (6, 50): (1.0000, 3, 92.90),
    (8, 10): (1.0000, 3, 34.09),
    (8, 20): (1.0000, 4, 43.89),
    (8, 40): (1.0000, 4, 69.19),
    (8, 50): (1.0000, 4, 84.23),
}

# N -> simulated tau-grid optimum, rho=0.04
TABLE1B_SLOTTED_ALOHA = {10: 31.63, 20: 53.72, 40: 107.66, 50: 136.97}

# Cells whose printed entry is internally inconsistent (two of the three
# printed values match recomputation exactly, the third is a single-character
# corruption); kept verbatim above, flagged here so reproduction reports can
# annotate instead of hard-failing. The recomputed entry is given for context.
TABLE1_SUSPECT_CELLS = {
    # printed M*=2, but 72.38 is the grid optimum at M=3 (M=2 gives 73.78)
    ("fsa-rd", "a", 4, 0.02): (0.38, 3, 72.38),
    # printed 52.30 breaks the monotone row trend; recomputed optimum is 51.30
    ("fsa-rd", "a", 8, 0.10): (0.32, 3, 51.30),
    # printed gamma*=0.51, but 67.73 is attained at gamma=0.31 (0.51 gives 71.91)
    ("fsa-rd", "b", 8, 40): (0.31, 3, 67.73),
}

# Fig. 3 sweep families: AAoI versus gamma for two network sizes per scheme
FIG3_FAMILIES = (
    {"N": 30, "V": 4, "rhos": (0.04, 0.10), "Ms": (2, 3)},
    {"N": 50, "V": 6, "rhos": (0.04, 0.10), "Ms": (2, 3)},
)

# Fig. 4 families: reservation-success curves and optimized-AAoI comparison, N=50
FIG4A = {"N": 50, "V": 4, "M": 3, "rhos": (0.02, 0.06, 0.10)}
FIG4B = {"N": 50, "Vs": (4, 6, 8), "rhos": (0.01, 0.02, 0.04, 0.06, 0.08, 0.10)}
