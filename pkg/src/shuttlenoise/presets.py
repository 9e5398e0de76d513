"""Named run configurations reproducing the figure data sets.

Times are in units of the trap period T0.
"""

PRESETS = {
    "fig1": {
        "command": "trajectory",
        "trajectories": ["poly5", "cosine3"],
        "T": [5.0],
        "samples": 401,
    },
    "fig2": {
        "command": "sensitivity",
        "noise": "ou",
        "tau": [0.01, 2.0],
        "T": {"start": 1.0, "stop": 100.0, "num": 100, "log": True},
        "trajectories": ["poly5", "cosine3"],
    },
    "fig3": {
        "command": "sensitivity",
        "noise": "ou",
        "T": [5.0, 5.1],
        "tau": {"start": 1e-3, "stop": 1e4, "num": 141, "log": True},
        "trajectories": ["poly5", "cosine3"],
    },
    "fig4": {
        "command": "crossover",
        "tau": {"start": 1e-3, "stop": 10.0, "num": 41, "log": True},
    },
    "fig5": {
        "command": "sensitivity",
        "noise": "ou",
        "T": {"start": 1.0, "stop": 10.0, "num": 19, "log": False},
        "tau": {"start": 1e-3, "stop": 10.0, "num": 17, "log": True},
        "trajectories": ["poly5", "cosine3"],
    },
    "fig5-n6": {
        "command": "optimize-n6",
        "T": {"start": 1.0, "stop": 10.0, "num": 5, "log": False},
        "tau": {"start": 1e-3, "stop": 10.0, "num": 5, "log": True},
    },
    "fig7": {
        "command": "sensitivity",
        "noise": "flicker",
        "tau1": 80.0,
        "tau2": 100.0,
        "T": {"start": 0.05, "stop": 10.0, "num": 200, "log": False},
        "trajectories": ["poly5", "cosine3"],
    },
    "montecarlo": {
        "command": "montecarlo",
        "noise": "ou",
        "tau": [0.1],
        "T": [5.0],
        "trajectories": ["poly5"],
        "lambda": 0.01,
        "realizations": 4000,
    },
}
# alias for the flicker scan
PRESETS["fig6"] = dict(PRESETS["fig7"])
