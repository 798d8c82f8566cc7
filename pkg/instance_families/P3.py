from family_helper import FamilyHelper
from instances import gen_p3

# Small enough for exact interdiction.
DEFAULT_PARAMS = {"n": 3, "m": 3, "M": 5}

# Parameter grid scanned when looking for a positive heuristic gap.
WITNESS_GRID = {"n": (1, 2, 3), "m": (1, 2, 3, 5), "M": (2, 3, 5, 8)}


class P3(FamilyHelper):
    @staticmethod
    def name():
        return "p3"

    @staticmethod
    def defaults():
        return dict(DEFAULT_PARAMS)

    @staticmethod
    def witness_grid():
        return {key: list(values) for key, values in WITNESS_GRID.items()}

    @staticmethod
    def generate(seed, **params):
        params = {**P3.defaults(), **params}
        return gen_p3(int(params["n"]), int(params["m"]), int(params["M"]))
