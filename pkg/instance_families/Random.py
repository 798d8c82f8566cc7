from family_helper import FamilyHelper
from instances import gen_random


class Random(FamilyHelper):
    @staticmethod
    def name():
        return "random"

    @staticmethod
    def defaults():
        return {"nodes": 6, "arcs": 12, "safe_fraction": 0.0, "max_capacity": 10}

    @staticmethod
    def randomized():
        return True

    @staticmethod
    def generate(seed, **params):
        params = {**Random.defaults(), **params}
        return gen_random(
            int(params["nodes"]),
            int(params["arcs"]),
            seed,
            float(params["safe_fraction"]),
            int(params["max_capacity"]),
        )
