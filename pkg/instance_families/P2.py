from family_helper import FamilyHelper
from instances import gen_p2


class P2(FamilyHelper):
    @staticmethod
    def name():
        return "p2"

    @staticmethod
    def defaults():
        return {"n": 5, "m0": 20}

    @staticmethod
    def randomized():
        return True

    @staticmethod
    def generate(seed, **params):
        params = {**P2.defaults(), **params}
        return gen_p2(int(params["n"]), int(params["m0"]), seed)
