from family_helper import FamilyHelper
from instances import gen_p1


class P1(FamilyHelper):
    @staticmethod
    def name():
        return "p1"

    @staticmethod
    def defaults():
        return {"M": 50, "n": 20}

    @staticmethod
    def generate(seed, **params):
        params = {**P1.defaults(), **params}
        return gen_p1(int(params["M"]), int(params["n"]))
