from family_helper import FamilyHelper
from instances import RMAT_PRESETS, gen_rmat


class RMAT(FamilyHelper):
    @staticmethod
    def name():
        return "rmat"

    @staticmethod
    def defaults():
        return {"preset": "a"}

    @staticmethod
    def randomized():
        return True

    @staticmethod
    def generate(seed, **params):
        preset = params.get("preset", "a")
        if preset not in RMAT_PRESETS:
            raise ValueError(f"Unknown R-MAT preset: {preset}. Choose from {', '.join(RMAT_PRESETS)}")
        params = {**RMAT_PRESETS[preset], **{k: v for k, v in params.items() if k != "preset"}}
        return gen_rmat(
            int(params["nodes"]),
            int(params["arcs"]),
            float(params["a"]),
            float(params["b"]),
            float(params["c"]),
            float(params["d"]),
            seed,
        )
