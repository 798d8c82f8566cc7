from pydantic_settings import BaseSettings, SettingsConfigDict

config = {
    # Tolerances
    "FEASIBILITY_TOL": 1e-9,
    "VALUE_TOL": 1e-6,
    "PRICING_TOL": 1e-7,
    "GAP_TOL": 1e-6,
    # Perturbations used while separating
    "EPSILON_PATH_PENALTY": 1e-4,
    # Enumeration limits
    "PATH_LIMIT": 10_000,
    "SCENARIO_ENUMERATION_LIMIT": 10_000,
    "INTERDICTION_ENUMERATION_LIMIT": 20_000,
    "CUT_ENUMERATION_LIMIT": 1 << 16,
    "PRICING_ENUMERATION_MAX_SCENARIOS": 12,
    # Branch and bound
    "NODE_LIMIT": 1_000_000,
    # Heuristic parameter search
    "BREAKPOINT_SCAN_MAX_ARCS": 1000,
    # Driver
    "MAX_ITERATIONS": 1000,
    "STALL_ITERATIONS": 3,
    # Bench
    "BENCH_CONFIG_PATH": "bench-configs/default.yaml",
    "BENCH_OUTPUT_PATH": ".cache/bench",
}


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="ROBUSTFLOW_")

    log: str = "info"


def settings() -> Settings:
    return Settings()
