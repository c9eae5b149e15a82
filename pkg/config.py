from pydantic_settings import BaseSettings
from typing import Optional


class Settings(BaseSettings):
    # Encoding defaults
    default_moduli: str = "primes"  # "primes", "naturals", "primepowers" or "list:2,3,5"
    sortnet_radix: int = 4
    via_pb_backend: str = "bdd"  # "bdd", "adder" or "sortnet"

    # Solver / oracle budgets
    solver_decision_budget: int = 1_000_000
    enumeration_limit_vars: int = 25
    verify_limit_vars: int = 16
    valid_check_limit_vars: int = 20

    # Arc-consistency harness
    arc_limit_vars: int = 16
    arc_exhaustive_max_vars: int = 10
    arc_samples: int = 10_000
    arc_seed: int = 2011
    arc_witness_cap: int = 20
    compare_arc_max_vars: int = 12

    # Size of the seeded random validity suite
    validation_instances: int = 1000

    # Logging Configuration
    log_level: str = "INFO"
    log_file: Optional[str] = "logs/pbmod.log"

    class Config:
        env_prefix = "PBMOD_"
        env_file = ".env"
        case_sensitive = False


settings = Settings()
