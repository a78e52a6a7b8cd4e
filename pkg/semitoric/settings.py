import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class EngineSettings:
    """
    Tunables shared by the engine and the command line.
    - certification_factor: generated/oracle agreement is checked up to this
      multiple of the largest generator degree
    - workers: threads used for per-cone work in fan computations
    - svg_pitch: lattice pitch of emitted figures, in pixels
    - default_window: plot box [0, N]^2 when no window is given
    """
    certification_factor: int = 3
    workers: int = 1
    svg_pitch: int = 32
    default_window: int = 4
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, environ: dict | None = None) -> "EngineSettings":
        """Read SEMITORIC_<FIELD> overrides from the environment."""
        environ = os.environ if environ is None else environ
        overrides = {}
        for field in fields(cls):
            raw = environ.get(f"SEMITORIC_{field.name.upper()}")
            if raw is None:
                continue
            overrides[field.name] = int(raw) if field.type in (int, "int") else raw
        return cls(**overrides)

    def with_overrides(self, **values) -> "EngineSettings":
        """Return a copy with every non-None value applied."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})

    def __post_init__(self):
        if self.certification_factor < 1:
            raise ValueError("certification_factor must be at least 1.")
        if self.workers < 1:
            raise ValueError("workers must be positive.")
        if self.svg_pitch <= 0:
            raise ValueError("svg_pitch must be positive.")
