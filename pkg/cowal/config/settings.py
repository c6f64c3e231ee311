"""
Configuration Management

Handles environment variables and application settings
"""

from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="COWAL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field(default="INFO")
    log_file: str = Field(default="")

    # Selection
    budget: int = Field(default=10, ge=1)
    restarts: int = Field(default=2, ge=1)
    max_iter: int = Field(default=100, ge=1)
    tol: float = Field(default=1e-6, gt=0)
    normalize: bool = Field(default=True)

    # Simulation
    steps: int = Field(default=6, ge=0)
    runs: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0)
    jobs: int = Field(default=1, ge=1)
    initial_videos: int = Field(default=10, ge=1)
    val_fraction: float = Field(default=1 / 3, ge=0, lt=1)
    proxy_bandwidth: float = Field(default=0.5, gt=0)

    # Representation
    temperature: float = Field(default=0.5, gt=0)
    jitter: float = Field(default=0.1, ge=0)
    lr: float = Field(default=3e-4, ge=0)
    epochs: int = Field(default=200, ge=1)
    batch_pairs: int = Field(default=256, ge=1)
    hidden_dim: int = Field(default=64, ge=1)
    embed_dim: int = Field(default=16, ge=1)
    weight_decay: float = Field(default=1e-2, ge=0)

    # Storage
    output_dir: str = Field(default="./cowal-out")

    @property
    def expanded_log_file(self) -> Path | None:
        """Expand ~ in log file path"""
        return Path(self.log_file).expanduser() if self.log_file else None

    @property
    def expanded_output_dir(self) -> Path:
        """Expand ~ in output dir path"""
        return Path(self.output_dir).expanduser()

    def ensure_dirs(self) -> None:
        """Create necessary directories"""
        if self.expanded_log_file is not None:
            self.expanded_log_file.parent.mkdir(parents=True, exist_ok=True)


# Global settings instance
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get the global settings instance"""
    global _settings
    if _settings is None:
        _settings = Settings()
        _settings.ensure_dirs()
    return _settings


def reload_settings() -> Settings:
    """Reload settings from environment"""
    global _settings
    _settings = Settings()
    _settings.ensure_dirs()
    return _settings
