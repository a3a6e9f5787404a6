"""Generator parameter bundle shared by the fitting, generation, and CLI layers."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class HagParams:
    """The generator parameters of a hidden-ancestor-graph model.

    Attributes
    ----------
    mu:
        Mean offspring count of the latent tree (> 1, need not be integral);
        offspring are drawn as 1 + Poisson(mu - 1).
    depth:
        Tree depth D >= 1; all graph vertices are leaves at depth D.
    theta:
        Label-innovation strength controlling the depth-dependent color
        switch rates.
    q1:
        Weight of height 1 in the edge height distribution; the remaining
        mass is uniform over heights 2..D.
    mu_o, sigma_o:
        Log-normal parameters of the leaf marks.
    omega:
        Marginal wild rate in [0, 1).
    beta:
        Mark/wildness coupling strength (0 decouples them).
    """

    mu: float
    depth: int
    theta: float
    q1: float
    mu_o: float
    sigma_o: float
    omega: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not self.mu > 1.0:
            raise ValueError(f"mu must exceed 1, got {self.mu}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if not self.theta > 0.0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not 0.0 <= self.q1 < 1.0 and self.q1 != 1.0:
            raise ValueError(f"q1 must lie in [0, 1], got {self.q1}")
        if self.sigma_o < 0.0:
            raise ValueError(f"sigma_o must be non-negative, got {self.sigma_o}")
        if not 0.0 <= self.omega < 1.0:
            raise ValueError(f"omega must lie in [0, 1), got {self.omega}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "HagParams":
        known = {f: d[f] for f in ("mu", "depth", "theta", "q1", "mu_o", "sigma_o", "omega") if f in d}
        missing = {"mu", "depth", "theta", "q1", "mu_o", "sigma_o", "omega"} - set(known)
        if missing:
            raise ValueError(f"missing parameter fields: {sorted(missing)}")
        known["beta"] = d.get("beta", 0.0)
        known["depth"] = int(known["depth"])
        return cls(**known)
