"""Tiers, tiered types, and per-context tier assignments.

A tier assignment fixes, for every context (a method, constructor, or the
main entry), the tier of each variable visible there -- including `this`,
the owner's fields, and flattening temporaries -- plus one annotation tier
per method signature bounding the tier of instructions the method may be
called from.
"""

from dataclasses import dataclass, field

from .typecheck import ProgramTypes

TIER0 = 0
TIER1 = 1


def tier_join(a: int, b: int) -> int:
    return a | b


def tier_meet(a: int, b: int) -> int:
    return a & b


@dataclass(frozen=True)
class TieredType:
    base: str
    tier: int

    def __str__(self):
        return f"{self.base}({self.tier})"


@dataclass
class TierView:
    """Tier lookups for the interpreter: variable tiers and annotations."""

    contexts: dict  # ctx key -> {var: 0|1}
    gammas: dict  # method sig key -> 0|1

    def tier(self, ctx: str, var: str, default: int = TIER0) -> int:
        return self.contexts.get(ctx, {}).get(var, default)

    def gamma(self, sig_key: str, default: int = TIER0) -> int:
        return self.gammas.get(sig_key, default)

    def tier1_names(self, ctx: str) -> tuple:
        return tuple(
            sorted(n for n, t in self.contexts.get(ctx, {}).items() if t == TIER1)
        )


@dataclass
class TierAssignment:
    """Variable tiers per context plus per-method annotation tiers."""

    contexts: dict = field(default_factory=dict)  # ctx key -> {var: 0|1}
    gammas: dict = field(default_factory=dict)  # method sig key -> 0|1

    def tier(self, ctx: str, var: str, default: int = TIER0) -> int:
        return self.contexts.get(ctx, {}).get(var, default)

    def gamma(self, sig_key: str, default: int = TIER0) -> int:
        return self.gammas.get(sig_key, default)

    def set_tier(self, ctx: str, var: str, t: int):
        self.contexts.setdefault(ctx, {})[var] = t

    def method_type(self, sig_key: str, decl, default: int = TIER0):
        """The tiered method type (this_tier, param_tiers, ret_tier, gamma)."""
        ctx = self.contexts.get(sig_key, {})
        this_t = ctx.get("this", default)
        params = tuple(ctx.get(n, default) for n, _ in decl.params)
        ret = ctx.get(decl.return_var, default) if decl.return_var else None
        return this_t, params, ret, self.gamma(sig_key)

    def tier1_view(self) -> "TierView":
        """Read-only view used by the interpreter's tier-1 machinery."""
        return TierView(
            contexts={k: dict(v) for k, v in self.contexts.items()},
            gammas=dict(self.gammas),
        )

    def to_json(self, types: ProgramTypes) -> dict:
        out = {}
        for ctx, vars in sorted(self.contexts.items()):
            entry = {}
            for var, tier in sorted(vars.items()):
                t = types.var_type(ctx, var)
                entry[var] = {"type": t.name if t else "?", "tier": tier}
            out[ctx] = entry
        return {
            "assignment": out,
            "gamma": dict(sorted(self.gammas.items())),
        }

    @staticmethod
    def from_json(data: dict) -> "TierAssignment":
        t = TierAssignment()
        for ctx, vars in data.get("assignment", {}).items():
            for var, info in vars.items():
                tier = info["tier"] if isinstance(info, dict) else int(info)
                t.set_tier(ctx, var, int(tier))
        for sig, g in data.get("gamma", {}).items():
            t.gammas[sig] = int(g)
        return t
