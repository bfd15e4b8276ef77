"""Closed-form data for every family, read from ``data/catalog.json``.

Each local branch carries the formula used for computation.  Where the
printed text differs from it, the branch also records ``printed_text`` and an
``erratum`` string, and the family's ``errata`` list says which display is
affected.  Global displays are transcribed literally in the ``printed`` field
so they can be re-expanded and compared against the Euler product of the
local branches.
"""

from __future__ import annotations

from collections.abc import Mapping
from functools import lru_cache
from importlib import resources
import json

from .formula import GlobalExpr, chi3, chi4, eval_global, eval_int, eval_local, formula_names, local_env
from .groupalg import FamilySpec
from .ratfunc import RationalUX, monomial, series_expand, substitute_inverse
from .tables import CoeffTable, GlobalCoeffs

CHARACTERS = {"none": lambda p: 1, "chi3": chi3, "chi4": chi4}


class CatalogError(ValueError):
    pass


@lru_cache(maxsize=1)
def load_catalog() -> dict[str, FamilySpec]:
    raw = json.loads(resources.files("abzeta").joinpath("data/catalog.json").read_text("utf-8"))
    out = {}
    for rec in raw["families"]:
        rec = dict(rec)
        rec["relations"] = [tuple(r) for r in rec.get("relations", [])]
        out[rec["name"]] = FamilySpec(**rec)
    return out


def family_names() -> list[str]:
    return list(load_catalog())


def get_family(name: str | FamilySpec) -> FamilySpec:
    if isinstance(name, FamilySpec):
        return name
    cat = load_catalog()
    if name in cat:
        return cat[name]
    for fam in cat.values():
        if fam.title == name:
            return fam
    raise CatalogError(f"unknown family {name!r}; known: {', '.join(cat)}")


def default_params(fam: FamilySpec) -> dict[str, int]:
    return {n: vals[0] for n, vals in fam.params.items()}


def _env(fam: FamilySpec, params: Mapping[str, int]) -> dict[str, int]:
    env = dict(params)
    env["k"] = fam.k_value(params)
    return env


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# ------------------------------------------------------------------ local


def local_branch(fam: FamilySpec, params: Mapping[str, int], p: int) -> dict:
    """The unique local branch whose guard holds at ``p``."""
    env = {**_env(fam, params), "p": p}
    hits = [b for b in fam.local if eval_int(b["guard"], env)]
    if len(hits) != 1:
        raise CatalogError(
            f"{fam.name}{dict(params)}: {len(hits)} local branches match p={p}"
        )
    return hits[0]


def local_factor(
    fam: FamilySpec | str, params: Mapping[str, int] | None, p: int, *, strict: bool = True
) -> RationalUX:
    """Closed-form local factor at ``p``, in the generic variables ``u, X``
    with ``v`` and the character values already substituted for ``p``."""
    fam = get_family(fam)
    params = dict(params or {})
    if strict:
        fam.check_params(params)
    if not is_prime(p):
        raise CatalogError(f"{p} is not prime")
    branch = local_branch(fam, params, p)
    env = local_env(_env(fam, params), p, branch.get("valuation_of", fam.valuation_of))
    text = branch["formula"]
    if "p" in formula_names(text):
        return eval_local(text, env)
    del env["p"]
    return _eval_cached(text, tuple(sorted(env.items())))


@lru_cache(maxsize=4096)
def _eval_cached(text: str, items: tuple) -> RationalUX:
    # the result is generic in u, so primes sharing v and the character
    # values share one evaluation
    return eval_local(text, {**dict(items), "p": 0})


def local_table(fam, params, p: int, m: int, *, strict: bool = True) -> CoeffTable:
    fam = get_family(fam)
    tab = series_expand(local_factor(fam, params, p, strict=strict), p, m, label=fam.name)
    tab.family, tab.params = fam.name, dict(params or {})
    return tab


# ----------------------------------------------------------------- global


def global_coeffs(fam, params, N: int, *, bound: int = 10**5) -> GlobalCoeffs:
    """``a_1 .. a_N`` of the Euler product of the local branches."""
    from .series import euler_assemble_factors

    fam = get_family(fam)
    params = fam.check_params(params or {})
    if N > bound:
        raise CatalogError(f"N={N} exceeds the configured bound {bound}")
    return euler_assemble_factors(
        lambda p: local_factor(fam, params, p), N, source=f"{fam.name} local branches"
    )


def printed_global(fam, params) -> GlobalExpr:
    fam = get_family(fam)
    env = _env(fam, fam.check_params(params or {}))
    hits = [g for g in fam.global_formula if eval_int(g["guard"], env)]
    if len(hits) != 1:
        raise CatalogError(f"{fam.name}: {len(hits)} global displays apply to {dict(params)}")
    return eval_global(hits[0]["printed"], env, hits[0].get("valuation_of", fam.valuation_of))


def printed_global_coeffs(fam, params, N: int) -> GlobalCoeffs:
    from .series import euler_assemble_factors

    fam = get_family(fam)
    expr = printed_global(fam, params)
    return euler_assemble_factors(expr.factor, N, source=f"{fam.name} printed global")


def abscissa(fam, params) -> int:
    fam = get_family(fam)
    return eval_int(fam.abscissa, _env(fam, params))


# ------------------------------------------------------ functional equation


def fe_prime_is_valid(fam, params, p: int) -> bool:
    """Primes where the functional equation is claimed: ``p`` not dividing 6
    nor a nonzero ``k``, and not named in any local branch guard."""
    fam = get_family(fam)
    k = fam.k_value(params)
    if p in (2, 3) or (k and k % p == 0):
        return False
    return local_branch(fam, params, p) is local_branch(fam, params, _generic_probe(fam, params))


def _generic_probe(fam, params) -> int:
    k = fam.k_value(params) or 1
    p = 101
    while not is_prime(p) or k % p == 0:
        p += 2
    return p


def functional_equation_check(
    fam,
    params,
    p: int,
    *,
    sign: int | None = None,
    c: int | None = None,
    character: str | None = None,
) -> bool:
    """``f(1/u, 1/X) == sign * chi(p) * u^c X^3 * f`` by cross-multiplication.

    The rule defaults to the family's recorded data; any piece can be
    overridden for negative controls.
    """
    fam = get_family(fam)
    rule = fam.funceq or {}
    sign = rule.get("sign", -1) if sign is None else sign
    c = rule["c"] if c is None else c
    character = rule.get("character", "none") if character is None else character
    f = local_factor(fam, params, p)
    rhs = f * monomial(c, rule.get("x_exp", 3), sign * CHARACTERS[character](p))
    return substitute_inverse(f) == rhs


# ------------------------------------------------------- full zeta, r prime


def fitting_family_params(fam, params) -> dict[str, int]:
    return {"k": get_family(fam).k_value(params)}


def full_zeta_prime_holonomy(fam, params, N: int) -> GlobalCoeffs:
    """Coefficients of ``zeta_G = zeta_{G,N} + r^{-s} zeta_N`` for prime
    holonomy order ``r``.  The two summands are separate Euler products, so
    the sum is formed coefficientwise."""
    fam = get_family(fam)
    params = fam.check_params(params or {})
    r = fam.r
    if not is_prime(r):
        raise CatalogError(
            f"{fam.name} has holonomy of order {r}; intermediate subgroups must be "
            "supplied with full_zeta_from_intermediates"
        )
    return full_zeta_from_intermediates(fam, params, [(r, "N", fitting_family_params(fam, params))], N)


def full_zeta_from_intermediates(fam, params, intermediates, N: int) -> GlobalCoeffs:
    """``zeta_G = zeta_{G,N} + sum_H [G:H]^{-s} zeta_{H,N}`` with the
    intermediate groups ``H`` given as ``(index, family, params)``."""
    from .series import add_shifted, euler_assemble_factors

    fam = get_family(fam)
    out = global_coeffs(fam, params, N)
    for index, hname, hparams in intermediates:
        h = get_family(hname)
        sub = euler_assemble_factors(
            lambda p, h=h, hp=hparams: local_factor(h, hp, p, strict=False),
            N // index or 1,
            source=h.name,
        )
        out = add_shifted(out, sub, index)
    return GlobalCoeffs(N, out.a, source=f"{fam.name} full zeta")


# ----------------------------------------------------------------- report


def errata_report() -> list[dict]:
    """Every printed-versus-confirmed discrepancy, one row each."""
    rows = []
    for fam in load_catalog().values():
        own = [{"family": fam.name, **e} for e in fam.errata]
        printed_locals = {e.get("printed") for e in fam.errata if e["display"].startswith("local")}
        for b in fam.local:
            if "erratum" in b and b.get("printed_text") not in printed_locals:
                own.append(
                    {
                        "family": fam.name,
                        "display": f"local [{b['guard']}]",
                        "kind": "local",
                        "printed": b.get("printed_text", ""),
                        "confirmed": b["formula"],
                        "affects_values": True,
                        "reason": b["erratum"],
                    }
                )
        if not any(e["display"] == "global" for e in fam.errata):
            for g in fam.global_formula:
                if "erratum" in g:
                    own.append(
                        {
                            "family": fam.name,
                            "display": "global",
                            "kind": "global",
                            "printed": g["printed"],
                            "affects_values": True,
                            "reason": g["erratum"],
                        }
                    )
        rows += own
    for r in rows:
        r.setdefault("reason", f"printed {r.get('printed', '?')}; confirmed {r.get('confirmed', '?')}")
    return rows


def global_erratum(fam) -> str | None:
    """The erratum text attached to the family's global display, if any."""
    fam = get_family(fam)
    for g in fam.global_formula:
        if "erratum" in g:
            return g["erratum"]
    return None


def dump_catalog() -> dict:
    out = []
    for fam in load_catalog().values():
        out.append(
            {
                "name": fam.name,
                "title": fam.title,
                "holonomy": fam.holonomy,
                "k": fam.k,
                "params": fam.params,
                "switches": fam.switches,
                "generators": fam.generators,
                "relations": [list(r) for r in fam.relations],
                "mixing": fam.mixing,
                "valuation_of": fam.valuation_of,
                "local": fam.local,
                "global": fam.global_formula,
                "funceq": fam.funceq,
                "abscissa": fam.abscissa,
                "errata": fam.errata,
            }
        )
    return {"families": out}
