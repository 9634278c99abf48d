"""Experiment driver: run protocols, verification tests, attacks, audits,
and parameter sweeps with reproducible seeds.

Exit codes: 0 success/pass, 2 verification failure, 1 error.  The seed comes
from --seed, then the MODSUM_SEED environment variable, then 0.  Reports are
written as JSON (always), CSV for tabular content, and a PNG figure next to
the delimited output.
"""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np
import yaml

from . import __version__, attacks, mzsr, protocols, quantum, reporting, verification
from .channel import AdversaryModel, payload_to_json
from .fields import ExtFieldSpec, FieldSpec, LinearMap, vector_from_indices


def _load_config(path):
    if path is None:
        return {}
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        return yaml.safe_load(text) or {}
    return json.loads(text)


def _resolve_seed(seed, config):
    if seed is not None:
        return int(seed)
    if "seed" in config:
        return int(config["seed"])
    env = os.environ.get("MODSUM_SEED")
    return int(env) if env else 0


def _opt(config, key, value, default):
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _field_from_order(q: int) -> FieldSpec:
    return FieldSpec.from_order(q)


def _noise_model(kind, eps, field, m):
    if kind in (None, "none") or not eps:
        return None
    if kind == "replacement":
        bad = quantum.computational_state(field, m, [0] * m)
        return quantum.NoiseModel("replacement", eps, replacement=bad)
    return quantum.NoiseModel(kind, eps)


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="YAML or JSON key-value document with option defaults.")
@click.pass_context
def cli(ctx, config_path):
    """Modulo zero-sum randomness laboratory."""
    ctx.obj = _load_config(config_path)


@cli.command("run-protocol")
@click.option("--name", required=True,
              type=click.Choice(sorted(protocols.PROTOCOLS)))
@click.option("--m", "m_", type=int, default=None)
@click.option("--q", type=int, default=None, help="Field order (prime power).")
@click.option("--c", "c_", type=int, default=None)
@click.option("--e", "e_", type=int, default=None)
@click.option("--d", "d_", type=int, default=None)
@click.option("--map", "map_", type=click.Choice(["identity", "swap"]), default=None)
@click.option("--trials", type=int, default=None,
              help="Repeat the honest run this many times and report the success rate.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.option("--plot/--no-plot", default=None)
@click.pass_context
def run_protocol(ctx, name, m_, q, c_, e_, d_, map_, trials, seed, out, fmt, plot):
    """Execute one protocol honestly and report outputs and correctness."""
    config = ctx.obj
    m = int(_opt(config, "m", m_, 3))
    q = int(_opt(config, "q", q, 2))
    c = int(_opt(config, "c", c_, 1))
    e = int(_opt(config, "e", e_, 1))
    d = int(_opt(config, "d", d_, 1))
    map_name = _opt(config, "map", map_, "identity")
    trials = int(_opt(config, "trials", trials, 1))
    seed = _resolve_seed(seed, config)
    out = Path(_opt(config, "out", out, "reports"))
    fmt = _opt(config, "format", fmt, "json")
    plot = _opt(config, "plot", plot, True)

    field = _field_from_order(q)
    rng = np.random.default_rng(seed)
    rows = []
    successes = 0
    last = None
    for t in range(trials):
        row, ok = _run_protocol_once(name, field, m, c, e, d, map_name, rng)
        successes += ok
        rows.append(row)
        last = row
    resolved = {"name": name, "m": m, "q": q, "c": c, "e": e, "d": d,
                "map": map_name, "trials": trials, "seed": seed}
    payload = reporting.report_payload("run-protocol", resolved, {
        "seed": seed,
        "success_rate": successes / trials,
        "successes": successes,
        "last_run": last,
    })
    base = out / f"run-{name}"
    reporting.write_json(base.with_suffix(".json"), payload)
    if fmt == "csv" or trials > 1:
        reporting.write_csv(base.with_suffix(".csv"), rows)
    click.echo(f"{name}: {successes}/{trials} honest runs correct "
               f"(rate {successes / trials:.4f})")


def _run_protocol_once(name, field, m, c, e, d, map_name, rng):
    if name == "secure-sum":
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        ys = [field.random_vector(c, rng) for _ in range(m)]
        res = protocols.secure_modulo_sum(ys, bundle)
        expect = field.zero_vector(c)
        for y in ys:
            expect = expect + y
        ok = all(v == expect for v in res.outputs.values())
        return {"output": json.dumps(payload_to_json(res.outputs[1])),
                "transcript_digest": res.transcript.digest(), "correct": ok}, ok
    if name == "homomorphic":
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        fmap = LinearMap.identity(field, c) if map_name == "identity" \
            else LinearMap.coordinate_swap(field, c)
        alphas = tuple(vector_from_indices(field, [1] * c) for _ in range(m))
        spec = protocols.HomomorphicSpec(field, c, alphas, fmap)
        ys = [field.random_vector(c, rng) for _ in range(m)]
        res = protocols.homomorphic_compute(spec, ys, bundle)
        ok = all(v == spec.evaluate(ys) for v in res.outputs.values())
        return {"output": json.dumps(payload_to_json(res.outputs[1])),
                "transcript_digest": res.transcript.digest(), "correct": ok}, ok
    if name == "basic-ss":
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        y = field.random_vector(c, rng)
        res = protocols.secret_share_basic(y, bundle)
        ok = res.outputs[m] == y
        return {"output": json.dumps(payload_to_json(res.outputs[m])),
                "transcript_digest": res.transcript.digest(), "correct": ok}, ok
    if name == "cheater-ss":
        ext = ExtFieldSpec(field, c)
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        secret = field.element(int(rng.integers(1, field.order)))
        res = protocols.secret_share_cheater_detect(secret, ext, bundle)
        ok = res.outcome == "accept" and res.value == secret
        return {"output": res.outcome,
                "transcript_digest": res.transcript.digest(),
                "correct": ok}, ok
    # anonymous authentication variants
    cc = 2 * e + d - 1
    bundle = mzsr.ideal_mzsr(field, m, cc, rng)
    mac = protocols.derive_mac_params(bundle, e, d)
    project = field.random_vector(d, rng)
    runner = protocols.anon_auth_basic if name == "anon-auth" \
        else protocols.anon_auth_secure
    res = runner(mac, [project] * m, [True] * m, rng=rng)
    return {"output": "accept" if res.accepted else "reject",
            "transcript_digest": res.transcript.digest(),
            "correct": res.accepted}, res.accepted


@cli.command()
@click.option("--protocol", "proto", required=True,
              type=click.Choice(["player-j", "bell", "trusted"]))
@click.option("--m", "m_", type=int, default=None)
@click.option("--n", "n_", type=int, default=None)
@click.option("--j", "j_", type=int, default=None, help="Player under test (player-j).")
@click.option("--q", type=int, default=None, help="Field order (trusted path only).")
@click.option("--c1", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--signs", type=click.Choice(["ideal", "paper"]), default=None)
@click.option("--source", "source_", type=click.Choice(["ghz", "product", "classical"]),
              default=None)
@click.option("--noise", type=click.Choice(["none", "depolarizing", "dephasing",
                                            "replacement"]), default=None)
@click.option("--eps", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--plot/--no-plot", default=None)
@click.pass_context
def verify(ctx, proto, m_, n_, j_, q, c1, alpha, signs, source_, noise, eps,
           seed, out, plot):
    """Run a verification test; exit code 2 signals a failed test."""
    config = ctx.obj
    m = int(_opt(config, "m", m_, 3))
    n = int(_opt(config, "n", n_, 500))
    j = int(_opt(config, "j", j_, 1))
    q = int(_opt(config, "q", q, 2))
    c1 = float(_opt(config, "c1", c1, 10.0))
    alpha = float(_opt(config, "alpha", alpha, 0.05))
    signs = _opt(config, "signs", signs, "ideal")
    source_ = _opt(config, "source", source_, "ghz")
    noise = _opt(config, "noise", noise, "none")
    eps = float(_opt(config, "eps", eps, 0.0))
    seed = _resolve_seed(seed, config)
    out = Path(_opt(config, "out", out, "reports"))
    plot = _opt(config, "plot", plot, True)

    field = _field_from_order(q if proto == "trusted" else 2)
    mm = 2 if proto == "bell" else m
    model = _noise_model(noise, eps, field, mm)
    if source_ == "ghz":
        source = verification.ghz_source(field, mm, model)
    elif source_ == "product":
        source = verification.product_source(field, mm)
    else:
        source = verification.ClassicalDeterministicSource(mm)
    thresholds = verification.ThresholdSet(c1=c1, sign_mode=signs)
    rng = np.random.default_rng(seed)

    if proto == "player-j":
        report, bundle = verification.selftest_player_j(source, m, n, j,
                                                        thresholds, rng, seed)
    elif proto == "bell":
        report = verification.bell_selftest(source, n, thresholds, rng, seed)
        bundle = None
    else:
        report, bundle = verification.trusted_device_verify(source, n, alpha,
                                                            rng, seed)
    resolved = {"protocol": proto, "m": mm, "n": n, "j": j, "q": field.order,
                "c1": c1, "alpha": alpha, "signs": signs, "source": source_,
                "noise": noise, "eps": eps, "seed": seed}
    body = {"seed": seed, "report": report.to_json()}
    if bundle is not None:
        body["bundle"] = bundle.to_json()
    payload = reporting.report_payload("verify", resolved, body)
    base = out / f"verify-{proto}"
    reporting.write_json(base.with_suffix(".json"), payload)
    reporting.write_csv(base.with_suffix(".csv"),
                        [c.to_json() for c in report.checks])
    if plot:
        reporting.verification_figure(report.to_json(), base.with_suffix(".png"))
    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        click.echo(f"[{status}] {check.name}: {check.average:+.6f} "
                   f"(threshold {check.threshold:+.6f})")
    if not report.passed:
        click.echo("verification FAILED")
        sys.exit(2)
    click.echo("verification passed")


@cli.command()
@click.option("--name", required=True, type=click.Choice(sorted(attacks._ATTACKS)))
@click.option("--mode", type=click.Choice(["exact", "monte-carlo"]), default=None)
@click.option("--trials", type=int, default=None)
@click.option("--q", type=int, default=None)
@click.option("--m", "m_", type=int, default=None)
@click.option("--c", "c_", type=int, default=None)
@click.option("--e", "e_", type=int, default=None)
@click.option("--d", "d_", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--plot/--no-plot", default=None)
@click.pass_context
def attack(ctx, name, mode, trials, q, m_, c_, e_, d_, seed, out, plot):
    """Evaluate an attack's success probability (exact or Monte Carlo)."""
    config = ctx.obj
    mode = _opt(config, "mode", mode, "exact")
    trials = int(_opt(config, "trials", trials, 100000))
    q = int(_opt(config, "q", q, 2))
    m = int(_opt(config, "m", m_, 3))
    c = int(_opt(config, "c", c_, 2))
    e = int(_opt(config, "e", e_, 1))
    d = int(_opt(config, "d", d_, 1))
    seed = _resolve_seed(seed, config)
    out = Path(_opt(config, "out", out, "reports"))
    plot = _opt(config, "plot", plot, True)

    field = _field_from_order(q)
    spec = attacks.AttackSpec(name, {"p": field.p, "ell": field.ell, "c": c,
                                     "m": m, "e": e, "d": d})
    try:
        result = attacks.run_attack(spec, mode=mode, trials=trials, seed=seed)
    except mzsr.EnumerationOverflow as exc:
        raise click.ClickException(
            f"{exc}; rerun with --mode monte-carlo") from exc
    resolved = {"name": name, "mode": mode, "trials": trials, "q": q, "m": m,
                "c": c, "e": e, "d": d, "seed": seed}
    payload = reporting.report_payload("attack", resolved,
                                       {"seed": seed, "result": result.to_json()})
    base = out / f"attack-{name}"
    reporting.write_json(base.with_suffix(".json"), payload)
    reporting.write_csv(base.with_suffix(".csv"), [result.to_json() | {
        "exact": None if result.exact is None else float(result.exact)}])
    if plot:
        reporting.attack_figure(result.to_json(), base.with_suffix(".png"))
    if result.exact is not None:
        click.echo(f"{name}: exact {result.exact} = {float(result.exact):.6f}")
    if result.ci95:
        click.echo(f"{name}: estimate {result.estimate:.6f} "
                   f"(95% CI {result.ci95[0]:.6f}..{result.ci95[1]:.6f}, "
                   f"{result.trials} trials)")


@cli.command()
@click.option("--protocol", "proto", default=None,
              type=click.Choice(["secure-sum", "homomorphic", "basic-ss",
                                 "from-summation"]),
              help="Secrecy audit of this protocol.")
@click.option("--identities", is_flag=True, default=False,
              help="Evaluate the three summation-generator coalition identities.")
@click.option("--generator", "gen", default=None,
              type=click.Choice(sorted(mzsr.GENERATOR_DISTRIBUTIONS)),
              help="Bundle-distribution audit of this generator.")
@click.option("--colluders", default=None, help="Comma-separated player ids.")
@click.option("--target", type=int, default=None, help="Secret owner (player id).")
@click.option("--m", "m_", type=int, default=None)
@click.option("--q", type=int, default=None)
@click.option("--c", "c_", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--plot/--no-plot", default=None)
@click.pass_context
def audit(ctx, proto, identities, gen, colluders, target, m_, q, c_, seed, out, plot):
    """Exact secrecy audit (mutual information) or bundle-distribution audit."""
    config = ctx.obj
    m = int(_opt(config, "m", m_, 3))
    q = int(_opt(config, "q", q, 2))
    c = int(_opt(config, "c", c_, 1))
    seed = _resolve_seed(seed, config)
    out = Path(_opt(config, "out", out, "reports"))
    plot = _opt(config, "plot", plot, True)
    field = _field_from_order(q)
    base = out / "audit"

    if identities:
        values = attacks.summation_identities(field, m, c)
        payload = reporting.report_payload(
            "audit", {"identities": True, "m": m, "q": q, "c": c},
            {"seed": seed, "identities_bits": values,
             "all_zero": all(v == 0.0 for v in values.values())})
        reporting.write_json(base.with_suffix(".json"), payload)
        reporting.write_csv(base.with_suffix(".csv"),
                            [{"identity": k, "bits": v} for k, v in values.items()])
        for k, v in values.items():
            click.echo(f"{k} = {v} bits")
        return
    if proto is not None:
        ids = [int(x) for x in (colluders or "").split(",") if x != ""]
        if not ids:
            raise click.ClickException("--colluders is required for a secrecy audit")
        hspec = None
        if proto == "homomorphic":
            alphas = tuple(vector_from_indices(field, [1] * c) for _ in range(m))
            hspec = protocols.HomomorphicSpec(field, c, alphas,
                                              LinearMap.identity(field, c))
        bits = attacks.secrecy_audit(proto, ids, field, m, c,
                                     secret_owner=target, hspec=hspec)
        resolved = {"protocol": proto, "colluders": ids, "m": m, "q": q,
                    "c": c, "target": target}
        payload = reporting.report_payload("audit", resolved,
                                           {"seed": seed, "mi_bits": bits,
                                            "exact": True})
        reporting.write_json(base.with_suffix(".json"), payload)
        reporting.write_csv(base.with_suffix(".csv"),
                            [{"protocol": proto, "colluders": colluders,
                              "mi_bits": bits}])
        if plot:
            reporting.audit_figure(bits, f"I(Y_{target or 'j'}; view)",
                                   base.with_suffix(".png"),
                                   f"{proto} coalition {ids}")
        click.echo(f"I(secret; coalition view) = {bits} bits (exact)")
        return
    if gen is not None:
        result = mzsr.audit_generator(gen, field, m, c)
        payload = reporting.report_payload(
            "audit", {"generator": gen, "m": m, "q": q, "c": c},
            {"seed": seed, "audit": result.to_json()})
        reporting.write_json(base.with_suffix(".json"), payload)
        reporting.write_csv(base.with_suffix(".csv"), [result.to_json() | {
            "failures": len(result.failures)}])
        click.echo(f"{gen}: zero-sum={result.zero_sum} "
                   f"independent={result.independent}")
        if not result.passed:
            sys.exit(2)
        return
    raise click.ClickException("choose --protocol, --generator, or --identities")


@cli.command()
@click.option("--target", required=True, type=click.Choice(["verify", "attack"]))
@click.option("--param", required=True, help="Swept parameter (eps, n, c, e...).")
@click.option("--values", required=True, help="Comma-separated values.")
@click.option("--protocol", "proto", default=None,
              type=click.Choice(["player-j", "bell", "trusted"]))
@click.option("--name", default=None, help="Attack name when target=attack.")
@click.option("--m", "m_", type=int, default=None)
@click.option("--n", "n_", type=int, default=None)
@click.option("--q", type=int, default=None)
@click.option("--c1", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--noise", default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def sweep(ctx, target, param, values, proto, name, m_, n_, q, c1, alpha, noise,
          trials, seed, out):
    """Sweep one parameter; writes a CSV table and a figure."""
    config = ctx.obj
    m = int(_opt(config, "m", m_, 3))
    n = int(_opt(config, "n", n_, 500))
    q = int(_opt(config, "q", q, 2))
    c1 = float(_opt(config, "c1", c1, 10.0))
    alpha = float(_opt(config, "alpha", alpha, 0.05))
    noise = _opt(config, "noise", noise, "depolarizing")
    trials = int(_opt(config, "trials", trials, 20000))
    seed = _resolve_seed(seed, config)
    out = Path(_opt(config, "out", out, "reports"))
    vals = [float(v) if "." in v or "e" in v else int(v)
            for v in values.split(",")]

    rows = []
    if target == "verify":
        proto = proto or "player-j"
        thresholds = verification.ThresholdSet(c1=c1)
        field = FieldSpec(2)
        for v in vals:
            kwargs = {"m": m, "n": n, "eps": 0.0}
            kwargs[param] = v
            model = _noise_model(noise, kwargs["eps"], field, kwargs["m"])
            source = verification.ghz_source(field, kwargs["m"], model)
            rng = np.random.default_rng(seed)
            if proto == "player-j":
                rep, _ = verification.selftest_player_j(
                    source, kwargs["m"], int(kwargs["n"]), 1, thresholds, rng)
            elif proto == "bell":
                rep = verification.bell_selftest(source, int(kwargs["n"]),
                                                 thresholds, rng)
            else:
                rep, _ = verification.trusted_device_verify(
                    source, int(kwargs["n"]), alpha, rng)
            rows.append({param: v, "pass": rep.passed,
                         "min_margin": min(c.margin for c in rep.checks),
                         "final_fidelity": rep.final_fidelity})
        y_keys = ["min_margin", "final_fidelity"]
        title = f"{proto} vs {param}"
    else:
        if name is None:
            raise click.ClickException("--name is required when target=attack")
        field = _field_from_order(q)
        for v in vals:
            params = {"p": field.p, "ell": field.ell, "m": m,
                      "c": 2, "e": 1, "d": 1}
            params[param] = int(v)
            spec = attacks.AttackSpec(name, params)
            res = attacks.run_attack(spec, mode="monte-carlo", trials=trials,
                                     seed=seed)
            rows.append({param: v, "estimate": res.estimate,
                         "exact": None if res.exact is None else float(res.exact),
                         "ci_low": res.ci95[0], "ci_high": res.ci95[1]})
        y_keys = ["estimate", "exact"]
        title = f"{name} vs {param}"

    base = out / f"sweep-{target}-{param}"
    payload = reporting.report_payload(
        "sweep", {"target": target, "param": param, "values": vals,
                  "seed": seed}, {"seed": seed, "rows": rows})
    reporting.write_json(base.with_suffix(".json"), payload)
    reporting.write_csv(base.with_suffix(".csv"), rows)
    reporting.sweep_figure(rows, param, y_keys, base.with_suffix(".png"), title)
    click.echo(f"swept {param} over {vals}: wrote {base}.csv / .png")


def main():
    try:
        cli.main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - stable exit-code contract
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
